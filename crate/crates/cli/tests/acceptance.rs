//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL line;
//! run with `--nocapture` to see them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use lexpara::constraints::{
    realize, system, violates, ConstraintSet, Lexicon, Morphology, PositionalBan, PositionalMode, PpdbIndex,
    RealizeContext,
};
use lexpara::decoder::{compile, decode, DecodeParams};
use lexpara::eval::{easl_aggregate, modified_bleu, spearman, train_regression, EaslParams};
use lexpara::idf::{candidate_pool, IdfThresholds};
use lexpara::pipeline::{
    build_all, eval_diversity, generate_from_config, read_pairs, write_toy_fixture, Artifacts, FixtureSpec,
    ParaphraseRecord, PipelineConfig,
};
use lexpara::scorer::{train_stat_scorer, Scorer, SourceScorer, StatScorer, StatScorerParams, BOS, EOS};
use lexpara::seed;
use lexpara::text::tokenize;
use lexpara::toy::{synthetic_annotations, AnnotationPlan};
use lexpara::TokenSeq;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn seq(s: &str) -> TokenSeq {
    TokenSeq::from_words(s)
}

// 1. Full-width constrained beam search equals exhaustive search.

const LETTERS: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

fn random_scorer<R: Rng>(rng: &mut R, n_words: usize) -> StatScorer {
    let src = ["p", "q", "r"];
    let bitext: Vec<(TokenSeq, TokenSeq)> = (0..40)
        .map(|_| {
            let s: Vec<&str> = (0..rng.random_range(1..=3)).map(|_| *src.choose(rng).unwrap()).collect();
            let t: Vec<&str> = (0..rng.random_range(1..=5)).map(|_| *LETTERS[..n_words].choose(rng).unwrap()).collect();
            (seq(&s.join(" ")), seq(&t.join(" ")))
        })
        .collect();
    let params = StatScorerParams {
        order: rng.random_range(2..=3),
        lambda: rng.random_range(0.2..=1.0),
        ..Default::default()
    };
    train_stat_scorer(&bitext, &params).unwrap()
}

fn random_constraints<R: Rng>(rng: &mut R, words: &[String]) -> ConstraintSet {
    let mut cs = ConstraintSet::default();
    let mut budget = rng.random_range(0..=3);
    while budget > 0 {
        let n = rng.random_range(1..=budget.min(2));
        let p: Vec<&str> = (0..n).map(|_| words.choose(rng).unwrap().as_str()).collect();
        cs.positive.push(seq(&p.join(" ")));
        budget -= n;
    }
    for _ in 0..rng.random_range(0..=2) {
        cs.negative.push(seq(words.choose(rng).unwrap()));
    }
    if rng.random_bool(0.3) {
        cs.positional.push(PositionalBan {
            pos: rng.random_range(0..3),
            token: words.choose(rng).unwrap().clone(),
        });
    }
    cs
}

/// Depth-first enumeration of every output of at most `max_len` tokens
/// (EOS included), keeping the best one that satisfies `cs`.
fn exhaustive(scorer: &StatScorer, source: &TokenSeq, cs: &ConstraintSet, max_len: usize) -> Option<(f64, Vec<u32>)> {
    fn walk(
        prepared: &dyn SourceScorer,
        scorer: &StatScorer,
        cs: &ConstraintSet,
        prefix: &mut Vec<u32>,
        score: f64,
        max_len: usize,
        best: &mut Option<(f64, Vec<u32>)>,
    ) {
        let dist = prepared.step(prefix);
        let body = &prefix[1..];
        if violates(&scorer.vocab().decode(body), cs).is_clean() {
            let total = score + dist[EOS as usize];
            if best.as_ref().is_none_or(|(s, _)| total > *s) {
                *best = Some((total, body.to_vec()));
            }
        }
        if body.len() + 1 < max_len {
            for id in 2..scorer.vocab().len() as u32 {
                prefix.push(id);
                walk(prepared, scorer, cs, prefix, score + dist[id as usize], max_len, best);
                prefix.pop();
            }
        }
    }
    let prepared = scorer.prepare(&scorer.encode_source(source));
    let mut best = None;
    walk(prepared.as_ref(), scorer, cs, &mut vec![BOS], 0.0, max_len, &mut best);
    best
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut rng = seed::rng(20_240_601);
    let mut mismatches = Vec::new();
    let (mut satisfiable, mut rejected) = (0, 0);
    for inst in 0..200 {
        let n_words = rng.random_range(3..=8);
        let scorer = random_scorer(&mut rng, n_words);
        let words: Vec<String> = (2..scorer.vocab().len() as u32).map(|i| scorer.vocab().token(i).to_owned()).collect();
        let max_len = rng.random_range(2..=6);
        let cs = random_constraints(&mut rng, &words);
        let source = seq(["p", "q r", "r p q"][inst % 3]);
        let oracle = exhaustive(&scorer, &source, &cs, max_len);
        let Ok(automaton) = compile(&cs, scorer.vocab(), None) else {
            rejected += 1;
            if oracle.is_some() {
                mismatches.push(inst);
            }
            continue;
        };
        let params = DecodeParams {
            beam_size: (words.len() + 1).pow(max_len as u32),
            max_len: Some(max_len),
            ..Default::default()
        };
        let got = &decode(&scorer, &source, &automaton, &params).outputs[0];
        match oracle {
            Some((score, ids)) => {
                satisfiable += 1;
                let same = got.finished && scorer.vocab().encode(&got.tokens) == ids && (got.score - score).abs() < 1e-9;
                if !same {
                    mismatches.push(inst);
                }
            }
            None => {
                if !got.is_flagged() {
                    mismatches.push(inst);
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(mismatches.is_empty(), "{} mismatches, first at instance {}", mismatches.len(), mismatches[0]);
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:.1?}");
    Ok(format!(
        "200 instances, {satisfiable} satisfiable, {rejected} rejected at compile time, 0 mismatches, {elapsed:.1?}"
    ))
}

// 2 and 5 share one generation run over the toy fixture.

struct ToyRun {
    cfg: PipelineConfig,
    records: Vec<ParaphraseRecord>,
}

fn toy_run(dir: &Path) -> ToyRun {
    let path = write_toy_fixture(dir, &FixtureSpec::default()).unwrap();
    let cfg = PipelineConfig::load(&path).unwrap();
    build_all(&cfg).unwrap();
    let (records, _) = generate_from_config(&cfg, &mut |_, _| {}).unwrap();
    ToyRun { cfg, records }
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    needle.is_empty() || haystack.windows(needle.len()).any(|w| w == needle)
}

fn criterion_2(run: &ToyRun) -> Check {
    let systems: BTreeSet<u32> = run.records.iter().flat_map(|r| r.systems.iter().copied()).collect();
    ensure!(run.records.len() >= 10_000, "only {} records", run.records.len());
    ensure!(systems.len() == 37, "only {} systems produced records", systems.len());
    let mut unflagged = 0;
    for r in run.records.iter().filter(|r| !r.is_flagged()) {
        unflagged += 1;
        let out = r.output.tokens();
        for p in &r.constraints.positive {
            ensure!(contains_run(out, p.tokens()), "sentence {}: positive {p} missing from {}", r.sentence_id, r.output);
        }
        for n in &r.constraints.negative {
            ensure!(!contains_run(out, n.tokens()), "sentence {}: negative {n} in {}", r.sentence_id, r.output);
        }
        for ban in &r.constraints.positional {
            ensure!(out.get(ban.pos) != Some(&ban.token), "sentence {}: {} at {}", r.sentence_id, ban.token, ban.pos);
        }
        for b in &r.constraints.prefix_bans {
            ensure!(!out.starts_with(b.tokens()), "sentence {}: output starts with {b}", r.sentence_id);
        }
        let report = violates(&r.output, &r.constraints);
        ensure!(report.is_clean(), "sentence {}: {report:?}", r.sentence_id);
    }
    Ok(format!(
        "{} records over {} systems, {unflagged} unflagged, 0 violations",
        run.records.len(),
        systems.len()
    ))
}

fn criterion_5(run: &ToyRun) -> Check {
    let report = eval_diversity(&run.records, &run.cfg.eval.buckets, run.cfg.eval.tolerance).map_err(|e| e.to_string())?;
    let bleu = |s: u32| report.system(s).map(|d| d.all.bleu).ok_or(format!("system {s} missing"));
    let (b21, b34, b28) = (bleu(21)?, bleu(34)?, bleu(28)?);
    ensure!(b21 < b34 && b34 < b28, "bleu 21={b21:.2} 34={b34:.2} 28={b28:.2}");
    let rho = report.bleu_precision_spearman.ok_or("spearman undefined")?;
    ensure!(report.systems.len() >= 10, "only {} systems", report.systems.len());
    ensure!(rho > 0.8, "spearman {rho:.4}");
    Ok(format!(
        "bleu 21={b21:.2} < 34={b34:.2} < 28={b28:.2}; spearman over {} systems {rho:.4}",
        report.systems.len()
    ))
}

// 3. DBA decode cost does not grow with the number of constraints.

fn criterion_3(cfg: &PipelineConfig) -> Check {
    let art = Artifacts::load(cfg).map_err(|e| e.to_string())?;
    let refs = read_pairs(&cfg.paths.references).map_err(|e| e.to_string())?;
    let params = DecodeParams {
        beam_size: 10,
        ..Default::default()
    };
    let vocab = art.scorer.vocab();
    let usable = |w: &str| {
        let single = ConstraintSet {
            positive: vec![seq(w)],
            ..Default::default()
        };
        compile(&single, vocab, art.bpe.as_ref()).is_ok()
    };
    let mut filler: Vec<String> = art
        .known_words()
        .into_iter()
        .filter(|w| w.chars().all(|c| c.is_ascii_lowercase()) && usable(w))
        .collect();
    filler.sort();
    let mut rng = seed::rng(3);
    let mut cases = Vec::new();
    for (source, reference) in refs.iter().take(100) {
        let mut words: Vec<String> = Vec::new();
        for t in reference.iter().chain(std::iter::repeat_with(|| filler.choose(&mut rng).unwrap())) {
            if !words.contains(t) && usable(t) {
                words.push(t.clone());
            }
            if words.len() == 8 {
                break;
            }
        }
        cases.push((source.clone(), words));
    }
    ensure!(cases.len() == 100, "only {} references", cases.len());
    let automaton = |words: &[String]| {
        let cs = ConstraintSet {
            positive: words.iter().map(|w| seq(w)).collect(),
            ..Default::default()
        };
        compile(&cs, vocab, art.bpe.as_ref()).unwrap()
    };
    let time = |source: &TokenSeq, a: &lexpara::decoder::ConstraintAutomaton| {
        (0..3)
            .map(|_| {
                let t = Instant::now();
                std::hint::black_box(decode(&art.scorer, source, a, &params));
                t.elapsed()
            })
            .min()
            .unwrap()
    };
    let (mut one, mut eight) = (Vec::new(), Vec::new());
    for (source, words) in &cases {
        let (a1, a8) = (automaton(&words[..1]), automaton(words));
        one.push(time(source, &a1));
        eight.push(time(source, &a8));
    }
    one.sort();
    eight.sort();
    let (m1, m8) = (one[50], eight[50]);
    let ratio = m8.as_secs_f64() / m1.as_secs_f64();
    ensure!(ratio <= 2.0, "median {m8:?} with 8 constraints vs {m1:?} with 1 (ratio {ratio:.2})");
    Ok(format!("median {m1:.2?} with C=1, {m8:.2?} with C=8, ratio {ratio:.2}"))
}

// 4. The worked example from the IDF table.

fn criterion_4() -> Check {
    let idf: HashMap<String, f64> = [
        ("proud", 11.1),
        ("told", 7.9),
        ("work", 7.4),
        ("them", 6.2),
        ("her", 5.8),
        ("was", 4.3),
        ("for", 3.6),
        ("to", 2.3),
    ]
    .into_iter()
    .map(|(t, v)| (t.to_owned(), v))
    .collect();
    let reference = tokenize("I told her I was proud to work for them.");
    let pool = candidate_pool(&reference, &idf, &IdfThresholds::default());
    ensure!(pool == ["proud", "told", "work", "for", "to"], "pool {pool:?}");
    let morphology = Morphology::new();
    let lexicon = Lexicon::builtin();
    let ppdb = PpdbIndex::new(vec![]);
    let ctx = RealizeContext {
        morphology: &morphology,
        lexicon: &lexicon,
        ppdb: Some(&ppdb),
        positional: PositionalMode::PerPosition,
    };
    let sets = realize(&system(18).unwrap(), &reference, &pool, &ctx, &mut seed::rng(0));
    ensure!(sets.len() == 1, "{} constraint sets", sets.len());
    let neg: BTreeSet<String> = sets[0].negative.iter().map(|s| s.to_string()).collect();
    let want: BTreeSet<String> = ["for", "For", "to", "To"].iter().map(|s| s.to_string()).collect();
    ensure!(neg == want && sets[0].positive.is_empty() && sets[0].positional.is_empty(), "system 18 gave {:?}", sets[0]);
    Ok(format!("pool {pool:?}; system 18 bans {neg:?}"))
}

// 6. Metric exactness.

fn criterion_6() -> Check {
    let pairs = |xs: &[(&str, &str)]| -> Vec<(TokenSeq, TokenSeq)> {
        xs.iter().map(|(r, p)| (tokenize(r), tokenize(p))).collect()
    };
    let identity = modified_bleu(&pairs(&[("the cat sat on the mat .", "The cat sat on the mat.")])).unwrap();
    ensure!(identity == 100.0, "identity {identity}");
    let disjoint = modified_bleu(&pairs(&[("the cat sat", "dogs run far")])).unwrap();
    ensure!(disjoint == 0.0, "disjoint {disjoint}");
    // Clipped n-gram matches over totals, orders 1 to 4:
    //   earthquakes pair: 3/5 1/4 0/3 0/2
    //   mat pair:         5/6 3/5 2/4 1/3
    //   repeated "the":   4/5 3/4 2/3 1/2
    let worksheet = pairs(&[
        ("How often do earthquakes occur?", "How frequently do earthquakes happen?"),
        ("The cat sat on the mat.", "the cat sat on a mat"),
        ("the the the dog", "the the the the dog"),
    ]);
    let want = 100.0 * ((12.0 / 16.0) * (7.0 / 13.0) * (4.0 / 10.0) * (2.0 / 7.0f64)).powf(0.25);
    let got = modified_bleu(&worksheet).unwrap();
    ensure!((got - want).abs() < 1e-6, "worksheet {got} vs {want}");

    let mut rng = seed::rng(6);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(3..15);
        let xs: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..4u8))).collect();
        let ys: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..4u8))).collect();
        let (Ok(rho), Some(brute)) = (spearman(&xs, &ys), rank_correlation(&xs, &ys)) else {
            continue;
        };
        worst = worst.max((rho - brute).abs());
    }
    ensure!(worst < 1e-9, "spearman off by {worst:e}");
    Ok(format!("identity 100, disjoint 0, worksheet {got:.6}; spearman on ties within {worst:.1e}"))
}

/// Pearson correlation of mid-ranks, where a value's rank is the number of
/// smaller values plus half of the other equal ones, plus one.
fn rank_correlation(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let ranks = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| {
                let below = v.iter().filter(|b| *b < a).count() as f64;
                let equal = v.iter().filter(|b| *b == a).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

// 7. Annotation aggregation against planted failures and a recount.

fn criterion_7() -> Check {
    let plan = AnnotationPlan::default();
    let synth = synthetic_annotations(7, &plan);
    let params = EaslParams::default();
    let report = easl_aggregate(&synth.records, &params);

    let want_dq: BTreeSet<String> = synth
        .planted_failures
        .iter()
        .filter(|(_, &f)| f as f64 / plan.checks_per_worker as f64 > 0.10)
        .map(|(w, _)| w.clone())
        .collect();
    ensure!(report.disqualified == want_dq, "disqualified {:?}, planted {want_dq:?}", report.disqualified);

    let dropped: BTreeSet<&String> = report.disqualified.iter().chain(&report.low_volume).collect();
    let mut recount: BTreeMap<(u32, &str), Vec<f64>> = BTreeMap::new();
    for r in synth.records.iter().filter(|r| !r.is_attention_check && !dropped.contains(&r.worker_id)) {
        recount.entry((r.system_id, &r.item_id)).or_default().push(f64::from(r.score));
    }
    ensure!(recount.len() == report.items.len(), "{} items vs {} recounted", report.items.len(), recount.len());
    let mut worst: f64 = 0.0;
    for item in &report.items {
        let scores = &recount[&(item.system_id, item.item_id.as_str())];
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        worst = worst.max((mean - item.mean).abs());
    }
    ensure!(worst < 1e-9, "item means off by {worst:e}");
    Ok(format!(
        "{} workers disqualified as planted, {} items recounted within {worst:.1e}",
        want_dq.len(),
        report.items.len()
    ))
}

// 8. Quality regression on a monotone synthetic relation.

fn criterion_8() -> Check {
    let mut rng = seed::rng(8);
    let weights = [1.5, -0.7, 0.4, 2.0, 0.0, -1.1, 0.8, 0.3];
    let rows: Vec<(Vec<f64>, f64)> = (0..2000)
        .map(|_| {
            let x: Vec<f64> = (0..weights.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let z: f64 = x.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() + rng.random_range(-0.2..0.2);
            (x, 100.0 / (1.0 + (-z).exp()))
        })
        .collect();
    let held_out_rho = |train: &[(Vec<f64>, f64)], test: &[(Vec<f64>, f64)]| -> Result<f64, String> {
        let model = train_regression(train, 1.0).map_err(|e| e.to_string())?;
        let pred: Vec<f64> = test.iter().map(|(x, _)| model.raw(x)).collect();
        let gold: Vec<f64> = test.iter().map(|(_, y)| *y).collect();
        spearman(&pred, &gold).map_err(|e| e.to_string())
    };
    let (train, test) = rows.split_at(1500);
    let rho = held_out_rho(train, test)?;
    ensure!(rho > 0.9, "held-out spearman {rho:.4}");

    let mut labels: Vec<f64> = train.iter().map(|(_, y)| *y).collect();
    labels.shuffle(&mut rng);
    let shuffled: Vec<(Vec<f64>, f64)> = train.iter().map(|(x, _)| x.clone()).zip(labels).collect();
    let null = held_out_rho(&shuffled, test)?;
    ensure!(null.abs() < 0.2, "shuffled-label spearman {null:.4}");
    Ok(format!("held-out spearman {rho:.4}; shuffled labels {null:.4}"))
}

// 9. The CLI pipeline is byte-identical for every --jobs value.

fn lexpara(args: &[String]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_lexpara"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("lexpara {args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn criterion_9(dir: &Path) -> Check {
    let spec = FixtureSpec {
        references: 30,
        bitext_pairs: 1500,
        quality_examples: 200,
        ..Default::default()
    };
    let cfg = write_toy_fixture(dir, &spec).map_err(|e| e.to_string())?;
    let cfg = cfg.to_str().unwrap();
    let mut baseline: Option<BTreeMap<String, Vec<u8>>> = None;
    for jobs in 1..=8 {
        let j = jobs.to_string();
        let out = dir.join(format!("run-{jobs}"));
        let p = |name: &str| out.join(name).to_str().unwrap().to_owned();
        let base = ["--config", cfg, "--jobs", &j];
        let with = |rest: &[&str]| -> Vec<String> { base.iter().chain(rest).map(|s| s.to_string()).collect() };
        let mut files = BTreeMap::new();
        files.insert("build".to_owned(), lexpara(&with(&["build"]))?);
        lexpara(&with(&["generate", "--out", &p("gen.jsonl")]))?;
        lexpara(&with(&["dedup", "--input", &p("gen.jsonl"), "--out", &p("dedup.jsonl")]))?;
        let quality = dir.join("quality.tsv");
        lexpara(&with(&["train-quality", "--data", quality.to_str().unwrap(), "--out", &p("model.json")]))?;
        lexpara(&with(&["score", "--input", &p("dedup.jsonl"), "--model", &p("model.json"), "--out", &p("scored.jsonl")]))?;
        files.insert("eval".to_owned(), lexpara(&with(&["eval-diversity", "--json", "--input", &p("scored.jsonl")]))?);
        for name in ["gen.jsonl", "dedup.jsonl", "model.json", "scored.jsonl"] {
            files.insert(name.to_owned(), fs::read(out.join(name)).map_err(|e| e.to_string())?);
        }
        match &baseline {
            None => baseline = Some(files),
            Some(b) => {
                for (name, bytes) in &files {
                    ensure!(&b[name] == bytes, "{name} differs between --jobs 1 and --jobs {jobs}");
                }
            }
        }
    }
    let b = baseline.unwrap();
    Ok(format!("{} outputs byte-identical for --jobs 1..=8 ({} bytes of records)", b.len(), b["gen.jsonl"].len()))
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let run = toy_run(&dir.path().join("toy"));
    let results: Vec<(u32, Check)> = vec![
        (1, criterion_1()),
        (2, criterion_2(&run)),
        (3, criterion_3(&run.cfg)),
        (4, criterion_4()),
        (5, criterion_5(&run)),
        (6, criterion_6()),
        (7, criterion_7()),
        (8, criterion_8()),
        (9, criterion_9(&dir.path().join("jobs"))),
    ];
    let mut failed = Vec::new();
    for (n, r) in &results {
        match r {
            Ok(detail) => println!("criterion {n}: PASS  {detail}"),
            Err(detail) => {
                println!("criterion {n}: FAIL  {detail}");
                failed.push(*n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
