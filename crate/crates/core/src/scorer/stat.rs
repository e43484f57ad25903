use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{Scorer, SourceScorer, Vocab, BOS, EOS, UNK};
use crate::error::{Error, Result};
use crate::text::TokenSeq;

/// First line of a serialized [`StatScorer`].
pub const MAGIC: &str = "PBSCORER1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatScorerParams {
    /// n-gram order of the target language model.
    pub order: usize,
    /// Weight of the language model in the mixture.
    pub lambda: f64,
    /// Additive smoothing constant.
    pub alpha: f64,
    pub em_iterations: usize,
    /// Translation probabilities below this are dropped; their mass goes to UNK.
    pub prune: f64,
    /// Replaces the mixture with a renormalized product
    /// `p_lm^lambda * q^(1 - lambda)`, where `q` tracks which source tokens
    /// the prefix has already translated and only gives EOS mass once all
    /// of them are.
    pub coverage: bool,
}

impl Default for StatScorerParams {
    fn default() -> Self {
        StatScorerParams {
            order: 3,
            lambda: 0.5,
            alpha: 0.1,
            em_iterations: 5,
            prune: 1e-4,
            coverage: false,
        }
    }
}

impl StatScorerParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.order < 2 {
            return bad("order must be at least 2");
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return bad("lambda must lie in (0, 1]");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be positive");
        }
        if !(0.0..1.0).contains(&self.prune) {
            return bad("prune must lie in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Context {
    total: u64,
    next: Vec<(u32, u64)>,
}

/// Language model plus lexical translation table.
#[derive(Clone, Debug)]
pub struct StatScorer {
    params: StatScorerParams,
    source_vocab: Vocab,
    target_vocab: Vocab,
    unigram_counts: Vec<u64>,
    contexts: HashMap<Vec<u32>, Context>,
    rows: Vec<Vec<(u32, f64)>>,
    unigram: Vec<f64>,
    row_mass: Vec<f64>,
}

/// Trains on `(source, target)` pairs.
pub fn train_stat_scorer(
    bitext: &[(TokenSeq, TokenSeq)],
    params: &StatScorerParams,
) -> Result<StatScorer> {
    params.validate()?;
    if bitext.is_empty() {
        return Err(Error::EmptyInput("bitext"));
    }
    let source_vocab = Vocab::infer(bitext.iter().flat_map(|(s, _)| s.iter().cloned()));
    let target_vocab = Vocab::infer(bitext.iter().flat_map(|(_, t)| t.iter().cloned()));
    let pairs: Vec<(Vec<u32>, Vec<u32>)> = bitext
        .iter()
        .map(|(s, t)| (source_vocab.encode(s), target_vocab.encode(t)))
        .collect();

    let mut unigram_counts = vec![0u64; target_vocab.len()];
    let mut ngrams: BTreeMap<Vec<u32>, BTreeMap<u32, u64>> = BTreeMap::new();
    for (_, t) in &pairs {
        let mut seq = Vec::with_capacity(t.len() + 2);
        seq.push(BOS);
        seq.extend_from_slice(t);
        seq.push(EOS);
        for j in 1..seq.len() {
            let w = seq[j];
            unigram_counts[w as usize] += 1;
            for m in 1..params.order.min(j + 1) {
                *ngrams
                    .entry(seq[j - m..j].to_vec())
                    .or_default()
                    .entry(w)
                    .or_default() += 1;
            }
        }
    }
    let contexts = ngrams
        .into_iter()
        .map(|(k, next)| {
            let next: Vec<(u32, u64)> = next.into_iter().collect();
            (
                k,
                Context {
                    total: next.iter().map(|&(_, c)| c).sum(),
                    next,
                },
            )
        })
        .collect();

    let rows = ibm1(&pairs, source_vocab.len(), params);
    Ok(StatScorer::assemble(
        params.clone(),
        source_vocab,
        target_vocab,
        unigram_counts,
        contexts,
        rows,
    ))
}

/// IBM Model 1 without a NULL word. Returns `t(e | f)` rows indexed by source id.
fn ibm1(pairs: &[(Vec<u32>, Vec<u32>)], n_source: usize, params: &StatScorerParams) -> Vec<Vec<(u32, f64)>> {
    let cells: BTreeSet<(u32, u32)> = pairs
        .iter()
        .flat_map(|(s, t)| s.iter().flat_map(move |&f| t.iter().map(move |&e| (f, e))))
        .collect();
    let cells: Vec<(u32, u32)> = cells.into_iter().collect();
    let cell_index: HashMap<(u32, u32), usize> =
        cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let links: Vec<Vec<usize>> = pairs
        .iter()
        .map(|(s, t)| {
            t.iter()
                .flat_map(|&e| s.iter().map(move |&f| (f, e)))
                .map(|c| cell_index[&c])
                .collect()
        })
        .collect();

    let mut prob = vec![1.0f64; cells.len()];
    let mut counts = vec![0.0f64; cells.len()];
    let mut totals = vec![0.0f64; n_source];
    for _ in 0..params.em_iterations {
        counts.iter_mut().for_each(|c| *c = 0.0);
        for ((s, _), link) in pairs.iter().zip(&links) {
            for row in link.chunks(s.len()) {
                let z: f64 = row.iter().map(|&i| prob[i]).sum();
                for &i in row {
                    counts[i] += prob[i] / z;
                }
            }
        }
        totals.iter_mut().for_each(|t| *t = 0.0);
        for (i, &(f, _)) in cells.iter().enumerate() {
            totals[f as usize] += counts[i];
        }
        for (i, &(f, _)) in cells.iter().enumerate() {
            prob[i] = counts[i] / totals[f as usize];
        }
    }
    let mut rows = vec![Vec::new(); n_source];
    for (i, &(f, e)) in cells.iter().enumerate() {
        if f > UNK && prob[i] >= params.prune {
            rows[f as usize].push((e, prob[i]));
        }
    }
    rows
}

/// `(next token, count)` pairs following one n-gram context.
type Counts = Vec<(u32, u64)>;

#[derive(Serialize, Deserialize)]
struct Repr {
    params: StatScorerParams,
    source_vocab: Vocab,
    target_vocab: Vocab,
    unigram_counts: Vec<u64>,
    contexts: Vec<(Vec<u32>, Counts)>,
    rows: Vec<Vec<(u32, f64)>>,
}

impl StatScorer {
    fn assemble(
        params: StatScorerParams,
        source_vocab: Vocab,
        target_vocab: Vocab,
        unigram_counts: Vec<u64>,
        contexts: HashMap<Vec<u32>, Context>,
        rows: Vec<Vec<(u32, f64)>>,
    ) -> StatScorer {
        let v = target_vocab.len() as f64;
        let n: u64 = unigram_counts.iter().sum();
        let unigram = unigram_counts
            .iter()
            .map(|&c| (c as f64 + params.alpha) / (n as f64 + params.alpha * v))
            .collect();
        let row_mass = rows.iter().map(|r| r.iter().map(|&(_, p)| p).sum()).collect();
        StatScorer {
            params,
            source_vocab,
            target_vocab,
            unigram_counts,
            contexts,
            rows,
            unigram,
            row_mass,
        }
    }

    pub fn params(&self) -> &StatScorerParams {
        &self.params
    }

    pub fn source_vocab(&self) -> &Vocab {
        &self.source_vocab
    }

    /// Translation row `t(· | source token)`, sorted by target id.
    pub fn ttable_row(&self, source_token: &str) -> &[(u32, f64)] {
        match self.source_vocab.id(source_token) {
            Some(f) => &self.rows[f as usize],
            None => &[],
        }
    }

    /// Interpolated language-model distribution after `prefix` (starting with BOS).
    pub fn lm_distribution(&self, prefix: &[u32], out: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(&self.unigram);
        let av = self.params.alpha * self.target_vocab.len() as f64;
        for m in 1..=prefix.len().min(self.params.order - 1) {
            let Some(ctx) = self.contexts.get(&prefix[prefix.len() - m..]) else {
                break;
            };
            let denom = ctx.total as f64 + av;
            let scale = av / denom;
            out.iter_mut().for_each(|p| *p *= scale);
            for &(w, c) in &ctx.next {
                out[w as usize] += c as f64 / denom;
            }
        }
    }

    /// Source-conditional distribution: the mean of the translation rows of
    /// the source tokens. Unknown source tokens contribute a uniform row.
    pub fn translation_distribution(&self, source: &[u32]) -> Vec<f64> {
        let v = self.target_vocab.len();
        if source.is_empty() {
            return vec![1.0 / v as f64; v];
        }
        let share = 1.0 / source.len() as f64;
        let mut out = vec![0.0; v];
        for &f in source {
            let row = self.rows.get(f as usize).filter(|r| !r.is_empty());
            match row {
                Some(row) => {
                    for &(e, p) in row {
                        out[e as usize] += share * p;
                    }
                    out[UNK as usize] += share * (1.0 - self.row_mass[f as usize]).max(0.0);
                }
                None => out.iter_mut().for_each(|p| *p += share / v as f64),
            }
        }
        out
    }

    /// Versioned text form: the magic line followed by JSON.
    pub fn to_text(&self) -> String {
        let mut contexts: Vec<(Vec<u32>, Counts)> = self
            .contexts
            .iter()
            .map(|(k, c)| (k.clone(), c.next.clone()))
            .collect();
        contexts.sort();
        let repr = Repr {
            params: self.params.clone(),
            source_vocab: self.source_vocab.clone(),
            target_vocab: self.target_vocab.clone(),
            unigram_counts: self.unigram_counts.clone(),
            contexts,
            rows: self.rows.clone(),
        };
        let body = serde_json::to_string(&repr).expect("scorer serializes");
        format!("{MAGIC}\n{body}\n")
    }

    pub fn from_text(text: &str) -> Result<StatScorer> {
        let Some((magic, body)) = text.split_once('\n') else {
            return Err(Error::Format("truncated scorer file".into()));
        };
        if magic.trim_end() != MAGIC {
            return Err(Error::Format(format!("expected {MAGIC} header, found {magic:?}")));
        }
        let r: Repr = serde_json::from_str(body)?;
        r.params.validate()?;
        let (vs, vt) = (r.source_vocab.len(), r.target_vocab.len());
        let ok = r.unigram_counts.len() == vt
            && r.rows.len() == vs
            && r.rows.iter().flatten().all(|&(e, p)| (e as usize) < vt && (0.0..=1.0).contains(&p))
            && r.contexts.iter().all(|(k, next)| {
                !k.is_empty()
                    && k.len() < r.params.order
                    && k.iter().all(|&w| w == BOS || (w as usize) < vt)
                    && next.iter().all(|&(w, _)| (w as usize) < vt)
            });
        if !ok {
            return Err(Error::Format("inconsistent scorer tables".into()));
        }
        let contexts = r
            .contexts
            .into_iter()
            .map(|(k, next)| {
                let total = next.iter().map(|&(_, c)| c).sum();
                (k, Context { total, next })
            })
            .collect();
        Ok(StatScorer::assemble(
            r.params,
            r.source_vocab,
            r.target_vocab,
            r.unigram_counts,
            contexts,
            r.rows,
        ))
    }
}

/// A target token covers the uncovered source token that translates to it
/// with the highest probability, if that probability reaches this value.
const COVER_MIN: f64 = 0.01;
/// Share of the coverage expert spread over all source rows, covered or not.
const REVISIT_SHARE: f64 = 0.1;
/// Uniform floor of the coverage expert, keeping every token possible.
const FLOOR: f64 = 1e-6;

struct Prepared<'a> {
    scorer: &'a StatScorer,
    translation: Vec<f64>,
    /// Known source tokens, for coverage tracking.
    coverable: Vec<u32>,
}

impl Prepared<'_> {
    fn t(&self, e: u32, f: u32) -> f64 {
        let row = &self.scorer.rows[f as usize];
        row.binary_search_by_key(&e, |&(id, _)| id)
            .map_or(0.0, |i| row[i].1)
    }

    /// Coverage expert: mostly the translation rows of source tokens
    /// `prefix` has not covered, EOS once none are left.
    fn coverage_expert(&self, prefix: &[u32]) -> Vec<f64> {
        let mut covered = vec![false; self.coverable.len()];
        for &e in prefix.iter().filter(|&&e| e != BOS) {
            let mut best: Option<(usize, f64)> = None;
            for (j, &f) in self.coverable.iter().enumerate() {
                if covered[j] {
                    continue;
                }
                let p = self.t(e, f);
                if p >= COVER_MIN && best.is_none_or(|(_, b)| p > b) {
                    best = Some((j, p));
                }
            }
            if let Some((j, _)) = best {
                covered[j] = true;
            }
        }
        let open: Vec<u32> = self
            .coverable
            .iter()
            .zip(&covered)
            .filter(|(_, c)| !**c)
            .map(|(&f, _)| f)
            .collect();
        let v = self.scorer.target_vocab.len();
        let mut q = if self.coverable.is_empty() {
            self.translation.clone()
        } else if open.is_empty() {
            let mut q = vec![0.0; v];
            q[EOS as usize] = 1.0;
            q
        } else {
            self.scorer.translation_distribution(&open)
        };
        for (x, &t) in q.iter_mut().zip(&self.translation) {
            *x = (1.0 - FLOOR) * ((1.0 - REVISIT_SHARE) * *x + REVISIT_SHARE * t) + FLOOR / v as f64;
        }
        q
    }
}

impl SourceScorer for Prepared<'_> {
    fn step_into(&self, prefix: &[u32], out: &mut Vec<f64>) {
        self.scorer.lm_distribution(prefix, out);
        let lambda = self.scorer.params.lambda;
        if lambda >= 1.0 {
            out.iter_mut().for_each(|p| *p = p.ln());
        } else if self.scorer.params.coverage {
            let q = self.coverage_expert(prefix);
            for (p, &t) in out.iter_mut().zip(&q) {
                *p = lambda * p.ln() + (1.0 - lambda) * t.ln();
            }
            let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let log_z = max + out.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
            out.iter_mut().for_each(|x| *x -= log_z);
        } else {
            for (p, &t) in out.iter_mut().zip(&self.translation) {
                *p = (lambda * *p + (1.0 - lambda) * t).ln();
            }
        }
    }
}

impl Scorer for StatScorer {
    fn vocab(&self) -> &Vocab {
        &self.target_vocab
    }

    fn encode_source(&self, source: &[String]) -> Vec<u32> {
        self.source_vocab.encode(source)
    }

    fn prepare<'a>(&'a self, source: &[u32]) -> Box<dyn SourceScorer + 'a> {
        let translation = if self.params.lambda >= 1.0 {
            Vec::new()
        } else {
            self.translation_distribution(source)
        };
        let coverable = if self.params.coverage {
            source
                .iter()
                .copied()
                .filter(|&f| self.rows.get(f as usize).is_some_and(|r| !r.is_empty()))
                .collect()
        } else {
            Vec::new()
        };
        Box::new(Prepared {
            scorer: self,
            translation,
            coverable,
        })
    }
}
