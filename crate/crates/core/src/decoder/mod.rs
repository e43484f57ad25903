//! Lexically constrained beam search with dynamic beam allocation.
//!
//! Hypotheses are grouped into banks by how many positive constraint tokens
//! they have produced (completed phrases plus the longest phrase in
//! progress), and the beam is split across banks. Total work per
//! step is bounded by the beam size no matter how many constraints there are.

mod automaton;

use std::cmp::Ordering;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::scorer::{Scorer, Segmentation, BOS, EOS, UNK};
use crate::text::{bpe_decode, BpeModel, TokenSeq};

pub use automaton::{compile, ConstraintAutomaton};
use automaton::CursorState;

pub const FLAG_INCOMPLETE: &str = "incomplete";
pub const FLAG_NO_HYPOTHESIS: &str = "no-hypothesis";
pub const FLAG_MALFORMED: &str = "malformed-subwords";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodeParams {
    pub beam_size: usize,
    /// Maximum output length in tokens, counting the final EOS. `None` means
    /// `max(2 * source length + 5, 20)`.
    pub max_len: Option<usize>,
    pub num_outputs: usize,
    pub allow_unk: bool,
    /// Finished outputs are ranked by `score / len^length_penalty`, where
    /// `len` counts EOS. Zero ranks by raw log-probability.
    pub length_penalty: f64,
}

impl Default for DecodeParams {
    fn default() -> Self {
        DecodeParams {
            beam_size: 10,
            max_len: None,
            num_outputs: 1,
            allow_unk: false,
            length_penalty: 0.0,
        }
    }
}

impl DecodeParams {
    pub fn validate(&self) -> Result<()> {
        if self.beam_size == 0 {
            return Err(Error::InvalidParameter("beam size must be at least 1".into()));
        }
        if self.num_outputs == 0 {
            return Err(Error::InvalidParameter("num_outputs must be at least 1".into()));
        }
        if !(self.length_penalty >= 0.0 && self.length_penalty.is_finite()) {
            return Err(Error::InvalidParameter("length_penalty must be non-negative".into()));
        }
        if matches!(self.max_len, Some(n) if n < 2) {
            return Err(Error::InvalidParameter("max_len must be at least 2".into()));
        }
        Ok(())
    }

    pub fn max_len_for(&self, source_len: usize) -> usize {
        self.max_len.unwrap_or_else(|| (2 * source_len + 5).max(20))
    }
}

/// A decoded output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    /// Scorer tokens, without BOS and EOS.
    pub tokens: TokenSeq,
    /// `tokens` with subwords merged back into words.
    pub words: TokenSeq,
    /// Sum of log-probabilities, including EOS when finished.
    pub score: f64,
    pub met_count: usize,
    pub finished: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl Hypothesis {
    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub outputs: Vec<Hypothesis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Splits `k` beam slots over banks holding `counts[b]` candidates each.
///
/// Every bank first gets `k / banks`, with the remainder going to the highest
/// banks. Slots a bank cannot use move to the nearest higher bank that can
/// use them, then to the nearest lower one. The result never exceeds
/// `counts`, and sums to `min(k, sum(counts))`.
pub fn allocate_banks(counts: &[usize], k: usize) -> Vec<usize> {
    let n = counts.len();
    if n == 0 {
        return Vec::new();
    }
    let base = k / n;
    let rem = k % n;
    let mut quota: Vec<usize> = (0..n).map(|b| base + usize::from(b >= n - rem)).collect();
    let mut spare = vec![0usize; n];
    for b in 0..n {
        if quota[b] > counts[b] {
            spare[b] = quota[b] - counts[b];
            quota[b] = counts[b];
        }
    }
    for b in (0..n).rev() {
        let mut s = spare[b];
        for j in (b + 1..n).chain((0..b).rev()) {
            if s == 0 {
                break;
            }
            let give = (counts[j] - quota[j]).min(s);
            quota[j] += give;
            s -= give;
        }
    }
    quota
}

struct Live {
    prefix: Vec<u32>,
    score: f64,
    state: CursorState,
}

struct Candidate {
    parent: u32,
    token: u32,
    score: f64,
    state: CursorState,
}

struct Finished {
    ids: Vec<u32>,
    score: f64,
    rank: f64,
    met_count: u32,
}

fn by_score(a: f64, b: f64) -> Ordering {
    b.total_cmp(&a)
}

fn insert_finished(pool: &mut Vec<Finished>, f: Finished, keep: usize) {
    let at = pool
        .partition_point(|g| by_score(g.rank, f.rank).then_with(|| g.ids.cmp(&f.ids)) == Ordering::Less);
    if at < keep {
        pool.insert(at, f);
        pool.truncate(keep);
    }
}

fn to_words(tokens: &TokenSeq, seg: Segmentation) -> std::result::Result<TokenSeq, TokenSeq> {
    match seg {
        Segmentation::Words => Ok(tokens.clone()),
        Segmentation::Bpe => bpe_decode(tokens).map_err(|_| tokens.clone()),
    }
}

fn hypothesis<S: Scorer + ?Sized>(scorer: &S, ids: &[u32], score: f64, met: u32, finished: bool) -> Hypothesis {
    let tokens = scorer.vocab().decode(ids);
    let mut flags = Vec::new();
    let words = to_words(&tokens, scorer.vocab().segmentation()).unwrap_or_else(|t| {
        flags.push(FLAG_MALFORMED.to_string());
        t
    });
    if !finished {
        flags.push(FLAG_INCOMPLETE.to_string());
    }
    Hypothesis {
        tokens,
        words,
        score,
        met_count: met as usize,
        finished,
        flags,
    }
}

/// Beam search for `source` under the compiled constraints.
///
/// Returns up to `num_outputs` finished hypotheses, best first. If none
/// finishes within `max_len`, the single best unfinished hypothesis is
/// returned with the `incomplete` flag and a diagnostic.
pub fn decode<S: Scorer + ?Sized>(
    scorer: &S,
    source: &TokenSeq,
    automaton: &ConstraintAutomaton,
    params: &DecodeParams,
) -> DecodeResult {
    let vocab = scorer.vocab();
    let src = scorer.encode_source(source);
    let prepared = scorer.prepare(&src);
    let max_len = params.max_len_for(source.len()).max(1);
    let k = params.beam_size.max(1);
    let keep = params.num_outputs.max(1);
    let total = automaton.total_positive_tokens();

    let mut beam = vec![Live {
        prefix: vec![BOS],
        score: 0.0,
        state: automaton.initial(),
    }];
    let mut finished: Vec<Finished> = Vec::new();
    let mut dist = Vec::with_capacity(vocab.len());
    let mut order: Vec<u32> = (0..vocab.len() as u32).collect();
    let mut forced = Vec::new();
    let mut chosen = Vec::new();

    for t in 0..max_len {
        let last = t + 1 == max_len;
        let mut cands: Vec<Candidate> = Vec::new();
        for (pi, h) in beam.iter().enumerate() {
            prepared.step_into(&h.prefix, &mut dist);
            let eos_ok = automaton.eos_allowed(&h.state);
            if last {
                if eos_ok {
                    cands.push(Candidate {
                        parent: pi as u32,
                        token: EOS,
                        score: h.score + dist[EOS as usize],
                        state: h.state.clone(),
                    });
                }
                continue;
            }
            order.sort_unstable_by(|&a, &b| by_score(dist[a as usize], dist[b as usize]).then(a.cmp(&b)));
            chosen.clear();
            for &tok in &order {
                if chosen.len() == k {
                    break;
                }
                if (tok == EOS && !eos_ok) || (tok == UNK && !params.allow_unk) {
                    continue;
                }
                if let Some(state) = automaton.advance(&h.state, &h.prefix, tok, vocab) {
                    chosen.push(tok);
                    cands.push(Candidate {
                        parent: pi as u32,
                        token: tok,
                        score: h.score + dist[tok as usize],
                        state,
                    });
                }
            }
            automaton.forced(&h.state, &mut forced);
            for &tok in &forced {
                if chosen.contains(&tok) {
                    continue;
                }
                if let Some(state) = automaton.advance(&h.state, &h.prefix, tok, vocab) {
                    chosen.push(tok);
                    cands.push(Candidate {
                        parent: pi as u32,
                        token: tok,
                        score: h.score + dist[tok as usize],
                        state,
                    });
                }
            }
        }
        if cands.is_empty() {
            break;
        }
        cands.sort_unstable_by(|a, b| {
            by_score(a.score, b.score)
                .then(a.parent.cmp(&b.parent))
                .then(a.token.cmp(&b.token))
        });
        let mut counts = vec![0usize; total + 1];
        for c in &cands {
            counts[c.state.progress as usize] += 1;
        }
        let mut quota = allocate_banks(&counts, k);
        let mut next = Vec::with_capacity(k);
        for c in cands {
            let q = &mut quota[c.state.progress as usize];
            if *q == 0 {
                continue;
            }
            *q -= 1;
            let parent = &beam[c.parent as usize];
            if c.token == EOS {
                let mut ids = parent.prefix[1..].to_vec();
                ids.push(EOS);
                let rank = c.score / (ids.len() as f64).powf(params.length_penalty);
                let f = Finished {
                    ids,
                    score: c.score,
                    rank,
                    met_count: c.state.met_count,
                };
                insert_finished(&mut finished, f, keep);
                continue;
            }
            let mut prefix = Vec::with_capacity(parent.prefix.len() + 1);
            prefix.extend_from_slice(&parent.prefix);
            prefix.push(c.token);
            next.push(Live {
                prefix,
                score: c.score,
                state: c.state,
            });
        }
        if next.is_empty() {
            break;
        }
        beam = next;
        // Scores only fall as hypotheses grow, so no live hypothesis can rank
        // above its raw score spread over the longest allowed length.
        let best_live = beam.iter().map(|h| h.score).fold(f64::NEG_INFINITY, f64::max);
        let bound = best_live / (max_len as f64).powf(params.length_penalty);
        if finished.len() >= keep && finished[keep - 1].rank >= bound {
            break;
        }
    }

    if !finished.is_empty() {
        let outputs = finished
            .into_iter()
            .map(|f| hypothesis(scorer, &f.ids, f.score, f.met_count, true))
            .collect();
        return DecodeResult {
            outputs,
            diagnostic: None,
        };
    }
    let best = beam.iter().min_by(|a, b| {
        b.state
            .met_count
            .cmp(&a.state.met_count)
            .then(by_score(a.score, b.score))
            .then(a.prefix.cmp(&b.prefix))
    });
    match best {
        Some(h) => {
            let whole_words = &h.prefix[1..h.state.word_start as usize];
            DecodeResult {
                outputs: vec![hypothesis(scorer, whole_words, h.score, h.state.met_count, false)],
                diagnostic: Some(format!(
                    "no hypothesis finished within {max_len} tokens; best met {} of {total} constraint tokens",
                    h.state.met_count
                )),
            }
        }
        None => DecodeResult {
            outputs: vec![Hypothesis {
                tokens: TokenSeq::empty(),
                words: TokenSeq::empty(),
                score: f64::NEG_INFINITY,
                met_count: 0,
                finished: false,
                flags: vec![FLAG_NO_HYPOTHESIS.to_string()],
            }],
            diagnostic: Some("every expansion violated a constraint".into()),
        },
    }
}

/// One unit of batch work: a source sentence and the constraints to apply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeJob {
    pub source: TokenSeq,
    pub constraints: ConstraintSet,
}

fn run_job<S: Scorer + ?Sized>(
    scorer: &S,
    job: &DecodeJob,
    params: &DecodeParams,
    bpe: Option<&BpeModel>,
) -> Result<DecodeResult> {
    let automaton = compile(&job.constraints, scorer.vocab(), bpe)?;
    Ok(decode(scorer, &job.source, &automaton, params))
}

/// Decodes every job. Results are in job order and do not depend on how the
/// work was scheduled. Errors are reported per job.
pub fn decode_batch<S: Scorer + ?Sized>(
    scorer: &S,
    jobs: &[DecodeJob],
    params: &DecodeParams,
    bpe: Option<&BpeModel>,
) -> Vec<Result<DecodeResult>> {
    #[cfg(feature = "parallel")]
    {
        jobs.par_iter().map(|j| run_job(scorer, j, params, bpe)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.iter().map(|j| run_job(scorer, j, params, bpe)).collect()
    }
}
