use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::text::{normalize_for_eval, TokenSeq};

pub const MAX_ORDER: usize = 4;

/// Clipped n-gram match counts and paraphrase n-gram totals, per order.
/// Partial stats from shards add up to the stats of the whole set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [u64; MAX_ORDER],
    pub totals: [u64; MAX_ORDER],
}

fn ngram_counts(s: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut m = HashMap::new();
    if s.len() >= n {
        for w in s.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

impl BleuStats {
    /// Stats for one normalized pair.
    pub fn from_pair(reference: &TokenSeq, paraphrase: &TokenSeq) -> BleuStats {
        let r = normalize_for_eval(reference);
        let p = normalize_for_eval(paraphrase);
        let mut st = BleuStats::default();
        for n in 1..=MAX_ORDER {
            let rc = ngram_counts(&r, n);
            let pc = ngram_counts(&p, n);
            st.totals[n - 1] = pc.values().sum();
            st.matches[n - 1] = pc.iter().map(|(g, &c)| c.min(rc.get(g).copied().unwrap_or(0))).sum();
        }
        st
    }

    pub fn from_pairs(pairs: &[(TokenSeq, TokenSeq)]) -> BleuStats {
        pairs
            .iter()
            .map(|(r, p)| BleuStats::from_pair(r, p))
            .fold(BleuStats::default(), BleuStats::merge)
    }

    pub fn merge(mut self, other: BleuStats) -> BleuStats {
        for i in 0..MAX_ORDER {
            self.matches[i] += other.matches[i];
            self.totals[i] += other.totals[i];
        }
        self
    }

    /// BLEU-4 with uniform weights and no brevity penalty, scaled to 0..100.
    pub fn bleu(&self) -> f64 {
        let mut log_sum = 0.0;
        for i in 0..MAX_ORDER {
            if self.matches[i] == 0 || self.totals[i] == 0 {
                return 0.0;
            }
            log_sum += (self.matches[i] as f64 / self.totals[i] as f64).ln();
        }
        100.0 * (log_sum / MAX_ORDER as f64).exp()
    }

    pub fn unigram_precision(&self) -> f64 {
        if self.totals[0] == 0 {
            0.0
        } else {
            self.matches[0] as f64 / self.totals[0] as f64
        }
    }
}

/// Corpus BLEU over `(reference, paraphrase)` pairs after normalization,
/// without brevity penalty. Clipping is done per pair.
pub fn modified_bleu(pairs: &[(TokenSeq, TokenSeq)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("pairs"));
    }
    Ok(BleuStats::from_pairs(pairs).bleu())
}

/// Fraction of paraphrase unigrams found in the reference, clipped per pair.
pub fn unigram_precision(pairs: &[(TokenSeq, TokenSeq)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("pairs"));
    }
    Ok(BleuStats::from_pairs(pairs).unigram_precision())
}
