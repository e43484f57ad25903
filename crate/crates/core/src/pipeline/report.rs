use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::records::ParaphraseRecord;
use crate::error::{Error, Result};
use crate::eval::{spearman, BleuStats};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiversityCell {
    pub bleu: f64,
    pub unigram_precision: f64,
    pub pairs: usize,
}

impl DiversityCell {
    fn from_stats(st: &BleuStats, pairs: usize) -> Self {
        DiversityCell {
            bleu: st.bleu(),
            unigram_precision: 100.0 * st.unigram_precision(),
            pairs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemDiversity {
    pub system: u32,
    /// Only buckets with at least one pair appear.
    pub buckets: BTreeMap<usize, DiversityCell>,
    /// Mean BLEU of the present buckets.
    pub average: Option<f64>,
    /// Corpus BLEU over every pair of the system.
    pub all: DiversityCell,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub buckets: Vec<usize>,
    pub tolerance: usize,
    pub systems: Vec<SystemDiversity>,
    /// Rank correlation of BLEU and unigram precision across systems.
    pub bleu_precision_spearman: Option<f64>,
}

/// Modified BLEU of every system's outputs against their references, split by
/// reference length. Flagged records and empty outputs are ignored; a record
/// listing several systems counts for each.
pub fn eval_diversity(records: &[ParaphraseRecord], buckets: &[usize], tolerance: usize) -> Result<DiversityReport> {
    #[derive(Default)]
    struct Acc {
        all: (BleuStats, usize),
        by_bucket: BTreeMap<usize, (BleuStats, usize)>,
    }
    let mut acc: BTreeMap<u32, Acc> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_flagged() && !r.output.is_empty()) {
        let st = BleuStats::from_pair(&r.reference, &r.output);
        let len = r.reference.len();
        for &s in &r.systems {
            let a = acc.entry(s).or_default();
            a.all = (a.all.0.merge(st), a.all.1 + 1);
            for &b in buckets.iter().filter(|&&b| len.abs_diff(b) <= tolerance) {
                let cell = a.by_bucket.entry(b).or_default();
                *cell = (cell.0.merge(st), cell.1 + 1);
            }
        }
    }
    if acc.is_empty() {
        return Err(Error::EmptyInput("no unflagged records"));
    }
    let systems: Vec<SystemDiversity> = acc
        .into_iter()
        .map(|(system, a)| {
            let buckets: BTreeMap<usize, DiversityCell> = a
                .by_bucket
                .iter()
                .map(|(&b, (st, n))| (b, DiversityCell::from_stats(st, *n)))
                .collect();
            let average = (!buckets.is_empty())
                .then(|| buckets.values().map(|c| c.bleu).sum::<f64>() / buckets.len() as f64);
            SystemDiversity {
                system,
                buckets,
                average,
                all: DiversityCell::from_stats(&a.all.0, a.all.1),
            }
        })
        .collect();
    let bleu: Vec<f64> = systems.iter().map(|s| s.all.bleu).collect();
    let prec: Vec<f64> = systems.iter().map(|s| s.all.unigram_precision).collect();
    Ok(DiversityReport {
        buckets: buckets.to_vec(),
        tolerance,
        bleu_precision_spearman: spearman(&bleu, &prec).ok(),
        systems,
    })
}

impl DiversityReport {
    pub fn system(&self, id: u32) -> Option<&SystemDiversity> {
        self.systems.iter().find(|s| s.system == id)
    }

    /// One row per system: BLEU per bucket, the bucket average and the
    /// all-pairs score. Absent cells print as `-`.
    pub fn to_table(&self) -> String {
        let mut out = String::from("system");
        for b in &self.buckets {
            let _ = write!(out, "\t{b}");
        }
        out.push_str("\taverage\tall\tunigram-prec\tpairs\n");
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |x| format!("{x:.2}"));
        for s in &self.systems {
            let _ = write!(out, "{}", s.system);
            for b in &self.buckets {
                let _ = write!(out, "\t{}", cell(s.buckets.get(b).map(|c| c.bleu)));
            }
            let _ = writeln!(
                out,
                "\t{}\t{:.2}\t{:.2}\t{}",
                cell(s.average),
                s.all.bleu,
                s.all.unigram_precision,
                s.all.pairs
            );
        }
        if let Some(rho) = self.bleu_precision_spearman {
            let _ = writeln!(out, "# spearman(bleu, unigram precision) = {rho:.4}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::ConstraintSet;
    use crate::text::TokenSeq;

    fn rec(system: u32, reference: &str, output: &str) -> ParaphraseRecord {
        ParaphraseRecord {
            sentence_id: 0,
            systems: vec![system],
            source: TokenSeq::from_words("s"),
            reference: TokenSeq::from_words(reference),
            constraints: ConstraintSet::default(),
            output: TokenSeq::from_words(output),
            logprob: Some(-1.0),
            met_count: 0,
            flags: vec![],
            error: None,
            predicted_quality: None,
        }
    }

    const FIVE: &str = "a b c d e";
    const TEN: &str = "a b c d e f g h i j";

    #[test]
    fn identity_system_scores_100_everywhere() {
        let rs = vec![rec(1, FIVE, FIVE), rec(1, TEN, TEN)];
        let rep = eval_diversity(&rs, &[5, 10, 20, 40], 0).unwrap();
        let s = rep.system(1).unwrap();
        assert_eq!(s.buckets.len(), 2);
        for c in s.buckets.values() {
            assert!((c.bleu - 100.0).abs() < 1e-9);
        }
        assert!((s.average.unwrap() - 100.0).abs() < 1e-9);
        assert!(!s.buckets.contains_key(&20));
        assert!(rep.to_table().lines().nth(1).unwrap().contains("\t-\t-\t"));
    }

    #[test]
    fn tolerance_pools_near_lengths() {
        let rs = vec![rec(1, "a b c d", "a b c d"), rec(1, "a b c d e f", "a b c d e f")];
        let exact = eval_diversity(&rs, &[5], 0).unwrap();
        assert!(exact.system(1).unwrap().buckets.is_empty());
        assert_eq!(exact.system(1).unwrap().average, None);
        let loose = eval_diversity(&rs, &[5], 1).unwrap();
        assert_eq!(loose.system(1).unwrap().buckets[&5].pairs, 2);
    }

    #[test]
    fn flagged_and_merged_records() {
        let mut flagged = rec(2, FIVE, "z z z z z");
        flagged.flags.push("incomplete".into());
        let mut merged = rec(1, FIVE, FIVE);
        merged.systems = vec![1, 2];
        let rep = eval_diversity(&[flagged, merged], &[5], 0).unwrap();
        assert_eq!(rep.system(2).unwrap().all.pairs, 1);
        assert!((rep.system(2).unwrap().all.bleu - 100.0).abs() < 1e-9);
        assert!(eval_diversity(&[], &[5], 0).is_err());
    }
}
