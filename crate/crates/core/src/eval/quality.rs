use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::bleu::BleuStats;
use crate::error::{Error, Result};
use crate::idf::IdfTable;
use crate::idf::IdfLookup;
use crate::scorer::{sequence_logprob, Scorer};
use crate::text::{normalize_for_eval, BpeModel, TokenSeq};

pub const FEATURE_COUNT: usize = 8;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "ref_len",
    "para_len",
    "len_ratio",
    "sentence_bleu",
    "unigram_precision",
    "unigram_recall",
    "idf_jaccard",
    "logprob_per_token",
];

/// A scorer plus what it needs to score a paraphrase.
#[derive(Clone, Copy)]
pub struct ScorerContext<'a> {
    pub scorer: &'a dyn Scorer,
    /// Source sentence the scorer conditions on.
    pub source: &'a TokenSeq,
    /// Applied to the paraphrase when the scorer works on subwords.
    pub bpe: Option<&'a BpeModel>,
}

impl ScorerContext<'_> {
    /// Log-probability per output token, counting EOS.
    pub fn logprob_per_token(&self, para: &TokenSeq) -> f64 {
        let tokens = match self.bpe {
            Some(m) => m.apply(para),
            None => para.clone(),
        };
        sequence_logprob(self.scorer, self.source, &tokens) / (tokens.len() + 1) as f64
    }
}

fn idf_jaccard(r: &TokenSeq, p: &TokenSeq, idf: &IdfTable) -> f64 {
    let a: BTreeSet<&str> = r.iter().map(String::as_str).collect();
    let b: BTreeSet<&str> = p.iter().map(String::as_str).collect();
    if a == b {
        return 1.0;
    }
    let w = |t: &str| idf.idf(t).unwrap_or_else(|| idf.max_idf());
    let inter: f64 = a.intersection(&b).map(|t| w(t)).sum();
    let union: f64 = a.union(&b).map(|t| w(t)).sum();
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

/// Features of a reference/paraphrase pair, in [`FEATURE_NAMES`] order.
///
/// Lengths count surface tokens. The overlap features use the evaluation
/// normalization. Jaccard weights each distinct token by its idf, with
/// unseen tokens weighted as the rarest possible token.
pub fn featurize(reference: &TokenSeq, para: &TokenSeq, idf: &IdfTable, scorer: Option<&ScorerContext<'_>>) -> [f64; FEATURE_COUNT] {
    let (rl, pl) = (reference.len() as f64, para.len() as f64);
    let forward = BleuStats::from_pair(reference, para);
    let backward = BleuStats::from_pair(para, reference);
    [
        rl,
        pl,
        if rl > 0.0 { pl / rl } else { 0.0 },
        forward.bleu(),
        forward.unigram_precision(),
        backward.unigram_precision(),
        idf_jaccard(&normalize_for_eval(reference), &normalize_for_eval(para), idf),
        scorer.map_or(0.0, |s| s.logprob_per_token(para)),
    ]
}

/// Linear model with L2 regularization. Predictions are clamped to 0..100.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2: f64,
}

/// Closed-form ridge regression on centered data. The bias is not penalized.
pub fn train_regression(rows: &[(Vec<f64>, f64)], l2: f64) -> Result<RegressionModel> {
    if rows.len() < 2 {
        return Err(Error::InvalidParameter("regression needs at least 2 rows".into()));
    }
    if !(l2 >= 0.0 && l2.is_finite()) {
        return Err(Error::InvalidParameter("l2 must be non-negative".into()));
    }
    let d = rows[0].0.len();
    if let Some((x, _)) = rows.iter().find(|(x, _)| x.len() != d) {
        return Err(Error::LengthMismatch { left: d, right: x.len() });
    }
    let n = rows.len() as f64;
    let mut mx = vec![0.0; d];
    let mut my = 0.0;
    for (x, y) in rows {
        for (m, v) in mx.iter_mut().zip(x) {
            *m += v / n;
        }
        my += y / n;
    }
    let xc = DMatrix::from_fn(rows.len(), d, |i, j| rows[i].0[j] - mx[j]);
    let yc = DVector::from_fn(rows.len(), |i, _| rows[i].1 - my);
    let mut gram = xc.transpose() * &xc;
    for j in 0..d {
        gram[(j, j)] += l2;
    }
    let rhs = xc.transpose() * yc;
    let lu = gram.clone().full_piv_lu();
    let diag: Vec<f64> = (0..d).map(|j| lu.u()[(j, j)].abs()).collect();
    let largest = diag.iter().cloned().fold(0.0, f64::max);
    let smallest = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if d > 0 && (largest == 0.0 || smallest <= largest * 1e-12) {
        return Err(Error::Singular);
    }
    let w = if d == 0 { DVector::zeros(0) } else { lu.solve(&rhs).ok_or(Error::Singular)? };
    let weights: Vec<f64> = w.iter().copied().collect();
    let bias = my - weights.iter().zip(&mx).map(|(w, m)| w * m).sum::<f64>();
    Ok(RegressionModel { weights, bias, l2 })
}

impl RegressionModel {
    pub fn raw(&self, features: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(features).map(|(w, x)| w * x).sum::<f64>()
    }

    pub fn predict(&self, features: &[f64]) -> f64 {
        self.raw(features).clamp(0.0, 100.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<RegressionModel> {
        let m: RegressionModel = serde_json::from_str(text)?;
        if !m.bias.is_finite() || m.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Format("non-finite regression weights".into()));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::spearman;
    use crate::scorer::{train_stat_scorer, StatScorerParams};
    use crate::seed;
    use crate::text::tokenize;
    use rand::Rng;

    fn idf() -> IdfTable {
        let corpus = [
            "how often do earthquakes occur ?",
            "how frequently are earthquakes happening ?",
            "the cat sat on the mat",
            "how are you",
        ]
        .map(tokenize);
        IdfTable::build(corpus.iter()).unwrap()
    }

    #[test]
    fn identity_row() {
        let s = tokenize("How often do earthquakes occur?");
        let f = featurize(&s, &s, &idf(), None);
        assert_eq!(f[0], 6.0);
        assert_eq!(f[2], 1.0);
        assert_eq!(f[3], 100.0);
        assert_eq!(f[4], 1.0);
        assert_eq!(f[5], 1.0);
        assert_eq!(f[6], 1.0);
        assert_eq!(f[7], 0.0);
    }

    #[test]
    fn disjoint_row() {
        let f = featurize(&tokenize("the cat sat"), &tokenize("how are you"), &idf(), None);
        assert_eq!(&f[3..7], &[0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn fixed_pair_against_components() {
        let idf = idf();
        let r = tokenize("How often do earthquakes occur?");
        let p = tokenize("How frequently are earthquakes happening?");
        let bitext = vec![(tokenize("x y"), p.clone()), (tokenize("x z"), r.clone())];
        let scorer = train_stat_scorer(&bitext, &StatScorerParams::default()).unwrap();
        let src = tokenize("x y");
        let ctx = ScorerContext { scorer: &scorer, source: &src, bpe: None };
        let f = featurize(&r, &p, &idf, Some(&ctx));
        // ln(4/1) for the three tokens seen once, ln(4/3) for "how", ln(4/2) for the rest.
        let (once, how, twice) = ((4.0f64).ln(), (4.0f64 / 3.0).ln(), (2.0f64).ln());
        // r: how often do earthquakes occur; p: how frequently are earthquakes happening
        let inter = how + twice;
        let union = how + 5.0 * once + 2.0 * twice;
        let want = [6.0, 6.0, 1.0, 0.0, 2.0 / 5.0, 2.0 / 5.0, inter / union];
        for i in 0..7 {
            assert!((f[i] - want[i]).abs() < 1e-12, "feature {i}: {} vs {}", f[i], want[i]);
        }
        let lp = sequence_logprob(&scorer, &src, &p) / 7.0;
        assert_eq!(f[7], lp);
        assert!(f[7] < 0.0);
    }

    #[test]
    fn recovers_linear_rule() {
        let mut rng = seed::rng(1);
        let truth = [1.5, -2.0, 0.25, 3.0];
        let rows: Vec<(Vec<f64>, f64)> = (0..50)
            .map(|_| {
                let x: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0)).collect();
                let y = 7.0 + x.iter().zip(&truth).map(|(a, b)| a * b).sum::<f64>();
                (x, y)
            })
            .collect();
        let m = train_regression(&rows, 0.0).unwrap();
        for (w, t) in m.weights.iter().zip(&truth) {
            assert!((w - t).abs() < 1e-6);
        }
        assert!((m.bias - 7.0).abs() < 1e-6);
    }

    #[test]
    fn constant_targets() {
        let rows: Vec<(Vec<f64>, f64)> = (0..10).map(|i| (vec![i as f64, (i * i) as f64], 42.0)).collect();
        let m = train_regression(&rows, 0.5).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-12));
        assert!((m.bias - 42.0).abs() < 1e-12);
    }

    #[test]
    fn singular_without_l2() {
        let rows: Vec<(Vec<f64>, f64)> = (0..10).map(|i| (vec![i as f64, 2.0 * i as f64], i as f64)).collect();
        let e = train_regression(&rows, 0.0).unwrap_err();
        assert!(e.to_string().contains("l2 > 0"));
        assert!(train_regression(&rows, 1e-3).is_ok());
        assert!(train_regression(&rows[..1], 1.0).is_err());
    }

    #[test]
    fn predictions_clamp_and_round_trip() {
        let m = RegressionModel { weights: vec![10.0], bias: 0.0, l2: 0.0 };
        assert_eq!(m.predict(&[20.0]), 100.0);
        assert_eq!(m.predict(&[-1.0]), 0.0);
        assert_eq!(RegressionModel::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn monotone_synthetic_generalizes() {
        let mut rng = seed::rng(4);
        let mut make = |n: usize| -> Vec<(Vec<f64>, f64)> {
            (0..n)
                .map(|_| {
                    let x: Vec<f64> = (0..FEATURE_COUNT).map(|_| rng.random_range(0.0..1.0)).collect();
                    let y = 100.0 * (x[3] * 0.7 + x[6] * 0.3).powi(2) + rng.random_range(-3.0..3.0);
                    (x, y)
                })
                .collect()
        };
        let (train, test) = (make(300), make(100));
        let m = train_regression(&train, 1e-3).unwrap();
        let pred: Vec<f64> = test.iter().map(|(x, _)| m.predict(x)).collect();
        let gold: Vec<f64> = test.iter().map(|(_, y)| *y).collect();
        assert!(spearman(&pred, &gold).unwrap() > 0.9);
    }
}
