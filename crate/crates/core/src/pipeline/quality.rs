use super::artifacts::Artifacts;
use super::records::ParaphraseRecord;
use crate::error::{Error, Result};
use crate::eval::{featurize, train_regression, RegressionModel, ScorerContext, FEATURE_COUNT};
use crate::text::{tokenize, TokenSeq};

/// A human-scored paraphrase used to fit the quality model.
#[derive(Clone, Debug, PartialEq)]
pub struct QualityRow {
    pub source: TokenSeq,
    pub reference: TokenSeq,
    pub paraphrase: TokenSeq,
    pub score: f64,
}

/// Parses `source<TAB>reference<TAB>paraphrase<TAB>score` lines.
pub fn parse_quality_rows(text: &str, path: &str) -> Result<Vec<QualityRow>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: &str| Error::parse(path, i + 1, m);
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(err("expected source, reference, paraphrase and score"));
        }
        let score: f64 = f[3].trim().parse().map_err(|_| err("score is not a number"))?;
        if !(0.0..=100.0).contains(&score) {
            return Err(err("score outside 0..100"));
        }
        out.push(QualityRow {
            source: tokenize(f[0]),
            reference: tokenize(f[1]),
            paraphrase: tokenize(f[2]),
            score,
        });
    }
    Ok(out)
}

fn features(artifacts: &Artifacts, source: &TokenSeq, reference: &TokenSeq, para: &TokenSeq) -> [f64; FEATURE_COUNT] {
    let ctx = ScorerContext {
        scorer: &artifacts.scorer,
        source,
        bpe: artifacts.bpe.as_ref(),
    };
    featurize(reference, para, &artifacts.idf, Some(&ctx))
}

pub fn train_quality(rows: &[QualityRow], artifacts: &Artifacts, l2: f64) -> Result<RegressionModel> {
    let data: Vec<(Vec<f64>, f64)> = rows
        .iter()
        .map(|r| (features(artifacts, &r.source, &r.reference, &r.paraphrase).to_vec(), r.score))
        .collect();
    train_regression(&data, l2)
}

fn post_bpe_len(artifacts: &Artifacts, s: &TokenSeq) -> usize {
    artifacts.bpe.as_ref().map_or(s.len(), |m| m.apply(s).len())
}

/// Sets `predicted_quality` on every record whose reference has at most
/// `max_tokens` post-BPE tokens and clears it on the rest.
pub fn score_records(
    records: &mut [ParaphraseRecord],
    model: &RegressionModel,
    artifacts: &Artifacts,
    max_tokens: usize,
) {
    for r in records {
        r.predicted_quality = (post_bpe_len(artifacts, &r.reference) <= max_tokens)
            .then(|| model.predict(&features(artifacts, &r.source, &r.reference, &r.output)));
    }
}
