use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::text::{normalize_for_eval, TokenSeq};

/// Flag for a decode that could not run (unsatisfiable or out-of-vocabulary
/// constraints). The record's `error` field says why.
pub const FLAG_ERROR: &str = "error";

/// One paraphrase of one reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParaphraseRecord {
    pub sentence_id: u64,
    /// Systems that produced this output; several after dedup.
    pub systems: Vec<u32>,
    pub source: TokenSeq,
    pub reference: TokenSeq,
    pub constraints: ConstraintSet,
    pub output: TokenSeq,
    /// Decoder score; absent for error records.
    pub logprob: Option<f64>,
    pub met_count: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_quality: Option<f64>,
}

impl ParaphraseRecord {
    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }
}

pub fn records_to_jsonl(records: &[ParaphraseRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_records(text: &str, path: &str) -> Result<Vec<ParaphraseRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(path, i + 1, e.to_string())))
        .collect()
}

/// Merges records with the same sentence and normalized output.
///
/// The merged record keeps the fields of its highest-scoring member (the
/// earliest on ties) and the union of all members' systems. Output order
/// follows each key's first appearance.
pub fn dedup(records: Vec<ParaphraseRecord>) -> Vec<ParaphraseRecord> {
    let mut index: HashMap<(u64, TokenSeq), usize> = HashMap::new();
    let mut out: Vec<ParaphraseRecord> = Vec::new();
    for r in records {
        let key = (r.sentence_id, normalize_for_eval(&r.output));
        match index.get(&key) {
            None => {
                index.insert(key, out.len());
                out.push(r);
            }
            Some(&i) => {
                let kept = &mut out[i];
                let mut systems = std::mem::take(&mut kept.systems);
                systems.extend(&r.systems);
                systems.sort_unstable();
                systems.dedup();
                if better(r.logprob, kept.logprob) {
                    *kept = r;
                }
                kept.systems = systems;
            }
        }
    }
    out
}

fn better(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => a > b,
        (Some(_), None) => true,
        _ => false,
    }
}
