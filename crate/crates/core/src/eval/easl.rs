use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluencyFlag {
    Nonsensical,
    Ungrammatical,
}

impl FromStr for FluencyFlag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "nonsensical" => Ok(FluencyFlag::Nonsensical),
            "ungrammatical" => Ok(FluencyFlag::Ungrammatical),
            other => Err(format!("unknown fluency flag {other:?}")),
        }
    }
}

impl fmt::Display for FluencyFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FluencyFlag::Nonsensical => "nonsensical",
            FluencyFlag::Ungrammatical => "ungrammatical",
        })
    }
}

/// One human judgment of one paraphrase.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub worker_id: String,
    pub item_id: String,
    pub system_id: u32,
    pub score: u8,
    /// The candidate shown was the reference itself.
    pub is_attention_check: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fluency_flag: Option<FluencyFlag>,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" => Some(true),
        "0" | "false" | "no" | "n" => Some(false),
        _ => None,
    }
}

/// Inverse of [`parse_annotations`].
pub fn annotations_to_tsv(records: &[AnnotationRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let flag = r.fluency_flag.map_or_else(|| "-".to_owned(), |f| f.to_string());
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{flag}\n",
            r.worker_id,
            r.item_id,
            r.system_id,
            r.score,
            u8::from(r.is_attention_check)
        ));
    }
    out
}

/// Parses `worker<TAB>item<TAB>system<TAB>score<TAB>is_check<TAB>flag` lines.
/// The flag column may be empty or `-`. Lines starting with `#` are skipped.
pub fn parse_annotations(text: &str, path: &str) -> Result<Vec<AnnotationRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: String| Error::parse(path, i + 1, m);
        let f: Vec<&str> = line.split('\t').collect();
        if !(5..=6).contains(&f.len()) {
            return Err(err(format!("expected 6 tab-separated fields, found {}", f.len())));
        }
        let system_id = f[2].trim().parse().map_err(|_| err(format!("bad system id {:?}", f[2])))?;
        let score: u8 = f[3].trim().parse().map_err(|_| err(format!("bad score {:?}", f[3])))?;
        if score > 100 {
            return Err(err(format!("score {score} outside 0..100")));
        }
        let is_attention_check = parse_bool(f[4].trim()).ok_or_else(|| err(format!("bad check flag {:?}", f[4])))?;
        let fluency_flag = match f.get(5).map(|s| s.trim()) {
            None | Some("") | Some("-") => None,
            Some(s) => Some(s.parse().map_err(err)?),
        };
        if f[0].is_empty() || f[1].is_empty() {
            return Err(err("empty worker or item id".into()));
        }
        out.push(AnnotationRecord {
            worker_id: f[0].to_string(),
            item_id: f[1].to_string(),
            system_id,
            score,
            is_attention_check,
            fluency_flag,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EaslParams {
    pub min_judgments: usize,
    pub fail_rate: f64,
    pub min_per_item: usize,
}

impl Default for EaslParams {
    fn default() -> Self {
        EaslParams {
            min_judgments: 25,
            fail_rate: 0.10,
            min_per_item: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemScore {
    pub system_id: u32,
    pub item_id: String,
    pub mean: f64,
    pub judgments: usize,
    pub workers: usize,
    pub under_annotated: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EaslReport {
    pub items: Vec<ItemScore>,
    /// Mean of item means, over items that are not under-annotated.
    pub system_means: BTreeMap<u32, f64>,
    /// Workers who failed more than the allowed share of attention checks.
    pub disqualified: BTreeSet<String>,
    /// Workers left with too few judgments.
    pub low_volume: BTreeSet<String>,
}

/// Aggregates scalar judgments.
///
/// A worker fails an attention check by giving anything but 100. Workers
/// failing more than `fail_rate` of their checks are dropped, then workers
/// with fewer than `min_judgments` non-check judgments. Items are keyed by
/// `(system_id, item_id)`; an item judged by fewer than `min_per_item`
/// distinct remaining workers is reported but left out of its system mean.
pub fn easl_aggregate(records: &[AnnotationRecord], params: &EaslParams) -> EaslReport {
    let mut checks: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let mut volume: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        if r.is_attention_check {
            let e = checks.entry(&r.worker_id).or_default();
            e.0 += 1;
            e.1 += usize::from(r.score != 100);
        } else {
            *volume.entry(&r.worker_id).or_default() += 1;
        }
    }
    let disqualified: BTreeSet<String> = checks
        .iter()
        .filter(|(_, &(n, failed))| failed as f64 > params.fail_rate * n as f64)
        .map(|(w, _)| w.to_string())
        .collect();
    let workers: BTreeSet<&str> = records.iter().map(|r| r.worker_id.as_str()).collect();
    let low_volume: BTreeSet<String> = workers
        .into_iter()
        .filter(|w| !disqualified.contains(*w))
        .filter(|w| volume.get(w).copied().unwrap_or(0) < params.min_judgments)
        .map(str::to_string)
        .collect();

    let mut by_item: BTreeMap<(u32, &str), Vec<&AnnotationRecord>> = BTreeMap::new();
    for r in records {
        if r.is_attention_check || disqualified.contains(&r.worker_id) || low_volume.contains(&r.worker_id) {
            continue;
        }
        by_item.entry((r.system_id, &r.item_id)).or_default().push(r);
    }
    let mut items = Vec::with_capacity(by_item.len());
    let mut sums: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for ((system_id, item_id), rs) in by_item {
        let mut scores: Vec<u8> = rs.iter().map(|r| r.score).collect();
        scores.sort_unstable();
        let total: u64 = scores.iter().map(|&s| u64::from(s)).sum();
        let mean = total as f64 / scores.len() as f64;
        let workers = rs.iter().map(|r| r.worker_id.as_str()).collect::<BTreeSet<_>>().len();
        let under_annotated = workers < params.min_per_item;
        if !under_annotated {
            let e = sums.entry(system_id).or_default();
            e.0 += mean;
            e.1 += 1;
        }
        items.push(ItemScore {
            system_id,
            item_id: item_id.to_string(),
            mean,
            judgments: scores.len(),
            workers,
            under_annotated,
        });
    }
    EaslReport {
        items,
        system_means: sums.into_iter().map(|(s, (t, n))| (s, t / n as f64)).collect(),
        disqualified,
        low_volume,
    }
}

/// Percentage of items per system that no annotator flagged.
/// Attention checks are ignored.
pub fn fluency_rate(records: &[AnnotationRecord]) -> BTreeMap<u32, f64> {
    let mut flagged: BTreeMap<u32, BTreeMap<&str, bool>> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_attention_check) {
        let bad = flagged.entry(r.system_id).or_default().entry(&r.item_id).or_insert(false);
        *bad |= r.fluency_flag.is_some();
    }
    flagged
        .into_iter()
        .map(|(s, items)| {
            let good = items.values().filter(|b| !**b).count();
            (s, 100.0 * good as f64 / items.len() as f64)
        })
        .collect()
}
