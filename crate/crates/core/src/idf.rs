//! Inverse document frequency tables and constraint candidate pools.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::text::{is_lower_alpha, TokenSeq};

/// The prepositions exempt from the minimum IDF threshold.
pub const PREPOSITIONS: [&str; 14] = [
    "about", "as", "at", "by", "for", "from", "in", "into", "of", "on", "onto", "over", "to",
    "with",
];

/// Anything that can report an IDF value for a token.
pub trait IdfLookup {
    /// `None` when the token was never seen.
    fn idf(&self, token: &str) -> Option<f64>;
}

impl IdfLookup for HashMap<String, f64> {
    fn idf(&self, token: &str) -> Option<f64> {
        self.get(token).copied()
    }
}

impl IdfLookup for BTreeMap<String, f64> {
    fn idf(&self, token: &str) -> Option<f64> {
        self.get(token).copied()
    }
}

/// Document frequencies over a corpus in which every sentence is one document.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IdfTable {
    doc_count: u64,
    df: HashMap<String, u64>,
}

impl IdfTable {
    pub fn build<'a, I>(corpus: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a TokenSeq>,
    {
        let mut table = IdfTable::default();
        for s in corpus {
            table.add_document(s);
        }
        if table.doc_count == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(table)
    }

    pub fn add_document(&mut self, s: &TokenSeq) {
        self.doc_count += 1;
        let unique: HashSet<&str> = s.iter().map(String::as_str).collect();
        for t in unique {
            *self.df.entry(t.to_owned()).or_insert(0) += 1;
        }
    }

    /// Combines two shards built over disjoint sentences.
    pub fn merge(mut self, other: IdfTable) -> Self {
        self.doc_count += other.doc_count;
        for (t, c) in other.df {
            *self.df.entry(t).or_insert(0) += c;
        }
        self
    }

    pub fn from_counts(doc_count: u64, df: HashMap<String, u64>) -> Result<Self> {
        if doc_count == 0 {
            return Err(Error::EmptyCorpus);
        }
        if let Some((t, c)) = df.iter().find(|(_, &c)| c == 0 || c > doc_count) {
            return Err(Error::InvalidParameter(format!(
                "df({t}) = {c} outside 1..={doc_count}"
            )));
        }
        Ok(IdfTable { doc_count, df })
    }

    pub fn doc_count(&self) -> u64 {
        self.doc_count
    }

    pub fn df(&self, token: &str) -> Option<u64> {
        self.df.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.df.len()
    }

    pub fn is_empty(&self) -> bool {
        self.df.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.df.contains_key(token)
    }

    /// Largest attainable idf, `ln(doc_count)`.
    pub fn max_idf(&self) -> f64 {
        (self.doc_count as f64).ln()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.df.iter().map(|(t, &c)| (t.as_str(), c))
    }

    /// `#docs:N` header, then `token<TAB>df` lines sorted by token.
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<(&String, &u64)> = self.df.iter().collect();
        rows.sort();
        let mut out = format!("#docs:{}\n", self.doc_count);
        for (t, c) in rows {
            let _ = writeln!(out, "{t}\t{c}");
        }
        out
    }

    pub fn from_tsv(text: &str, path: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "missing #docs header"))?;
        let doc_count: u64 = header
            .strip_prefix("#docs:")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::parse(path, 1, "expected #docs:N"))?;
        let mut df = HashMap::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (tok, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected token<TAB>df"))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, i + 1, "df is not an integer"))?;
            if tok.is_empty() || count == 0 || count > doc_count {
                return Err(Error::parse(path, i + 1, "df outside 1..=docs"));
            }
            if df.insert(tok.to_owned(), count).is_some() {
                return Err(Error::parse(path, i + 1, format!("duplicate token {tok:?}")));
            }
        }
        IdfTable::from_counts(doc_count, df)
    }
}

impl IdfLookup for IdfTable {
    fn idf(&self, token: &str) -> Option<f64> {
        self.df
            .get(token)
            .map(|&c| (self.doc_count as f64 / c as f64).ln())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdfThresholds {
    pub min_idf: f64,
    pub max_idf: f64,
    pub prepositions: HashSet<String>,
}

impl Default for IdfThresholds {
    fn default() -> Self {
        IdfThresholds::new(7.0, 17.0).expect("default thresholds are ordered")
    }
}

impl IdfThresholds {
    pub fn new(min_idf: f64, max_idf: f64) -> Result<Self> {
        if min_idf.partial_cmp(&max_idf) != Some(std::cmp::Ordering::Less) {
            return Err(Error::InvalidParameter(format!(
                "min_idf {min_idf} must be below max_idf {max_idf}"
            )));
        }
        Ok(IdfThresholds {
            min_idf,
            max_idf,
            prepositions: PREPOSITIONS.iter().map(|p| p.to_string()).collect(),
        })
    }

    pub fn is_preposition(&self, token: &str) -> bool {
        self.prepositions.contains(&token.to_lowercase())
    }
}

/// A pool token with the idf it was ranked by.
#[derive(Clone, Debug, PartialEq)]
pub struct PoolEntry {
    pub token: String,
    pub idf: f64,
}

/// Reference tokens eligible as constraints, in descending idf order.
///
/// Only lowercase alphabetic tokens qualify. A token is kept when its idf
/// lies in `[min_idf, max_idf]`, or when it is a whitelisted preposition.
/// Unknown tokens are dropped unless whitelisted, in which case they rank
/// with idf 0.
pub fn candidate_pool_scored(
    reference: &TokenSeq,
    idf: &impl IdfLookup,
    th: &IdfThresholds,
) -> Vec<PoolEntry> {
    let mut seen = HashSet::new();
    let mut pool = Vec::new();
    for t in reference.iter() {
        if !is_lower_alpha(t) || !seen.insert(t.as_str()) {
            continue;
        }
        let value = idf.idf(t);
        let keep = match value {
            Some(v) => (th.min_idf..=th.max_idf).contains(&v) || th.is_preposition(t),
            None => th.is_preposition(t),
        };
        if keep {
            pool.push(PoolEntry {
                token: t.clone(),
                idf: value.unwrap_or(0.0),
            });
        }
    }
    // Stable: equal idf keeps sentence order.
    pool.sort_by(|a, b| b.idf.total_cmp(&a.idf));
    pool
}

pub fn candidate_pool(
    reference: &TokenSeq,
    idf: &impl IdfLookup,
    th: &IdfThresholds,
) -> Vec<String> {
    candidate_pool_scored(reference, idf, th)
        .into_iter()
        .map(|e| e.token)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PickMode {
    Highest,
    Lowest,
    Random,
}

/// Picks the `k`-th (1-based) token of the pool by mode.
pub fn pick<R: Rng + ?Sized>(pool: &[String], mode: PickMode, k: usize, rng: &mut R) -> Option<String> {
    if k == 0 || pool.len() < k {
        return None;
    }
    match mode {
        PickMode::Highest => Some(pool[k - 1].clone()),
        PickMode::Lowest => Some(pool[pool.len() - k].clone()),
        PickMode::Random => sample_without_replacement(pool, k, rng).and_then(|v| v.last().cloned()),
    }
}

/// Draws `count` distinct pool entries uniformly, in draw order.
pub fn sample_without_replacement<R: Rng + ?Sized>(
    pool: &[String],
    count: usize,
    rng: &mut R,
) -> Option<Vec<String>> {
    if pool.len() < count {
        return None;
    }
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    for i in 0..count {
        let j = rng.random_range(i..idx.len());
        idx.swap(i, j);
    }
    Some(idx[..count].iter().map(|&i| pool[i].clone()).collect())
}
