//! Lexical paraphrase packets and seeded lookups by entailment relation.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::pos::CoarsePos;
use crate::error::{Error, Result};
use crate::text::TokenSeq;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    Equivalence,
    ForwardEntailment,
    ReverseEntailment,
    Other,
}

impl Relation {
    pub fn parse(field: &str) -> Relation {
        match field.trim() {
            "Equivalence" => Relation::Equivalence,
            "ForwardEntailment" => Relation::ForwardEntailment,
            "ReverseEntailment" => Relation::ReverseEntailment,
            _ => Relation::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Equivalence => "Equivalence",
            Relation::ForwardEntailment => "ForwardEntailment",
            Relation::ReverseEntailment => "ReverseEntailment",
            Relation::Other => "Other",
        }
    }

    /// The three relations sampled by lookups, in lookup order.
    pub const SAMPLED: [Relation; 3] = [
        Relation::Equivalence,
        Relation::ForwardEntailment,
        Relation::ReverseEntailment,
    ];
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PpdbEntry {
    pub source: TokenSeq,
    pub target: TokenSeq,
    pub relation: Relation,
    pub pos: CoarsePos,
}

impl PpdbEntry {
    /// Parses `LHS ||| phrase ||| paraphrase ||| features ||| alignment ||| entailment`.
    pub fn parse_packet_line(line: &str) -> std::result::Result<PpdbEntry, String> {
        let fields: Vec<&str> = line.split("|||").map(str::trim).collect();
        if fields.len() < 6 {
            return Err(format!("expected 6 `|||` fields, found {}", fields.len()));
        }
        let source = TokenSeq::from_words(fields[1]);
        let target = TokenSeq::from_words(fields[2]);
        if source.is_empty() || target.is_empty() {
            return Err("empty phrase".into());
        }
        if fields[0].is_empty() {
            return Err("empty LHS".into());
        }
        Ok(PpdbEntry {
            source,
            target,
            relation: Relation::parse(fields[5]),
            pos: CoarsePos::from_tag(fields[0]),
        })
    }
}

/// Entries grouped by source phrase, in input order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PpdbIndex {
    entries: Vec<PpdbEntry>,
    by_source: HashMap<String, Vec<usize>>,
}

impl PpdbIndex {
    pub fn new(entries: Vec<PpdbEntry>) -> Self {
        let mut by_source: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_source.entry(e.source.to_string()).or_default().push(i);
        }
        PpdbIndex { entries, by_source }
    }

    /// Parses a raw packet; any malformed line is an error naming its line.
    pub fn from_packet(text: &str, path: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let e = PpdbEntry::parse_packet_line(line).map_err(|m| Error::parse(path, i + 1, m))?;
            entries.push(e);
        }
        Ok(Self::new(entries))
    }

    /// `#ppdb-index:N` then `source<TAB>target<TAB>pos<TAB>relation` rows.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("#ppdb-index:{}\n", self.entries.len());
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", e.source, e.target, e.pos, e.relation);
        }
        out
    }

    pub fn from_tsv(text: &str, path: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "missing #ppdb-index header"))?;
        let n: usize = header
            .strip_prefix("#ppdb-index:")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::parse(path, 1, "expected #ppdb-index:N"))?;
        let mut entries = Vec::with_capacity(n);
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 || f[0].trim().is_empty() || f[1].trim().is_empty() {
                return Err(Error::parse(path, i + 1, "expected 4 tab-separated fields"));
            }
            entries.push(PpdbEntry {
                source: TokenSeq::from_words(f[0]),
                target: TokenSeq::from_words(f[1]),
                pos: f[2].parse().map_err(|e: Error| Error::parse(path, i + 1, e.to_string()))?,
                relation: Relation::parse(f[3]),
            });
        }
        if entries.len() != n {
            return Err(Error::parse(
                path,
                1,
                format!("header announces {n} rows, found {}", entries.len()),
            ));
        }
        Ok(Self::new(entries))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries_for<'a>(&'a self, source: &str) -> impl Iterator<Item = &'a PpdbEntry> + 'a {
        self.by_source
            .get(source)
            .into_iter()
            .flatten()
            .map(|&i| &self.entries[i])
    }
}

/// Up to three entries for `token`, at most one per sampled relation.
///
/// Candidates are single-token targets different from the token whose
/// packet POS matches `pos`; each relation draws uniformly among its own
/// candidates.
pub fn ppdb_lookup<R: Rng + ?Sized>(
    token: &str,
    pos: CoarsePos,
    index: &PpdbIndex,
    rng: &mut R,
) -> Vec<PpdbEntry> {
    let mut out = Vec::new();
    for rel in Relation::SAMPLED {
        let cands: Vec<&PpdbEntry> = index
            .entries_for(token)
            .filter(|e| e.relation == rel && e.pos == pos)
            .filter(|e| e.target.len() == 1 && e.target[0] != token)
            .collect();
        if !cands.is_empty() {
            out.push(cands[rng.random_range(0..cands.len())].clone());
        }
    }
    out
}
