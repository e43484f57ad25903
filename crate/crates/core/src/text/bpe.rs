//! Byte-pair encoding with an end-of-word marker on word-final subwords.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::text::TokenSeq;

pub const END_OF_WORD: &str = "⟨/w⟩";

const NO_SYMBOL: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
    vocab: BTreeSet<String>,
    symbols: HashMap<String, u32>,
    /// (left id, right id) -> (rank, merged id)
    ranks: HashMap<(u32, u32), (usize, u32)>,
}

fn initial_symbols(word: &str) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    let last = chars.len().saturating_sub(1);
    chars
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if i == last {
                format!("{c}{END_OF_WORD}")
            } else {
                c.to_string()
            }
        })
        .collect()
}

fn merge_pair(symbols: &[String], left: &str, right: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(symbols.len());
    let mut i = 0;
    while i < symbols.len() {
        if i + 1 < symbols.len() && symbols[i] == left && symbols[i + 1] == right {
            out.push(format!("{left}{right}"));
            i += 2;
        } else {
            out.push(symbols[i].clone());
            i += 1;
        }
    }
    out
}

impl BpeModel {
    /// Builds a model from an ordered merge list.
    pub fn from_merges(merges: Vec<(String, String)>) -> Result<Self> {
        Self::with_vocab(merges, BTreeSet::new())
    }

    fn with_vocab(merges: Vec<(String, String)>, mut vocab: BTreeSet<String>) -> Result<Self> {
        let mut symbols: HashMap<String, u32> = HashMap::new();
        let intern = |s: &str, symbols: &mut HashMap<String, u32>| -> u32 {
            let next = symbols.len() as u32;
            *symbols.entry(s.to_owned()).or_insert(next)
        };
        let mut ranks = HashMap::with_capacity(merges.len());
        for (rank, (l, r)) in merges.iter().enumerate() {
            if l.is_empty() || r.is_empty() {
                return Err(Error::Format(format!("empty symbol in merge {rank}")));
            }
            let li = intern(l, &mut symbols);
            let ri = intern(r, &mut symbols);
            let merged = format!("{l}{r}");
            let mi = intern(&merged, &mut symbols);
            if ranks.insert((li, ri), (rank, mi)).is_some() {
                return Err(Error::Format(format!("duplicate merge {l} {r}")));
            }
            vocab.insert(l.clone());
            vocab.insert(r.clone());
            vocab.insert(merged);
        }
        Ok(BpeModel {
            merges,
            vocab,
            symbols,
            ranks,
        })
    }

    /// Learns up to `num_merges` merges greedily by pair frequency.
    ///
    /// Ties are broken by the lexicographically smallest pair; learning stops
    /// early once no pair occurs at least twice.
    pub fn learn<'a, I>(corpus: I, num_merges: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a TokenSeq>,
    {
        let mut freqs: BTreeMap<&str, i64> = BTreeMap::new();
        let mut sentences = 0usize;
        for s in corpus {
            sentences += 1;
            for t in s.iter() {
                *freqs.entry(t.as_str()).or_insert(0) += 1;
            }
        }
        if sentences == 0 {
            return Err(Error::EmptyCorpus);
        }

        let mut words: Vec<(Vec<String>, i64)> = freqs
            .into_iter()
            .map(|(w, f)| (initial_symbols(w), f))
            .collect();
        let mut vocab: BTreeSet<String> = words.iter().flat_map(|(s, _)| s.clone()).collect();

        let mut counts: HashMap<(String, String), i64> = HashMap::new();
        let mut index: HashMap<(String, String), HashSet<usize>> = HashMap::new();
        for (wi, (syms, f)) in words.iter().enumerate() {
            for p in syms.windows(2) {
                let key = (p[0].clone(), p[1].clone());
                *counts.entry(key.clone()).or_insert(0) += f;
                index.entry(key).or_default().insert(wi);
            }
        }

        let mut merges = Vec::new();
        while merges.len() < num_merges {
            let best = counts
                .iter()
                .filter(|(_, &c)| c >= 2)
                .max_by(|(pa, ca), (pb, cb)| ca.cmp(cb).then_with(|| pb.cmp(pa)));
            let Some((pair, _)) = best else { break };
            let pair = pair.clone();

            let mut affected: Vec<usize> = index
                .get(&pair)
                .map(|s| s.iter().copied().collect())
                .unwrap_or_default();
            affected.sort_unstable();
            for wi in affected {
                let (syms, f) = &words[wi];
                let f = *f;
                let merged = merge_pair(syms, &pair.0, &pair.1);
                if merged.len() == syms.len() {
                    continue;
                }
                for p in syms.windows(2) {
                    let key = (p[0].clone(), p[1].clone());
                    if let Some(c) = counts.get_mut(&key) {
                        *c -= f;
                        if *c == 0 {
                            counts.remove(&key);
                        }
                    }
                }
                for p in merged.windows(2) {
                    let key = (p[0].clone(), p[1].clone());
                    *counts.entry(key.clone()).or_insert(0) += f;
                    index.entry(key).or_default().insert(wi);
                }
                words[wi].0 = merged;
            }
            counts.remove(&pair);
            index.remove(&pair);
            vocab.insert(format!("{}{}", pair.0, pair.1));
            merges.push(pair);
        }
        Self::with_vocab(merges, vocab)
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn vocab(&self) -> &BTreeSet<String> {
        &self.vocab
    }

    /// Segments one word by replaying merges in learned order.
    pub fn segment_word(&self, word: &str) -> Vec<String> {
        let mut syms: Vec<(String, u32)> = initial_symbols(word)
            .into_iter()
            .map(|s| {
                let id = self.symbols.get(&s).copied().unwrap_or(NO_SYMBOL);
                (s, id)
            })
            .collect();
        loop {
            // Lowest-ranked adjacent pair; equivalent to in-order replay since
            // pairs involving a new symbol always rank after its own merge.
            let mut best: Option<(usize, u32, u32, u32)> = None;
            for w in syms.windows(2) {
                if let Some(&(rank, merged)) = self.ranks.get(&(w[0].1, w[1].1)) {
                    if best.is_none_or(|b| rank < b.0) {
                        best = Some((rank, w[0].1, w[1].1, merged));
                    }
                }
            }
            let Some((_, l, r, merged)) = best else { break };
            let mut out = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && syms[i].1 == l && syms[i + 1].1 == r {
                    out.push((format!("{}{}", syms[i].0, syms[i + 1].0), merged));
                    i += 2;
                } else {
                    out.push(std::mem::take(&mut syms[i]));
                    i += 1;
                }
            }
            syms = out;
        }
        syms.into_iter().map(|(s, _)| s).collect()
    }

    /// Applies the model to every word of `s`.
    pub fn apply(&self, s: &TokenSeq) -> TokenSeq {
        let mut out = Vec::with_capacity(s.len() * 2);
        for w in s.iter() {
            out.extend(self.segment_word(w));
        }
        TokenSeq::from_vec_unchecked(out)
    }

    /// Serializes as `#merges:N` followed by one `left right` line per merge.
    pub fn to_text(&self) -> String {
        let mut out = format!("#merges:{}\n", self.merges.len());
        for (l, r) in &self.merges {
            let _ = writeln!(out, "{l} {r}");
        }
        out
    }

    pub fn from_text(text: &str, path: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "missing #merges header"))?;
        let n: usize = header
            .strip_prefix("#merges:")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::parse(path, 1, "expected #merges:N"))?;
        let mut merges = Vec::with_capacity(n);
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => {
                    merges.push((l.to_owned(), r.to_owned()))
                }
                _ => return Err(Error::parse(path, i + 1, "expected `left right`")),
            }
        }
        if merges.len() != n {
            return Err(Error::parse(
                path,
                1,
                format!("header announces {n} merges, found {}", merges.len()),
            ));
        }
        Self::from_merges(merges).map_err(|e| Error::parse(path, 1, e.to_string()))
    }
}

/// Joins subwords back into words, stripping end-of-word markers.
pub fn bpe_decode(s: &TokenSeq) -> Result<TokenSeq> {
    let mut out = Vec::new();
    let mut pending = String::new();
    for t in s.iter() {
        match t.find(END_OF_WORD) {
            Some(pos) if pos + END_OF_WORD.len() == t.len() => {
                pending.push_str(&t[..pos]);
                if pending.is_empty() {
                    return Err(Error::MalformedSubwords("empty word".into()));
                }
                out.push(std::mem::take(&mut pending));
            }
            Some(_) => {
                return Err(Error::MalformedSubwords(format!(
                    "marker inside token {t:?}"
                )))
            }
            None => pending.push_str(t),
        }
    }
    if !pending.is_empty() {
        return Err(Error::MalformedSubwords(format!(
            "dangling subword {pending:?} without end-of-word marker"
        )));
    }
    Ok(TokenSeq::from_vec_unchecked(out))
}
