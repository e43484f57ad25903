//! The next-token scorer contract and a statistical reference scorer.
//!
//! A scorer owns a target [`Vocab`] and maps a source sentence plus a target
//! prefix to a log-probability distribution over that vocabulary. The decoder
//! only ever talks to the [`Scorer`] trait, so a neural model can be plugged in
//! without touching the search.

mod stat;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{tokenize, TokenSeq, END_OF_WORD};

pub use stat::{train_stat_scorer, StatScorer, StatScorerParams, MAGIC};

/// End of sentence. Always id 0.
pub const EOS: u32 = 0;
/// Unknown token. Always id 1.
pub const UNK: u32 = 1;
/// Beginning of sentence. Appears only in contexts, never as a prediction.
pub const BOS: u32 = u32::MAX;

pub const EOS_TOKEN: &str = "</s>";
pub const UNK_TOKEN: &str = "<unk>";
pub const BOS_TOKEN: &str = "<s>";

/// How target tokens relate to words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segmentation {
    /// Every token is a whole word.
    Words,
    /// Tokens are BPE pieces; a word ends at a piece carrying the end-of-word marker.
    Bpe,
}

/// Token id map. Ids 0 and 1 are EOS and UNK; the rest are sorted tokens.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "VocabRepr", try_from = "VocabRepr")]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    word_final: Vec<bool>,
    segmentation: Segmentation,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    segmentation: Segmentation,
    tokens: Vec<String>,
}

impl From<Vocab> for VocabRepr {
    fn from(v: Vocab) -> Self {
        VocabRepr {
            segmentation: v.segmentation,
            tokens: v.tokens.into_iter().skip(2).collect(),
        }
    }
}

impl TryFrom<VocabRepr> for Vocab {
    type Error = Error;

    fn try_from(r: VocabRepr) -> Result<Self> {
        let n = r.tokens.len();
        let v = Vocab::new(r.tokens, r.segmentation);
        if v.len() != n + 2 {
            return Err(Error::Format("vocabulary has duplicate or reserved tokens".into()));
        }
        Ok(v)
    }
}

impl Vocab {
    /// Builds a vocabulary from arbitrary tokens. Duplicates and the reserved
    /// EOS/UNK/BOS spellings are dropped.
    pub fn new<I, S>(tokens: I, segmentation: Segmentation) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut words: Vec<String> = tokens
            .into_iter()
            .map(Into::into)
            .filter(|t| ![EOS_TOKEN, UNK_TOKEN, BOS_TOKEN].contains(&t.as_str()))
            .collect();
        words.sort();
        words.dedup();
        let mut all = vec![EOS_TOKEN.to_string(), UNK_TOKEN.to_string()];
        all.extend(words);
        let index = all
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let word_final = all
            .iter()
            .map(|t| match segmentation {
                Segmentation::Words => true,
                Segmentation::Bpe => t.ends_with(END_OF_WORD),
            })
            .collect();
        Vocab {
            tokens: all,
            index,
            word_final,
            segmentation,
        }
    }

    /// Picks [`Segmentation::Bpe`] if any token carries the end-of-word marker.
    pub fn infer<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        let seg = if tokens.iter().any(|t| t.ends_with(END_OF_WORD)) {
            Segmentation::Bpe
        } else {
            Segmentation::Words
        };
        Vocab::new(tokens, seg)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn segmentation(&self) -> Segmentation {
        self.segmentation
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    /// Like [`Vocab::id`] but maps unknown tokens to [`UNK`].
    pub fn id_or_unk(&self, token: &str) -> u32 {
        self.id(token).unwrap_or(UNK)
    }

    pub fn token(&self, id: u32) -> &str {
        if id == BOS {
            BOS_TOKEN
        } else {
            &self.tokens[id as usize]
        }
    }

    /// Whether emitting `id` completes a word. EOS and UNK count as word-final.
    pub fn is_word_final(&self, id: u32) -> bool {
        id == BOS || self.word_final[id as usize]
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<u32> {
        tokens.iter().map(|t| self.id_or_unk(t)).collect()
    }

    /// Token strings for `ids`, skipping BOS and EOS.
    pub fn decode(&self, ids: &[u32]) -> TokenSeq {
        TokenSeq::from_vec_unchecked(
            ids.iter()
                .filter(|&&i| i != BOS && i != EOS)
                .map(|&i| self.tokens[i as usize].clone())
                .collect(),
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.tokens.iter().enumerate().map(|(i, t)| (i as u32, t.as_str()))
    }
}

/// Scoring state for one source sentence.
pub trait SourceScorer {
    /// Writes `ln p(next | source, prefix)` for every vocabulary id into `out`.
    /// `prefix` starts with [`BOS`].
    fn step_into(&self, prefix: &[u32], out: &mut Vec<f64>);

    fn step(&self, prefix: &[u32]) -> Vec<f64> {
        let mut out = Vec::new();
        self.step_into(prefix, &mut out);
        out
    }
}

/// A conditional next-token model over a fixed target vocabulary.
pub trait Scorer: Sync {
    fn vocab(&self) -> &Vocab;

    /// Maps source tokens to the scorer's source ids.
    fn encode_source(&self, source: &[String]) -> Vec<u32>;

    /// Precomputes whatever depends only on the source.
    fn prepare<'a>(&'a self, source: &[u32]) -> Box<dyn SourceScorer + 'a>;

    /// One-shot step on string tokens. Unknown tokens map to UNK.
    fn step(&self, source: &[String], prefix: &[String]) -> Vec<f64> {
        let src = self.encode_source(source);
        let mut ids = vec![BOS];
        ids.extend(prefix.iter().filter(|t| *t != BOS_TOKEN).map(|t| self.vocab().id_or_unk(t)));
        self.prepare(&src).step(&ids)
    }
}

/// Sum of step log-probabilities along `output` followed by EOS.
pub fn sequence_logprob<S: Scorer + ?Sized>(scorer: &S, source: &[String], output: &[String]) -> f64 {
    let src = scorer.encode_source(source);
    let mut ids: Vec<u32> = scorer.vocab().encode(output);
    ids.push(EOS);
    sequence_logprob_ids(scorer.prepare(&src).as_ref(), &ids)
}

/// Sum of step log-probabilities along `ids`, which should end with EOS.
pub fn sequence_logprob_ids(prepared: &dyn SourceScorer, ids: &[u32]) -> f64 {
    let mut prefix = Vec::with_capacity(ids.len() + 1);
    prefix.push(BOS);
    let mut buf = Vec::new();
    let mut total = 0.0;
    for &id in ids {
        prepared.step_into(&prefix, &mut buf);
        total += buf[id as usize];
        prefix.push(id);
    }
    total
}

/// Parses a bitext TSV (`source<TAB>target`, raw text on both sides).
/// Blank lines are skipped.
pub fn parse_bitext(text: &str, path: &str) -> Result<Vec<(TokenSeq, TokenSeq)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Some((src, tgt)) = line.split_once('\t') else {
            return Err(Error::parse(path, i + 1, "expected source<TAB>target"));
        };
        let (src, tgt) = (tokenize(src), tokenize(tgt));
        if src.is_empty() || tgt.is_empty() {
            return Err(Error::parse(path, i + 1, "empty side"));
        }
        out.push((src, tgt));
    }
    Ok(out)
}
