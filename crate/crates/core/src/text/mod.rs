//! Tokenization, evaluation normalization and byte-pair encoding.

mod bpe;
mod tokenize;

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bpe::{bpe_decode, BpeModel, END_OF_WORD};
pub use tokenize::{is_lower_alpha, is_punctuation, normalize_for_eval, tokenize};

/// An ordered sequence of non-empty tokens without internal whitespace.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        for t in &tokens {
            if t.is_empty() {
                return Err(Error::InvalidParameter("empty token".into()));
            }
            if t.chars().any(char::is_whitespace) {
                return Err(Error::InvalidParameter(format!(
                    "token {t:?} contains whitespace"
                )));
            }
        }
        Ok(TokenSeq(tokens))
    }

    /// Splits on whitespace only. Always valid.
    pub fn from_words(text: &str) -> Self {
        TokenSeq(text.split_whitespace().map(str::to_owned).collect())
    }

    pub fn empty() -> Self {
        TokenSeq(Vec::new())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }

    /// Whether `phrase` occurs as a contiguous run of tokens.
    pub fn contains_phrase(&self, phrase: &[String]) -> bool {
        !phrase.is_empty() && self.0.windows(phrase.len()).any(|w| w == phrase)
    }

    pub(crate) fn from_vec_unchecked(tokens: Vec<String>) -> Self {
        debug_assert!(tokens
            .iter()
            .all(|t| !t.is_empty() && !t.chars().any(char::is_whitespace)));
        TokenSeq(tokens)
    }
}

impl TryFrom<Vec<String>> for TokenSeq {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        TokenSeq::new(v)
    }
}

impl From<TokenSeq> for Vec<String> {
    fn from(s: TokenSeq) -> Self {
        s.0
    }
}

impl Deref for TokenSeq {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_tokens() {
        assert!(TokenSeq::new(vec!["".into()]).is_err());
        assert!(TokenSeq::new(vec!["a b".into()]).is_err());
        assert!(TokenSeq::new(vec!["ab".into()]).is_ok());
    }

    #[test]
    fn phrase_containment() {
        let s = TokenSeq::from_words("how often do earthquakes occur");
        assert!(s.contains_phrase(&["do".into(), "earthquakes".into()]));
        assert!(!s.contains_phrase(&["often".into(), "earthquakes".into()]));
        assert!(!s.contains_phrase(&[]));
    }

    #[test]
    fn serde_validates() {
        let ok: TokenSeq = serde_json::from_str(r#"["a","b"]"#).unwrap();
        assert_eq!(ok.len(), 2);
        assert!(serde_json::from_str::<TokenSeq>(r#"["a b"]"#).is_err());
    }
}
