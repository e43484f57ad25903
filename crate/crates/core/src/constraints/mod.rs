//! Constraint sets, their word-level checker, and the selection systems
//! that derive them from a reference sentence.

mod morph;
mod pos;
mod ppdb;
mod systems;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::TokenSeq;

pub use morph::{capitalize, past_tense, present_participle, third_person, Morphology, VariantScope};
pub use pos::{coarse_pos, CoarsePos, Lexicon};
pub use ppdb::{ppdb_lookup, PpdbEntry, PpdbIndex, Relation};
pub use systems::{
    realize, system, systems, Expansion, PositionalMode, RealizeContext, Selector, SystemConfig,
    SystemPolarity, SYSTEM_COUNT,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

/// A single restriction on decoder output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub polarity: Polarity,
    pub phrase: TokenSeq,
    /// Output word position the constraint binds to, for positional bans.
    pub position: Option<usize>,
}

impl Constraint {
    pub fn new(polarity: Polarity, phrase: TokenSeq, position: Option<usize>) -> Result<Self> {
        if phrase.is_empty() {
            return Err(Error::InvalidParameter("empty constraint phrase".into()));
        }
        if position.is_some() && (polarity != Polarity::Negative || phrase.len() != 1) {
            return Err(Error::InvalidParameter(
                "positional constraints are negative single tokens".into(),
            ));
        }
        Ok(Constraint {
            polarity,
            phrase,
            position,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PositionalBan {
    pub pos: usize,
    pub token: String,
}

/// The constraints applied to one decode, in word space.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub positive: Vec<TokenSeq>,
    pub negative: Vec<TokenSeq>,
    pub positional: Vec<PositionalBan>,
    /// Whole-prefix bans: the output must not begin with any of these.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prefix_bans: Vec<TokenSeq>,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.positive.is_empty()
            && self.negative.is_empty()
            && self.positional.is_empty()
            && self.prefix_bans.is_empty()
    }

    pub fn from_constraints(cs: impl IntoIterator<Item = Constraint>) -> Self {
        let mut set = ConstraintSet::default();
        for c in cs {
            match (c.polarity, c.position) {
                (Polarity::Positive, _) => set.positive.push(c.phrase),
                (Polarity::Negative, None) => set.negative.push(c.phrase),
                (Polarity::Negative, Some(pos)) => set.positional.push(PositionalBan {
                    pos,
                    token: c.phrase[0].clone(),
                }),
            }
        }
        set
    }

    pub fn constraints(&self) -> Vec<Constraint> {
        let pos = self.positive.iter().map(|p| Constraint {
            polarity: Polarity::Positive,
            phrase: p.clone(),
            position: None,
        });
        let neg = self.negative.iter().map(|p| Constraint {
            polarity: Polarity::Negative,
            phrase: p.clone(),
            position: None,
        });
        let at = self.positional.iter().map(|b| Constraint {
            polarity: Polarity::Negative,
            phrase: TokenSeq::from_words(&b.token),
            position: Some(b.pos),
        });
        pos.chain(neg).chain(at).collect()
    }
}

/// A constraint set tagged with the sentence and system it was realized for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub sentence_id: u64,
    pub system: u32,
    #[serde(flatten)]
    pub constraints: ConstraintSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MissingPositive { phrase: TokenSeq },
    NegativePresent { phrase: TokenSeq, at: usize },
    PositionalMatch { pos: usize, token: String },
    PrefixMatch { phrase: TokenSeq },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a word-level output against every constraint of the set.
pub fn violates(output: &TokenSeq, cs: &ConstraintSet) -> ViolationReport {
    let mut violations = Vec::new();
    for p in &cs.positive {
        if !output.contains_phrase(p) {
            violations.push(Violation::MissingPositive { phrase: p.clone() });
        }
    }
    for p in &cs.negative {
        if p.is_empty() || p.len() > output.len() {
            continue;
        }
        for (at, w) in output.windows(p.len()).enumerate() {
            if w == p.tokens() {
                violations.push(Violation::NegativePresent {
                    phrase: p.clone(),
                    at,
                });
            }
        }
    }
    for b in &cs.positional {
        if output.get(b.pos) == Some(&b.token) {
            violations.push(Violation::PositionalMatch {
                pos: b.pos,
                token: b.token.clone(),
            });
        }
    }
    for p in &cs.prefix_bans {
        if !p.is_empty() && output.starts_with(p) {
            violations.push(Violation::PrefixMatch { phrase: p.clone() });
        }
    }
    ViolationReport { violations }
}
