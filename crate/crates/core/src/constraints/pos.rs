//! Coarse part-of-speech classes from a tag lexicon plus suffix rules.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::morph::Morphology;
use crate::error::{Error, Result};
use crate::text::TokenSeq;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoarsePos {
    Verb,
    Noun,
    Adj,
    Adv,
    Other,
}

impl CoarsePos {
    /// Maps a coarse name or a Penn Treebank tag (`VBD`, `NNS`, `[JJ]`, ...).
    pub fn from_tag(tag: &str) -> CoarsePos {
        let t = tag
            .trim()
            .trim_start_matches('[')
            .trim_end_matches(']')
            .to_ascii_lowercase();
        match t.as_str() {
            "verb" | "v" | "md" => CoarsePos::Verb,
            "noun" | "n" => CoarsePos::Noun,
            "adj" | "a" => CoarsePos::Adj,
            "adv" | "r" => CoarsePos::Adv,
            _ if t.starts_with("vb") => CoarsePos::Verb,
            _ if t.starts_with("nn") => CoarsePos::Noun,
            _ if t.starts_with("jj") => CoarsePos::Adj,
            _ if t.starts_with("rb") => CoarsePos::Adv,
            _ => CoarsePos::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CoarsePos::Verb => "verb",
            CoarsePos::Noun => "noun",
            CoarsePos::Adj => "adj",
            CoarsePos::Adv => "adv",
            CoarsePos::Other => "other",
        }
    }
}

impl fmt::Display for CoarsePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CoarsePos {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Err(Error::Format("empty POS tag".into()));
        }
        Ok(CoarsePos::from_tag(s))
    }
}

const OTHER: &str = "a an the this that these those my your his her its our their some any no \
    every each all both either neither i you he she it we they me him us them myself yourself \
    himself herself itself ourselves themselves who whom whose which what where when why how \
    and or but nor so yet if because although though while than as about at by for from in into \
    of on onto over to with without under above below between through during before after \
    against among around behind beyond near since until upon within across toward towards \
    there's it's n't 's 're 've 'll 'd 'm";

const ADVERBS: &str = "often frequently very really always never sometimes usually rarely \
    seldom quickly slowly here there now then soon already still just also too again ever not \
    yesterday today tomorrow regularly occasionally almost quite rather perhaps maybe probably \
    certainly indeed well fast hard early late together away back once twice recently finally";

const ADJECTIVES: &str = "proud happy glad sad good bad big small large little new old great \
    important beautiful pleased angry afraid ashamed embarrassed false true right wrong young \
    long short high low strong weak nice kind calm quiet loud busy free full empty rich poor \
    sure clear easy difficult simple hard best better worse worst real huge tiny ancient modern \
    common rare strange famous serious funny grateful delighted thrilled upset okay fine";

const NOUNS: &str = "man woman child children people person friend family house home car \
    city country world time day night year week month morning evening life job money \
    water food book school teacher student doctor physician nurse hospital earthquake \
    earthquakes myth mythology misconception misconceptions idea ideas thing things frequency \
    deal problem question answer story news report letter message office company market price \
    team game music film movie picture garden river mountain sea road street door window table";

const REGULAR_VERBS: &str = "work walk want need like love help ask call happen occur involve \
    talk look play use try move live believe change open close start finish stop visit watch \
    wait answer explain decide enjoy hope learn listen offer plan prefer reach remember return \
    seem serve share stay suggest travel turn worry cook clean order allow arrive carry cause \
    create describe discover expect follow improve include manage mention notice prepare \
    produce protect provide receive remain repair report save study support";

/// Token → coarse class map.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Lexicon {
    entries: HashMap<String, CoarsePos>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Closed-class words, common content words and every form of the
    /// irregular verb table.
    pub fn builtin() -> Self {
        let mut lex = Lexicon::new();
        let morph = Morphology::new();
        for v in REGULAR_VERBS.split_whitespace() {
            for f in morph.paradigm(v) {
                lex.insert(&f, CoarsePos::Verb);
            }
        }
        for line in include_str!("irregular.txt").lines() {
            if let Some(base) = line.split_whitespace().next() {
                for f in morph.paradigm(base) {
                    lex.insert(&f, CoarsePos::Verb);
                }
            }
        }
        for (list, pos) in [
            (NOUNS, CoarsePos::Noun),
            (ADJECTIVES, CoarsePos::Adj),
            (ADVERBS, CoarsePos::Adv),
            (OTHER, CoarsePos::Other),
        ] {
            for w in list.split_whitespace() {
                lex.insert(w, pos);
            }
        }
        lex
    }

    pub fn insert(&mut self, token: &str, pos: CoarsePos) {
        self.entries.insert(token.to_lowercase(), pos);
    }

    /// Entries of `other` override ours.
    pub fn extend(&mut self, other: Lexicon) {
        self.entries.extend(other.entries);
    }

    pub fn get(&self, token: &str) -> Option<CoarsePos> {
        self.entries.get(&token.to_lowercase()).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Lines of `token<TAB>tag`; blank lines and `#` comments are skipped.
    pub fn from_tsv(text: &str, path: &str) -> Result<Self> {
        let mut lex = Lexicon::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (tok, tag) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected token<TAB>tag"))?;
            if tok.is_empty() || tok.contains(char::is_whitespace) || tag.trim().is_empty() {
                return Err(Error::parse(path, i + 1, "empty token or tag"));
            }
            lex.insert(tok, CoarsePos::from_tag(tag));
        }
        Ok(lex)
    }

    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<_> = self.entries.iter().collect();
        rows.sort();
        let mut out = String::new();
        for (t, p) in rows {
            let _ = writeln!(out, "{t}\t{p}");
        }
        out
    }

    /// Lexicon lookup, then `-ly` → adverb, `-ed`/`-ing` → verb, else noun.
    pub fn classify(&self, token: &str) -> CoarsePos {
        if !token.chars().all(char::is_alphabetic) {
            return CoarsePos::Other;
        }
        if let Some(p) = self.get(token) {
            return p;
        }
        let lower = token.to_lowercase();
        if lower.ends_with("ly") {
            CoarsePos::Adv
        } else if lower.ends_with("ed") || lower.ends_with("ing") {
            CoarsePos::Verb
        } else {
            CoarsePos::Noun
        }
    }
}

/// Coarse class of every token of `s`.
pub fn coarse_pos(s: &TokenSeq, lexicon: &Lexicon) -> Vec<CoarsePos> {
    s.iter().map(|t| lexicon.classify(t)).collect()
}
