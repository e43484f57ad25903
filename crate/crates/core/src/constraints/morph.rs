//! Rule-based English inflection with an irregular verb table.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::Rng;

const IRREGULAR: &str = include_str!("irregular.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VariantScope {
    /// The token and its capitalized form.
    CapitalizationOnly,
    /// Every inflection of the token's lemma, each in both capitalizations.
    All,
    /// One inflected form other than the token, chosen by the generator.
    VerbOneRandom,
}

#[derive(Clone, Debug)]
struct Irregular {
    base: String,
    past: String,
    participle: String,
}

#[derive(Clone, Debug)]
pub struct Morphology {
    irregular: Vec<Irregular>,
    by_base: HashMap<String, usize>,
    by_form: HashMap<String, Vec<usize>>,
    known: Option<HashSet<String>>,
}

impl Default for Morphology {
    fn default() -> Self {
        Self::new()
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn ends_consonant_y(w: &str) -> bool {
    let c: Vec<char> = w.chars().collect();
    c.len() >= 2 && c[c.len() - 1] == 'y' && !is_vowel(c[c.len() - 2])
}

/// Monosyllabic consonant-vowel-consonant endings double their last letter.
fn should_double(w: &str) -> bool {
    let c: Vec<char> = w.chars().collect();
    let n = c.len();
    if n < 3 {
        return false;
    }
    let (a, b, z) = (c[n - 3], c[n - 2], c[n - 1]);
    if is_vowel(a) || !is_vowel(b) || is_vowel(z) || matches!(z, 'w' | 'x' | 'y') {
        return false;
    }
    let mut groups = 0;
    let mut prev = false;
    for &ch in &c {
        let v = is_vowel(ch);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    groups == 1
}

fn last_char(w: &str) -> char {
    w.chars().last().unwrap_or_default()
}

pub fn third_person(w: &str) -> String {
    if ["s", "x", "z", "ch", "sh", "o"].iter().any(|s| w.ends_with(s)) {
        format!("{w}es")
    } else if ends_consonant_y(w) {
        format!("{}ies", &w[..w.len() - 1])
    } else {
        format!("{w}s")
    }
}

pub fn past_tense(w: &str) -> String {
    if w.ends_with('e') {
        format!("{w}d")
    } else if ends_consonant_y(w) {
        format!("{}ied", &w[..w.len() - 1])
    } else if should_double(w) {
        format!("{w}{}ed", last_char(w))
    } else {
        format!("{w}ed")
    }
}

pub fn present_participle(w: &str) -> String {
    if w == "be" || w.ends_with("ee") || w.ends_with("ye") || w.ends_with("oe") {
        format!("{w}ing")
    } else if let Some(stem) = w.strip_suffix("ie") {
        format!("{stem}ying")
    } else if w.ends_with('e') && w.len() > 2 {
        format!("{}ing", &w[..w.len() - 1])
    } else if should_double(w) {
        format!("{w}{}ing", last_char(w))
    } else {
        format!("{w}ing")
    }
}

/// Uppercases the first character.
pub fn capitalize(t: &str) -> String {
    let mut chars = t.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn strip<'a>(w: &'a str, suffix: &str) -> Option<&'a str> {
    w.strip_suffix(suffix).filter(|s| !s.is_empty())
}

impl Morphology {
    pub fn new() -> Self {
        let mut irregular = Vec::new();
        for line in IRREGULAR.lines() {
            let mut parts = line.split_whitespace();
            if let (Some(b), Some(p), Some(pp)) = (parts.next(), parts.next(), parts.next()) {
                irregular.push(Irregular {
                    base: b.to_owned(),
                    past: p.to_owned(),
                    participle: pp.to_owned(),
                });
            }
        }
        let mut by_base = HashMap::new();
        let mut by_form: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, v) in irregular.iter().enumerate() {
            by_base.insert(v.base.clone(), i);
            let mut forms = vec![v.past.clone(), v.participle.clone(), v.base.clone()];
            forms.push(Self::irregular_third(&v.base));
            forms.push(present_participle(&v.base));
            if v.base == "be" {
                forms.extend(["am", "is", "are", "were"].map(String::from));
            }
            forms.sort();
            forms.dedup();
            for f in forms {
                by_form.entry(f).or_default().push(i);
            }
        }
        Morphology {
            irregular,
            by_base,
            by_form,
            known: None,
        }
    }

    /// Restricts randomly chosen forms to words in `known`.
    pub fn with_known_words(mut self, known: HashSet<String>) -> Self {
        self.known = Some(known);
        self
    }

    pub fn irregular_count(&self) -> usize {
        self.irregular.len()
    }

    fn irregular_third(base: &str) -> String {
        match base {
            "have" => "has".into(),
            "be" => "is".into(),
            _ => third_person(base),
        }
    }

    /// All forms of a lemma, lowercase.
    pub fn paradigm(&self, lemma: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        out.insert(lemma.to_owned());
        if lemma == "be" {
            out.extend(
                ["am", "is", "are", "was", "were", "been", "being"].map(String::from),
            );
            return out;
        }
        match self.by_base.get(lemma) {
            Some(&i) => {
                let v = &self.irregular[i];
                out.insert(v.past.clone());
                out.insert(v.participle.clone());
                out.insert(Self::irregular_third(lemma));
            }
            None => {
                out.insert(third_person(lemma));
                out.insert(past_tense(lemma));
            }
        }
        out.insert(present_participle(lemma));
        out
    }

    /// Candidate lemmas of a token; the token itself when nothing else fits.
    pub fn lemmas(&self, token: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        if let Some(ids) = self.by_form.get(token) {
            out.extend(ids.iter().map(|&i| self.irregular[i].base.clone()));
        }
        let mut cands: Vec<String> = Vec::new();
        if let Some(s) = strip(token, "ies") {
            cands.push(format!("{s}y"));
        }
        if let Some(s) = strip(token, "es") {
            cands.push(s.to_owned());
        }
        if let Some(s) = strip(token, "s") {
            cands.push(s.to_owned());
        }
        if let Some(s) = strip(token, "ied") {
            cands.push(format!("{s}y"));
        }
        if let Some(s) = strip(token, "ed") {
            cands.push(s.to_owned());
            cands.push(format!("{s}e"));
            cands.push(s[..s.len() - last_char(s).len_utf8()].to_owned());
        }
        if let Some(s) = strip(token, "ying") {
            cands.push(format!("{s}ie"));
        }
        if let Some(s) = strip(token, "ing") {
            cands.push(s.to_owned());
            cands.push(format!("{s}e"));
            cands.push(s[..s.len() - last_char(s).len_utf8()].to_owned());
        }
        for c in cands {
            if c.is_empty() || self.by_base.contains_key(&c) {
                continue;
            }
            let regenerates = third_person(&c) == token
                || past_tense(&c) == token
                || present_participle(&c) == token;
            let plausible = self.known.as_ref().is_none_or(|k| k.contains(&c));
            if regenerates && plausible {
                out.insert(c);
            }
        }
        if out.is_empty() || self.by_base.contains_key(token) {
            out.insert(token.to_owned());
        }
        out
    }

    /// Every inflection reachable from the token's lemmas, plus the token.
    pub fn inflections(&self, token: &str) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self
            .lemmas(token)
            .iter()
            .flat_map(|l| self.paradigm(l))
            .collect();
        out.insert(token.to_owned());
        out
    }

    pub fn variants<R: Rng + ?Sized>(
        &self,
        token: &str,
        scope: VariantScope,
        rng: &mut R,
    ) -> BTreeSet<String> {
        match scope {
            VariantScope::CapitalizationOnly => {
                [token.to_owned(), capitalize(token)].into_iter().collect()
            }
            VariantScope::All => self
                .inflections(token)
                .into_iter()
                .flat_map(|f| {
                    let cap = capitalize(&f);
                    [f, cap]
                })
                .collect(),
            VariantScope::VerbOneRandom => {
                let forms: Vec<String> = self
                    .inflections(token)
                    .into_iter()
                    .filter(|f| f != token)
                    .filter(|f| self.known.as_ref().is_none_or(|k| k.contains(f)))
                    .collect();
                let choice = if forms.is_empty() {
                    token.to_owned()
                } else {
                    forms[rng.random_range(0..forms.len())].clone()
                };
                [choice].into_iter().collect()
            }
        }
    }
}
