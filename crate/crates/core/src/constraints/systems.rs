//! The 37 constraint-selection systems and their realization on a reference.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::morph::{capitalize, Morphology, VariantScope};
use super::pos::{CoarsePos, Lexicon};
use super::ppdb::{ppdb_lookup, PpdbIndex, Relation};
use super::{ConstraintSet, PositionalBan};
use crate::idf::{sample_without_replacement, PickMode};
use crate::text::{is_lower_alpha, TokenSeq};

pub const SYSTEM_COUNT: u32 = 37;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemPolarity {
    None,
    Positive,
    Negative,
    NegativePositivePair,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Selector {
    Unconstrained,
    /// 1-based ranks into the descending-idf pool.
    IdfHighest(Vec<usize>),
    /// 1-based ranks counted from the low end of the pool.
    IdfLowest(Vec<usize>),
    Random(usize),
    /// Ban the reference's first `n` tokens.
    Positional(usize),
    Ppdb(Relation),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expansion {
    None,
    All,
    VerbOneRandom,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub id: u32,
    pub polarity: SystemPolarity,
    pub selector: Selector,
    pub expansion: Expansion,
}

impl SystemConfig {
    pub fn describe(&self) -> String {
        let sign = match self.polarity {
            SystemPolarity::None => "",
            SystemPolarity::Positive => "+",
            SystemPolarity::Negative => "-",
            SystemPolarity::NegativePositivePair => "-+",
        };
        let what = match &self.selector {
            Selector::Unconstrained => "no constraints".to_string(),
            Selector::IdfHighest(r) => format!("{r:?} highest IDF"),
            Selector::IdfLowest(r) => format!("{r:?} lowest IDF"),
            Selector::Random(n) => format!("{n} random tokens"),
            Selector::Positional(n) => format!("first {n} tokens"),
            Selector::Ppdb(rel) => format!("PPDB {rel}"),
        };
        let lex = match self.expansion {
            Expansion::None => "",
            Expansion::All => " with variants",
            Expansion::VerbOneRandom => " (verb variant)",
        };
        format!("{sign}{what}{lex}")
    }
}

const RANK_TRIPLES: [&[usize]; 7] = [&[1], &[2], &[3], &[1, 2], &[2, 3], &[1, 3], &[1, 2, 3]];

/// The configuration for a system id in `1..=37`.
pub fn system(id: u32) -> Option<SystemConfig> {
    use Expansion as E;
    use SystemPolarity as P;
    let cfg = |polarity, selector, expansion| SystemConfig {
        id,
        polarity,
        selector,
        expansion,
    };
    let idx = id as usize;
    Some(match id {
        1..=7 => cfg(P::Negative, Selector::IdfHighest(RANK_TRIPLES[idx - 1].to_vec()), E::None),
        8..=14 => cfg(P::Negative, Selector::IdfHighest(RANK_TRIPLES[idx - 8].to_vec()), E::All),
        15..=21 => cfg(P::Negative, Selector::IdfLowest(RANK_TRIPLES[idx - 15].to_vec()), E::None),
        22..=24 => cfg(P::Negative, Selector::Random(idx - 21), E::None),
        25..=27 => cfg(P::Negative, Selector::Random(idx - 24), E::All),
        28 => cfg(P::None, Selector::Unconstrained, E::None),
        29..=31 => cfg(P::Positive, Selector::IdfHighest(vec![idx - 28]), E::VerbOneRandom),
        32..=34 => cfg(P::Negative, Selector::Positional(idx - 31), E::None),
        35 => cfg(P::NegativePositivePair, Selector::Ppdb(Relation::Equivalence), E::None),
        36 => cfg(P::NegativePositivePair, Selector::Ppdb(Relation::ForwardEntailment), E::None),
        37 => cfg(P::NegativePositivePair, Selector::Ppdb(Relation::ReverseEntailment), E::None),
        _ => return None,
    })
}

pub fn systems() -> Vec<SystemConfig> {
    (1..=SYSTEM_COUNT).filter_map(system).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositionalMode {
    /// Output word `i` must differ from reference word `i`.
    #[default]
    PerPosition,
    /// The output must not begin with the reference's first `n` words.
    WholePrefix,
}

/// Shared resources for realizing systems.
#[derive(Clone, Copy)]
pub struct RealizeContext<'a> {
    pub morphology: &'a Morphology,
    pub lexicon: &'a Lexicon,
    pub ppdb: Option<&'a PpdbIndex>,
    pub positional: PositionalMode,
}

fn pick_ranks(pool: &[String], mode: PickMode, ranks: &[usize]) -> Option<Vec<String>> {
    let mut out = Vec::with_capacity(ranks.len());
    for &k in ranks {
        if k == 0 || pool.len() < k {
            return None;
        }
        out.push(match mode {
            PickMode::Lowest => pool[pool.len() - k].clone(),
            _ => pool[k - 1].clone(),
        });
    }
    Some(out)
}

fn negatives<R: Rng + ?Sized>(
    tokens: &[String],
    expansion: Expansion,
    morph: &Morphology,
    rng: &mut R,
) -> Vec<TokenSeq> {
    let scope = match expansion {
        Expansion::All => VariantScope::All,
        _ => VariantScope::CapitalizationOnly,
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in tokens {
        for v in morph.variants(t, scope, rng) {
            if seen.insert(v.clone()) {
                out.push(TokenSeq::from_words(&v));
            }
        }
    }
    out
}

fn pos_of(token: &str, reference: &TokenSeq, lexicon: &Lexicon) -> CoarsePos {
    reference
        .iter()
        .find(|t| *t == token)
        .map(|t| lexicon.classify(t))
        .unwrap_or_else(|| lexicon.classify(token))
}

/// Produces the constraint sets a system applies to one reference.
///
/// PPDB systems yield one set per selected paraphrase; every other system
/// yields at most one set. An empty result means the reference is skipped
/// for this system.
pub fn realize<R: Rng + ?Sized>(
    config: &SystemConfig,
    reference: &TokenSeq,
    pool: &[String],
    ctx: &RealizeContext<'_>,
    rng: &mut R,
) -> Vec<ConstraintSet> {
    let single = |cs: ConstraintSet| vec![cs];
    match &config.selector {
        Selector::Unconstrained => single(ConstraintSet::default()),
        Selector::IdfHighest(ranks) if config.polarity == SystemPolarity::Positive => {
            let Some(picked) = pick_ranks(pool, PickMode::Highest, ranks) else {
                return vec![];
            };
            let mut positive = Vec::new();
            for t in picked {
                let form = if config.expansion == Expansion::VerbOneRandom
                    && pos_of(&t, reference, ctx.lexicon) == CoarsePos::Verb
                {
                    ctx.morphology
                        .variants(&t, VariantScope::VerbOneRandom, rng)
                        .into_iter()
                        .next()
                        .unwrap_or(t)
                } else {
                    t
                };
                positive.push(TokenSeq::from_words(&form));
            }
            single(ConstraintSet {
                positive,
                ..Default::default()
            })
        }
        Selector::IdfHighest(ranks) | Selector::IdfLowest(ranks) => {
            let mode = if matches!(config.selector, Selector::IdfLowest(_)) {
                PickMode::Lowest
            } else {
                PickMode::Highest
            };
            match pick_ranks(pool, mode, ranks) {
                Some(picked) => single(ConstraintSet {
                    negative: negatives(&picked, config.expansion, ctx.morphology, rng),
                    ..Default::default()
                }),
                None => vec![],
            }
        }
        Selector::Random(n) => match sample_without_replacement(pool, *n, rng) {
            Some(picked) => single(ConstraintSet {
                negative: negatives(&picked, config.expansion, ctx.morphology, rng),
                ..Default::default()
            }),
            None => vec![],
        },
        Selector::Positional(n) => {
            if reference.len() < *n {
                return vec![];
            }
            match ctx.positional {
                PositionalMode::PerPosition => single(ConstraintSet {
                    positional: (0..*n)
                        .map(|i| PositionalBan {
                            pos: i,
                            token: reference[i].clone(),
                        })
                        .collect(),
                    ..Default::default()
                }),
                PositionalMode::WholePrefix => single(ConstraintSet {
                    prefix_bans: vec![TokenSeq::from_vec_unchecked(reference[..*n].to_vec())],
                    ..Default::default()
                }),
            }
        }
        Selector::Ppdb(relation) => {
            let Some(index) = ctx.ppdb else {
                return vec![];
            };
            let mut out = Vec::new();
            for t in pool {
                let pos = pos_of(t, reference, ctx.lexicon);
                let banned = [t.clone(), capitalize(t)];
                for e in ppdb_lookup(t, pos, index, rng) {
                    let target = &e.target[0];
                    if e.relation != *relation
                        || !is_lower_alpha(target)
                        || banned.contains(target)
                    {
                        continue;
                    }
                    out.push(ConstraintSet {
                        positive: vec![e.target.clone()],
                        negative: banned.iter().map(|b| TokenSeq::from_words(b)).collect(),
                        ..Default::default()
                    });
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::violates;
    use crate::idf::{candidate_pool, IdfThresholds};
    use crate::seed;
    use crate::text::tokenize;
    use std::collections::HashMap;

    fn seq(s: &str) -> TokenSeq {
        TokenSeq::from_words(s)
    }

    fn pool(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    struct Fixture {
        morph: Morphology,
        lex: Lexicon,
        ppdb: PpdbIndex,
    }

    impl Fixture {
        fn new() -> Self {
            let packet = "\
[RB] ||| often ||| frequently ||| s ||| 0-0 ||| Equivalence
[RB] ||| often ||| regularly ||| s ||| 0-0 ||| ForwardEntailment
[JJ] ||| proud ||| pleased ||| s ||| 0-0 ||| Equivalence
[VB] ||| proud ||| boast ||| s ||| 0-0 ||| Equivalence
[VBD] ||| told ||| informed ||| s ||| 0-0 ||| ReverseEntailment
";
            Fixture {
                morph: Morphology::new(),
                lex: Lexicon::builtin(),
                ppdb: PpdbIndex::from_packet(packet, "p").unwrap(),
            }
        }

        fn ctx(&self) -> RealizeContext<'_> {
            RealizeContext {
                morphology: &self.morph,
                lexicon: &self.lex,
                ppdb: Some(&self.ppdb),
                positional: PositionalMode::PerPosition,
            }
        }
    }

    fn worked_example() -> (TokenSeq, Vec<String>) {
        let idf: HashMap<String, f64> = [
            ("proud", 11.1),
            ("told", 7.9),
            ("work", 7.4),
            ("them", 6.2),
            ("her", 5.8),
            ("was", 4.3),
            ("for", 3.6),
            ("to", 2.3),
        ]
        .into_iter()
        .map(|(t, v)| (t.to_string(), v))
        .collect();
        let r = tokenize("I told her I was proud to work for them.");
        let p = candidate_pool(&r, &idf, &IdfThresholds::default());
        (r, p)
    }

    #[test]
    fn registry_is_complete() {
        let all = systems();
        assert_eq!(all.len(), 37);
        for (i, s) in all.iter().enumerate() {
            assert_eq!(s.id as usize, i + 1);
        }
        assert!(system(0).is_none() && system(38).is_none());
        assert_eq!(system(17).unwrap().selector, Selector::IdfLowest(vec![3]));
        assert_eq!(system(21).unwrap().selector, Selector::IdfLowest(vec![1, 2, 3]));
        assert_eq!(system(6).unwrap().selector, Selector::IdfHighest(vec![1, 3]));
        assert_eq!(system(13).unwrap().expansion, Expansion::All);
        assert_eq!(system(27).unwrap().selector, Selector::Random(3));
        assert_eq!(system(31).unwrap().selector, Selector::IdfHighest(vec![3]));
        assert_eq!(system(34).unwrap().selector, Selector::Positional(3));
    }

    #[test]
    fn system_18_on_worked_example() {
        let f = Fixture::new();
        let (r, p) = worked_example();
        let sets = realize(&system(18).unwrap(), &r, &p, &f.ctx(), &mut seed::rng(0));
        assert_eq!(sets.len(), 1);
        let neg: BTreeSet<String> = sets[0].negative.iter().map(|s| s.to_string()).collect();
        assert_eq!(neg, ["for", "For", "to", "To"].iter().map(|s| s.to_string()).collect());
        assert!(sets[0].positive.is_empty());
    }

    #[test]
    fn system_28_is_empty_set() {
        let f = Fixture::new();
        let sets = realize(&system(28).unwrap(), &seq("anything at all"), &[], &f.ctx(), &mut seed::rng(0));
        assert_eq!(sets, vec![ConstraintSet::default()]);
    }

    #[test]
    fn short_pool_skips() {
        let f = Fixture::new();
        let p = pool(&["proud", "told"]);
        let r = seq("told proud");
        for id in [3, 7, 17, 21, 24, 31] {
            assert!(realize(&system(id).unwrap(), &r, &p, &f.ctx(), &mut seed::rng(0)).is_empty(), "{id}");
        }
    }

    #[test]
    fn positive_verb_gets_one_inflection() {
        let f = Fixture::new();
        let (r, p) = worked_example();
        // Second highest is "told", a verb.
        let sets = realize(&system(30).unwrap(), &r, &p, &f.ctx(), &mut seed::rng(4));
        assert_eq!(sets.len(), 1);
        let form = sets[0].positive[0][0].clone();
        assert!(["tell", "tells", "telling"].contains(&form.as_str()), "{form}");
        // "proud" is an adjective and stays as is.
        let sets = realize(&system(29).unwrap(), &r, &p, &f.ctx(), &mut seed::rng(4));
        assert_eq!(sets[0].positive, vec![seq("proud")]);
    }

    #[test]
    fn positional_bans_from_reference() {
        let f = Fixture::new();
        let r = tokenize("How often do earthquakes occur?");
        let sets = realize(&system(34).unwrap(), &r, &[], &f.ctx(), &mut seed::rng(0));
        let cs = &sets[0];
        assert_eq!(cs.positional.len(), 3);
        assert!(!violates(&tokenize("What frequency do earthquakes happen?"), cs).is_clean());
        assert!(violates(&tokenize("What frequency are earthquakes happening?"), cs).is_clean());
        assert!(!violates(&tokenize("How frequently are earthquakes happening?"), cs).is_clean());

        let mut whole = f.ctx();
        whole.positional = PositionalMode::WholePrefix;
        let sets = realize(&system(34).unwrap(), &r, &[], &whole, &mut seed::rng(0));
        assert_eq!(sets[0].prefix_bans, vec![seq("How often do")]);
        assert!(violates(&tokenize("How often are earthquakes happening?"), &sets[0]).is_clean());
    }

    #[test]
    fn ppdb_pairs_one_per_paraphrase() {
        let f = Fixture::new();
        let r = seq("how often are you proud ?");
        let p = pool(&["proud", "often"]);
        let sets = realize(&system(35).unwrap(), &r, &p, &f.ctx(), &mut seed::rng(0));
        assert_eq!(sets.len(), 2);
        assert_eq!(sets[0].positive, vec![seq("pleased")]);
        assert_eq!(sets[0].negative, vec![seq("proud"), seq("Proud")]);
        assert_eq!(sets[1].positive, vec![seq("frequently")]);
        assert!(realize(&system(37).unwrap(), &r, &p, &f.ctx(), &mut seed::rng(0)).is_empty());

        let mut no_ppdb = f.ctx();
        no_ppdb.ppdb = None;
        assert!(realize(&system(35).unwrap(), &r, &p, &no_ppdb, &mut seed::rng(0)).is_empty());
    }

    #[test]
    fn idf_systems_stay_inside_pool_and_are_reproducible() {
        let f = Fixture::new();
        let (r, p) = worked_example();
        for id in (1..=27).chain(29..=31) {
            let cfg = system(id).unwrap();
            let a = realize(&cfg, &r, &p, &f.ctx(), &mut seed::rng(id as u64));
            let b = realize(&cfg, &r, &p, &f.ctx(), &mut seed::rng(id as u64));
            assert_eq!(a, b);
            for cs in &a {
                for phrase in cs.negative.iter().chain(&cs.positive) {
                    assert_eq!(phrase.len(), 1);
                }
                if cfg.expansion == Expansion::None {
                    for n in &cs.negative {
                        assert!(p.contains(&n[0].to_lowercase()), "{id}: {n}");
                    }
                }
                for pos in &cs.positive {
                    assert!(!cs.negative.contains(pos));
                }
            }
        }
    }
}
