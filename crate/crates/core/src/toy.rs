//! A small synthetic bilingual world.
//!
//! English sentences come from a handful of templates whose slots are filled
//! with concepts. Every concept has one or more English realizations, so the
//! same meaning surfaces with different words across the corpus. The source
//! side is a made-up language with exactly one word per concept, which makes
//! the translation relation learnable from a few thousand pairs.
//!
//! Everything is derived from a seed, so two calls with the same arguments
//! produce identical fixtures.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::constraints::CoarsePos;
use crate::eval::{AnnotationRecord, FluencyFlag};
use crate::seed;

/// Probability that an optional slot is filled.
const OPTIONAL_RATE: f64 = 0.3;

struct Class {
    name: &'static str,
    pos: CoarsePos,
    concepts: &'static [&'static [&'static str]],
}

const fn class(
    name: &'static str,
    pos: CoarsePos,
    concepts: &'static [&'static [&'static str]],
) -> Class {
    Class {
        name,
        pos,
        concepts,
    }
}

use CoarsePos::{Adj, Adv, Noun, Other, Verb};

const CLASSES: &[Class] = &[
    class("open", Other, &[&["so"], &["well"], &["now"]]),
    class("often", Adv, &[&["often", "frequently", "regularly"]]),
    class(
        "hazard",
        Noun,
        &[
            &["earthquakes", "tremors", "quakes"],
            &["storms", "tempests", "gales"],
            &["floods", "deluges"],
            &["fires", "blazes", "wildfires"],
        ],
    ),
    class("occur", Verb, &[&["occur", "happen", "take place"]]),
    class(
        "place",
        Noun,
        &[&["city", "town"], &["region", "area", "district"], &["country", "nation"]],
    ),
    class("subj", Other, &[&["I"], &["she"], &["he"]]),
    class("subj2", Other, &[&["I"], &["she"], &["he"], &["we"], &["they"]]),
    class("told", Verb, &[&["told", "informed"]]),
    class("proud", Adj, &[&["proud", "pleased", "glad"]]),
    class("work", Verb, &[&["work", "labor"]]),
    class("for", Other, &[&["for", "on behalf of"]]),
    class(
        "org",
        Noun,
        &[&["company", "firm", "business"], &["school", "academy"], &["government", "state"]],
    ),
    class(
        "weather",
        Noun,
        &[&["storm", "tempest"], &["wind", "gale"], &["rain", "downpour"]],
    ),
    class("very", Adv, &[&["very", "extremely", "really"]]),
    class("strong", Adj, &[&["strong", "powerful", "fierce"]]),
    class(
        "people",
        Noun,
        &[&["people", "residents", "locals"], &["children", "kids"]],
    ),
    class("afraid", Adj, &[&["afraid", "scared", "frightened"]]),
    class("need", Verb, &[&["need", "have", "want"]]),
    class("talk", Verb, &[&["talk", "speak"]]),
    class("about", Other, &[&["about", "regarding", "concerning"]]),
    class(
        "problem",
        Noun,
        &[&["problem", "issue", "matter"], &["plan", "proposal"], &["budget", "costs"]],
    ),
    class("today", Noun, &[&["today", "tonight"], &["tomorrow"]]),
    class("bought", Verb, &[&["bought", "purchased", "got"]]),
    class("new", Adj, &[&["new", "fresh"], &["small", "little"], &["red"]]),
    class(
        "car",
        Noun,
        &[&["car", "vehicle"], &["bike", "bicycle"], &["phone", "telephone"]],
    ),
    class("shop", Noun, &[&["shop", "store"], &["market", "bazaar"]]),
    class("yesterday", Adv, &[&["yesterday"], &["recently", "lately"]]),
    class("help", Verb, &[&["help", "assist"]]),
    class("find", Verb, &[&["find", "locate"]]),
    class(
        "station",
        Noun,
        &[
            &["station", "terminal"],
            &["hotel", "inn"],
            &["museum", "gallery"],
            &["hospital", "clinic"],
        ],
    ),
    class("kids", Noun, &[&["children", "kids"], &["students", "pupils"]]),
    class("played", Verb, &[&["played", "ran"], &["laughed", "giggled"]]),
    class(
        "park",
        Noun,
        &[&["park", "garden", "playground"], &["yard", "courtyard"]],
    ),
    class("after", Other, &[&["after", "following"]]),
    class("class", Noun, &[&["school", "class"], &["lunch", "dinner"]]),
    class(
        "important",
        Adj,
        &[&["important", "essential", "vital"], &["healthy", "good"]],
    ),
    class("drink", Verb, &[&["drink", "consume"]]),
    class("water", Noun, &[&["water", "fluids"], &["milk"], &["tea"]]),
    class("every", Other, &[&["every", "each"]]),
    class("arrived", Verb, &[&["arrived at", "reached", "got to"]]),
    class("best", Adj, &[&["best", "ideal", "easiest"], &["fastest", "quickest"]]),
    class("way", Noun, &[&["way", "method", "approach"]]),
    class("learn", Verb, &[&["learn", "study"]]),
    class(
        "language",
        Noun,
        &[&["language", "tongue"], &["skill", "craft"], &["instrument"]],
    ),
];

/// Slot syntax: `{class}` picks a concept, `{class?}` may be omitted, any
/// other word is literal.
const TEMPLATES: &[&str] = &[
    "{open?} how {often} do {hazard} {occur} in the {place} ?",
    "{open?} {subj} {told} them that {subj} was {proud} to {work} {for} the {org} .",
    "the {weather} was {very} {strong} and the {people} were {afraid} .",
    "{open?} we {need} to {talk} {about} the {problem} {today} .",
    "{subj2} {bought} a {new} {car} from the {shop} {yesterday} .",
    "{open?} can you {help} me {find} the {station} ?",
    "the {kids} {played} in the {park} {after} {class} .",
    "it is {important} to {drink} {water} {every} day .",
    "{subj2} {arrived} the {station} late at night .",
    "{open?} what is the {best} {way} to {learn} a {language} ?",
];

const REALIZATION_WEIGHTS: [&[f64]; 3] = [&[1.0], &[0.6, 0.4], &[0.5, 0.3, 0.2]];

/// A sentence pair of the toy world, as raw text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToyPair {
    pub source: String,
    pub target: String,
}

/// Every file a toy pipeline run needs, as in-memory text.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyFixture {
    /// Scorer training pairs.
    pub bitext: Vec<ToyPair>,
    /// Held-out pairs whose target side is paraphrased.
    pub references: Vec<ToyPair>,
    /// PPDB packet text relating the synonyms of each concept.
    pub ppdb: String,
    /// `token<TAB>tag` lines for every content word.
    pub lexicon: String,
}

impl ToyFixture {
    /// English monolingual corpus: bitext targets followed by references.
    pub fn corpus(&self) -> impl Iterator<Item = &str> {
        self.bitext
            .iter()
            .chain(&self.references)
            .map(|p| p.target.as_str())
    }
}

#[derive(Clone)]
enum Slot {
    Literal(&'static str),
    Concept(&'static Class, usize),
}

#[derive(Clone)]
struct Skeleton {
    slots: Vec<Slot>,
}

/// A scored reference/candidate pair for training the quality model.
#[derive(Clone, Debug, PartialEq)]
pub struct QualityExample {
    pub source: String,
    pub reference: String,
    pub paraphrase: String,
    pub score: f64,
}

/// Generator over the fixed templates and concept inventory.
pub struct ToyWorld {
    foreign: HashMap<String, String>,
}

impl Default for ToyWorld {
    fn default() -> Self {
        Self::new()
    }
}

impl ToyWorld {
    pub fn new() -> Self {
        let mut keys = Vec::new();
        for c in CLASSES {
            for i in 0..c.concepts.len() {
                keys.push(format!("{}#{i}", c.name));
            }
        }
        for t in TEMPLATES {
            for w in t.split_whitespace().filter(|w| !w.starts_with('{')) {
                keys.push(w.to_owned());
            }
        }
        keys.sort();
        keys.dedup();
        let mut used = BTreeSet::new();
        let mut foreign = HashMap::new();
        for k in keys {
            let word = if is_punct(&k) {
                k.clone()
            } else {
                let mut salt = 0u64;
                loop {
                    let w = pseudo_word(&k, salt);
                    if used.insert(w.clone()) {
                        break w;
                    }
                    salt += 1;
                }
            };
            foreign.insert(k, word);
        }
        ToyWorld { foreign }
    }

    /// One random sentence pair.
    pub fn sentence<R: Rng + ?Sized>(&self, rng: &mut R) -> ToyPair {
        let sk = self.skeleton(rng);
        self.render(&sk, rng)
    }

    fn skeleton<R: Rng + ?Sized>(&self, rng: &mut R) -> Skeleton {
        let template = rng.random_range(0..TEMPLATES.len());
        let mut slots = Vec::new();
        for slot in TEMPLATES[template].split_whitespace() {
            let Some(inner) = slot.strip_prefix('{').and_then(|s| s.strip_suffix('}')) else {
                slots.push(Slot::Literal(slot));
                continue;
            };
            let (name, optional) = match inner.strip_suffix('?') {
                Some(n) => (n, true),
                None => (inner, false),
            };
            if optional && !rng.random_bool(OPTIONAL_RATE) {
                continue;
            }
            let class = class_by_name(name);
            slots.push(Slot::Concept(class, rng.random_range(0..class.concepts.len())));
        }
        Skeleton { slots }
    }

    fn render<R: Rng + ?Sized>(&self, sk: &Skeleton, rng: &mut R) -> ToyPair {
        let mut src = Vec::new();
        let mut tgt: Vec<String> = Vec::new();
        for slot in &sk.slots {
            match *slot {
                Slot::Literal(w) => {
                    src.push(self.foreign[w].clone());
                    tgt.push(w.to_owned());
                }
                Slot::Concept(class, ci) => {
                    let realizations = class.concepts[ci];
                    let weights = REALIZATION_WEIGHTS[realizations.len().min(3) - 1];
                    let ri = weighted(weights, rng);
                    src.push(self.foreign[&format!("{}#{ci}", class.name)].clone());
                    tgt.extend(realizations[ri].split_whitespace().map(String::from));
                }
            }
        }
        if let Some(first) = tgt.first_mut() {
            *first = capitalize_first(first);
        }
        ToyPair {
            source: src.join(" "),
            target: tgt.join(" "),
        }
    }

    /// Reference/candidate pairs with a known degree of meaning overlap.
    ///
    /// The candidate re-renders the reference's concepts, swapping each
    /// swappable concept for another of its class with probability drawn per
    /// example. The score is the share of concepts kept, times 100, plus a
    /// little noise.
    pub fn quality_examples(&self, seed: u64, n: usize) -> Vec<QualityExample> {
        let mut rng = seed::rng_for(seed, 2, 0);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let sk = self.skeleton(&mut rng);
            let reference = self.render(&sk, &mut rng);
            let swap = rng.random::<f64>();
            let mut changed = sk.clone();
            let (mut total, mut kept) = (0usize, 0usize);
            for slot in &mut changed.slots {
                if let Slot::Concept(class, ci) = slot {
                    total += 1;
                    if class.concepts.len() > 1 && rng.random_bool(swap) {
                        let shift = rng.random_range(1..class.concepts.len());
                        *ci = (*ci + shift) % class.concepts.len();
                    } else {
                        kept += 1;
                    }
                }
            }
            let candidate = self.render(&changed, &mut rng);
            let share = if total == 0 { 1.0 } else { kept as f64 / total as f64 };
            let noise = rng.random_range(-5.0..5.0);
            out.push(QualityExample {
                source: reference.source,
                reference: reference.target,
                paraphrase: candidate.target,
                score: (100.0 * share + noise).clamp(0.0, 100.0),
            });
        }
        out
    }

    /// Bitext and references drawn from independent streams of `seed`.
    pub fn fixture(&self, seed: u64, bitext_pairs: usize, references: usize) -> ToyFixture {
        let mut rng = seed::rng_for(seed, 0, 0);
        let bitext = (0..bitext_pairs).map(|_| self.sentence(&mut rng)).collect();
        let mut rng = seed::rng_for(seed, 1, 0);
        let references = (0..references).map(|_| self.sentence(&mut rng)).collect();
        ToyFixture {
            bitext,
            references,
            ppdb: ppdb_packet(),
            lexicon: lexicon_tsv(),
        }
    }
}

fn class_by_name(name: &str) -> &'static Class {
    CLASSES
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("template refers to unknown class {name}"))
}

fn weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let mut x = rng.random::<f64>();
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

fn is_punct(w: &str) -> bool {
    !w.chars().any(char::is_alphanumeric)
}

fn capitalize_first(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn pseudo_word(key: &str, salt: u64) -> String {
    const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "ch", "sh"];
    const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for b in key.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut rng = seed::rng(h);
    let syllables = rng.random_range(2..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS[rng.random_range(0..ONSETS.len())]);
        w.push_str(VOWELS[rng.random_range(0..VOWELS.len())]);
    }
    if rng.random_bool(0.4) {
        w.push_str(["n", "k", "r", "s"][rng.random_range(0..4)]);
    }
    w
}

fn tag(pos: CoarsePos) -> &'static str {
    match pos {
        Verb => "VB",
        Noun => "NN",
        Adj => "JJ",
        Adv => "RB",
        Other => "IN",
    }
}

/// Synonym relations among the single-word realizations of each concept.
fn ppdb_packet() -> String {
    let mut out = String::new();
    let mut seen = BTreeSet::new();
    for c in CLASSES.iter().filter(|c| c.pos != Other) {
        for concept in c.concepts {
            let words: Vec<&str> = concept.iter().copied().filter(|w| !w.contains(' ')).collect();
            let mut rows = Vec::new();
            if words.len() >= 2 {
                rows.push((words[0], words[1], "Equivalence"));
                rows.push((words[1], words[0], "Equivalence"));
            }
            if words.len() >= 3 {
                rows.push((words[0], words[2], "ForwardEntailment"));
                rows.push((words[2], words[0], "ReverseEntailment"));
                rows.push((words[1], words[2], "Independent"));
            }
            for (s, t, rel) in rows {
                if seen.insert((s, t)) {
                    let _ = writeln!(
                        out,
                        "[{}] ||| {s} ||| {t} ||| PPDB2.0Score=3.0 ||| 0-0 ||| {rel}",
                        tag(c.pos)
                    );
                }
            }
        }
    }
    out
}

fn lexicon_tsv() -> String {
    let mut rows = BTreeMap::new();
    for c in CLASSES.iter().filter(|c| c.pos != Other) {
        for concept in c.concepts {
            for r in *concept {
                for w in r.split_whitespace() {
                    rows.entry(w.to_lowercase()).or_insert(c.pos);
                }
            }
        }
    }
    let mut out = String::new();
    for (w, p) in rows {
        let _ = writeln!(out, "{w}\t{}", tag(p));
    }
    out
}

/// Shape of a synthetic annotation campaign.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnotationPlan {
    /// Regular workers, each given one planted failure rate.
    pub workers: usize,
    /// Workers who only judge a handful of items.
    pub low_volume_workers: usize,
    pub systems: u32,
    pub items_per_system: usize,
    pub judgments_per_item: usize,
    pub checks_per_worker: usize,
    /// Cycled over regular workers.
    pub fail_rates: Vec<f64>,
}

impl Default for AnnotationPlan {
    fn default() -> Self {
        AnnotationPlan {
            workers: 20,
            low_volume_workers: 2,
            systems: 5,
            items_per_system: 40,
            judgments_per_item: 5,
            checks_per_worker: 20,
            fail_rates: vec![0.0, 0.05, 0.10, 0.15, 0.5],
        }
    }
}

/// Generated judgments together with what was planted.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticAnnotations {
    pub records: Vec<AnnotationRecord>,
    /// Failed checks per worker id.
    pub planted_failures: BTreeMap<String, usize>,
    /// Latent mean of every (system, item).
    pub planted_means: BTreeMap<(u32, String), f64>,
}

/// Judgments with an exact, known number of failed attention checks per
/// worker. A worker with rate `r` fails `round(r * checks)` of their checks.
pub fn synthetic_annotations(seed: u64, plan: &AnnotationPlan) -> SyntheticAnnotations {
    let mut rng = seed::rng_for(seed, 3, 0);
    let mut records = Vec::new();
    let mut planted_failures = BTreeMap::new();
    let mut planted_means = BTreeMap::new();
    let regular: Vec<String> = (0..plan.workers).map(|w| format!("w{w:03}")).collect();
    for (w, id) in regular.iter().enumerate() {
        let rate = plan.fail_rates[w % plan.fail_rates.len().max(1)];
        let fails = (rate * plan.checks_per_worker as f64).round() as usize;
        let mut outcome: Vec<bool> = (0..plan.checks_per_worker).map(|j| j < fails).collect();
        outcome.shuffle(&mut rng);
        for (j, failed) in outcome.into_iter().enumerate() {
            let score = if failed { rng.random_range(0..=95) } else { 100 };
            records.push(AnnotationRecord {
                worker_id: id.clone(),
                item_id: format!("check-{w}-{j}"),
                system_id: 1 + (j as u32 % plan.systems.max(1)),
                score,
                is_attention_check: true,
                fluency_flag: None,
            });
        }
        planted_failures.insert(id.clone(), fails);
    }
    for system in 1..=plan.systems {
        for item in 0..plan.items_per_system {
            let item_id = format!("s{system}-i{item}");
            let mean: f64 = rng.random_range(20.0..95.0);
            planted_means.insert((system, item_id.clone()), mean);
            let judges: Vec<&String> = regular
                .choose_multiple(&mut rng, plan.judgments_per_item.min(regular.len()))
                .collect();
            for worker in judges {
                let score = (mean + rng.random_range(-15.0..15.0)).round().clamp(0.0, 100.0) as u8;
                let fluency_flag = match rng.random_range(0..20) {
                    0 => Some(FluencyFlag::Nonsensical),
                    1 => Some(FluencyFlag::Ungrammatical),
                    _ => None,
                };
                records.push(AnnotationRecord {
                    worker_id: worker.clone(),
                    item_id: item_id.clone(),
                    system_id: system,
                    score,
                    is_attention_check: false,
                    fluency_flag,
                });
            }
        }
    }
    for l in 0..plan.low_volume_workers {
        let id = format!("lv{l:02}");
        for j in 0..5 {
            records.push(AnnotationRecord {
                worker_id: id.clone(),
                item_id: format!("s1-i{j}"),
                system_id: 1,
                score: rng.random_range(0..=100),
                is_attention_check: false,
                fluency_flag: None,
            });
        }
        planted_failures.insert(id, 0);
    }
    records.shuffle(&mut rng);
    SyntheticAnnotations {
        records,
        planted_failures,
        planted_means,
    }
}
