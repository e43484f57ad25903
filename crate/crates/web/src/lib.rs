//! WebAssembly bindings for the single-page demo in `www/`.
//!
//! The demo trains a small word-level scorer on the toy world at start-up and
//! exposes three operations: constraint realization for a reference,
//! constrained decoding of a source sentence, and modified BLEU between two
//! sentences. Every call returns a JSON string.

use std::collections::HashSet;

use lexpara::constraints::{
    realize, system, ConstraintSet, Lexicon, Morphology, PositionalBan, PositionalMode, PpdbIndex, RealizeContext,
};
use lexpara::decoder::{compile, decode, DecodeParams};
use lexpara::eval::BleuStats;
use lexpara::idf::{candidate_pool, IdfTable, IdfThresholds};
use lexpara::scorer::{train_stat_scorer, StatScorer, StatScorerParams};
use lexpara::seed;
use lexpara::text::tokenize;
use lexpara::toy::ToyWorld;
use lexpara::{Result, TokenSeq};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const BITEXT_PAIRS: usize = 2000;
const REFERENCES: usize = 40;
const MIN_IDF: f64 = 1.5;
const MAX_IDF: f64 = 9.0;

#[derive(Serialize)]
struct Reference<'a> {
    source: &'a TokenSeq,
    reference: &'a TokenSeq,
}

#[derive(Serialize)]
struct Paraphrase {
    constraints: ConstraintSet,
    output: Option<TokenSeq>,
    logprob: Option<f64>,
    flags: Vec<String>,
    error: Option<String>,
}

#[derive(Serialize)]
struct Realization {
    system: u32,
    name: String,
    pool: Vec<String>,
    paraphrases: Vec<Paraphrase>,
}

#[derive(Serialize)]
struct Bleu {
    bleu: f64,
    unigram_precision: f64,
}

/// The toy world with its trained models.
#[wasm_bindgen]
pub struct Demo {
    seed: u64,
    references: Vec<(TokenSeq, TokenSeq)>,
    idf: IdfTable,
    thresholds: IdfThresholds,
    scorer: StatScorer,
    morphology: Morphology,
    lexicon: Lexicon,
    ppdb: PpdbIndex,
    params: DecodeParams,
}

fn js(e: lexpara::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("demo values serialize")
}

impl Demo {
    pub fn build(seed: u64) -> Result<Demo> {
        let world = ToyWorld::new();
        let fx = world.fixture(seed, BITEXT_PAIRS, REFERENCES);
        let pair = |p: &lexpara::toy::ToyPair| (tokenize(&p.source), tokenize(&p.target));
        let bitext: Vec<_> = fx.bitext.iter().map(pair).collect();
        let references = fx.references.iter().map(pair).collect();
        let corpus: Vec<TokenSeq> = fx.corpus().map(tokenize).collect();
        let idf = IdfTable::build(&corpus)?;
        let params = StatScorerParams {
            order: 3,
            lambda: 0.5,
            coverage: true,
            ..Default::default()
        };
        let scorer = train_stat_scorer(&bitext, &params)?;
        let mut lexicon = Lexicon::builtin();
        lexicon.extend(Lexicon::from_tsv(&fx.lexicon, "toy lexicon")?);
        let known: HashSet<String> = idf.iter().map(|(t, _)| t.to_owned()).collect();
        Ok(Demo {
            seed,
            references,
            morphology: Morphology::new().with_known_words(known),
            idf,
            thresholds: IdfThresholds::new(MIN_IDF, MAX_IDF)?,
            scorer,
            lexicon,
            ppdb: PpdbIndex::from_packet(&fx.ppdb, "toy ppdb")?,
            params: DecodeParams::default(),
        })
    }

    fn run(&self, source: &TokenSeq, constraints: ConstraintSet) -> Paraphrase {
        let automaton = match compile(&constraints, lexpara::scorer::Scorer::vocab(&self.scorer), None) {
            Ok(a) => a,
            Err(e) => {
                return Paraphrase {
                    constraints,
                    output: None,
                    logprob: None,
                    flags: vec!["error".into()],
                    error: Some(e.to_string()),
                }
            }
        };
        let best = decode(&self.scorer, source, &automaton, &self.params).outputs.remove(0);
        Paraphrase {
            constraints,
            output: Some(best.words),
            logprob: Some(best.score),
            flags: best.flags,
            error: None,
        }
    }

    pub fn realize_system(&self, index: usize, system_id: u32) -> Result<String> {
        let (source, reference) = self
            .references
            .get(index)
            .ok_or_else(|| lexpara::Error::InvalidParameter(format!("no reference {index}")))?;
        let config = system(system_id)
            .ok_or_else(|| lexpara::Error::InvalidParameter(format!("no system {system_id}")))?;
        let pool = candidate_pool(reference, &self.idf, &self.thresholds);
        let ctx = RealizeContext {
            morphology: &self.morphology,
            lexicon: &self.lexicon,
            ppdb: Some(&self.ppdb),
            positional: PositionalMode::PerPosition,
        };
        let mut rng = seed::rng_for(self.seed, index as u64, u64::from(system_id));
        let paraphrases = realize(&config, reference, &pool, &ctx, &mut rng)
            .into_iter()
            .map(|cs| self.run(source, cs))
            .collect();
        Ok(to_json(&Realization {
            system: system_id,
            name: config.describe(),
            pool,
            paraphrases,
        }))
    }

    pub fn decode_text(&self, source: &str, positive: &str, negative: &str, banned_first: &str) -> String {
        let phrases = |s: &str| -> Vec<TokenSeq> {
            s.split([',', '\n']).map(tokenize).filter(|t| !t.is_empty()).collect()
        };
        let constraints = ConstraintSet {
            positive: phrases(positive),
            negative: phrases(negative),
            positional: tokenize(banned_first)
                .iter()
                .map(|t| PositionalBan { pos: 0, token: t.clone() })
                .collect(),
            ..Default::default()
        };
        to_json(&self.run(&tokenize(source), constraints))
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> std::result::Result<Demo, JsError> {
        Demo::build(u64::from(seed)).map_err(js)
    }

    #[wasm_bindgen(js_name = referenceCount)]
    pub fn reference_count(&self) -> usize {
        self.references.len()
    }

    /// `{source, reference}` for reference `index`.
    pub fn reference(&self, index: usize) -> Option<String> {
        self.references
            .get(index)
            .map(|(source, reference)| to_json(&Reference { source, reference }))
    }

    /// Candidate pool, realized constraint sets and one paraphrase per set.
    pub fn paraphrase(&self, index: usize, system_id: u32) -> std::result::Result<String, JsError> {
        self.realize_system(index, system_id).map_err(js)
    }

    /// Decodes `source` under comma-separated positive and negative phrases
    /// and a space-separated list of tokens banned in first position.
    pub fn decode(&self, source: &str, positive: &str, negative: &str, banned_first: &str) -> String {
        self.decode_text(source, positive, negative, banned_first)
    }
}

/// Modified BLEU (×100) and unigram precision of one sentence pair.
#[wasm_bindgen]
pub fn bleu(reference: &str, paraphrase: &str) -> String {
    let st = BleuStats::from_pair(&tokenize(reference), &tokenize(paraphrase));
    to_json(&Bleu {
        bleu: st.bleu(),
        unigram_precision: st.unigram_precision(),
    })
}

/// Names of the 37 constraint-selection systems, as a JSON array.
#[wasm_bindgen(js_name = systemNames)]
pub fn system_names() -> String {
    let names: Vec<String> = (1..=37).filter_map(system).map(|s| s.describe()).collect();
    to_json(&names)
}
