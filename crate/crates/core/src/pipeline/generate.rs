use serde::Serialize;

use super::artifacts::{read_pairs, Artifacts};
use super::config::PipelineConfig;
use super::records::{ParaphraseRecord, FLAG_ERROR};
use crate::constraints::{realize, system, ConstraintSet, Morphology, PositionalMode, RealizeContext};
use crate::decoder::{decode_batch, DecodeJob, DecodeParams};
use crate::error::Result;
use crate::idf::{candidate_pool, IdfThresholds};
use crate::seed;
use crate::text::TokenSeq;

/// References decoded per batch; progress is reported between batches.
const CHUNK: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct GenerateOptions {
    pub seed: u64,
    pub systems: Vec<u32>,
    pub thresholds: IdfThresholds,
    pub decoder: DecodeParams,
    pub positional: PositionalMode,
}

impl GenerateOptions {
    pub fn from_config(cfg: &PipelineConfig) -> Result<Self> {
        Ok(GenerateOptions {
            seed: cfg.seed,
            systems: cfg.system_ids()?,
            thresholds: cfg.thresholds()?,
            decoder: cfg.decoder.clone(),
            positional: cfg.constraints.positional,
        })
    }
}

/// Per-run accounting.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GenerateSummary {
    pub references: usize,
    /// Decodes run (one per realized constraint set).
    pub jobs: usize,
    pub records: usize,
    /// (reference, system) combinations the system could not realize.
    pub skipped: usize,
    /// Decodes rejected before search.
    pub errors: usize,
    /// Records carrying any flag, errors included.
    pub flagged: usize,
}

struct Pending {
    sentence_id: u64,
    system: u32,
}

/// Realizes and decodes every reference under every requested system.
///
/// `progress` is called with the number of references finished so far.
pub fn generate(
    references: &[(TokenSeq, TokenSeq)],
    artifacts: &Artifacts,
    opts: &GenerateOptions,
    progress: &mut dyn FnMut(usize, usize),
) -> Result<(Vec<ParaphraseRecord>, GenerateSummary)> {
    opts.decoder.validate()?;
    let morphology = Morphology::new().with_known_words(artifacts.known_words());
    let ctx = RealizeContext {
        morphology: &morphology,
        lexicon: &artifacts.lexicon,
        ppdb: artifacts.ppdb.as_ref(),
        positional: opts.positional,
    };
    let configs: Vec<_> = opts.systems.iter().filter_map(|&s| system(s)).collect();
    let mut summary = GenerateSummary {
        references: references.len(),
        ..Default::default()
    };
    let mut records = Vec::new();
    for (chunk_no, chunk) in references.chunks(CHUNK).enumerate() {
        let mut jobs = Vec::new();
        let mut meta = Vec::new();
        for (offset, (source, reference)) in chunk.iter().enumerate() {
            let sentence_id = (chunk_no * CHUNK + offset) as u64;
            let pool = candidate_pool(reference, &artifacts.idf, &opts.thresholds);
            for config in &configs {
                let mut rng = seed::rng_for(opts.seed, sentence_id, u64::from(config.id));
                let sets = realize(config, reference, &pool, &ctx, &mut rng);
                if sets.is_empty() {
                    summary.skipped += 1;
                }
                for constraints in sets {
                    jobs.push(DecodeJob {
                        source: source.clone(),
                        constraints,
                    });
                    meta.push(Pending {
                        sentence_id,
                        system: config.id,
                    });
                }
            }
        }
        let results = decode_batch(&artifacts.scorer, &jobs, &opts.decoder, artifacts.bpe.as_ref());
        summary.jobs += jobs.len();
        for ((job, m), result) in jobs.into_iter().zip(meta).zip(results) {
            let (_, reference) = &chunk[m.sentence_id as usize - chunk_no * CHUNK];
            let base = |constraints: ConstraintSet| ParaphraseRecord {
                sentence_id: m.sentence_id,
                systems: vec![m.system],
                source: job.source.clone(),
                reference: reference.clone(),
                constraints,
                output: TokenSeq::empty(),
                logprob: None,
                met_count: 0,
                flags: vec![],
                error: None,
                predicted_quality: None,
            };
            match result {
                Ok(res) => {
                    for h in res.outputs {
                        let mut r = base(job.constraints.clone());
                        r.output = h.words;
                        r.logprob = Some(h.score);
                        r.met_count = h.met_count;
                        r.flags = h.flags;
                        records.push(r);
                    }
                }
                Err(e) => {
                    summary.errors += 1;
                    let mut r = base(job.constraints);
                    r.flags.push(FLAG_ERROR.to_owned());
                    r.error = Some(e.to_string());
                    records.push(r);
                }
            }
        }
        progress(
            (chunk_no * CHUNK + chunk.len()).min(references.len()),
            references.len(),
        );
    }
    summary.records = records.len();
    summary.flagged = records.iter().filter(|r| r.is_flagged()).count();
    Ok((records, summary))
}

/// Loads references and artifacts named by `cfg` and runs [`generate`].
pub fn generate_from_config(
    cfg: &PipelineConfig,
    progress: &mut dyn FnMut(usize, usize),
) -> Result<(Vec<ParaphraseRecord>, GenerateSummary)> {
    cfg.validate()?;
    let artifacts = Artifacts::load(cfg)?;
    let references = read_pairs(&cfg.paths.references)?;
    generate(&references, &artifacts, &GenerateOptions::from_config(cfg)?, progress)
}
