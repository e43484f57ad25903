//! File-based pipeline: configuration, artifacts, records and the commands
//! that connect them.
//!
//! A run goes `build` (IDF table, BPE merges, scorer, lexicon, PPDB index),
//! then `generate`, then any of `dedup`, `eval_diversity` and `score`.

mod artifacts;
mod config;
mod fixture;
mod generate;
mod quality;
mod records;
mod report;

use std::fs;
use std::io::Write as _;
use std::path::Path;

pub use artifacts::{build, build_all, read_pairs, read_sentences, sha256_hex, Artifacts, BuildTarget, BuiltArtifact};
pub use config::{parse_system_list, BpeConfig, ConstraintConfig, EvalConfig, IdfConfig, Paths, PipelineConfig};
pub use fixture::{write_toy_fixture, FixtureSpec};
pub use generate::{generate, generate_from_config, GenerateOptions, GenerateSummary};
pub use quality::{parse_quality_rows, score_records, train_quality, QualityRow};
pub use records::{dedup, parse_records, records_to_jsonl, ParaphraseRecord, FLAG_ERROR};
pub use report::{eval_diversity, DiversityCell, DiversityReport, SystemDiversity};

use crate::error::Result;

/// Writes `bytes` to a temporary file beside `path`, then renames it over
/// `path`. Missing parent directories are created.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
