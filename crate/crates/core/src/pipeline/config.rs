use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constraints::{PositionalMode, SYSTEM_COUNT};
use crate::decoder::DecodeParams;
use crate::error::{Error, Result};
use crate::idf::IdfThresholds;
use crate::scorer::StatScorerParams;

/// Input files. Relative paths resolve against the config file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    /// English sentences, one per line, for IDF and BPE.
    pub corpus: PathBuf,
    /// `source<TAB>target` scorer training pairs.
    pub bitext: PathBuf,
    /// `source<TAB>reference` pairs to paraphrase.
    pub references: PathBuf,
    #[serde(default)]
    pub ppdb: Option<PathBuf>,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default = "default_artifacts")]
    pub artifacts: PathBuf,
}

fn default_artifacts() -> PathBuf {
    PathBuf::from("artifacts")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdfConfig {
    pub min_idf: f64,
    pub max_idf: f64,
}

impl Default for IdfConfig {
    fn default() -> Self {
        let th = IdfThresholds::default();
        IdfConfig {
            min_idf: th.min_idf,
            max_idf: th.max_idf,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BpeConfig {
    /// Number of merges to learn. Zero keeps whole words.
    pub merges: usize,
}

impl Default for BpeConfig {
    fn default() -> Self {
        BpeConfig { merges: 10_000 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintConfig {
    pub positional: PositionalMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Reference lengths (pre-BPE tokens) reported separately.
    pub buckets: Vec<usize>,
    /// A reference of length `n` falls in bucket `b` when `|n - b| <= tolerance`.
    pub tolerance: usize,
    /// References longer than this many post-BPE tokens get no quality score.
    pub max_score_tokens: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            buckets: vec![5, 10, 20, 40],
            tolerance: 0,
            max_score_tokens: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    #[serde(default = "default_systems")]
    pub systems: String,
    pub paths: Paths,
    #[serde(default)]
    pub idf: IdfConfig,
    #[serde(default)]
    pub bpe: BpeConfig,
    #[serde(default)]
    pub scorer: StatScorerParams,
    #[serde(default)]
    pub decoder: DecodeParams,
    #[serde(default)]
    pub constraints: ConstraintConfig,
    #[serde(default)]
    pub eval: EvalConfig,
}

fn default_systems() -> String {
    format!("1-{SYSTEM_COUNT}")
}

impl PipelineConfig {
    /// Parses TOML and resolves relative paths against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let p = &mut cfg.paths;
        for path in [&mut p.corpus, &mut p.bitext, &mut p.references, &mut p.artifacts] {
            *path = base.join(&*path);
        }
        for path in [&mut p.ppdb, &mut p.lexicon].into_iter().flatten() {
            *path = base.join(&*path);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml(&text, base)
    }

    /// Checks parameters and that every referenced input file exists.
    pub fn validate(&self) -> Result<()> {
        self.thresholds()?;
        self.system_ids()?;
        self.scorer.validate()?;
        self.decoder.validate()?;
        let p = &self.paths;
        let required = [&p.corpus, &p.bitext, &p.references];
        for path in required.into_iter().chain(p.ppdb.iter()).chain(p.lexicon.iter()) {
            if !path.is_file() {
                return Err(Error::MissingInput(path.display().to_string()));
            }
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Result<IdfThresholds> {
        IdfThresholds::new(self.idf.min_idf, self.idf.max_idf)
    }

    pub fn system_ids(&self) -> Result<Vec<u32>> {
        parse_system_list(&self.systems)
    }
}

/// Parses `"1-5,9,17"` into sorted distinct system ids.
pub fn parse_system_list(spec: &str) -> Result<Vec<u32>> {
    let bad = |m: String| Error::Config(format!("system list {spec:?}: {m}"));
    let mut ids = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (part, part),
        };
        let lo: u32 = lo.parse().map_err(|_| bad(format!("bad id {lo:?}")))?;
        let hi: u32 = hi.parse().map_err(|_| bad(format!("bad id {hi:?}")))?;
        if lo == 0 || hi > SYSTEM_COUNT || lo > hi {
            return Err(bad(format!("range {part} outside 1-{SYSTEM_COUNT}")));
        }
        ids.extend(lo..=hi);
    }
    if ids.is_empty() {
        return Err(bad("no systems".into()));
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 3
[paths]
corpus = "c.txt"
bitext = "b.tsv"
references = "r.tsv"
"#;

    #[test]
    fn defaults_and_relative_paths() {
        let cfg = PipelineConfig::from_toml(MINIMAL, Path::new("/data/run")).unwrap();
        assert_eq!(cfg.paths.corpus, Path::new("/data/run/c.txt"));
        assert_eq!(cfg.paths.artifacts, Path::new("/data/run/artifacts"));
        assert_eq!(cfg.system_ids().unwrap(), (1..=37).collect::<Vec<_>>());
        assert_eq!(cfg.decoder, DecodeParams::default());
        assert_eq!(cfg.eval.buckets, [5, 10, 20, 40]);
    }

    #[test]
    fn seed_is_mandatory() {
        let text = MINIMAL.replace("seed = 3", "");
        assert!(matches!(PipelineConfig::from_toml(&text, Path::new(".")), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[decoder]\nbeam = 3\n");
        assert!(PipelineConfig::from_toml(&text, Path::new(".")).is_err());
    }

    #[test]
    fn missing_inputs_fail_validation() {
        let cfg = PipelineConfig::from_toml(MINIMAL, Path::new("/nonexistent")).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::MissingInput(_))));
    }

    #[test]
    fn system_lists() {
        assert_eq!(parse_system_list("34, 21,28,21").unwrap(), [21, 28, 34]);
        assert_eq!(parse_system_list("1-3,5").unwrap(), [1, 2, 3, 5]);
        for bad in ["", "0", "38", "5-2", "x", "1-"] {
            assert!(parse_system_list(bad).is_err(), "{bad}");
        }
    }
}
