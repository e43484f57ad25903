use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use super::config::PipelineConfig;
use super::write_atomic;
use crate::constraints::{Lexicon, PpdbIndex};
use crate::error::{Error, Result};
use crate::idf::IdfTable;
use crate::scorer::{parse_bitext, train_stat_scorer, StatScorer};
use crate::text::{tokenize, BpeModel, TokenSeq};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BuildTarget {
    Idf,
    Bpe,
    Scorer,
    Lexicon,
    PpdbIndex,
}

impl BuildTarget {
    pub const ALL: [BuildTarget; 5] = [
        BuildTarget::Idf,
        BuildTarget::Bpe,
        BuildTarget::Scorer,
        BuildTarget::Lexicon,
        BuildTarget::PpdbIndex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuildTarget::Idf => "idf",
            BuildTarget::Bpe => "bpe",
            BuildTarget::Scorer => "scorer",
            BuildTarget::Lexicon => "lexicon",
            BuildTarget::PpdbIndex => "ppdb-index",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            BuildTarget::Idf => "idf.tsv",
            BuildTarget::Bpe => "bpe.txt",
            BuildTarget::Scorer => "scorer.pbs",
            BuildTarget::Lexicon => "lexicon.tsv",
            BuildTarget::PpdbIndex => "ppdb-index.tsv",
        }
    }

    pub fn path(self, cfg: &PipelineConfig) -> PathBuf {
        cfg.paths.artifacts.join(self.file_name())
    }
}

impl fmt::Display for BuildTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuildTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BuildTarget::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown build target {s:?}")))
    }
}

/// A written artifact and the SHA-256 of its bytes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuiltArtifact {
    pub target: BuildTarget,
    pub path: PathBuf,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingInput(path.display().to_string()),
        _ => Error::Io(e),
    })
}

/// Tokenized non-blank lines of a sentence-per-line file.
pub fn read_sentences(path: &Path) -> Result<Vec<TokenSeq>> {
    Ok(read(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(tokenize)
        .collect())
}

pub fn read_pairs(path: &Path) -> Result<Vec<(TokenSeq, TokenSeq)>> {
    parse_bitext(&read(path)?, &path.display().to_string())
}

fn load_artifact(cfg: &PipelineConfig, target: BuildTarget) -> Result<(String, String)> {
    let path = target.path(cfg);
    match fs::read_to_string(&path) {
        Ok(text) => Ok((text, path.display().to_string())),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::MissingArtifact {
            path: path.display().to_string(),
            command: format!("lexpara build {target}"),
        }),
        Err(e) => Err(Error::Io(e)),
    }
}

fn render(cfg: &PipelineConfig, target: BuildTarget) -> Result<String> {
    match target {
        BuildTarget::Idf => Ok(IdfTable::build(&read_sentences(&cfg.paths.corpus)?)?.to_tsv()),
        BuildTarget::Bpe => {
            if cfg.bpe.merges == 0 {
                return Ok("#merges:0\n".to_owned());
            }
            let corpus = read_sentences(&cfg.paths.corpus)?;
            Ok(BpeModel::learn(&corpus, cfg.bpe.merges)?.to_text())
        }
        BuildTarget::Scorer => {
            let bpe = load_bpe(cfg)?;
            let mut pairs = read_pairs(&cfg.paths.bitext)?;
            if let Some(m) = &bpe {
                for (_, tgt) in &mut pairs {
                    *tgt = m.apply(tgt);
                }
            }
            Ok(train_stat_scorer(&pairs, &cfg.scorer)?.to_text())
        }
        BuildTarget::Lexicon => {
            let mut lex = Lexicon::builtin();
            if let Some(path) = &cfg.paths.lexicon {
                lex.extend(Lexicon::from_tsv(&read(path)?, &path.display().to_string())?);
            }
            Ok(format!("#lexicon:{}\n{}", lex.len(), lex.to_tsv()))
        }
        BuildTarget::PpdbIndex => {
            let path = cfg
                .paths
                .ppdb
                .as_ref()
                .ok_or_else(|| Error::Config("paths.ppdb is not set".into()))?;
            Ok(PpdbIndex::from_packet(&read(path)?, &path.display().to_string())?.to_tsv())
        }
    }
}

/// Builds one artifact and writes it atomically.
pub fn build(cfg: &PipelineConfig, target: BuildTarget) -> Result<BuiltArtifact> {
    let text = render(cfg, target)?;
    let path = target.path(cfg);
    write_atomic(&path, text.as_bytes())?;
    Ok(BuiltArtifact {
        target,
        sha256: sha256_hex(text.as_bytes()),
        path,
    })
}

/// Builds every artifact the config calls for, in dependency order.
pub fn build_all(cfg: &PipelineConfig) -> Result<Vec<BuiltArtifact>> {
    BuildTarget::ALL
        .into_iter()
        .filter(|t| *t != BuildTarget::PpdbIndex || cfg.paths.ppdb.is_some())
        .map(|t| build(cfg, t))
        .collect()
}

fn load_bpe(cfg: &PipelineConfig) -> Result<Option<BpeModel>> {
    let (text, path) = load_artifact(cfg, BuildTarget::Bpe)?;
    let model = BpeModel::from_text(&text, &path)?;
    Ok((!model.merges().is_empty()).then_some(model))
}

/// Everything `generate` and `score` read from disk.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub idf: IdfTable,
    pub bpe: Option<BpeModel>,
    pub scorer: StatScorer,
    pub lexicon: Lexicon,
    pub ppdb: Option<PpdbIndex>,
}

impl Artifacts {
    /// Loads the built artifacts. The lexicon falls back to the built-in one
    /// and the PPDB index is only required when the config names a PPDB file.
    pub fn load(cfg: &PipelineConfig) -> Result<Self> {
        let (text, path) = load_artifact(cfg, BuildTarget::Idf)?;
        let idf = IdfTable::from_tsv(&text, &path)?;
        let bpe = load_bpe(cfg)?;
        let (text, _) = load_artifact(cfg, BuildTarget::Scorer)?;
        let scorer = StatScorer::from_text(&text)?;
        let lexicon = match load_artifact(cfg, BuildTarget::Lexicon) {
            Ok((text, path)) => Lexicon::from_tsv(&text, &path)?,
            Err(Error::MissingArtifact { .. }) => Lexicon::builtin(),
            Err(e) => return Err(e),
        };
        let ppdb = match cfg.paths.ppdb {
            Some(_) => {
                let (text, path) = load_artifact(cfg, BuildTarget::PpdbIndex)?;
                Some(PpdbIndex::from_tsv(&text, &path)?)
            }
            None => None,
        };
        Ok(Artifacts {
            idf,
            bpe,
            scorer,
            lexicon,
            ppdb,
        })
    }

    /// Surface words the morphology may pick random forms from.
    pub fn known_words(&self) -> HashSet<String> {
        self.idf.iter().map(|(t, _)| t.to_owned()).collect()
    }
}
