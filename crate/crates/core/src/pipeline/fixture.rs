use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::write_atomic;
use crate::error::Result;
use crate::eval::annotations_to_tsv;
use crate::toy::{synthetic_annotations, AnnotationPlan, ToyWorld};

/// Sizes of a written toy fixture.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixtureSpec {
    pub seed: u64,
    pub bitext_pairs: usize,
    pub references: usize,
    pub quality_examples: usize,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            seed: 17,
            bitext_pairs: 3000,
            references: 300,
            quality_examples: 600,
        }
    }
}

/// Thresholds suited to the toy corpus, whose largest idf is about ln(3300).
const TOY_CONFIG_TAIL: &str = r#"
[idf]
min_idf = 1.5
max_idf = 9.0

[bpe]
merges = 10000

[scorer]
order = 3
lambda = 0.5
coverage = true

[decoder]
beam_size = 10
num_outputs = 1

[constraints]
positional = "per-position"

[eval]
buckets = [5, 10, 20, 40]
tolerance = 0
"#;

/// Writes the toy corpus, bitext, references, PPDB packet, lexicon, scored
/// quality pairs, synthetic annotations and a `config.toml` into `dir`.
/// Returns the config path.
pub fn write_toy_fixture(dir: &Path, spec: &FixtureSpec) -> Result<PathBuf> {
    let world = ToyWorld::new();
    let f = world.fixture(spec.seed, spec.bitext_pairs, spec.references);
    let lines = |it: &mut dyn Iterator<Item = String>| it.fold(String::new(), |mut s, l| {
        s.push_str(&l);
        s.push('\n');
        s
    });
    write_atomic(&dir.join("corpus.txt"), lines(&mut f.corpus().map(str::to_owned)).as_bytes())?;
    let pairs = |ps: &[crate::toy::ToyPair]| lines(&mut ps.iter().map(|p| format!("{}\t{}", p.source, p.target)));
    write_atomic(&dir.join("bitext.tsv"), pairs(&f.bitext).as_bytes())?;
    write_atomic(&dir.join("references.tsv"), pairs(&f.references).as_bytes())?;
    write_atomic(&dir.join("ppdb.txt"), f.ppdb.as_bytes())?;
    write_atomic(&dir.join("lexicon.tsv"), f.lexicon.as_bytes())?;
    let quality = world.quality_examples(spec.seed, spec.quality_examples);
    let quality = lines(
        &mut quality
            .iter()
            .map(|q| format!("{}\t{}\t{}\t{:.1}", q.source, q.reference, q.paraphrase, q.score)),
    );
    write_atomic(&dir.join("quality.tsv"), quality.as_bytes())?;
    let ann = synthetic_annotations(spec.seed, &AnnotationPlan::default());
    write_atomic(&dir.join("annotations.tsv"), annotations_to_tsv(&ann.records).as_bytes())?;
    let mut config = String::new();
    let _ = write!(
        config,
        "seed = {}\nsystems = \"1-37\"\n\n[paths]\ncorpus = \"corpus.txt\"\nbitext = \"bitext.tsv\"\n\
         references = \"references.tsv\"\nppdb = \"ppdb.txt\"\nlexicon = \"lexicon.tsv\"\nartifacts = \"artifacts\"\n{TOY_CONFIG_TAIL}",
        spec.seed
    );
    let path = dir.join("config.toml");
    write_atomic(&path, config.as_bytes())?;
    Ok(path)
}
