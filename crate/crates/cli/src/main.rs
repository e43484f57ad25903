use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lexpara::eval::{easl_aggregate, fluency_rate, parse_annotations, EaslParams, RegressionModel};
use lexpara::pipeline::{
    build, build_all, dedup, eval_diversity, generate_from_config, parse_quality_rows, parse_records,
    parse_system_list, records_to_jsonl, score_records, train_quality, write_atomic, write_toy_fixture, Artifacts,
    BuildTarget, EvalConfig, FixtureSpec, ParaphraseRecord, PipelineConfig,
};
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] lexpara::Error),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.into())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Lexically constrained paraphrase generation.
#[derive(Debug, Parser)]
#[command(name = "lexpara", version)]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for decoding; defaults to one per core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Overrides the configured systems, e.g. `1-5,17,28`.
    #[arg(long, global = true)]
    systems: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build one artifact, or all of them, and print content hashes.
    Build {
        /// idf, bpe, scorer, lexicon, ppdb-index or all.
        #[arg(default_value = "all")]
        target: String,
    },
    /// Realize constraints and decode every reference under every system.
    Generate {
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge records with the same sentence and normalized output.
    Dedup(InOut),
    /// Modified BLEU per system and reference length.
    EvalDiversity {
        #[arg(long)]
        input: PathBuf,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Attach predicted quality to records.
    Score {
        #[command(flatten)]
        io: InOut,
        #[arg(long)]
        model: PathBuf,
    },
    /// Fit the quality regression on scored examples.
    TrainQuality {
        /// TSV of source, reference, paraphrase and a 0..100 score.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        l2: f64,
    },
    /// Aggregate scalar human judgments per item and system.
    AggregateEasl {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 25)]
        min_judgments: usize,
        #[arg(long, default_value_t = 0.10)]
        fail_rate: f64,
        #[arg(long, default_value_t = 3)]
        min_per_item: usize,
        #[arg(long)]
        json: bool,
    },
    /// Share of items per system with no fluency flag.
    FluencyReport {
        #[arg(long)]
        input: PathBuf,
    },
    /// Write the synthetic toy corpus and a config that points at it.
    ToyFixture {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        references: Option<usize>,
        #[arg(long)]
        bitext: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct InOut {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(CliError::Usage(e.to_string())),
        },
        None => run(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 1,
                CliError::Data(_) => 2,
            })
        }
    }
}

fn config(cli: &Cli) -> CliResult<PipelineConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("this command needs --config".into()))?;
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(systems) = &cli.systems {
        parse_system_list(systems).map_err(|e| CliError::Usage(e.to_string()))?;
        cfg.systems = systems.clone();
    }
    Ok(cfg)
}

fn read(path: &Path) -> CliResult<String> {
    if !path.exists() {
        return Err(lexpara::Error::MissingInput(path.display().to_string()).into());
    }
    Ok(fs::read_to_string(path)?)
}

fn read_records(path: &Path) -> CliResult<Vec<ParaphraseRecord>> {
    Ok(parse_records(&read(path)?, &path.display().to_string())?)
}

fn run(cli: &Cli) -> CliResult {
    let mut stdout = io::stdout().lock();
    match &cli.command {
        Command::Build { target } => {
            let cfg = config(cli)?;
            cfg.validate()?;
            let built = if target == "all" {
                build_all(&cfg)?
            } else {
                let t: BuildTarget = target.parse().map_err(|e: lexpara::Error| CliError::Usage(e.to_string()))?;
                vec![build(&cfg, t)?]
            };
            for a in built {
                writeln!(stdout, "{}\t{}\t{}", a.target, a.sha256, a.path.display())?;
            }
        }
        Command::Generate { out } => {
            let cfg = config(cli)?;
            let (records, summary) = generate_from_config(&cfg, &mut |done, total| {
                eprint!("\rgenerate: {done}/{total} references");
                if done == total {
                    eprintln!();
                }
            })?;
            write_atomic(out, records_to_jsonl(&records).as_bytes())?;
            eprintln!("{}", serde_json::to_string(&summary).map_err(lexpara::Error::from)?);
        }
        Command::Dedup(InOut { input, out }) => {
            let records = read_records(input)?;
            let before = records.len();
            let merged = dedup(records);
            write_atomic(out, records_to_jsonl(&merged).as_bytes())?;
            eprintln!("dedup: {before} -> {} records", merged.len());
        }
        Command::EvalDiversity { input, json } => {
            let eval = match &cli.config {
                Some(_) => config(cli)?.eval,
                None => EvalConfig::default(),
            };
            let report = eval_diversity(&read_records(input)?, &eval.buckets, eval.tolerance)?;
            if *json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&report).map_err(lexpara::Error::from)?)?;
            } else {
                write!(stdout, "{}", report.to_table())?;
            }
        }
        Command::Score { io: InOut { input, out }, model } => {
            let cfg = config(cli)?;
            let model = RegressionModel::from_json(&read(model)?)?;
            let artifacts = Artifacts::load(&cfg)?;
            let mut records = read_records(input)?;
            score_records(&mut records, &model, &artifacts, cfg.eval.max_score_tokens);
            let skipped = records.iter().filter(|r| r.predicted_quality.is_none()).count();
            write_atomic(out, records_to_jsonl(&records).as_bytes())?;
            eprintln!("score: {} records, {skipped} over the length limit", records.len());
        }
        Command::TrainQuality { data, out, l2 } => {
            let cfg = config(cli)?;
            let artifacts = Artifacts::load(&cfg)?;
            let rows = parse_quality_rows(&read(data)?, &data.display().to_string())?;
            let model = train_quality(&rows, &artifacts, *l2)?;
            write_atomic(out, model.to_json().as_bytes())?;
            eprintln!("train-quality: fitted on {} rows", rows.len());
        }
        Command::AggregateEasl {
            input,
            min_judgments,
            fail_rate,
            min_per_item,
            json,
        } => {
            let records = parse_annotations(&read(input)?, &input.display().to_string())?;
            let params = EaslParams {
                min_judgments: *min_judgments,
                fail_rate: *fail_rate,
                min_per_item: *min_per_item,
            };
            let report = easl_aggregate(&records, &params);
            if *json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&report).map_err(lexpara::Error::from)?)?;
            } else {
                writeln!(stdout, "system\tmean\titems")?;
                for (system, mean) in &report.system_means {
                    let items = report
                        .items
                        .iter()
                        .filter(|i| i.system_id == *system && !i.under_annotated)
                        .count();
                    writeln!(stdout, "{system}\t{mean:.2}\t{items}")?;
                }
                let list = |s: &std::collections::BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(",");
                writeln!(stdout, "# disqualified: {}", list(&report.disqualified))?;
                writeln!(stdout, "# low volume: {}", list(&report.low_volume))?;
            }
        }
        Command::FluencyReport { input } => {
            let records = parse_annotations(&read(input)?, &input.display().to_string())?;
            writeln!(stdout, "system\tfluent%")?;
            for (system, rate) in fluency_rate(&records) {
                writeln!(stdout, "{system}\t{rate:.2}")?;
            }
        }
        Command::ToyFixture { dir, references, bitext } => {
            let mut spec = FixtureSpec::default();
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            if let Some(n) = references {
                spec.references = *n;
            }
            if let Some(n) = bitext {
                spec.bitext_pairs = *n;
            }
            let path = write_toy_fixture(dir, &spec)?;
            writeln!(stdout, "{}", path.display())?;
        }
    }
    Ok(())
}
