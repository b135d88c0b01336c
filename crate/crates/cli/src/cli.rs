//! Command-line surface. Flags win over `run.toml`, which wins over
//! built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lexisupport_core::selection::{Grid, InputEncoding};
use lexisupport_core::survey::ImputePolicy;
use lexisupport_core::synth::PlantSpec;
use lexisupport_core::FeatureCatalog;
use serde::de::DeserializeOwned;

use crate::commands::{self, RecordKind};
use crate::config::{default_grid_toml, load_grid, RunConfig};
use crate::error::{CliError, Result};
use crate::fsio::{read_text, write_atomic};
use crate::sessions::SessionFilter;
use crate::survey_file::{write_catalog, BadRowPolicy};

#[derive(Debug, Parser)]
#[command(name = "lexisupport", version, about = "Predict which support tools and strategies help a student read")]
pub struct Cli {
    /// Run configuration (TOML); command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a survey file and store it as a dataset archive.
    Ingest(IngestArgs),
    /// Generate a survey with planted rules.
    Synth(SynthArgs),
    /// Grid search every target and write the report and model registry.
    Evaluate(EvaluateArgs),
    /// Render tables, chart data and the summary from a saved report.
    Report(ReportArgs),
    /// Predict useful tools and strategies from difficulty answers.
    Predict(PredictArgs),
    /// Score a ten-answer self-esteem questionnaire.
    RosenbergScore {
        /// Answers: ten agreement levels, comma or line separated, or a JSON array.
        answers: PathBuf,
    },
    /// Session store for reading and questionnaire sessions.
    #[command(subcommand)]
    Sessions(SessionsCommand),
    /// Write the standard feature catalog as `id,label`.
    Catalog {
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Print the default grid as a grid file.
    DefaultGrid,
    /// Repeat the run recorded in a run manifest.
    Rerun { manifest: PathBuf },
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, value_name = "FILE")]
    pub survey: PathBuf,
    /// `id,label` file replacing the standard catalog labels.
    #[arg(long, value_name = "FILE")]
    pub catalog: Option<PathBuf>,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Targets missing in more than this fraction of records are dropped.
    #[arg(long)]
    pub max_missing_rate: Option<f64>,
    #[arg(long, value_enum, default_value_t = BadRowPolicy::Fail)]
    pub on_bad_row: BadRowPolicy,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Plant specification (TOML); flags override its fields.
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub students: Option<usize>,
    /// Fraction of observed labels flipped per target.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Dataset archive, or a survey `.csv` file.
    #[arg(long, value_name = "FILE")]
    pub dataset: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub grid: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Keep only grid candidates with this binarization threshold.
    #[arg(long, value_parser = parse_threshold)]
    pub threshold: Option<u8>,
    /// Keep only grid candidates with this input encoding.
    #[arg(long, value_parser = parse_serde_name::<InputEncoding>)]
    pub inputs: Option<InputEncoding>,
    /// Missing difficulty answers: drop-row or median.
    #[arg(long, value_parser = parse_serde_name::<ImputePolicy>)]
    pub impute: Option<ImputePolicy>,
    #[arg(long)]
    pub max_missing_rate: Option<f64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, value_name = "FILE")]
    pub report: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, value_name = "FILE")]
    pub registry: PathBuf,
    /// Twelve comma-separated answers, P1 to P12.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub difficulties: Option<String>,
    /// Delimited file with columns P1..P12 and optionally student_id.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Write predictions.csv here instead of standard output.
    #[arg(long, value_name = "DIR", requires = "input")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SessionsCommand {
    /// Create the store's table files.
    Init {
        #[arg(long, value_name = "DIR")]
        store: PathBuf,
    },
    /// Check JSON-lines records without storing them.
    Validate {
        #[arg(long, value_enum)]
        kind: RecordKind,
        file: PathBuf,
    },
    /// Validate JSON-lines records, then append them to the store.
    Import {
        #[arg(long, value_name = "DIR")]
        store: PathBuf,
        #[arg(long, value_enum)]
        kind: RecordKind,
        file: PathBuf,
    },
    /// Print stored records as JSON lines.
    List {
        #[arg(long, value_name = "DIR")]
        store: PathBuf,
        #[arg(long, value_enum)]
        kind: RecordKind,
        #[arg(long)]
        user: Option<u32>,
        #[arg(long)]
        environment: Option<u8>,
        /// Earliest start time, Unix seconds.
        #[arg(long)]
        from: Option<i64>,
        /// Latest start time, Unix seconds.
        #[arg(long)]
        to: Option<i64>,
    },
}

fn parse_threshold(s: &str) -> std::result::Result<u8, String> {
    match s.parse::<u8>() {
        Ok(t) if (1..=4).contains(&t) => Ok(t),
        _ => Err(format!("{s:?} is not a threshold in 1-4")),
    }
}

/// Parses a unit enum from its serialized name.
fn parse_serde_name<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|e| e.to_string())
}

fn required_out(flag: Option<PathBuf>, config: &RunConfig) -> Result<PathBuf> {
    flag.or_else(|| config.out.clone())
        .ok_or_else(|| CliError::usage("no output directory: pass --out or set out in the run configuration"))
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn run(cli: Cli) -> Result<String> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let config_file = cli.config.as_deref();
    match cli.command {
        Command::Ingest(a) => {
            let params = commands::IngestParams {
                survey: a.survey,
                catalog: a.catalog,
                delimiter: a.delimiter,
                max_missing_rate: a
                    .max_missing_rate
                    .or(config.max_missing_rate)
                    .unwrap_or_else(commands::default_max_missing_rate),
                on_bad_row: a.on_bad_row,
                out: required_out(a.out, &config)?,
            };
            commands::ingest(&params, config_file)
        }
        Command::Synth(a) => {
            let mut spec = match &a.spec {
                Some(p) => commands::parse_plant_spec(&read_text(p, "plant spec")?).map_err(|e| e.context(p.display()))?,
                None => {
                    let seed = a
                        .seed
                        .or(config.seed)
                        .ok_or_else(|| CliError::usage("synth needs --seed or a --spec file"))?;
                    PlantSpec {
                        seed,
                        ..PlantSpec::default()
                    }
                }
            };
            if let Some(s) = a.seed {
                spec.seed = s;
            }
            if let Some(n) = a.students {
                spec.n_students = n;
            }
            if let Some(r) = a.noise {
                spec.label_noise = r;
            }
            let params = commands::SynthParams {
                spec,
                out: required_out(a.out, &config)?,
            };
            commands::synth(&params, config_file)
        }
        Command::Evaluate(a) => {
            let grid_file = a.grid.or(config.grid.clone());
            let grid = match &grid_file {
                Some(p) => load_grid(p)?,
                None => Grid::default(),
            };
            let seed = a
                .seed
                .or(config.seed)
                .ok_or_else(|| CliError::usage("evaluate needs --seed or seed in the run configuration"))?;
            let params = commands::EvaluateParams {
                dataset: a.dataset,
                grid_file,
                grid,
                threshold: a.threshold.or(config.threshold),
                inputs: a.inputs.or(config.inputs),
                seed,
                jobs: a.jobs.or(config.jobs).unwrap_or_else(default_jobs),
                impute: a.impute.or(config.impute).unwrap_or_default(),
                max_missing_rate: a
                    .max_missing_rate
                    .or(config.max_missing_rate)
                    .unwrap_or_else(commands::default_max_missing_rate),
                out: required_out(a.out, &config)?,
            };
            commands::evaluate(&params, config_file)
        }
        Command::Report(a) => {
            let params = commands::ReportParams {
                report: a.report,
                out: required_out(a.out, &config)?,
            };
            commands::report(&params, config_file)
        }
        Command::Predict(a) => {
            let params = commands::PredictParams {
                registry: a.registry,
                difficulties: a.difficulties.as_deref().map(commands::parse_difficulties).transpose()?,
                input: a.input,
                out: a.out,
            };
            commands::predict(&params, config_file)
        }
        Command::RosenbergScore { answers } => commands::rosenberg_score(&answers),
        Command::Sessions(s) => match s {
            SessionsCommand::Init { store } => commands::sessions_init(&store),
            SessionsCommand::Validate { kind, file } => commands::sessions_validate(kind, &file),
            SessionsCommand::Import { store, kind, file } => commands::sessions_import(kind, &file, &store),
            SessionsCommand::List {
                store,
                kind,
                user,
                environment,
                from,
                to,
            } => commands::sessions_list(
                kind,
                &store,
                &SessionFilter {
                    user,
                    environment,
                    from,
                    to,
                },
            ),
        },
        Command::Catalog { out } => {
            let mut bytes = Vec::new();
            write_catalog(&mut bytes, &FeatureCatalog::standard()).map_err(|e| CliError::internal(e.to_string()))?;
            match out {
                Some(p) => {
                    write_atomic(&p, &bytes)?;
                    Ok(String::new())
                }
                None => String::from_utf8(bytes).map_err(|e| CliError::internal(e.to_string())),
            }
        }
        Command::DefaultGrid => Ok(default_grid_toml()),
        Command::Rerun { manifest } => commands::rerun(Path::new(&manifest)),
    }
}
