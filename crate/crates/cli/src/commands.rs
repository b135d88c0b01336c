//! Command implementations. Each command takes fully resolved parameters,
//! so a run can be repeated from its manifest, and returns the text to
//! print on standard output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};

use lexisupport_core::psychometrics::{
    score_answers, validate, Agreement, RosenbergSession, SilentReadingSession, UserRecord, Violation,
};
use lexisupport_core::report::{render_chart_data, render_summary, render_tables};
use lexisupport_core::selection::{Grid, InputEncoding, PreparedViews};
use lexisupport_core::survey::{ImputePolicy, DEFAULT_MAX_MISSING_RATE};
use lexisupport_core::synth::{generate, PlantSpec};
use lexisupport_core::{Dataset, EvaluationReport, FeatureCatalog, FeatureId};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::archive::DatasetArchive;
use crate::error::{CliError, Result};
use crate::fsio::{read_json, read_text, remove_stale, to_json, write_atomic, write_json};
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::registry::ModelRegistry;
use crate::sessions::{SessionFilter, SessionStore, StoreError};
use crate::survey_file::{read_catalog, read_survey, write_survey, BadRowPolicy, SurveyFileError};

pub const DATASET_FILE: &str = "dataset.json";
pub const SURVEY_FILE: &str = "survey.csv";
pub const PLANT_MANIFEST_FILE: &str = "plant_manifest.json";
pub const REPORT_FILE: &str = "report.json";
pub const REGISTRY_FILE: &str = "registry.json";
pub const TOOLS_TABLE: &str = "tools_table.txt";
pub const STRATEGIES_TABLE: &str = "strategies_table.txt";
pub const TOOLS_CHART: &str = "tools_chart.csv";
pub const STRATEGIES_CHART: &str = "strategies_chart.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const PREDICTIONS_FILE: &str = "predictions.csv";

fn survey_error(e: SurveyFileError) -> CliError {
    match e {
        SurveyFileError::Csv(e) if e.is_io_error() => CliError::internal(e.to_string()),
        e => CliError::data(e.to_string()),
    }
}

fn store_error(e: StoreError) -> CliError {
    if e.is_data_error() {
        CliError::data(e.to_string())
    } else {
        CliError::internal(e.to_string())
    }
}

fn open_input(path: &Path, what: &str) -> Result<File> {
    File::open(path).map_err(|e| CliError::usage(format!("cannot read {what} {}: {e}", path.display())))
}

fn write_manifest<P: Serialize>(
    command: &str,
    config_file: Option<&Path>,
    seed: Option<u64>,
    params: &P,
    out: &Path,
    outputs: &[&str],
) -> Result<()> {
    let mut listed: Vec<String> = outputs.iter().map(|s| s.to_string()).collect();
    listed.push(MANIFEST_FILE.into());
    RunManifest::new(command, config_file, seed, params, listed)?.write_to(out)
}

// ---------------------------------------------------------------- ingest

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestParams {
    pub survey: PathBuf,
    pub catalog: Option<PathBuf>,
    pub delimiter: char,
    pub max_missing_rate: f64,
    pub on_bad_row: BadRowPolicy,
    pub out: PathBuf,
}

/// Reads a survey file into a validated dataset with sparse targets dropped.
pub fn load_survey(
    survey: &Path,
    catalog: Option<&Path>,
    delimiter: char,
    max_missing_rate: f64,
    on_bad_row: BadRowPolicy,
) -> Result<DatasetArchive> {
    let delimiter = u8::try_from(delimiter)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| CliError::usage(format!("delimiter {delimiter:?} must be a single ASCII character")))?;
    let catalog = match catalog {
        Some(p) => read_catalog(open_input(p, "catalog file")?).map_err(|e| survey_error(e).context(p.display()))?,
        None => FeatureCatalog::standard(),
    };
    let load = read_survey(open_input(survey, "survey file")?, delimiter, on_bad_row)
        .map_err(|e| survey_error(e).context(survey.display()))?;
    let dataset = Dataset::new(catalog, load.records)?.drop_sparse_targets(max_missing_rate)?;
    let mut archive = DatasetArchive::new(survey.display().to_string(), max_missing_rate, dataset);
    archive.unknown_columns = load.unknown_columns;
    archive.rejected_rows = load.rejected;
    Ok(archive)
}

fn describe_dataset(archive: &DatasetArchive) -> String {
    let d = &archive.dataset;
    let mut s = format!("{} records, {} active targets", d.len(), d.active_targets().len());
    for (id, rate) in d.dropped_targets() {
        let _ = write!(s, "\ndropped {id}: {:.1}% missing", rate * 100.0);
    }
    if !archive.unknown_columns.is_empty() {
        let _ = write!(s, "\nignored unknown columns: {}", archive.unknown_columns.join(", "));
    }
    for r in &archive.rejected_rows {
        let _ = write!(s, "\nrejected {r}");
    }
    s.push('\n');
    s
}

pub fn ingest(p: &IngestParams, config_file: Option<&Path>) -> Result<String> {
    let archive = load_survey(&p.survey, p.catalog.as_deref(), p.delimiter, p.max_missing_rate, p.on_bad_row)?;
    archive.save(&p.out.join(DATASET_FILE))?;
    write_manifest("ingest", config_file, None, p, &p.out, &[DATASET_FILE])?;
    Ok(describe_dataset(&archive))
}

// ---------------------------------------------------------------- synth

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub spec: PlantSpec,
    pub out: PathBuf,
}

pub fn parse_plant_spec(text: &str) -> Result<PlantSpec> {
    toml::from_str(text).map_err(|e| CliError::usage(format!("plant spec: {e}")))
}

pub fn synth(p: &SynthParams, config_file: Option<&Path>) -> Result<String> {
    let (dataset, manifest) = generate(&p.spec)?;
    let mut csv = Vec::new();
    write_survey(&mut csv, dataset.records()).map_err(survey_error)?;
    write_atomic(&p.out.join(SURVEY_FILE), &csv)?;
    write_json(&p.out.join(PLANT_MANIFEST_FILE), &manifest)?;
    write_manifest(
        "synth",
        config_file,
        Some(p.spec.seed),
        p,
        &p.out,
        &[SURVEY_FILE, PLANT_MANIFEST_FILE],
    )?;
    Ok(format!(
        "{} students, {} planted targets, label noise {}\n",
        dataset.len(),
        manifest.rules.len(),
        p.spec.label_noise
    ))
}

// ---------------------------------------------------------------- evaluate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateParams {
    /// A dataset archive, or a survey file (`.csv`) ingested on the fly.
    pub dataset: PathBuf,
    pub grid_file: Option<PathBuf>,
    pub grid: Grid,
    pub threshold: Option<u8>,
    pub inputs: Option<InputEncoding>,
    pub seed: u64,
    pub jobs: usize,
    pub impute: ImputePolicy,
    pub max_missing_rate: f64,
    pub out: PathBuf,
}

pub fn load_dataset(path: &Path, max_missing_rate: f64) -> Result<Dataset> {
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        Ok(load_survey(path, None, ',', max_missing_rate, BadRowPolicy::Fail)?.dataset)
    } else {
        Ok(DatasetArchive::load(path)?.dataset)
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::internal(format!("worker pool: {e}")))
}

/// Grid search over every active target on a bounded worker pool. The
/// report is identical for any number of workers.
pub fn evaluate_dataset(
    dataset: &Dataset,
    grid: &Grid,
    seed: u64,
    impute: ImputePolicy,
    jobs: usize,
) -> Result<EvaluationReport> {
    let views = PreparedViews::new(dataset, grid, impute)?;
    let targets = dataset.active_targets();
    let outcomes = pool(jobs)?.install(|| {
        targets
            .par_iter()
            .map(|&t| (t, views.search(t, grid, seed)))
            .collect::<Vec<_>>()
    });
    Ok(EvaluationReport::assemble(dataset, grid, seed, impute, outcomes))
}

/// Writes tables, chart data and the summary; returns the file names.
pub fn write_renderings(report: &EvaluationReport, out: &Path) -> Result<Vec<&'static str>> {
    let tables = render_tables(report);
    let charts = render_chart_data(report);
    let mut written = Vec::new();
    for (name, content) in [
        (TOOLS_TABLE, tables.tools),
        (STRATEGIES_TABLE, tables.strategies),
        (TOOLS_CHART, charts.tools),
        (STRATEGIES_CHART, charts.strategies),
    ] {
        let path = out.join(name);
        match content {
            Some(text) => {
                write_atomic(&path, text.as_bytes())?;
                written.push(name);
            }
            None => remove_stale(&path)?,
        }
    }
    write_atomic(&out.join(SUMMARY_FILE), render_summary(report).as_bytes())?;
    written.push(SUMMARY_FILE);
    Ok(written)
}

pub fn evaluate(p: &EvaluateParams, config_file: Option<&Path>) -> Result<String> {
    let dataset = load_dataset(&p.dataset, p.max_missing_rate)?;
    let grid = p.grid.restrict(p.threshold, p.inputs);
    if grid.candidates.is_empty() {
        return Err(CliError::usage("no grid candidate matches --threshold/--inputs"));
    }
    let report = evaluate_dataset(&dataset, &grid, p.seed, p.impute, p.jobs)?;
    let registry = pool(p.jobs)?.install(|| ModelRegistry::build(&dataset, &report, p.impute))?;
    write_json(&p.out.join(REPORT_FILE), &report)?;
    registry.save(&p.out.join(REGISTRY_FILE))?;
    let mut outputs = vec![REPORT_FILE, REGISTRY_FILE];
    outputs.extend(write_renderings(&report, &p.out)?);
    write_manifest("evaluate", config_file, Some(p.seed), p, &p.out, &outputs)?;
    Ok(render_summary(&report))
}

// ---------------------------------------------------------------- report

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub report: PathBuf,
    pub out: PathBuf,
}

pub fn report(p: &ReportParams, config_file: Option<&Path>) -> Result<String> {
    let report: EvaluationReport = read_json(&p.report, "report")?;
    if report.targets.is_empty() {
        return Err(CliError::data("the report has no targets"));
    }
    let outputs = write_renderings(&report, &p.out)?;
    write_manifest("report", config_file, Some(report.metadata.seed), p, &p.out, &outputs)?;
    Ok(render_summary(&report))
}

// ---------------------------------------------------------------- predict

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictParams {
    pub registry: PathBuf,
    /// One student's 12 answers, P1 to P12.
    pub difficulties: Option<Vec<u8>>,
    /// A delimited file with `P1`..`P12` columns and optionally `student_id`.
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

pub fn parse_difficulties(text: &str) -> Result<Vec<u8>> {
    let values = text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<u8>()
                .ok()
                .filter(|&v| v <= 5)
                .ok_or_else(|| CliError::usage(format!("difficulty value {v:?} is not an integer in 0-5")))
        })
        .collect::<Result<Vec<u8>>>()?;
    if values.len() != 12 {
        return Err(CliError::usage(format!("expected 12 difficulty values, got {}", values.len())));
    }
    Ok(values)
}

fn read_difficulty_rows(path: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open_input(path, "input file")?);
    let bad = |e: csv::Error| CliError::data(format!("{}: {e}", path.display()));
    let header = rdr.headers().map_err(bad)?.clone();
    let find = |name: &str| header.iter().position(|h| h == name);
    let cols = FeatureId::difficulties()
        .map(|id| find(&id.to_string()).ok_or_else(|| CliError::data(format!("{}: no column {id}", path.display()))))
        .collect::<Result<Vec<usize>>>()?;
    let id_col = find("student_id");
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(bad)?;
        let values = cols
            .iter()
            .zip(FeatureId::difficulties())
            .map(|(&c, id)| {
                let cell = rec.get(c).unwrap_or("");
                cell.parse::<u8>().ok().filter(|&v| v <= 5).ok_or_else(|| {
                    CliError::data(format!("{} row {}, column {id}: {cell:?} is not in 0-5", path.display(), i + 1))
                })
            })
            .collect::<Result<Vec<u8>>>()?;
        let sid = id_col
            .and_then(|c| rec.get(c))
            .filter(|s| !s.is_empty())
            .map_or_else(|| format!("row{}", i + 1), str::to_string);
        rows.push((sid, values));
    }
    Ok(rows)
}

pub fn predict(p: &PredictParams, config_file: Option<&Path>) -> Result<String> {
    let registry = ModelRegistry::load(&p.registry)?;
    match (&p.difficulties, &p.input) {
        (Some(d), None) => {
            let mut s = String::new();
            for (target, label) in registry.predict(d)? {
                let _ = writeln!(s, "{target} {}", if label == 1 { "useful" } else { "not useful" });
            }
            Ok(s)
        }
        (None, Some(input)) => {
            let rows = read_difficulty_rows(input)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["student_id".to_string()];
            header.extend(registry.models.iter().map(|m| m.target.to_string()));
            let csv_err = |e: csv::Error| CliError::internal(e.to_string());
            w.write_record(&header).map_err(csv_err)?;
            for (sid, d) in &rows {
                let mut rec = vec![sid.clone()];
                rec.extend(registry.predict(d)?.iter().map(|(_, l)| l.to_string()));
                w.write_record(&rec).map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::internal(e.to_string()))?;
            match &p.out {
                Some(out) => {
                    write_atomic(&out.join(PREDICTIONS_FILE), &bytes)?;
                    write_manifest("predict", config_file, Some(registry.seed), p, out, &[PREDICTIONS_FILE])?;
                    Ok(format!("{} students, {} targets\n", rows.len(), registry.models.len()))
                }
                None => String::from_utf8(bytes).map_err(|e| CliError::internal(e.to_string())),
            }
        }
        _ => Err(CliError::usage("give exactly one of --difficulties or --input")),
    }
}

// ---------------------------------------------------------------- rosenberg

/// Ten agreement levels separated by commas or newlines, or a JSON array.
pub fn parse_answers(text: &str) -> Result<Vec<Agreement>> {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).map_err(|e| CliError::data(format!("answers: {e}")));
    }
    trimmed
        .split(|c| c == ',' || c == '\n')
        .map(str::trim)
        .filter(|s| !s.is_empty() && !s.starts_with('#'))
        .map(|s| s.parse::<Agreement>().map_err(|e| CliError::data(e.to_string())))
        .collect()
}

pub fn rosenberg_score(answers: &Path) -> Result<String> {
    let answers = parse_answers(&read_text(answers, "answers file")?)?;
    Ok(format!("{}\n", score_answers(&answers)?))
}

// ---------------------------------------------------------------- sessions

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RecordKind {
    User,
    Reading,
    Rosenberg,
}

fn parse_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    read_text(path, "records file")?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map(|r| (i + 1, r))
                .map_err(|e| CliError::data(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

enum Records {
    Users(Vec<(usize, UserRecord)>),
    Reading(Vec<(usize, SilentReadingSession)>),
    Rosenberg(Vec<(usize, RosenbergSession)>),
}

impl Records {
    fn load(kind: RecordKind, path: &Path) -> Result<Records> {
        Ok(match kind {
            RecordKind::User => Records::Users(parse_lines(path)?),
            RecordKind::Reading => Records::Reading(parse_lines(path)?),
            RecordKind::Rosenberg => Records::Rosenberg(parse_lines(path)?),
        })
    }

    fn violations(&self) -> Vec<(usize, Violation)> {
        fn each<T: lexisupport_core::psychometrics::Validate>(v: &[(usize, T)]) -> Vec<(usize, Violation)> {
            v.iter()
                .flat_map(|(line, r)| validate(r).into_iter().map(move |x| (*line, x)))
                .collect()
        }
        match self {
            Records::Users(v) => each(v),
            Records::Reading(v) => each(v),
            Records::Rosenberg(v) => each(v),
        }
    }

    fn len(&self) -> usize {
        match self {
            Records::Users(v) => v.len(),
            Records::Reading(v) => v.len(),
            Records::Rosenberg(v) => v.len(),
        }
    }
}

fn violation_report(path: &Path, v: &[(usize, Violation)]) -> String {
    v.iter()
        .map(|(line, x)| format!("{} line {line}: {x}", path.display()))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Checks every record; violations are a data error listing each one.
pub fn sessions_validate(kind: RecordKind, file: &Path) -> Result<String> {
    let records = Records::load(kind, file)?;
    let v = records.violations();
    if v.is_empty() {
        Ok(format!("{} records pass\n", records.len()))
    } else {
        Err(CliError::data(violation_report(file, &v)))
    }
}

/// Validates the whole file first, then appends record by record.
pub fn sessions_import(kind: RecordKind, file: &Path, dir: &Path) -> Result<String> {
    let records = Records::load(kind, file)?;
    let v = records.violations();
    if !v.is_empty() {
        return Err(CliError::data(violation_report(file, &v)));
    }
    let store = SessionStore::open(dir).map_err(store_error)?;
    let at = |line: usize| move |e: StoreError| store_error(e).context(format!("{} line {line}", file.display()));
    match &records {
        Records::Users(v) => {
            for (line, r) in v {
                store.add_user(r).map_err(at(*line))?;
            }
        }
        Records::Reading(v) => {
            for (line, r) in v {
                store.store_reading(r).map_err(at(*line))?;
            }
        }
        Records::Rosenberg(v) => {
            for (line, r) in v {
                store.store_rosenberg(r).map_err(at(*line))?;
            }
        }
    }
    Ok(format!("imported {} records\n", records.len()))
}

pub fn sessions_init(dir: &Path) -> Result<String> {
    SessionStore::init(dir).map_err(store_error)?;
    Ok(format!("initialized {}\n", dir.display()))
}

/// One JSON record per line.
pub fn sessions_list(kind: RecordKind, dir: &Path, filter: &SessionFilter) -> Result<String> {
    let store = SessionStore::open(dir).map_err(store_error)?;
    let lines: Vec<String> = match kind {
        RecordKind::User => store
            .users()
            .map_err(store_error)?
            .iter()
            .filter(|u| filter.user.map_or(true, |id| id == u.id))
            .map(|r| serde_json::to_string(r))
            .collect::<std::result::Result<_, _>>(),
        RecordKind::Reading => store
            .list_reading(filter)
            .map_err(store_error)?
            .iter()
            .map(serde_json::to_string)
            .collect(),
        RecordKind::Rosenberg => store
            .list_rosenberg(filter)
            .map_err(store_error)?
            .iter()
            .map(serde_json::to_string)
            .collect(),
    }
    .map_err(|e| CliError::internal(e.to_string()))?;
    Ok(lines.iter().map(|l| format!("{l}\n")).collect())
}

// ---------------------------------------------------------------- rerun

/// Repeats the run recorded in a manifest with the same parameters.
pub fn rerun(manifest: &Path) -> Result<String> {
    let m = RunManifest::load(manifest)?;
    fn params<T: DeserializeOwned>(m: &RunManifest) -> Result<T> {
        serde_json::from_value(m.parameters.clone())
            .map_err(|e| CliError::usage(format!("manifest parameters for {}: {e}", m.command)))
    }
    let config = m.config_file.as_ref().map(PathBuf::from);
    let config = config.as_deref();
    match m.command.as_str() {
        "ingest" => ingest(&params(&m)?, config),
        "synth" => synth(&params(&m)?, config),
        "evaluate" => evaluate(&params(&m)?, config),
        "report" => report(&params(&m)?, config),
        "predict" => predict(&params(&m)?, config),
        other => Err(CliError::usage(format!("manifest command {other:?} cannot be rerun"))),
    }
}

/// Default sparse-target cut for commands that ingest.
pub fn default_max_missing_rate() -> f64 {
    DEFAULT_MAX_MISSING_RATE
}

/// Per-target CCR of a report keyed by target, for comparisons.
pub fn ccr_by_target(report: &EvaluationReport) -> BTreeMap<FeatureId, f64> {
    report.results().map(|r| (r.target, r.mean_ccr)).collect()
}

pub fn report_json(report: &EvaluationReport) -> Result<String> {
    to_json(report)
}
