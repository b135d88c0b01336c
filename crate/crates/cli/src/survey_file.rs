//! Survey and catalog files.
//!
//! A survey file is delimited text with a header row of catalog
//! identifiers (`P1`..`P12`, `T1`..`T17`, `S1`..`S22`) in any order, an
//! optional `student_id` column, and one row per student. An empty cell is
//! a missing answer. Columns that are not catalog identifiers are reported
//! and ignored.
//!
//! A catalog file is `id,label` with one row per identifier.

use std::io::{Read, Write};

use lexisupport_core::catalog::CatalogError;
use lexisupport_core::{FeatureCatalog, FeatureId, Likert, SurveyRecord};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const STUDENT_ID: &str = "student_id";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BadRowPolicy {
    /// Stop at the first malformed row.
    #[default]
    Fail,
    /// Leave malformed rows out and list them.
    Skip,
}

/// A rejected cell. `row` counts data rows from 1; `line` is the file line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    pub row: usize,
    pub line: u64,
    pub column: String,
    pub value: String,
    pub reason: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "row {} (line {}), column {}: {:?} {}",
            self.row, self.line, self.column, self.value, self.reason
        )
    }
}

#[derive(Debug, Error)]
pub enum SurveyFileError {
    #[error("malformed delimited text: {0}")]
    Csv(#[from] csv::Error),
    #[error("the file has no header row")]
    MissingHeader,
    #[error("header lacks catalog columns: {}", .0.join(", "))]
    MissingColumns(Vec<String>),
    #[error("column {0} appears more than once")]
    DuplicateColumn(String),
    #[error("{0}")]
    BadRow(RowError),
    #[error("catalog: {0}")]
    Catalog(#[from] CatalogError),
    #[error("catalog file: expected columns id,label")]
    CatalogHeader,
    #[error("catalog file: {0:?} is not a feature identifier")]
    CatalogId(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyLoad {
    pub records: Vec<SurveyRecord>,
    pub unknown_columns: Vec<String>,
    pub rejected: Vec<RowError>,
}

enum Column {
    StudentId,
    Feature(FeatureId),
    Unknown,
}

pub fn read_survey<R: Read>(reader: R, delimiter: u8, policy: BadRowPolicy) -> Result<SurveyLoad, SurveyFileError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(SurveyFileError::MissingHeader);
    }

    let mut columns = Vec::with_capacity(header.len());
    let mut unknown_columns = Vec::new();
    let mut seen = Vec::new();
    for name in header.iter() {
        let col = if name == STUDENT_ID {
            Column::StudentId
        } else if let Ok(id) = name.parse::<FeatureId>() {
            Column::Feature(id)
        } else {
            unknown_columns.push(name.to_string());
            Column::Unknown
        };
        if !matches!(col, Column::Unknown) {
            if seen.contains(&name) {
                return Err(SurveyFileError::DuplicateColumn(name.to_string()));
            }
            seen.push(name);
        }
        columns.push(col);
    }
    let missing: Vec<String> = FeatureId::difficulties()
        .chain(FeatureId::targets())
        .map(|id| id.to_string())
        .filter(|id| !seen.contains(&id.as_str()))
        .collect();
    if !missing.is_empty() {
        return Err(SurveyFileError::MissingColumns(missing));
    }

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let row_no = i + 1;
        let line = row.position().map_or(row_no as u64 + 1, |p| p.line());
        let mut record = SurveyRecord::new(format!("row{row_no}"));
        let mut error = None;
        for (col, cell) in columns.iter().zip(row.iter()) {
            match col {
                Column::StudentId if !cell.is_empty() => record.student_id = cell.to_string(),
                Column::Feature(id) if !cell.is_empty() => match parse_likert(cell) {
                    Ok(v) => record.set(*id, Some(v)),
                    Err(reason) => {
                        error = Some(RowError {
                            row: row_no,
                            line,
                            column: id.to_string(),
                            value: cell.to_string(),
                            reason,
                        });
                        break;
                    }
                },
                _ => {}
            }
        }
        match (error, policy) {
            (None, _) => records.push(record),
            (Some(e), BadRowPolicy::Fail) => return Err(SurveyFileError::BadRow(e)),
            (Some(e), BadRowPolicy::Skip) => rejected.push(e),
        }
    }
    Ok(SurveyLoad {
        records,
        unknown_columns,
        rejected,
    })
}

fn parse_likert(cell: &str) -> Result<Likert, String> {
    let v: i64 = cell.parse().map_err(|_| "is not an integer".to_string())?;
    u8::try_from(v)
        .ok()
        .and_then(Likert::new)
        .ok_or_else(|| "is outside the Likert range 0-5".to_string())
}

/// Header `student_id` then catalog order; missing answers are empty cells.
pub fn write_survey<W: Write>(writer: W, records: &[SurveyRecord]) -> Result<(), SurveyFileError> {
    let mut w = csv::Writer::from_writer(writer);
    let ids: Vec<FeatureId> = FeatureId::difficulties().chain(FeatureId::targets()).collect();
    let mut header = vec![STUDENT_ID.to_string()];
    header.extend(ids.iter().map(|id| id.to_string()));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.student_id.clone()];
        row.extend(ids.iter().map(|&id| r.get(id).map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_catalog<R: Read>(reader: R) -> Result<FeatureCatalog, SurveyFileError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?;
    if header.len() != 2 || &header[0] != "id" || &header[1] != "label" {
        return Err(SurveyFileError::CatalogHeader);
    }
    let mut entries = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let id = row[0]
            .parse::<FeatureId>()
            .map_err(|_| SurveyFileError::CatalogId(row[0].to_string()))?;
        entries.push((id, row[1].to_string()));
    }
    Ok(FeatureCatalog::from_entries(entries)?)
}

pub fn write_catalog<W: Write>(writer: W, catalog: &FeatureCatalog) -> Result<(), SurveyFileError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "label"])?;
    for (id, label) in catalog.entries() {
        w.write_record([id.to_string().as_str(), label])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
