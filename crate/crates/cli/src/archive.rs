//! Dataset archive: the validated dataset plus how it was ingested.

use std::path::Path;

use lexisupport_core::Dataset;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::fsio::{read_json, write_json};
use crate::survey_file::RowError;

pub const ARCHIVE_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetArchive {
    pub format_version: u32,
    pub source: String,
    pub max_missing_rate: f64,
    #[serde(default)]
    pub unknown_columns: Vec<String>,
    #[serde(default)]
    pub rejected_rows: Vec<RowError>,
    pub dataset: Dataset,
}

impl DatasetArchive {
    pub fn new(source: String, max_missing_rate: f64, dataset: Dataset) -> Self {
        DatasetArchive {
            format_version: ARCHIVE_FORMAT,
            source,
            max_missing_rate,
            unknown_columns: Vec::new(),
            rejected_rows: Vec::new(),
            dataset,
        }
    }

    pub fn load(path: &Path) -> Result<DatasetArchive> {
        let a: DatasetArchive = read_json(path, "dataset archive")?;
        if a.format_version != ARCHIVE_FORMAT {
            return Err(CliError::data(format!(
                "dataset archive {}: unsupported format_version {}",
                path.display(),
                a.format_version
            )));
        }
        Ok(a)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}
