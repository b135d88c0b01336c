//! `run.toml` and grid files.
//!
//! ```toml
//! # run.toml; every key optional, command-line flags win
//! seed = 7
//! jobs = 4
//! grid = "grid.toml"
//! threshold = 1
//! inputs = "binary"
//! impute = "drop-row"
//! max_missing_rate = 0.5
//! out = "results"
//! ```
//!
//! ```toml
//! # grid.toml
//! thresholds = [1, 4]
//! inputs = ["numeric", "binary"]
//! consensus = true
//!
//! [[learners]]
//! family = "rf"
//! n_estimators = 50
//!
//! [[learners]]
//! family = "svm"
//! kernel = "rbf"
//! c = 1.0
//! ```

use std::path::{Path, PathBuf};

use lexisupport_core::selection::{Grid, InputEncoding, PipelineConfig};
use lexisupport_core::survey::ImputePolicy;
use lexisupport_core::LearnerSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::fsio::read_text;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub grid: Option<PathBuf>,
    pub threshold: Option<u8>,
    pub inputs: Option<InputEncoding>,
    pub impute: Option<ImputePolicy>,
    pub max_missing_rate: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Relative paths inside the file are taken relative to the file.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = read_text(path, "run configuration")?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::usage(format!("run configuration {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.grid, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    #[serde(default)]
    pub thresholds: Vec<u8>,
    #[serde(default)]
    pub inputs: Vec<InputEncoding>,
    #[serde(default)]
    pub learners: Vec<LearnerSpec>,
    /// Extra single configurations added after the product.
    #[serde(default)]
    pub candidates: Vec<PipelineConfig>,
    #[serde(default)]
    pub consensus: bool,
}

impl GridFile {
    pub fn into_grid(self) -> Result<Grid> {
        let mut grid = Grid::product(&self.thresholds, &self.inputs, &self.learners, self.consensus);
        for c in self.candidates {
            if c.use_consensus {
                return Err(CliError::usage(
                    "grid candidates cannot set use_consensus; use the top-level consensus flag",
                ));
            }
            if !grid.candidates.contains(&c) {
                grid.candidates.push(c);
            }
        }
        grid.validate()?;
        Ok(grid)
    }
}

pub fn parse_grid(text: &str) -> Result<Grid> {
    let file: GridFile = toml::from_str(text).map_err(|e| CliError::usage(format!("grid file: {e}")))?;
    file.into_grid()
}

pub fn load_grid(path: &Path) -> Result<Grid> {
    parse_grid(&read_text(path, "grid file")?).map_err(|e| e.context(path.display()))
}

/// The default grid as a grid file.
pub fn default_grid_toml() -> String {
    let d = Grid::default();
    let mut learners = Vec::new();
    for c in &d.candidates {
        if !learners.contains(&c.learner) {
            learners.push(c.learner.clone());
        }
    }
    let file = GridFile {
        thresholds: vec![1, 4],
        inputs: vec![InputEncoding::Numeric, InputEncoding::Binary],
        learners,
        candidates: Vec::new(),
        consensus: d.consensus,
    };
    toml::to_string(&file).expect("grid file serializes")
}
