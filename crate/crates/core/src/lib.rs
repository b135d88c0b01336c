//! Per-target model selection for predicting which support tools and
//! learning strategies help a student, given their self-reported
//! difficulty profile on a 0–5 Likert scale.
//!
//! The crate is `no_std` (with `alloc`) and free of IO. File formats, the
//! session store and the command-line driver live in the `lexisupport`
//! companion crate.
//!
//! Layout:
//!
//! - [`catalog`]: the fixed set of difficulties, tools and strategies.
//! - [`survey`]: survey records, sparse-target dropping and binarization.
//! - [`learners`]: random forest, k-nearest neighbours, SVM and logistic
//!   regression behind one fit/predict contract.
//! - [`selection`]: CCR, fold plans, cross-validation, grid search and
//!   consensus voting.
//! - [`report`]: the evaluation report and its table/chart renderings.
//! - [`psychometrics`]: Rosenberg scoring and the session data model.
//! - [`synth`]: planted-structure synthetic surveys with known Bayes rates.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod catalog;
pub mod fingerprint;
pub mod learners;
pub mod matrix;
pub mod psychometrics;
pub mod report;
pub mod seed;
pub mod selection;
pub mod survey;
pub mod synth;

pub use catalog::{FeatureCatalog, FeatureId, FeatureKind};
pub use learners::{LearnerError, LearnerSpec, TrainedModel};
pub use matrix::Matrix;
pub use report::EvaluationReport;
pub use selection::{PipelineConfig, SelectionError, TargetResult};
pub use survey::{BinaryView, Dataset, Likert, SurveyError, SurveyRecord};
