use std::fmt;

use lexisupport_core::psychometrics::ScoringError;
use lexisupport_core::selection::SelectionError;
use lexisupport_core::synth::PlantError;
use lexisupport_core::{LearnerError, SurveyError};

/// Failure category; each maps to a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Bad flags, bad configuration, unreadable input paths.
    Usage,
    /// The input data violates a documented rule.
    Data,
    Internal,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Usage => 2,
            Category::Data => 3,
            Category::Internal => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Usage => "usage error",
            Category::Data => "data validation error",
            Category::Internal => "internal error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            category: Category::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            category: Category::Data,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError {
            category: Category::Internal,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.category.exit_code()
    }

    /// Prefixes the message, keeping the category.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.category.name(), self.message)
    }
}

impl std::error::Error for CliError {}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<SurveyError> for CliError {
    fn from(e: SurveyError) -> Self {
        match e {
            SurveyError::ThresholdOutOfRange(_) | SurveyError::InvalidMissingRate(_) => CliError::usage(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<LearnerError> for CliError {
    fn from(e: LearnerError) -> Self {
        match e {
            LearnerError::InvalidHyperparameter(..) => CliError::usage(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<SelectionError> for CliError {
    fn from(e: SelectionError) -> Self {
        match e {
            SelectionError::Survey(e) => e.into(),
            SelectionError::Learner(e) => e.into(),
            SelectionError::EmptyGrid | SelectionError::MixedConsensusMembers => CliError::usage(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<PlantError> for CliError {
    fn from(e: PlantError) -> Self {
        match e {
            PlantError::Survey(e) => e.into(),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<ScoringError> for CliError {
    fn from(e: ScoringError) -> Self {
        CliError::data(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::usage("x").exit_code(), 2);
        assert_eq!(CliError::data("x").exit_code(), 3);
        assert_eq!(CliError::internal("x").exit_code(), 4);
        let e: CliError = SurveyError::ThresholdOutOfRange(9).into();
        assert_eq!(e.category, Category::Usage);
        let e: CliError = SelectionError::Survey(SurveyError::EmptyDataset).into();
        assert_eq!(e.category, Category::Data);
    }
}
