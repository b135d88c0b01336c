//! The four classifier families behind one fit/predict contract.
//!
//! | family | fitted state | label rule |
//! |--------|--------------|------------|
//! | RF  | bootstrap CART trees (Gini)        | vote fraction > 0.5 |
//! | KNN | stored training set                | vote fraction > 0.5 |
//! | SVM | support vectors, dual coefficients | decision value > 0  |
//! | LR  | weights and intercept              | probability > 0.5   |
//!
//! KNN, SVM and LR standardize numeric inputs with statistics learned at fit
//! time; 0/1 inputs pass through unchanged. RF always sees raw values.
//! A training set with a single class yields a constant model flagged
//! degenerate.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fingerprint::Fnv64;
use crate::matrix::Matrix;

pub mod forest;
pub mod knn;
pub mod logistic;
pub mod scaling;
pub mod svm;

pub use forest::Forest;
pub use knn::KnnModel;
pub use logistic::LogisticModel;
pub use scaling::Scaling;
pub use svm::{rbf_kernel, Kernel, SvmModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnerError {
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("{rows} input rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("label {0} is not 0 or 1")]
    InvalidLabel(u8),
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("model was fitted on a single class and has no decision function")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Rf,
    Knn,
    Svm,
    Lr,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Rf, Family::Knn, Family::Svm, Family::Lr];

    pub fn name(self) -> &'static str {
        match self {
            Family::Rf => "RF",
            Family::Knn => "KNN",
            Family::Svm => "SVM",
            Family::Lr => "LR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfParams {
    pub n_estimators: usize,
    /// `None` grows every tree until its leaves are pure.
    #[serde(default)]
    pub max_depth: Option<usize>,
    /// Overrides the seed passed to [`fit`] when set.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            n_estimators: 50,
            max_depth: None,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnnParams {
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GammaRepr", into = "GammaRepr")]
pub enum Gamma {
    /// `1 / (d * variance of all standardized training inputs)`.
    Scale,
    Fixed(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GammaRepr {
    Fixed(f64),
    Named(String),
}

impl TryFrom<GammaRepr> for Gamma {
    type Error = String;

    fn try_from(r: GammaRepr) -> Result<Self, Self::Error> {
        match r {
            GammaRepr::Fixed(g) => Ok(Gamma::Fixed(g)),
            GammaRepr::Named(s) if s == "scale" => Ok(Gamma::Scale),
            GammaRepr::Named(s) => Err(format!("unknown gamma '{s}', expected a number or \"scale\"")),
        }
    }
}

impl From<Gamma> for GammaRepr {
    fn from(g: Gamma) -> Self {
        match g {
            Gamma::Scale => GammaRepr::Named("scale".into()),
            Gamma::Fixed(v) => GammaRepr::Fixed(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmParams {
    pub kernel: Kernel,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_gamma")]
    pub rbf_gamma: Gamma,
}

fn default_c() -> f64 {
    1.0
}

fn default_gamma() -> Gamma {
    Gamma::Scale
}

impl SvmParams {
    pub fn linear() -> Self {
        SvmParams {
            kernel: Kernel::Linear,
            c: 1.0,
            rbf_gamma: Gamma::Scale,
        }
    }

    pub fn rbf() -> Self {
        SvmParams {
            kernel: Kernel::Rbf,
            ..Self::linear()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LrParams {
    #[serde(default = "default_l2")]
    pub l2_strength: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_l2() -> f64 {
    1.0
}

fn default_max_iterations() -> usize {
    1000
}

fn default_tolerance() -> f64 {
    1e-6
}

impl Default for LrParams {
    fn default() -> Self {
        LrParams {
            l2_strength: default_l2(),
            max_iterations: default_max_iterations(),
            tolerance: default_tolerance(),
        }
    }
}

/// A learner family together with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum LearnerSpec {
    Rf(RfParams),
    Knn(KnnParams),
    Svm(SvmParams),
    Lr(LrParams),
}

impl LearnerSpec {
    pub fn rf(n_estimators: usize) -> Self {
        LearnerSpec::Rf(RfParams {
            n_estimators,
            ..RfParams::default()
        })
    }

    pub fn knn(k: usize) -> Self {
        LearnerSpec::Knn(KnnParams { k })
    }

    pub fn svm_linear() -> Self {
        LearnerSpec::Svm(SvmParams::linear())
    }

    pub fn svm_rbf() -> Self {
        LearnerSpec::Svm(SvmParams::rbf())
    }

    pub fn lr() -> Self {
        LearnerSpec::Lr(LrParams::default())
    }

    pub fn family(&self) -> Family {
        match self {
            LearnerSpec::Rf(_) => Family::Rf,
            LearnerSpec::Knn(_) => Family::Knn,
            LearnerSpec::Svm(_) => Family::Svm,
            LearnerSpec::Lr(_) => Family::Lr,
        }
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |msg: String| Err(LearnerError::InvalidHyperparameter(msg));
        match self {
            LearnerSpec::Rf(p) => {
                if p.n_estimators == 0 {
                    return bad("n_estimators must be positive".into());
                }
                if p.max_depth == Some(0) {
                    return bad("max_depth must be positive when set".into());
                }
            }
            LearnerSpec::Knn(p) => {
                if p.k == 0 || p.k % 2 == 0 {
                    return bad(format!("k must be an odd positive integer, got {}", p.k));
                }
            }
            LearnerSpec::Svm(p) => {
                if !(p.c.is_finite() && p.c > 0.0) {
                    return bad(format!("C must be positive, got {}", p.c));
                }
                if let Gamma::Fixed(g) = p.rbf_gamma {
                    if !(g.is_finite() && g > 0.0) {
                        return bad(format!("rbf_gamma must be positive, got {g}"));
                    }
                }
            }
            LearnerSpec::Lr(p) => {
                if !(p.l2_strength.is_finite() && p.l2_strength >= 0.0) {
                    return bad(format!("l2_strength must be non-negative, got {}", p.l2_strength));
                }
                if p.max_iterations == 0 {
                    return bad("max_iterations must be positive".into());
                }
                if !(p.tolerance.is_finite() && p.tolerance > 0.0) {
                    return bad(format!("tolerance must be positive, got {}", p.tolerance));
                }
            }
        }
        Ok(())
    }

    /// Hyperparameters as numbers, compared lexicographically to prefer the
    /// simpler of two otherwise tied configurations.
    pub fn complexity_key(&self) -> Vec<f64> {
        match self {
            LearnerSpec::Rf(p) => alloc::vec![
                p.n_estimators as f64,
                p.max_depth.map_or(f64::INFINITY, |d| d as f64),
            ],
            LearnerSpec::Knn(p) => alloc::vec![p.k as f64],
            LearnerSpec::Svm(p) => alloc::vec![
                match p.kernel {
                    Kernel::Linear => 0.0,
                    Kernel::Rbf => 1.0,
                },
                p.c,
                match p.rbf_gamma {
                    Gamma::Scale => 0.0,
                    Gamma::Fixed(g) => g,
                },
            ],
            LearnerSpec::Lr(p) => alloc::vec![p.l2_strength, p.max_iterations as f64, p.tolerance],
        }
    }

    /// Stable text key used for seed derivation and report metadata.
    pub fn key(&self) -> String {
        match self {
            LearnerSpec::Rf(p) => format!(
                "rf:n={}:depth={}:seed={}",
                p.n_estimators,
                p.max_depth.map_or(String::from("none"), |d| format!("{d}")),
                p.seed.map_or(String::from("none"), |s| format!("{s}")),
            ),
            LearnerSpec::Knn(p) => format!("knn:k={}", p.k),
            LearnerSpec::Svm(p) => format!(
                "svm:{}:c={}:gamma={}",
                p.kernel.name(),
                p.c,
                match p.rbf_gamma {
                    Gamma::Scale => String::from("scale"),
                    Gamma::Fixed(g) => format!("{g}"),
                }
            ),
            LearnerSpec::Lr(p) => format!("lr:l2={}:iter={}:tol={}", p.l2_strength, p.max_iterations, p.tolerance),
        }
    }
}

/// Table-style model name, e.g. `SVM Linear`, `KNN K=7`, `RF, 50 estimators`.
impl fmt::Display for LearnerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnerSpec::Rf(p) => {
                write!(f, "RF, {} estimators", p.n_estimators)?;
                if let Some(d) = p.max_depth {
                    write!(f, ", depth {d}")?;
                }
                Ok(())
            }
            LearnerSpec::Knn(p) => write!(f, "KNN K={}", p.k),
            LearnerSpec::Svm(p) => match p.kernel {
                Kernel::Linear => f.write_str("SVM Linear"),
                Kernel::Rbf => f.write_str("SVM RBF"),
            },
            LearnerSpec::Lr(_) => f.write_str("LR"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FittedState {
    /// Single-class training labels.
    Constant { label: u8 },
    Forest(Forest),
    Knn(KnnModel),
    Svm(SvmModel),
    Logistic(LogisticModel),
}

/// An immutable fitted classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: LearnerSpec,
    pub n_features: usize,
    pub scaling: Scaling,
    pub state: FittedState,
}

fn check_inputs(x: &Matrix, y: &[u8]) -> Result<(), LearnerError> {
    if x.rows() == 0 {
        return Err(LearnerError::EmptyTrainingSet);
    }
    if x.rows() != y.len() {
        return Err(LearnerError::LengthMismatch {
            rows: x.rows(),
            labels: y.len(),
        });
    }
    if let Some(&bad) = y.iter().find(|&&v| v > 1) {
        return Err(LearnerError::InvalidLabel(bad));
    }
    if !x.all_finite() {
        return Err(LearnerError::NonFinite);
    }
    Ok(())
}

/// Fits `spec` on `(x, y)`. Deterministic for fixed arguments.
pub fn fit(spec: &LearnerSpec, x: &Matrix, y: &[u8], seed: u64) -> Result<TrainedModel, LearnerError> {
    spec.validate()?;
    check_inputs(x, y)?;
    let n_features = x.cols();

    let positives = y.iter().filter(|&&v| v == 1).count();
    if positives == 0 || positives == y.len() {
        return Ok(TrainedModel {
            spec: spec.clone(),
            n_features,
            scaling: Scaling::Identity,
            state: FittedState::Constant { label: y[0] },
        });
    }

    let scaling = match spec {
        LearnerSpec::Rf(_) => Scaling::Identity,
        _ => Scaling::fit(x),
    };
    let scaled = scaling.transform_matrix(x);

    let state = match spec {
        LearnerSpec::Rf(p) => FittedState::Forest(Forest::fit(p, &scaled, y, p.seed.unwrap_or(seed))),
        LearnerSpec::Knn(p) => FittedState::Knn(KnnModel::fit(p.k, scaled, y.to_vec())),
        LearnerSpec::Svm(p) => FittedState::Svm(SvmModel::fit(p, &scaled, y)),
        LearnerSpec::Lr(p) => FittedState::Logistic(LogisticModel::fit(p, &scaled, y)),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        n_features,
        scaling,
        state,
    })
}

impl TrainedModel {
    pub fn is_degenerate(&self) -> bool {
        matches!(self.state, FittedState::Constant { .. })
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), LearnerError> {
        if x.len() != self.n_features {
            return Err(LearnerError::DimensionMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Value compared against [`TrainedModel::decision_threshold`]: SVM
    /// margin, LR probability, or RF/KNN positive vote fraction.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64, LearnerError> {
        self.check_dim(x)?;
        let z = self.scaling.transform(x);
        Ok(match &self.state {
            FittedState::Constant { .. } => return Err(LearnerError::Degenerate),
            FittedState::Forest(m) => m.vote_fraction(&z),
            FittedState::Knn(m) => m.vote_fraction(&z),
            FittedState::Svm(m) => m.decision_value(&z),
            FittedState::Logistic(m) => m.probability(&z),
        })
    }

    pub fn decision_threshold(&self) -> f64 {
        match self.spec.family() {
            Family::Svm => 0.0,
            _ => 0.5,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8, LearnerError> {
        if let FittedState::Constant { label } = self.state {
            self.check_dim(x)?;
            return Ok(label);
        }
        let v = self.decision_value(x)?;
        Ok(u8::from(v > self.decision_threshold()))
    }

    pub fn predict_matrix(&self, x: &Matrix) -> Result<Vec<u8>, LearnerError> {
        x.iter_rows().map(|r| self.predict(r)).collect()
    }

    /// Hash of the complete fitted state, bit-exact on floats.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv64::new();
        h.str(&self.spec.key());
        h.usize(self.n_features);
        self.scaling.hash_into(&mut h);
        match &self.state {
            FittedState::Constant { label } => h.bytes(&[0, *label]),
            FittedState::Forest(m) => m.hash_into(&mut h),
            FittedState::Knn(m) => m.hash_into(&mut h),
            FittedState::Svm(m) => m.hash_into(&mut h),
            FittedState::Logistic(m) => m.hash_into(&mut h),
        }
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(LearnerSpec::knn(4).validate().is_err());
        assert!(LearnerSpec::knn(0).validate().is_err());
        assert!(LearnerSpec::knn(5).validate().is_ok());
        assert!(LearnerSpec::rf(0).validate().is_err());
        let mut svm = SvmParams::rbf();
        svm.c = 0.0;
        assert!(LearnerSpec::Svm(svm.clone()).validate().is_err());
        svm.c = 1.0;
        svm.rbf_gamma = Gamma::Fixed(-1.0);
        assert!(LearnerSpec::Svm(svm).validate().is_err());
        let mut lr = LrParams::default();
        lr.l2_strength = -0.1;
        assert!(LearnerSpec::Lr(lr).validate().is_err());
    }

    #[test]
    fn spec_serde_shape() {
        let json = serde_json::to_string(&LearnerSpec::svm_rbf()).unwrap();
        assert_eq!(json, r#"{"family":"svm","kernel":"rbf","c":1.0,"rbf_gamma":"scale"}"#);
        let back: LearnerSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, LearnerSpec::svm_rbf());

        let knn: LearnerSpec = serde_json::from_str(r#"{"family":"knn","k":7}"#).unwrap();
        assert_eq!(knn, LearnerSpec::knn(7));
        assert!(serde_json::from_str::<LearnerSpec>(r#"{"family":"knn","k":7,"c":1}"#).is_err());
        assert!(serde_json::from_str::<LearnerSpec>(r#"{"family":"svm","kernel":"rbf","rbf_gamma":"auto"}"#).is_err());
        let lr: LearnerSpec = serde_json::from_str(r#"{"family":"lr"}"#).unwrap();
        assert_eq!(lr, LearnerSpec::lr());
    }

    #[test]
    fn display_names() {
        assert_eq!(LearnerSpec::rf(50).to_string(), "RF, 50 estimators");
        assert_eq!(LearnerSpec::knn(7).to_string(), "KNN K=7");
        assert_eq!(LearnerSpec::svm_linear().to_string(), "SVM Linear");
        assert_eq!(LearnerSpec::svm_rbf().to_string(), "SVM RBF");
        assert_eq!(LearnerSpec::lr().to_string(), "LR");
    }

    #[test]
    fn single_class_gives_constant_model() {
        let x = Matrix::from_rows(&[[0.0, 1.0], [2.0, 3.0], [4.0, 1.0]]);
        for spec in [LearnerSpec::rf(5), LearnerSpec::knn(1), LearnerSpec::svm_rbf(), LearnerSpec::lr()] {
            let m = fit(&spec, &x, &[1, 1, 1], 0).unwrap();
            assert!(m.is_degenerate());
            assert_eq!(m.predict(&[9.0, -3.0]).unwrap(), 1);
            assert_eq!(m.decision_value(&[0.0, 0.0]), Err(LearnerError::Degenerate));
        }
    }

    #[test]
    fn input_errors() {
        let x = Matrix::from_rows(&[[0.0, 1.0], [2.0, f64::NAN]]);
        assert_eq!(fit(&LearnerSpec::lr(), &x, &[0, 1], 0), Err(LearnerError::NonFinite));
        let x = Matrix::from_rows(&[[0.0, 1.0], [2.0, 3.0]]);
        assert!(matches!(fit(&LearnerSpec::lr(), &x, &[0], 0), Err(LearnerError::LengthMismatch { .. })));
        assert_eq!(fit(&LearnerSpec::lr(), &x, &[0, 2], 0), Err(LearnerError::InvalidLabel(2)));
        let m = fit(&LearnerSpec::lr(), &x, &[0, 1], 0).unwrap();
        assert_eq!(
            m.predict(&[1.0]),
            Err(LearnerError::DimensionMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn zero_logistic_model_predicts_zero() {
        let m = TrainedModel {
            spec: LearnerSpec::lr(),
            n_features: 2,
            scaling: Scaling::Identity,
            state: FittedState::Logistic(LogisticModel::from_parts(alloc::vec![0.0, 0.0], 0.0)),
        };
        assert_eq!(m.decision_value(&[3.0, -1.0]).unwrap(), 0.5);
        assert_eq!(m.predict(&[3.0, -1.0]).unwrap(), 0);
    }

    #[test]
    fn model_serde_round_trip_preserves_predictions() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.5], [3.0, 3.0], [4.0, 3.5], [0.5, 1.0], [3.5, 4.0]]);
        let y = [0, 0, 1, 1, 0, 1];
        for spec in [LearnerSpec::rf(7), LearnerSpec::knn(3), LearnerSpec::svm_rbf(), LearnerSpec::svm_linear(), LearnerSpec::lr()] {
            let m = fit(&spec, &x, &y, 11).unwrap();
            let back: TrainedModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.fingerprint(), m.fingerprint());
            assert_eq!(back.predict_matrix(&x).unwrap(), m.predict_matrix(&x).unwrap());
        }
    }
}
