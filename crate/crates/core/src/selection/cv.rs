use alloc::format;
use alloc::vec::Vec;

use super::{ccr, make_folds, FoldPlan, PipelineConfig, SelectionError, DEFAULT_FOLDS};
use crate::catalog::FeatureId;
use crate::learners::fit;
use crate::seed::derive_seed;
use crate::survey::{BinaryView, TargetProblem};

/// Out-of-fold evaluation of one configuration on one target.
#[derive(Debug, Clone, PartialEq)]
pub struct CvRun {
    pub target: FeatureId,
    pub config: PipelineConfig,
    pub plan: FoldPlan,
    pub per_fold_ccr: Vec<f64>,
    pub mean_ccr: f64,
    pub pooled_ccr: f64,
    pub positive_rate: f64,
    /// Positive fraction of each test fold.
    pub per_fold_positive_rate: Vec<f64>,
    pub degenerate_folds: usize,
    /// [`crate::learners::TrainedModel::fingerprint`] of each fold's model.
    pub fold_fingerprints: Vec<u64>,
    /// Out-of-fold prediction for every problem row.
    pub predictions: Vec<u8>,
    pub y: Vec<u8>,
}

impl CvRun {
    pub(crate) fn from_predictions(
        target: FeatureId,
        config: PipelineConfig,
        plan: FoldPlan,
        y: Vec<u8>,
        predictions: Vec<u8>,
        degenerate_folds: usize,
        fold_fingerprints: Vec<u64>,
    ) -> Result<CvRun, SelectionError> {
        let mut per_fold_ccr = Vec::with_capacity(plan.k);
        let mut per_fold_positive_rate = Vec::with_capacity(plan.k);
        for fold in 0..plan.k {
            let test = plan.test_indices(fold);
            let yt: Vec<u8> = test.iter().map(|&i| y[i]).collect();
            let yp: Vec<u8> = test.iter().map(|&i| predictions[i]).collect();
            per_fold_ccr.push(ccr(&yt, &yp)?);
            per_fold_positive_rate.push(yt.iter().filter(|&&v| v == 1).count() as f64 / yt.len() as f64);
        }
        let mean_ccr = per_fold_ccr.iter().sum::<f64>() / plan.k as f64;
        let pooled_ccr = ccr(&y, &predictions)?;
        let positive_rate = y.iter().filter(|&&v| v == 1).count() as f64 / y.len() as f64;
        Ok(CvRun {
            target,
            config,
            plan,
            per_fold_ccr,
            mean_ccr,
            pooled_ccr,
            positive_rate,
            per_fold_positive_rate,
            degenerate_folds,
            fold_fingerprints,
            predictions,
            y,
        })
    }

    /// CCR of always predicting the majority class.
    pub fn baseline_ccr(&self) -> f64 {
        self.positive_rate.max(1.0 - self.positive_rate)
    }
}

/// Fold plan shared by every configuration evaluated on `target`.
pub fn fold_plan_for(n: usize, root_seed: u64, target: FeatureId) -> Result<FoldPlan, SelectionError> {
    make_folds(n, DEFAULT_FOLDS, derive_seed(root_seed, &[&format!("{target}"), "folds"]))
}

/// Seed for fitting `config` on the training part of `fold`.
pub fn fold_seed(root_seed: u64, target: FeatureId, config: &PipelineConfig, fold: usize) -> u64 {
    derive_seed(
        root_seed,
        &[&format!("{target}"), &config.key(), &format!("fold{fold}")],
    )
}

/// 10-fold cross-validation of `config` on `target`.
///
/// Each fold's model is fitted on the other folds only; scaling statistics
/// are learned inside [`fit`] from those rows.
pub fn cross_validate(
    config: &PipelineConfig,
    view: &BinaryView,
    target: FeatureId,
    seed: u64,
) -> Result<CvRun, SelectionError> {
    if view.threshold != config.threshold || view.inputs_binarized != config.inputs.is_binary() {
        return Err(SelectionError::ViewMismatch {
            view_threshold: view.threshold,
            view_binary: view.inputs_binarized,
        });
    }
    let problem = view.problem(target)?;
    let plan = fold_plan_for(problem.y.len(), seed, target)?;
    cross_validate_with_plan(config, &problem, &plan, seed)
}

pub fn cross_validate_with_plan(
    config: &PipelineConfig,
    problem: &TargetProblem,
    plan: &FoldPlan,
    seed: u64,
) -> Result<CvRun, SelectionError> {
    let n = problem.y.len();
    if plan.n != n {
        return Err(SelectionError::LengthMismatch(plan.n, n));
    }
    let mut predictions = alloc::vec![0u8; n];
    let mut degenerate = 0;
    let mut fingerprints = Vec::with_capacity(plan.k);
    for fold in 0..plan.k {
        let train = plan.train_indices(fold);
        let test = plan.test_indices(fold);
        let x_train = problem.x.select_rows(&train);
        let y_train: Vec<u8> = train.iter().map(|&i| problem.y[i]).collect();
        let model = fit(
            &config.learner,
            &x_train,
            &y_train,
            fold_seed(seed, problem.target, config, fold),
        )?;
        degenerate += usize::from(model.is_degenerate());
        fingerprints.push(model.fingerprint());
        for &i in &test {
            predictions[i] = model.predict(problem.x.row(i))?;
        }
    }
    CvRun::from_predictions(
        problem.target,
        config.clone(),
        plan.clone(),
        problem.y.clone(),
        predictions,
        degenerate,
        fingerprints,
    )
}
