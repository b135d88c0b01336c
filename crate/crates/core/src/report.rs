//! The evaluation report and its renderings: per-kind best-model tables,
//! bar-chart data and a one-paragraph summary.
//!
//! Renderers only format numbers already stored in the report.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::catalog::{FeatureId, FeatureKind};
use crate::selection::{Grid, SelectionError, TargetResult, DEFAULT_FOLDS};
use crate::survey::{Dataset, ImputePolicy};

/// Results above this CCR are counted in the summary.
pub const HIGH_CCR: f64 = 0.90;

pub const TABLE_HEADER: &str = "ID | Best Model | Thr | Input | Cons | Score";
pub const CHART_HEADER: &str = "id,ccr";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum TargetOutcome {
    Ok(TargetResult),
    Failed { target: FeatureId, error: String },
}

impl TargetOutcome {
    pub fn target(&self) -> FeatureId {
        match self {
            TargetOutcome::Ok(r) => r.target,
            TargetOutcome::Failed { target, .. } => *target,
        }
    }

    pub fn result(&self) -> Option<&TargetResult> {
        match self {
            TargetOutcome::Ok(r) => Some(r),
            TargetOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub folds: usize,
    pub grid: Grid,
    pub impute: ImputePolicy,
    /// Hex [`Dataset::fingerprint`].
    pub dataset_fingerprint: String,
    pub n_records: usize,
    pub dropped_targets: BTreeMap<FeatureId, f64>,
    pub decisions: Vec<String>,
}

/// Mean CCR and high-score count for one target kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindSummary {
    pub count: usize,
    pub mean_ccr: f64,
    pub above_high: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub metadata: RunMetadata,
    pub targets: Vec<TargetOutcome>,
    pub tools: Option<KindSummary>,
    pub strategies: Option<KindSummary>,
    pub overall: Option<KindSummary>,
    pub failed_targets: usize,
}

fn summarize<'a>(results: impl Iterator<Item = &'a TargetResult>) -> Option<KindSummary> {
    let scores: Vec<f64> = results.map(|r| r.mean_ccr).collect();
    if scores.is_empty() {
        return None;
    }
    Some(KindSummary {
        count: scores.len(),
        mean_ccr: scores.iter().sum::<f64>() / scores.len() as f64,
        above_high: scores.iter().filter(|&&s| s > HIGH_CCR).count(),
    })
}

pub fn standard_decisions(impute: ImputePolicy) -> Vec<String> {
    [
        "label: 1 iff value > threshold (inputs too when binarized)",
        "folds: 10, shuffled, not stratified, shared by all configurations of a target",
        "score: mean of per-fold CCR; pooled CCR also reported",
        "scaling: standardization learned on training folds only",
        "consensus: best-by-CV member per family at a shared threshold and input encoding; even split -> best member, else 0",
        "tie-break: RF < KNN < SVM < LR, then smaller hyperparameters, then lower threshold",
        "seeds: derived from the run seed by FNV-1a + splitmix64 over (target, config, fold)",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain(core::iter::once(match impute {
        ImputePolicy::DropRow => "missing difficulty: drop row".to_string(),
        ImputePolicy::Median => "missing difficulty: column median".to_string(),
    }))
    .collect()
}

impl EvaluationReport {
    /// Orders outcomes by catalog order and computes the summaries.
    pub fn new(metadata: RunMetadata, mut targets: Vec<TargetOutcome>) -> Self {
        targets.sort_by_key(TargetOutcome::target);
        let of_kind = |kind: FeatureKind| {
            summarize(
                targets
                    .iter()
                    .filter_map(TargetOutcome::result)
                    .filter(move |r| r.target.kind() == kind),
            )
        };
        let tools = of_kind(FeatureKind::Tool);
        let strategies = of_kind(FeatureKind::Strategy);
        let overall = summarize(targets.iter().filter_map(TargetOutcome::result));
        let failed_targets = targets.iter().filter(|t| t.result().is_none()).count();
        EvaluationReport {
            metadata,
            targets,
            tools,
            strategies,
            overall,
            failed_targets,
        }
    }

    pub fn assemble(
        dataset: &Dataset,
        grid: &Grid,
        seed: u64,
        impute: ImputePolicy,
        outcomes: Vec<(FeatureId, Result<TargetResult, SelectionError>)>,
    ) -> Self {
        let metadata = RunMetadata {
            seed,
            folds: DEFAULT_FOLDS,
            grid: grid.clone(),
            impute,
            dataset_fingerprint: format!("{:016x}", dataset.fingerprint()),
            n_records: dataset.len(),
            dropped_targets: dataset.dropped_targets().clone(),
            decisions: standard_decisions(impute),
        };
        let targets = outcomes
            .into_iter()
            .map(|(target, r)| match r {
                Ok(r) => TargetOutcome::Ok(r),
                Err(e) => TargetOutcome::Failed {
                    target,
                    error: e.to_string(),
                },
            })
            .collect();
        EvaluationReport::new(metadata, targets)
    }

    pub fn results(&self) -> impl Iterator<Item = &TargetResult> + '_ {
        self.targets.iter().filter_map(TargetOutcome::result)
    }

    pub fn result(&self, target: FeatureId) -> Option<&TargetResult> {
        self.results().find(|r| r.target == target)
    }
}

pub fn format_score(v: f64) -> String {
    format!("{v:.4}")
}

/// Tool and strategy renderings; `None` when the report has no target of
/// that kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerKind {
    pub tools: Option<String>,
    pub strategies: Option<String>,
}

fn per_kind(report: &EvaluationReport, render: impl Fn(&[&TargetOutcome]) -> String) -> PerKind {
    let pick = |kind: FeatureKind| {
        let rows: Vec<&TargetOutcome> = report.targets.iter().filter(|t| t.target().kind() == kind).collect();
        (!rows.is_empty()).then(|| render(&rows))
    };
    PerKind {
        tools: pick(FeatureKind::Tool),
        strategies: pick(FeatureKind::Strategy),
    }
}

/// `ID | Best Model | Thr | Input | Cons | Score`, one row per target in
/// catalog order.
pub fn render_tables(report: &EvaluationReport) -> PerKind {
    per_kind(report, |rows| {
        let mut out = String::new();
        out.push_str(TABLE_HEADER);
        out.push('\n');
        for t in rows {
            match t {
                TargetOutcome::Ok(r) => {
                    let c = &r.best_config;
                    let _ = writeln!(
                        out,
                        "{} | {} | {} | {} | {} | {}",
                        r.target,
                        c.learner,
                        c.threshold,
                        c.inputs,
                        if c.use_consensus { "Yes" } else { "No" },
                        format_score(r.mean_ccr)
                    );
                }
                TargetOutcome::Failed { target, .. } => {
                    let _ = writeln!(out, "{target} | FAILED | - | - | - | -");
                }
            }
        }
        out
    })
}

/// `id,ccr` pairs for bar charts. Failed targets are left out.
pub fn render_chart_data(report: &EvaluationReport) -> PerKind {
    per_kind(report, |rows| {
        let mut out = String::new();
        out.push_str(CHART_HEADER);
        out.push('\n');
        for r in rows.iter().filter_map(|t| t.result()) {
            let _ = writeln!(out, "{},{}", r.target, format_score(r.mean_ccr));
        }
        out
    })
}

fn percent(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

/// e.g. `Tools: 89.96% mean CCR, more than 90% in 12 of the 16 considered tools.`
pub fn render_summary(report: &EvaluationReport) -> String {
    let mut out = String::new();
    for (name, plural, s) in [
        ("Tools", "tools", report.tools),
        ("Strategies", "strategies", report.strategies),
    ] {
        if let Some(s) = s {
            let _ = writeln!(
                out,
                "{name}: {} mean CCR, more than 90% in {} of the {} considered {plural}.",
                percent(s.mean_ccr),
                s.above_high,
                s.count
            );
        }
    }
    if let Some(s) = report.overall {
        let _ = writeln!(
            out,
            "Overall: {} mean CCR over {} targets, more than 90% in {}.",
            percent(s.mean_ccr),
            s.count,
            s.above_high
        );
    }
    if report.failed_targets > 0 {
        let _ = writeln!(out, "Failed targets: {}.", report.failed_targets);
    }
    out
}
