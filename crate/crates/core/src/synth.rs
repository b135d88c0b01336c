//! Planted-structure survey data with a known Bayes rate.
//!
//! Each target follows a linear-threshold rule over 2 to 4 binarized
//! difficulty columns (`x > label_threshold`), so linear models on binary
//! inputs represent it exactly and trees need one split per column. The
//! rule's label is flipped on exactly `round(label_noise * n)`
//! randomly chosen observed rows, so every row is flipped with probability
//! `label_noise` and the true rule scores `1 - label_noise` up to rounding.
//! The raw Likert value is then drawn above or below `label_threshold`
//! according to the final label.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{FeatureCatalog, FeatureId, N_DIFFICULTIES};
use crate::seed::{derive_seed, rng_from_seed};
use crate::survey::{Dataset, Likert, SurveyError, SurveyRecord, LIKERT_MAX};

const MAX_WEIGHT: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSpec {
    #[serde(default = "default_students")]
    pub n_students: usize,
    #[serde(default = "default_noise")]
    pub label_noise: f64,
    /// Likert cut that separates the planted classes.
    #[serde(default = "default_label_threshold")]
    pub label_threshold: u8,
    /// Fraction of rows left empty, per column.
    #[serde(default = "default_missing")]
    pub missing: BTreeMap<FeatureId, f64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_students() -> usize {
    719
}

fn default_noise() -> f64 {
    0.07
}

fn default_label_threshold() -> u8 {
    1
}

fn default_missing() -> BTreeMap<FeatureId, f64> {
    BTreeMap::from([(FeatureId::tool(4), 0.6)])
}

impl Default for PlantSpec {
    /// 719 students, 7% label noise, T4 60% missing.
    fn default() -> Self {
        PlantSpec {
            n_students: default_students(),
            label_noise: default_noise(),
            label_threshold: default_label_threshold(),
            missing: default_missing(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("n_students must be positive")]
    NoStudents,
    #[error("label noise {0} outside [0, 0.5)")]
    Noise(f64),
    #[error("label threshold {0} leaves one class empty (must be below {LIKERT_MAX})")]
    LabelThreshold(u8),
    #[error("missing rate {rate} for {id} outside [0, 1)")]
    MissingRate { id: FeatureId, rate: f64 },
    #[error(transparent)]
    Survey(#[from] SurveyError),
}

impl PlantSpec {
    pub fn validate(&self) -> Result<(), PlantError> {
        if self.n_students == 0 {
            return Err(PlantError::NoStudents);
        }
        if !(0.0..0.5).contains(&self.label_noise) {
            return Err(PlantError::Noise(self.label_noise));
        }
        if self.label_threshold >= LIKERT_MAX {
            return Err(PlantError::LabelThreshold(self.label_threshold));
        }
        for (&id, &rate) in &self.missing {
            if !(0.0..1.0).contains(&rate) {
                return Err(PlantError::MissingRate { id, rate });
            }
        }
        Ok(())
    }
}

/// `label = 1 iff sum(weights[i] * [x[features[i]] > input_cut]) > threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedRule {
    pub target: FeatureId,
    pub features: Vec<FeatureId>,
    pub weights: Vec<i32>,
    pub input_cut: u8,
    pub threshold: f64,
    /// Expected accuracy of the rule itself on fresh data.
    pub bayes_rate: f64,
    /// Accuracy of the rule on the generated labels (observed rows only).
    pub rule_ccr: f64,
    pub positive_rate: f64,
    pub missing_rate: f64,
}

impl PlantedRule {
    pub fn score(&self, difficulties: &[u8]) -> i32 {
        self.features
            .iter()
            .zip(&self.weights)
            .map(|(f, w)| w * i32::from(difficulties[f.number() - 1] > self.input_cut))
            .sum()
    }

    pub fn label(&self, difficulties: &[u8]) -> u8 {
        u8::from(f64::from(self.score(difficulties)) > self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantManifest {
    pub spec: PlantSpec,
    pub rules: Vec<PlantedRule>,
}

impl PlantManifest {
    pub fn rule(&self, target: FeatureId) -> Option<&PlantedRule> {
        self.rules.iter().find(|r| r.target == target)
    }
}

/// Cut between consecutive achievable scores that brings the positive rate
/// closest to one half, each indicator being 1 with probability `p_one`.
fn balanced_cut(weights: &[i32], p_one: f64) -> f64 {
    let mut mass: BTreeMap<i32, f64> = BTreeMap::new();
    for bits in 0u32..(1 << weights.len()) {
        let mut score = 0;
        let mut p = 1.0;
        for (j, &w) in weights.iter().enumerate() {
            if bits >> j & 1 == 1 {
                score += w;
                p *= p_one;
            } else {
                p *= 1.0 - p_one;
            }
        }
        *mass.entry(score).or_default() += p;
    }
    let scores: Vec<(i32, f64)> = mass.into_iter().collect();
    let mut above = 1.0;
    let mut best = (f64::INFINITY, 0.0);
    for pair in scores.windows(2) {
        above -= pair[0].1;
        let gap = libm::fabs(above - 0.5);
        if gap < best.0 {
            best = (gap, f64::from(pair[0].0) + 0.5);
        }
    }
    best.1
}

fn plant_rule(seed: u64, target: FeatureId, label_threshold: u8) -> (Vec<FeatureId>, Vec<i32>, f64) {
    let mut rng = rng_from_seed(derive_seed(seed, &[&format!("{target}"), "rule"]));
    let k = rng.gen_range(2..=4);
    let mut idx = sample(&mut rng, N_DIFFICULTIES, k).into_vec();
    idx.sort_unstable();
    let features = idx.into_iter().map(|i| FeatureId::difficulty(i + 1)).collect();
    let weights: Vec<i32> = (0..k)
        .map(|_| {
            let m = rng.gen_range(1..=MAX_WEIGHT);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect();
    let p_one = f64::from(LIKERT_MAX - label_threshold) / f64::from(LIKERT_MAX + 1);
    let threshold = balanced_cut(&weights, p_one);
    (features, weights, threshold)
}

fn observed_rows(seed: u64, column: FeatureId, n: usize, rate: f64) -> Vec<bool> {
    let mut observed = alloc::vec![true; n];
    let n_missing = libm::round(rate * n as f64) as usize;
    if n_missing > 0 {
        let mut rng = rng_from_seed(derive_seed(seed, &[&format!("{column}"), "missing"]));
        for i in sample(&mut rng, n, n_missing.min(n)) {
            observed[i] = false;
        }
    }
    observed
}

pub fn generate(spec: &PlantSpec) -> Result<(Dataset, PlantManifest), PlantError> {
    spec.validate()?;
    let n = spec.n_students;
    let mut rng = rng_from_seed(derive_seed(spec.seed, &["difficulties"]));
    let difficulties: Vec<[u8; N_DIFFICULTIES]> = (0..n)
        .map(|_| core::array::from_fn(|_| rng.gen_range(0..=LIKERT_MAX)))
        .collect();

    let mut records: Vec<SurveyRecord> = (0..n).map(|i| SurveyRecord::new(format!("s{:04}", i + 1))).collect();
    for id in FeatureId::difficulties() {
        let rate = spec.missing.get(&id).copied().unwrap_or(0.0);
        let observed = observed_rows(spec.seed, id, n, rate);
        for (i, r) in records.iter_mut().enumerate() {
            let v = difficulties[i][id.number() - 1];
            r.set(id, observed[i].then(|| Likert::new(v).expect("in range")));
        }
    }

    let thr = spec.label_threshold;
    let mut rules = Vec::new();
    for target in FeatureId::targets() {
        let (features, weights, threshold) = plant_rule(spec.seed, target, spec.label_threshold);
        let mut rule = PlantedRule {
            target,
            features,
            weights,
            input_cut: thr,
            threshold,
            bayes_rate: 1.0 - spec.label_noise,
            rule_ccr: 0.0,
            positive_rate: 0.0,
            missing_rate: 0.0,
        };
        let truth: Vec<u8> = difficulties.iter().map(|d| rule.label(d)).collect();

        let rate = spec.missing.get(&target).copied().unwrap_or(0.0);
        let observed = observed_rows(spec.seed, target, n, rate);
        let obs_idx: Vec<usize> = (0..n).filter(|&i| observed[i]).collect();
        let mut labels = truth.clone();
        let n_flip = libm::round(spec.label_noise * obs_idx.len() as f64) as usize;
        let mut rng = rng_from_seed(derive_seed(spec.seed, &[&format!("{target}"), "noise"]));
        for j in sample(&mut rng, obs_idx.len(), n_flip) {
            labels[obs_idx[j]] ^= 1;
        }

        let mut rng = rng_from_seed(derive_seed(spec.seed, &[&format!("{target}"), "values"]));
        let mut agree = 0usize;
        let mut positive = 0usize;
        for &i in &obs_idx {
            let v = if labels[i] == 1 {
                rng.gen_range(thr + 1..=LIKERT_MAX)
            } else {
                rng.gen_range(0..=thr)
            };
            records[i].set(target, Some(Likert::new(v).expect("in range")));
            agree += usize::from(labels[i] == truth[i]);
            positive += usize::from(labels[i]);
        }
        let m = obs_idx.len().max(1) as f64;
        rule.rule_ccr = agree as f64 / m;
        rule.positive_rate = positive as f64 / m;
        rule.missing_rate = (n - obs_idx.len()) as f64 / n as f64;
        rules.push(rule);
    }

    let dataset = Dataset::new(FeatureCatalog::standard(), records)?;
    Ok((
        dataset,
        PlantManifest {
            spec: spec.clone(),
            rules,
        },
    ))
}

/// Difficulty values of a record, `None` if any is missing.
pub fn difficulty_vector(record: &SurveyRecord) -> Option<Vec<u8>> {
    record.difficulties().iter().map(|d| d.map(Likert::value)).collect()
}

/// Rendered rule, e.g. `2*[P1>1] - [P5>1] > 0.5`.
pub fn describe_rule(rule: &PlantedRule) -> String {
    let mut out = String::new();
    for (i, (f, &w)) in rule.features.iter().zip(&rule.weights).enumerate() {
        let sign = if w < 0 { "-" } else if i > 0 { "+" } else { "" };
        if i > 0 {
            out.push(' ');
        }
        out.push_str(sign);
        if i > 0 && !sign.is_empty() {
            out.push(' ');
        }
        if w.abs() != 1 {
            out.push_str(&format!("{}*", w.abs()));
        }
        out.push_str(&format!("[{f}>{}]", rule.input_cut));
    }
    out.push_str(&format!(" > {}", rule.threshold));
    out
}
