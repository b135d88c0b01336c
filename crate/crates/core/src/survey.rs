//! Survey records, the dataset they form, sparse-target dropping and
//! threshold binarization.
//!
//! A target value `v` becomes label 1 exactly when `v > threshold`. The same
//! strict rule binarizes the difficulty inputs when requested.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{FeatureCatalog, FeatureId, FeatureKind, N_DIFFICULTIES, N_TARGETS};
use crate::fingerprint::Fnv64;
use crate::matrix::Matrix;

pub const LIKERT_MAX: u8 = 5;
/// Default missing-rate cut for [`Dataset::drop_sparse_targets`].
pub const DEFAULT_MAX_MISSING_RATE: f64 = 0.5;

/// An answer on the 0–5 scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Likert(u8);

impl Likert {
    pub fn new(value: u8) -> Option<Likert> {
        (value <= LIKERT_MAX).then_some(Likert(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Likert {
    type Error = SurveyError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Likert::new(value).ok_or(SurveyError::OutOfRange(value))
    }
}

impl From<Likert> for u8 {
    fn from(l: Likert) -> u8 {
        l.0
    }
}

impl fmt::Display for Likert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Label rule shared by targets and binarized inputs.
pub fn binarize_value(value: u8, threshold: u8) -> u8 {
    u8::from(value > threshold)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurveyError {
    #[error("Likert value {0} is outside 0..=5")]
    OutOfRange(u8),
    #[error("dataset has no records")]
    EmptyDataset,
    #[error("student id '{0}' appears more than once")]
    DuplicateStudent(String),
    #[error("record has {found} {what} slots, expected {expected}")]
    WrongArity {
        what: &'static str,
        found: usize,
        expected: usize,
    },
    #[error("threshold {0} is outside 0..=5")]
    ThresholdOutOfRange(u8),
    #[error("max missing rate {0} must lie strictly between 0 and 1")]
    InvalidMissingRate(f64),
    #[error("every target exceeds the missing-rate limit {0}")]
    AllTargetsDropped(f64),
    #[error("target {0} is not active in this view")]
    InactiveTarget(FeatureId),
    #[error("{0} is a difficulty, not a target")]
    NotATarget(FeatureId),
    #[error("target {0} has no labelled rows")]
    NoLabels(FeatureId),
    #[error("no rows left after applying the missing-difficulty policy")]
    NoUsableRows,
}

/// One student's answers. Missing answers are `None`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub student_id: String,
    difficulties: Vec<Option<Likert>>,
    targets: Vec<Option<Likert>>,
}

impl SurveyRecord {
    /// A record with every answer missing.
    pub fn new(student_id: impl Into<String>) -> Self {
        SurveyRecord {
            student_id: student_id.into(),
            difficulties: alloc::vec![None; N_DIFFICULTIES],
            targets: alloc::vec![None; N_TARGETS],
        }
    }

    pub fn get(&self, id: FeatureId) -> Option<Likert> {
        match id.target_index() {
            Some(t) => self.targets[t],
            None => self.difficulties[id.number() - 1],
        }
    }

    pub fn set(&mut self, id: FeatureId, value: Option<Likert>) {
        match id.target_index() {
            Some(t) => self.targets[t] = value,
            None => self.difficulties[id.number() - 1] = value,
        }
    }

    pub fn with(mut self, id: FeatureId, value: u8) -> Self {
        self.set(id, Some(Likert::new(value).expect("Likert value out of range")));
        self
    }

    pub fn difficulties(&self) -> &[Option<Likert>] {
        &self.difficulties
    }

    pub fn has_all_difficulties(&self) -> bool {
        self.difficulties.iter().all(Option::is_some)
    }

    fn check_arity(&self) -> Result<(), SurveyError> {
        if self.difficulties.len() != N_DIFFICULTIES {
            return Err(SurveyError::WrongArity {
                what: "difficulty",
                found: self.difficulties.len(),
                expected: N_DIFFICULTIES,
            });
        }
        if self.targets.len() != N_TARGETS {
            return Err(SurveyError::WrongArity {
                what: "target",
                found: self.targets.len(),
                expected: N_TARGETS,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DatasetRepr {
    catalog: FeatureCatalog,
    records: Vec<SurveyRecord>,
    dropped_targets: BTreeMap<FeatureId, f64>,
}

/// An immutable, validated table of survey records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRepr", into = "DatasetRepr")]
pub struct Dataset {
    catalog: FeatureCatalog,
    records: Vec<SurveyRecord>,
    /// Missing rate per column, difficulties first, then the 39 targets.
    missing_rates: Vec<f64>,
    dropped_targets: BTreeMap<FeatureId, f64>,
}

impl TryFrom<DatasetRepr> for Dataset {
    type Error = SurveyError;

    fn try_from(repr: DatasetRepr) -> Result<Self, Self::Error> {
        let mut ds = Dataset::new(repr.catalog, repr.records)?;
        for id in repr.dropped_targets.keys() {
            if !id.is_target() {
                return Err(SurveyError::NotATarget(*id));
            }
            ds.dropped_targets.insert(*id, ds.missing_rate(*id));
        }
        Ok(ds)
    }
}

impl From<Dataset> for DatasetRepr {
    fn from(ds: Dataset) -> Self {
        DatasetRepr {
            catalog: ds.catalog,
            records: ds.records,
            dropped_targets: ds.dropped_targets,
        }
    }
}

fn column_index(id: FeatureId) -> usize {
    match id.target_index() {
        Some(t) => N_DIFFICULTIES + t,
        None => id.number() - 1,
    }
}

impl Dataset {
    /// Validates records and computes per-column missing rates. No target is
    /// dropped here; see [`Dataset::drop_sparse_targets`].
    pub fn new(catalog: FeatureCatalog, records: Vec<SurveyRecord>) -> Result<Self, SurveyError> {
        if records.is_empty() {
            return Err(SurveyError::EmptyDataset);
        }
        let mut seen = BTreeSet::new();
        for r in &records {
            r.check_arity()?;
            if !seen.insert(r.student_id.as_str()) {
                return Err(SurveyError::DuplicateStudent(r.student_id.clone()));
            }
        }
        let n = records.len() as f64;
        let missing_rates = FeatureId::difficulties()
            .chain(FeatureId::targets())
            .map(|id| records.iter().filter(|r| r.get(id).is_none()).count() as f64 / n)
            .collect();
        Ok(Dataset {
            catalog,
            records,
            missing_rates,
            dropped_targets: BTreeMap::new(),
        })
    }

    pub fn catalog(&self) -> &FeatureCatalog {
        &self.catalog
    }

    pub fn records(&self) -> &[SurveyRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn missing_rate(&self, id: FeatureId) -> f64 {
        self.missing_rates[column_index(id)]
    }

    /// Dropped targets with the missing rate that caused the drop.
    pub fn dropped_targets(&self) -> &BTreeMap<FeatureId, f64> {
        &self.dropped_targets
    }

    /// Targets not dropped, in catalog order.
    pub fn active_targets(&self) -> Vec<FeatureId> {
        FeatureId::targets()
            .filter(|id| !self.dropped_targets.contains_key(id))
            .collect()
    }

    pub fn is_active(&self, id: FeatureId) -> bool {
        id.is_target() && !self.dropped_targets.contains_key(&id)
    }

    /// Moves every target whose missing rate exceeds `max_missing_rate` into
    /// the dropped set. Difficulty columns are never dropped and record order
    /// is untouched.
    pub fn drop_sparse_targets(mut self, max_missing_rate: f64) -> Result<Self, SurveyError> {
        if !(max_missing_rate > 0.0 && max_missing_rate < 1.0) {
            return Err(SurveyError::InvalidMissingRate(max_missing_rate));
        }
        let sparse: Vec<(FeatureId, f64)> = FeatureId::targets()
            .map(|id| (id, self.missing_rate(id)))
            .filter(|&(_, rate)| rate > max_missing_rate)
            .collect();
        let still_active = FeatureId::targets()
            .filter(|id| !self.dropped_targets.contains_key(id))
            .filter(|id| !sparse.iter().any(|(s, _)| s == id))
            .count();
        if still_active == 0 {
            return Err(SurveyError::AllTargetsDropped(max_missing_rate));
        }
        self.dropped_targets.extend(sparse);
        Ok(self)
    }

    /// Content hash over catalog labels, records and the dropped set.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv64::new();
        for (id, label) in self.catalog.entries() {
            h.usize(column_index(id));
            h.str(label);
        }
        for r in &self.records {
            h.str(&r.student_id);
            for v in r.difficulties.iter().chain(&r.targets) {
                h.bytes(&[v.map_or(0xff, Likert::value)]);
            }
        }
        for id in self.dropped_targets.keys() {
            h.usize(column_index(*id));
        }
        h.finish()
    }

    /// Thresholded 0/1 projection; see [`BinaryView`].
    pub fn binarize(
        &self,
        threshold: u8,
        inputs_binarized: bool,
        impute: ImputePolicy,
    ) -> Result<BinaryView, SurveyError> {
        if threshold > LIKERT_MAX {
            return Err(SurveyError::ThresholdOutOfRange(threshold));
        }
        let medians: Vec<f64> = match impute {
            ImputePolicy::DropRow => Vec::new(),
            ImputePolicy::Median => FeatureId::difficulties()
                .map(|id| column_median(&self.records, id))
                .collect(),
        };

        let mut source_rows = Vec::new();
        let mut data = Vec::with_capacity(self.records.len() * N_DIFFICULTIES);
        for (row, record) in self.records.iter().enumerate() {
            if !record.has_all_difficulties() && impute == ImputePolicy::DropRow {
                continue;
            }
            source_rows.push(row);
            for (j, v) in record.difficulties.iter().enumerate() {
                let raw = match v {
                    Some(l) => f64::from(l.value()),
                    None => medians[j],
                };
                data.push(if inputs_binarized {
                    if raw > f64::from(threshold) { 1.0 } else { 0.0 }
                } else {
                    raw
                });
            }
        }
        if source_rows.is_empty() {
            return Err(SurveyError::NoUsableRows);
        }

        let targets = self.active_targets();
        let labels = targets
            .iter()
            .map(|&id| {
                source_rows
                    .iter()
                    .map(|&r| self.records[r].get(id).map(|v| binarize_value(v.value(), threshold)))
                    .collect()
            })
            .collect();

        Ok(BinaryView {
            source_fingerprint: self.fingerprint(),
            threshold,
            inputs_binarized,
            impute,
            x: Matrix::from_vec(source_rows.len(), N_DIFFICULTIES, data),
            source_rows,
            targets,
            labels,
        })
    }
}

/// Median over the present values of one column; 0 when the column is
/// entirely missing.
fn column_median(records: &[SurveyRecord], id: FeatureId) -> f64 {
    let mut values: Vec<u8> = records.iter().filter_map(|r| r.get(id)).map(Likert::value).collect();
    if values.is_empty() {
        return 0.0;
    }
    values.sort_unstable();
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        f64::from(values[m])
    } else {
        (f64::from(values[m - 1]) + f64::from(values[m])) / 2.0
    }
}

/// What to do with rows missing a difficulty answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImputePolicy {
    #[default]
    DropRow,
    /// Fill with the column median over all records that answered.
    Median,
}

/// The thresholded projection of a [`Dataset`].
///
/// `x` has one row per kept record (raw 0–5 values, or 0/1 when
/// `inputs_binarized`). Each active target carries one label per row; a
/// `None` label means the student skipped that item.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryView {
    pub source_fingerprint: u64,
    pub threshold: u8,
    pub inputs_binarized: bool,
    pub impute: ImputePolicy,
    x: Matrix,
    source_rows: Vec<usize>,
    targets: Vec<FeatureId>,
    labels: Vec<Vec<Option<u8>>>,
}

/// The single-output problem for one target: rows whose target answer is
/// present.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetProblem {
    pub target: FeatureId,
    pub x: Matrix,
    pub y: Vec<u8>,
    /// Dataset record index of each problem row.
    pub source_rows: Vec<usize>,
}

impl BinaryView {
    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn targets(&self) -> &[FeatureId] {
        &self.targets
    }

    /// Dataset record index of each view row.
    pub fn source_rows(&self) -> &[usize] {
        &self.source_rows
    }

    pub fn labels(&self, target: FeatureId) -> Result<&[Option<u8>], SurveyError> {
        let pos = self
            .targets
            .iter()
            .position(|&t| t == target)
            .ok_or(SurveyError::InactiveTarget(target))?;
        Ok(&self.labels[pos])
    }

    pub fn problem(&self, target: FeatureId) -> Result<TargetProblem, SurveyError> {
        let labels = self.labels(target)?;
        let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i].is_some()).collect();
        if rows.is_empty() {
            return Err(SurveyError::NoLabels(target));
        }
        Ok(TargetProblem {
            target,
            x: self.x.select_rows(&rows),
            y: rows.iter().map(|&i| labels[i].unwrap_or(0)).collect(),
            source_rows: rows.iter().map(|&i| self.source_rows[i]).collect(),
        })
    }

    /// Fraction of positive labels among the rows that answered `target`.
    pub fn class_balance(&self, target: FeatureId) -> Result<f64, SurveyError> {
        let labels = self.labels(target)?;
        let (n, pos) = labels.iter().flatten().fold((0usize, 0usize), |(n, p), &y| (n + 1, p + y as usize));
        if n == 0 {
            return Err(SurveyError::NoLabels(target));
        }
        Ok(pos as f64 / n as f64)
    }
}

/// Targets of one kind, in catalog order.
pub fn targets_of_kind(targets: &[FeatureId], kind: FeatureKind) -> impl Iterator<Item = FeatureId> + '_ {
    targets.iter().copied().filter(move |t| t.kind() == kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use proptest::prelude::*;

    fn full_record(id: &str, value: u8) -> SurveyRecord {
        let mut r = SurveyRecord::new(id);
        for f in FeatureId::difficulties().chain(FeatureId::targets()) {
            r.set(f, Likert::new(value));
        }
        r
    }

    /// 10 rows, T4 missing in the first 6.
    fn t4_fixture() -> Dataset {
        let records = (0..10)
            .map(|i| {
                let mut r = full_record(&format!("s{i}"), (i % 6) as u8);
                if i < 6 {
                    r.set(FeatureId::tool(4), None);
                }
                r
            })
            .collect();
        Dataset::new(FeatureCatalog::standard(), records).unwrap()
    }

    #[test]
    fn likert_range() {
        assert!(Likert::new(5).is_some());
        assert!(Likert::new(6).is_none());
        assert_eq!(Likert::try_from(7), Err(SurveyError::OutOfRange(7)));
    }

    #[test]
    fn well_formed_dataset_drops_nothing() {
        let ds = Dataset::new(
            FeatureCatalog::standard(),
            (0..3).map(|i| full_record(&format!("s{i}"), i as u8)).collect(),
        )
        .unwrap()
        .drop_sparse_targets(DEFAULT_MAX_MISSING_RATE)
        .unwrap();
        assert_eq!(ds.len(), 3);
        assert!(ds.dropped_targets().is_empty());
        assert_eq!(ds.active_targets().len(), 39);
    }

    #[test]
    fn sparse_target_rate_comparison() {
        let ds = t4_fixture();
        assert!((ds.missing_rate(FeatureId::tool(4)) - 0.6).abs() < 1e-12);

        let dropped = ds.clone().drop_sparse_targets(0.5).unwrap();
        assert!(dropped.dropped_targets().contains_key(&FeatureId::tool(4)));
        assert_eq!(dropped.active_targets().len(), 38);
        assert!(!dropped.is_active(FeatureId::tool(4)));

        let kept = ds.clone().drop_sparse_targets(0.7).unwrap();
        assert!(kept.dropped_targets().is_empty());

        let unchanged = ds.clone().drop_sparse_targets(0.999).unwrap();
        assert_eq!(unchanged, ds);
    }

    #[test]
    fn invalid_rate_and_all_dropped() {
        let ds = t4_fixture();
        assert!(matches!(ds.clone().drop_sparse_targets(0.0), Err(SurveyError::InvalidMissingRate(_))));
        assert!(matches!(ds.clone().drop_sparse_targets(1.0), Err(SurveyError::InvalidMissingRate(_))));

        let mut r = SurveyRecord::new("only");
        for d in FeatureId::difficulties() {
            r.set(d, Likert::new(1));
        }
        let empty_targets = Dataset::new(FeatureCatalog::standard(), alloc::vec![r]).unwrap();
        assert_eq!(
            empty_targets.drop_sparse_targets(0.5),
            Err(SurveyError::AllTargetsDropped(0.5))
        );
    }

    #[test]
    fn empty_and_duplicate_datasets_rejected() {
        assert_eq!(
            Dataset::new(FeatureCatalog::standard(), Vec::new()),
            Err(SurveyError::EmptyDataset)
        );
        let dup = alloc::vec![full_record("a", 1), full_record("a", 2)];
        assert_eq!(
            Dataset::new(FeatureCatalog::standard(), dup),
            Err(SurveyError::DuplicateStudent("a".into()))
        );
    }

    #[test]
    fn boundary_labels() {
        assert_eq!(binarize_value(3, 1), 1);
        assert_eq!(binarize_value(4, 4), 0);
        assert_eq!(binarize_value(0, 0), 0);
        assert_eq!(binarize_value(5, 4), 1);
        for t in 0..=5u8 {
            for v in 0..=5u8 {
                assert_eq!(binarize_value(v, t) == 1, v > t);
            }
        }
    }

    #[test]
    fn binarize_applies_rule_to_targets_and_inputs() {
        let ds = t4_fixture();
        let view = ds.binarize(2, true, ImputePolicy::DropRow).unwrap();
        assert_eq!(view.x().rows(), 10);
        for (i, row) in view.x().iter_rows().enumerate() {
            let raw = (i % 6) as u8;
            assert!(row.iter().all(|&v| v == f64::from(binarize_value(raw, 2))));
        }
        let t1 = view.labels(FeatureId::tool(1)).unwrap();
        assert_eq!(t1[3], Some(1));
        assert_eq!(t1[2], Some(0));
        let t4 = view.labels(FeatureId::tool(4)).unwrap();
        assert_eq!(t4[0], None);
        let problem = view.problem(FeatureId::tool(4)).unwrap();
        assert_eq!(problem.y.len(), 4);
        assert_eq!(problem.source_rows, alloc::vec![6, 7, 8, 9]);

        let raw_view = ds.binarize(2, false, ImputePolicy::DropRow).unwrap();
        assert_eq!(raw_view.x().row(5)[0], 5.0);
        assert_eq!(ds.binarize(6, false, ImputePolicy::DropRow), Err(SurveyError::ThresholdOutOfRange(6)));
    }

    #[test]
    fn missing_difficulty_policies() {
        let mut records: Vec<_> = (0..4).map(|i| full_record(&format!("s{i}"), i as u8)).collect();
        records[1].set(FeatureId::difficulty(3), None);
        let ds = Dataset::new(FeatureCatalog::standard(), records).unwrap();

        let dropped = ds.binarize(1, false, ImputePolicy::DropRow).unwrap();
        assert_eq!(dropped.source_rows(), &[0, 2, 3]);

        let imputed = ds.binarize(1, false, ImputePolicy::Median).unwrap();
        assert_eq!(imputed.source_rows(), &[0, 1, 2, 3]);
        // present values of P3 are 0, 2, 3 -> median 2
        assert_eq!(imputed.x().row(1)[2], 2.0);
        assert_eq!(imputed.x().row(1)[0], 1.0);
    }

    #[test]
    fn class_balance_values() {
        let records: Vec<_> = [3u8, 3, 0, 0]
            .iter()
            .enumerate()
            .map(|(i, &v)| full_record(&format!("s{i}"), v))
            .collect();
        let ds = Dataset::new(FeatureCatalog::standard(), records).unwrap();
        let view = ds.binarize(1, false, ImputePolicy::DropRow).unwrap();
        assert_eq!(view.class_balance(FeatureId::strategy(2)).unwrap(), 0.5);
        let view5 = ds.binarize(5, false, ImputePolicy::DropRow).unwrap();
        assert_eq!(view5.class_balance(FeatureId::strategy(2)).unwrap(), 0.0);

        let dropped = t4_fixture().drop_sparse_targets(0.5).unwrap();
        let v = dropped.binarize(1, false, ImputePolicy::DropRow).unwrap();
        assert_eq!(v.class_balance(FeatureId::tool(4)), Err(SurveyError::InactiveTarget(FeatureId::tool(4))));
    }

    #[test]
    fn serde_round_trip_revalidates() {
        let ds = t4_fixture().drop_sparse_targets(0.5).unwrap();
        let json = serde_json::to_string(&ds).unwrap();
        let back: Dataset = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.fingerprint(), ds.fingerprint());

        let bad = json.replacen("\"s1\"", "\"s0\"", 1);
        assert!(serde_json::from_str::<Dataset>(&bad).is_err());
    }

    fn arb_dataset() -> impl Strategy<Value = Dataset> {
        proptest::collection::vec(proptest::collection::vec(proptest::option::weighted(0.9, 0u8..=5), 51), 1..20)
            .prop_map(|rows| {
                let records = rows
                    .into_iter()
                    .enumerate()
                    .map(|(i, vals)| {
                        let mut r = SurveyRecord::new(format!("s{i}"));
                        for (id, v) in FeatureId::difficulties().chain(FeatureId::targets()).zip(vals) {
                            r.set(id, v.and_then(Likert::new));
                        }
                        r
                    })
                    .collect();
                Dataset::new(FeatureCatalog::standard(), records).unwrap()
            })
    }

    proptest! {
        #[test]
        fn labels_nested_downward_in_threshold(ds in arb_dataset(), t in 0u8..5) {
            let lo = ds.binarize(t, false, ImputePolicy::Median).unwrap();
            let hi = ds.binarize(t + 1, false, ImputePolicy::Median).unwrap();
            for &target in lo.targets() {
                let a = lo.labels(target).unwrap();
                let b = hi.labels(target).unwrap();
                for (x, y) in a.iter().zip(b) {
                    prop_assert!(!(x == &Some(0) && y == &Some(1)));
                }
            }
        }

        #[test]
        fn threshold_five_is_all_zero(ds in arb_dataset()) {
            let v = ds.binarize(5, true, ImputePolicy::Median).unwrap();
            prop_assert!(v.x().as_slice().iter().all(|&x| x == 0.0));
            for &t in v.targets() {
                prop_assert!(v.labels(t).unwrap().iter().flatten().all(|&y| y == 0));
            }
        }

        #[test]
        fn drop_preserves_row_order(ds in arb_dataset(), rate in 0.05f64..0.95) {
            let before: Vec<String> = ds.records().iter().map(|r| r.student_id.clone()).collect();
            if let Ok(after) = ds.drop_sparse_targets(rate) {
                let ids: Vec<String> = after.records().iter().map(|r| r.student_id.clone()).collect();
                prop_assert_eq!(before, ids);
                for (id, r) in after.dropped_targets() {
                    prop_assert!(*r > rate);
                    prop_assert!(!after.active_targets().contains(id));
                }
            }
        }
    }
}
