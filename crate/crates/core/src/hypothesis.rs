//! Hypothesis records, fold partitions and per-fold weight normalization.

use std::collections::HashMap;

use rand::seq::SliceRandom;

use crate::error::{IhwError, Result};
use crate::rng;

/// Side information attached to one hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariate {
    Numeric(f64),
    Categorical(String),
}

/// Covariates of a whole table; one kind per table.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariates {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl Covariates {
    pub fn len(&self) -> usize {
        match self {
            Covariates::Numeric(v) => v.len(),
            Covariates::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> Covariate {
        match self {
            Covariates::Numeric(v) => Covariate::Numeric(v[i]),
            Covariates::Categorical(v) => Covariate::Categorical(v[i].clone()),
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self, Covariates::Categorical(_))
    }
}

/// One raw input row: p-value, covariate and an optional 1-based fold label.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisRow {
    pub pvalue: f64,
    pub covariate: Covariate,
    pub fold: Option<usize>,
}

impl HypothesisRow {
    pub fn new(pvalue: f64, covariate: Covariate, fold: Option<usize>) -> Self {
        HypothesisRow { pvalue, covariate, fold }
    }
}

/// Validated (p-value, covariate) pairs, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisTable {
    pvalues: Vec<f64>,
    covariates: Covariates,
    fold_labels: Option<Vec<usize>>,
}

impl HypothesisTable {
    /// Builds a table from columns. Fold labels are 1-based.
    pub fn new(
        pvalues: Vec<f64>,
        covariates: Covariates,
        fold_labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        if pvalues.is_empty() {
            return Err(IhwError::EmptyInput);
        }
        crate::error::check_len(pvalues.len(), covariates.len())?;
        for (index, &value) in pvalues.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(IhwError::PValueOutOfRange { index, value });
            }
        }
        if let Covariates::Numeric(x) = &covariates {
            if let Some(i) = x.iter().position(|v| !v.is_finite()) {
                return Err(IhwError::InvalidConfig(format!(
                    "covariate at index {i} is not finite"
                )));
            }
        }
        if let Some(labels) = &fold_labels {
            crate::error::check_len(pvalues.len(), labels.len())?;
            check_fold_labels(labels)?;
        }
        Ok(HypothesisTable {
            pvalues,
            covariates,
            fold_labels,
        })
    }

    pub fn m(&self) -> usize {
        self.pvalues.len()
    }

    pub fn pvalues(&self) -> &[f64] {
        &self.pvalues
    }

    pub fn covariates(&self) -> &Covariates {
        &self.covariates
    }

    pub fn fold_labels(&self) -> Option<&[usize]> {
        self.fold_labels.as_deref()
    }

    /// Same covariates and folds with different p-values.
    pub fn with_pvalues(&self, pvalues: Vec<f64>) -> Result<Self> {
        HypothesisTable::new(pvalues, self.covariates.clone(), self.fold_labels.clone())
    }
}

fn check_fold_labels(labels: &[usize]) -> Result<usize> {
    let mut k = 0;
    for (index, &label) in labels.iter().enumerate() {
        if label == 0 {
            return Err(IhwError::InvalidFoldLabel { index, label });
        }
        k = k.max(label);
    }
    let mut seen = vec![false; k];
    for &label in labels {
        seen[label - 1] = true;
    }
    if let Some(empty) = seen.iter().position(|s| !s) {
        return Err(IhwError::EmptyFold { fold: empty + 1 });
    }
    Ok(k)
}

/// Validates raw rows into a table, preserving their order.
pub fn validate_table(rows: &[HypothesisRow]) -> Result<HypothesisTable> {
    if rows.is_empty() {
        return Err(IhwError::EmptyInput);
    }
    let pvalues: Vec<f64> = rows.iter().map(|r| r.pvalue).collect();
    let covariates = match &rows[0].covariate {
        Covariate::Numeric(_) => Covariates::Numeric(
            rows.iter()
                .map(|r| match &r.covariate {
                    Covariate::Numeric(x) => Ok(*x),
                    Covariate::Categorical(_) => Err(IhwError::MixedCovariateKinds),
                })
                .collect::<Result<_>>()?,
        ),
        Covariate::Categorical(_) => Covariates::Categorical(
            rows.iter()
                .map(|r| match &r.covariate {
                    Covariate::Categorical(x) => Ok(x.clone()),
                    Covariate::Numeric(_) => Err(IhwError::MixedCovariateKinds),
                })
                .collect::<Result<_>>()?,
        ),
    };
    let labelled = rows.iter().filter(|r| r.fold.is_some()).count();
    let fold_labels = match labelled {
        0 => None,
        n if n == rows.len() => Some(rows.iter().map(|r| r.fold.unwrap()).collect()),
        _ => return Err(IhwError::MissingFoldLabels),
    };
    HypothesisTable::new(pvalues, covariates, fold_labels)
}

/// How hypotheses were assigned to folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldStrategy {
    UserSupplied,
    Random { seed: u64 },
}

/// A partition of the hypotheses into `n_folds` nonempty folds.
///
/// Assignments are stored 0-based; user-facing labels are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPartition {
    assignments: Vec<usize>,
    n_folds: usize,
    strategy: FoldStrategy,
}

impl FoldPartition {
    /// Partition from 0-based fold indices.
    pub fn from_assignments(
        assignments: Vec<usize>,
        n_folds: usize,
        strategy: FoldStrategy,
    ) -> Result<Self> {
        let mut sizes = vec![0usize; n_folds];
        for (index, &a) in assignments.iter().enumerate() {
            if a >= n_folds {
                return Err(IhwError::InvalidFoldLabel { index, label: a + 1 });
            }
            sizes[a] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(IhwError::EmptyFold { fold: empty + 1 });
        }
        Ok(FoldPartition {
            assignments,
            n_folds,
            strategy,
        })
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn n_folds(&self) -> usize {
        self.n_folds
    }

    pub fn m(&self) -> usize {
        self.assignments.len()
    }

    pub fn strategy(&self) -> FoldStrategy {
        self.strategy
    }

    pub fn fold_of(&self, i: usize) -> usize {
        self.assignments[i]
    }

    /// Indices of the hypotheses in each fold, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_folds];
        for (i, &a) in self.assignments.iter().enumerate() {
            out[a].push(i);
        }
        out
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_folds];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Splits the table into `n_folds` folds (the IHW split step).
///
/// A random split is a seeded shuffle dealt round-robin, so fold sizes
/// differ by at most one and the result depends only on `(m, n_folds, seed)`.
pub fn split_folds(
    table: &HypothesisTable,
    n_folds: usize,
    strategy: FoldStrategy,
) -> Result<FoldPartition> {
    if n_folds < 2 {
        return Err(IhwError::InvalidConfig(format!(
            "need at least 2 folds, got {n_folds}"
        )));
    }
    let m = table.m();
    if m < n_folds {
        return Err(IhwError::TooFewHypotheses { m, folds: n_folds });
    }
    match strategy {
        FoldStrategy::UserSupplied => {
            let labels = table.fold_labels().ok_or(IhwError::MissingFoldLabels)?;
            let k = labels.iter().copied().max().unwrap_or(0);
            if k != n_folds {
                return Err(IhwError::ConfigMismatch(format!(
                    "fold column has {k} folds but {n_folds} were requested"
                )));
            }
            FoldPartition::from_assignments(
                labels.iter().map(|l| l - 1).collect(),
                n_folds,
                strategy,
            )
        }
        FoldStrategy::Random { seed } => Ok(random_partition(m, n_folds, seed)),
    }
}

pub(crate) fn random_partition(m: usize, n_folds: usize, seed: u64) -> FoldPartition {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng::substream(seed, 0));
    let mut assignments = vec![0; m];
    for (pos, &i) in order.iter().enumerate() {
        assignments[i] = pos % n_folds;
    }
    FoldPartition {
        assignments,
        n_folds,
        strategy: FoldStrategy::Random { seed },
    }
}

/// Nonnegative hypothesis weights.
///
/// When `partition` is set the weights average exactly one inside every fold;
/// weights averaged over several splits carry no partition and only keep the
/// global budget `sum = m`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
    partition: Option<FoldPartition>,
}

impl WeightVector {
    pub fn uniform(m: usize) -> Self {
        WeightVector {
            weights: vec![1.0; m],
            partition: None,
        }
    }

    /// Wraps weights whose budget is only global (e.g. averaged weights).
    pub fn with_global_budget(weights: Vec<f64>) -> Result<Self> {
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(IhwError::NegativeWeight { index, value });
            }
        }
        Ok(WeightVector {
            weights,
            partition: None,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn partition(&self) -> Option<&FoldPartition> {
        self.partition.as_ref()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.weights
    }

    /// Largest deviation of a fold mean from one (0 without a partition).
    pub fn max_fold_mean_error(&self) -> f64 {
        let Some(partition) = &self.partition else {
            return 0.0;
        };
        partition
            .members()
            .iter()
            .map(|fold| {
                let mean = fold.iter().map(|&i| self.weights[i]).sum::<f64>() / fold.len() as f64;
                (mean - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Rescales raw weights to mean one within each fold (the IHW normalize step).
///
/// A fold whose raw weights are all zero gets unit weights. A fold whose raw
/// weights are all equal also gets exact unit weights.
pub fn normalize_weights(raw: &[f64], partition: &FoldPartition) -> Result<WeightVector> {
    crate::error::check_len(partition.m(), raw.len())?;
    for (index, &value) in raw.iter().enumerate() {
        if !(value.is_finite() && value >= 0.0) {
            return Err(IhwError::NegativeWeight { index, value });
        }
    }
    let mut weights = vec![0.0; raw.len()];
    for fold in partition.members() {
        let first = raw[fold[0]];
        let total: f64 = fold.iter().map(|&i| raw[i]).sum();
        if total == 0.0 || fold.iter().all(|&i| raw[i] == first) {
            for &i in &fold {
                weights[i] = 1.0;
            }
        } else {
            let n = fold.len() as f64;
            for &i in &fold {
                weights[i] = n * raw[i] / total;
            }
        }
    }
    Ok(WeightVector {
        weights,
        partition: Some(partition.clone()),
    })
}

/// Distinct categorical levels in order of first appearance.
pub(crate) fn levels(values: &[String]) -> (Vec<String>, Vec<usize>) {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut levels = Vec::new();
    let codes = values
        .iter()
        .map(|v| {
            *index.entry(v.as_str()).or_insert_with(|| {
                levels.push(v.clone());
                levels.len() - 1
            })
        })
        .collect();
    (levels, codes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(s: &str) -> Covariate {
        Covariate::Categorical(s.to_string())
    }

    fn numeric_table(m: usize) -> HypothesisTable {
        HypothesisTable::new(
            vec![0.5; m],
            Covariates::Numeric((0..m).map(|i| i as f64).collect()),
            None,
        )
        .unwrap()
    }

    #[test]
    fn single_row_validates() {
        let t = validate_table(&[HypothesisRow::new(0.5, cat("A"), Some(1))]).unwrap();
        assert_eq!(t.m(), 1);
        assert_eq!(t.fold_labels(), Some(&[1][..]));
    }

    #[test]
    fn out_of_range_pvalue_is_rejected() {
        let err = validate_table(&[HypothesisRow::new(1.2, cat("A"), Some(1))]).unwrap_err();
        assert_eq!(err, IhwError::PValueOutOfRange { index: 0, value: 1.2 });
        let err = validate_table(&[HypothesisRow::new(f64::NAN, cat("A"), None)]).unwrap_err();
        assert!(matches!(err, IhwError::PValueOutOfRange { index: 0, .. }));
    }

    #[test]
    fn mixed_covariates_are_rejected() {
        let rows = [
            HypothesisRow::new(0.1, Covariate::Numeric(3.0), Some(1)),
            HypothesisRow::new(0.2, cat("B"), Some(1)),
        ];
        assert_eq!(validate_table(&rows).unwrap_err(), IhwError::MixedCovariateKinds);
    }

    #[test]
    fn gap_in_fold_labels_is_an_empty_fold() {
        let rows = [
            HypothesisRow::new(0.1, cat("A"), Some(1)),
            HypothesisRow::new(0.2, cat("B"), Some(3)),
        ];
        assert_eq!(validate_table(&rows).unwrap_err(), IhwError::EmptyFold { fold: 2 });
    }

    #[test]
    fn partially_labelled_rows_are_rejected() {
        let rows = [
            HypothesisRow::new(0.1, cat("A"), Some(1)),
            HypothesisRow::new(0.2, cat("B"), None),
        ];
        assert_eq!(validate_table(&rows).unwrap_err(), IhwError::MissingFoldLabels);
    }

    #[test]
    fn extreme_pvalues_are_accepted() {
        let rows = [
            HypothesisRow::new(0.0, cat("A"), None),
            HypothesisRow::new(1.0, cat("B"), None),
        ];
        assert_eq!(validate_table(&rows).unwrap().m(), 2);
    }

    #[test]
    fn user_folds_pass_through() {
        let t = HypothesisTable::new(
            vec![0.5; 6],
            Covariates::Numeric(vec![0.0; 6]),
            Some(vec![1, 1, 1, 2, 2, 2]),
        )
        .unwrap();
        let p = split_folds(&t, 2, FoldStrategy::UserSupplied).unwrap();
        assert_eq!(p.members(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn user_strategy_needs_labels() {
        let t = numeric_table(6);
        assert_eq!(
            split_folds(&t, 2, FoldStrategy::UserSupplied).unwrap_err(),
            IhwError::MissingFoldLabels
        );
    }

    #[test]
    fn random_split_is_balanced_and_reproducible() {
        let t = numeric_table(5);
        let a = split_folds(&t, 2, FoldStrategy::Random { seed: 11 }).unwrap();
        let b = split_folds(&t, 2, FoldStrategy::Random { seed: 11 }).unwrap();
        assert_eq!(a, b);
        let mut sizes = a.fold_sizes();
        sizes.sort();
        assert_eq!(sizes, vec![2, 3]);
    }

    #[test]
    fn more_folds_than_hypotheses() {
        let t = numeric_table(4);
        assert_eq!(
            split_folds(&t, 5, FoldStrategy::Random { seed: 1 }).unwrap_err(),
            IhwError::TooFewHypotheses { m: 4, folds: 5 }
        );
    }

    #[test]
    fn normalize_scales_to_mean_one() {
        let p = FoldPartition::from_assignments(vec![0, 0, 0], 1, FoldStrategy::UserSupplied)
            .unwrap();
        let w = normalize_weights(&[2.0, 0.0, 4.0], &p).unwrap();
        assert_eq!(w.weights(), &[1.0, 0.0, 2.0]);
    }

    #[test]
    fn all_zero_fold_becomes_uniform() {
        let p = FoldPartition::from_assignments(vec![0, 0, 0], 1, FoldStrategy::UserSupplied)
            .unwrap();
        let w = normalize_weights(&[0.0, 0.0, 0.0], &p).unwrap();
        assert_eq!(w.weights(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn folds_normalize_independently() {
        let p = FoldPartition::from_assignments(vec![0, 0, 1], 2, FoldStrategy::UserSupplied)
            .unwrap();
        let w = normalize_weights(&[1.0, 3.0, 5.0], &p).unwrap();
        assert_eq!(w.weights(), &[0.5, 1.5, 1.0]);
    }

    #[test]
    fn negative_weight_is_rejected() {
        let p = FoldPartition::from_assignments(vec![0, 0], 1, FoldStrategy::UserSupplied)
            .unwrap();
        assert!(matches!(
            normalize_weights(&[1.0, -1.0], &p),
            Err(IhwError::NegativeWeight { index: 1, .. })
        ));
    }

    #[test]
    fn levels_follow_first_appearance() {
        let v: Vec<String> = ["B", "A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let (levels, codes) = levels(&v);
        assert_eq!(levels, vec!["B", "A", "C"]);
        assert_eq!(codes, vec![0, 1, 0, 2]);
    }
}
