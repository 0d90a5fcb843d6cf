//! Logistic-regression model selection over network features.

pub mod cv;
pub mod logistic;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cv::{
    balanced_indices, cross_validate, stratified_folds, stratified_kfold_cv, DEFAULT_FOLDS,
};
pub use logistic::{fit_logistic, gradient, objective, LogisticModel, LogisticParams};

use crate::{Error, Result};

pub const DEFAULT_MAX_FEATURES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
    /// Per-feature (mean, sd) used for standardisation; empty for raw designs.
    #[serde(default)]
    pub standardization: Vec<(f64, f64)>,
    /// Constant features removed by [`standardize`].
    #[serde(default)]
    pub dropped: Vec<String>,
}

impl Design {
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != feature_names.len() {
                return Err(Error::invalid(format!(
                    "row {i} has {} values, expected {}",
                    r.len(),
                    feature_names.len()
                )));
            }
            if let Some(v) = r.iter().find(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "row {i} holds non-finite value {v}"
                )));
            }
        }
        Ok(Self {
            feature_names,
            rows,
            labels,
            standardization: Vec::new(),
            dropped: Vec::new(),
        })
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Rows restricted to the feature indices in `subset`.
    pub fn project(&self, subset: &[usize]) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| subset.iter().map(|&j| r[j]).collect())
            .collect()
    }

    /// Rows at `indices`, in that order.
    pub fn subset_rows(&self, indices: &[usize]) -> Self {
        Self {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            standardization: self.standardization.clone(),
            dropped: self.dropped.clone(),
        }
    }
}

/// Column-wise z-scores with the sample standard deviation. Constant columns
/// are dropped and listed in `dropped`.
pub fn standardize(design: &Design) -> Result<Design> {
    if design.rows.len() < 2 {
        return Err(Error::invalid("standardisation needs at least 2 rows"));
    }
    let mut keep = Vec::new();
    let mut stats = Vec::new();
    let mut dropped = design.dropped.clone();
    for (j, name) in design.feature_names.iter().enumerate() {
        let col = design.column(j);
        let mean = crate::stats::mean(&col);
        let sd = crate::stats::sample_sd(&col);
        if sd <= 1e-12 * mean.abs().max(1.0) {
            log::warn!("dropping constant feature {name}");
            dropped.push(name.clone());
        } else {
            keep.push(j);
            stats.push((mean, sd));
        }
    }
    if keep.is_empty() {
        return Err(Error::invalid("every feature is constant"));
    }
    let rows = design
        .rows
        .iter()
        .map(|r| {
            keep.iter()
                .zip(&stats)
                .map(|(&j, (m, s))| (r[j] - m) / s)
                .collect()
        })
        .collect();
    Ok(Design {
        feature_names: keep
            .iter()
            .map(|&j| design.feature_names[j].clone())
            .collect(),
        rows,
        labels: design.labels.clone(),
        standardization: stats,
        dropped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub features: Vec<String>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub train_accuracy: f64,
    pub skf_accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionParams {
    pub folds: usize,
    pub max_features: usize,
    pub logistic: LogisticParams,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self {
            folds: DEFAULT_FOLDS,
            max_features: DEFAULT_MAX_FEATURES,
            logistic: LogisticParams::default(),
        }
    }
}

/// Fits `subset` on the whole design and scores it with the given folds.
pub fn evaluate_subset(
    design: &Design,
    subset: &[usize],
    folds: &[usize],
    params: &SelectionParams,
) -> Result<FitResult> {
    if subset.is_empty() {
        return Err(Error::invalid("feature subset is empty"));
    }
    let xs = design.project(subset);
    let model = fit_logistic(&xs, &design.labels, &params.logistic)?;
    let skf_accuracy = cross_validate(&xs, &design.labels, folds, params.folds, &params.logistic)?;
    Ok(FitResult {
        features: subset
            .iter()
            .map(|&j| design.feature_names[j].clone())
            .collect(),
        coefficients: model.coefficients.clone(),
        intercept: model.intercept,
        train_accuracy: model.accuracy(&xs, &design.labels),
        skf_accuracy,
    })
}

fn sorted_names(r: &FitResult) -> Vec<&str> {
    let mut v: Vec<&str> = r.features.iter().map(String::as_str).collect();
    v.sort_unstable();
    v
}

/// Preference order: higher SKF accuracy, then fewer features, then the
/// lexicographically smaller sorted feature-name list.
pub fn compare_fits(a: &FitResult, b: &FitResult) -> Ordering {
    b.skf_accuracy
        .total_cmp(&a.skf_accuracy)
        .then(a.features.len().cmp(&b.features.len()))
        .then_with(|| sorted_names(a).cmp(&sorted_names(b)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub best: FitResult,
    pub subsets_evaluated: usize,
    /// Every evaluated fit, best first.
    pub ranking: Vec<FitResult>,
}

/// Evaluates every non-empty feature subset with the same stratified folds and
/// returns the preferred fit under [`compare_fits`].
pub fn select_model(design: &Design, seed: u64, params: &SelectionParams) -> Result<Selection> {
    let f = design.feature_names.len();
    if f == 0 {
        return Err(Error::invalid("no features to select from"));
    }
    if f > params.max_features {
        return Err(Error::invalid(format!(
            "{f} features exceed the exhaustive-search cap of {}; pre-filter the features or raise the cap",
            params.max_features
        )));
    }
    let folds = stratified_folds(&design.labels, params.folds, seed)?;
    let mut ranking: Vec<FitResult> = (1u32..(1u32 << f))
        .into_par_iter()
        .map(|mask| {
            let subset: Vec<usize> = (0..f).filter(|j| mask & (1 << j) != 0).collect();
            evaluate_subset(design, &subset, &folds, params)
        })
        .collect::<Result<_>>()?;
    ranking.sort_by(compare_fits);
    Ok(Selection {
        best: ranking[0].clone(),
        subsets_evaluated: ranking.len(),
        ranking,
    })
}

/// Model JSON: features, named coefficients, intercept, accuracies and the
/// constant features dropped before fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub features: Vec<String>,
    pub coefficients: BTreeMap<String, f64>,
    pub intercept: f64,
    pub train_accuracy: f64,
    pub skf_accuracy: f64,
    pub dropped_constant_features: Vec<String>,
    pub subsets_evaluated: usize,
    pub n_rows: usize,
}

impl ModelReport {
    pub fn new(selection: &Selection, design: &Design) -> Self {
        let b = &selection.best;
        Self {
            features: b.features.clone(),
            coefficients: b
                .features
                .iter()
                .cloned()
                .zip(b.coefficients.iter().copied())
                .collect(),
            intercept: b.intercept,
            train_accuracy: b.train_accuracy,
            skf_accuracy: b.skf_accuracy,
            dropped_constant_features: design.dropped.clone(),
            subsets_evaluated: selection.subsets_evaluated,
            n_rows: design.rows.len(),
        }
    }
}
