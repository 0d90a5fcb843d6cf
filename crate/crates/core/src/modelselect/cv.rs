//! Stratified k-fold cross-validation and class balancing.

use rand::seq::{index::sample, SliceRandom};

use super::logistic::{fit_logistic, LogisticParams};
use crate::rng::{stage_rng, STAGE_BALANCE, STAGE_CV};
use crate::{Error, Result};

pub const DEFAULT_FOLDS: usize = 3;

/// Indices of a class-balanced subsample: the majority class is subsampled
/// uniformly down to the minority count. Returned in ascending order.
pub fn balanced_indices(labels: &[bool], seed: u64) -> Result<Vec<usize>> {
    let pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::invalid(format!(
            "balancing needs both labels, got {} positive and {} negative",
            pos.len(),
            neg.len()
        )));
    }
    let (minority, majority) = if pos.len() <= neg.len() {
        (pos, neg)
    } else {
        (neg, pos)
    };
    let mut rng = stage_rng(seed, STAGE_BALANCE, 0);
    let mut out: Vec<usize> = sample(&mut rng, majority.len(), minority.len())
        .into_iter()
        .map(|k| majority[k])
        .chain(minority)
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Fold index per row. Each class is shuffled and dealt round-robin, with the
/// rotation continuing across classes so fold sizes also stay within one.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::invalid("need at least 2 folds"));
    }
    let mut rng = stage_rng(seed, STAGE_CV, 0);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < k {
            return Err(Error::invalid(format!(
                "class {class} has {} members, fewer than {k} folds",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for i in idx {
            folds[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(folds)
}

/// Mean held-out accuracy over the folds in `folds`.
pub fn cross_validate(
    xs: &[Vec<f64>],
    ys: &[bool],
    folds: &[usize],
    k: usize,
    params: &LogisticParams,
) -> Result<f64> {
    let mut total = 0.0;
    for f in 0..k {
        let (mut tx, mut ty, mut vx, mut vy) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for i in 0..xs.len() {
            if folds[i] == f {
                vx.push(xs[i].clone());
                vy.push(ys[i]);
            } else {
                tx.push(xs[i].clone());
                ty.push(ys[i]);
            }
        }
        let model = fit_logistic(&tx, &ty, params)?;
        total += model.accuracy(&vx, &vy);
    }
    Ok(total / k as f64)
}

/// Stratified k-fold accuracy with folds drawn from `seed`.
pub fn stratified_kfold_cv(
    xs: &[Vec<f64>],
    ys: &[bool],
    k: usize,
    seed: u64,
    params: &LogisticParams,
) -> Result<f64> {
    let folds = stratified_folds(ys, k, seed)?;
    cross_validate(xs, ys, &folds, k, params)
}
