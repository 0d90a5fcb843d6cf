//! L2-regularised logistic regression fitted by damped Newton steps.
//!
//! Parameters are laid out as `[intercept, b_1, ..., b_p]`; the penalty
//! `lambda / 2 * |b|^2` leaves the intercept free.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_L2: f64 = 1e-4;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    pub l2: f64,
    /// Convergence threshold on the gradient norm, relative to `1 + |w|`.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            l2: DEFAULT_L2,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
}

impl LogisticModel {
    pub fn params(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.coefficients.len() + 1);
        w.push(self.intercept);
        w.extend(&self.coefficients);
        w
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(linear(&self.params(), x))
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        linear(&self.params(), x) > 0.0
    }

    pub fn accuracy(&self, xs: &[Vec<f64>], ys: &[bool]) -> f64 {
        if xs.is_empty() {
            return 0.0;
        }
        let w = self.params();
        let hits = xs
            .iter()
            .zip(ys)
            .filter(|(x, &y)| (linear(&w, x) > 0.0) == y)
            .count();
        hits as f64 / xs.len() as f64
    }
}

fn linear(w: &[f64], x: &[f64]) -> f64 {
    w[0] + w[1..].iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Penalised negative log-likelihood.
pub fn objective(w: &[f64], xs: &[Vec<f64>], ys: &[bool], l2: f64) -> f64 {
    let nll: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = linear(w, x);
            softplus(z) - if y { z } else { 0.0 }
        })
        .sum();
    nll + 0.5 * l2 * w[1..].iter().map(|b| b * b).sum::<f64>()
}

/// Gradient of [`objective`].
pub fn gradient(w: &[f64], xs: &[Vec<f64>], ys: &[bool], l2: f64) -> Vec<f64> {
    let mut g = vec![0.0; w.len()];
    for (x, &y) in xs.iter().zip(ys) {
        let r = sigmoid(linear(w, x)) - f64::from(u8::from(y));
        g[0] += r;
        for (gj, xj) in g[1..].iter_mut().zip(x) {
            *gj += r * xj;
        }
    }
    for (gj, wj) in g[1..].iter_mut().zip(&w[1..]) {
        *gj += l2 * wj;
    }
    g
}

fn hessian(w: &[f64], xs: &[Vec<f64>], l2: f64) -> Vec<Vec<f64>> {
    let d = w.len();
    let mut h = vec![vec![0.0; d]; d];
    let mut row = vec![1.0; d];
    for x in xs {
        row[1..].copy_from_slice(x);
        let p = sigmoid(linear(w, x));
        let s = p * (1.0 - p);
        for a in 0..d {
            for b in 0..=a {
                h[a][b] += s * row[a] * row[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            h[b][a] = h[a][b];
        }
    }
    for (j, r) in h.iter_mut().enumerate().skip(1) {
        r[j] += l2;
    }
    h
}

/// Solves `a x = b` for symmetric positive definite `a`; `None` if `a` is not
/// numerically positive definite.
pub fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 0.0 || !d.is_finite() {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    Some(x)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fits the model to rows `xs` (without intercept column) and labels `ys`.
pub fn fit_logistic(
    xs: &[Vec<f64>],
    ys: &[bool],
    params: &LogisticParams,
) -> Result<LogisticModel> {
    let p = xs.first().map_or(0, Vec::len);
    if xs.is_empty() || xs.iter().any(|x| x.len() != p) || xs.len() != ys.len() {
        return Err(Error::invalid(
            "design rows must be non-empty, equally long and match the labels",
        ));
    }
    if ys.iter().all(|&y| y) || ys.iter().all(|&y| !y) {
        return Err(Error::invalid("logistic fit needs both labels"));
    }
    let mut w = vec![0.0; p + 1];
    let mut f = objective(&w, xs, ys, params.l2);
    let mut g = gradient(&w, xs, ys, params.l2);
    let mut iterations = 0;
    // near-separable data drives |w| up, and with it the rounding floor of g
    let threshold = |w: &[f64]| params.tolerance * (1.0 + norm(w));
    while norm(&g) >= threshold(&w) {
        if iterations == params.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                gradient_norm: norm(&g),
            });
        }
        iterations += 1;
        let mut h = hessian(&w, xs, params.l2);
        let mut step = cholesky_solve(&h, &g);
        // the intercept direction can flatten out on separable data
        let mut jitter = 1e-12;
        while step.is_none() && jitter < 1.0 {
            for (j, r) in h.iter_mut().enumerate() {
                r[j] += jitter;
            }
            jitter *= 10.0;
            step = cholesky_solve(&h, &g);
        }
        let step = step.unwrap_or_else(|| g.clone());

        let slope: f64 = -step.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        if -slope < 1e-12 * (1.0 + f.abs()) {
            // the predicted decrease is below what the objective can resolve;
            // judge the full step by the gradient instead
            let cand: Vec<f64> = w.iter().zip(&step).map(|(a, s)| a - s).collect();
            let gc = gradient(&cand, xs, ys, params.l2);
            if norm(&gc) < norm(&g) {
                f = objective(&cand, xs, ys, params.l2);
                w = cand;
                g = gc;
                continue;
            }
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = w.iter().zip(&step).map(|(a, s)| a - t * s).collect();
            let fc = objective(&cand, xs, ys, params.l2);
            if fc <= f + 1e-4 * t * slope || (fc <= f && t < 1e-6) {
                w = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        g = gradient(&w, xs, ys, params.l2);
        if !accepted {
            // no further decrease is representable; accept if close enough
            let gn = norm(&g);
            if gn < threshold(&w) * 1e3 {
                break;
            }
            return Err(Error::NoConvergence {
                iterations,
                gradient_norm: gn,
            });
        }
    }
    Ok(LogisticModel {
        intercept: w[0],
        coefficients: w[1..].to_vec(),
        iterations,
        gradient_norm: norm(&g),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cholesky_matches_a_hand_solution() {
        let a = vec![vec![4.0, 2.0], vec![2.0, 3.0]];
        let x = cholesky_solve(&a, &[2.0, 1.0]).unwrap();
        // det 8: x = [ (3*2 - 2*1)/8, (4*1 - 2*2)/8 ]
        assert_abs_diff_eq!(x[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-15);
        assert!(cholesky_solve(&[vec![0.0]], &[1.0]).is_none());
    }

    #[test]
    fn separable_data() {
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 - 9.5]).collect();
        let ys: Vec<bool> = (0..20).map(|i| i >= 10).collect();
        let params = LogisticParams::default();
        let m = fit_logistic(&xs, &ys, &params).unwrap();
        assert_eq!(m.accuracy(&xs, &ys), 1.0);
        assert!(m.coefficients[0] > 0.0 && m.coefficients[0].is_finite());
        assert!(m.gradient_norm < params.tolerance * (1.0 + norm(&m.params())));
    }

    #[test]
    fn symmetric_feature_gets_zero_weight() {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, v) in [0.5, 1.0, 2.0, 3.0].iter().enumerate() {
            for s in [1.0, -1.0] {
                xs.push(vec![s * v]);
                ys.push(i % 2 == 0);
            }
        }
        let m = fit_logistic(&xs, &ys, &LogisticParams::default()).unwrap();
        assert_abs_diff_eq!(m.coefficients[0], 0.0, epsilon = 1e-6);
    }

    #[test]
    fn needs_both_labels() {
        assert!(fit_logistic(
            &[vec![1.0], vec![2.0]],
            &[true, true],
            &LogisticParams::default()
        )
        .is_err());
    }
}
