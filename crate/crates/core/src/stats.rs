//! Descriptive statistics and the one-sided one-sample t-test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

pub fn sem(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    sample_sd(xs) / (xs.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSem {
    pub mean: f64,
    pub sem: f64,
    pub n: usize,
}

impl MeanSem {
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        Some(Self {
            mean: mean(xs),
            sem: sem(xs),
            n: xs.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub statistic: f64,
    /// Upper-tail p-value for H1: mean > reference.
    pub p: f64,
    pub df: usize,
    /// Zero sample variance; `p` is 0 when the mean exceeds the reference, else 1.
    pub degenerate: bool,
}

/// One-sample t-test of `samples` against `reference_mean`, alternative "greater".
pub fn one_sided_t_test(samples: &[f64], reference_mean: f64) -> Result<TTest> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "t-test needs at least 2 samples, got {n}"
        )));
    }
    let m = mean(samples);
    let sd = sample_sd(samples);
    let df = n - 1;
    // relative tolerance on the spread so constant inputs with rounding noise stay degenerate
    if sd <= 1e-12 * m.abs().max(reference_mean.abs()).max(1.0) {
        let diff = m - reference_mean;
        let tol = 1e-12 * m.abs().max(reference_mean.abs()).max(1.0);
        let (statistic, p) = if diff > tol {
            (f64::INFINITY, 0.0)
        } else if diff < -tol {
            (f64::NEG_INFINITY, 1.0)
        } else {
            (0.0, 1.0)
        };
        return Ok(TTest {
            statistic,
            p,
            df,
            degenerate: true,
        });
    }
    let t = (m - reference_mean) / (sd / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, df as f64).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(TTest {
        statistic: t,
        p: dist.sf(t),
        df,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn descriptive() {
        let xs = [1.0, 2.0, 3.0];
        assert_eq!(mean(&xs), 2.0);
        assert_eq!(sample_sd(&xs), 1.0);
        assert_abs_diff_eq!(sem(&xs), 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert!(MeanSem::of(&[]).is_none());
    }

    #[test]
    fn clear_effect_is_significant() {
        // mean 2.0, sd 0.1581, t = 1.0 / 0.07071 = 14.14 on 4 df
        let t = one_sided_t_test(&[2.0, 2.1, 1.9, 2.2, 1.8], 1.0).unwrap();
        assert_abs_diff_eq!(t.statistic, 14.142135623730951, epsilon = 1e-9);
        assert!(t.p < 0.001);
    }

    #[test]
    fn symmetric_samples_give_one_half() {
        let t = one_sided_t_test(&[0.5, 1.5, 0.8, 1.2], 1.0).unwrap();
        assert_abs_diff_eq!(t.statistic, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.p, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_cases() {
        let eq = one_sided_t_test(&[1.0, 1.0, 1.0], 1.0).unwrap();
        assert!(eq.degenerate);
        assert_eq!(eq.p, 1.0);
        let above = one_sided_t_test(&[2.0, 2.0], 1.0).unwrap();
        assert_eq!(above.p, 0.0);
        let below = one_sided_t_test(&[0.0, 0.0], 1.0).unwrap();
        assert_eq!(below.p, 1.0);
        assert!(one_sided_t_test(&[1.0], 0.0).is_err());
    }
}
