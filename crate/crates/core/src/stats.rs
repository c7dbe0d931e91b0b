//! Running means and standard errors.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn new(value: f64, se: f64) -> Self {
        Self { value, se }
    }

    /// `|value - target| <= z * se`; an exact zero SE demands agreement to
    /// rounding.
    pub fn within(&self, target: f64, z: f64) -> bool {
        let tol = (z * self.se).max(1e-12 * (1.0 + target.abs()));
        (self.value - target).abs() <= tol
    }

    /// `value <= bound + z * se`.
    pub fn at_most(&self, bound: f64, z: f64) -> bool {
        self.value <= bound + z * self.se
    }
}

/// Welford accumulator, mergeable across chunks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.mean, self.std_error())
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Least-squares slopes of each response coordinate on the regressors, with
/// an intercept, and heteroskedasticity-robust (HC0) standard errors.
///
/// `xs` and `ys` hold one row per observation. Returns `(slope, se)` where
/// `slope[i][j]` is the coefficient of regressor `j` for response `i`.
pub fn regression_slope(xs: &[f64], ys: &[f64], dx: usize, dy: usize) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let rows = if dx == 0 { 0 } else { xs.len() / dx };
    if dx == 0 || dy == 0 || xs.len() != rows * dx || ys.len() != rows * dy {
        return Err(Error::Dimension(format!("regression data: {} regressor and {} response values", xs.len(), ys.len())));
    }
    if rows <= dx + 1 {
        return Err(Error::Parameter(format!("{rows} observations cannot identify {dx} slopes")));
    }
    let xbar: Vec<f64> = (0..dx).map(|j| (0..rows).map(|t| xs[t * dx + j]).sum::<f64>() / rows as f64).collect();
    let ybar: Vec<f64> = (0..dy).map(|i| (0..rows).map(|t| ys[t * dy + i]).sum::<f64>() / rows as f64).collect();
    let xc = DMatrix::from_fn(rows, dx, |t, j| xs[t * dx + j] - xbar[j]);
    let yc = DMatrix::from_fn(rows, dy, |t, i| ys[t * dy + i] - ybar[i]);
    let sxx = xc.transpose() * &xc;
    let inv = sxx
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Rank("regressors are collinear".into()))?;
    let beta = &inv * (xc.transpose() * &yc); // dx x dy
    let resid = &yc - &xc * &beta;

    let mut slope = vec![vec![0.0; dx]; dy];
    let mut se = vec![vec![0.0; dx]; dy];
    for i in 0..dy {
        let mut meat = DMatrix::<f64>::zeros(dx, dx);
        for t in 0..rows {
            let e2 = resid[(t, i)] * resid[(t, i)];
            for a in 0..dx {
                for b in 0..dx {
                    meat[(a, b)] += xc[(t, a)] * xc[(t, b)] * e2;
                }
            }
        }
        let v = &inv * meat * &inv;
        for j in 0..dx {
            slope[i][j] = beta[(j, i)];
            se[i][j] = v[(j, j)].max(0.0).sqrt();
        }
    }
    Ok((slope, se))
}

/// Merges chunk accumulators in order.
pub fn merge_all<'a, I: IntoIterator<Item = &'a Moments>>(parts: I) -> Moments {
    let mut acc = Moments::default();
    for p in parts {
        acc.merge(p);
    }
    acc
}
