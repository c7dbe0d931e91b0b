//! Empirical Wasserstein-1 distances between equal-size point clouds.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, SimRng};
use crate::stats::{Estimate, Moments};

/// Largest cloud the exact assignment solver accepts.
pub const EXACT_CAP: usize = 4096;

/// `m` points in `R^k`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleCloud {
    pub m: usize,
    pub k: usize,
    pub points: Vec<f64>,
    pub seed: Option<u64>,
    pub source: String,
}

impl SampleCloud {
    pub fn new(k: usize, points: Vec<f64>, seed: Option<u64>, source: impl Into<String>) -> Result<Self> {
        if k == 0 || points.len() % k != 0 {
            return Err(Error::Dimension(format!("{} coordinates do not form points in R^{k}", points.len())));
        }
        let m = points.len() / k;
        if m < 1 {
            return Err(Error::Parameter("a cloud needs at least one point".into()));
        }
        if let Some(i) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("point {} has a non-finite coordinate", i / k)));
        }
        Ok(Self { m, k, points, seed, source: source.into() })
    }

    /// `m` draws of `sampler`, each from the substream of its index.
    pub fn sample<F>(k: usize, m: usize, seed: u64, source: impl Into<String>, sampler: F) -> Result<Self>
    where
        F: Fn(&mut SimRng, &mut [f64]) + Sync,
    {
        let mut points = vec![0.0; m * k];
        points.par_chunks_mut(k).enumerate().for_each(|(i, p)| sampler(&mut substream(seed, i as u64), p));
        Self::new(k, points, Some(seed), source)
    }

    /// Standard Gaussian cloud.
    pub fn gaussian(k: usize, m: usize, seed: u64) -> Result<Self> {
        Self::sample(k, m, seed, "gaussian", |rng, p| p.iter_mut().for_each(|v| *v = rng.sample(StandardNormal)))
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.k..(i + 1) * self.k]
    }

    /// One point per row, comma separated, shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.points.len() * 20);
        for p in self.points.chunks(self.k) {
            for (j, v) in p.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                write!(s, "{v:?}").expect("writing to a string");
            }
            s.push('\n');
        }
        s
    }

    /// Parses [`to_csv`](Self::to_csv) output; blank lines and `#` comments are skipped.
    pub fn from_csv(text: &str, source: impl Into<String>) -> Result<Self> {
        let mut k = None;
        let mut points = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line: idx + 1, message: format!("{e} in {line:?}") })?;
            match k {
                None => k = Some(row.len()),
                Some(k) if k != row.len() => {
                    return Err(Error::Parse { line: idx + 1, message: format!("expected {k} fields, found {}", row.len()) })
                }
                _ => {}
            }
            points.extend(row);
        }
        let k = k.ok_or_else(|| Error::Parse { line: 0, message: "no points".into() })?;
        Self::new(k, points, None, source)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv(&text, path.display().to_string())
    }
}

fn check_pair(a: &SampleCloud, b: &SampleCloud) -> Result<()> {
    if a.m != b.m || a.k != b.k {
        return Err(Error::Dimension(format!("clouds are {}x{} and {}x{}; need equal sizes", a.m, a.k, b.m, b.k)));
    }
    Ok(())
}

fn euclid(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Minimum-cost perfect matching of a square cost matrix by shortest
/// augmenting paths with potentials. Returns `assignment[row] = column`.
pub fn solve_assignment(cost: &[f64], m: usize) -> Vec<usize> {
    assert_eq!(cost.len(), m * m, "cost matrix must be m x m");
    // 1-based bookkeeping with a virtual column 0
    let mut u = vec![0.0f64; m + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut min_to = vec![0.0f64; m + 1];
    let mut used = vec![false; m + 1];
    for row in 1..=m {
        owner[0] = row;
        let mut j0 = 0;
        min_to.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let base = &cost[(i0 - 1) * m..i0 * m];
            let ui = u[i0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = base[j - 1] - ui - v[j];
                    if cur < min_to[j] {
                        min_to[j] = cur;
                        way[j] = j0;
                    }
                    if min_to[j] < delta {
                        delta = min_to[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; m];
    for j in 1..=m {
        assignment[owner[j] - 1] = j - 1;
    }
    assignment
}

/// `(1/m) min_pi sum_i |a_i - b_pi(i)|`.
pub fn w1_exact(a: &SampleCloud, b: &SampleCloud) -> Result<f64> {
    check_pair(a, b)?;
    let m = a.m;
    if m > EXACT_CAP {
        return Err(Error::Size { m, cap: EXACT_CAP });
    }
    let mut cost = vec![0.0; m * m];
    cost.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
        let p = a.point(i);
        row.iter_mut().enumerate().for_each(|(j, c)| *c = euclid(p, b.point(j)));
    });
    let assignment = solve_assignment(&cost, m);
    // summing in sorted order makes the result independent of argument order
    let mut matched: Vec<f64> = assignment.iter().enumerate().map(|(i, &j)| cost[i * m + j]).collect();
    matched.sort_by(f64::total_cmp);
    Ok(matched.iter().sum::<f64>() / m as f64)
}

/// One-dimensional `W_1` between equal-size samples: mean sorted difference.
pub fn w1_sorted(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// Largest projected one-dimensional `W_1` over `directions` random unit
/// vectors; never exceeds the exact distance.
pub fn w1_sliced_lb<R: Rng + ?Sized>(a: &SampleCloud, b: &SampleCloud, directions: usize, rng: &mut R) -> Result<f64> {
    check_pair(a, b)?;
    if directions == 0 {
        return Err(Error::Parameter("need at least one direction".into()));
    }
    let k = a.k;
    let thetas: Vec<Vec<f64>> = (0..directions)
        .map(|_| loop {
            let t: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
            let n = t.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-12 {
                break t.into_iter().map(|x| x / n).collect();
            }
        })
        .collect();
    let project = |c: &SampleCloud, t: &[f64]| -> Vec<f64> {
        c.points.chunks(k).map(|p| p.iter().zip(t).map(|(x, y)| x * y).sum()).collect()
    };
    Ok(thetas.par_iter().map(|t| w1_sorted(project(a, t), project(b, t))).reduce(|| 0.0, f64::max))
}

/// Exact `W_1` between independent same-law clouds of size `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfDistance {
    pub mean: f64,
    pub se: f64,
    /// Replicate standard deviation: the spread of a single `W_1` draw.
    pub sd: f64,
    pub reps: usize,
    pub m: usize,
}

impl SelfDistance {
    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.mean, self.se)
    }
}

/// Self-distance of the law drawn by `sampler`; replicate `r` uses the two
/// substreams `2r` and `2r + 1` of `seed`.
pub fn self_distance<F>(k: usize, sampler: F, m: usize, reps: usize, seed: u64) -> Result<SelfDistance>
where
    F: Fn(&mut SimRng, &mut [f64]) + Sync,
{
    if reps < 3 {
        return Err(Error::Parameter(format!("need at least 3 replicates, got {reps}")));
    }
    if m > EXACT_CAP {
        return Err(Error::Size { m, cap: EXACT_CAP });
    }
    let draws: Vec<f64> = (0..reps)
        .map(|r| {
            let fork = |s: u64| substream(seed, s).random::<u64>();
            let a = SampleCloud::sample(k, m, fork(2 * r as u64), "self-a", &sampler)?;
            let b = SampleCloud::sample(k, m, fork(2 * r as u64 + 1), "self-b", &sampler)?;
            w1_exact(&a, &b)
        })
        .collect::<Result<_>>()?;
    let mom: Moments = draws.iter().copied().collect();
    Ok(SelfDistance { mean: mom.mean(), se: mom.std_error(), sd: mom.variance().sqrt(), reps, m })
}

/// One row of a bound-versus-simulation comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub m: usize,
    pub w1: f64,
    pub self_distance: f64,
    pub debiased: f64,
    pub bound: f64,
    /// Uncertainty of `debiased`: the single-draw spread of `w1` and the
    /// error of the self-distance mean, combined in quadrature.
    pub se: f64,
    pub pass: bool,
}

impl Comparison {
    /// `max(0, w1 - self) <= bound + 4 se`.
    pub fn new(m: usize, w1: f64, reference: &SelfDistance, bound: f64) -> Self {
        let debiased = (w1 - reference.mean).max(0.0);
        let se = reference.sd.hypot(reference.se);
        Self { m, w1, self_distance: reference.mean, debiased, bound, se, pass: debiased <= bound + 4.0 * se }
    }
}
