//! Solutions of the Gaussian Stein equation `Lap h - <x, grad h> = g - E g(Z)`
//! by Mehler-type quadrature over a cached Gaussian sample.
//!
//! With `t = sin^2(theta)` and `Z_theta = sin(theta) x + cos(theta) Z`:
//!
//! * `h(x)    = -int cot(theta) E[g(Z_theta) - g(Z)] dtheta`
//! * `grad h  = -int cos(theta) E[grad g(Z_theta)] dtheta`
//! * `hess h  = -int sin(theta) cos(theta) E[Hess g(Z_theta)] dtheta`
//!   or, by Gaussian integration by parts,
//!   `-int sin(theta) E[grad g(Z_theta) Z^T] dtheta`,
//!
//! all over `theta in (0, pi/2)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{op_norm, RealMatrix};
use crate::rng::{seeded, CHUNK};
use crate::stats::{Estimate, Moments};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Writes a vector (gradient) or row-major `k x k` matrix (Hessian) into the buffer.
pub type FieldFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Fewest quadrature nodes a solution accepts.
pub const MIN_NODES: usize = 16;

/// Points used to estimate undeclared Lipschitz constants.
pub const CONSTANT_SAMPLES: usize = 1000;

/// A test function `g: R^k -> R` with optional analytic derivatives and its
/// Lipschitz constants `M1` (of `g`), `M2` (of `grad g`), `M3` (of `Hess g`).
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    k: usize,
    value: ScalarFn,
    gradient: Option<FieldFn>,
    hessian: Option<FieldFn>,
    m1: Option<f64>,
    m2: Option<f64>,
    m3: Option<f64>,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("k", &self.k)
            .field("analytic_gradient", &self.gradient.is_some())
            .field("analytic_hessian", &self.hessian.is_some())
            .field("m1", &self.m1)
            .field("m2", &self.m2)
            .field("m3", &self.m3)
            .finish()
    }
}

/// Names accepted by [`TestFunction::builtin`].
pub const BUILTINS: [&str; 7] = ["constant", "linear", "quadratic", "sine", "battery", "bump", "kink"];

impl TestFunction {
    pub fn new(name: impl Into<String>, k: usize, value: ScalarFn) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("test function needs k >= 1".into()));
        }
        Ok(Self { name: name.into(), k, value, gradient: None, hessian: None, m1: None, m2: None, m3: None })
    }

    pub fn with_gradient(mut self, gradient: FieldFn) -> Self {
        self.gradient = Some(gradient);
        self
    }

    pub fn with_hessian(mut self, hessian: FieldFn) -> Self {
        self.hessian = Some(hessian);
        self
    }

    /// Declares constants; `None` leaves a constant to be estimated.
    pub fn with_constants(mut self, m1: Option<f64>, m2: Option<f64>, m3: Option<f64>) -> Self {
        self.m1 = m1;
        self.m2 = m2;
        self.m3 = m3;
        self
    }

    /// Built-in battery. `battery` is `sin(x_1) + x_2 cos(x_2)`, `kink` is
    /// `max(min(x, y), 0)` and `bump` is `exp(-|x|^2)`.
    pub fn builtin(name: &str, k: usize) -> Result<Self> {
        let f = |v: fn(&[f64]) -> f64| -> ScalarFn { Arc::new(v) };
        let d = |v: fn(&[f64], &mut [f64])| -> FieldFn { Arc::new(v) };
        let t = match name {
            "constant" => Self::new(name, k, f(|_| 1.5))?
                .with_gradient(d(|_, g| g.fill(0.0)))
                .with_hessian(d(|_, h| h.fill(0.0)))
                .with_constants(Some(0.0), Some(0.0), Some(0.0)),
            "linear" => {
                // <v, x> with v = (1, -1/2, 1/3, ...)
                let v: Vec<f64> = (0..k).map(|i| (if i % 2 == 0 { 1.0 } else { -1.0 }) / (i + 1) as f64).collect();
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                let v1 = Arc::new(v);
                let v2 = v1.clone();
                Self::new(name, k, Arc::new(move |x: &[f64]| x.iter().zip(v1.iter()).map(|(a, b)| a * b).sum()))?
                    .with_gradient(Arc::new(move |_, g: &mut [f64]| g.copy_from_slice(&v2)))
                    .with_hessian(d(|_, h| h.fill(0.0)))
                    .with_constants(Some(norm), Some(0.0), Some(0.0))
            }
            "quadratic" => Self::new(name, k, f(|x| x.iter().map(|a| a * a).sum()))?
                .with_gradient(d(|x, g| g.iter_mut().zip(x).for_each(|(o, a)| *o = 2.0 * a)))
                .with_hessian(d(|x, h| {
                    let k = x.len();
                    h.fill(0.0);
                    (0..k).for_each(|i| h[i * k + i] = 2.0);
                }))
                .with_constants(None, Some(2.0), Some(0.0)),
            "sine" => Self::new(name, k, f(|x| x[0].sin()))?
                .with_gradient(d(|x, g| {
                    g.fill(0.0);
                    g[0] = x[0].cos();
                }))
                .with_hessian(d(|x, h| {
                    h.fill(0.0);
                    h[0] = -x[0].sin();
                }))
                .with_constants(Some(1.0), Some(1.0), Some(1.0)),
            "battery" => {
                if k < 2 {
                    return Err(Error::Parameter("battery function needs k >= 2".into()));
                }
                Self::new(name, k, f(|x| x[0].sin() + x[1] * x[1].cos()))?
                    .with_gradient(d(|x, g| {
                        g.fill(0.0);
                        g[0] = x[0].cos();
                        g[1] = x[1].cos() - x[1] * x[1].sin();
                    }))
                    .with_hessian(d(|x, h| {
                        let k = x.len();
                        h.fill(0.0);
                        h[0] = -x[0].sin();
                        h[k + 1] = -2.0 * x[1].sin() - x[1] * x[1].cos();
                    }))
            }
            "bump" => Self::new(name, k, f(|x| (-x.iter().map(|a| a * a).sum::<f64>()).exp()))?
                .with_gradient(d(|x, g| {
                    let e = (-x.iter().map(|a| a * a).sum::<f64>()).exp();
                    g.iter_mut().zip(x).for_each(|(o, a)| *o = -2.0 * a * e);
                }))
                .with_hessian(d(|x, h| {
                    let k = x.len();
                    let e = (-x.iter().map(|a| a * a).sum::<f64>()).exp();
                    for i in 0..k {
                        for j in 0..k {
                            let id = if i == j { 1.0 } else { 0.0 };
                            h[i * k + j] = (4.0 * x[i] * x[j] - 2.0 * id) * e;
                        }
                    }
                })),
            "kink" => {
                if k != 2 {
                    return Err(Error::Parameter("kink function is two-dimensional".into()));
                }
                Self::new(name, k, f(|x| x[0].min(x[1]).max(0.0)))?
                    .with_gradient(d(|x, g| {
                        g.fill(0.0);
                        if x[0] > 0.0 && x[1] > 0.0 {
                            g[if x[0] < x[1] { 0 } else { 1 }] = 1.0;
                        }
                    }))
                    .with_constants(Some(1.0), None, None)
            }
            _ => {
                return Err(Error::Parameter(format!("unknown test function {name:?}; expected one of {}", BUILTINS.join(", "))))
            }
        };
        Ok(t)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m1(&self) -> Option<f64> {
        self.m1
    }

    pub fn m2(&self) -> Option<f64> {
        self.m2
    }

    pub fn m3(&self) -> Option<f64> {
        self.m3
    }

    pub fn has_hessian(&self) -> bool {
        self.hessian.is_some()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    /// Analytic gradient, or central differences with step `1e-5 (1 + |x|)`.
    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        if let Some(g) = &self.gradient {
            return g(x, out);
        }
        let h = 1e-5 * (1.0 + x.iter().map(|a| a * a).sum::<f64>().sqrt());
        let mut y = x.to_vec();
        for i in 0..self.k {
            y[i] = x[i] + h;
            let up = self.value(&y);
            y[i] = x[i] - h;
            let down = self.value(&y);
            y[i] = x[i];
            out[i] = (up - down) / (2.0 * h);
        }
    }

    /// Analytic Hessian, or symmetrized central differences of the gradient.
    pub fn hessian(&self, x: &[f64], out: &mut [f64]) {
        if let Some(hf) = &self.hessian {
            return hf(x, out);
        }
        let k = self.k;
        let h = 1e-4 * (1.0 + x.iter().map(|a| a * a).sum::<f64>().sqrt());
        let (mut up, mut down) = (vec![0.0; k], vec![0.0; k]);
        let mut y = x.to_vec();
        for j in 0..k {
            y[j] = x[j] + h;
            self.gradient(&y, &mut up);
            y[j] = x[j] - h;
            self.gradient(&y, &mut down);
            y[j] = x[j];
            for i in 0..k {
                out[i * k + j] = (up[i] - down[i]) / (2.0 * h);
            }
        }
        for i in 0..k {
            for j in 0..i {
                let m = 0.5 * (out[i * k + j] + out[j * k + i]);
                out[i * k + j] = m;
                out[j * k + i] = m;
            }
        }
    }

    /// Sup of `|grad g|` and `||Hess g||_op` over `samples` standard normal points.
    pub fn sampled_constants<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> Result<(f64, f64)> {
        let k = self.k;
        let (mut x, mut g, mut h) = (vec![0.0; k], vec![0.0; k], vec![0.0; k * k]);
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for _ in 0..samples {
            x.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            self.gradient(&x, &mut g);
            s1 = s1.max(g.iter().map(|a| a * a).sum::<f64>().sqrt());
            self.hessian(&x, &mut h);
            s2 = s2.max(op_norm(&RealMatrix::from_row_major(k, k, h.clone())?)?);
        }
        Ok((s1, s2))
    }

    /// Fills undeclared `M1`/`M2` by sampling and checks declared ones against
    /// the sampled sups.
    pub fn resolve_constants<R: Rng + ?Sized>(mut self, rng: &mut R) -> Result<Self> {
        let (s1, s2) = self.sampled_constants(CONSTANT_SAMPLES, rng)?;
        for (label, declared, sampled) in [("M1", self.m1, s1), ("M2", self.m2, s2)] {
            if let Some(d) = declared {
                if d < sampled * (1.0 - 1e-6) - 1e-9 {
                    return Err(Error::Parameter(format!(
                        "declared {label} = {d} is below the sampled supremum {sampled} for {}",
                        self.name
                    )));
                }
            }
        }
        self.m1 = self.m1.or(Some(s1));
        self.m2 = self.m2.or(Some(s2));
        Ok(self)
    }
}

/// Gauss–Legendre nodes and weights on `(a, b)`.
pub fn gauss_legendre(nodes: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut out = vec![(0.0, 0.0); nodes];
    for i in 0..nodes.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nodes as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..nodes {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = nodes as f64 * (z * p0 - p1) / (z * z - 1.0);
            let step = p0 / dp;
            z -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        out[i] = (mid - half * z, half * w);
        out[nodes - 1 - i] = (mid + half * z, half * w);
    }
    out
}

/// Which representation of the Hessian of the solution to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HessianForm {
    /// Integrates `Hess g`.
    Direct,
    /// Integrates `grad g Z^T`; needs only first derivatives.
    IntegrationByParts,
}

/// `h`, its gradient and Hessian (row-major) at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinValue {
    pub h: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
    /// `Lap h - <x, grad h> - g(x) + E g(Z)` with its Monte Carlo error.
    pub residual: Estimate,
}

impl SteinValue {
    pub fn hess_matrix(&self) -> RealMatrix {
        let k = self.grad.len();
        RealMatrix::from_row_major(k, k, self.hess.clone()).expect("k x k Hessian")
    }

    pub fn hess_hs(&self) -> f64 {
        self.hess.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// Solution operator for one test function, with its cached Gaussian sample.
/// Every evaluation reuses the same sample, each draw paired with its negative.
#[derive(Debug, Clone)]
pub struct SteinSolution {
    f: TestFunction,
    nodes: Vec<(f64, f64)>,
    samples: usize,
    seed: u64,
    form: HessianForm,
    z: Vec<f64>,
    mean_g: f64,
}

impl SteinSolution {
    pub fn new(f: TestFunction, nodes: usize, samples: usize, seed: u64) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::Config(format!("need at least {MIN_NODES} quadrature nodes, got {nodes}")));
        }
        if samples == 0 {
            return Err(Error::Config("need a positive Gaussian sample size".into()));
        }
        let k = f.k();
        let mut rng = seeded(seed);
        let z: Vec<f64> = (0..samples * k).map(|_| rng.sample(StandardNormal)).collect();
        let mut neg = vec![0.0; k];
        let mean_g = z
            .chunks(k)
            .map(|zi| {
                neg.iter_mut().zip(zi).for_each(|(o, a)| *o = -a);
                0.5 * (f.value(zi) + f.value(&neg))
            })
            .sum::<f64>()
            / samples as f64;
        let form = if f.has_hessian() { HessianForm::Direct } else { HessianForm::IntegrationByParts };
        Ok(Self { f, nodes: gauss_legendre(nodes, 0.0, FRAC_PI_2), samples, seed, form, z, mean_g })
    }

    pub fn with_form(mut self, form: HessianForm) -> Self {
        self.form = form;
        self
    }

    pub fn function(&self) -> &TestFunction {
        &self.f
    }

    pub fn nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn form(&self) -> HessianForm {
        self.form
    }

    /// Antithetic sample mean of `g(Z)`.
    pub fn mean_g(&self) -> f64 {
        self.mean_g
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<SteinValue> {
        let k = self.f.k();
        if x.len() != k {
            return Err(Error::Dimension(format!("point has {} coordinates, function takes {k}", x.len())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("evaluation point is not finite".into()));
        }
        let parts: Vec<Partial> =
            self.z.par_chunks(CHUNK * k).map(|block| self.accumulate(x, block)).collect();
        let mut total = Partial::new(k);
        for p in &parts {
            total.merge(p);
        }
        let s = self.samples as f64;
        let mut hess: Vec<f64> = total.hess.iter().map(|v| -v / s).collect();
        if self.form == HessianForm::IntegrationByParts {
            for i in 0..k {
                for j in 0..i {
                    let m = 0.5 * (hess[i * k + j] + hess[j * k + i]);
                    hess[i * k + j] = m;
                    hess[j * k + i] = m;
                }
            }
        }
        Ok(SteinValue {
            h: -total.h / s,
            grad: total.grad.iter().map(|v| -v / s).collect(),
            hess,
            residual: total.residual.estimate(),
        })
    }

    fn accumulate(&self, x: &[f64], block: &[f64]) -> Partial {
        let k = self.f.k();
        let gx = self.f.value(x);
        let mut out = Partial::new(k);
        let (mut a, mut b, mut neg) = (vec![0.0; k], vec![0.0; k], vec![0.0; k]);
        let (mut ga, mut gb) = (vec![0.0; k], vec![0.0; k]);
        let (mut ha, mut hb) = (vec![0.0; k * k], vec![0.0; k * k]);
        let (mut gi, mut si) = (vec![0.0; k], vec![0.0; k * k]);
        for z in block.chunks(k) {
            neg.iter_mut().zip(z).for_each(|(o, v)| *o = -v);
            let base = 0.5 * (self.f.value(z) + self.f.value(&neg));
            let mut hi = 0.0;
            gi.fill(0.0);
            si.fill(0.0);
            for &(theta, w) in &self.nodes {
                let (s, c) = theta.sin_cos();
                for i in 0..k {
                    a[i] = s * x[i] + c * z[i];
                    b[i] = s * x[i] - c * z[i];
                }
                hi += w * (c / s) * (0.5 * (self.f.value(&a) + self.f.value(&b)) - base);
                self.f.gradient(&a, &mut ga);
                self.f.gradient(&b, &mut gb);
                for i in 0..k {
                    gi[i] += w * c * 0.5 * (ga[i] + gb[i]);
                }
                match self.form {
                    HessianForm::Direct => {
                        self.f.hessian(&a, &mut ha);
                        self.f.hessian(&b, &mut hb);
                        for ij in 0..k * k {
                            si[ij] += w * s * c * 0.5 * (ha[ij] + hb[ij]);
                        }
                    }
                    HessianForm::IntegrationByParts => {
                        for i in 0..k {
                            for j in 0..k {
                                si[i * k + j] += w * s * 0.5 * (ga[i] - gb[i]) * z[j];
                            }
                        }
                    }
                }
            }
            out.h += hi;
            out.grad.iter_mut().zip(&gi).for_each(|(o, v)| *o += v);
            out.hess.iter_mut().zip(&si).for_each(|(o, v)| *o += v);
            // the solution is minus the accumulated integrals
            let lap: f64 = (0..k).map(|i| si[i * k + i]).sum();
            let drift: f64 = x.iter().zip(&gi).map(|(a, b)| a * b).sum();
            out.residual.push(-lap + drift - gx + base);
        }
        out
    }
}

struct Partial {
    h: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
    residual: Moments,
}

impl Partial {
    fn new(k: usize) -> Self {
        Self { h: 0.0, grad: vec![0.0; k], hess: vec![0.0; k * k], residual: Moments::default() }
    }

    fn merge(&mut self, o: &Partial) {
        self.h += o.h;
        self.grad.iter_mut().zip(&o.grad).for_each(|(a, b)| *a += b);
        self.hess.iter_mut().zip(&o.hess).for_each(|(a, b)| *a += b);
        self.residual.merge(&o.residual);
    }
}

/// Evaluates `h` at each point.
pub fn stein_evaluate(sol: &SteinSolution, x: &[f64]) -> Result<SteinValue> {
    sol.evaluate(x)
}

/// `Lap h - <x, grad h> - g(x) + E g(Z)` at each point.
pub fn stein_residual(sol: &SteinSolution, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    points.iter().map(|p| sol.evaluate(p).map(|v| v.residual.value)).collect()
}

/// Monte Carlo estimate of `E[Lap f(Z) - <Z, grad f(Z)>]`, which vanishes
/// for the standard Gaussian.
pub fn characterizing_check<R: Rng + ?Sized>(f: &TestFunction, samples: usize, rng: &mut R) -> Estimate {
    let k = f.k();
    let (mut z, mut g, mut h) = (vec![0.0; k], vec![0.0; k], vec![0.0; k * k]);
    let mut m = Moments::default();
    for _ in 0..samples {
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        f.gradient(&z, &mut g);
        f.hessian(&z, &mut h);
        let lap: f64 = (0..k).map(|i| h[i * k + i]).sum();
        m.push(lap - z.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>());
    }
    m.estimate()
}

/// Hessian-Lipschitz ratios of a solution against `(sqrt(2 pi)/4) M2(g)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeAudit {
    pub function: String,
    pub pairs: usize,
    /// `max ||hess(x) - hess(y)||_op / |x - y|`.
    pub max_ratio: f64,
    pub m2: f64,
    /// `(sqrt(2 pi)/4) M2 (1 + allowance)`.
    pub limit: f64,
    pub allowance: f64,
    pub pass: bool,
    pub kink: Option<KinkGrowth>,
}

/// Ratio growth of the non-smooth function `max(min(x, y), 0)` near its
/// corner: pairs straddle the diagonal at shrinking distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinkGrowth {
    pub distances: Vec<f64>,
    pub ratios: Vec<f64>,
    pub increasing: bool,
}

/// Relative numerical allowance on the derivative bounds.
pub const DERIVATIVE_ALLOWANCE: f64 = 0.05;

pub fn hessian_ratio(sol: &SteinSolution, x: &[f64], y: &[f64]) -> Result<f64> {
    let (hx, hy) = (sol.evaluate(x)?, sol.evaluate(y)?);
    let diff = hx.hess_matrix().try_sub(&hy.hess_matrix())?;
    let dist = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    if dist == 0.0 {
        return Err(Error::Parameter("coincident points in a Lipschitz pair".into()));
    }
    Ok(op_norm(&diff)? / dist)
}

/// Checks `M3(h) <= (sqrt(2 pi)/4) M2(g)` on the given pairs; with
/// `kink_distances` also runs the non-smooth counterexample at those
/// distances from its corner using the same node count and sample size.
pub fn derivative_bound_audit(
    sol: &SteinSolution,
    point_pairs: &[(Vec<f64>, Vec<f64>)],
    kink_distances: Option<&[f64]>,
) -> Result<DerivativeAudit> {
    let m2 = sol.function().m2().ok_or_else(|| Error::Parameter("M2 of the test function is not resolved".into()))?;
    let mut max_ratio = 0.0f64;
    for (x, y) in point_pairs {
        max_ratio = max_ratio.max(hessian_ratio(sol, x, y)?);
    }
    let limit = (2.0 * PI).sqrt() / 4.0 * m2 * (1.0 + DERIVATIVE_ALLOWANCE);
    let kink = kink_distances.map(|d| kink_growth(sol.nodes(), sol.samples(), sol.seed(), d)).transpose()?;
    Ok(DerivativeAudit {
        function: sol.function().name().to_string(),
        pairs: point_pairs.len(),
        max_ratio,
        m2,
        limit,
        allowance: DERIVATIVE_ALLOWANCE,
        pass: max_ratio <= limit,
        kink,
    })
}

/// Hessian ratio of the kink solution across the diagonal: at distance `d`
/// the pair is `(d, d) +- (d/2)(1, -1)/sqrt(2)`.
pub fn kink_growth(nodes: usize, samples: usize, seed: u64, distances: &[f64]) -> Result<KinkGrowth> {
    let sol = SteinSolution::new(TestFunction::builtin("kink", 2)?, nodes, samples, seed)?;
    let mut ratios = Vec::with_capacity(distances.len());
    for &d in distances {
        let off = 0.5 * d / 2f64.sqrt();
        let x = [d + off, d - off];
        let y = [d - off, d + off];
        ratios.push(hessian_ratio(&sol, &x, &y)?);
    }
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    Ok(KinkGrowth { distances: distances.to_vec(), ratios, increasing })
}
