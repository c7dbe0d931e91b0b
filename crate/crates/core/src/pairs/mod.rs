//! Exchangeable-pair models and their conditional-moment audits.
//!
//! Four constructions are provided: the i.i.d. sum with a resampled summand,
//! and three continuous families driven by a small random rotation
//! `U A_eps U*` (coordinate projections of a spherically symmetric vector,
//! linear statistics of a Haar orthogonal matrix, and complex-linear
//! statistics of a Haar unitary matrix). Complex statistics are handled in
//! their realified form, `(Re w_1, Im w_1, Re w_2, ...)`.

mod audit;
mod family;

pub use audit::{audit_pair, audit_pair_with, DEFAULT_INNER, two_epsilon_check, ConditionalAudit, EpsilonConsistency, SurrogateKind, SurrogateReport};
pub use family::ProjectionFamily;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::haar::{rotation_offsets, sample_frame, sample_haar, GroupScalar};
use crate::matrix::{Matrix, Scalar};
use crate::rng::SimRng;

/// Fills its buffer with one draw.
pub type Sampler = Arc<dyn Fn(&mut SimRng, &mut [f64]) + Send + Sync>;

/// Law of the summands of the i.i.d. model; mean zero, identity covariance.
#[derive(Clone)]
pub enum VectorLaw {
    Gaussian(usize),
    Rademacher(usize),
    Custom { name: String, k: usize, sampler: Sampler },
}

impl VectorLaw {
    pub fn dim(&self) -> usize {
        match self {
            Self::Gaussian(k) | Self::Rademacher(k) => *k,
            Self::Custom { k, .. } => *k,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Gaussian(_) => "gaussian",
            Self::Rademacher(_) => "rademacher",
            Self::Custom { name, .. } => name,
        }
    }

    pub fn sample(&self, rng: &mut SimRng, out: &mut [f64]) {
        match self {
            Self::Gaussian(_) => out.iter_mut().for_each(|v| *v = rng.sample(StandardNormal)),
            Self::Rademacher(_) => out.iter_mut().for_each(|v| *v = if rng.random::<bool>() { 1.0 } else { -1.0 }),
            Self::Custom { sampler, .. } => sampler(rng, out),
        }
    }

    /// `E|Y|^4` when known in closed form.
    pub fn fourth_moment(&self) -> Option<f64> {
        let k = self.dim() as f64;
        match self {
            Self::Gaussian(_) => Some(k * k + 2.0 * k),
            Self::Rademacher(_) => Some(k * k),
            Self::Custom { .. } => None,
        }
    }

    /// `E|Y|^3` when known in closed form.
    pub fn third_moment(&self) -> Option<f64> {
        let k = self.dim() as f64;
        match self {
            // E chi_k^3 = 2^{3/2} Gamma((k+3)/2) / Gamma(k/2)
            Self::Gaussian(_) => Some((1.5 * std::f64::consts::LN_2 + ln_gamma((k + 3.0) / 2.0) - ln_gamma(k / 2.0)).exp()),
            Self::Rademacher(_) => Some(k.powf(1.5)),
            Self::Custom { .. } => None,
        }
    }
}

impl fmt::Debug for VectorLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorLaw({}, k={})", self.name(), self.dim())
    }
}

/// Spherically symmetric law on `R^n` with `E Y_1^2 = 1`.
#[derive(Clone)]
pub enum SphericalLaw {
    /// Standard Gaussian; `Var |Y|^2 = 2n`.
    Gaussian,
    /// Uniform on the sphere of radius `sqrt(n)`; `|Y|^2` is constant.
    UniformSphere,
    /// Caller-supplied law with a declared bound `a >= Var |Y|^2`.
    Custom { name: String, a: f64, sampler: Sampler },
}

impl SphericalLaw {
    pub fn name(&self) -> &str {
        match self {
            Self::Gaussian => "gaussian",
            Self::UniformSphere => "sphere",
            Self::Custom { name, .. } => name,
        }
    }

    pub fn variance_bound(&self, n: usize) -> f64 {
        match self {
            Self::Gaussian => 2.0 * n as f64,
            Self::UniformSphere => 0.0,
            Self::Custom { a, .. } => *a,
        }
    }

    pub fn sample(&self, rng: &mut SimRng, out: &mut [f64]) {
        match self {
            Self::Gaussian => out.iter_mut().for_each(|v| *v = rng.sample(StandardNormal)),
            Self::UniformSphere => loop {
                out.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                let r = out.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r > 0.0 {
                    let s = (out.len() as f64).sqrt() / r;
                    out.iter_mut().for_each(|v| *v *= s);
                    break;
                }
            },
            Self::Custom { sampler, .. } => sampler(rng, out),
        }
    }
}

impl fmt::Debug for SphericalLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SphericalLaw({})", self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    IidSum,
    Spherical,
    OrthogonalProjection,
    UnitaryProjection,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::IidSum => "iid_sum",
            Self::Spherical => "spherical",
            Self::OrthogonalProjection => "orthogonal_projection",
            Self::UnitaryProjection => "unitary_projection",
        })
    }
}

/// `lambda` constant (discrete models) or `lambda(eps) = eps^2 / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaForm {
    Constant(f64),
    EpsilonSquaredOverN(usize),
}

impl LambdaForm {
    pub fn at(&self, epsilon: Option<f64>) -> Result<f64> {
        match (self, epsilon) {
            (Self::Constant(l), None) => Ok(*l),
            (Self::EpsilonSquaredOverN(n), Some(e)) => Ok(e * e / *n as f64),
            (Self::Constant(_), Some(_)) => Err(Error::Parameter("discrete model takes no epsilon".into())),
            (Self::EpsilonSquaredOverN(_), None) => Err(Error::Parameter("continuous model needs epsilon".into())),
        }
    }
}

#[derive(Debug, Clone)]
pub enum PairModel {
    IidSum { law: VectorLaw, n: usize },
    Spherical { law: SphericalLaw, n: usize, k: usize },
    OrthogonalProjection { family: ProjectionFamily<f64> },
    UnitaryProjection { family: ProjectionFamily<Complex64> },
}

/// `W = n^{-1/2} sum Y_i`, `W' = W - (Y_I - X_I)/sqrt(n)`, `lambda = 1/n`.
pub fn make_iid_sum_pair(law: VectorLaw, n: usize) -> Result<PairModel> {
    if n == 0 {
        return Err(Error::Parameter("number of summands must be positive".into()));
    }
    if law.dim() == 0 {
        return Err(Error::Parameter("summand dimension must be positive".into()));
    }
    Ok(PairModel::IidSum { law, n })
}

/// `(P_k Y, P_k Y_eps)` with `Y_eps = U A_eps U^T Y`.
pub fn make_spherical_pair(law: SphericalLaw, n: usize, k: usize) -> Result<PairModel> {
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("projection rank must lie in [1, n={n}], got {k}")));
    }
    if n < 2 {
        return Err(Error::Parameter("ambient dimension must be at least 2".into()));
    }
    Ok(PairModel::Spherical { law, n, k })
}

/// `X = (Tr(A_1 M), ..., Tr(A_k M))` for Haar orthogonal `M`.
pub fn make_orthogonal_projection_pair(family: ProjectionFamily<f64>) -> Result<PairModel> {
    family.check_normalized(1e-8)?;
    if family.n() < 2 {
        return Err(Error::Parameter("ambient dimension must be at least 2".into()));
    }
    Ok(PairModel::OrthogonalProjection { family })
}

/// `W = (Tr(A_1 M), ..., Tr(A_k M))` for Haar unitary `M`.
pub fn make_unitary_projection_pair(family: ProjectionFamily<Complex64>) -> Result<PairModel> {
    family.check_normalized(1e-8)?;
    if family.n() < 2 {
        return Err(Error::Parameter("ambient dimension must be at least 2".into()));
    }
    Ok(PairModel::UnitaryProjection { family })
}

/// What one outer draw contributes to an audit.
#[derive(Debug, Clone)]
pub(crate) struct PairSample {
    pub x: Vec<f64>,
    /// One actual partner `x'`.
    pub x_prime: Vec<f64>,
    /// Mean increment over the inner draws.
    pub mean_increment: Vec<f64>,
    /// Mean of `Delta Delta^T` over the inner draws, row-major.
    pub mean_outer: Vec<f64>,
    /// Mean of `|Delta|^3` over the inner draws.
    pub mean_cube: f64,
    /// Per-sample E / F matrix (realified), row-major.
    pub surrogate: Vec<f64>,
    /// Complex models: `(||Gamma||, ||Lambda||)`.
    pub gamma_lambda: Option<(f64, f64)>,
    /// Model-specific second moments, `k x k` row-major.
    pub claim: Option<Vec<f64>>,
}

impl PairModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            Self::IidSum { .. } => ModelKind::IidSum,
            Self::Spherical { .. } => ModelKind::Spherical,
            Self::OrthogonalProjection { .. } => ModelKind::OrthogonalProjection,
            Self::UnitaryProjection { .. } => ModelKind::UnitaryProjection,
        }
    }

    /// Number of (real or complex) coordinates.
    pub fn k(&self) -> usize {
        match self {
            Self::IidSum { law, .. } => law.dim(),
            Self::Spherical { k, .. } => *k,
            Self::OrthogonalProjection { family } => family.k(),
            Self::UnitaryProjection { family } => family.k(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::IidSum { n, .. } | Self::Spherical { n, .. } => *n,
            Self::OrthogonalProjection { family } => family.n(),
            Self::UnitaryProjection { family } => family.n(),
        }
    }

    /// Real dimension of a sample.
    pub fn dim(&self) -> usize {
        match self {
            Self::UnitaryProjection { .. } => 2 * self.k(),
            _ => self.k(),
        }
    }

    /// Per-real-coordinate variance of the Gaussian target.
    pub fn sigma2(&self) -> f64 {
        match self {
            Self::UnitaryProjection { .. } => 0.5,
            _ => 1.0,
        }
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, Self::IidSum { .. })
    }

    pub fn lambda_form(&self) -> LambdaForm {
        match self {
            Self::IidSum { n, .. } => LambdaForm::Constant(1.0 / *n as f64),
            _ => LambdaForm::EpsilonSquaredOverN(self.n()),
        }
    }

    pub fn lambda(&self, epsilon: Option<f64>) -> Result<f64> {
        self.lambda_form().at(epsilon)
    }

    /// Surrogate type of the per-sample E/F matrix.
    pub fn surrogate_kind(&self) -> SurrogateKind {
        match self {
            Self::IidSum { .. } | Self::Spherical { .. } => SurrogateKind::Jensen,
            _ => SurrogateKind::Analytic,
        }
    }

    pub(crate) fn check_epsilon(&self, epsilon: Option<f64>) -> Result<()> {
        match (self.is_continuous(), epsilon) {
            (true, Some(e)) if e > 0.0 && e <= 0.5 => Ok(()),
            (true, Some(e)) => Err(Error::Parameter(format!("epsilon must lie in (0, 1/2], got {e}"))),
            (true, None) => Err(Error::Parameter(format!("{} needs epsilon", self.kind()))),
            (false, Some(_)) => Err(Error::Parameter("the i.i.d. sum pair takes no epsilon".into())),
            (false, None) => Ok(()),
        }
    }

    /// One draw of `x`.
    pub fn sample_x(&self, rng: &mut SimRng) -> Vec<f64> {
        match self {
            Self::IidSum { law, n } => {
                let k = law.dim();
                let mut w = vec![0.0; k];
                let mut y = vec![0.0; k];
                for _ in 0..*n {
                    law.sample(rng, &mut y);
                    w.iter_mut().zip(&y).for_each(|(a, b)| *a += b);
                }
                let s = 1.0 / (*n as f64).sqrt();
                w.iter_mut().for_each(|v| *v *= s);
                w
            }
            Self::Spherical { law, n, k } => {
                let mut y = vec![0.0; *n];
                law.sample(rng, &mut y);
                y.truncate(*k);
                y
            }
            Self::OrthogonalProjection { family } => {
                let m: Matrix<f64> = sample_haar(family.n(), rng);
                realify(&family.statistics(&m))
            }
            Self::UnitaryProjection { family } => {
                let m: Matrix<Complex64> = sample_haar(family.n(), rng);
                realify(&family.statistics(&m))
            }
        }
    }

    /// One exchangeable pair `(x, x')`.
    pub fn sample_pair(&self, rng: &mut SimRng, epsilon: Option<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_epsilon(epsilon)?;
        let s = self.draw(rng, epsilon, 1);
        Ok((s.x, s.x_prime))
    }

    /// One outer draw with `inner` partner draws (each with its antithetic
    /// twin for continuous models). The caller validates epsilon.
    pub(crate) fn draw(&self, rng: &mut SimRng, epsilon: Option<f64>, inner: usize) -> PairSample {
        let inner = inner.max(1);
        match self {
            Self::IidSum { law, n } => draw_iid(law, *n, rng, inner),
            Self::Spherical { law, n, k } => draw_spherical(law, *n, *k, rng, epsilon.unwrap_or(0.0), inner),
            Self::OrthogonalProjection { family } => draw_projection(family, rng, epsilon.unwrap_or(0.0), inner),
            Self::UnitaryProjection { family } => draw_projection(family, rng, epsilon.unwrap_or(0.0), inner),
        }
    }
}

fn realify<T: Scalar>(v: &[T]) -> Vec<f64> {
    if T::IS_COMPLEX {
        v.iter().flat_map(|z| [z.re(), z.im()]).collect()
    } else {
        v.iter().map(|z| z.re()).collect()
    }
}

/// Running sums of increments over inner draws.
struct IncrementAcc {
    d: usize,
    count: usize,
    sum: Vec<f64>,
    outer: Vec<f64>,
    cube: f64,
    first: Option<Vec<f64>>,
}

impl IncrementAcc {
    fn new(d: usize) -> Self {
        Self { d, count: 0, sum: vec![0.0; d], outer: vec![0.0; d * d], cube: 0.0, first: None }
    }

    fn push(&mut self, delta: &[f64]) {
        self.count += 1;
        for i in 0..self.d {
            self.sum[i] += delta[i];
            for j in 0..self.d {
                self.outer[i * self.d + j] += delta[i] * delta[j];
            }
        }
        self.cube += delta.iter().map(|v| v * v).sum::<f64>().powf(1.5);
        if self.first.is_none() {
            self.first = Some(delta.to_vec());
        }
    }

    fn finish(self, x: Vec<f64>, surrogate: Vec<f64>) -> PairSample {
        let c = self.count as f64;
        let first = self.first.expect("at least one inner draw");
        PairSample {
            x_prime: x.iter().zip(&first).map(|(a, b)| a + b).collect(),
            x,
            mean_increment: self.sum.iter().map(|v| v / c).collect(),
            mean_outer: self.outer.iter().map(|v| v / c).collect(),
            mean_cube: self.cube / c,
            surrogate,
            gamma_lambda: None,
            claim: None,
        }
    }
}

fn draw_iid(law: &VectorLaw, n: usize, rng: &mut SimRng, inner: usize) -> PairSample {
    let k = law.dim();
    let mut ys = vec![0.0; n * k];
    for i in 0..n {
        law.sample(rng, &mut ys[i * k..(i + 1) * k]);
    }
    let s = 1.0 / (n as f64).sqrt();
    let w: Vec<f64> = (0..k).map(|j| (0..n).map(|i| ys[i * k + j]).sum::<f64>() * s).collect();

    // E = (1/2n) sum_i (Y_i Y_i^T - I), the conditional form given all summands
    let mut e = vec![0.0; k * k];
    for i in 0..n {
        let y = &ys[i * k..(i + 1) * k];
        for a in 0..k {
            for b in 0..k {
                e[a * k + b] += y[a] * y[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..k {
            e[a * k + b] = (e[a * k + b] - if a == b { n as f64 } else { 0.0 }) / (2.0 * n as f64);
        }
    }

    let mut acc = IncrementAcc::new(k);
    let mut fresh = vec![0.0; k];
    let mut delta = vec![0.0; k];
    for _ in 0..inner {
        let idx = rng.random_range(0..n);
        law.sample(rng, &mut fresh);
        for j in 0..k {
            delta[j] = (fresh[j] - ys[idx * k + j]) * s;
        }
        acc.push(&delta);
    }
    acc.finish(w, e)
}

fn draw_spherical(law: &SphericalLaw, n: usize, k: usize, rng: &mut SimRng, eps: f64, inner: usize) -> PairSample {
    let mut y = vec![0.0; n];
    law.sample(rng, &mut y);
    let norm2: f64 = y.iter().map(|v| v * v).sum();
    let x: Vec<f64> = y[..k].to_vec();

    // F = (1/(n-1)) [(|Y|^2 - (n-1)) I - P Y (P Y)^T], conditional on all of Y
    let nm1 = (n - 1) as f64;
    let f: Vec<f64> = (0..k * k)
        .map(|ab| {
            let (a, b) = (ab / k, ab % k);
            let diag = if a == b { norm2 - nm1 } else { 0.0 };
            (diag - x[a] * x[b]) / nm1
        })
        .collect();

    let (cm1, _) = rotation_offsets(eps);
    let mut acc = IncrementAcc::new(k);
    let mut plus = vec![0.0; k];
    let mut minus = vec![0.0; k];
    for _ in 0..inner {
        let kf: Matrix<f64> = sample_frame(n, rng);
        let p0: f64 = (0..n).map(|r| kf[(r, 0)] * y[r]).sum();
        let p1: f64 = (0..n).map(|r| kf[(r, 1)] * y[r]).sum();
        // K [(c-1) I + eps C2] K^T Y and its column-swapped twin
        let (g0, g1) = (cm1 * p0 + eps * p1, cm1 * p1 - eps * p0);
        let (h0, h1) = (cm1 * p0 - eps * p1, cm1 * p1 + eps * p0);
        for i in 0..k {
            plus[i] = kf[(i, 0)] * g0 + kf[(i, 1)] * g1;
            minus[i] = kf[(i, 0)] * h0 + kf[(i, 1)] * h1;
        }
        acc.push(&plus);
        acc.push(&minus);
    }
    acc.finish(x, f)
}

fn draw_projection<T: GroupScalar>(family: &ProjectionFamily<T>, rng: &mut SimRng, eps: f64, inner: usize) -> PairSample {
    let n = family.n();
    let k = family.k();
    let m: Matrix<T> = sample_haar(n, rng);
    let w = family.statistics(&m);
    let x = realify(&w);
    let d = x.len();

    // Tr(A_i M A_j M) from the products A_i M
    let am: Vec<Matrix<T>> = family.matrices().iter().map(|a| a.matmul(&m).expect("square family")).collect();
    let mut tt = vec![<T as Scalar>::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            tt[i * k + j] = am[i].trace_of_product(&am[j]).expect("square family");
        }
    }

    let nm1 = (n - 1) as f64;
    let (surrogate, gamma_lambda, claim) = if T::IS_COMPLEX {
        let denom = nm1 * (n as f64 + 1.0);
        let mut gam = vec![Complex64::new(0.0, 0.0); k * k];
        let mut lam = vec![Complex64::new(0.0, 0.0); k * k];
        for i in 0..k {
            for j in 0..k {
                let wi = Complex64::new(Scalar::re(w[i]), Scalar::im(w[i]));
                let wj = Complex64::new(Scalar::re(w[j]), Scalar::im(w[j]));
                let t = Complex64::new(Scalar::re(tt[i * k + j]), Scalar::im(tt[i * k + j]));
                let delta = if i == j { 1.0 } else { 0.0 };
                gam[i * k + j] = (Complex64::new(delta, 0.0) - wi * wj.conj()) / denom;
                lam[i * k + j] = (wi * wj - t * n as f64) / denom;
            }
        }
        // 2x2 real blocks: (1/2)[[Re(g+l), Im(l-g)], [Im(l+g), Re(g-l)]]
        let mut f = vec![0.0; d * d];
        for i in 0..k {
            for j in 0..k {
                let (g, l) = (gam[i * k + j], lam[i * k + j]);
                let (r, c) = (2 * i, 2 * j);
                f[r * d + c] = 0.5 * (g + l).re;
                f[r * d + c + 1] = 0.5 * (l - g).im;
                f[(r + 1) * d + c] = 0.5 * (l + g).im;
                f[(r + 1) * d + c + 1] = 0.5 * (g - l).re;
            }
        }
        let gn = gam.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let ln = lam.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let claim = gam.iter().map(|z| z.norm_sqr()).collect();
        (f, Some((gn, ln)), Some(claim))
    } else {
        let mut f = vec![0.0; k * k];
        let mut claim = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                let delta = if i == j { 1.0 } else { 0.0 };
                let t = Scalar::re(tt[i * k + j]);
                f[i * k + j] = (delta - t) / nm1;
                claim[i * k + j] = (t - delta) * (t - delta);
            }
        }
        (f, None, Some(claim))
    };

    let (cm1, _) = rotation_offsets(eps);
    let mut acc = IncrementAcc::new(d);
    let mut plus = vec![<T as Scalar>::zero(); k];
    let mut minus = vec![<T as Scalar>::zero(); k];
    for _ in 0..inner {
        let kf: Matrix<T> = sample_frame(n, rng);
        // P = K* M, 2 x n
        let mut p = Matrix::<T>::zeros(2, n);
        for c in 0..2 {
            for r in 0..n {
                let w = Scalar::conj(kf[(r, c)]);
                for j in 0..n {
                    p[(c, j)] += w * m[(r, j)];
                }
            }
        }
        for (i, a) in family.matrices().iter().enumerate() {
            // S = K* M A_i K, then Tr(A_i K G K* M) = Tr(G S)
            let v = a.matmul(&kf).expect("frame has n rows");
            let s = p.matmul(&v).expect("conformable");
            let tr = s[(0, 0)] + s[(1, 1)];
            let twist = s[(1, 0)] - s[(0, 1)];
            plus[i] = tr * cm1 + twist * eps;
            minus[i] = tr * cm1 - twist * eps;
        }
        acc.push(&realify(&plus));
        acc.push(&realify(&minus));
    }
    let mut out = acc.finish(x, surrogate);
    out.gamma_lambda = gamma_lambda;
    out.claim = claim;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{rotation_increment, sample_frame};
    use crate::rng::seeded;

    #[test]
    fn gaussian_third_moment_matches_quadrature() {
        // E chi_1^3 = 2 sqrt(2/pi), E chi_2^3 = 3 sqrt(pi/2)
        let g1 = VectorLaw::Gaussian(1).third_moment().unwrap();
        assert!((g1 - 2.0 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        let g2 = VectorLaw::Gaussian(2).third_moment().unwrap();
        assert!((g2 - 3.0 * (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
        assert_eq!(VectorLaw::Rademacher(4).third_moment(), Some(8.0));
    }

    #[test]
    fn constructors_validate() {
        assert!(make_iid_sum_pair(VectorLaw::Gaussian(2), 0).is_err());
        assert!(make_spherical_pair(SphericalLaw::Gaussian, 5, 6).is_err());
        assert!(make_spherical_pair(SphericalLaw::Gaussian, 5, 0).is_err());
        let bad = ProjectionFamily::new(vec![Matrix::<f64>::identity(3).scale(2.0)]).unwrap();
        assert!(matches!(make_orthogonal_projection_pair(bad), Err(Error::Normalization(_))));
    }

    #[test]
    fn epsilon_rules() {
        let m = make_iid_sum_pair(VectorLaw::Gaussian(2), 5).unwrap();
        let mut rng = seeded(1);
        assert!(m.sample_pair(&mut rng, Some(0.1)).is_err());
        assert!(m.sample_pair(&mut rng, None).is_ok());
        let s = make_spherical_pair(SphericalLaw::UniformSphere, 5, 2).unwrap();
        assert!(s.sample_pair(&mut rng, None).is_err());
        assert!(s.sample_pair(&mut rng, Some(0.6)).is_err());
        assert!(s.sample_pair(&mut rng, Some(0.1)).is_ok());
        assert!((s.lambda(Some(0.1)).unwrap() - 0.002).abs() < 1e-15);
    }

    #[test]
    fn sphere_law_has_fixed_norm() {
        let mut rng = seeded(2);
        let mut y = vec![0.0; 7];
        SphericalLaw::UniformSphere.sample(&mut rng, &mut y);
        assert!((y.iter().map(|v| v * v).sum::<f64>() - 7.0).abs() < 1e-12);
    }

    // The fast trace path against the explicit increment M_eps - M.
    fn increment_matches<T: GroupScalar>(seed: u64) {
        let mut rng = seeded(seed);
        let n = 6;
        let fam = ProjectionFamily::<T>::random_orthonormal(n, 2, &mut rng).unwrap();
        let m: Matrix<T> = sample_haar(n, &mut rng);
        let kf: Matrix<T> = sample_frame(n, &mut rng);
        let eps = 0.2;
        let inc = rotation_increment(&kf, &m, eps);
        let (cm1, _) = rotation_offsets(eps);
        for a in fam.matrices() {
            let direct = a.trace_of_product(&inc).unwrap();
            let p = kf.adjoint().matmul(&m).unwrap();
            let s = p.matmul(&a.matmul(&kf).unwrap()).unwrap();
            let fast = (s[(0, 0)] + s[(1, 1)]) * cm1 + (s[(1, 0)] - s[(0, 1)]) * eps;
            assert!(Scalar::abs(direct - fast) < 1e-12);
        }
    }

    #[test]
    fn fast_increment_real() {
        increment_matches::<f64>(3);
    }

    #[test]
    fn fast_increment_complex() {
        increment_matches::<Complex64>(4);
    }

    #[test]
    fn realified_f_norm_identity() {
        // ||F||^2 = (||Gamma||^2 + ||Lambda||^2) / 2
        let mut rng = seeded(5);
        let fam = ProjectionFamily::<Complex64>::random_orthonormal(5, 2, &mut rng).unwrap();
        let model = make_unitary_projection_pair(fam).unwrap();
        let s = model.draw(&mut rng, Some(0.1), 1);
        let (g, l) = s.gamma_lambda.unwrap();
        let f2: f64 = s.surrogate.iter().map(|v| v * v).sum();
        assert!((f2 - 0.5 * (g * g + l * l)).abs() < 1e-14);
    }

    #[test]
    fn antithetic_pairs_cancel_the_linear_term() {
        let mut rng = seeded(6);
        let model = make_spherical_pair(SphericalLaw::Gaussian, 10, 3).unwrap();
        let eps = 1e-3;
        let s = model.draw(&mut rng, Some(eps), 1);
        // the mean of the two increments is O(eps^2)
        assert!(s.mean_increment.iter().all(|v| v.abs() < 20.0 * eps * eps));
        let single: f64 = s.x.iter().zip(&s.x_prime).map(|(a, b)| (a - b).abs()).sum();
        assert!(single > 0.0);
    }
}
