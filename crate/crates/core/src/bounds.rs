//! Explicit Wasserstein error bounds, evaluated from named inputs.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{op_norm, symmetric_eigenvalues, GramData};

/// Which bound a report evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    /// General exchangeable pair with a discrete perturbation.
    Discrete,
    /// Continuous family of pairs, `eps -> 0`.
    Cont,
    /// Complex-valued version of the continuous bound.
    Complex,
    /// Normalized sums of i.i.d. vectors.
    Basic,
    /// Projections of spherically symmetric vectors.
    Ksphere,
    /// Traces against a Haar orthogonal matrix.
    Mix,
    /// Traces against a Haar unitary matrix.
    Uthm,
}

impl Theorem {
    pub const ALL: [Theorem; 7] =
        [Self::Discrete, Self::Cont, Self::Complex, Self::Basic, Self::Ksphere, Self::Mix, Self::Uthm];

    pub fn name(self) -> &'static str {
        match self {
            Self::Discrete => "discrete",
            Self::Cont => "cont",
            Self::Complex => "complex",
            Self::Basic => "basic",
            Self::Ksphere => "ksphere",
            Self::Mix => "mix",
            Self::Uthm => "uthm",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| Error::Parameter(format!("unknown theorem {s:?}; expected one of discrete, cont, complex, basic, ksphere, mix, uthm")))
    }
}

/// Where an input number came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    MonteCarlo,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputValue {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInput {
    pub value: InputValue,
    pub provenance: Provenance,
}

/// Right-hand side of one bound with everything that went into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: Theorem,
    pub inputs: BTreeMap<String, BoundInput>,
    pub value: f64,
    pub formula_text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BoundReport {
    fn new(theorem: Theorem, formula: &str, value: f64) -> Self {
        Self { theorem, inputs: BTreeMap::new(), value, formula_text: formula.to_string(), notes: Vec::new() }
    }

    fn with(mut self, name: &str, value: f64, provenance: Provenance) -> Self {
        self.inputs.insert(name.to_string(), BoundInput { value: InputValue::Scalar(value), provenance });
        self
    }

    fn with_matrix(mut self, name: &str, value: Vec<Vec<f64>>, provenance: Provenance) -> Self {
        self.inputs.insert(name.to_string(), BoundInput { value: InputValue::Matrix(value), provenance });
        self
    }

    /// Re-tags a named input, e.g. after feeding it a Monte Carlo estimate.
    pub fn tag(mut self, name: &str, provenance: Provenance) -> Self {
        if let Some(i) = self.inputs.get_mut(name) {
            i.provenance = provenance;
        }
        self
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        match self.inputs.get(name)?.value {
            InputValue::Scalar(v) => Some(v),
            InputValue::Matrix(_) => None,
        }
    }
}

fn sqrt_2pi() -> f64 {
    (2.0 * PI).sqrt()
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be nonnegative and finite, got {v}")))
    }
}

/// `(m1/sigma) E||E|| + (sqrt(2 pi)/(24 sigma)) (m2/lambda) E|X'-X|^3`.
pub fn bound_discrete(sigma: f64, m1: f64, m2: f64, lambda: f64, e_norm: f64, third_moment: f64) -> Result<BoundReport> {
    positive("sigma", sigma)?;
    positive("lambda", lambda)?;
    for (n, v) in [("m1", m1), ("m2", m2), ("e_norm", e_norm), ("third_moment", third_moment)] {
        nonnegative(n, v)?;
    }
    let value = (m1 / sigma) * e_norm + sqrt_2pi() / (24.0 * sigma) * (m2 / lambda) * third_moment;
    Ok(BoundReport::new(
        Theorem::Discrete,
        "(M1(g)/sigma) E||E||_HS + (sqrt(2 pi)/(24 sigma)) (M2(g)/lambda) E|X' - X|^3",
        value,
    )
    .with("sigma", sigma, Provenance::User)
    .with("m1", m1, Provenance::User)
    .with("m2", m2, Provenance::User)
    .with("lambda", lambda, Provenance::User)
    .with("e_norm", e_norm, Provenance::MonteCarlo)
    .with("third_moment", third_moment, Provenance::MonteCarlo))
}

/// `E||F|| / sigma`.
pub fn bound_cont(sigma: f64, f_norm: f64) -> Result<BoundReport> {
    positive("sigma", sigma)?;
    nonnegative("f_norm", f_norm)?;
    Ok(BoundReport::new(Theorem::Cont, "(1/sigma) E||F||_HS", f_norm / sigma)
        .with("sigma", sigma, Provenance::User)
        .with("f_norm", f_norm, Provenance::MonteCarlo))
}

/// `E||Gamma|| + E||Lambda||`.
pub fn bound_complex(gamma_norm: f64, lambda_norm: f64) -> Result<BoundReport> {
    nonnegative("gamma_norm", gamma_norm)?;
    nonnegative("lambda_norm", lambda_norm)?;
    Ok(BoundReport::new(Theorem::Complex, "E||Gamma||_HS + E||Lambda||_HS", gamma_norm + lambda_norm)
        .with("gamma_norm", gamma_norm, Provenance::MonteCarlo)
        .with("lambda_norm", lambda_norm, Provenance::MonteCarlo))
}

/// `(m1/(2 sqrt n)) sqrt(E|Y|^4 - k) + (sqrt(2 pi)/(3 sqrt n)) m2 E|Y|^3`.
pub fn bound_basic(n: usize, k: usize, m1: f64, m2: f64, fourth_moment: f64, third_moment: f64) -> Result<BoundReport> {
    if n == 0 || k == 0 {
        return Err(Error::Parameter(format!("need n, k >= 1, got n={n}, k={k}")));
    }
    nonnegative("m1", m1)?;
    nonnegative("m2", m2)?;
    nonnegative("third_moment", third_moment)?;
    if !(fourth_moment >= k as f64) {
        return Err(Error::InconsistentMoments(format!(
            "E|Y|^4 = {fourth_moment} is below k = {k}, impossible for identity covariance"
        )));
    }
    let rn = (n as f64).sqrt();
    let value = m1 / (2.0 * rn) * (fourth_moment - k as f64).sqrt() + sqrt_2pi() / (3.0 * rn) * m2 * third_moment;
    Ok(BoundReport::new(
        Theorem::Basic,
        "(M1(g)/(2 sqrt(n))) sqrt(E|Y|^4 - k) + (sqrt(2 pi)/(3 sqrt(n))) M2(g) E|Y|^3",
        value,
    )
    .with("n", n as f64, Provenance::User)
    .with("k", k as f64, Provenance::User)
    .with("m1", m1, Provenance::User)
    .with("m2", m2, Provenance::User)
    .with("fourth_moment", fourth_moment, Provenance::Analytic)
    .with("third_moment", third_moment, Provenance::Analytic))
}

/// `k (sqrt(a) + 2) / (n - 1)` with `Var(|Y|^2) <= a`.
pub fn bound_ksphere(k: usize, n: usize, a: f64) -> Result<BoundReport> {
    if n < 2 {
        return Err(Error::Parameter(format!("need n >= 2, got {n}")));
    }
    nonnegative("a", a)?;
    let value = k as f64 * (a.sqrt() + 2.0) / (n as f64 - 1.0);
    Ok(BoundReport::new(Theorem::Ksphere, "k (sqrt(a) + 2) / (n - 1)", value)
        .with("k", k as f64, Provenance::User)
        .with("n", n as f64, Provenance::User)
        .with("a", a, Provenance::Analytic))
}

/// `k sqrt(2 ||C||_op) / (n - 1)` with `C = gram / n`.
pub fn bound_mix(k: usize, n: usize, gram: &GramData<f64>) -> Result<BoundReport> {
    if n < 2 {
        return Err(Error::Parameter(format!("need n >= 2, got {n}")));
    }
    if gram.k != k || gram.gram.shape() != (k, k) {
        return Err(Error::Dimension(format!("Gram data is for k={}, expected k={k}", gram.k)));
    }
    let nf = n as f64;
    let diag = (0..k).map(|i| (gram.gram[(i, i)] - nf).abs()).fold(0.0, f64::max);
    if diag > 1e-8 * nf {
        return Err(Error::Normalization(format!("Gram diagonal deviates from n={n} by {diag:e}")));
    }
    let c = gram.gram.scale(1.0 / nf);
    if c.max_abs_diff(&c.transpose())? > 1e-10 {
        return Err(Error::InvalidGram("Gram matrix is not symmetric".into()));
    }
    let smallest = symmetric_eigenvalues(&c)?.into_iter().fold(f64::INFINITY, f64::min);
    if smallest < -1e-10 {
        return Err(Error::InvalidGram(format!("Gram matrix has negative eigenvalue {smallest:e}")));
    }
    let c_op = op_norm(&c)?;
    let value = k as f64 * (2.0 * c_op).sqrt() / (nf - 1.0);
    let rows = (0..k).map(|i| c.row(i).to_vec()).collect();
    Ok(BoundReport::new(Theorem::Mix, "k sqrt(2 ||C||_op) / (n - 1), C = (1/n) [<B_i, B_j>_HS]", value)
        .with("k", k as f64, Provenance::User)
        .with("n", n as f64, Provenance::User)
        .with_matrix("c", rows, Provenance::Analytic)
        .with("c_op", c_op, Provenance::Analytic))
}

/// `3k/n` for `n >= 4`.
pub fn bound_uthm(k: usize, n: usize) -> Result<BoundReport> {
    if n < 4 {
        return Err(Error::Parameter(format!("the constant 3 is only established for n >= 4, got n={n}")));
    }
    let mut r = BoundReport::new(Theorem::Uthm, "c k / n with c = 3", 3.0 * k as f64 / n as f64)
        .with("k", k as f64, Provenance::User)
        .with("n", n as f64, Provenance::User);
    r.notes.push("asymptotically c can be taken arbitrarily close to sqrt(2)".into());
    Ok(r)
}
