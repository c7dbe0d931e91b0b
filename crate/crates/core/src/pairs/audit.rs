use serde::{Deserialize, Serialize};

use super::{ModelKind, PairModel, PairSample};
use crate::error::{Error, Result};
use crate::rng::par_chunks;
use crate::stats::{regression_slope, Estimate, Moments};

/// Inner partner draws per outer sample unless the caller overrides it.
pub const DEFAULT_INNER: usize = 8;

/// How a per-sample E/F matrix relates to the conditional one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurrogateKind {
    /// Closed form conditional on the underlying group element.
    Analytic,
    /// Conditioned on a finer sigma-field; its expected norm dominates the
    /// conditional one by contraction of conditional expectation.
    Jensen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateReport {
    #[serde(rename = "type")]
    pub kind: SurrogateKind,
    pub value: f64,
    pub se: f64,
}

/// Simulation audit of the conditions an exchangeable pair must satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalAudit {
    pub model: ModelKind,
    pub k: usize,
    pub n: usize,
    pub epsilon: Option<f64>,
    pub lambda: f64,
    pub sigma2: f64,
    pub samples: usize,
    pub inner: usize,
    pub seed: u64,
    /// Regression of `(x' - x)/lambda` on `x`; ideally `-I`.
    pub slope_matrix: Vec<Vec<f64>>,
    pub slope_se: Vec<Vec<f64>>,
    /// `E||E||`, `E||F||` or `E||Gamma|| + E||Lambda||`, whichever applies.
    pub surrogates: SurrogateReport,
    pub e_norm: Option<Estimate>,
    pub f_norm: Option<Estimate>,
    pub gamma_norm: Option<Estimate>,
    pub lambda_norm: Option<Estimate>,
    /// `E|x' - x|^3 / lambda`.
    pub third_moment: Estimate,
    /// Mean of the per-sample E/F matrix.
    pub mean_surrogate: Vec<Vec<Estimate>>,
    /// `(1/(2 lambda)) E[dx dx^T] - sigma^2 I - E[surrogate]`.
    pub second_moment_gap: Vec<Vec<Estimate>>,
    /// Allowed `O(eps^2)` bias of the second-moment comparison.
    pub second_moment_allowance: f64,
    /// `E[surrogate] - (E[x x^T] - sigma^2 I)`.
    pub covariance_gap: Vec<Vec<Estimate>>,
    /// `t(x, x') - t(x', x)` for a fixed asymmetric statistic `t`.
    pub exchangeability: Estimate,
    pub marginal_mean_gap: Vec<Estimate>,
    pub marginal_second_gap: Vec<Vec<Estimate>>,
    /// Orthogonal: `E(Tr(A_i M A_j M) - delta_ij)^2`; unitary: `E|gamma_ij|^2`.
    pub claim: Option<Vec<Vec<Estimate>>>,
    pub warnings: Vec<String>,
}

fn worst_z(cells: impl IntoIterator<Item = Estimate>, allowance: f64, z: f64) -> bool {
    cells.into_iter().all(|e| e.value.abs() <= z * e.se + allowance + 1e-12)
}

impl ConditionalAudit {
    /// `max |slope + I|` entrywise.
    pub fn slope_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.slope_matrix.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { -1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    pub fn second_moments_consistent(&self, z: f64) -> bool {
        worst_z(self.second_moment_gap.iter().flatten().copied(), self.second_moment_allowance, z)
    }

    pub fn covariance_identity_holds(&self, z: f64) -> bool {
        worst_z(self.covariance_gap.iter().flatten().copied(), 0.0, z)
    }

    pub fn exchangeable(&self, z: f64) -> bool {
        worst_z(std::iter::once(self.exchangeability), 0.0, z)
    }

    pub fn marginals_agree(&self, z: f64) -> bool {
        worst_z(self.marginal_mean_gap.iter().copied(), 0.0, z)
            && worst_z(self.marginal_second_gap.iter().flatten().copied(), 0.0, z)
    }
}

#[derive(Clone)]
struct Acc {
    d: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
    norm: Moments,
    gamma: Moments,
    lambda: Moments,
    cube: Moments,
    surrogate: Vec<Moments>,
    second_gap: Vec<Moments>,
    cov_gap: Vec<Moments>,
    exch: Moments,
    mean_gap: Vec<Moments>,
    second_marg: Vec<Moments>,
    claim: Vec<Moments>,
}

impl Acc {
    fn new(d: usize, kk: usize, cap: usize) -> Self {
        Self {
            d,
            xs: Vec::with_capacity(cap * d),
            ys: Vec::with_capacity(cap * d),
            norm: Moments::default(),
            gamma: Moments::default(),
            lambda: Moments::default(),
            cube: Moments::default(),
            surrogate: vec![Moments::default(); d * d],
            second_gap: vec![Moments::default(); d * d],
            cov_gap: vec![Moments::default(); d * d],
            exch: Moments::default(),
            mean_gap: vec![Moments::default(); d],
            second_marg: vec![Moments::default(); d * d],
            claim: vec![Moments::default(); kk * kk],
        }
    }

    fn push(&mut self, s: &PairSample, lambda: f64, sigma2: f64) {
        let d = self.d;
        self.xs.extend_from_slice(&s.x);
        self.ys.extend(s.mean_increment.iter().map(|v| v / lambda));
        self.norm.push(match s.gamma_lambda {
            Some((g, l)) => g + l,
            None => s.surrogate.iter().map(|v| v * v).sum::<f64>().sqrt(),
        });
        if let Some((g, l)) = s.gamma_lambda {
            self.gamma.push(g);
            self.lambda.push(l);
        }
        self.cube.push(s.mean_cube / lambda);
        for a in 0..d {
            for b in 0..d {
                let ab = a * d + b;
                let id = if a == b { sigma2 } else { 0.0 };
                let f = s.surrogate[ab];
                self.surrogate[ab].push(f);
                self.second_gap[ab].push(s.mean_outer[ab] / (2.0 * lambda) - id - f);
                self.cov_gap[ab].push(f - (s.x[a] * s.x[b] - id));
                self.second_marg[ab].push(s.x[a] * s.x[b] - s.x_prime[a] * s.x_prime[b]);
            }
            self.mean_gap[a].push(s.x[a] - s.x_prime[a]);
        }
        let t = |x: &[f64], y: &[f64]| x[0] + x[0] * y[d - 1] * y[d - 1] + x[d - 1].sin() * y[0];
        self.exch.push(t(&s.x, &s.x_prime) - t(&s.x_prime, &s.x));
        if let Some(c) = &s.claim {
            for (m, v) in self.claim.iter_mut().zip(c) {
                m.push(*v);
            }
        }
    }

    fn merge(&mut self, o: &Acc) {
        self.xs.extend_from_slice(&o.xs);
        self.ys.extend_from_slice(&o.ys);
        self.norm.merge(&o.norm);
        self.gamma.merge(&o.gamma);
        self.lambda.merge(&o.lambda);
        self.cube.merge(&o.cube);
        self.exch.merge(&o.exch);
        for (a, b) in [
            (&mut self.surrogate, &o.surrogate),
            (&mut self.second_gap, &o.second_gap),
            (&mut self.cov_gap, &o.cov_gap),
            (&mut self.mean_gap, &o.mean_gap),
            (&mut self.second_marg, &o.second_marg),
            (&mut self.claim, &o.claim),
        ] {
            a.iter_mut().zip(b).for_each(|(x, y)| x.merge(y));
        }
    }
}

fn grid(cells: &[Moments], width: usize) -> Vec<Vec<Estimate>> {
    cells.chunks(width).map(|r| r.iter().map(Moments::estimate).collect()).collect()
}

/// Audits `model` over `samples` outer draws with [`DEFAULT_INNER`] partner
/// draws each.
pub fn audit_pair(model: &PairModel, samples: usize, epsilon: Option<f64>, seed: u64) -> Result<ConditionalAudit> {
    audit_pair_with(model, samples, epsilon, seed, DEFAULT_INNER)
}

/// As [`audit_pair`] with an explicit number of inner draws per sample.
///
/// The linearity slope uses the mean increment over the inner draws; for
/// the rotation models every inner frame is paired with its column-swapped
/// twin, which has the same law.
pub fn audit_pair_with(
    model: &PairModel,
    samples: usize,
    epsilon: Option<f64>,
    seed: u64,
    inner: usize,
) -> Result<ConditionalAudit> {
    model.check_epsilon(epsilon)?;
    if inner == 0 {
        return Err(Error::Parameter("need at least one inner draw".into()));
    }
    let d = model.dim();
    if samples <= d + 1 {
        return Err(Error::Parameter(format!("{samples} samples cannot support a {d}-dimensional audit")));
    }
    let lambda = model.lambda(epsilon)?;
    let sigma2 = model.sigma2();
    let kk = model.k();

    let parts = par_chunks(seed, samples, |rng, len| {
        let mut acc = Acc::new(d, kk, len);
        for _ in 0..len {
            let s = model.draw(rng, epsilon, inner);
            acc.push(&s, lambda, sigma2);
        }
        acc
    });
    let mut acc = Acc::new(d, kk, samples);
    for p in &parts {
        acc.merge(p);
    }

    let (slope_matrix, slope_se) = regression_slope(&acc.xs, &acc.ys, d, d)?;
    let norm = acc.norm.estimate();
    let complex = model.kind() == ModelKind::UnitaryProjection;
    let mut warnings = Vec::new();
    if samples < 1000 {
        warnings.push(format!("only {samples} samples; estimates are imprecise below 1000"));
    }
    let audit = ConditionalAudit {
        model: model.kind(),
        k: kk,
        n: model.n(),
        epsilon,
        lambda,
        sigma2,
        samples,
        inner,
        seed,
        slope_matrix,
        slope_se,
        surrogates: SurrogateReport { kind: model.surrogate_kind(), value: norm.value, se: norm.se },
        e_norm: (model.kind() == ModelKind::IidSum).then_some(norm),
        f_norm: (!complex && model.is_continuous()).then_some(norm),
        gamma_norm: complex.then(|| acc.gamma.estimate()),
        lambda_norm: complex.then(|| acc.lambda.estimate()),
        third_moment: acc.cube.estimate(),
        mean_surrogate: grid(&acc.surrogate, d),
        second_moment_gap: grid(&acc.second_gap, d),
        second_moment_allowance: epsilon.map_or(0.0, |e| model.n() as f64 * e * e),
        covariance_gap: grid(&acc.cov_gap, d),
        exchangeability: acc.exch.estimate(),
        marginal_mean_gap: acc.mean_gap.iter().map(Moments::estimate).collect(),
        marginal_second_gap: grid(&acc.second_marg, d),
        claim: matches!(model.kind(), ModelKind::OrthogonalProjection | ModelKind::UnitaryProjection)
            .then(|| grid(&acc.claim, kk)),
        warnings,
    };
    Ok(audit)
}

/// Audits at two epsilons on common random numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonConsistency {
    pub large: ConditionalAudit,
    pub small: ConditionalAudit,
    /// Largest `|slope_large - slope_small| / sqrt(se_large^2 + se_small^2)`.
    pub slope_z: f64,
    pub consistent: bool,
}

/// Richardson-style check that a continuous model's audit is stable as
/// epsilon shrinks: slopes at the two values agree within four combined SEs.
pub fn two_epsilon_check(model: &PairModel, samples: usize, eps_large: f64, eps_small: f64, seed: u64) -> Result<EpsilonConsistency> {
    if !model.is_continuous() {
        return Err(Error::Parameter("epsilon consistency applies to continuous models".into()));
    }
    if !(eps_small < eps_large) {
        return Err(Error::Parameter(format!("need eps_small < eps_large, got {eps_small} and {eps_large}")));
    }
    let large = audit_pair(model, samples, Some(eps_large), seed)?;
    let small = audit_pair(model, samples, Some(eps_small), seed)?;
    let mut slope_z = 0.0f64;
    for i in 0..large.slope_matrix.len() {
        for j in 0..large.slope_matrix.len() {
            let gap = (large.slope_matrix[i][j] - small.slope_matrix[i][j]).abs();
            let se = large.slope_se[i][j].hypot(small.slope_se[i][j]);
            slope_z = slope_z.max(if se > 0.0 { gap / se } else if gap > 1e-12 { f64::INFINITY } else { 0.0 });
        }
    }
    Ok(EpsilonConsistency { large, small, slope_z, consistent: slope_z <= 4.0 })
}
