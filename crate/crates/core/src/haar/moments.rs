//! Exact degree-2 and degree-4 moments of Haar entries, and their Monte Carlo
//! counterparts.
//!
//! Queries are products of entries `u(i,j)` (orthogonal) or `h(i,j)`,
//! `h*(i,j)` (unitary), plus the two-column twists
//! `q(i,j) = u_i1 u_j2 - u_i2 u_j1` and `t(i,j) = h_i1 conj(h_j2) - h_i2 conj(h_j1)`,
//! which count as degree two. Oracles expand twists into entry monomials
//! and sum Weingarten weights in exact rational arithmetic.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sample_haar, GroupScalar};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, Scalar};
use crate::rng::{fork_seed, par_chunks};
use crate::stats::{Estimate, Moments};

type Q = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Orthogonal,
    Unitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorKind {
    Entry,
    Twist,
}

/// One factor of a query; indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub kind: FactorKind,
    pub row: usize,
    pub col: usize,
    pub conj: bool,
}

impl Factor {
    fn degree(&self) -> usize {
        match self.kind {
            FactorKind::Entry => 1,
            FactorKind::Twist => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentQuery {
    pub group: Group,
    pub factors: Vec<Factor>,
    pub dimension: usize,
}

impl MomentQuery {
    pub fn new(group: Group, factors: Vec<Factor>, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Parameter("dimension must be positive".into()));
        }
        for f in &factors {
            if f.row == 0 || f.col == 0 || f.row > dimension || f.col > dimension {
                return Err(Error::Parameter(format!(
                    "index ({}, {}) outside [1, {dimension}]",
                    f.row, f.col
                )));
            }
            if group == Group::Orthogonal && f.conj {
                return Err(Error::Parameter("orthogonal entries are real; drop the conjugate".into()));
            }
            if f.kind == FactorKind::Twist && dimension < 2 {
                return Err(Error::Parameter("twist factors need dimension >= 2".into()));
            }
        }
        let q = Self { group, factors, dimension };
        let d = q.degree();
        if d != 2 && d != 4 {
            return Err(Error::NotImplemented(format!("moments of degree {d}; only 2 and 4 are supported")));
        }
        Ok(q)
    }

    pub fn degree(&self) -> usize {
        self.factors.iter().map(Factor::degree).sum()
    }

    /// Value of the factor product on one group element.
    fn evaluate(&self, get: impl Fn(usize, usize) -> Complex64) -> Complex64 {
        let cj = |z: Complex64, c: bool| if c { z.conj() } else { z };
        self.factors.iter().fold(Complex64::new(1.0, 0.0), |acc, f| {
            let (i, j) = (f.row - 1, f.col - 1);
            let v = match f.kind {
                FactorKind::Entry => cj(get(i, j), f.conj),
                FactorKind::Twist => match self.group {
                    Group::Orthogonal => get(i, 0) * get(j, 1) - get(i, 1) * get(j, 0),
                    Group::Unitary => cj(get(i, 0) * get(j, 1).conj() - get(i, 1) * get(j, 0).conj(), f.conj),
                },
            };
            acc * v
        })
    }

    /// Expansion into signed monomials of `(row, col, conj)` entries, 0-based.
    fn monomials(&self) -> Vec<(i128, Vec<(usize, usize, bool)>)> {
        let mut out: Vec<(i128, Vec<(usize, usize, bool)>)> = vec![(1, Vec::new())];
        for f in &self.factors {
            let (i, j) = (f.row - 1, f.col - 1);
            let terms: Vec<(i128, Vec<(usize, usize, bool)>)> = match f.kind {
                FactorKind::Entry => vec![(1, vec![(i, j, f.conj)])],
                FactorKind::Twist => {
                    let unitary = self.group == Group::Unitary;
                    let (c1, c2) = (unitary && f.conj, unitary && !f.conj);
                    vec![(1, vec![(i, 0, c1), (j, 1, c2)]), (-1, vec![(i, 1, c1), (j, 0, c2)])]
                }
            };
            out = out
                .iter()
                .flat_map(|(s, m)| {
                    terms.iter().map(move |(t, extra)| {
                        let mut v = m.clone();
                        v.extend_from_slice(extra);
                        (s * t, v)
                    })
                })
                .collect();
        }
        out
    }
}

impl fmt::Display for MomentQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (prefix, entry, twist) = match self.group {
            Group::Orthogonal => ("O", "u", "q"),
            Group::Unitary => ("U", "h", "t"),
        };
        write!(f, "{prefix}:")?;
        for x in &self.factors {
            let name = if x.kind == FactorKind::Entry { entry } else { twist };
            let star = if x.conj { "*" } else { "" };
            write!(f, "{name}{star}({},{})", x.row, x.col)?;
        }
        write!(f, "@n={}", self.dimension)
    }
}

impl FromStr for MomentQuery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse { line: 1, message: format!("{msg} in query {s:?}") };
        let s = s.trim();
        let (head, rest) = s.split_once(':').ok_or_else(|| bad("missing group prefix"))?;
        let group = match head.trim() {
            "O" => Group::Orthogonal,
            "U" => Group::Unitary,
            _ => return Err(bad("group must be O or U")),
        };
        let (body, dim) = rest.rsplit_once("@n=").ok_or_else(|| bad("missing @n="))?;
        let dimension: usize = dim.trim().parse().map_err(|_| bad("dimension is not a count"))?;
        let (entry, twist) = match group {
            Group::Orthogonal => ('u', 'q'),
            Group::Unitary => ('h', 't'),
        };

        let mut factors = Vec::new();
        let mut chars = body.trim().chars().peekable();
        while let Some(c) = chars.next() {
            if c.is_whitespace() {
                continue;
            }
            let kind = if c == entry {
                FactorKind::Entry
            } else if c == twist {
                FactorKind::Twist
            } else {
                return Err(bad(&format!("unexpected symbol {c:?}")));
            };
            let conj = chars.peek() == Some(&'*');
            if conj {
                chars.next();
            }
            if chars.next() != Some('(') {
                return Err(bad("expected '('"));
            }
            let inner: String = chars.by_ref().take_while(|&c| c != ')').collect();
            let (r, c) = inner.split_once(',').ok_or_else(|| bad("expected two indices"))?;
            let row = r.trim().parse().map_err(|_| bad("row index is not a count"))?;
            let col = c.trim().parse().map_err(|_| bad("column index is not a count"))?;
            factors.push(Factor { kind, row, col, conj });
        }
        if factors.is_empty() {
            return Err(bad("no factors"));
        }
        MomentQuery::new(group, factors, dimension)
    }
}

const PAIRINGS: [[(usize, usize); 2]; 3] = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];

fn orthogonal_monomial(mono: &[(usize, usize, bool)], n: i128) -> Result<Q> {
    let rows: Vec<usize> = mono.iter().map(|m| m.0).collect();
    let cols: Vec<usize> = mono.iter().map(|m| m.1).collect();
    match mono.len() {
        2 => Ok(if rows[0] == rows[1] && cols[0] == cols[1] { Q::new(1, n) } else { Q::from_integer(0) }),
        4 => {
            if n < 2 {
                return Err(Error::Parameter("degree-4 orthogonal moments need n >= 2".into()));
            }
            let denom = (n - 1) * n * (n + 2);
            let fits = |idx: &[usize], p: &[(usize, usize); 2]| p.iter().all(|&(a, b)| idx[a] == idx[b]);
            let mut acc = Q::from_integer(0);
            for (pi, p) in PAIRINGS.iter().enumerate() {
                if !fits(&rows, p) {
                    continue;
                }
                for (qi, q) in PAIRINGS.iter().enumerate() {
                    if fits(&cols, q) {
                        acc += if pi == qi { Q::new(n + 1, denom) } else { Q::new(-1, denom) };
                    }
                }
            }
            Ok(acc)
        }
        d => Err(Error::NotImplemented(format!("orthogonal moments of degree {d}"))),
    }
}

fn unitary_monomial(mono: &[(usize, usize, bool)], n: i128) -> Result<Q> {
    let plain: Vec<(usize, usize)> = mono.iter().filter(|m| !m.2).map(|m| (m.0, m.1)).collect();
    let conj: Vec<(usize, usize)> = mono.iter().filter(|m| m.2).map(|m| (m.0, m.1)).collect();
    if plain.len() != conj.len() {
        return Ok(Q::from_integer(0));
    }
    match plain.len() {
        1 => Ok(if plain[0] == conj[0] { Q::new(1, n) } else { Q::from_integer(0) }),
        2 => {
            if n < 2 {
                return Err(Error::Parameter("degree-4 unitary moments need n >= 2".into()));
            }
            let perms: [[usize; 2]; 2] = [[0, 1], [1, 0]];
            let mut acc = Q::from_integer(0);
            for (si, s) in perms.iter().enumerate() {
                if !(0..2).all(|t| plain[t].0 == conj[s[t]].0) {
                    continue;
                }
                for (ti, t) in perms.iter().enumerate() {
                    if (0..2).all(|u| plain[u].1 == conj[t[u]].1) {
                        acc += if si == ti { Q::new(1, (n - 1) * (n + 1)) } else { Q::new(-1, (n - 1) * n * (n + 1)) };
                    }
                }
            }
            Ok(acc)
        }
        d => Err(Error::NotImplemented(format!("unitary moments of degree {}", 2 * d))),
    }
}

fn exact(q: &MomentQuery) -> Result<Q> {
    let n = q.dimension as i128;
    let mut acc = Q::from_integer(0);
    for (sign, mono) in q.monomials() {
        let v = match q.group {
            Group::Orthogonal => orthogonal_monomial(&mono, n)?,
            Group::Unitary => unitary_monomial(&mono, n)?,
        };
        acc += v * sign;
    }
    Ok(acc)
}

fn to_f64(r: Q) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exact `E[product]` over Haar measure on O(n).
pub fn orthogonal_moment_oracle(q: &MomentQuery) -> Result<f64> {
    if q.group != Group::Orthogonal {
        return Err(Error::Parameter(format!("{q} is not an orthogonal query")));
    }
    exact(q).map(to_f64)
}

/// Exact `E[product]` over Haar measure on U(n).
pub fn unitary_moment_oracle(q: &MomentQuery) -> Result<f64> {
    if q.group != Group::Unitary {
        return Err(Error::Parameter(format!("{q} is not a unitary query")));
    }
    exact(q).map(to_f64)
}

pub fn moment_oracle(q: &MomentQuery) -> Result<f64> {
    match q.group {
        Group::Orthogonal => orthogonal_moment_oracle(q),
        Group::Unitary => unitary_moment_oracle(q),
    }
}

/// Real and imaginary parts of a Monte Carlo moment estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub re: Estimate,
    pub im: Estimate,
    pub samples: usize,
}

impl MomentEstimate {
    pub fn within(&self, exact: f64, z: f64) -> bool {
        self.re.within(exact, z) && self.im.within(0.0, z)
    }
}

fn batch_on<T: GroupScalar>(queries: &[MomentQuery], samples: usize, seed: u64) -> Vec<MomentEstimate>
where
    Complex64: From<T>,
{
    let n = queries[0].dimension;
    let parts = par_chunks(seed, samples, |rng, len| {
        let mut acc = vec![(Moments::default(), Moments::default()); queries.len()];
        for _ in 0..len {
            let h: Matrix<T> = sample_haar(n, rng);
            for (q, (re, im)) in queries.iter().zip(acc.iter_mut()) {
                let v = q.evaluate(|i, j| Complex64::from(h[(i, j)]));
                re.push(v.re);
                im.push(v.im);
            }
        }
        acc
    });
    (0..queries.len())
        .map(|i| {
            let mut re = Moments::default();
            let mut im = Moments::default();
            for p in &parts {
                re.merge(&p[i].0);
                im.merge(&p[i].1);
            }
            MomentEstimate { re: re.estimate(), im: im.estimate(), samples }
        })
        .collect()
}

/// Monte Carlo estimates of several queries from one shared set of draws.
/// All queries must name the same group and dimension.
pub fn mc_moment_batch(queries: &[MomentQuery], samples: usize, seed: u64) -> Result<Vec<MomentEstimate>> {
    if samples < 100 {
        return Err(Error::Parameter(format!("need at least 100 samples, got {samples}")));
    }
    let Some(first) = queries.first() else {
        return Ok(Vec::new());
    };
    if queries.iter().any(|q| q.group != first.group || q.dimension != first.dimension) {
        return Err(Error::Parameter("batched queries must share group and dimension".into()));
    }
    Ok(match first.group {
        Group::Orthogonal => batch_on::<f64>(queries, samples, seed),
        Group::Unitary => batch_on::<Complex64>(queries, samples, seed),
    })
}

/// Sample mean and standard error of the query's product over Haar draws.
pub fn mc_moment_estimate<R: Rng + ?Sized>(q: &MomentQuery, samples: usize, rng: &mut R) -> Result<MomentEstimate> {
    let seed = fork_seed(rng);
    Ok(mc_moment_batch(std::slice::from_ref(q), samples, seed)?.remove(0))
}

/// Query bodies of the standard battery; each is evaluated at several `n`.
const BATTERY: [&str; 30] = [
    "O:u(1,1)u(1,1)",
    "O:u(1,1)u(1,2)",
    "O:u(1,2)u(1,2)",
    "O:u(1,1)u(2,2)",
    "O:u(1,1)u(1,1)u(1,1)u(1,1)",
    "O:u(1,1)u(1,1)u(2,2)u(2,2)",
    "O:u(1,1)u(1,1)u(1,2)u(1,2)",
    "O:u(1,1)u(2,2)u(1,2)u(2,1)",
    "O:u(1,1)u(1,1)u(1,1)u(1,2)",
    "O:u(1,2)u(2,3)u(3,4)u(4,1)",
    "O:u(1,1)u(2,1)u(3,1)u(4,1)",
    "O:u(1,3)u(1,3)u(2,4)u(2,4)",
    "O:q(1,2)q(1,2)",
    "O:q(1,2)q(2,1)",
    "O:q(1,2)q(1,3)",
    "O:q(1,1)q(1,1)",
    "O:q(1,2)q(3,4)",
    "U:h(1,1)h*(1,1)",
    "U:h(1,1)h*(1,2)",
    "U:h(2,3)h*(2,3)",
    "U:h(1,1)h(1,1)",
    "U:h(1,1)h(2,2)h*(1,1)h*(2,2)",
    "U:h(1,1)h(1,1)h*(1,1)h*(1,1)",
    "U:h(1,1)h(2,2)h*(1,2)h*(2,1)",
    "U:h(1,1)h(1,2)h*(1,1)h*(1,2)",
    "U:h(1,1)h(2,1)h*(1,1)h*(1,1)",
    "U:t(1,2)t(2,1)",
    "U:t(1,1)t(2,2)",
    "U:t(1,2)t(1,2)",
    "U:t(1,1)t(1,1)",
];

/// The battery instantiated at dimension `n` (requires `n >= 4`).
pub fn battery_queries(n: usize) -> Result<Vec<MomentQuery>> {
    BATTERY.iter().map(|b| format!("{b}@n={n}").parse()).collect()
}

/// One line of a battery report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub query: String,
    pub exact: f64,
    pub estimate: f64,
    pub se: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se_im: Option<f64>,
    pub samples: usize,
    pub pass: bool,
}

impl MomentRecord {
    pub fn new(q: &MomentQuery, exact: f64, est: &MomentEstimate) -> Self {
        let complex = q.group == Group::Unitary;
        Self {
            query: q.to_string(),
            exact,
            estimate: est.re.value,
            se: est.re.se,
            estimate_im: complex.then_some(est.im.value),
            se_im: complex.then_some(est.im.se),
            samples: est.samples,
            pass: est.within(exact, 4.0),
        }
    }
}

/// Runs `queries` grouped by (group, n), sharing draws within each group.
pub fn run_queries(queries: &[MomentQuery], samples: usize, seed: u64) -> Result<Vec<MomentRecord>> {
    let mut keys: Vec<(Group, usize)> = Vec::new();
    for q in queries {
        if !keys.contains(&(q.group, q.dimension)) {
            keys.push((q.group, q.dimension));
        }
    }
    let mut out: Vec<Option<MomentRecord>> = vec![None; queries.len()];
    for (g, n) in keys {
        let idx: Vec<usize> = (0..queries.len()).filter(|&i| queries[i].group == g && queries[i].dimension == n).collect();
        let batch: Vec<MomentQuery> = idx.iter().map(|&i| queries[i].clone()).collect();
        let salt = (n as u64) << 1 | u64::from(g == Group::Unitary);
        let est = mc_moment_batch(&batch, samples, seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))?;
        for (k, &i) in idx.iter().enumerate() {
            let exact = moment_oracle(&queries[i])?;
            out[i] = Some(MomentRecord::new(&queries[i], exact, &est[k]));
        }
    }
    Ok(out.into_iter().map(|r| r.expect("every query belongs to a group")).collect())
}

/// The full battery at each dimension in `ns`.
pub fn run_battery(ns: &[usize], samples: usize, seed: u64) -> Result<Vec<MomentRecord>> {
    let mut queries = Vec::new();
    for &n in ns {
        queries.extend(battery_queries(n)?);
    }
    run_queries(&queries, samples, seed)
}
