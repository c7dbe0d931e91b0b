//! Haar sampling on O(n) and U(n), the small-rotation perturbation used to
//! build exchangeable pairs of group elements, and exact low-degree moments.

mod moments;

pub use moments::{
    battery_queries, mc_moment_batch, mc_moment_estimate, moment_oracle, orthogonal_moment_oracle,
    run_battery, unitary_moment_oracle, Factor, FactorKind, Group, MomentEstimate, MomentQuery,
    MomentRecord,
};

use nalgebra::ComplexField;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Matrix, RealMatrix, Scalar};

/// Scalars that support QR through nalgebra; implemented by `f64` and `Complex64`.
pub trait GroupScalar: Scalar + ComplexField<RealField = f64> {}
impl GroupScalar for f64 {}
impl GroupScalar for Complex64 {}

/// A Haar-distributed element of O(n) (real `T`) or U(n) (complex `T`).
pub fn sample_haar<T: GroupScalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix<T> {
    assert!(n >= 1, "group dimension must be positive");
    loop {
        let g = Matrix::<T>::gaussian(n, n, rng);
        // a Ginibre matrix is singular with probability zero
        if let Ok((q, _)) = crate::matrix::qr_decompose(&g) {
            return q;
        }
    }
}

pub fn sample_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RealMatrix {
    sample_haar(n, rng)
}

pub fn sample_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    sample_haar(n, rng)
}

/// The first two columns of a Haar element, as an `n x 2` matrix.
///
/// Drawn by orthonormalizing two Gaussian vectors, which costs `O(n)` instead
/// of the `O(n^3)` of a full draw and has the same law.
pub fn sample_frame<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix<T> {
    assert!(n >= 2, "a two-column frame needs n >= 2");
    loop {
        let a: Vec<T> = (0..n).map(|_| T::gaussian(rng)).collect();
        let b: Vec<T> = (0..n).map(|_| T::gaussian(rng)).collect();
        let na = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if na == 0.0 {
            continue;
        }
        let e1: Vec<T> = a.iter().map(|&x| x * (1.0 / na)).collect();
        // b - <b, e1> e1 with <x, y> = sum x_i conj(y_i)
        let c = e1.iter().zip(&b).fold(T::zero(), |s, (&e, &y)| s + y * e.conj());
        let r: Vec<T> = b.iter().zip(&e1).map(|(&y, &e)| y - e * c).collect();
        let nr = r.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if nr <= 1e-12 * na {
            continue;
        }
        let mut k = Matrix::zeros(n, 2);
        for i in 0..n {
            k[(i, 0)] = e1[i];
            k[(i, 1)] = r[i] * (1.0 / nr);
        }
        return k;
    }
}

/// `(sqrt(1 - eps^2) - 1, delta)` with `delta = sqrt(1 - eps^2) - 1 + eps^2/2`,
/// both evaluated without cancellation.
pub fn rotation_offsets(epsilon: f64) -> (f64, f64) {
    let c = (1.0 - epsilon * epsilon).sqrt();
    let cm1 = -epsilon * epsilon / (1.0 + c);
    let e4 = epsilon.powi(4);
    (cm1, -e4 / (2.0 * (1.0 + c) * (1.0 + c)))
}

/// The block rotation `[[c, eps], [-eps, c]] (+) I_{n-2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationPerturbation {
    pub epsilon: f64,
    pub dimension: usize,
    pub a_eps: RealMatrix,
    pub delta: f64,
}

impl RotationPerturbation {
    pub fn new(epsilon: f64, dimension: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if dimension < 2 {
            return Err(Error::Parameter(format!("rotation needs dimension >= 2, got {dimension}")));
        }
        let c = (1.0 - epsilon * epsilon).sqrt();
        let block = RealMatrix::from_rows(&[vec![c, epsilon], vec![-epsilon, c]]);
        let a_eps = block.direct_sum(&RealMatrix::identity(dimension - 2));
        Ok(Self { epsilon, dimension, a_eps, delta: rotation_offsets(epsilon).1 })
    }
}

/// Witness of one conjugated rotation `U A_eps U*`: the first two columns
/// `K` of `U` and `Q = K C_2 K*`.
#[derive(Debug, Clone)]
pub struct ConjugatedRotation<T: Scalar> {
    pub u: Matrix<T>,
    pub k_cols: Matrix<T>,
    pub q: Matrix<T>,
}

impl<T: Scalar> ConjugatedRotation<T> {
    fn from_u(u: Matrix<T>) -> Self {
        let n = u.rows();
        let k_cols = Matrix::from_fn(n, 2, |i, j| u[(i, j)]);
        let q = twist(&k_cols);
        Self { u, k_cols, q }
    }

    /// `K K*`.
    pub fn kk(&self) -> Matrix<T> {
        let n = self.k_cols.rows();
        Matrix::from_fn(n, n, |i, j| {
            self.k_cols[(i, 0)] * self.k_cols[(j, 0)].conj() + self.k_cols[(i, 1)] * self.k_cols[(j, 1)].conj()
        })
    }
}

/// `K C_2 K*` for an `n x 2` frame `K`, with `C_2 = [[0, 1], [-1, 0]]`.
pub fn twist<T: Scalar>(k: &Matrix<T>) -> Matrix<T> {
    let n = k.rows();
    Matrix::from_fn(n, n, |i, j| k[(i, 0)] * k[(j, 1)].conj() - k[(i, 1)] * k[(j, 0)].conj())
}

/// `K [(c - 1) I_2 + eps C_2] K* m`: the increment `m_eps - m`.
pub fn rotation_increment<T: Scalar>(k: &Matrix<T>, m: &Matrix<T>, epsilon: f64) -> Matrix<T> {
    let (cm1, _) = rotation_offsets(epsilon);
    let n = k.rows();
    // G = [(c-1) I + eps C2] K* m, a 2 x n matrix
    let mut kstar_m = Matrix::<T>::zeros(2, m.cols());
    for a in 0..2 {
        for r in 0..n {
            let w = k[(r, a)].conj();
            for j in 0..m.cols() {
                kstar_m[(a, j)] += w * m[(r, j)];
            }
        }
    }
    let g = Matrix::from_fn(2, m.cols(), |a, j| {
        let (own, other, sign) = if a == 0 { (0, 1, 1.0) } else { (1, 0, -1.0) };
        kstar_m[(own, j)] * cm1 + kstar_m[(other, j)] * (sign * epsilon)
    });
    Matrix::from_fn(n, m.cols(), |i, j| k[(i, 0)] * g[(0, j)] + k[(i, 1)] * g[(1, j)])
}

fn unitarity_defect<T: Scalar>(m: &Matrix<T>) -> Result<f64> {
    let prod = m.matmul(&m.adjoint())?;
    prod.max_abs_diff(&Matrix::identity(m.rows()))
}

/// Builds `m_eps = U A_eps U* m` for a fresh Haar `U`.
pub fn conjugated_rotation_pair<T: GroupScalar, R: Rng + ?Sized>(
    m: &Matrix<T>,
    epsilon: f64,
    rng: &mut R,
) -> Result<(Matrix<T>, ConjugatedRotation<T>)> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1/2], got {epsilon}")));
    }
    if !m.is_square() || m.rows() < 2 {
        return Err(Error::Dimension(format!("need a square group element of size >= 2, got {}x{}", m.rows(), m.cols())));
    }
    let defect = unitarity_defect(m)?;
    if defect > 1e-10 {
        return Err(Error::Parameter(format!("input is not in the group (defect {defect:e})")));
    }
    let witness = ConjugatedRotation::from_u(sample_haar::<T, _>(m.rows(), rng));
    let m_eps = m.try_add(&rotation_increment(&witness.k_cols, m, epsilon))?;
    Ok((m_eps, witness))
}
