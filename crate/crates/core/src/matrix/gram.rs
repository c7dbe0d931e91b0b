use serde::{Deserialize, Serialize};

use super::{hs_inner, hs_norm, Matrix, Scalar};
use crate::error::{Error, Result};

const DEPENDENCE_THRESHOLD: f64 = 1e-12;

/// Gram matrix of Hilbert–Schmidt inner products of a family, with its scale
/// (the ambient dimension `n` for normalized families).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramData<T: Scalar> {
    pub k: usize,
    pub gram: Matrix<T>,
    pub scale: f64,
}

impl<T: Scalar> GramData<T> {
    /// `gram[i][j] = <B_i, B_j>`.
    pub fn of_family(family: &[Matrix<T>], scale: f64) -> Result<Self> {
        let k = family.len();
        let mut gram = Matrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                gram[(i, j)] = hs_inner(&family[i], &family[j])?;
            }
        }
        Ok(Self { k, gram, scale })
    }

    /// `C = gram / scale`.
    pub fn normalized(&self) -> Matrix<T> {
        self.gram.scale(T::from_real(1.0 / self.scale))
    }

    /// Largest deviation of the diagonal from `scale`.
    pub fn diagonal_deviation(&self) -> f64 {
        (0..self.k).map(|i| (self.gram[(i, i)] - T::from_real(self.scale)).abs()).fold(0.0, f64::max)
    }

    /// Largest `|g_ij - conj(g_ji)|` relative to the largest entry.
    pub fn hermitian_defect(&self) -> f64 {
        let top = self.gram.entries().iter().map(|e| e.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.k {
            for j in 0..self.k {
                worst = worst.max((self.gram[(i, j)] - self.gram[(j, i)].conj()).abs());
            }
        }
        worst / top
    }
}

/// Output of [`gram_schmidt_hs`].
#[derive(Debug, Clone)]
pub struct Orthonormalized<T: Scalar> {
    /// `A_1..A_k`, pairwise H-S orthogonal with norm `target_norm`.
    pub family: Vec<Matrix<T>>,
    /// Lower-triangular `D` with `B_i = sum_l D[i][l] A_l`.
    pub d: Matrix<T>,
}

/// Gram–Schmidt in the Hilbert–Schmidt inner product, rescaled to
/// `target_norm`. Uses two orthogonalization passes per member.
pub fn gram_schmidt_hs<T: Scalar>(family: &[Matrix<T>], target_norm: f64) -> Result<Orthonormalized<T>> {
    if !(target_norm > 0.0 && target_norm.is_finite()) {
        return Err(Error::Parameter(format!("target norm must be positive, got {target_norm}")));
    }
    let Some(first) = family.first() else {
        return Ok(Orthonormalized { family: Vec::new(), d: Matrix::zeros(0, 0) });
    };
    let shape = first.shape();
    if let Some(bad) = family.iter().find(|m| m.shape() != shape) {
        return Err(Error::Dimension(format!(
            "family mixes {}x{} and {}x{} matrices",
            shape.0,
            shape.1,
            bad.rows(),
            bad.cols()
        )));
    }

    let k = family.len();
    let leading = hs_norm(first);
    let mut units: Vec<Matrix<T>> = Vec::with_capacity(k);
    let mut d = Matrix::zeros(k, k);

    for (i, b) in family.iter().enumerate() {
        let mut resid = b.clone();
        for _pass in 0..2 {
            for (l, e) in units.iter().enumerate() {
                let c = hs_inner(&resid, e)?;
                resid = resid.try_sub(&e.scale(c))?;
                d[(i, l)] += c;
            }
        }
        let pivot = hs_norm(&resid);
        if !(pivot > DEPENDENCE_THRESHOLD * leading) {
            return Err(Error::LinearDependence { index: i, pivot, leading });
        }
        d[(i, i)] = T::from_real(pivot);
        units.push(resid.scale(T::from_real(1.0 / pivot)));
    }

    // rescale unit-norm members to the target norm; D shrinks accordingly
    let out: Vec<Matrix<T>> = units.iter().map(|e| e.scale(T::from_real(target_norm))).collect();
    let d = d.scale(T::from_real(1.0 / target_norm));
    debug_assert!((0..k).all(|i| (i + 1..k).all(|j| d[(i, j)] == T::zero())));
    Ok(Orthonormalized { family: out, d })
}
