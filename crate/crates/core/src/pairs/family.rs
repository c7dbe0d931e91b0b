use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{gram_schmidt_hs, GramData, Matrix, RealMatrix, Scalar};

/// Ordered parameter matrices `A_1..A_k` of common size `n x n`, with their
/// Hilbert–Schmidt Gram data.
#[derive(Debug, Clone)]
pub struct ProjectionFamily<T: Scalar> {
    matrices: Vec<Matrix<T>>,
    gram: GramData<T>,
}

impl<T: Scalar> ProjectionFamily<T> {
    pub fn new(matrices: Vec<Matrix<T>>) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::Parameter("projection family is empty".into()));
        };
        let n = first.rows();
        if let Some(bad) = matrices.iter().find(|m| m.shape() != (n, n)) {
            return Err(Error::Dimension(format!(
                "family members must be {n}x{n}, found {}x{}",
                bad.rows(),
                bad.cols()
            )));
        }
        let gram = GramData::of_family(&matrices, n as f64)?;
        Ok(Self { matrices, gram })
    }

    pub fn matrices(&self) -> &[Matrix<T>] {
        &self.matrices
    }

    pub fn k(&self) -> usize {
        self.matrices.len()
    }

    pub fn n(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn gram(&self) -> &GramData<T> {
        &self.gram
    }

    /// Largest `|<A_i, A_j> - n delta_ij|`, relative to `n`.
    pub fn normalization_defect(&self) -> f64 {
        let n = self.n() as f64;
        let k = self.k();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { n } else { 0.0 };
                worst = worst.max((self.gram.gram[(i, j)] - T::from_real(want)).abs());
            }
        }
        worst / n
    }

    /// Errors unless `<A_i, A_j> = n delta_ij` to relative tolerance `tol`.
    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let defect = self.normalization_defect();
        if defect > tol {
            return Err(Error::Normalization(format!(
                "Gram matrix deviates from n I by {defect:e} (relative), tolerance {tol:e}"
            )));
        }
        Ok(())
    }

    /// Gram–Schmidt to norm `sqrt(n)`; returns the new family and `D` with
    /// `B_i = sum_l D_il A_l`.
    pub fn orthonormalized(&self) -> Result<(Self, Matrix<T>)> {
        let out = gram_schmidt_hs(&self.matrices, (self.n() as f64).sqrt())?;
        Ok((Self::new(out.family)?, out.d))
    }

    /// `(Tr(A_1 M), ..., Tr(A_k M))`.
    pub fn statistics(&self, m: &Matrix<T>) -> Vec<T> {
        self.matrices.iter().map(|a| a.trace_of_product(m).expect("family and group element share n")).collect()
    }

    /// `A_i = sqrt(n) E_ii`, so that `Tr(A_i M) = sqrt(n) m_ii`.
    pub fn coordinate(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Parameter(format!("need 1 <= k <= n, got k={k}, n={n}")));
        }
        let s = T::from_real((n as f64).sqrt());
        Self::new(
            (0..k)
                .map(|i| {
                    let mut a = Matrix::zeros(n, n);
                    a[(i, i)] = s;
                    a
                })
                .collect(),
        )
    }

    /// Gaussian matrices orthonormalized to norm `sqrt(n)`.
    pub fn random_orthonormal<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 || k > n * n {
            return Err(Error::Parameter(format!("need 1 <= k <= n^2, got k={k}, n={n}")));
        }
        let raw: Vec<Matrix<T>> = (0..k).map(|_| Matrix::gaussian(n, n, rng)).collect();
        Ok(Self::new(raw)?.orthonormalized()?.0)
    }
}

impl ProjectionFamily<f64> {
    /// `B_i = sqrt(n / a_i) (I_{a_i} (+) 0)` for strictly increasing `a`.
    pub fn diagonal_example(n: usize, a: &[usize]) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Parameter("need at least one block size".into()));
        }
        if a[0] == 0 || a.windows(2).any(|w| w[0] >= w[1]) || *a.last().unwrap() > n {
            return Err(Error::Parameter(format!("block sizes must satisfy 0 < a_1 < ... < a_k <= n={n}, got {a:?}")));
        }
        Self::new(
            a.iter()
                .map(|&ai| {
                    let s = (n as f64 / ai as f64).sqrt();
                    RealMatrix::from_fn(n, n, |i, j| if i == j && i < ai { s } else { 0.0 })
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use num_complex::Complex64;

    #[test]
    fn coordinate_family_is_normalized() {
        let f = ProjectionFamily::<f64>::coordinate(5, 3).unwrap();
        f.check_normalized(1e-15).unwrap();
        let mut m = RealMatrix::identity(5);
        m[(1, 1)] = -1.0;
        let s = f.statistics(&m);
        assert_eq!(s, vec![5f64.sqrt(), -(5f64.sqrt()), 5f64.sqrt()]);
    }

    #[test]
    fn diagonal_example_gram() {
        let (n, a) = (10, [2usize, 5, 10]);
        let f = ProjectionFamily::diagonal_example(n, &a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let (lo, hi) = (a[i.min(j)] as f64, a[i.max(j)] as f64);
                assert!((f.gram().gram[(i, j)] - n as f64 * (lo / hi).sqrt()).abs() < 1e-12);
            }
        }
        assert!(ProjectionFamily::diagonal_example(10, &[5, 2]).is_err());
        assert!(ProjectionFamily::diagonal_example(10, &[0, 2]).is_err());
        assert!(ProjectionFamily::diagonal_example(4, &[2, 5]).is_err());
    }

    #[test]
    fn random_complex_family_is_normalized() {
        let mut rng = seeded(3);
        let f = ProjectionFamily::<Complex64>::random_orthonormal(6, 3, &mut rng).unwrap();
        f.check_normalized(1e-10).unwrap();
    }

    #[test]
    fn rejects_mixed_shapes() {
        let r = ProjectionFamily::new(vec![RealMatrix::identity(2), RealMatrix::identity(3)]);
        assert!(matches!(r, Err(Error::Dimension(_))));
        assert!(ProjectionFamily::<f64>::new(vec![]).is_err());
    }
}
