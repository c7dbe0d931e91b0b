use rand::Rng;

use super::{hs_norm, Matrix, RealMatrix, Scalar};
use crate::error::{Error, Result};
use crate::rng::seeded;

const POWER_ITERATION_CAP: usize = 10_000;
const EIGENSOLVE_MAX_DIM: usize = 64;
const START_SEED: u64 = 0x5EED_0F_0B_0E;

/// Operator norm (largest singular value).
///
/// Power iteration on `A*A` from a fixed pseudo-random start vector; if it
/// has not converged within the iteration cap and the matrix has at most 64
/// columns, the answer comes from a full Jacobi eigensolve of `A*A` instead.
pub fn op_norm<T: Scalar>(a: &Matrix<T>) -> Result<f64> {
    let cols = a.cols();
    if cols == 0 || a.rows() == 0 {
        return Ok(0.0);
    }
    if !a.entries().iter().all(|e| e.is_finite()) {
        return Err(Error::Parameter("op_norm of a non-finite matrix".into()));
    }
    let frob = hs_norm(a);
    if frob == 0.0 {
        return Ok(0.0);
    }
    let adj = a.adjoint();

    let mut rng = seeded(START_SEED);
    let mut v: Vec<T> = (0..cols).map(|_| T::from_real(rng.random::<f64>() + 0.5)).collect();
    normalize(&mut v);
    for _ in 0..POWER_ITERATION_CAP {
        let av = a.mul_vec(&v)?;
        let w = adj.mul_vec(&av)?;
        let new_sigma = vec_norm(&av) / vec_norm(&v);
        let lambda = new_sigma * new_sigma;
        // residual |A*A v - lambda v| certifies an eigenpair of A*A
        let resid = w
            .iter()
            .zip(&v)
            .map(|(&wi, &vi)| (wi - vi * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if resid <= 1e-13 * lambda.max(f64::MIN_POSITIVE) {
            return Ok(new_sigma);
        }
        let nw = vec_norm(&w);
        if nw == 0.0 {
            return Ok(0.0);
        }
        v = w.into_iter().map(|x| x * (1.0 / nw)).collect();
    }
    if cols <= EIGENSOLVE_MAX_DIM {
        let gram = gram_real_form(a)?;
        let top = symmetric_eigenvalues(&gram)?.into_iter().fold(0.0, f64::max);
        return Ok(top.max(0.0).sqrt());
    }
    Err(Error::NonConvergence { iterations: POWER_ITERATION_CAP })
}

fn vec_norm<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize<T: Scalar>(v: &mut [T]) {
    let n = vec_norm(v);
    for x in v.iter_mut() {
        *x = *x * (1.0 / n);
    }
}

/// `A*A` as a real symmetric matrix (the 2n x 2n realification for complex input).
fn gram_real_form<T: Scalar>(a: &Matrix<T>) -> Result<RealMatrix> {
    let g = a.adjoint().matmul(a)?;
    let n = g.rows();
    if !T::IS_COMPLEX {
        return Ok(RealMatrix::from_fn(n, n, |i, j| g[(i, j)].re()));
    }
    // Hermitian H = X + iY  ->  [[X, -Y], [Y, X]] has the same spectrum doubled.
    Ok(RealMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        let h = g[(ii, jj)];
        match (bi, bj) {
            (0, 0) | (1, 1) => h.re(),
            (0, 1) => -h.im(),
            _ => h.im(),
        }
    }))
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(s: &RealMatrix) -> Result<Vec<f64>> {
    if !s.is_square() {
        return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
    }
    if !s.is_symmetric(1e-10) {
        return Err(Error::Parameter("matrix is not symmetric".into()));
    }
    let n = s.rows();
    let mut a = s.clone();
    const SWEEPS: usize = 100;
    for _ in 0..SWEEPS {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].powi(2)).sum();
        let total: f64 = a.entries().iter().map(|x| x * x).sum();
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            return Ok((0..n).map(|i| a[(i, i)]).collect());
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::NonConvergence { iterations: SWEEPS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ComplexMatrix;
    use num_complex::Complex64;

    #[test]
    fn identity_has_norm_one() {
        for k in [1, 2, 5, 9] {
            assert_eq!(op_norm(&RealMatrix::identity(k)).unwrap(), 1.0);
        }
    }

    #[test]
    fn diagonal_norm() {
        let d = RealMatrix::from_diagonal(&[3.0, 1.0]);
        assert!((op_norm(&d).unwrap() - 3.0).abs() < 1e-10 * 3.0);
        let d = RealMatrix::from_diagonal(&[1.0, -4.0, 2.0]);
        assert!((op_norm(&d).unwrap() - 4.0).abs() < 1e-10 * 4.0);
    }

    #[test]
    fn matches_jacobi_on_random_rectangular() {
        let mut rng = seeded(3);
        let a = RealMatrix::gaussian(7, 4, &mut rng);
        let top = symmetric_eigenvalues(&a.transpose().matmul(&a).unwrap())
            .unwrap()
            .into_iter()
            .fold(0.0, f64::max)
            .sqrt();
        assert!((op_norm(&a).unwrap() - top).abs() < 1e-10 * top);
    }

    #[test]
    fn complex_rotation_scaled() {
        // 2 * unitary has every singular value 2
        let u = ComplexMatrix::from_row_major(
            2,
            2,
            vec![Complex64::new(0.0, 2.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)],
        )
        .unwrap();
        assert!((op_norm(&u).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn close_top_singular_values_fall_back_to_eigensolve() {
        let d = RealMatrix::from_diagonal(&[1.0, 1.0 - 1e-9, 0.5]);
        assert!((op_norm(&d).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn jacobi_known_spectrum() {
        let s = RealMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let mut ev = symmetric_eigenvalues(&s).unwrap();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }
}
