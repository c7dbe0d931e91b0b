use nalgebra::ComplexField;

use super::{Matrix, Scalar};
use crate::error::{Error, Result};

/// `A = QR` with `Q` orthogonal/unitary and `R` upper triangular with a
/// strictly positive real diagonal.
///
/// The diagonal normalization makes the factorization unique, so `Q` of a
/// Ginibre matrix is Haar distributed.
pub fn qr_decompose<T>(a: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)>
where
    T: Scalar + ComplexField<RealField = f64>,
{
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "QR needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let qr = a.to_nalgebra().qr();
    let q = qr.q();
    let r = qr.r();

    let scale = (0..n).map(|i| Scalar::abs(r[(i, i)])).fold(0.0, f64::max);
    let mut phases = Vec::with_capacity(n);
    for i in 0..n {
        let d = r[(i, i)];
        if Scalar::abs(d) <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Rank(format!("R[{i},{i}] = {:e} is numerically zero", Scalar::abs(d))));
        }
        phases.push(Scalar::phase(d));
    }

    // Q D and D* R with D = diag(phase(r_ii)).
    let q = Matrix::from_fn(n, n, |i, j| q[(i, j)] * phases[j]);
    let r = Matrix::from_fn(n, n, |i, j| if j < i { <T as Scalar>::zero() } else { Scalar::conj(phases[i]) * r[(i, j)] });
    Ok((q, r))
}
