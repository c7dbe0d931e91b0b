//! Dense real and complex matrices with Hilbert–Schmidt geometry.
//!
//! [`Matrix<T>`] stores entries row-major. The two concrete carriers used
//! throughout the crate are [`RealMatrix`] and [`ComplexMatrix`]; most
//! routines are written once against the [`Scalar`] trait.

mod gram;
mod norm;
mod qr;

pub use gram::{gram_schmidt_hs, GramData, Orthonormalized};
pub use norm::{op_norm, symmetric_eigenvalues};
pub use qr::qr_decompose;

use std::fmt::{self, Debug};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Field of matrix entries: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Mul<f64, Output = Self>
    + 'static
{
    const IS_COMPLEX: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn abs(self) -> f64;
    fn norm_sqr(self) -> f64;
    fn is_finite(self) -> bool;

    /// Standard Gaussian draw: N(0,1) for reals, E|z|^2 = 1 circular for complex.
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Unit-modulus factor `x/|x|` (sign for reals), 1 at zero.
    fn phase(self) -> Self {
        let a = self.abs();
        if a == 0.0 {
            Self::one()
        } else {
            self * (1.0 / a)
        }
    }
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
    fn phase(self) -> Self {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

pub type RealMatrix = Matrix<f64>;
pub type ComplexMatrix = Matrix<Complex64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from row-major entries; entries must be finite.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<T>) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if !entries.iter().all(|e| e.is_finite()) {
            return Err(Error::Parameter("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Matrix of i.i.d. standard Gaussian entries.
    pub fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self::from_fn(rows, cols, |_, _| T::gaussian(rng))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose (plain transpose for reals).
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&e| e * s).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&e| f(e)).collect(),
        }
    }

    pub fn trace(&self) -> T {
        let mut t = T::zero();
        for i in 0..self.rows.min(self.cols) {
            t += self[(i, i)];
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.entries[i * other.cols..(i + 1) * other.cols];
            for (l, &a) in self.row(i).iter().enumerate() {
                for (o, &b) in out_row.iter_mut().zip(other.row(l)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `Tr(self * other)` in O(n^2) without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> Result<T> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(Error::Dimension(format!(
                "Tr(AB) needs A {}x{} and B {}x{} transposed shapes",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut t = T::zero();
        for i in 0..self.rows {
            for (l, &a) in self.row(i).iter().enumerate() {
                t += a * other[(l, i)];
            }
        }
        Ok(t)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut s = T::zero();
                for (&a, &b) in self.row(i).iter().zip(v) {
                    s += a * b;
                }
                s
            })
            .collect())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension(format!(
                "shapes {}x{} and {}x{} differ",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(&a, &b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(&a, &b)| a - b).collect(),
        })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Block direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out[(self.rows + i, self.cols + j)] = other[(i, j)];
            }
        }
        out
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<T>
    where
        T: nalgebra::Scalar,
    {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }
}

impl RealMatrix {
    /// Real matrix from nested rows; panics on ragged input (test and example helper).
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            entries: rows.concat(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    /// Symmetric within `tol` relative to the largest entry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.entries.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol * scale))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

impl<T: Scalar> Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Hilbert–Schmidt inner product `Tr(A B*)`.
pub fn hs_inner<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<T> {
    a.check_same_shape(b)?;
    let mut s = T::zero();
    for (&x, &y) in a.entries.iter().zip(&b.entries) {
        s += x * y.conj();
    }
    Ok(s)
}

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hs_norm<T: Scalar>(a: &Matrix<T>) -> f64 {
    a.entries.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

// Plain-text format: a header line "rows cols real|complex" followed by
// whitespace-separated row-major entries, complex entries as "re im".

/// Serializes a matrix to the plain-text exchange format.
pub fn to_text<T: Scalar>(m: &Matrix<T>) -> String {
    let kind = if T::IS_COMPLEX { "complex" } else { "real" };
    let mut out = format!("{} {} {}\n", m.rows, m.cols, kind);
    for i in 0..m.rows {
        let line: Vec<String> = m
            .row(i)
            .iter()
            .map(|e| {
                if T::IS_COMPLEX {
                    format!("{:?} {:?}", e.re(), e.im())
                } else {
                    format!("{:?}", e.re())
                }
            })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Either kind of matrix, as read from text.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMatrix {
    Real(RealMatrix),
    Complex(ComplexMatrix),
}

/// Parses the plain-text exchange format.
pub fn from_text(text: &str) -> Result<AnyMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, message: "empty matrix text".into() })?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let bad_header = || Error::Parse {
        line: hline + 1,
        message: format!("expected 'rows cols real|complex', got '{header}'"),
    };
    if parts.len() != 3 {
        return Err(bad_header());
    }
    let rows: usize = parts[0].parse().map_err(|_| bad_header())?;
    let cols: usize = parts[1].parse().map_err(|_| bad_header())?;
    let mut values = Vec::new();
    for (ln, line) in lines {
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: ln + 1,
                message: format!("'{tok}' is not a number"),
            })?;
            values.push(v);
        }
    }
    match parts[2] {
        "real" => Ok(AnyMatrix::Real(Matrix::from_row_major(rows, cols, values)?)),
        "complex" => {
            if values.len() % 2 != 0 {
                return Err(Error::Dimension("complex entries must come in re/im pairs".into()));
            }
            let entries = values.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
            Ok(AnyMatrix::Complex(Matrix::from_row_major(rows, cols, entries)?))
        }
        _ => Err(bad_header()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn arb_real(n: usize) -> impl Strategy<Value = RealMatrix> {
        proptest::collection::vec(-3.0f64..3.0, n * n)
            .prop_map(move |v| RealMatrix::from_row_major(n, n, v).unwrap())
    }

    fn arb_complex(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), n * n).prop_map(move |v| {
            let e = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            ComplexMatrix::from_row_major(n, n, e).unwrap()
        })
    }

    #[test]
    fn hs_inner_identity_is_n() {
        for n in [1, 3, 7] {
            let i = RealMatrix::identity(n);
            assert_eq!(hs_inner(&i, &i).unwrap(), n as f64);
        }
    }

    #[test]
    fn hs_inner_matches_elementwise_sum() {
        let a = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let oracle: f64 = a.entries().iter().zip(b.entries()).map(|(x, y)| x * y).sum();
        assert_eq!(oracle, 5.0);
        assert_eq!(hs_inner(&a, &b).unwrap(), oracle);
        // Tr(A B^T) by explicit product as a second route.
        assert_eq!(a.matmul(&b.transpose()).unwrap().trace(), oracle);
    }

    #[test]
    fn hs_inner_shape_mismatch() {
        let a = RealMatrix::zeros(2, 3);
        let b = RealMatrix::zeros(3, 2);
        assert!(matches!(hs_inner(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn trace_of_product_matches_matmul() {
        let mut rng = seeded(5);
        let a = ComplexMatrix::gaussian(5, 5, &mut rng);
        let b = ComplexMatrix::gaussian(5, 5, &mut rng);
        let direct = a.matmul(&b).unwrap().trace();
        let fast = a.trace_of_product(&b).unwrap();
        assert!((direct - fast).norm() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let mut rng = seeded(9);
        let r = RealMatrix::gaussian(3, 4, &mut rng);
        assert_eq!(from_text(&to_text(&r)).unwrap(), AnyMatrix::Real(r));
        let c = ComplexMatrix::gaussian(2, 2, &mut rng);
        assert_eq!(from_text(&to_text(&c)).unwrap(), AnyMatrix::Complex(c));
    }

    #[test]
    fn text_errors() {
        assert!(matches!(from_text(""), Err(Error::Parse { .. })));
        assert!(matches!(from_text("2 2 quaternion\n1 2 3 4"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(from_text("2 2 real\n1 2\n3 x"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(from_text("2 2 real\n1 2 3"), Err(Error::Dimension(_))));
    }

    #[test]
    fn direct_sum_blocks() {
        let a = RealMatrix::from_rows(&[vec![2.0]]);
        let s = a.direct_sum(&RealMatrix::identity(2));
        assert_eq!(s.to_rows(), vec![vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
    }

    proptest! {
        #[test]
        fn hs_inner_real_symmetric_bilinear(a in arb_real(4), b in arb_real(4), c in arb_real(4), s in -2.0f64..2.0) {
            let ab = hs_inner(&a, &b).unwrap();
            prop_assert!((ab - hs_inner(&b, &a).unwrap()).abs() < 1e-12);
            let lhs = hs_inner(&a.scale(s).try_add(&c).unwrap(), &b).unwrap();
            let rhs = s * ab + hs_inner(&c, &b).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }

        #[test]
        fn hs_inner_complex_conjugate_symmetric(a in arb_complex(3), b in arb_complex(3), s in (-2.0f64..2.0, -2.0f64..2.0)) {
            let s = Complex64::new(s.0, s.1);
            let ab = hs_inner(&a, &b).unwrap();
            prop_assert!((ab - hs_inner(&b, &a).unwrap().conj()).norm() < 1e-12);
            // linear in the first slot, conjugate-linear in the second
            prop_assert!((hs_inner(&a.scale(s), &b).unwrap() - s * ab).norm() < 1e-10);
            prop_assert!((hs_inner(&a, &b.scale(s)).unwrap() - s.conj() * ab).norm() < 1e-10);
        }

        #[test]
        fn cauchy_schwarz_and_submultiplicative(a in arb_complex(4), b in arb_complex(4)) {
            let na = hs_norm(&a);
            let nb = hs_norm(&b);
            prop_assert!(hs_inner(&a, &b).unwrap().norm() <= na * nb * (1.0 + 1e-12) + 1e-12);
            prop_assert!(hs_norm(&a.matmul(&b).unwrap()) <= na * nb * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn op_norm_below_hs_norm(a in arb_real(5)) {
            prop_assert!(op_norm(&a).unwrap() <= hs_norm(&a) * (1.0 + 1e-10) + 1e-12);
        }
    }
}
