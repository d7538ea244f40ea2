//! Dense complex linear-algebra kernel.
//!
//! Operators are `d×d` complex matrices ([`CMat`]) and states are complex
//! column vectors ([`CVec`]). The module provides the general (non-normal)
//! eigendecomposition with paired left/right eigenvectors, the Hermitian
//! eigensolver and square root, matrix exponentials and Kronecker products,
//! plus the JSON wire format used by the CLI.

mod eig;
mod expm;
pub mod io;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub use eig::{
    dual_basis, eig_general, eig_general_with, eigenvalues, herm_eig, herm_sqrt, schur,
    sort_spectrum, EigSystem,
};
pub use expm::{kron, mat_exp, mat_exp_eig};

/// Dense square complex matrix.
pub type CMat = DMatrix<Complex64>;
/// Complex column vector.
pub type CVec = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Builds a matrix from row-major rows.
pub fn from_rows(rows: &[&[Complex64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn cvec(entries: &[Complex64]) -> CVec {
    CVec::from_column_slice(entries)
}

/// `|u⟩⟨v|`
pub fn outer(u: &CVec, v: &CVec) -> CMat {
    u * v.adjoint()
}

/// `⟨u, v⟩`, antilinear in the first slot.
#[inline]
pub fn inner(u: &CVec, v: &CVec) -> Complex64 {
    u.dotc(v)
}

/// Operator 2-norm (largest singular value).
pub fn op_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if a.nrows() == 1 && a.ncols() == 1 {
        return a[(0, 0)].norm();
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Ratio of smallest to largest singular value, and the condition number.
pub fn singular_extremes(a: &CMat) -> (f64, f64) {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    (min, max)
}

/// 2-norm condition number; infinite for singular input.
pub fn cond2(a: &CMat) -> f64 {
    let (min, max) = singular_extremes(a);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `‖A − A†‖₂`
pub fn hermiticity_defect(a: &CMat) -> f64 {
    op_norm(&(a - a.adjoint()))
}

/// `(A + A†)/2`
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

pub fn is_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Inverse via LU with a conditioning check.
pub fn inverse(a: &CMat) -> crate::Result<CMat> {
    let (min, max) = singular_extremes(a);
    if max == 0.0 || min / max < 1e3 * f64::EPSILON {
        return Err(crate::Error::SingularFrame(if max == 0.0 { 0.0 } else { min / max }));
    }
    a.clone()
        .lu()
        .try_inverse()
        .ok_or(crate::Error::SingularFrame(min / max))
}
