use num_complex::Complex64;

use super::{is_finite, CMat, EigSystem};
use crate::{Error, Result};

/// `exp(zA)` by scaling-and-squaring Padé.
pub fn mat_exp(a: &CMat, z: Complex64) -> Result<CMat> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    if !is_finite(a) || !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NumericalFailure("non-finite input to matrix exponential".into()));
    }
    let out = (a * z).exp();
    if !is_finite(&out) {
        return Err(Error::NumericalFailure("matrix exponential overflowed".into()));
    }
    Ok(out)
}

/// `Σ exp(zλₙ) |eₙ⟩⟨e*ₙ|` from an existing eigendecomposition.
pub fn mat_exp_eig(sys: &EigSystem, z: Complex64) -> Result<CMat> {
    let out = sys.apply(|lambda| (z * lambda).exp());
    if !is_finite(&out) {
        return Err(Error::NumericalFailure("matrix exponential overflowed".into()));
    }
    Ok(out)
}

/// Kronecker product `A ⊗ B`, refusing results larger than `cap` rows.
pub fn kron(a: &CMat, b: &CMat, cap: usize) -> Result<CMat> {
    let rows = a.nrows() * b.nrows();
    let cols = a.ncols() * b.ncols();
    if rows.max(cols) > cap {
        return Err(Error::DimensionOverflow(rows.max(cols), cap));
    }
    Ok(a.kronecker(b))
}
