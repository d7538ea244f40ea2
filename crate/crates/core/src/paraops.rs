//! Operator classification, metric operators and the finite functional calculus.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::matkit::{
    c, cr, eig_general_with, eigenvalues, herm_eig, herm_sqrt, hermitian_part, hermiticity_defect,
    identity, op_norm, singular_extremes, CMat, EigSystem,
};
use crate::{Error, Result, Tolerances};

/// Hermitian positive-definite metric `G` with cached `G^{1/2}` and `G^{-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricOp {
    pub g: CMat,
    pub sqrt: CMat,
    pub inv_sqrt: CMat,
    pub min_eig: f64,
    pub max_eig: f64,
}

impl MetricOp {
    /// Validates and symmetrizes `g`.
    pub fn new(g: &CMat) -> Result<MetricOp> {
        Self::with_tolerances(g, &Tolerances::default())
    }

    pub fn with_tolerances(g: &CMat, tols: &Tolerances) -> Result<MetricOp> {
        let g = hermitian_part_checked(g, tols.herm)?;
        let sys = herm_eig(&g, tols.herm)?;
        let min_eig = sys.eigenvalues[0].re;
        let max_eig = sys.eigenvalues[sys.dim() - 1].re;
        let (sqrt, inv_sqrt) = herm_sqrt(&g, tols.pd)?;
        Ok(MetricOp { g, sqrt, inv_sqrt, min_eig, max_eig })
    }

    pub fn identity(d: usize) -> MetricOp {
        let i = identity(d);
        MetricOp { g: i.clone(), sqrt: i.clone(), inv_sqrt: i, min_eig: 1.0, max_eig: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// `‖G^{-1/2}‖·‖G^{1/2}‖`, the uniform bound on para-unitary groups.
    pub fn similarity_bound(&self) -> f64 {
        (self.max_eig / self.min_eig).sqrt()
    }
}

fn hermitian_part_checked(g: &CMat, tol: f64) -> Result<CMat> {
    if g.nrows() != g.ncols() || g.nrows() == 0 {
        return Err(Error::DimensionMismatch { expected: g.nrows(), found: g.ncols() });
    }
    let norm = op_norm(g);
    let defect = hermiticity_defect(g);
    if defect > tol * norm {
        return Err(Error::NotHermitian(defect / norm.max(f64::MIN_POSITIVE)));
    }
    Ok(hermitian_part(g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kind {
    Hermitian,
    ParaHermitianNonHermitian,
    ParaUnitary,
    Unitary,
    ComplexSpectrum,
    NonDiagonalizable,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Hermitian => "Hermitian",
            Kind::ParaHermitianNonHermitian => "ParaHermitianNonHermitian",
            Kind::ParaUnitary => "ParaUnitary",
            Kind::Unitary => "Unitary",
            Kind::ComplexSpectrum => "ComplexSpectrum",
            Kind::NonDiagonalizable => "NonDiagonalizable",
        }
    }

    pub fn is_para_hermitian(&self) -> bool {
        matches!(self, Kind::Hermitian | Kind::ParaHermitianNonHermitian)
    }
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub kind: Kind,
    pub witness_metric: Option<MetricOp>,
    pub spectrum: Vec<Complex64>,
    /// `hermiticity_defect` (relative), `max_imag`, `max_unit_defect`, `kappa`,
    /// and `witness_defect` when a metric was built.
    pub diagnostics: BTreeMap<String, f64>,
}

/// Classifies `t` with the default tolerances, replacing the spectral and
/// hermiticity thresholds by `tol`.
pub fn classify(t: &CMat, tol: f64) -> Result<Classification> {
    if !(tol > 0.0) {
        return Err(Error::DomainError("tolerance must be positive".into()));
    }
    let tols = Tolerances { spec: tol, herm: tol, ..Tolerances::default() };
    classify_with(t, &tols)
}

pub fn classify_with(t: &CMat, tols: &Tolerances) -> Result<Classification> {
    let d = t.nrows();
    if d == 0 || d != t.ncols() {
        return Err(Error::DimensionMismatch { expected: d, found: t.ncols() });
    }
    let norm = op_norm(t);
    let herm_rel = if norm > 0.0 { hermiticity_defect(t) / norm } else { 0.0 };
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("hermiticity_defect".to_string(), herm_rel);

    let sys = if herm_rel <= tols.herm {
        herm_eig(t, tols.herm)?
    } else {
        let loose = Tolerances { residual: tols.residual.max(1e-8), ..*tols };
        match eig_general_with(t, &loose) {
            Ok(sys) => sys,
            Err(Error::NonDiagonalizable { kappa, .. }) => {
                let spectrum = eigenvalues(t)?;
                diagnostics.insert("kappa".to_string(), kappa);
                insert_spectral_diagnostics(&mut diagnostics, &spectrum);
                return Ok(Classification {
                    kind: Kind::NonDiagonalizable,
                    witness_metric: None,
                    spectrum,
                    diagnostics,
                });
            }
            Err(e) => return Err(e),
        }
    };
    diagnostics.insert("kappa".to_string(), sys.frame_condition);
    let spectrum = sys.eigenvalues.clone();
    let (max_imag, max_unit) = insert_spectral_diagnostics(&mut diagnostics, &spectrum);
    let rho = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let real = max_imag <= tols.spec * rho.max(1.0);
    let on_circle = max_unit <= tols.spec;

    let kind = if herm_rel <= tols.herm {
        Kind::Hermitian
    } else if real {
        Kind::ParaHermitianNonHermitian
    } else if on_circle {
        let u_defect = op_norm(&(t.adjoint() * t - identity(d)));
        if u_defect <= tols.herm {
            Kind::Unitary
        } else {
            Kind::ParaUnitary
        }
    } else {
        Kind::ComplexSpectrum
    };

    let witness_metric = match kind {
        Kind::Hermitian => Some(MetricOp::identity(d)),
        Kind::ParaHermitianNonHermitian => {
            let g = metric_from_eigensystem(&sys)?;
            let m = hermitianize(t, &g);
            let defect = hermiticity_defect(&m) / norm.max(f64::MIN_POSITIVE);
            diagnostics.insert("witness_defect".to_string(), defect);
            let allowed = tols.herm.max(100.0 * f64::EPSILON * sys.frame_condition.powi(2));
            if defect > allowed {
                return Err(Error::NumericalFailure(format!(
                    "witness metric fails to Hermitianize (defect {defect:.3e})"
                )));
            }
            Some(g)
        }
        _ => None,
    };
    Ok(Classification { kind, witness_metric, spectrum, diagnostics })
}

fn insert_spectral_diagnostics(diag: &mut BTreeMap<String, f64>, spectrum: &[Complex64]) -> (f64, f64) {
    let max_imag = spectrum.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let max_unit = spectrum.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    diag.insert("max_imag".to_string(), max_imag);
    diag.insert("max_unit_defect".to_string(), max_unit);
    (max_imag, max_unit)
}

/// `G = Σ |e*ₙ⟩⟨e*ₙ|` for the eigensystem as given.
pub fn metric_from_eigensystem(sys: &EigSystem) -> Result<MetricOp> {
    let g = hermitian_part(&(&sys.left * sys.left.adjoint()));
    let tols = Tolerances::default();
    let (sqrt, inv_sqrt) = herm_sqrt(&g, tols.pd)?;
    let h = herm_eig(&g, tols.herm)?;
    Ok(MetricOp {
        min_eig: h.eigenvalues[0].re,
        max_eig: h.eigenvalues[h.dim() - 1].re,
        g,
        sqrt,
        inv_sqrt,
    })
}

/// Metric of the family obtained by rescaling `eₙ → cₙeₙ` before summing.
pub fn metric_with_scalars(sys: &EigSystem, scalars: &[Complex64]) -> Result<MetricOp> {
    metric_from_eigensystem(&sys.rescaled(scalars)?)
}

/// `G^{1/2} T G^{-1/2}`
pub fn hermitianize(t: &CMat, g: &MetricOp) -> CMat {
    &g.sqrt * t * &g.inv_sqrt
}

/// `‖GT − T†G‖ ≤ tol·‖G‖·‖T‖`
pub fn is_metric_for(g: &MetricOp, t: &CMat, tol: f64) -> bool {
    let lhs = op_norm(&(&g.g * t - t.adjoint() * &g.g));
    lhs <= tol * g.max_eig * op_norm(t)
}

/// `‖T†η − ηT‖ ≤ tol·‖η‖·‖T‖` for Hermitian invertible `η`.
pub fn is_pseudo_hermitian(t: &CMat, eta: &CMat, tol: f64) -> Result<bool> {
    let (min, max) = singular_extremes(eta);
    if max == 0.0 || min / max < 1e3 * f64::EPSILON {
        return Err(Error::SingularEta(if max == 0.0 { 0.0 } else { min / max }));
    }
    let lhs = op_norm(&(t.adjoint() * eta - eta * t));
    Ok(lhs <= tol * max * op_norm(t))
}

/// `f(T) = Σ f(λₙ)|eₙ⟩⟨e*ₙ|`
pub fn func_calc<F: Fn(Complex64) -> Complex64>(sys: &EigSystem, f: F) -> CMat {
    sys.apply(f)
}

/// The deformed Pauli triple `(σ^ω_x, σ^ω_y, σ^ω_z)`.
pub fn deformed_pauli(omega: f64) -> Result<(CMat, CMat, CMat)> {
    if !(omega.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::DomainError(format!("|omega| must be below pi/2, got {omega}")));
    }
    let (s, k) = (omega.sin(), 1.0 / omega.cos());
    let x = CMat::from_row_slice(2, 2, &[c(0.0, -s * k), cr(k), cr(k), c(0.0, s * k)]);
    let y = CMat::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)]);
    let z = CMat::from_row_slice(2, 2, &[cr(k), c(0.0, s * k), c(0.0, s * k), cr(-k)]);
    Ok((x, y, z))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevel {
    pub matrix: CMat,
    /// `(λ₋, λ₊) = r cosθ ∓ √(γ² − r² sin²θ)`, absent in the broken regime.
    pub eigenvalues: Option<(f64, f64)>,
    /// `φ` with `sin φ = (r/γ) sin θ`, absent in the broken regime.
    pub phi: Option<f64>,
    pub broken: bool,
}

/// `[[r e^{iθ}, γ], [γ, r e^{-iθ}]]`
pub fn two_level_hamiltonian(r: f64, theta: f64, gamma: f64) -> TwoLevel {
    let matrix = CMat::from_row_slice(
        2,
        2,
        &[Complex64::from_polar(r, theta), cr(gamma), cr(gamma), Complex64::from_polar(r, -theta)],
    );
    let disc = gamma * gamma - (r * theta.sin()).powi(2);
    if disc > 0.0 {
        let root = disc.sqrt();
        let base = r * theta.cos();
        TwoLevel {
            matrix,
            eigenvalues: Some((base - root, base + root)),
            phi: Some((r / gamma * theta.sin()).asin()),
            broken: false,
        }
    } else {
        TwoLevel { matrix, eigenvalues: None, phi: None, broken: true }
    }
}
