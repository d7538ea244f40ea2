//! Time evolution generated by para-Hermitian operators.
//!
//! Sign convention: `U(t) = e^{-itH}` with `ħ = 1`.

mod brachistochrone;
mod propagator;

pub use brachistochrone::{brachistochrone, brachistochrone_sweep, BrachistochroneResult};
pub use propagator::{evolve_state, propagator, propagator_from, Generator, Propagator};

use num_complex::Complex64;
use serde::Serialize;

use crate::matkit::{
    eig_general_with, herm_eig, hermiticity_defect, identity, op_norm, CMat, EigSystem, I,
};
use crate::paraops::{func_calc, metric_from_eigensystem};
use crate::{Error, Result, Tolerances};

/// Eigensystem of `h` after checking it is diagonalizable with real spectrum.
pub fn para_hermitian_system(h: &CMat, tols: &Tolerances) -> Result<EigSystem> {
    let norm = op_norm(h);
    if hermiticity_defect(h) <= tols.herm * norm {
        return herm_eig(h, tols.herm);
    }
    let loose = Tolerances { residual: tols.residual.max(1e-8), ..*tols };
    let sys = match eig_general_with(h, &loose) {
        Ok(sys) => sys,
        Err(Error::NonDiagonalizable { kappa, .. }) => {
            return Err(Error::NotParaHermitian(format!("not diagonalizable (kappa {kappa:.3e})")))
        }
        Err(e) => return Err(e),
    };
    let rho = sys.eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let max_imag = sys.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_imag > tols.spec * rho {
        return Err(Error::NotParaHermitian(format!("spectrum not real (max |Im| {max_imag:.3e})")));
    }
    Ok(sys)
}

/// `e^{-itH}` through the spectral resolution of `H`.
pub fn group(h: &CMat, t: f64) -> Result<CMat> {
    let sys = para_hermitian_system(h, &Tolerances::default())?;
    Ok(group_from(&sys, t))
}

/// `e^{-itH}` from an existing eigensystem; imaginary rounding in the
/// eigenvalues is discarded.
pub fn group_from(sys: &EigSystem, t: f64) -> CMat {
    func_calc(sys, |l| (-I * t * l.re).exp())
}

#[derive(Debug, Clone, Serialize)]
pub struct StoneReport {
    /// `max ‖U(t+s) − U(t)U(s)‖ / max(1, ‖U(t)‖‖U(s)‖)` over the time set.
    pub group_law_defect: f64,
    /// `‖G^{-1/2}‖·‖G^{1/2}‖` for the canonical metric.
    pub norm_bound: f64,
    /// `max_t ‖U(t)‖ − norm_bound`; non-positive when the bound holds.
    pub norm_bound_excess: f64,
    /// `(Δ, ‖(U(Δ) − I)/Δ + iH‖)` for `Δ = 1e-2, 1e-3, 1e-4`.
    pub recovery: Vec<(f64, f64)>,
    /// Least-squares slope of `log error` against `log Δ`.
    pub recovery_rate: f64,
    /// `‖H²‖/2`, the limit of `error(Δ)/Δ`.
    pub recovery_constant: f64,
}

/// Numerical check of the one-parameter group generated by `H`.
pub fn stone_check(h: &CMat, times: &[f64], tol: f64) -> Result<StoneReport> {
    let tols = Tolerances { residual: tol.max(Tolerances::default().residual), ..Tolerances::default() };
    let sys = para_hermitian_system(h, &tols)?;
    let g = metric_from_eigensystem(&sys)?;
    let norm_bound = g.similarity_bound();
    let u: Vec<CMat> = times.iter().map(|&t| group_from(&sys, t)).collect();
    let norms: Vec<f64> = u.iter().map(op_norm).collect();

    let mut group_law_defect: f64 = 0.0;
    for (i, &t) in times.iter().enumerate() {
        for (j, &s) in times.iter().enumerate() {
            let lhs = group_from(&sys, t + s);
            let defect = op_norm(&(lhs - &u[i] * &u[j])) / (norms[i] * norms[j]).max(1.0);
            group_law_defect = group_law_defect.max(defect);
        }
    }
    let norm_bound_excess = norms.iter().map(|n| n - norm_bound).fold(f64::NEG_INFINITY, f64::max);

    let d = h.nrows();
    let recovery: Vec<(f64, f64)> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&delta| {
            let q = (group_from(&sys, delta) - identity(d)) / Complex64::new(delta, 0.0);
            (delta, op_norm(&(q + h * I)))
        })
        .collect();
    let recovery_rate = log_slope(&recovery);
    let recovery_constant = 0.5 * op_norm(&(h * h));
    Ok(StoneReport {
        group_law_defect,
        norm_bound,
        norm_bound_excess: if times.is_empty() { 0.0 } else { norm_bound_excess },
        recovery,
        recovery_rate,
        recovery_constant,
    })
}

fn log_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.max(f64::MIN_POSITIVE).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
