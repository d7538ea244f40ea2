use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::para_hermitian_system;
use crate::matkit::{cvec, op_norm, CVec, EigSystem};
use crate::paraops::two_level_hamiltonian;
use crate::{Error, Result, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrachistochroneResult {
    pub r: f64,
    pub theta: f64,
    pub gamma: f64,
    /// `2√(γ² − r² sin²θ)`
    pub omega: f64,
    /// `asin((r/γ) sinθ)`
    pub phi: f64,
    /// `(2φ + π)/ω`
    pub t_transfer: f64,
    /// First time `e^{-itH}|0⟩ ∝ |1⟩`, located by simulation.
    pub t_simulated: f64,
    /// Overlap defect `1 − |⟨1|ψ⟩|²/‖ψ‖²` at `t_simulated`.
    pub defect: f64,
    /// `π/ω`
    pub hermitian_bound: f64,
}

/// Transfer time `|0⟩ → |1⟩` under `[[r e^{iθ}, γ], [γ, r e^{-iθ}]]`.
pub fn brachistochrone(r: f64, theta: f64, gamma: f64) -> Result<BrachistochroneResult> {
    let tl = two_level_hamiltonian(r, theta, gamma);
    let (phi, (lm, lp)) = match (tl.phi, tl.eigenvalues) {
        (Some(phi), Some(ev)) if !tl.broken => (phi, ev),
        _ => return Err(Error::BrokenRegime),
    };
    let omega = lp - lm;
    let t_transfer = (2.0 * phi + std::f64::consts::PI) / omega;
    let hermitian_bound = std::f64::consts::PI / omega;

    let sys = para_hermitian_system(&tl.matrix, &Tolerances::default())?;
    let (t_simulated, defect) = first_passage(&sys, op_norm(&tl.matrix), 4.0 * hermitian_bound)?;
    Ok(BrachistochroneResult {
        r,
        theta,
        gamma,
        omega,
        phi,
        t_transfer,
        t_simulated,
        defect,
        hermitian_bound,
    })
}

/// Runs `brachistochrone` over parameter triples in parallel, preserving order.
pub fn brachistochrone_sweep(points: &[(f64, f64, f64)]) -> Vec<Result<BrachistochroneResult>> {
    points.par_iter().map(|&(r, th, g)| brachistochrone(r, th, g)).collect()
}

struct Flow {
    coeffs: Vec<Complex64>,
    lambdas: Vec<f64>,
    sys: EigSystem,
}

impl Flow {
    /// `(ψ(t), ψ'(t))` with `ψ(t) = e^{-itH}|0⟩` from the spectral resolution.
    fn state(&self, t: f64) -> (CVec, CVec) {
        let d = self.lambdas.len();
        let mut psi = CVec::zeros(d);
        let mut dpsi = CVec::zeros(d);
        for n in 0..self.lambdas.len() {
            let w = Complex64::new(0.0, -t * self.lambdas[n]).exp() * self.coeffs[n];
            let e = self.sys.right.column(n);
            psi += e * w;
            dpsi += e * (w * Complex64::new(0.0, -self.lambdas[n]));
        }
        (psi, dpsi)
    }

    /// Overlap defect `D = |ψ₀|²/‖ψ‖²` and its time derivative.
    fn defect(&self, t: f64) -> (f64, f64) {
        let (psi, dpsi) = self.state(t);
        let n2 = psi.norm_squared();
        let a = psi[0].norm_sqr();
        let da = 2.0 * (psi[0].conj() * dpsi[0]).re;
        let dn2 = 2.0 * psi.dotc(&dpsi).re;
        (a / n2, (da * n2 - a * dn2) / (n2 * n2))
    }
}

/// First minimum of `D` where `D ≤ 1e-9`: scan `D'` for a sign change from
/// negative to positive, then bisect to `1e-12` in time.
fn first_passage(sys: &EigSystem, hnorm: f64, horizon: f64) -> Result<(f64, f64)> {
    let zero = cvec(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let flow = Flow {
        coeffs: (0..sys.dim()).map(|n| sys.left_vec(n).dotc(&zero)).collect(),
        lambdas: sys.eigenvalues.iter().map(|z| z.re).collect(),
        sys: sys.clone(),
    };

    let h = 1.0 / (64.0 * hnorm.max(1e-12));
    let mut t0 = 0.0;
    let mut d0 = flow.defect(t0).1;
    while t0 < horizon {
        let t1 = (t0 + h).min(horizon);
        let d1 = flow.defect(t1).1;
        if d0 < 0.0 && d1 >= 0.0 {
            let (mut a, mut b) = (t0, t1);
            while b - a > 1e-12 {
                let m = 0.5 * (a + b);
                if flow.defect(m).1 < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let t = 0.5 * (a + b);
            let val = flow.defect(t).0;
            if val <= 1e-9 {
                return Ok((t, val));
            }
        }
        t0 = t1;
        d0 = d1;
    }
    Err(Error::NumericalFailure(format!("no transfer to |1> found before t = {horizon}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn hermitian_case_hits_bound() {
        let res = brachistochrone(0.0, 0.3, 1.0).unwrap();
        assert_eq!(res.phi, 0.0);
        assert_eq!(res.omega, 2.0);
        assert!((res.t_transfer - FRAC_PI_2).abs() < 1e-15);
        assert!((res.t_simulated - res.hermitian_bound).abs() < 1e-9);
    }

    #[test]
    fn strongly_non_hermitian_case_is_faster() {
        let res = brachistochrone(0.9, -FRAC_PI_2, 1.0).unwrap();
        assert!((res.phi - (-0.9f64).asin()).abs() < 1e-15);
        assert!((res.omega - 2.0 * 0.19f64.sqrt()).abs() < 1e-15);
        assert!(res.t_transfer < res.hermitian_bound);
        assert!((res.t_simulated - res.t_transfer).abs() < 1e-6);
        assert!(res.defect <= 1e-9);
    }

    #[test]
    fn broken_regime_is_an_error() {
        assert_eq!(brachistochrone(1.5, FRAC_PI_2, 1.0), Err(Error::BrokenRegime));
        assert_eq!(brachistochrone(1.0, FRAC_PI_2, 1.0), Err(Error::BrokenRegime));
    }

    #[test]
    fn sweep_decreases_towards_zero() {
        let pts: Vec<(f64, f64, f64)> = (0..20).map(|k| (0.05 * k as f64, -FRAC_PI_2, 1.0)).collect();
        let res: Vec<_> = brachistochrone_sweep(&pts).into_iter().map(|r| r.unwrap()).collect();
        for w in res.windows(2) {
            assert!(w[1].t_simulated < w[0].t_simulated);
        }
        // at γ = 1 the time is b/sin b with b = φ + π/2, so it tends to 1,
        // while the ratio to the bound π/ω at the same gap tends to 0
        let close_to_ep = brachistochrone(0.999999, -FRAC_PI_2, 1.0).unwrap();
        assert!((close_to_ep.t_transfer - 1.0).abs() < 1e-6);
        assert!(close_to_ep.t_transfer / close_to_ep.hermitian_bound < 1e-2);
        assert!((close_to_ep.t_simulated - close_to_ep.t_transfer).abs() < 1e-6);
    }
}
