use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{hausdorff_sets, wrap_phase};
use crate::evolve::{para_hermitian_system, propagator_from, Propagator};
use crate::matkit::{op_norm, CMat, CVec, EigSystem, I};
use crate::numerics::{adaptive_simpson, derivative, simpson};
use crate::{Error, Result, Tolerances};

/// An observable whose decomposition returns to itself after time `tau`.
#[derive(Debug, Clone)]
pub struct CyclicEvolution {
    pub x0_system: EigSystem,
    pub tau: f64,
    /// `θₙ = −i Log μₙ` where `U(0,τ)ψₙ = μₙψₙ`.
    pub theta: Vec<Complex64>,
    /// Evolution on `[0, τ]`.
    pub propagator: Propagator,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseReport {
    pub beta: Vec<Complex64>,
    pub theta: Vec<Complex64>,
    pub dynamical: Vec<Complex64>,
    pub holonomy_diag: Vec<Complex64>,
    pub branch_windings: Vec<i64>,
}

impl CyclicEvolution {
    pub fn dim(&self) -> usize {
        self.x0_system.dim()
    }

    /// `|ψₙ(t_k)⟩ = U(0,t_k)|ψₙ⟩` on the grid.
    pub fn state(&self, n: usize, k: usize) -> CVec {
        &self.propagator.backward[k] * self.x0_system.right_vec(n)
    }

    /// `⟨ψ*ₙ(t_k)| = ⟨ψ*ₙ|U(t_k,0)` as a column holding the conjugated bra.
    pub fn dual_state(&self, n: usize, k: usize) -> CVec {
        self.propagator.forward[k].adjoint() * self.x0_system.left_vec(n)
    }
}

fn transported(sys: &EigSystem, back: &CMat, fwd: &CMat) -> Vec<CMat> {
    (0..sys.dim()).map(|n| back * sys.projector(n) * fwd).collect()
}

fn check_gap(sys: &EigSystem, tols: &Tolerances) -> Result<()> {
    let re: Vec<f64> = sys.eigenvalues.iter().map(|z| z.re).collect();
    if re.len() < 2 {
        return Ok(());
    }
    let spread = re.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - re.iter().cloned().fold(f64::INFINITY, f64::min);
    let gap = re.windows(2).map(|w| (w[1] - w[0]).abs()).fold(f64::INFINITY, f64::min);
    let tol = tols.gap * spread;
    if !(gap > tol) {
        return Err(Error::DegenerateSpectrum { gap, tol });
    }
    Ok(())
}

pub fn detect_cycle(x_traj: &[CMat], p: &Propagator, tol: f64) -> Result<CyclicEvolution> {
    detect_cycle_with(x_traj, p, tol, &Tolerances::default())
}

/// Finds the first return of the decomposition of `X(t)` to that of `X₀`.
///
/// Local minima of the Hausdorff distance along the grid are refined by
/// golden-section search with off-grid propagator steps; the first refined
/// minimum within `tol` whose projectors return with their labels is `τ`.
/// If the distance never leaves `tol` the evolution is trivial and `τ = t₁`.
pub fn detect_cycle_with(x_traj: &[CMat], p: &Propagator, tol: f64, tols: &Tolerances) -> Result<CyclicEvolution> {
    if x_traj.len() != p.grid.len() {
        return Err(Error::DimensionMismatch { expected: p.grid.len(), found: x_traj.len() });
    }
    let sys = para_hermitian_system(&x_traj[0], tols)?;
    check_gap(&sys, tols)?;
    let base: Vec<CMat> = (0..sys.dim()).map(|n| sys.projector(n)).collect();
    let dist: Vec<f64> = (0..p.grid.len())
        .into_par_iter()
        .map(|k| hausdorff_sets(&transported(&sys, &p.backward[k], &p.forward[k]), &base))
        .collect();
    let last = dist.len() - 1;

    if dist.iter().all(|&x| x <= tol) {
        return finish(sys, p, p.grid[1]);
    }
    let objective = |t: f64| -> Result<(f64, Vec<CMat>)> {
        let (fwd, back) = p.at(t)?;
        let proj = transported(&sys, &back, &fwd);
        Ok((hausdorff_sets(&proj, &base), proj))
    };
    for k in 1..=last {
        let next = if k < last { dist[k + 1] } else { f64::INFINITY };
        if !(dist[k] <= dist[k - 1] && dist[k] <= next) {
            continue;
        }
        let hi = p.grid[(k + 1).min(last)];
        let t = golden_min(|t| objective(t).map(|r| r.0).unwrap_or(f64::INFINITY), p.grid[k - 1], hi);
        let (value, proj) = objective(t)?;
        let labelled = proj.iter().zip(&base).map(|(a, b)| op_norm(&(a - b))).fold(0.0, f64::max);
        if value <= tol && labelled <= tol {
            return finish(sys, p, t);
        }
    }
    Err(Error::NoCycleFound(p.horizon()))
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

fn finish(sys: EigSystem, p: &Propagator, tau: f64) -> Result<CyclicEvolution> {
    let steps = ((tau / p.dt()).round() as usize).max(1);
    let cyc = propagator_from(p.generator.clone(), tau, steps, p.order)?;
    cyclic_at_horizon(sys, cyc)
}

/// Treats the end of `p` as the period of `X₀`'s eigenvectors and computes `θₙ`.
pub fn cyclic_at_horizon(x0_system: EigSystem, p: Propagator) -> Result<CyclicEvolution> {
    let u = p.backward.last().expect("grid is never empty");
    let mut theta = Vec::with_capacity(x0_system.dim());
    for n in 0..x0_system.dim() {
        let psi = x0_system.right_vec(n);
        let image = u * &psi;
        let mu = x0_system.left_vec(n).dotc(&image);
        let residual = (&image - &psi * mu).norm() / image.norm();
        if !(residual <= 1e-6) {
            return Err(Error::NotCyclic(format!("eigenvector {n} does not return (residual {residual:.3e})")));
        }
        theta.push(-I * mu.ln());
    }
    Ok(CyclicEvolution { x0_system, tau: p.horizon(), theta, propagator: p })
}

/// `∫₀^τ ⟨ψ*ₙ(0)|h(t)|ψₙ(0)⟩ dt` by adaptive quadrature.
fn dynamical(c: &CyclicEvolution) -> Vec<Complex64> {
    let h = &c.propagator.generator;
    (0..c.dim())
        .map(|n| {
            let psi = c.x0_system.right_vec(n);
            let dual = c.x0_system.left_vec(n);
            adaptive_simpson(&|t: f64| dual.dotc(&(h(t) * &psi)), 0.0, c.tau, 1e-9)
        })
        .collect()
}

/// Net continuous change of `arg⟨ψ*ₙ(0)|ψₙ(t)⟩` over the cycle.
fn tracked_arg(c: &CyclicEvolution, n: usize) -> f64 {
    let dual = c.x0_system.left_vec(n);
    let mut total = 0.0;
    let mut prev = 0.0;
    for k in 1..c.propagator.grid.len() {
        let arg = dual.dotc(&c.state(n, k)).arg();
        total += wrap_phase(Complex64::new(arg - prev, 0.0)).re;
        prev = arg;
    }
    total
}

fn report(theta: Vec<Complex64>, dynamical: Vec<Complex64>, beta: Vec<Complex64>, windings: Vec<i64>) -> PhaseReport {
    let holonomy_diag = beta.iter().map(|b| (I * b).exp()).collect();
    PhaseReport { beta, theta, dynamical, holonomy_diag, branch_windings: windings }
}

/// `βₙ = θₙ − ∫⟨ψ*ₙ(0)|h|ψₙ(0)⟩ + 2πkₙ` with `kₙ` tracked along the cycle.
pub fn geometric_phases(c: &CyclicEvolution) -> Result<PhaseReport> {
    let dynamical = dynamical(c);
    let windings: Vec<i64> = (0..c.dim())
        .into_par_iter()
        .map(|n| ((tracked_arg(c, n) - c.theta[n].re) / (2.0 * PI)).round() as i64)
        .collect();
    let beta = (0..c.dim())
        .map(|n| c.theta[n] - dynamical[n] + 2.0 * PI * windings[n] as f64)
        .collect();
    Ok(report(c.theta.clone(), dynamical, beta, windings))
}

/// `βₙ = ∫ i⟨ψ̄*ₙ|d/dt|ψ̄ₙ⟩ dt` for the closed lifts `ψ̄ₙ = e^{−iαₙ}ψₙ`.
pub fn geometric_phases_loop(c: &CyclicEvolution, alpha: &[&(dyn Fn(f64) -> Complex64 + Sync)]) -> Result<PhaseReport> {
    let d = c.dim();
    if alpha.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: alpha.len() });
    }
    for (n, a) in alpha.iter().enumerate() {
        let defect = wrap_phase(a(c.tau) - a(0.0) - c.theta[n]).norm();
        if !(defect <= 1e-8) {
            return Err(Error::BadGauge { index: n, defect });
        }
    }
    let grid = &c.propagator.grid;
    let h = c.propagator.dt();
    let beta: Vec<Complex64> = (0..d)
        .into_par_iter()
        .map(|n| {
            let a = alpha[n];
            let kets: Vec<CVec> = grid.iter().enumerate().map(|(k, &t)| c.state(n, k) * (-I * a(t)).exp()).collect();
            let mut dkets = vec![CVec::zeros(d); kets.len()];
            for i in 0..d {
                let series: Vec<Complex64> = kets.iter().map(|v| v[i]).collect();
                for (dk, v) in dkets.iter_mut().zip(derivative(&series, h)) {
                    dk[i] = v;
                }
            }
            let integrand: Vec<Complex64> = grid
                .iter()
                .enumerate()
                .map(|(k, &t)| {
                    let bra = c.dual_state(n, k) * (I * a(t)).exp().conj();
                    I * bra.dotc(&dkets[k])
                })
                .collect();
            simpson(&integrand, h)
        })
        .collect();
    let dynamical = dynamical(c);
    let windings = (0..d)
        .map(|n| ((beta[n] - c.theta[n] + dynamical[n]).re / (2.0 * PI)).round() as i64)
        .collect();
    Ok(report(c.theta.clone(), dynamical, beta, windings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::propagator;
    use crate::geophase::{bloch_observable, heisenberg_evolve, phase_multiset_distance, qubit_loop_hamiltonian};
    use crate::matkit::{c as cx, cr, from_rows};

    /// Closed-form phases for the deformed-σ_z loop, labelled by the `+1`
    /// eigenvector first.
    fn closed_form(omega: f64, phi: f64) -> [Complex64; 2] {
        let r = phi.cos() / omega.cos();
        let s = omega.sin() * phi.sin() / omega.cos();
        [cx(PI * (1.0 + r), PI * s), cx(PI * (1.0 - r), -PI * s)]
    }

    fn cycle(omega: f64, phi: f64, steps: usize) -> CyclicEvolution {
        let h = qubit_loop_hamiltonian(omega).unwrap();
        let p = propagator(move |_| h.clone(), 10.0, steps, 2).unwrap();
        let x0 = bloch_observable(phi);
        let traj = heisenberg_evolve(&x0, &p).unwrap();
        detect_cycle(&traj, &p, 1e-9).unwrap()
    }

    #[test]
    fn qubit_loop_period_and_phases() {
        for &(omega, phi) in &[(0.3, 0.4), (0.6, 0.9)] {
            let c = cycle(omega, phi, 4000);
            assert!((c.tau - PI).abs() < 1e-8, "{}", c.tau);
            for th in &c.theta {
                assert!(wrap_phase(th - cr(PI)).norm() < 1e-9);
            }
            let rep = geometric_phases(&c).unwrap();
            assert!(phase_multiset_distance(&rep.beta, &closed_form(omega, phi)) < 1e-8);
            for n in 0..2 {
                let lhs = rep.theta[n] - rep.dynamical[n] + 2.0 * PI * rep.branch_windings[n] as f64;
                assert!((lhs - rep.beta[n]).norm() < 1e-12);
                assert!((rep.holonomy_diag[n] - (I * rep.beta[n]).exp()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn hermitian_limit_has_real_phases() {
        let c = cycle(0.0, 0.7, 2000);
        let rep = geometric_phases(&c).unwrap();
        assert!(rep.beta.iter().all(|b| b.im.abs() < 1e-9));
        assert!(phase_multiset_distance(&rep.beta, &closed_form(0.0, 0.7)) < 1e-8);
    }

    #[test]
    fn trivial_and_hermitian_cycles() {
        let p = propagator(|_| CMat::zeros(2, 2), 1.0, 10, 2).unwrap();
        let x0 = from_rows(&[&[cr(1.0), cr(0.0)], &[cr(0.0), cr(-1.0)]]);
        let c = detect_cycle(&heisenberg_evolve(&x0, &p).unwrap(), &p, 1e-9).unwrap();
        assert!((c.tau - 0.1).abs() < 1e-15);
        assert!(c.theta.iter().all(|t| t.norm() < 1e-15));

        // σ_x eigenvectors under −σ_z swap at π/2 and return labelled at π
        let mz = from_rows(&[&[cr(-1.0), cr(0.0)], &[cr(0.0), cr(1.0)]]);
        let p = propagator(move |_| mz.clone(), 5.0, 1000, 2).unwrap();
        let x0 = from_rows(&[&[cr(0.0), cr(1.0)], &[cr(1.0), cr(0.0)]]);
        let c = detect_cycle(&heisenberg_evolve(&x0, &p).unwrap(), &p, 1e-9).unwrap();
        assert!((c.tau - PI).abs() < 1e-8);
        assert!(c.theta.iter().all(|t| wrap_phase(t - cr(PI)).norm() < 1e-9));
    }

    #[test]
    fn cycle_errors() {
        let p = propagator(|_| CMat::zeros(2, 2), 1.0, 10, 2).unwrap();
        let degenerate = CMat::identity(2, 2);
        assert!(matches!(
            detect_cycle(&heisenberg_evolve(&degenerate, &p).unwrap(), &p, 1e-9),
            Err(Error::DegenerateSpectrum { .. })
        ));
        let h = qubit_loop_hamiltonian(0.3).unwrap();
        let p = propagator(move |_| h.clone(), 2.0, 200, 2).unwrap();
        let x0 = bloch_observable(0.4);
        assert!(matches!(
            detect_cycle(&heisenberg_evolve(&x0, &p).unwrap(), &p, 1e-9),
            Err(Error::NoCycleFound(_))
        ));
    }

    #[test]
    fn loop_formula_with_linear_gauge() {
        let c = cycle(0.3, 0.9, 6000);
        let rep = geometric_phases(&c).unwrap();
        let (t0, t1, tau) = (c.theta[0], c.theta[1], c.tau);
        let a0 = move |t: f64| t0 * (t / tau);
        let a1 = move |t: f64| t1 * (t / tau);
        let lp = geometric_phases_loop(&c, &[&a0, &a1]).unwrap();
        let dt = c.propagator.dt();
        for n in 0..2 {
            assert!(wrap_phase(lp.beta[n] - rep.beta[n]).norm() < 10.0 * dt * dt + 1e-8);
        }
        // one extra winding shifts the loop value by 2π
        let w = move |t: f64| t0 * (t / tau) + 2.0 * PI * t / tau;
        let shifted = geometric_phases_loop(&c, &[&w, &a1]).unwrap();
        assert!((shifted.beta[0] - lp.beta[0] - cr(2.0 * PI)).norm() < 1e-7);
        assert_eq!(shifted.branch_windings[0], lp.branch_windings[0] + 1);

        let bad = |t: f64| cr(0.1 * t);
        assert!(matches!(
            geometric_phases_loop(&c, &[&bad, &a1]),
            Err(Error::BadGauge { index: 0, .. })
        ));
    }
}
