use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bundle::{canonical_connection, gauge_ode_lift, holonomy_phases};
use super::{cyclic_at_horizon, geometric_phases, phase_multiset_distance, CyclicEvolution, Decomposition, GaugeElem};
use crate::evolve::{propagator_from, Generator};
use crate::matkit::{cond2, inverse, CMat, I};
use crate::Result;

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub trials: usize,
    pub reference_beta: Vec<Complex64>,
    /// Largest multiset deviation under time reparameterizations.
    pub reparameterization: f64,
    /// Largest deviation over gauge-transformed starting frames.
    pub starting_point: f64,
    /// Largest deviation over measurement points with the transported connection.
    pub measurement_point: f64,
    /// Same, with the canonical connection of the new measurement point.
    pub measurement_point_canonical: f64,
    /// Largest `|Im βₙ|` seen across all draws.
    pub max_imag: f64,
}

impl InvarianceReport {
    pub fn max_deviation(&self) -> f64 {
        self.reparameterization.max(self.starting_point).max(self.measurement_point)
    }
}

/// `−i log` of holonomy diagonals.
fn phases_of(diag: &[Complex64]) -> Vec<Complex64> {
    diag.iter().map(|z| -I * z.ln()).collect()
}

fn reparameterized(c: &CyclicEvolution, amp: f64, k: f64) -> Result<Vec<Complex64>> {
    let tau = c.tau;
    let h = c.propagator.generator.clone();
    // s(u) = u + (aτ/kπ) sin(kπu/τ) fixes both ends and has s' = 1 + a cos(kπu/τ) > 0
    let g: Generator = Arc::new(move |u: f64| {
        let s = u + amp * tau / (k * PI) * (k * PI * u / tau).sin();
        let ds = 1.0 + amp * (k * PI * u / tau).cos();
        h(s) * Complex64::new(ds, 0.0)
    });
    let p = propagator_from(g, tau, c.propagator.steps.len(), 4)?;
    let cyc = cyclic_at_horizon(c.x0_system.clone(), p)?;
    Ok(geometric_phases(&cyc)?.beta)
}

fn gauge_start(c: &CyclicEvolution, o0: &Decomposition, g: &GaugeElem) -> Result<Vec<Complex64>> {
    let v0 = &c.x0_system.right * g.matrix(o0);
    let gammas: Vec<CMat> = c.propagator.backward.iter().map(|b| b * &v0).collect();
    let lift = gauge_ode_lift(&gammas, c.propagator.dt(), o0, &|p, q| canonical_connection(p, q, o0))?;
    Ok(phases_of(&holonomy_phases(lift.last().expect("nonempty"), &v0, o0)?))
}

/// Phases seen from `O₀' = T O₀ T⁻¹` starting at `V₀T⁻¹`, with the transported
/// connection `T Ω̌_{PT}(QT) T⁻¹` and with the canonical connection of `O₀'`.
fn measurement_point(c: &CyclicEvolution, o0: &Decomposition, t: &CMat) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let tinv = inverse(t)?;
    let moved = o0.conjugated(t)?;
    let v0 = &c.x0_system.right * &tinv;
    let gammas: Vec<CMat> = c.propagator.backward.iter().map(|b| b * &v0).collect();
    let dt = c.propagator.dt();
    let transported = |p: &CMat, q: &CMat| -> Result<CMat> { Ok(t * canonical_connection(&(p * t), &(q * t), o0)? * &tinv) };
    let a = gauge_ode_lift(&gammas, dt, &moved, &transported)?;
    let b = gauge_ode_lift(&gammas, dt, &moved, &|p, q| canonical_connection(p, q, &moved))?;
    let pa = phases_of(&holonomy_phases(a.last().expect("nonempty"), &v0, &moved)?);
    let pb = phases_of(&holonomy_phases(b.last().expect("nonempty"), &v0, &moved)?);
    Ok((pa, pb))
}

fn random_measurement_point(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    loop {
        let t = CMat::from_fn(d, d, |i, j| {
            Complex64::new(if i == j { 1.0 } else { 0.0 } + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        if cond2(&t) < 1e3 {
            return t;
        }
    }
}

/// Recomputes the phases of `c` under `trials` random reparameterizations,
/// gauge-transformed starting frames and measurement points, relative to the
/// standard-basis measurement point.
pub fn invariance_suite(c: &CyclicEvolution, trials: usize, seed: u64) -> Result<InvarianceReport> {
    let d = c.dim();
    let o0 = Decomposition::standard(d);
    let reference = geometric_phases(c)?.beta;

    let draws: Vec<Result<[Vec<Complex64>; 4]>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let amp = rng.random_range(-0.6..0.6);
            let k = rng.random_range(1..=3) as f64;
            let g = GaugeElem::random(&mut rng, d);
            let t = random_measurement_point(&mut rng, d);
            let (ma, mb) = measurement_point(c, &o0, &t)?;
            Ok([reparameterized(c, amp, k)?, gauge_start(c, &o0, &g)?, ma, mb])
        })
        .collect();

    let mut dev = [0.0f64; 4];
    let mut max_imag = reference.iter().map(|b| b.im.abs()).fold(0.0, f64::max);
    for draw in draws {
        let draw = draw?;
        for (slot, betas) in dev.iter_mut().zip(&draw) {
            *slot = slot.max(phase_multiset_distance(betas, &reference));
            max_imag = betas.iter().map(|b| b.im.abs()).fold(max_imag, f64::max);
        }
    }
    Ok(InvarianceReport {
        trials,
        reference_beta: reference,
        reparameterization: dev[0],
        starting_point: dev[1],
        measurement_point: dev[2],
        measurement_point_canonical: dev[3],
        max_imag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{propagator, Propagator};
    use crate::geophase::{bloch_observable, detect_cycle, heisenberg_evolve, qubit_loop_hamiltonian};

    fn cycle(omega: f64, phi: f64) -> CyclicEvolution {
        let h = qubit_loop_hamiltonian(omega).unwrap();
        let p: Propagator = propagator(move |_| h.clone(), 4.0, 3000, 2).unwrap();
        let x0 = bloch_observable(phi);
        detect_cycle(&heisenberg_evolve(&x0, &p).unwrap(), &p, 1e-9).unwrap()
    }

    #[test]
    fn qubit_loop_is_invariant() {
        let rep = invariance_suite(&cycle(0.3, 0.9), 4, 7).unwrap();
        assert!(rep.max_deviation() <= 1e-6, "{rep:?}");
        assert!(rep.measurement_point_canonical <= 1e-6);
        assert!(rep.max_imag > 0.1);
    }

    #[test]
    fn hermitian_loop_stays_real() {
        let rep = invariance_suite(&cycle(0.0, 0.5), 3, 1).unwrap();
        assert!(rep.max_deviation() <= 1e-6);
        assert!(rep.max_imag <= 1e-9, "{}", rep.max_imag);
    }
}
