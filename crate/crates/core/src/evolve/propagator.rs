use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::para_hermitian_system;
use crate::matkit::{commutator, identity, mat_exp, op_norm, CMat, CVec};
use crate::{Error, Result, Tolerances};

/// Time-dependent Hamiltonian `t ↦ h(t)`.
pub type Generator = Arc<dyn Fn(f64) -> CMat + Send + Sync>;

/// Sampled evolution system on a uniform grid `0 = t₀ < … < t_K = T`.
#[derive(Clone)]
pub struct Propagator {
    pub grid: Vec<f64>,
    /// `U(t_{k+1}, t_k)`
    pub steps: Vec<CMat>,
    /// `U(t_k, 0)`
    pub forward: Vec<CMat>,
    /// `U(0, t_k)`
    pub backward: Vec<CMat>,
    pub generator: Generator,
    pub order: u8,
}

impl fmt::Debug for Propagator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Propagator")
            .field("horizon", &self.horizon())
            .field("steps", &self.steps.len())
            .field("order", &self.order)
            .finish()
    }
}

/// Grid nodes checked for para-Hermiticity of `h`.
const MAX_CHECKS: usize = 257;

/// Builds `U(t, 0)` for `i ψ' = h(t) ψ` with exponential-midpoint (order 2)
/// or two-point Gauss Magnus (order 4) steps.
pub fn propagator<F>(h: F, horizon: f64, steps: usize, order: u8) -> Result<Propagator>
where
    F: Fn(f64) -> CMat + Send + Sync + 'static,
{
    propagator_from(Arc::new(h), horizon, steps, order)
}

pub fn propagator_from(h: Generator, horizon: f64, steps: usize, order: u8) -> Result<Propagator> {
    if steps == 0 {
        return Err(Error::DomainError("steps must be at least 1".into()));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::DomainError(format!("horizon must be positive, got {horizon}")));
    }
    if order != 2 && order != 4 {
        return Err(Error::DomainError(format!("order must be 2 or 4, got {order}")));
    }
    let dt = horizon / steps as f64;
    let grid: Vec<f64> = (0..=steps).map(|k| if k == steps { horizon } else { k as f64 * dt }).collect();

    let tols = Tolerances::default();
    let stride = steps.div_ceil(MAX_CHECKS - 1).max(1);
    let mut checked: Vec<usize> = (0..=steps).step_by(stride).collect();
    if checked.last() != Some(&steps) {
        checked.push(steps);
    }
    for k in checked {
        para_hermitian_system(&h(grid[k]), &tols).map_err(|e| match e {
            Error::NotParaHermitian(m) => Error::NotParaHermitian(format!("at t = {}: {m}", grid[k])),
            other => other,
        })?;
    }

    let d = h(0.0).nrows();
    let mut forward = Vec::with_capacity(steps + 1);
    let mut backward = Vec::with_capacity(steps + 1);
    let mut step_mats = Vec::with_capacity(steps);
    forward.push(identity(d));
    backward.push(identity(d));
    for k in 0..steps {
        let omega = magnus(&*h, grid[k], grid[k + 1] - grid[k], order);
        let step = mat_exp(&omega, Complex64::new(1.0, 0.0))?;
        let inv = mat_exp(&omega, Complex64::new(-1.0, 0.0))?;
        forward.push(&step * &forward[k]);
        backward.push(&backward[k] * inv);
        step_mats.push(step);
    }
    Ok(Propagator { grid, steps: step_mats, forward, backward, generator: h, order })
}

/// Exponent `Ω` of one step over `[t, t + dt]`, so that `U(t+dt, t) = e^Ω`.
fn magnus(h: &dyn Fn(f64) -> CMat, t: f64, dt: f64, order: u8) -> CMat {
    let mi = Complex64::new(0.0, -1.0);
    if order == 2 {
        return h(t + 0.5 * dt) * (mi * dt);
    }
    let off = 3f64.sqrt() / 6.0;
    let h1 = h(t + (0.5 - off) * dt);
    let h2 = h(t + (0.5 + off) * dt);
    let first = (&h1 + &h2) * (mi * (0.5 * dt));
    let second = commutator(&h2, &h1) * Complex64::new(-3f64.sqrt() / 12.0 * dt * dt, 0.0);
    first + second
}

impl Propagator {
    pub fn horizon(&self) -> f64 {
        *self.grid.last().expect("grid is never empty")
    }

    pub fn dt(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    pub fn dim(&self) -> usize {
        self.forward[0].nrows()
    }

    /// `U(t_j, t_i) = U(t_j, 0)·U(0, t_i)`
    pub fn between(&self, j: usize, i: usize) -> CMat {
        &self.forward[j] * &self.backward[i]
    }

    /// `(U(t, 0), U(0, t))` at an arbitrary `t ∈ [0, T]`, by one partial step
    /// of the same scheme from the grid node below `t`.
    pub fn at(&self, t: f64) -> Result<(CMat, CMat)> {
        if !(0.0..=self.horizon()).contains(&t) {
            return Err(Error::DomainError(format!("time {t} outside [0, {}]", self.horizon())));
        }
        let k = ((t / self.dt()).floor() as usize).min(self.steps.len());
        let k = if self.grid[k] > t { k - 1 } else { k };
        let rest = t - self.grid[k];
        if rest == 0.0 {
            return Ok((self.forward[k].clone(), self.backward[k].clone()));
        }
        let omega = magnus(&*self.generator, self.grid[k], rest, self.order);
        let step = mat_exp(&omega, Complex64::new(1.0, 0.0))?;
        let inv = mat_exp(&omega, Complex64::new(-1.0, 0.0))?;
        Ok((step * &self.forward[k], &self.backward[k] * inv))
    }

    /// `max_k ‖U(t_k, 0)·U(0, t_k) − I‖`
    pub fn invertibility_defect(&self) -> f64 {
        let d = self.dim();
        self.forward
            .iter()
            .zip(&self.backward)
            .map(|(f, b)| op_norm(&(f * b - identity(d))))
            .fold(0.0, f64::max)
    }

    /// `max ‖U(t_j, 0) − U(t_j, t_i)·U(t_i, 0)‖` over a subsample of pairs.
    pub fn composition_defect(&self) -> f64 {
        let n = self.grid.len();
        let stride = (n / 16).max(1);
        let idx: Vec<usize> = (0..n).step_by(stride).chain(std::iter::once(n - 1)).collect();
        let mut worst: f64 = 0.0;
        for &i in &idx {
            for &j in idx.iter().filter(|&&j| j >= i) {
                let lhs = &self.forward[j];
                let rhs = self.between(j, i) * &self.forward[i];
                worst = worst.max(op_norm(&(lhs - rhs)));
            }
        }
        worst
    }
}

/// `ψ(t_k) = U(t_k, 0) ψ₀` on the grid.
pub fn evolve_state(p: &Propagator, psi0: &CVec) -> Result<Vec<CVec>> {
    if psi0.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: psi0.len() });
    }
    if psi0.norm() == 0.0 {
        return Err(Error::ZeroState);
    }
    Ok(p.forward.iter().map(|u| u * psi0).collect())
}
