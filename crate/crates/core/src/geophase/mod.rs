//! Geometric phases of cyclic observable evolutions and the bundle geometry
//! of complete decompositions.
//!
//! A complete decomposition is a set of rank-one skew projections
//! `|n⟩⟨n*|` resolving the identity. Observables move through the space of
//! decompositions under Heisenberg evolution; closed loops carry phases `βₙ`.

mod bundle;
mod cycle;
mod invariance;

pub use bundle::{
    canonical_connection, gauge_ode_lift, holonomy, holonomy_phases, horizontal_lift, Lift,
};
pub use cycle::{
    cyclic_at_horizon, detect_cycle, detect_cycle_with, geometric_phases, geometric_phases_loop,
    CyclicEvolution, PhaseReport,
};
pub use invariance::{invariance_suite, InvarianceReport};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::evolve::{para_hermitian_system, Propagator};
use crate::matkit::{inverse, op_norm, CMat};
use crate::paraops::deformed_pauli;
use crate::{Error, Result, Tolerances};

/// Complete decomposition `{|n⟩⟨n*|}` with its frame `V` (columns `|n⟩`).
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub projectors: Vec<CMat>,
    pub frame: CMat,
}

impl Decomposition {
    pub fn from_frame(frame: &CMat) -> Result<Decomposition> {
        let dual = inverse(frame)?.adjoint();
        let projectors = (0..frame.ncols())
            .map(|n| frame.column(n) * dual.column(n).adjoint())
            .collect();
        Ok(Decomposition { projectors, frame: frame.clone() })
    }

    /// The decomposition `{|eᵢ⟩⟨eᵢ|}` of the standard basis.
    pub fn standard(d: usize) -> Decomposition {
        Decomposition::from_frame(&CMat::identity(d, d)).expect("identity is invertible")
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    /// Dual frame `V^{-†}` (columns `|n*⟩`).
    pub fn dual(&self) -> CMat {
        inverse(&self.frame).expect("frame validated on construction").adjoint()
    }

    /// `{A Pₙ A⁻¹}` for invertible `A`.
    pub fn conjugated(&self, a: &CMat) -> Result<Decomposition> {
        Decomposition::from_frame(&(a * &self.frame))
    }

    /// Largest violation of idempotency, completeness, mutual annihilation or unit trace.
    pub fn defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        let mut sum = CMat::zeros(d, d);
        for (n, p) in self.projectors.iter().enumerate() {
            worst = worst.max(op_norm(&(p * p - p)));
            worst = worst.max((p.trace() - Complex64::new(1.0, 0.0)).norm());
            for q in self.projectors.iter().skip(n + 1) {
                worst = worst.max(op_norm(&(p * q)));
            }
            sum += p;
        }
        worst.max(op_norm(&(sum - CMat::identity(d, d))))
    }
}

/// Element `g = Σ cₙ |e_{σ(n)}⟩⟨e*ₙ|` of the gauge group of a decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeElem {
    pub perm: Vec<usize>,
    pub scalars: Vec<Complex64>,
}

impl GaugeElem {
    pub fn new(perm: Vec<usize>, scalars: Vec<Complex64>) -> Result<GaugeElem> {
        let d = perm.len();
        if scalars.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: scalars.len() });
        }
        let mut seen = vec![false; d];
        for &p in &perm {
            if p >= d || seen[p] {
                return Err(Error::DomainError("gauge permutation is not a bijection".into()));
            }
            seen[p] = true;
        }
        if scalars.iter().any(|c| !(c.norm() > 0.0 && c.norm().is_finite())) {
            return Err(Error::DomainError("gauge scalars must be finite and nonzero".into()));
        }
        Ok(GaugeElem { perm, scalars })
    }

    /// Random permutation with scalars of modulus in `[1/2, 2]` and arbitrary phase.
    pub fn random<R: Rng>(rng: &mut R, d: usize) -> GaugeElem {
        let mut perm: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let scalars = (0..d)
            .map(|_| Complex64::from_polar(2f64.powf(rng.random_range(-1.0..1.0)), rng.random_range(-PI..PI)))
            .collect();
        GaugeElem { perm, scalars }
    }

    pub fn matrix(&self, o0: &Decomposition) -> CMat {
        let dual = o0.dual();
        let d = o0.dim();
        let mut g = CMat::zeros(d, d);
        for n in 0..d {
            g += o0.frame.column(self.perm[n]) * dual.column(n).adjoint() * self.scalars[n];
        }
        g
    }
}

/// `max_a min_b ‖a − b‖ + max_b min_a ‖a − b‖` over the two projector sets.
pub fn hausdorff_distance(o1: &Decomposition, o2: &Decomposition) -> Result<f64> {
    if o1.dim() != o2.dim() {
        return Err(Error::DimensionMismatch { expected: o1.dim(), found: o2.dim() });
    }
    Ok(hausdorff_sets(&o1.projectors, &o2.projectors))
}

pub(crate) fn hausdorff_sets(a: &[CMat], b: &[CMat]) -> f64 {
    let dist: Vec<Vec<f64>> = a.iter().map(|p| b.iter().map(|q| op_norm(&(p - q))).collect()).collect();
    let ab = dist.iter().map(|row| row.iter().cloned().fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    let ba = (0..b.len())
        .map(|j| dist.iter().map(|row| row[j]).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    ab + ba
}

/// `X(t_k) = U(0, t_k) X₀ U(t_k, 0)` on the propagator grid.
pub fn heisenberg_evolve(x0: &CMat, p: &Propagator) -> Result<Vec<CMat>> {
    para_hermitian_system(x0, &Tolerances::default())?;
    if x0.nrows() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: x0.nrows() });
    }
    Ok(p.backward.iter().zip(&p.forward).map(|(b, f)| b * x0 * f).collect())
}

/// `−σ^ω_z`; its evolution returns every decomposition to itself after `π`.
pub fn qubit_loop_hamiltonian(omega: f64) -> Result<CMat> {
    let (_, _, z) = deformed_pauli(omega)?;
    Ok(-z)
}

/// `cos φ σ_z + sin φ σ_x`, with `+1` eigenvector `(cos φ/2, sin φ/2)`.
pub fn bloch_observable(phi: f64) -> CMat {
    let (s, c) = phi.sin_cos();
    CMat::from_row_slice(2, 2, &[Complex64::new(c, 0.0), Complex64::new(s, 0.0), Complex64::new(s, 0.0), Complex64::new(-c, 0.0)])
}

/// Real part reduced to `(−π, π]`, imaginary part untouched.
pub fn wrap_phase(z: Complex64) -> Complex64 {
    let mut re = z.re.rem_euclid(2.0 * PI);
    if re > PI {
        re -= 2.0 * PI;
    }
    Complex64::new(re, z.im)
}

/// Smallest, over matchings, of the largest mod-2π distance between paired phases.
pub fn phase_multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let n = a.len();
    let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| wrap_phase(x - y).norm()).collect()).collect();
    if n <= 8 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, &cost, &mut best);
        best
    } else {
        // greedy bottleneck matching
        let mut used = vec![false; n];
        let mut worst: f64 = 0.0;
        for row in &cost {
            let (j, c) = row
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .fold((0, f64::INFINITY), |acc, (j, &c)| if c < acc.1 { (j, c) } else { acc });
            used[j] = true;
            worst = worst.max(c);
        }
        worst
    }
}

fn permute(perm: &mut Vec<usize>, k: usize, cost: &[Vec<f64>], best: &mut f64) {
    let n = perm.len();
    if k == n {
        let v = (0..n).map(|i| cost[i][perm[i]]).fold(0.0, f64::max);
        if v < *best {
            *best = v;
        }
        return;
    }
    for i in k..n {
        perm.swap(k, i);
        permute(perm, k + 1, cost, best);
        perm.swap(k, i);
    }
}
