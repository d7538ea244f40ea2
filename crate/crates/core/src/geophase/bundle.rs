use num_complex::Complex64;
use serde::Serialize;

use super::{hausdorff_distance, CyclicEvolution, Decomposition};
use crate::evolve::Propagator;
use crate::matkit::{inverse, op_norm, CMat, CVec, I};
use crate::numerics::derivative;
use crate::{Error, Result};

/// Horizontal lift sampled on the propagator grid.
#[derive(Debug, Clone, Serialize)]
pub struct Lift {
    #[serde(skip)]
    pub grid: Vec<f64>,
    #[serde(skip)]
    pub frames: Vec<CMat>,
    /// `max_t ‖Ω̌_{Ṽ}[dṼ/dt]‖` with finite-difference derivatives.
    pub connection_defect: f64,
    /// `max_t` distance between the closed form and the gauge-ODE construction.
    pub ode_agreement: f64,
}

/// `Ω̌_P(Q) = Σ ⟨e*ₙ|P⁻¹Q|eₙ⟩ |eₙ⟩⟨e*ₙ|`
pub fn canonical_connection(p: &CMat, q: &CMat, o0: &Decomposition) -> Result<CMat> {
    let e = &o0.frame;
    let einv = inverse(e)?;
    let m = &einv * inverse(p)? * q * e;
    Ok(e * CMat::from_diagonal(&m.diagonal()) * einv)
}

fn entrywise_derivative(samples: &[CMat], h: f64) -> Vec<CMat> {
    let (r, c) = samples[0].shape();
    let mut out = vec![CMat::zeros(r, c); samples.len()];
    for i in 0..r {
        for j in 0..c {
            let series: Vec<Complex64> = samples.iter().map(|m| m[(i, j)]).collect();
            for (o, v) in out.iter_mut().zip(derivative(&series, h)) {
                o[(i, j)] = v;
            }
        }
    }
    out
}

/// `E · diag(e^{−Iₙ}) · E⁻¹`
fn frame_diag(e: &CMat, einv: &CMat, integral: &[Complex64]) -> CMat {
    let d = CVec::from_iterator(integral.len(), integral.iter().map(|z| (-z).exp()));
    e * CMat::from_diagonal(&d) * einv
}

/// Solves `G' = −Ω[Γ, Γ']·G`, `G(0) = I`, for a connection with values in the
/// algebra of `o0`, and returns `Γ·G`. `Γ'` is differentiated from the samples.
pub fn gauge_ode_lift(
    gammas: &[CMat],
    h: f64,
    o0: &Decomposition,
    conn: &dyn Fn(&CMat, &CMat) -> Result<CMat>,
) -> Result<Vec<CMat>> {
    let d = o0.dim();
    let e = &o0.frame;
    let einv = inverse(e)?;
    let dgam = entrywise_derivative(gammas, h);
    let mut omega: Vec<Vec<Complex64>> = Vec::with_capacity(gammas.len());
    for (g, dg) in gammas.iter().zip(&dgam) {
        let w = &einv * conn(g, dg)? * e;
        omega.push((0..d).map(|n| w[(n, n)]).collect());
    }
    // trapezoid with endpoint-derivative correction, fourth order
    let domega: Vec<Vec<Complex64>> = {
        let per_n: Vec<Vec<Complex64>> =
            (0..d).map(|n| derivative(&omega.iter().map(|w| w[n]).collect::<Vec<_>>(), h)).collect();
        (0..gammas.len()).map(|k| (0..d).map(|n| per_n[n][k]).collect()).collect()
    };
    let mut integral = vec![Complex64::new(0.0, 0.0); d];
    let mut out = Vec::with_capacity(gammas.len());
    out.push(&gammas[0] * frame_diag(e, &einv, &integral));
    for k in 1..gammas.len() {
        for n in 0..d {
            integral[n] += (omega[k - 1][n] + omega[k][n]) * (0.5 * h)
                - (domega[k][n] - domega[k - 1][n]) * (h * h / 12.0);
        }
        out.push(&gammas[k] * frame_diag(e, &einv, &integral));
    }
    Ok(out)
}

/// Horizontal lift through `v0` of the frame path `Γ(t) = U(0,t)·V₀`.
///
/// `base` is the decomposition of the observable at `t = 0`; `v0` must carry
/// `o0` onto it. The closed form integrates `⟨e*ₙ|Γ⁻¹Γ'|eₙ⟩ = i⟨e*ₙ|V₀⁻¹h(t)V₀|eₙ⟩`
/// with two-point Gauss per step and is cross-checked against the gauge ODE.
pub fn horizontal_lift(p: &Propagator, o0: &Decomposition, base: &Decomposition, v0: &CMat) -> Result<Lift> {
    let d = p.dim();
    for found in [o0.dim(), base.dim(), v0.nrows()] {
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    let miss = hausdorff_distance(&o0.conjugated(v0)?, base)?;
    if !(miss <= 1e-8) {
        return Err(Error::NotInFiber(miss));
    }
    let e = &o0.frame;
    let einv = inverse(e)?;
    let left = &einv * inverse(v0)?;
    let right = v0 * e;
    let h = &p.generator;
    let rate = |t: f64| -> Vec<Complex64> {
        let m = &left * h(t) * &right;
        (0..d).map(|n| I * m[(n, n)]).collect()
    };
    let off = 3f64.sqrt() / 6.0;
    let mut integral = vec![Complex64::new(0.0, 0.0); d];
    let mut frames = Vec::with_capacity(p.grid.len());
    frames.push(v0.clone());
    for k in 1..p.grid.len() {
        let (a, b) = (p.grid[k - 1], p.grid[k]);
        let w1 = rate(a + (0.5 - off) * (b - a));
        let w2 = rate(a + (0.5 + off) * (b - a));
        for n in 0..d {
            integral[n] += (w1[n] + w2[n]) * (0.5 * (b - a));
        }
        frames.push(&p.backward[k] * v0 * frame_diag(e, &einv, &integral));
    }

    let gammas: Vec<CMat> = p.backward.iter().map(|b| b * v0).collect();
    let ode = gauge_ode_lift(&gammas, p.dt(), o0, &|a, b| canonical_connection(a, b, o0))?;
    let ode_agreement = frames.iter().zip(&ode).map(|(a, b)| op_norm(&(a - b))).fold(0.0, f64::max);

    let dframes = entrywise_derivative(&frames, p.dt());
    let mut connection_defect: f64 = 0.0;
    for (f, df) in frames.iter().zip(&dframes) {
        connection_defect = connection_defect.max(op_norm(&canonical_connection(f, df, o0)?));
    }
    Ok(Lift { grid: p.grid.clone(), frames, connection_defect, ode_agreement })
}

/// End point `Ṽ(τ)` of a lift over a cyclic evolution.
pub fn holonomy(lift: &Lift, c: &CyclicEvolution, o0: &Decomposition) -> Result<CMat> {
    let end = *lift.grid.last().ok_or_else(|| Error::NotCyclic("empty lift".into()))?;
    if (end - c.tau).abs() > 1e-9 * c.tau.max(1.0) {
        return Err(Error::NotCyclic(format!("lift ends at {end}, cycle period is {}", c.tau)));
    }
    let last = lift.frames.last().expect("grid and frames have equal length");
    let gap = hausdorff_distance(&o0.conjugated(last)?, &o0.conjugated(&lift.frames[0])?)?;
    if !(gap <= 1e-6) {
        return Err(Error::NotCyclic(format!("lift does not close (distance {gap:.3e})")));
    }
    Ok(last.clone())
}

/// `⟨e*ₙ|V₀⁻¹·Ṽ(τ)|eₙ⟩`, equal to `e^{iβₙ}`.
pub fn holonomy_phases(hol: &CMat, v0: &CMat, o0: &Decomposition) -> Result<Vec<Complex64>> {
    let m = inverse(&o0.frame)? * inverse(v0)? * hol * &o0.frame;
    Ok((0..m.nrows()).map(|n| m[(n, n)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{propagator, propagator_from};
    use crate::geophase::{
        bloch_observable, detect_cycle, geometric_phases, heisenberg_evolve, qubit_loop_hamiltonian, GaugeElem,
    };
    use crate::matkit::{c, cr, from_rows, identity};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frame(rng: &mut ChaCha8Rng, d: usize) -> CMat {
        loop {
            let f = CMat::from_fn(d, d, |i, j| {
                c(if i == j { 1.5 } else { 0.0 } + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            if crate::matkit::cond2(&f) < 20.0 {
                return f;
            }
        }
    }

    #[test]
    fn canonical_connection_examples() {
        let o = Decomposition::standard(2);
        let diag = from_rows(&[&[c(1.0, 2.0), cr(0.0)], &[cr(0.0), cr(-3.0)]]);
        assert!(op_norm(&(canonical_connection(&identity(2), &diag, &o).unwrap() - &diag)) < 1e-15);
        let off = from_rows(&[&[cr(0.0), cr(1.0)], &[c(0.0, 2.0), cr(0.0)]]);
        assert!(op_norm(&canonical_connection(&identity(2), &off, &o).unwrap()) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let o = Decomposition::from_frame(&random_frame(&mut rng, 3)).unwrap();
        let p = random_frame(&mut rng, 3);
        let alpha = [c(0.3, 1.0), cr(-2.0), c(0.0, 0.5)];
        let dual = o.dual();
        let q = (0..3).fold(CMat::zeros(3, 3), |acc, n| {
            acc + &p * o.frame.column(n) * dual.column(n).adjoint() * alpha[n]
        });
        let omega = canonical_connection(&p, &q, &o).unwrap();
        assert!(op_norm(&(&omega - inverse(&p).unwrap() * &q)) < 1e-12);
        for proj in &o.projectors {
            let qq = random_frame(&mut rng, 3);
            let w = canonical_connection(&p, &qq, &o).unwrap();
            assert!(op_norm(&(&w * proj - proj * &w)) < 1e-10);
        }
        let singular = from_rows(&[&[cr(1.0), cr(2.0)], &[cr(2.0), cr(4.0)]]);
        assert!(matches!(
            canonical_connection(&singular, &identity(2), &Decomposition::standard(2)),
            Err(Error::SingularFrame(_))
        ));
    }

    #[test]
    fn connection_is_gauge_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let o = Decomposition::from_frame(&random_frame(&mut rng, 3)).unwrap();
            let p = random_frame(&mut rng, 3);
            let q = random_frame(&mut rng, 3);
            let g = GaugeElem::random(&mut rng, 3).matrix(&o);
            let lhs = canonical_connection(&(&p * &g), &(&q * &g), &o).unwrap();
            let rhs = inverse(&g).unwrap() * canonical_connection(&p, &q, &o).unwrap() * &g;
            let err = op_norm(&(&lhs - &rhs));
            assert!(err < 1e-10, "{err} {}", op_norm(&rhs));
        }
    }

    #[test]
    fn trivial_and_vertical_lifts() {
        let o = Decomposition::standard(2);
        let p = propagator(|_| CMat::zeros(2, 2), 1.0, 50, 2).unwrap();
        let v0 = from_rows(&[&[cr(1.0), cr(0.5)], &[cr(0.2), cr(1.0)]]);
        let base = o.conjugated(&v0).unwrap();
        let lift = horizontal_lift(&p, &o, &base, &v0).unwrap();
        assert!(lift.frames.iter().all(|f| op_norm(&(f - &v0)) < 1e-15));

        let diag = from_rows(&[&[cr(0.7), cr(0.0)], &[cr(0.0), cr(-1.3)]]);
        let p = propagator(move |_| diag.clone(), 2.0, 200, 2).unwrap();
        let lift = horizontal_lift(&p, &o, &o, &identity(2)).unwrap();
        assert!(lift.frames.iter().all(|f| op_norm(&(f - identity(2))) < 1e-13));

        let wrong = from_rows(&[&[cr(1.0), cr(1.0)], &[cr(-1.0), cr(1.0)]]);
        assert!(matches!(horizontal_lift(&p, &o, &o, &wrong), Err(Error::NotInFiber(_))));
    }

    #[test]
    fn qubit_loop_holonomy_carries_phases() {
        let h = qubit_loop_hamiltonian(0.6).unwrap();
        let p = propagator(move |_| h.clone(), 4.0, 4000, 2).unwrap();
        let x0 = bloch_observable(0.4);
        let cyc = detect_cycle(&heisenberg_evolve(&x0, &p).unwrap(), &p, 1e-9).unwrap();
        let rep = geometric_phases(&cyc).unwrap();
        let o = Decomposition::standard(2);
        let v0 = cyc.x0_system.right.clone();
        let base = Decomposition::from_frame(&v0).unwrap();
        let lift = horizontal_lift(&cyc.propagator, &o, &base, &v0).unwrap();
        let dt = cyc.propagator.dt();
        assert!(lift.connection_defect <= 5.0 * dt * dt * 1.6f64.powi(3) + 1e-9, "{}", lift.connection_defect);
        assert!(lift.ode_agreement <= 1e-7, "{}", lift.ode_agreement);
        let hol = holonomy(&lift, &cyc, &o).unwrap();
        let phases = holonomy_phases(&hol, &v0, &o).unwrap();
        for n in 0..2 {
            assert!((phases[n] - rep.holonomy_diag[n]).norm() < 1e-8);
            // Ṽ(τ)|eₙ⟩ = e^{iβₙ}|ψₙ⟩
            let col = hol.column(n).into_owned();
            assert!((col - v0.column(n) * rep.holonomy_diag[n]).norm() < 1e-8);
        }

        let short = Lift { grid: lift.grid[..100].to_vec(), frames: lift.frames[..100].to_vec(), ..lift.clone() };
        assert!(matches!(holonomy(&short, &cyc, &o), Err(Error::NotCyclic(_))));
    }

    #[test]
    fn time_dependent_lift_constructions_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = random_frame(&mut rng, 3);
        let winv = inverse(&w).unwrap();
        let h = move |t: f64| {
            &w * CMat::from_diagonal(&CVec::from_vec(vec![cr(1.0 + 0.3 * t.sin()), cr(-0.5), cr(0.2 * t)])) * &winv
        };
        let p = propagator_from(std::sync::Arc::new(h), 2.0, 2000, 4).unwrap();
        let o = Decomposition::from_frame(&random_frame(&mut rng, 3)).unwrap();
        let v0 = random_frame(&mut rng, 3);
        let base = o.conjugated(&v0).unwrap();
        let lift = horizontal_lift(&p, &o, &base, &v0).unwrap();
        assert!(lift.ode_agreement < 1e-7, "{}", lift.ode_agreement);
        assert!(lift.connection_defect < 1e-7, "{}", lift.connection_defect);
    }
}
