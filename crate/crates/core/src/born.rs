//! Expectations and probabilities in a metric measurement context.

use num_complex::Complex64;

use crate::matkit::{cr, hermiticity_defect, op_norm, CMat, CVec, EigSystem};
use crate::paraops::{is_metric_for, metric_from_eigensystem, MetricOp};
use crate::{Error, Result, Tolerances};

#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    /// `Σ λₙ pₙ`
    pub expectation: Complex64,
    pub probabilities: Vec<f64>,
    /// The metric `G = Σ |e*ₙ⟩⟨e*ₙ|` that defines the context.
    pub context: MetricOp,
    pub basis_labels: Vec<Complex64>,
}

fn check_state(psi: &CVec, d: usize) -> Result<f64> {
    if psi.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: psi.len() });
    }
    let n2 = psi.norm_squared();
    if n2 == 0.0 {
        return Err(Error::ZeroState);
    }
    Ok(n2)
}

/// `⟨ψ, G^{1/2} A G^{-1/2} ψ⟩ / ‖ψ‖²`
pub fn expect(a: &CMat, g: &MetricOp, psi: &CVec) -> Result<Complex64> {
    let n2 = check_state(psi, a.nrows())?;
    if g.dim() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: g.dim() });
    }
    let m = &g.sqrt * a * &g.inv_sqrt;
    Ok(psi.dotc(&(m * psi)) / n2)
}

/// The usual Born rule `⟨ψ, Aψ⟩ / ‖ψ‖²`; not a physical expectation for
/// non-Hermitian `A`.
pub fn naive_expect(a: &CMat, psi: &CVec) -> Result<Complex64> {
    let n2 = check_state(psi, a.nrows())?;
    Ok(psi.dotc(&(a * psi)) / n2)
}

/// Discrete Born rule `pₙ = |⟨e*ₙ, G^{-1/2}ψ⟩|² / ‖ψ‖²` with `G = Σ|e*ₙ⟩⟨e*ₙ|`.
pub fn expect_discrete(sys: &EigSystem, psi: &CVec) -> Result<MeasurementOutcome> {
    let d = sys.dim();
    let n2 = check_state(psi, d)?;
    let tols = Tolerances::default();
    let rho = sys.eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let max_imag = sys.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_imag > tols.spec * rho {
        return Err(Error::ComplexSpectrum(max_imag));
    }
    let context = metric_from_eigensystem(sys)?;

    // With W the dual frame, W = G^{1/2}Q and the amplitudes are Q†ψ.
    let svd = sys.left.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let amplitudes = v_t.adjoint() * (u.adjoint() * psi);
    let mut probabilities: Vec<f64> = amplitudes.iter().map(|a| a.norm_sqr() / n2).collect();

    let total: f64 = probabilities.iter().sum();
    let deficit = (total - 1.0).abs();
    if deficit > 1e-10 {
        return Err(Error::NumericalFailure(format!("probabilities sum to {total}")));
    }
    for p in probabilities.iter_mut() {
        *p = p.max(0.0) / total;
    }
    let expectation = sys
        .eigenvalues
        .iter()
        .zip(&probabilities)
        .map(|(l, p)| cr(l.re * p))
        .sum();
    Ok(MeasurementOutcome {
        expectation,
        probabilities,
        context,
        basis_labels: sys.eigenvalues.clone(),
    })
}

/// `⟨ψ̃, Tψ⟩ / ⟨ψ̃, ψ⟩` with `ψ̃ = Σ ⟨e*ₙ, ψ⟩ e*ₙ` in the frame of `sys`.
pub fn biorthogonal_expect(t: &CMat, sys: &EigSystem, psi: &CVec) -> Result<Complex64> {
    check_state(psi, sys.dim())?;
    if t.nrows() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: t.nrows() });
    }
    let coeffs = sys.left.adjoint() * psi;
    let tilde = &sys.left * coeffs;
    let overlap = tilde.dotc(psi);
    if overlap.norm() <= 1e-12 * tilde.norm() * psi.norm() {
        return Err(Error::DegenerateOverlap);
    }
    Ok(tilde.dotc(&(t * psi)) / overlap)
}

/// For Hermitian `A` and a metric `G` of `A`: whether the metric expectation
/// equals the usual one within `tol`.
pub fn hermitian_consistency(a: &CMat, g: &MetricOp, psi: &CVec, tol: f64) -> Result<bool> {
    let tols = Tolerances::default();
    let norm = op_norm(a);
    let defect = hermiticity_defect(a);
    if defect > tols.herm * norm {
        return Err(Error::NotHermitian(defect / norm.max(f64::MIN_POSITIVE)));
    }
    if !is_metric_for(g, a, tols.herm) {
        return Err(Error::NotAMetric);
    }
    let lhs = expect(a, g, psi)?;
    let rhs = naive_expect(a, psi)?;
    Ok((lhs - rhs).norm() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::{c, cvec, eig_general, from_rows, identity, I};
    use crate::paraops::deformed_pauli;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bloch(theta: f64, phi: f64) -> CVec {
        cvec(&[cr((theta / 2.0).cos()), Complex64::from_polar((theta / 2.0).sin(), phi)])
    }

    fn random_state(rng: &mut ChaCha8Rng, d: usize) -> CVec {
        CVec::from_fn(d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_frame(rng: &mut ChaCha8Rng, d: usize) -> CMat {
        CMat::from_fn(d, d, |i, j| {
            c(if i == j { 1.5 } else { 0.0 } + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn metric_vs_naive_on_two_by_two() {
        let a = from_rows(&[&[cr(0.0), cr(1.0)], &[cr(4.0), cr(0.0)]]);
        let g = MetricOp::new(&from_rows(&[&[cr(1.0), cr(0.0)], &[cr(0.0), cr(0.25)]])).unwrap();
        let psi = cvec(&[cr(1.0), -I]) / cr(2f64.sqrt());
        assert!(expect(&a, &g, &psi).unwrap().norm() < 1e-15);
        assert!((naive_expect(&a, &psi).unwrap() - c(0.0, 1.5)).norm() < 1e-15);
    }

    #[test]
    fn zero_state_rejected() {
        let g = MetricOp::identity(2);
        let z = CVec::zeros(2);
        assert_eq!(expect(&identity(2), &g, &z), Err(Error::ZeroState));
        let sys = eig_general(&identity(2), 1e-10).unwrap();
        assert!(matches!(expect_discrete(&sys, &z), Err(Error::ZeroState)));
    }

    #[test]
    fn deformed_pauli_bloch_expectations() {
        for omega in [-0.8, 0.0, 0.5] {
            let (x, y, z) = deformed_pauli(omega).unwrap();
            let sz = eig_general(&z, 1e-12).unwrap();
            let g = metric_from_eigensystem(&sz).unwrap();
            for (theta, phi) in [(0.3, 1.2), (2.0, -0.4), (1.0, 3.0)] {
                let psi = bloch(theta, phi);
                assert!((expect(&z, &g, &psi).unwrap() - cr(theta.cos())).norm() < 1e-12);
                let want_x = theta.sin() * phi.cos();
                assert!((expect(&x, &g, &psi).unwrap() - cr(want_x)).norm() < 1e-12);
                let out = expect_discrete(&sz, &psi).unwrap();
                assert!((out.expectation - cr(theta.cos())).norm() < 1e-12);
                let sy = eig_general(&y, 1e-12).unwrap();
                let gy = metric_from_eigensystem(&sy).unwrap();
                assert!(hermitian_consistency(&y, &gy, &psi, 1e-12).unwrap());
                assert!((expect(&y, &gy, &psi).unwrap() - cr(theta.sin() * phi.sin())).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn discrete_path_on_orthonormal_eigenbasis() {
        let a = CMat::from_diagonal(&cvec(&[cr(-1.0), cr(0.5), cr(2.0)]));
        let sys = eig_general(&a, 1e-12).unwrap();
        let out = expect_discrete(&sys, &cvec(&[cr(3.0), cr(0.0), cr(0.0)])).unwrap();
        assert_eq!(out.probabilities, vec![1.0, 0.0, 0.0]);
        assert_eq!(out.expectation, cr(-1.0));
        assert_eq!(out.basis_labels, sys.eigenvalues);
    }

    #[test]
    fn complex_spectrum_refused_by_discrete_path() {
        let a = CMat::from_diagonal(&cvec(&[c(0.0, 1.0), cr(2.0)]));
        let sys = eig_general(&a, 1e-12).unwrap();
        assert!(matches!(expect_discrete(&sys, &cvec(&[cr(1.0), cr(1.0)])), Err(Error::ComplexSpectrum(_))));
    }

    #[test]
    fn hermitian_consistency_checks() {
        let z = CMat::from_diagonal(&cvec(&[cr(1.0), cr(-1.0)]));
        let g = MetricOp::new(&CMat::from_diagonal(&cvec(&[cr(2.0), cr(3.0)]))).unwrap();
        assert!(hermitian_consistency(&z, &g, &bloch(1.1, 0.2), 1e-12).unwrap());
        let (x, _, _) = deformed_pauli(0.4).unwrap();
        assert!(matches!(hermitian_consistency(&x, &g, &bloch(1.1, 0.2), 1e-12), Err(Error::NotHermitian(_))));
        let sx = from_rows(&[&[cr(0.0), cr(1.0)], &[cr(1.0), cr(0.0)]]);
        assert_eq!(hermitian_consistency(&sx, &g, &bloch(1.1, 0.2), 1e-12), Err(Error::NotAMetric));
    }

    #[test]
    fn biorthogonal_expect_in_own_eigenbasis_is_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (x, _, _) = deformed_pauli(0.7).unwrap();
        let sys = eig_general(&x, 1e-12).unwrap();
        for _ in 0..50 {
            let psi = random_state(&mut rng, 2);
            assert!(biorthogonal_expect(&x, &sys, &psi).unwrap().im.abs() < 1e-10);
        }
        // orthonormal frame reduces to the usual expectation
        let h = from_rows(&[&[cr(1.0), c(0.2, 0.3)], &[c(0.2, -0.3), cr(-0.4)]]);
        let sys = eig_general(&identity(2), 1e-12).unwrap();
        let psi = random_state(&mut rng, 2);
        let want = naive_expect(&h, &psi).unwrap();
        assert!((biorthogonal_expect(&h, &sys, &psi).unwrap() - want).norm() < 1e-14);
    }

    proptest! {
        #[test]
        fn probabilities_normalized(seed in 0u64..2000, d in 1usize..17) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = random_frame(&mut rng, d);
            let labels: Vec<Complex64> = (0..d).map(|k| cr(k as f64 + rng.random_range(0.0..0.5))).collect();
            let sys = EigSystem::from_parts(labels, v).unwrap();
            let psi = random_state(&mut rng, d);
            let out = expect_discrete(&sys, &psi).unwrap();
            let total: f64 = out.probabilities.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
            prop_assert!(out.probabilities.iter().all(|&p| p >= 0.0));
            let lo = out.basis_labels.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            let hi = out.basis_labels.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(out.expectation.re >= lo - 1e-12 && out.expectation.re <= hi + 1e-12);
            let t = sys.reconstruct();
            let cont = expect(&t, &out.context, &psi).unwrap();
            prop_assert!((cont - out.expectation).norm() < 1e-9 * sys.frame_condition.powi(2));
        }

        #[test]
        fn metric_expectation_is_real_and_scalar_free(seed in 0u64..2000, d in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = random_frame(&mut rng, d);
            let labels: Vec<Complex64> = (0..d).map(|_| cr(rng.random_range(-2.0..2.0))).collect();
            let sys = EigSystem::from_parts(labels, v).unwrap();
            let a = sys.reconstruct();
            let g = metric_from_eigensystem(&sys).unwrap();
            let psi = random_state(&mut rng, d);
            let e = expect(&a, &g, &psi).unwrap();
            prop_assert!(e.im.abs() <= 1e-9 * op_norm(&a));
            let alpha = Complex64::from_polar(rng.random_range(0.1..10.0), rng.random_range(-3.0..3.0));
            let e2 = expect(&a, &g, &(&psi * alpha)).unwrap();
            prop_assert!((e - e2).norm() < 1e-12 * op_norm(&a).max(1.0));
        }

        #[test]
        fn biorthogonal_matches_metric_route(seed in 0u64..2000, d in 1usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = random_frame(&mut rng, d);
            let sys = EigSystem::from_parts(vec![cr(0.0); d], v).unwrap();
            let f = CMat::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let f = &f + f.adjoint();
            let t = &sys.right * f * sys.left.adjoint();
            let psi = random_state(&mut rng, d);
            let g = metric_from_eigensystem(&sys).unwrap();
            let lhs = biorthogonal_expect(&t, &sys, &psi).unwrap();
            let rhs = expect(&t, &g, &(&g.sqrt * &psi)).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-9 * op_norm(&t).max(1.0));
            prop_assert!(lhs.im.abs() < 1e-9 * op_norm(&t).max(1.0));
        }
    }
}
