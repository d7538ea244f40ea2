//! Published worked examples, re-derived and checked at their stated values.

use std::f64::consts::PI;

use nhqm_core::born::{expect, naive_expect};
use nhqm_core::evolve::{brachistochrone, propagator};
use nhqm_core::geophase::{bloch_observable, detect_cycle, geometric_phases, heisenberg_evolve, qubit_loop_hamiltonian};
use nhqm_core::matkit::{eig_general, from_rows, op_norm, CVec, I};
use nhqm_core::paraops::{
    classify, deformed_pauli, hermitianize, metric_from_eigensystem, two_level_hamiltonian, Kind, MetricOp,
};
use nhqm_core::CMat;
use num_complex::Complex64;

use crate::failure::Failure;

type Check = (&'static str, fn() -> Result<(bool, String), nhqm_core::Error>);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn born_example() -> Result<(bool, String), nhqm_core::Error> {
    let a = from_rows(&[&[re(0.0), re(1.0)], &[re(4.0), re(0.0)]]);
    let g = MetricOp::new(&from_rows(&[&[re(1.0), re(0.0)], &[re(0.0), re(0.25)]]))?;
    let psi = CVec::from_vec(vec![re(1.0), -I]) / re(2f64.sqrt());
    let e = expect(&a, &g, &psi)?;
    let n = naive_expect(&a, &psi)?;
    let h = hermitianize(&a, &g);
    let ok = e.norm() < 1e-12 && (n - Complex64::new(0.0, 1.5)).norm() < 1e-12 && h == from_rows(&[&[re(0.0), re(2.0)], &[re(2.0), re(0.0)]]);
    Ok((ok, format!("<A>_G = {:.1e}, <A> = {}i", e.norm(), n.im)))
}

fn pauli_algebra() -> Result<(bool, String), nhqm_core::Error> {
    let mut worst: f64 = 0.0;
    for omega in [-1.2, -0.5, 0.0, 0.3, 1.0] {
        let (x, y, z) = deformed_pauli(omega)?;
        worst = worst.max(op_norm(&(&x * &y - &z * I))).max(op_norm(&(&y * &z - &x * I))).max(op_norm(&(&z * &x - &y * I)));
    }
    Ok((worst < 1e-12, format!("max commutation defect {worst:.1e}")))
}

fn pauli_expectations() -> Result<(bool, String), nhqm_core::Error> {
    let (x, y, z) = deformed_pauli(0.7)?;
    let g = metric_from_eigensystem(&eig_general(&z, 1e-12)?)?;
    let mut worst: f64 = 0.0;
    for (theta, phi) in [(0.4f64, 1.0f64), (1.9, -2.2), (2.8, 0.3)] {
        let psi = CVec::from_vec(vec![re((theta / 2.0).cos()), Complex64::from_polar((theta / 2.0).sin(), phi)]);
        let (st, ct) = f64::sin_cos(theta);
        worst = worst
            .max((expect(&z, &g, &psi)? - re(ct)).norm())
            .max((expect(&x, &g, &psi)? - re(st * phi.cos())).norm())
            .max((expect(&y, &g, &psi)? - re(st * phi.sin())).norm());
    }
    Ok((worst < 1e-10, format!("max Bloch deviation {worst:.1e}")))
}

fn deformed_metric_root() -> Result<(bool, String), nhqm_core::Error> {
    let omega: f64 = 0.3;
    let (_, _, z) = deformed_pauli(omega)?;
    let g = metric_from_eigensystem(&eig_general(&z, 1e-12)?)?;
    let (s, c) = omega.sin_cos();
    let a = from_rows(&[&[re(1.0), I], &[-I, re(1.0)]]);
    let b = from_rows(&[&[re(1.0), -I], &[I, re(1.0)]]);
    let printed: CMat = a * re((1.0 + s).sqrt() / (2.0 * c)) + b * re((1.0 - s).sqrt() / (2.0 * c));
    let err = op_norm(&(&g.sqrt - printed));
    Ok((err < 1e-12, format!("|G^1/2 - printed| {err:.1e}")))
}

fn two_level_spectrum() -> Result<(bool, String), nhqm_core::Error> {
    let (r, theta, gamma): (f64, f64, f64) = (0.6, 1.1, 1.0);
    let tl = two_level_hamiltonian(r, theta, gamma);
    let ev = eig_general(&tl.matrix, 1e-12)?.eigenvalues;
    let root = (gamma * gamma - r * r * theta.sin().powi(2)).sqrt();
    let err = (ev[0] - re(r * theta.cos() - root)).norm().max((ev[1] - re(r * theta.cos() + root)).norm());
    Ok((err < 1e-12, format!("eigenvalue error {err:.1e}")))
}

fn transfer_times() -> Result<(bool, String), nhqm_core::Error> {
    let herm = brachistochrone(0.0, 0.0, 1.0)?;
    let fast = brachistochrone(0.9, -PI / 2.0, 1.0)?;
    let ok = (herm.t_simulated - PI / 2.0).abs() < 1e-9
        && (fast.t_simulated - fast.t_transfer).abs() < 1e-6
        && fast.t_transfer < fast.hermitian_bound;
    Ok((ok, format!("hermitian {:.9}, r=0.9: {:.6} < {:.6}", herm.t_simulated, fast.t_transfer, fast.hermitian_bound)))
}

fn metric_dependence() -> Result<(bool, String), nhqm_core::Error> {
    let d = 0.25;
    let a = from_rows(&[&[re(0.5 * (1.0 + d)), re(0.5 * (d - 1.0))], &[re(0.5 * (1.0 - d)), re(-0.5 * (1.0 + d))]]);
    let off = re(1.0 - 1.0 / d);
    let g = |rp: f64, rm: f64| {
        MetricOp::new(&(from_rows(&[&[re(9.0), off], &[off, re(1.0)]]) * re(rp) + from_rows(&[&[re(1.0), off], &[off, re(9.0)]]) * re(rm)))
    };
    let zero = CVec::from_vec(vec![re(1.0), re(0.0)]);
    let e1 = expect(&a, &g(1.0, 1.0)?, &zero)?;
    let e2 = expect(&a, &g(4.0, 1.0)?, &zero)?;
    let ok = (e1 - re(0.5)).norm() < 1e-12 && (e2 - re(20.0 / 41.0)).norm() < 1e-12;
    Ok((ok, format!("{:.12} vs {:.12}", e1.re, e2.re)))
}

fn classification() -> Result<(bool, String), nhqm_core::Error> {
    let (x, _, _) = deformed_pauli(0.4)?;
    let k = classify(&x, 1e-9)?.kind;
    Ok((k == Kind::ParaHermitianNonHermitian, k.name().to_string()))
}

fn qubit_phases() -> Result<(bool, String), nhqm_core::Error> {
    let (omega, phi): (f64, f64) = (0.3, 0.7);
    let h = qubit_loop_hamiltonian(omega)?;
    let p = propagator(move |_| h.clone(), 4.0, 8000, 2)?;
    let cycle = detect_cycle(&heisenberg_evolve(&bloch_observable(phi), &p)?, &p, 1e-9)?;
    let rep = geometric_phases(&cycle)?;
    let r = phi.cos() / omega.cos();
    let s = omega.sin() * phi.sin() / omega.cos();
    let expected = [Complex64::new(PI * (1.0 + r), PI * s), Complex64::new(PI * (1.0 - r), -PI * s)];
    let dist = |a: Complex64, b: Complex64| {
        let d = a - b;
        Complex64::new((d.re + PI).rem_euclid(2.0 * PI) - PI, d.im).norm()
    };
    let err = dist(rep.beta[0], expected[1]).max(dist(rep.beta[1], expected[0]))
        .min(dist(rep.beta[0], expected[0]).max(dist(rep.beta[1], expected[1])));
    let ok = (cycle.tau - PI).abs() < 1e-8 && err < 1e-6;
    Ok((ok, format!("tau {:.10}, beta error {err:.1e}", cycle.tau)))
}

const CHECKS: &[Check] = &[
    ("metric Born rule 2x2", born_example),
    ("deformed Pauli commutation", pauli_algebra),
    ("deformed Pauli Bloch expectations", pauli_expectations),
    ("deformed metric square root", deformed_metric_root),
    ("two-level spectrum", two_level_spectrum),
    ("brachistochrone transfer times", transfer_times),
    ("metric dependence of expectations", metric_dependence),
    ("deformed sigma_x classification", classification),
    ("qubit loop geometric phases", qubit_phases),
];

pub fn run(suite: &str) -> Result<(), Failure> {
    if suite != "paper" {
        return Err(Failure::Config(format!("unknown suite '{suite}', expected 'paper'")));
    }
    let mut failed = 0;
    for (name, check) in CHECKS {
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error {}: {e}", e.code())),
        };
        failed += usize::from(!ok);
        println!("{name:<36} {}  {detail}", if ok { "PASS" } else { "FAIL" });
    }
    println!("{} passed, {failed} failed", CHECKS.len() - failed);
    if failed > 0 {
        return Err(Failure::Verification(failed));
    }
    Ok(())
}
