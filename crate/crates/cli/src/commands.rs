use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nhqm_core::born::{expect as metric_expect, naive_expect};
use nhqm_core::evolve::{brachistochrone_sweep, evolve_state, para_hermitian_system, propagator};
use nhqm_core::geophase::{
    bloch_observable, detect_cycle_with, geometric_phases, heisenberg_evolve, holonomy, holonomy_phases,
    horizontal_lift, invariance_suite, qubit_loop_hamiltonian, Decomposition,
};
use nhqm_core::matkit::io::{load_matrix, load_vector, matrix_to_json};
use nhqm_core::paraops::{classify_with, deformed_pauli, metric_from_eigensystem, two_level_hamiltonian, Kind, MetricOp};
use nhqm_core::{CMat, Error, Tolerances};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::failure::Failure;
use crate::grid;

const CONVENTION: &str = "U(t) = exp(-itH), hbar = 1";

/// Tolerance used when no `--tol` is given; `NHQM_DEFAULT_TOL` overrides it.
pub fn default_tol() -> Result<f64, Failure> {
    match std::env::var("NHQM_DEFAULT_TOL") {
        Err(_) => Ok(1e-9),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
            _ => Err(Failure::Config(format!("NHQM_DEFAULT_TOL must be a positive number, got '{s}'"))),
        },
    }
}

fn tolerances(tol: f64) -> Result<Tolerances, Failure> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::Config(format!("tolerance must be positive, got {tol}")));
    }
    Ok(Tolerances { herm: tol, spec: tol, ..Tolerances::default() })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n"))?,
        None => writeln!(std::io::stdout().lock(), "{text}")?,
    }
    Ok(())
}

fn require(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Io(format!("no such file: {}", path.display())))
    }
}

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn pairs(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().map(|&z| pair(z)).collect())
}

fn csv_out(out: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>, Failure> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

pub fn make_pauli(omega: f64, which: usize, out: Option<&Path>) -> Result<(), Failure> {
    let (x, y, z) = deformed_pauli(omega)?;
    emit(out, &matrix_to_json([&x, &y, &z][which]))
}

pub fn make_twolevel(r: f64, theta: f64, gamma: f64, out: Option<&Path>) -> Result<(), Failure> {
    let tl = two_level_hamiltonian(r, theta, gamma);
    if tl.broken {
        eprintln!("note: parameters are in the broken regime (complex spectrum)");
    }
    emit(out, &matrix_to_json(&tl.matrix))
}

pub fn classify(input: &Path, tol: f64, out: Option<&Path>) -> Result<(), Failure> {
    require(input)?;
    let t = load_matrix(input)?;
    let cl = classify_with(&t, &tolerances(tol)?)?;
    let report = json!({
        "kind": cl.kind.name(),
        "spectrum": pairs(&cl.spectrum),
        "diagnostics": cl.diagnostics,
        "witness_metric": cl.witness_metric.as_ref().map(|g| serde_json::from_str::<Value>(&matrix_to_json(&g.g)).expect("valid json")),
    });
    emit(out, &report.to_string())?;
    if cl.kind == Kind::NonDiagonalizable {
        let kappa = cl.diagnostics.get("kappa").copied().unwrap_or(f64::INFINITY);
        return Err(Failure::Domain(Error::NonDiagonalizable { kappa, kappa_max: Tolerances::default().kappa_max }));
    }
    Ok(())
}

pub fn expect(obs: &Path, metric: &str, state: &Path, csv: bool, tol: f64, out: Option<&Path>) -> Result<(), Failure> {
    require(obs)?;
    require(state)?;
    let metric_path = match metric {
        "auto" | "identity" => None,
        p => {
            let p = PathBuf::from(p);
            require(&p)?;
            Some(p)
        }
    };
    let a = load_matrix(obs)?;
    let psi = load_vector(state)?;
    let g = match (metric, metric_path) {
        (_, Some(p)) => MetricOp::new(&load_matrix(&p)?)?,
        ("identity", None) => MetricOp::identity(a.nrows()),
        _ => metric_from_eigensystem(&para_hermitian_system(&a, &tolerances(tol)?)?)?,
    };
    let e = metric_expect(&a, &g, &psi)?;
    let n = naive_expect(&a, &psi)?;
    if csv {
        let mut w = csv_out(out)?;
        w.write_record(["expectation_re", "expectation_im", "naive_re", "naive_im"])?;
        w.write_record([e.re, e.im, n.re, n.im].map(|x| x.to_string()))?;
        w.flush()?;
        Ok(())
    } else {
        emit(out, &json!({ "expectation": pair(e), "naive": pair(n) }).to_string())
    }
}

fn check_steps(steps: usize) -> Result<(), Failure> {
    if steps == 0 {
        return Err(Failure::Config("--steps must be at least 1".into()));
    }
    Ok(())
}

pub fn evolve(ham: &Path, t: f64, steps: usize, state: &Path, order: u8, out: Option<&Path>) -> Result<(), Failure> {
    require(ham)?;
    require(state)?;
    check_steps(steps)?;
    let h = load_matrix(ham)?;
    let psi0 = load_vector(state)?;
    let p = propagator(move |_| h.clone(), t, steps, order)?;
    let traj = evolve_state(&p, &psi0)?;
    let mut w = csv_out(out)?;
    let mut header = vec!["t".to_string()];
    for i in 0..psi0.len() {
        header.push(format!("re_{i}"));
        header.push(format!("im_{i}"));
    }
    header.push("norm".into());
    w.write_record(&header)?;
    for (tk, psi) in p.grid.iter().zip(&traj) {
        let mut row = vec![tk.to_string()];
        for z in psi.iter() {
            row.push(z.re.to_string());
            row.push(z.im.to_string());
        }
        row.push(psi.norm().to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn brachistochrone(r: f64, theta: f64, gamma: f64, sweep: Option<&str>, out: Option<&Path>) -> Result<(), Failure> {
    let points: Vec<(f64, f64, f64)> = match sweep {
        None => vec![(r, theta, gamma)],
        Some(spec) => grid::points(&grid::parse(spec, &["r", "theta", "gamma"])?)
            .into_iter()
            .map(|p| {
                let mut q = (r, theta, gamma);
                for (name, v) in p {
                    match name.as_str() {
                        "r" => q.0 = v,
                        "theta" => q.1 = v,
                        _ => q.2 = v,
                    }
                }
                q
            })
            .collect(),
    };
    let results = brachistochrone_sweep(&points).into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut w = csv_out(out)?;
    w.write_record(["r", "theta", "gamma", "omega", "phi", "t_analytic", "t_simulated", "hermitian_bound"])?;
    for b in results {
        w.write_record(
            [b.r, b.theta, b.gamma, b.omega, b.phi, b.t_transfer, b.t_simulated, b.hermitian_bound].map(|x| x.to_string()),
        )?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone)]
pub struct PhaseOpts {
    pub ham: Option<PathBuf>,
    pub builder: Option<String>,
    pub x0: Option<PathBuf>,
    pub bloch_phi: Option<f64>,
    pub horizon: f64,
    pub steps: usize,
    pub order: u8,
    pub tol: f64,
    pub trials: usize,
    pub seed: u64,
}

/// `name:key=value,key=value`
fn parse_builder(spec: &str) -> Result<(String, Vec<(String, f64)>), Failure> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut params = Vec::new();
    for kv in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| Failure::Parse(format!("builder parameter '{kv}' is not key=value")))?;
        let v: f64 = v.trim().parse().map_err(|_| Failure::Parse(format!("builder parameter '{kv}' is not numeric")))?;
        params.push((k.trim().to_string(), v));
    }
    Ok((name.trim().to_string(), params))
}

fn build_hamiltonian(spec: &str, omega_override: Option<f64>) -> Result<CMat, Failure> {
    let (name, params) = parse_builder(spec)?;
    let get = |key: &str, default: f64| params.iter().rev().find(|(k, _)| k == key).map_or(default, |p| p.1);
    match name.as_str() {
        "minus-sigma-z" => Ok(qubit_loop_hamiltonian(omega_override.unwrap_or(get("omega", 0.0)))?),
        "twolevel" => Ok(two_level_hamiltonian(get("r", 0.0), get("theta", 0.0), get("gamma", 1.0)).matrix),
        other => Err(Failure::Parse(format!("unknown builder '{other}', expected minus-sigma-z or twolevel"))),
    }
}

fn phase_inputs(opts: &PhaseOpts, omega: Option<f64>, phi: Option<f64>) -> Result<(CMat, CMat), Failure> {
    let h = match (&opts.ham, &opts.builder) {
        (Some(p), None) => {
            require(p)?;
            load_matrix(p)?
        }
        (None, Some(b)) => build_hamiltonian(b, omega)?,
        _ => return Err(Failure::Config("give exactly one of --ham or --builder".into())),
    };
    let x0 = match (&opts.x0, phi.or(opts.bloch_phi)) {
        (Some(p), None) => {
            require(p)?;
            load_matrix(p)?
        }
        (None, Some(phi)) => bloch_observable(phi),
        _ => return Err(Failure::Config("give exactly one of --x0 or --bloch-phi".into())),
    };
    Ok((h, x0))
}

struct PhaseRun {
    tau: f64,
    report: nhqm_core::geophase::PhaseReport,
    lift_diag: Vec<Complex64>,
    connection_defect: f64,
    ode_agreement: f64,
    invariance: Option<nhqm_core::geophase::InvarianceReport>,
}

fn run_phase(opts: &PhaseOpts, h: CMat, x0: &CMat) -> Result<PhaseRun, Failure> {
    check_steps(opts.steps)?;
    let tols = tolerances(opts.tol)?;
    let p = propagator(move |_| h.clone(), opts.horizon, opts.steps, opts.order)?;
    let traj = heisenberg_evolve(x0, &p)?;
    let cycle = detect_cycle_with(&traj, &p, opts.tol, &tols)?;
    let report = geometric_phases(&cycle)?;
    let o0 = Decomposition::standard(cycle.dim());
    let v0 = cycle.x0_system.right.clone();
    let base = Decomposition::from_frame(&v0)?;
    let lift = horizontal_lift(&cycle.propagator, &o0, &base, &v0)?;
    let hol = holonomy(&lift, &cycle, &o0)?;
    let lift_diag = holonomy_phases(&hol, &v0, &o0)?;
    let invariance = if opts.trials > 0 { Some(invariance_suite(&cycle, opts.trials, opts.seed)?) } else { None };
    Ok(PhaseRun {
        tau: cycle.tau,
        report,
        lift_diag,
        connection_defect: lift.connection_defect,
        ode_agreement: lift.ode_agreement,
        invariance,
    })
}

pub fn phase(opts: &PhaseOpts, out: Option<&Path>) -> Result<(), Failure> {
    let (h, x0) = phase_inputs(opts, None, None)?;
    let run = run_phase(opts, h, &x0)?;
    let doc = json!({
        "convention": CONVENTION,
        "tau": run.tau,
        "theta": pairs(&run.report.theta),
        "dynamical": pairs(&run.report.dynamical),
        "beta": pairs(&run.report.beta),
        "windings": run.report.branch_windings,
        "holonomy_diag": pairs(&run.lift_diag),
        "lift": { "connection_defect": run.connection_defect, "ode_agreement": run.ode_agreement },
        "invariance": run.invariance,
    });
    emit(out, &serde_json::to_string_pretty(&doc).expect("serializable"))
}

pub fn phase_sweep(opts: &PhaseOpts, spec: &str, out: Option<&Path>) -> Result<(), Failure> {
    let points = grid::points(&grid::parse(spec, &["omega", "phi"])?);
    let rows: Vec<Result<Vec<String>, Failure>> = points
        .par_iter()
        .map(|p| {
            let omega = p.iter().find(|(n, _)| n == "omega").map(|q| q.1);
            let phi = p.iter().find(|(n, _)| n == "phi").map(|q| q.1);
            let fixed_omega = match opts.builder.as_deref().map(parse_builder).transpose()? {
                Some((name, params)) if name == "minus-sigma-z" => {
                    Some(params.iter().rev().find(|(k, _)| k == "omega").map_or(0.0, |p| p.1))
                }
                _ if omega.is_some() => {
                    return Err(Failure::Config("an omega sweep needs --builder minus-sigma-z".into()))
                }
                _ => None,
            };
            let (h, x0) = phase_inputs(opts, omega, phi)?;
            let run = run_phase(&PhaseOpts { trials: 0, ..opts.clone() }, h, &x0)?;
            let mut row = vec![
                omega.or(fixed_omega).map_or(String::new(), |v| v.to_string()),
                phi.or(opts.bloch_phi).map_or(String::new(), |v| v.to_string()),
                run.tau.to_string(),
            ];
            for b in &run.report.beta {
                row.push(b.re.to_string());
                row.push(b.im.to_string());
            }
            Ok(row)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let d = rows.first().map_or(2, |r| (r.len() - 3) / 2);
    let mut w = csv_out(out)?;
    let mut header = vec!["omega".to_string(), "phi".into(), "tau".into()];
    for n in 0..d {
        header.push(format!("beta_{n}_re"));
        header.push(format!("beta_{n}_im"));
    }
    w.write_record(&header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
