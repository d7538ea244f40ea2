use nhqm_core::matkit::io::IoError;
use nhqm_core::Error;
use serde_json::{json, Value};

/// Anything that ends a run early. Domain errors exit 2, everything else 1.
#[derive(Debug)]
pub enum Failure {
    Domain(Error),
    Io(String),
    Parse(String),
    Grid(String),
    Config(String),
    Verification(usize),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Domain(_) | Failure::Verification(_) => 2,
            _ => 1,
        }
    }

    pub fn envelope(&self) -> Value {
        let (code, message, diagnostics) = match self {
            Failure::Domain(e) => (e.code().to_string(), e.to_string(), diagnostics(e)),
            Failure::Io(m) => ("IoError".into(), m.clone(), json!({})),
            Failure::Parse(m) => ("ParseError".into(), m.clone(), json!({})),
            Failure::Grid(m) => ("GridParseError".into(), m.clone(), json!({})),
            Failure::Config(m) => ("InvalidArgument".into(), m.clone(), json!({})),
            Failure::Verification(n) => {
                ("VerificationFailed".into(), format!("{n} check(s) failed"), json!({ "failed": n }))
            }
        };
        json!({ "code": code, "message": message, "diagnostics": diagnostics })
    }
}

fn diagnostics(e: &Error) -> Value {
    match e {
        Error::NonDiagonalizable { kappa, kappa_max } => json!({ "kappa": kappa, "kappa_max": kappa_max }),
        Error::DimensionMismatch { expected, found } => json!({ "expected": expected, "found": found }),
        Error::DimensionOverflow(dim, cap) => json!({ "dim": dim, "cap": cap }),
        Error::DegenerateSpectrum { gap, tol } => json!({ "gap": gap, "tol": tol }),
        Error::BadGauge { index, defect } => json!({ "index": index, "defect": defect }),
        Error::SingularFrame(v)
        | Error::NotHermitian(v)
        | Error::NotPositiveDefinite(v)
        | Error::SingularEta(v)
        | Error::ComplexSpectrum(v)
        | Error::NoCycleFound(v)
        | Error::NotInFiber(v) => json!({ "value": v }),
        _ => json!({}),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Io(e) => Failure::Io(e.to_string()),
            IoError::Json(e) => Failure::Parse(e.to_string()),
            IoError::Invalid(e) => Failure::Parse(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}
