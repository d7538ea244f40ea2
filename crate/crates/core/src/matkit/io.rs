//! JSON wire format for operators and states.
//!
//! Matrices are `{"dim": d, "data": [[re, im], ...]}` with `d²` entries in
//! row-major order; vectors use the same shape with `d` entries. Floats are
//! written in shortest round-trip form, so save/load is lossless.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CMat, CVec};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Wire {
    dim: usize,
    data: Vec<[f64; 2]>,
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] Error),
}

fn check(w: &Wire, expected_len: usize) -> Result<Vec<Complex64>> {
    if w.data.len() != expected_len {
        return Err(Error::DimensionMismatch { expected: expected_len, found: w.data.len() });
    }
    if w.data.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure("non-finite entry in input".into()));
    }
    Ok(w.data.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
}

pub fn matrix_to_json(a: &CMat) -> String {
    let d = a.nrows();
    let mut data = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..a.ncols() {
            data.push([a[(i, j)].re, a[(i, j)].im]);
        }
    }
    serde_json::to_string(&Wire { dim: d, data }).expect("serializable")
}

pub fn vector_to_json(v: &CVec) -> String {
    let data = v.iter().map(|z| [z.re, z.im]).collect();
    serde_json::to_string(&Wire { dim: v.len(), data }).expect("serializable")
}

pub fn matrix_from_json(s: &str) -> std::result::Result<CMat, IoError> {
    let w: Wire = serde_json::from_str(s)?;
    let entries = check(&w, w.dim * w.dim)?;
    Ok(CMat::from_row_slice(w.dim, w.dim, &entries))
}

pub fn vector_from_json(s: &str) -> std::result::Result<CVec, IoError> {
    let w: Wire = serde_json::from_str(s)?;
    let entries = check(&w, w.dim)?;
    Ok(CVec::from_vec(entries))
}

pub fn save_matrix(path: &Path, a: &CMat) -> std::result::Result<(), IoError> {
    Ok(fs::write(path, matrix_to_json(a))?)
}

pub fn load_matrix(path: &Path) -> std::result::Result<CMat, IoError> {
    matrix_from_json(&fs::read_to_string(path)?)
}

pub fn save_vector(path: &Path, v: &CVec) -> std::result::Result<(), IoError> {
    Ok(fs::write(path, vector_to_json(v))?)
}

pub fn load_vector(path: &Path) -> std::result::Result<CVec, IoError> {
    vector_from_json(&fs::read_to_string(path)?)
}
