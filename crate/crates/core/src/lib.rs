//! Finite-dimensional quantum mechanics with non-Hermitian observables.
//!
//! Para-Hermitian operators (diagonalizable, real spectrum) are treated as
//! observables through a metric operator `G`; the toolkit covers the metric
//! Born rule, time evolution by para-Hermitian generators and the geometric
//! phases and holonomies of cyclic evolutions.

pub mod born;
pub mod error;
pub mod evolve;
pub mod geophase;
pub mod matkit;
pub mod numerics;
pub mod paraops;
pub mod tol;

pub use error::{Error, Result};
pub use matkit::{CMat, CVec, EigSystem};
pub use tol::Tolerances;
