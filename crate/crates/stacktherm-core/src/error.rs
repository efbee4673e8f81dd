//! Error types shared across the solver crates.

use thiserror::Error;

/// Errors produced while building geometry, assembling systems, or solving.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical quantity is outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// Geometry does not fit or is inconsistent; the message names the
    /// violating dimension.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A declarative spec violates one of its invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// The requested cell size cannot resolve the smallest feature.
    #[error(
        "refinement error: {message} (suggested in-plane cell size: {suggested_cell_m:.3e} m)"
    )]
    Refinement {
        message: String,
        suggested_cell_m: f64,
    },

    /// System assembly failed (e.g. a non-positive conductivity slipped in).
    #[error("assembly error: {0}")]
    Assembly(String),

    /// The iterative solver did not reach the requested tolerance.
    #[error("solver did not converge after {iterations} iterations (last relative residual {last_residual:.3e})")]
    NonConvergence {
        iterations: usize,
        last_residual: f64,
        /// Relative residual per iteration, for post-mortem inspection.
        residual_history: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
