//! Front-end building blocks for the thermal solver binary: strict JSON
//! configuration, CSV/VTK/PGM exporters and the verification drivers.

// validators use `!(v > 0.0)` so NaN is rejected along with the sign
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod pgm;
pub mod report;
pub mod verify;
pub mod vtk;

pub use config::{parse_config, RunConfig};
pub use error::{CliError, Result};
