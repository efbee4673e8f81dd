//! Voxel finite-volume thermal simulation of 3D-stacked GPU/HBM packages.
//!
//! The crate models a chip stack (substrate, HBM tiers, interposer sheets,
//! GPU die, TIM, heat sink) on a structured rectilinear grid, assembles the
//! anisotropic heat-conduction equations with convective top/bottom
//! boundaries into a symmetric positive-definite 7-point system, and solves
//! it with Jacobi-preconditioned conjugate gradients, steady state or
//! backward-Euler transient. On top of the solver sit hotspot/uniformity/
//! resistance metrics, analytic verification oracles, and parametric sweep
//! drivers over memory placement, interposer thickness and GPU power.

// validators use `!(v > 0.0)` so NaN is rejected along with the sign
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index-heavy numerical loops read better with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod fvm;
pub mod materials;
pub mod oracle;
pub mod solve;
pub mod stack;
pub mod sweep;

pub use analysis::{HotspotReport, UniformityStats};
pub use error::{Error, Result};
pub use fvm::LinearSystem;
pub use materials::{builtin_library, Material, MaterialLibrary};
pub use solve::{SolverOptions, TemperatureField, TransientResult, TransientSchedule};
pub use stack::{
    GpuPower, GridOptions, HbmDistribution, LayerKind, LayerSpec, StackSpec, VoxelModel,
};
pub use sweep::{CaseMetrics, CaseResult, SweepFamily, SweepReport, SweepSpec};
