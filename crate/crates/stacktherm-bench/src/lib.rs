//! Shared fixtures for the solver benchmarks.

use stacktherm_core::fvm::{assemble_system, LinearSystem};
use stacktherm_core::materials::builtin_library;
use stacktherm_core::stack::{voxelize, GridOptions, StackSpec, VoxelModel};

/// Baseline package voxelized at the given in-plane cell size.
pub fn model_at(cell_m: f64) -> VoxelModel {
    voxelize(
        &StackSpec::default_package(),
        &builtin_library(),
        &GridOptions {
            target_cell: cell_m,
            cells_per_layer: 2,
        },
    )
    .expect("baseline package voxelizes")
}

/// Assembled system for the baseline package.
pub fn system_at(cell_m: f64) -> (VoxelModel, LinearSystem) {
    let model = model_at(cell_m);
    let system = assemble_system(&model).expect("baseline package assembles");
    (model, system)
}
