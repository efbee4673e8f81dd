//! Verification drivers: the solver run against the analytic slab and
//! manufactured-solution references. The `verify` subcommand prints these as
//! a pass/fail table; the acceptance suite calls them directly.

use stacktherm_core::fvm::{
    assemble_system, assemble_with_boundaries, Ambient, BoundarySet, FaceCondition,
};
use stacktherm_core::materials::Material;
use stacktherm_core::oracle::{convergence_order, slab_analytic, ManufacturedCase, SlabProblem};
use stacktherm_core::solve::{solve_steady, SolverOptions};
use stacktherm_core::stack::{ConcreteLayer, LayerKind, VoxelModel};

use crate::error::Result;

/// One solver-vs-slab comparison.
#[derive(Debug, Clone)]
pub struct SlabCheck {
    pub h_bottom: f64,
    pub h_top: f64,
    /// max |T − T_exact| / (T_exact − T_e) over the cells.
    pub max_rel_error: f64,
    /// Steady-state energy balance of the discrete solve.
    pub energy_residual_rel: f64,
}

/// Solves a uniformly heated column of `cells` cells against the analytic
/// profile for the given film-coefficient pair.
pub fn slab_check(h_bottom: f64, h_top: f64, cells: usize) -> Result<SlabCheck> {
    let problem = SlabProblem {
        thickness: 4.0e-3,
        k: 140.0,
        q_vol: 2.0e8,
        h_top,
        h_bottom,
        t_ambient: 293.15,
    };
    let dz = problem.thickness / cells as f64;
    let model = VoxelModel {
        nx: 1,
        ny: 1,
        nz: cells,
        x_edges: vec![0.0, 1.0],
        y_edges: vec![0.0, 1.0],
        z_edges: (0..=cells).map(|i| i as f64 * dz).collect(),
        materials: vec![Material::isotropic("slab", problem.k, 2329.0, 700.0, 0.0)],
        material_id: vec![0; cells],
        power_density: vec![problem.q_vol; cells],
        z_layer: vec![0; cells],
        layers: vec![ConcreteLayer {
            kind: LayerKind::Gpu,
            material: "slab".into(),
            z0: 0.0,
            z1: problem.thickness,
        }],
        h_top: problem.h_top,
        h_bottom: problem.h_bottom,
        t_ambient: problem.t_ambient,
    };
    let system = assemble_system(&model)?;
    let field = solve_steady(&system, &SolverOptions::default())?;

    let mut max_rel_error = 0.0f64;
    for iz in 0..cells {
        let z = (iz as f64 + 0.5) * dz;
        let exact = slab_analytic(&problem, z)?;
        let rel = ((field.values[iz] - exact) / (exact - problem.t_ambient)).abs();
        max_rel_error = max_rel_error.max(rel);
    }
    let excess: Vec<f64> = field.values.iter().map(|t| t - field.t_ambient).collect();
    let (_, _, energy_residual_rel) = system.energy_balance(&excess);
    Ok(SlabCheck {
        h_bottom,
        h_top,
        max_rel_error,
        energy_residual_rel,
    })
}

/// Film-coefficient pairs exercised by the default slab verification.
pub const SLAB_H_PAIRS: [(f64, f64); 5] = [
    (10.0, 350.0),
    (350.0, 10.0),
    (150.0, 150.0),
    (10.0, 10.0),
    (250.0, 350.0),
];

/// Error of one manufactured-solution solve.
#[derive(Debug, Clone)]
pub struct MmsLevel {
    pub cells_per_axis: usize,
    pub spacing: f64,
    pub max_error: f64,
    pub iterations: usize,
}

/// Refinement study against the manufactured field.
#[derive(Debug, Clone)]
pub struct MmsStudy {
    pub levels: Vec<MmsLevel>,
    pub observed_order: f64,
}

/// Solves the manufactured problem on uniform n³ grids and fits the
/// observed convergence order.
pub fn mms_study(sizes: &[usize]) -> Result<MmsStudy> {
    let case = ManufacturedCase {
        lx: 1.0,
        ly: 1.0,
        lz: 1.0,
        k: 140.0,
        h: 150.0,
    };
    let material = Material::isotropic("verification", case.k, 2329.0, 700.0, 0.0);
    let mut levels = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let data = case.sample(n, n, n);
        let edges = |l: f64| -> Vec<f64> {
            (0..=n)
                .map(|i| -0.5 * l + l * i as f64 / n as f64)
                .collect()
        };
        let model = VoxelModel {
            nx: n,
            ny: n,
            nz: n,
            x_edges: edges(case.lx),
            y_edges: edges(case.ly),
            z_edges: edges(case.lz),
            materials: vec![material.clone()],
            material_id: vec![0; n * n * n],
            power_density: data.source.clone(),
            z_layer: vec![0; n],
            layers: vec![ConcreteLayer {
                kind: LayerKind::Gpu,
                material: material.name.clone(),
                z0: -0.5 * case.lz,
                z1: 0.5 * case.lz,
            }],
            h_top: case.h,
            h_bottom: case.h,
            t_ambient: 300.0,
        };
        let boundaries = BoundarySet {
            top: FaceCondition::Robin {
                h: case.h,
                ambient: Ambient::PerCell(&data.ambient_top),
            },
            bottom: FaceCondition::Robin {
                h: case.h,
                ambient: Ambient::PerCell(&data.ambient_bottom),
            },
            x_lo: FaceCondition::HeatFlux(&data.flux_x_lo),
            x_hi: FaceCondition::HeatFlux(&data.flux_x_hi),
            y_lo: FaceCondition::HeatFlux(&data.flux_y_lo),
            y_hi: FaceCondition::HeatFlux(&data.flux_y_hi),
        };
        let system = assemble_with_boundaries(&model, &boundaries)?;
        let opts = SolverOptions {
            rel_tol: 1e-11,
            ..Default::default()
        };
        let field = solve_steady(&system, &opts)?;
        let mut max_error = 0.0f64;
        for i in 0..field.values.len() {
            max_error = max_error.max((field.values[i] - data.t_exact[i]).abs());
        }
        levels.push(MmsLevel {
            cells_per_axis: n,
            spacing: 1.0 / n as f64,
            max_error,
            iterations: field.iterations,
        });
    }
    let errors: Vec<f64> = levels.iter().map(|l| l.max_error).collect();
    let spacings: Vec<f64> = levels.iter().map(|l| l.spacing).collect();
    let observed_order = convergence_order(&errors, &spacings)?;
    Ok(MmsStudy {
        levels,
        observed_order,
    })
}

/// Runs the whole oracle suite, printing one line per check. Returns true
/// when every check passes.
pub fn run_verification(out: &mut dyn std::io::Write) -> Result<bool> {
    let mut all_ok = true;
    let line = |ok: bool, text: String, out: &mut dyn std::io::Write| {
        let tag = if ok { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "[{tag}] {text}");
        ok
    };

    for (hb, ht) in SLAB_H_PAIRS {
        let check = slab_check(hb, ht, 40)?;
        let ok = check.max_rel_error < 5e-3 && check.energy_residual_rel < 1e-6;
        all_ok &= line(
            ok,
            format!(
                "slab h=({hb}, {ht}): max rel error {:.3e} (limit 5e-3), energy residual {:.3e}",
                check.max_rel_error, check.energy_residual_rel
            ),
            out,
        );
    }

    let study = mms_study(&[20, 40, 80])?;
    for level in &study.levels {
        let _ = writeln!(
            out,
            "       mms {0}³: max error {1:.6e} K in {2} iterations",
            level.cells_per_axis, level.max_error, level.iterations
        );
    }
    let ok = study.observed_order >= 1.9;
    all_ok &= line(
        ok,
        format!(
            "manufactured-solution order {:.3} (limit 1.9)",
            study.observed_order
        ),
        out,
    );

    Ok(all_ok)
}
