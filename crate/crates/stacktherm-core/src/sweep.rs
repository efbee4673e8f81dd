//! Parametric experiment families over the package design space, and a
//! deterministic parallel runner for them.
//!
//! Three families are built in: redistributing a fixed number of HBM dies
//! across stack layers, sweeping the interposer thickness on the 5×4 layout,
//! and crossing interposer materials with GPU power levels (transient runs).
//! Cases are independent; failures are recorded per case and never abort the
//! rest of the sweep, and report content does not depend on the parallelism.

use std::time::Instant;

use rayon::prelude::*;

use crate::analysis::{self, DEFAULT_HOTSPOT_BAND_K};
use crate::error::{Error, Result};
use crate::fvm::assemble_system;
use crate::materials::MaterialLibrary;
use crate::solve::{
    capacitance, solve_steady, transient_on_system, SolverOptions, TransientSchedule,
};
use crate::stack::{voxelize, GpuPower, GridOptions, StackSpec};

/// One of the built-in experiment families.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepFamily {
    /// All divisor splits (dies/layer, layers) of `total` dies.
    HbmDistribution { total: usize },
    /// One case per interposer thickness, on the 5 dies × 4 layers layout.
    InterposerThickness { thicknesses_m: Vec<f64> },
    /// Material × TDP cross product, each case integrated in time on the
    /// 5×4 layout with a 300 µm interposer.
    TdpTransient {
        materials: Vec<String>,
        tdps_w: Vec<f64>,
        schedule: TransientSchedule,
    },
}

/// Default thickness grid for the interposer family, µm.
pub const DEFAULT_THICKNESSES_UM: [f64; 8] =
    [50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 400.0, 500.0];

/// Default TDP grid for the transient family, W.
pub const DEFAULT_TDPS_W: [f64; 3] = [100.0, 200.0, 300.0];

/// A sweep to execute: base package, family, resources.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: StackSpec,
    pub family: SweepFamily,
    /// Worker threads for case execution.
    pub parallelism: usize,
    pub grid: GridOptions,
    pub solver: SolverOptions,
    /// Hotspot band width for the per-case report, K.
    pub hotspot_band: f64,
}

impl SweepSpec {
    pub fn new(base: StackSpec, family: SweepFamily) -> Self {
        SweepSpec {
            base,
            family,
            parallelism: 1,
            grid: GridOptions::default(),
            solver: SolverOptions::default(),
            hotspot_band: DEFAULT_HOTSPOT_BAND_K,
        }
    }
}

/// Case identity carried into the report.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseParams {
    pub dies_per_layer: usize,
    pub n_layers: usize,
    pub interposer_material: String,
    pub thickness_um: f64,
    pub tdp_w: f64,
}

/// Fully resolved case: a stack to solve, plus an optional time schedule.
#[derive(Debug, Clone)]
pub struct CaseSpec {
    pub label: String,
    pub stack: StackSpec,
    pub params: CaseParams,
    pub transient: Option<TransientSchedule>,
}

/// Metrics of one solved case.
#[derive(Debug, Clone)]
pub struct CaseMetrics {
    pub t_max: f64,
    pub hotspot_area_m2: f64,
    pub r_k_per_w: f64,
    pub mean_k: f64,
    pub std_k: f64,
    pub range_k: f64,
    /// Total conjugate-gradient iterations spent on the case.
    pub iterations: usize,
    /// Steady-state energy balance |Σq̇V − Σ convected| / Σq̇V.
    pub energy_residual_rel: f64,
    /// (time, hottest GPU cell) trace for transient cases.
    pub trace: Option<Vec<(f64, f64)>>,
    /// Time to reach 95 % of the steady GPU excess, if reached.
    pub t95_s: Option<f64>,
}

/// Outcome of one case; failures carry the error text.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub label: String,
    pub params: CaseParams,
    pub outcome: std::result::Result<CaseMetrics, String>,
    pub wall_ms: f64,
}

/// Ordered per-case results of one sweep.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub cases: Vec<CaseResult>,
}

impl SweepReport {
    pub fn any_failed(&self) -> bool {
        self.cases.iter().any(|c| c.outcome.is_err())
    }
}

/// Divisor splits (dies_per_layer, n_layers) of `total`, dies-per-layer
/// descending: for 20 dies this yields (20,1), (10,2), (5,4), (4,5),
/// (2,10), (1,20).
pub fn fig2_family(total: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = (1..=total)
        .filter(|d| total.is_multiple_of(*d))
        .map(|d| (d, total / d))
        .collect();
    out.sort_by_key(|&(d, _)| std::cmp::Reverse(d));
    out
}

/// Validates the thickness list for the interposer family. Order is
/// preserved exactly as given.
pub fn thickness_family(values_m: &[f64]) -> Result<Vec<f64>> {
    if values_m.is_empty() {
        return Err(Error::Domain(
            "thickness family needs at least one value".into(),
        ));
    }
    if values_m.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("thicknesses must be positive".into()));
    }
    Ok(values_m.to_vec())
}

/// Material × TDP cross product for the transient family, materials outer.
pub fn tdp_transient_family(materials: &[String], tdps_w: &[f64]) -> Result<Vec<(String, f64)>> {
    if materials.is_empty() || tdps_w.is_empty() {
        return Err(Error::Domain(
            "transient family needs at least one material and one TDP".into(),
        ));
    }
    let mut out = Vec::with_capacity(materials.len() * tdps_w.len());
    for m in materials {
        for &w in tdps_w {
            out.push((m.clone(), w));
        }
    }
    Ok(out)
}

fn format_um(um: f64) -> String {
    if um.fract() == 0.0 {
        format!("{um:.0}")
    } else {
        format!("{um:.1}")
    }
}

fn params_of(stack: &StackSpec) -> CaseParams {
    CaseParams {
        dies_per_layer: stack.hbm.dies_per_layer,
        n_layers: stack.hbm.n_layers,
        interposer_material: stack.interposer_material.clone(),
        thickness_um: stack.interposer_thickness * 1e6,
        tdp_w: stack.gpu_power_w(),
    }
}

/// Expands a sweep spec into its ordered case list.
pub fn generate_cases(spec: &SweepSpec) -> Result<Vec<CaseSpec>> {
    let mut cases = Vec::new();
    match &spec.family {
        SweepFamily::HbmDistribution { total } => {
            for (d, l) in fig2_family(*total) {
                let mut stack = spec.base.clone();
                stack.hbm.total_dies = *total;
                stack.hbm.dies_per_layer = d;
                stack.hbm.n_layers = l;
                cases.push(CaseSpec {
                    label: format!("hbm_{d}x{l}"),
                    params: params_of(&stack),
                    stack,
                    transient: None,
                });
            }
        }
        SweepFamily::InterposerThickness { thicknesses_m } => {
            for &t in &thickness_family(thicknesses_m)? {
                let mut stack = spec.base.clone();
                stack.hbm.total_dies = 20;
                stack.hbm.dies_per_layer = 5;
                stack.hbm.n_layers = 4;
                stack.interposer_thickness = t;
                cases.push(CaseSpec {
                    label: format!("thk_{}um", format_um(t * 1e6)),
                    params: params_of(&stack),
                    stack,
                    transient: None,
                });
            }
        }
        SweepFamily::TdpTransient {
            materials,
            tdps_w,
            schedule,
        } => {
            for (material, tdp) in tdp_transient_family(materials, tdps_w)? {
                let mut stack = spec.base.clone();
                stack.hbm.total_dies = 20;
                stack.hbm.dies_per_layer = 5;
                stack.hbm.n_layers = 4;
                stack.interposer_thickness = 300.0e-6;
                stack.interposer_material = material.clone();
                stack.gpu_power = GpuPower::Tdp(tdp);
                cases.push(CaseSpec {
                    label: format!("{material}_tdp{tdp:.0}w"),
                    params: params_of(&stack),
                    stack,
                    transient: Some(*schedule),
                });
            }
        }
    }
    Ok(cases)
}

/// Solves one case and derives its metrics.
pub fn run_case(
    case: &CaseSpec,
    lib: &MaterialLibrary,
    grid: &GridOptions,
    solver: &SolverOptions,
    hotspot_band: f64,
) -> Result<CaseMetrics> {
    let model = voxelize(&case.stack, lib, grid)?;
    let system = assemble_system(&model)?;
    let steady = solve_steady(&system, solver)?;
    let gpu = model.gpu_die_cells();
    let steady_gpu_max = steady.max_over(&gpu);

    let excess: Vec<f64> = steady.values.iter().map(|t| t - steady.t_ambient).collect();
    let (_, _, energy_residual_rel) = system.energy_balance(&excess);

    let mut iterations = steady.iterations;
    let mut trace = None;
    let mut t95_s = None;
    let field = if let Some(schedule) = &case.transient {
        let cap = capacitance(&model)?;
        let out = transient_on_system(&system, &cap, &gpu, schedule, solver)?;
        iterations += out.inner_iterations;
        t95_s = out.time_to_fraction(steady_gpu_max, model.t_ambient, 0.95);
        trace = Some(
            out.times
                .iter()
                .cloned()
                .zip(out.gpu_max.iter().cloned())
                .collect(),
        );
        out.final_field
    } else {
        steady
    };

    let hs = analysis::hotspot(&field, &model, &gpu, hotspot_band)?;
    let stats = analysis::uniformity(&field, &model, &gpu)?;
    let r = analysis::thermal_resistance(hs.t_max, case.stack.total_power_w(), model.t_ambient)?;

    Ok(CaseMetrics {
        t_max: hs.t_max,
        hotspot_area_m2: hs.hotspot_area,
        r_k_per_w: r,
        mean_k: stats.mean,
        std_k: stats.std,
        range_k: stats.range,
        iterations,
        energy_residual_rel,
        trace,
        t95_s,
    })
}

/// Executes every case of the sweep, up to `parallelism` at a time. Case
/// rows keep generation order and their content is independent of the
/// thread count; wall times are the only nondeterministic fields.
pub fn run_sweep(spec: &SweepSpec, lib: &MaterialLibrary) -> Result<SweepReport> {
    let cases = generate_cases(spec)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.parallelism.max(1))
        .build()
        .map_err(|e| Error::Validation(format!("could not build thread pool: {e}")))?;

    let results: Vec<CaseResult> = pool.install(|| {
        cases
            .par_iter()
            .map(|case| {
                let start = Instant::now();
                let outcome = run_case(case, lib, &spec.grid, &spec.solver, spec.hotspot_band)
                    .map_err(|e| e.to_string());
                CaseResult {
                    label: case.label.clone(),
                    params: case.params.clone(),
                    outcome,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                }
            })
            .collect()
    });

    Ok(SweepReport { cases: results })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::builtin_library;

    #[test]
    fn fig2_enumeration() {
        assert_eq!(
            fig2_family(20),
            vec![(20, 1), (10, 2), (5, 4), (4, 5), (2, 10), (1, 20)]
        );
        assert_eq!(fig2_family(1), vec![(1, 1)]);
        assert_eq!(
            fig2_family(12),
            vec![(12, 1), (6, 2), (4, 3), (3, 4), (2, 6), (1, 12)]
        );
    }

    #[test]
    fn fig2_covers_each_divisor_pair_once() {
        for total in [6usize, 20, 36] {
            let fam = fig2_family(total);
            for (d, l) in &fam {
                assert_eq!(d * l, total);
            }
            let mut dedup = fam.clone();
            dedup.dedup();
            assert_eq!(dedup.len(), fam.len());
            let divisors = (1..=total).filter(|d| total.is_multiple_of(*d)).count();
            assert_eq!(fam.len(), divisors);
        }
    }

    #[test]
    fn thickness_family_contract() {
        let default_m: Vec<f64> = DEFAULT_THICKNESSES_UM.iter().map(|u| u * 1e-6).collect();
        assert_eq!(thickness_family(&default_m).unwrap().len(), 8);
        assert_eq!(thickness_family(&[1e-4]).unwrap().len(), 1);
        // unsorted input keeps its order
        let scrambled = [3e-4, 5e-5, 1e-4];
        assert_eq!(thickness_family(&scrambled).unwrap(), scrambled.to_vec());
        assert!(thickness_family(&[]).is_err());
        assert!(thickness_family(&[0.0]).is_err());
    }

    #[test]
    fn tdp_family_cross_product() {
        let mats = vec!["silicon".to_string(), "hbn".to_string()];
        let cases = tdp_transient_family(&mats, &DEFAULT_TDPS_W).unwrap();
        assert_eq!(cases.len(), 6);
        assert_eq!(cases[0], ("silicon".to_string(), 100.0));
        assert_eq!(cases[5], ("hbn".to_string(), 300.0));
        let single = tdp_transient_family(&mats[..1], &[200.0]).unwrap();
        assert_eq!(single.len(), 1);
        assert!(tdp_transient_family(&[], &[100.0]).is_err());
    }

    #[test]
    fn case_labels_unique_and_stable() {
        let spec = SweepSpec::new(
            StackSpec::default_package(),
            SweepFamily::TdpTransient {
                materials: vec!["silicon".into(), "hbn".into()],
                tdps_w: DEFAULT_TDPS_W.to_vec(),
                schedule: TransientSchedule::default(),
            },
        );
        let a = generate_cases(&spec).unwrap();
        let b = generate_cases(&spec).unwrap();
        let labels_a: Vec<&str> = a.iter().map(|c| c.label.as_str()).collect();
        let labels_b: Vec<&str> = b.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels_a, labels_b);
        let mut dedup = labels_a.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), labels_a.len());
        assert_eq!(labels_a[0], "silicon_tdp100w");
        assert_eq!(labels_a[5], "hbn_tdp300w");
    }

    fn coarse_sweep(parallelism: usize) -> SweepReport {
        let mut spec = SweepSpec::new(
            StackSpec::default_package(),
            SweepFamily::InterposerThickness {
                thicknesses_m: vec![100e-6, 300e-6],
            },
        );
        spec.parallelism = parallelism;
        spec.grid = GridOptions {
            target_cell: 1.0e-3,
            cells_per_layer: 1,
        };
        run_sweep(&spec, &builtin_library()).unwrap()
    }

    #[test]
    fn report_content_independent_of_parallelism() {
        let serial = coarse_sweep(1);
        let parallel = coarse_sweep(4);
        assert_eq!(serial.cases.len(), parallel.cases.len());
        for (a, b) in serial.cases.iter().zip(&parallel.cases) {
            assert_eq!(a.label, b.label);
            let (ma, mb) = (a.outcome.as_ref().unwrap(), b.outcome.as_ref().unwrap());
            assert_eq!(ma.t_max, mb.t_max);
            assert_eq!(ma.r_k_per_w, mb.r_k_per_w);
            assert_eq!(ma.std_k, mb.std_k);
            assert_eq!(ma.iterations, mb.iterations);
        }
    }

    #[test]
    fn isolated_rerun_reproduces_case() {
        let report = coarse_sweep(2);
        let spec = SweepSpec::new(
            StackSpec::default_package(),
            SweepFamily::InterposerThickness {
                thicknesses_m: vec![100e-6, 300e-6],
            },
        );
        let cases = generate_cases(&spec).unwrap();
        let grid = GridOptions {
            target_cell: 1.0e-3,
            cells_per_layer: 1,
        };
        let redo = run_case(
            &cases[1],
            &builtin_library(),
            &grid,
            &SolverOptions::default(),
            DEFAULT_HOTSPOT_BAND_K,
        )
        .unwrap();
        let row = report.cases[1].outcome.as_ref().unwrap();
        assert_eq!(redo.t_max, row.t_max);
        assert_eq!(redo.iterations, row.iterations);
    }

    #[test]
    fn failures_recorded_without_aborting() {
        let mut spec = SweepSpec::new(
            StackSpec::default_package(),
            SweepFamily::HbmDistribution { total: 20 },
        );
        spec.grid = GridOptions {
            target_cell: 1.0e-3,
            cells_per_layer: 1,
        };
        // starve the solver so every case fails the same way
        spec.solver.max_iters = Some(1);
        let report = run_sweep(&spec, &builtin_library()).unwrap();
        assert_eq!(report.cases.len(), 6);
        assert!(report.any_failed());
        for case in &report.cases {
            assert!(case.outcome.is_err());
        }
    }
}
