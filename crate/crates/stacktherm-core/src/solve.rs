//! Steady and transient solution of the assembled systems.
//!
//! The steady solver runs preconditioned conjugate gradients on the
//! excess-temperature form A·u = q (u = T − T_ambient), which makes the
//! solution exactly homogeneous in the thermal load. The transient solver
//! steps backward Euler, solving one SPD system per step; it is
//! unconditionally stable and approaches the steady field monotonically for
//! constant power from an ambient start.

use crate::error::{Error, Result};
use crate::fvm::{assemble_system, LinearSystem};
use crate::stack::VoxelModel;

/// Preconditioner choice for the conjugate-gradient solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    None,
    #[default]
    Jacobi,
}

/// Iterative solver controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Convergence threshold on ‖r‖/‖b‖.
    pub rel_tol: f64,
    /// Iteration cap; `None` selects max(10000, 20·√n) for an n-cell system.
    pub max_iters: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rel_tol: 1e-8,
            max_iters: None,
            preconditioner: Preconditioner::Jacobi,
        }
    }
}

impl SolverOptions {
    pub fn effective_max_iters(&self, n: usize) -> usize {
        self.max_iters
            .unwrap_or_else(|| (20.0 * (n as f64).sqrt()).ceil().max(10_000.0) as usize)
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::Domain("rel_tol must be positive".into()));
        }
        if self.max_iters == Some(0) {
            return Err(Error::Domain("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Cell temperatures in K, aligned with the voxel indexing of the model the
/// system was assembled from.
#[derive(Debug, Clone)]
pub struct TemperatureField {
    pub values: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub t_ambient: f64,
    /// Conjugate-gradient iterations spent producing this field.
    pub iterations: usize,
    /// Final relative residual of the solve.
    pub residual: f64,
}

impl TemperatureField {
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Maximum over a set of cell indices.
    pub fn max_over(&self, cells: &[usize]) -> f64 {
        cells
            .iter()
            .map(|&i| self.values[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Outcome of a conjugate-gradient run.
#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned conjugate gradients on A·x = b with explicit right
/// side. Serial reductions keep the result bit-reproducible for a fixed
/// input regardless of thread count.
///
/// Convergence is declared on the true residual ‖b − A·x‖/‖b‖: whenever the
/// cheap recursive residual dips under the tolerance, the true residual is
/// recomputed and, if it disagrees, the Krylov cycle restarts from it.
fn cg_on(system: &LinearSystem, b: &[f64], x0: &[f64], opts: &SolverOptions) -> Result<CgOutcome> {
    opts.validate()?;
    let n = system.unknowns();
    if b.len() != n || x0.len() != n {
        return Err(Error::Domain("rhs/x0 length mismatch".into()));
    }
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
        });
    }

    let inv_diag: Vec<f64> = match opts.preconditioner {
        Preconditioner::Jacobi => system.diag.iter().map(|d| 1.0 / d).collect(),
        Preconditioner::None => vec![1.0; n],
    };

    let max_iters = opts.effective_max_iters(n);
    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut history = Vec::new();
    let mut total_iters = 0usize;
    let mut prev_sync_rel = f64::INFINITY;

    loop {
        // sync with the true residual
        system.matvec_into(&x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let mut rel = norm(&r) / b_norm;
        history.push(rel);
        if rel <= opts.rel_tol {
            return Ok(CgOutcome {
                x,
                iterations: total_iters,
                residual: rel,
            });
        }
        // the tolerance sits below what the arithmetic can deliver
        let stagnated = rel >= 0.999 * prev_sync_rel;
        if total_iters >= max_iters || (stagnated && total_iters > 0) {
            return Err(Error::NonConvergence {
                iterations: total_iters,
                last_residual: rel,
                residual_history: history,
            });
        }
        prev_sync_rel = rel;

        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, d)| ri * d).collect();
        let mut p = z.clone();
        let mut rho = dot(&r, &z);

        while total_iters < max_iters {
            total_iters += 1;
            system.matvec_into(&p, &mut q);
            let pq = dot(&p, &q);
            if !(pq > 0.0) || !pq.is_finite() {
                return Err(Error::NonConvergence {
                    iterations: total_iters,
                    last_residual: rel,
                    residual_history: history,
                });
            }
            let alpha = rho / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            for i in 0..n {
                r[i] -= alpha * q[i];
            }
            rel = norm(&r) / b_norm;
            history.push(rel);
            if rel <= opts.rel_tol {
                break; // confirm against the true residual
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rho_new = dot(&r, &z);
            let beta = rho_new / rho;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            rho = rho_new;
        }
    }
}

/// Solves A·x = system.rhs starting from `x0`.
pub fn cg_solve(system: &LinearSystem, x0: &[f64], opts: &SolverOptions) -> Result<CgOutcome> {
    cg_on(system, &system.rhs, x0, opts)
}

/// Steady-state temperature field of an assembled system.
pub fn solve_steady(system: &LinearSystem, opts: &SolverOptions) -> Result<TemperatureField> {
    let b = system.excess_rhs();
    let out = cg_on(system, &b, &vec![0.0; system.unknowns()], opts)?;
    Ok(TemperatureField {
        values: out.x.iter().map(|u| u + system.t_ref).collect(),
        nx: system.nx,
        ny: system.ny,
        nz: system.nz,
        t_ambient: system.t_ref,
        iterations: out.iterations,
        residual: out.residual,
    })
}

/// Time-stepping controls for the transient solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientSchedule {
    /// Step size, s.
    pub dt: f64,
    /// Final time, s.
    pub t_end: f64,
    /// Uniform initial temperature; ambient when not set, K.
    pub initial: Option<f64>,
    /// Keep every `sample_stride`-th field snapshot (the scalar trace is
    /// recorded every step).
    pub sample_stride: usize,
}

impl Default for TransientSchedule {
    fn default() -> Self {
        TransientSchedule {
            dt: 0.05,
            t_end: 30.0,
            initial: None,
            sample_stride: 20,
        }
    }
}

impl TransientSchedule {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_end >= self.dt) {
            return Err(Error::Domain(
                "transient schedule needs dt > 0 and t_end ≥ dt".into(),
            ));
        }
        Ok(())
    }
}

/// Result of a transient run: the per-step trace of the hottest GPU cell,
/// periodic field snapshots and the terminal field.
#[derive(Debug, Clone)]
pub struct TransientResult {
    /// Sample times, s (one per step, starting after the first step).
    pub times: Vec<f64>,
    /// Maximum GPU-die temperature at each sample time, K.
    pub gpu_max: Vec<f64>,
    /// Snapshots (time, field) every `sample_stride` steps.
    pub snapshots: Vec<(f64, TemperatureField)>,
    pub final_field: TemperatureField,
    /// Total inner CG iterations across all steps.
    pub inner_iterations: usize,
}

impl TransientResult {
    /// First sampled time at which the trace reaches `fraction` of the given
    /// steady excess, or None if it never does within the run.
    pub fn time_to_fraction(
        &self,
        steady_gpu_max: f64,
        t_ambient: f64,
        fraction: f64,
    ) -> Option<f64> {
        let target = t_ambient + fraction * (steady_gpu_max - t_ambient);
        self.times
            .iter()
            .zip(&self.gpu_max)
            .find(|(_, &t)| t >= target)
            .map(|(t, _)| *t)
    }
}

/// Heat capacity ρ·cp·V of every cell, J/K.
pub fn capacitance(model: &VoxelModel) -> Result<Vec<f64>> {
    let mut c = Vec::with_capacity(model.cell_count());
    for idx in 0..model.cell_count() {
        let m = model.material(idx);
        let rc = m.volumetric_heat_capacity();
        if !(rc > 0.0) {
            return Err(Error::Domain(format!(
                "material '{}' has non-positive ρ·cp",
                m.name
            )));
        }
        c.push(rc * model.cell_volume(idx));
    }
    Ok(c)
}

/// Backward-Euler march on an already assembled system, driven by
/// the system's own sources. The per-step system (C/dt + A)·δ = b − A·uⁿ is
/// solved in increment form so the inner tolerance applies to the step
/// change itself.
pub fn transient_on_system(
    system: &LinearSystem,
    capacitance: &[f64],
    gpu_cells: &[usize],
    schedule: &TransientSchedule,
    opts: &SolverOptions,
) -> Result<TransientResult> {
    schedule.validate()?;
    let n = system.unknowns();
    if capacitance.len() != n {
        return Err(Error::Domain("capacitance length mismatch".into()));
    }

    let mut stepped = system.clone();
    let c_over_dt: Vec<f64> = capacitance.iter().map(|c| c / schedule.dt).collect();
    for i in 0..n {
        stepped.diag[i] += c_over_dt[i];
    }

    let b = system.excess_rhs();
    // initial excess over ambient
    let u0 = schedule.initial.map(|t| t - system.t_ref).unwrap_or(0.0);
    let mut u = vec![u0; n];

    let steps = (schedule.t_end / schedule.dt).round().max(1.0) as usize;
    let stride = schedule.sample_stride.max(1);

    let mut times = Vec::with_capacity(steps);
    let mut gpu_max = Vec::with_capacity(steps);
    let mut snapshots = Vec::new();
    let mut inner_iterations = 0;
    let mut residual_step = vec![0.0; n];
    let mut last_residual = 0.0;

    let field_of = |u: &[f64], iterations: usize, residual: f64| TemperatureField {
        values: u.iter().map(|ui| ui + system.t_ref).collect(),
        nx: system.nx,
        ny: system.ny,
        nz: system.nz,
        t_ambient: system.t_ref,
        iterations,
        residual,
    };

    for step in 1..=steps {
        // driving residual of the steady equation at the current state
        system.matvec_into(&u, &mut residual_step);
        for i in 0..n {
            residual_step[i] = b[i] - residual_step[i];
        }
        let out = cg_on(&stepped, &residual_step, &vec![0.0; n], opts)?;
        for i in 0..n {
            u[i] += out.x[i];
        }
        inner_iterations += out.iterations;
        last_residual = out.residual;

        let t = step as f64 * schedule.dt;
        times.push(t);
        let peak = gpu_cells
            .iter()
            .map(|&i| u[i])
            .fold(f64::NEG_INFINITY, f64::max)
            + system.t_ref;
        gpu_max.push(peak);
        if step % stride == 0 {
            snapshots.push((t, field_of(&u, out.iterations, out.residual)));
        }
    }

    Ok(TransientResult {
        times,
        gpu_max,
        snapshots,
        final_field: field_of(&u, inner_iterations, last_residual),
        inner_iterations,
    })
}

/// Assembles the standard system for `model` and integrates it in time.
pub fn run_transient(
    model: &VoxelModel,
    schedule: &TransientSchedule,
    opts: &SolverOptions,
) -> Result<TransientResult> {
    let system = assemble_system(model)?;
    let cap = capacitance(model)?;
    let gpu = model.gpu_die_cells();
    transient_on_system(&system, &cap, &gpu, schedule, opts)
}
