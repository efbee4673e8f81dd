//! Finite-volume discretization of steady heat conduction with internal
//! sources on the voxel grid.
//!
//! Each cell contributes one unknown (its center temperature). Interior
//! faces carry a harmonic-mean conductance built from the two half-cell
//! resistances on either side, which keeps 1D series resistance across layer
//! boundaries exact. Convective faces fold the film coefficient in series
//! with the boundary half cell straight into the diagonal, so the assembled
//! matrix stays symmetric positive definite. Side walls default to adiabatic.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stack::VoxelModel;

/// Threshold below which matrix-vector products stay on one thread.
const PAR_MATVEC_MIN_CELLS: usize = 32_768;

/// Conductance of the interface between two cells, W/K.
///
/// `d_a` and `d_b` are the center-to-face distances, `k_a`/`k_b` the
/// conductivity components normal to the face:
/// `U = A / (d_a/k_a + d_b/k_b)`.
#[inline]
pub fn face_conductance(area: f64, d_a: f64, k_a: f64, d_b: f64, k_b: f64) -> f64 {
    area / (d_a / k_a + d_b / k_b)
}

/// Conductance of a convective boundary face, W/K: the film resistance in
/// series with the half cell behind the face,
/// `U = A / (1/h + half_thickness/k_n)`.
#[inline]
pub fn robin_face_coefficient(h: f64, k_n: f64, half_thickness: f64, area: f64) -> f64 {
    area / (1.0 / h + half_thickness / k_n)
}

/// Ambient temperature seen by a boundary face: one value for the whole
/// face or one per face cell.
#[derive(Debug, Clone)]
pub enum Ambient<'a> {
    Uniform(f64),
    PerCell(&'a [f64]),
}

impl Ambient<'_> {
    fn at(&self, cell: usize) -> f64 {
        match self {
            Ambient::Uniform(t) => *t,
            Ambient::PerCell(v) => v[cell],
        }
    }
}

/// Condition applied to one of the six grid faces.
#[derive(Debug, Clone)]
pub enum FaceCondition<'a> {
    /// No exchange through the face.
    Adiabatic,
    /// Newton cooling against the given ambient.
    Robin { h: f64, ambient: Ambient<'a> },
    /// Prescribed heat flux into the domain, W/m², one value per face cell.
    HeatFlux(&'a [f64]),
}

/// Boundary conditions for all six faces of the grid. Face-cell indexing is
/// (x fastest, then y) for the z faces, (y fastest, then z) for the x faces
/// and (x fastest, then z) for the y faces.
#[derive(Debug, Clone)]
pub struct BoundarySet<'a> {
    pub top: FaceCondition<'a>,
    pub bottom: FaceCondition<'a>,
    pub x_lo: FaceCondition<'a>,
    pub x_hi: FaceCondition<'a>,
    pub y_lo: FaceCondition<'a>,
    pub y_hi: FaceCondition<'a>,
}

/// Symmetric positive-definite system on the 7-point stencil.
///
/// Only the upper bands are stored: `band_x[i]` couples cell `i` with
/// `i + 1`, `band_y[i]` with `i + nx`, `band_z[i]` with `i + nx·ny`; the
/// lower triangle is implied by symmetry. `rhs` carries the source power of
/// each cell plus the convective contributions `U·T_e` of its boundary
/// faces, in W.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub diag: Vec<f64>,
    pub band_x: Vec<f64>,
    pub band_y: Vec<f64>,
    pub band_z: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Source part of the right side: q̇·V plus any injected boundary flux.
    pub source_rhs: Vec<f64>,
    /// Σ of convective face conductances per cell (zero away from the
    /// convective boundaries).
    pub robin_diag: Vec<f64>,
    /// Σ U·(T_e − t_ref) per cell; identically zero for a uniform ambient.
    pub robin_excess: Vec<f64>,
    /// Reference (ambient) temperature the excess formulation is taken
    /// against, K.
    pub t_ref: f64,
}

impl LinearSystem {
    /// Builds an empty system of the given grid shape.
    pub fn zeroed(nx: usize, ny: usize, nz: usize, t_ref: f64) -> Self {
        let n = nx * ny * nz;
        LinearSystem {
            nx,
            ny,
            nz,
            diag: vec![0.0; n],
            band_x: vec![0.0; n],
            band_y: vec![0.0; n],
            band_z: vec![0.0; n],
            rhs: vec![0.0; n],
            source_rhs: vec![0.0; n],
            robin_diag: vec![0.0; n],
            robin_excess: vec![0.0; n],
            t_ref,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.diag.len()
    }

    /// Right side of the excess-temperature system A·u = b, where
    /// u = T − t_ref. For a uniform ambient this is exactly the source
    /// power of each cell, which keeps the solve homogeneous in the load.
    pub fn excess_rhs(&self) -> Vec<f64> {
        self.source_rhs
            .iter()
            .zip(&self.robin_excess)
            .map(|(s, e)| s + e)
            .collect()
    }

    /// y = A·x. Elementwise parallel over z slabs; the result does not
    /// depend on the thread count.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.unknowns();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(y.len(), n);
        let nxy = self.nx * self.ny;
        let apply_slab = |iz: usize, slab: &mut [f64]| {
            let base = iz * nxy;
            for r in 0..nxy {
                let i = base + r;
                let ix = r % self.nx;
                let iy = r / self.nx;
                let mut v = self.diag[i] * x[i];
                if ix > 0 {
                    v += self.band_x[i - 1] * x[i - 1];
                }
                if ix + 1 < self.nx {
                    v += self.band_x[i] * x[i + 1];
                }
                if iy > 0 {
                    v += self.band_y[i - self.nx] * x[i - self.nx];
                }
                if iy + 1 < self.ny {
                    v += self.band_y[i] * x[i + self.nx];
                }
                if iz > 0 {
                    v += self.band_z[i - nxy] * x[i - nxy];
                }
                if iz + 1 < self.nz {
                    v += self.band_z[i] * x[i + nxy];
                }
                slab[r] = v;
            }
        };
        if n >= PAR_MATVEC_MIN_CELLS {
            y.par_chunks_mut(nxy)
                .enumerate()
                .for_each(|(iz, slab)| apply_slab(iz, slab));
        } else {
            for (iz, slab) in y.chunks_mut(nxy).enumerate() {
                apply_slab(iz, slab);
            }
        }
    }

    /// Adds `value` to the diagonal of row `i`.
    pub fn add_to_diag(&mut self, i: usize, value: f64) {
        self.diag[i] += value;
    }

    /// Global energy balance of an excess-temperature solution: returns
    /// (generated, convected, relative mismatch).
    pub fn energy_balance(&self, excess: &[f64]) -> (f64, f64, f64) {
        let generated: f64 = self.source_rhs.iter().sum();
        let convected: f64 = self
            .robin_diag
            .iter()
            .zip(excess)
            .zip(&self.robin_excess)
            .map(|((u_coef, u), ex)| u_coef * u - ex)
            .sum();
        let rel = if generated != 0.0 {
            ((generated - convected) / generated).abs()
        } else {
            convected.abs()
        };
        (generated, convected, rel)
    }
}

fn validate_materials(model: &VoxelModel) -> Result<()> {
    for m in &model.materials {
        if !(m.k_xx > 0.0 && m.k_yy > 0.0 && m.k_zz > 0.0) {
            return Err(Error::Assembly(format!(
                "material '{}' has a non-positive conductivity",
                m.name
            )));
        }
    }
    Ok(())
}

/// Assembles the standard package system: convective top and bottom faces at
/// the model's film coefficients and uniform ambient, adiabatic side walls.
pub fn assemble_system(model: &VoxelModel) -> Result<LinearSystem> {
    let bset = BoundarySet {
        top: FaceCondition::Robin {
            h: model.h_top,
            ambient: Ambient::Uniform(model.t_ambient),
        },
        bottom: FaceCondition::Robin {
            h: model.h_bottom,
            ambient: Ambient::Uniform(model.t_ambient),
        },
        x_lo: FaceCondition::Adiabatic,
        x_hi: FaceCondition::Adiabatic,
        y_lo: FaceCondition::Adiabatic,
        y_hi: FaceCondition::Adiabatic,
    };
    assemble_with_boundaries(model, &bset)
}

/// Assembles the system under explicit boundary conditions. Used by the
/// standard assembly above and by verification drivers that impose exact
/// manufactured data.
pub fn assemble_with_boundaries(model: &VoxelModel, bset: &BoundarySet) -> Result<LinearSystem> {
    validate_materials(model)?;
    let (nx, ny, nz) = (model.nx, model.ny, model.nz);
    let mut sys = LinearSystem::zeroed(nx, ny, nz, model.t_ambient);

    // interior faces
    for iz in 0..nz {
        let dz = model.dz(iz);
        for iy in 0..ny {
            let dy = model.dy(iy);
            for ix in 0..nx {
                let dx = model.dx(ix);
                let i = model.index(ix, iy, iz);
                let mat = model.material(i);

                if ix + 1 < nx {
                    let j = i + 1;
                    let other = model.material(j);
                    let u = face_conductance(
                        dy * dz,
                        0.5 * dx,
                        mat.k_xx,
                        0.5 * model.dx(ix + 1),
                        other.k_xx,
                    );
                    sys.diag[i] += u;
                    sys.diag[j] += u;
                    sys.band_x[i] = -u;
                }
                if iy + 1 < ny {
                    let j = i + nx;
                    let other = model.material(j);
                    let u = face_conductance(
                        dx * dz,
                        0.5 * dy,
                        mat.k_yy,
                        0.5 * model.dy(iy + 1),
                        other.k_yy,
                    );
                    sys.diag[i] += u;
                    sys.diag[j] += u;
                    sys.band_y[i] = -u;
                }
                if iz + 1 < nz {
                    let j = i + nx * ny;
                    let other = model.material(j);
                    let u = face_conductance(
                        dx * dy,
                        0.5 * dz,
                        mat.k_zz,
                        0.5 * model.dz(iz + 1),
                        other.k_zz,
                    );
                    sys.diag[i] += u;
                    sys.diag[j] += u;
                    sys.band_z[i] = -u;
                }

                // source term
                sys.source_rhs[i] = model.power_density[i] * dx * dy * dz;
            }
        }
    }

    // boundary faces
    let mut apply =
        |cell: usize, face_cell: usize, cond: &FaceCondition, k_n: f64, half: f64, area: f64| {
            match cond {
                FaceCondition::Adiabatic => {}
                FaceCondition::Robin { h, ambient } => {
                    let u = robin_face_coefficient(*h, k_n, half, area);
                    let t_e = ambient.at(face_cell);
                    sys.diag[cell] += u;
                    sys.robin_diag[cell] += u;
                    sys.robin_excess[cell] += u * (t_e - sys.t_ref);
                    sys.rhs[cell] += u * t_e; // accumulated into the full rhs below
                }
                FaceCondition::HeatFlux(q) => {
                    sys.source_rhs[cell] += q[face_cell] * area;
                }
            }
        };

    for iy in 0..ny {
        for ix in 0..nx {
            let face = ix + nx * iy;
            let top_cell = model.index(ix, iy, nz - 1);
            let bot_cell = model.index(ix, iy, 0);
            let area = model.dx(ix) * model.dy(iy);
            apply(
                top_cell,
                face,
                &bset.top,
                model.material(top_cell).k_zz,
                0.5 * model.dz(nz - 1),
                area,
            );
            apply(
                bot_cell,
                face,
                &bset.bottom,
                model.material(bot_cell).k_zz,
                0.5 * model.dz(0),
                area,
            );
        }
    }
    for iz in 0..nz {
        for iy in 0..ny {
            let face = iy + ny * iz;
            let lo = model.index(0, iy, iz);
            let hi = model.index(nx - 1, iy, iz);
            let area = model.dy(iy) * model.dz(iz);
            apply(
                lo,
                face,
                &bset.x_lo,
                model.material(lo).k_xx,
                0.5 * model.dx(0),
                area,
            );
            apply(
                hi,
                face,
                &bset.x_hi,
                model.material(hi).k_xx,
                0.5 * model.dx(nx - 1),
                area,
            );
        }
    }
    for iz in 0..nz {
        for ix in 0..nx {
            let face = ix + nx * iz;
            let lo = model.index(ix, 0, iz);
            let hi = model.index(ix, ny - 1, iz);
            let area = model.dx(ix) * model.dz(iz);
            apply(
                lo,
                face,
                &bset.y_lo,
                model.material(lo).k_yy,
                0.5 * model.dy(0),
                area,
            );
            apply(
                hi,
                face,
                &bset.y_hi,
                model.material(hi).k_yy,
                0.5 * model.dy(ny - 1),
                area,
            );
        }
    }

    // rhs currently holds only the Robin terms; fold the sources in
    for i in 0..sys.unknowns() {
        sys.rhs[i] += sys.source_rhs[i];
    }

    Ok(sys)
}
