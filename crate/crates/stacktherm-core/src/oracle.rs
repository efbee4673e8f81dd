//! Closed-form reference solutions used to verify the discretization and the
//! solvers. Everything in this module is evaluated directly from formulas;
//! none of it shares code with the assembly or solver paths it checks.

use crate::error::{Error, Result};

/// 1D slab with uniform volumetric heating and convective exchange on both
/// faces. The bottom face sits at z = 0, the top at z = L.
#[derive(Debug, Clone, Copy)]
pub struct SlabProblem {
    /// Slab thickness, m.
    pub thickness: f64,
    /// Conductivity along z, W/(m·K).
    pub k: f64,
    /// Volumetric heating, W/m³.
    pub q_vol: f64,
    /// Convection coefficient at z = L, W/(m²·K).
    pub h_top: f64,
    /// Convection coefficient at z = 0, W/(m²·K).
    pub h_bottom: f64,
    /// Ambient temperature, K.
    pub t_ambient: f64,
}

impl SlabProblem {
    fn validate(&self) -> Result<()> {
        if !(self.thickness > 0.0 && self.k > 0.0 && self.h_top > 0.0 && self.h_bottom > 0.0) {
            return Err(Error::Domain(
                "slab thickness, conductivity and both film coefficients must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Integration constants (c1, c0) of the excess temperature
    /// θ(z) = −q̇ z²/(2k) + c1·z + c0.
    ///
    /// The two convective conditions, with outward-positive surface flux,
    ///
    /// ```text
    ///   z = 0:  k·θ'(0)  = h_b·θ(0)
    ///   z = L: −k·θ'(L)  = h_t·θ(L)
    /// ```
    ///
    /// form a 2×2 linear system solved here by elimination.
    fn profile_constants(&self) -> Result<(f64, f64)> {
        self.validate()?;
        let (l, k, q) = (self.thickness, self.k, self.q_vol);
        let (hb, ht) = (self.h_bottom, self.h_top);
        // Row 1:  k·c1 − hb·c0 = 0
        // Row 2:  (k + ht·L)·c1 + ht·c0 = q·L + ht·q·L²/(2k)
        let a11 = k;
        let a12 = -hb;
        let a21 = k + ht * l;
        let a22 = ht;
        let b2 = q * l + ht * q * l * l / (2.0 * k);
        let det = a11 * a22 - a12 * a21;
        if det.abs() < f64::MIN_POSITIVE {
            return Err(Error::Domain("degenerate slab boundary system".into()));
        }
        // Cramer's rule with rhs (0, b2)
        let c1 = -a12 * b2 / det;
        let c0 = a11 * b2 / det;
        Ok((c1, c0))
    }
}

/// Exact slab temperature at height `z`, K.
pub fn slab_analytic(p: &SlabProblem, z: f64) -> Result<f64> {
    if !(0.0..=p.thickness).contains(&z) {
        return Err(Error::Domain(format!(
            "z = {z} outside slab [0, {}]",
            p.thickness
        )));
    }
    let (c1, c0) = p.profile_constants()?;
    Ok(p.t_ambient - p.q_vol * z * z / (2.0 * p.k) + c1 * z + c0)
}

/// Manufactured steady solution on a box centered at the origin,
///
/// ```text
/// T(x,y,z) = 300 + 10·cos(πx/Lx)·cos(πy/Ly)·cos(πz/Lz)
/// ```
///
/// together with the source field that makes it solve k∇²T + q̇ = 0 and the
/// boundary data it implies: convective data on the z faces (where T ≡ 300)
/// and exact heat-flux injection on the four side walls.
#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
    /// Isotropic conductivity the source field is built for.
    pub k: f64,
    /// Film coefficient used to express the z-face data in convective form.
    pub h: f64,
}

/// Manufactured fields sampled on a given cell-centered grid.
#[derive(Debug, Clone)]
pub struct ManufacturedData {
    /// Exact temperature at each cell center, x-fastest ordering.
    pub t_exact: Vec<f64>,
    /// Source density q̇ at each cell center, W/m³.
    pub source: Vec<f64>,
    /// Ambient temperature per top-face cell (nx·ny), K.
    pub ambient_top: Vec<f64>,
    /// Ambient temperature per bottom-face cell (nx·ny), K.
    pub ambient_bottom: Vec<f64>,
    /// Heat flux into the domain per side-face cell, W/m². Indexed (y,z)
    /// for the x faces and (x,z) for the y faces, first coordinate fastest.
    pub flux_x_lo: Vec<f64>,
    pub flux_x_hi: Vec<f64>,
    pub flux_y_lo: Vec<f64>,
    pub flux_y_hi: Vec<f64>,
}

impl ManufacturedCase {
    pub fn temperature(&self, x: f64, y: f64, z: f64) -> f64 {
        use std::f64::consts::PI;
        300.0
            + 10.0 * (PI * x / self.lx).cos() * (PI * y / self.ly).cos() * (PI * z / self.lz).cos()
    }

    /// Source density satisfying k∇²T + q̇ = 0 for the field above.
    pub fn source(&self, x: f64, y: f64, z: f64) -> f64 {
        use std::f64::consts::PI;
        let lam = PI
            * PI
            * (1.0 / (self.lx * self.lx) + 1.0 / (self.ly * self.ly) + 1.0 / (self.lz * self.lz));
        self.k * lam * (self.temperature(x, y, z) - 300.0)
    }

    /// ∂T/∂x, analytically.
    fn dt_dx(&self, x: f64, y: f64, z: f64) -> f64 {
        use std::f64::consts::PI;
        -10.0
            * (PI / self.lx)
            * (PI * x / self.lx).sin()
            * (PI * y / self.ly).cos()
            * (PI * z / self.lz).cos()
    }

    fn dt_dy(&self, x: f64, y: f64, z: f64) -> f64 {
        use std::f64::consts::PI;
        -10.0
            * (PI / self.ly)
            * (PI * x / self.lx).cos()
            * (PI * y / self.ly).sin()
            * (PI * z / self.lz).cos()
    }

    fn dt_dz(&self, x: f64, y: f64, z: f64) -> f64 {
        use std::f64::consts::PI;
        -10.0
            * (PI / self.lz)
            * (PI * x / self.lx).cos()
            * (PI * y / self.ly).cos()
            * (PI * z / self.lz).sin()
    }

    /// Samples exact fields and boundary data on an `nx × ny × nz` grid of
    /// uniform cells covering [−Lx/2, Lx/2] × [−Ly/2, Ly/2] × [−Lz/2, Lz/2].
    pub fn sample(&self, nx: usize, ny: usize, nz: usize) -> ManufacturedData {
        let (dx, dy, dz) = (
            self.lx / nx as f64,
            self.ly / ny as f64,
            self.lz / nz as f64,
        );
        let xc = |i: usize| -0.5 * self.lx + (i as f64 + 0.5) * dx;
        let yc = |j: usize| -0.5 * self.ly + (j as f64 + 0.5) * dy;
        let zc = |m: usize| -0.5 * self.lz + (m as f64 + 0.5) * dz;

        let mut t_exact = Vec::with_capacity(nx * ny * nz);
        let mut source = Vec::with_capacity(nx * ny * nz);
        for m in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    t_exact.push(self.temperature(xc(i), yc(j), zc(m)));
                    source.push(self.source(xc(i), yc(j), zc(m)));
                }
            }
        }

        // z faces: T_face = 300 exactly, so the equivalent convective data is
        // T_e = T_face − q_out/h with q_out the exact outward flux.
        let mut ambient_top = Vec::with_capacity(nx * ny);
        let mut ambient_bottom = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let q_out_top = -self.k * self.dt_dz(xc(i), yc(j), 0.5 * self.lz);
                let q_out_bot = self.k * self.dt_dz(xc(i), yc(j), -0.5 * self.lz);
                ambient_top.push(300.0 - q_out_top / self.h);
                ambient_bottom.push(300.0 - q_out_bot / self.h);
            }
        }

        // Side walls: exact inward flux, q_in = −q_out = −(−k ∂T/∂n_out).
        let mut flux_x_lo = Vec::with_capacity(ny * nz);
        let mut flux_x_hi = Vec::with_capacity(ny * nz);
        for m in 0..nz {
            for j in 0..ny {
                flux_x_lo.push(-self.k * self.dt_dx(-0.5 * self.lx, yc(j), zc(m)));
                flux_x_hi.push(self.k * self.dt_dx(0.5 * self.lx, yc(j), zc(m)));
            }
        }
        let mut flux_y_lo = Vec::with_capacity(nx * nz);
        let mut flux_y_hi = Vec::with_capacity(nx * nz);
        for m in 0..nz {
            for i in 0..nx {
                flux_y_lo.push(-self.k * self.dt_dy(xc(i), -0.5 * self.ly, zc(m)));
                flux_y_hi.push(self.k * self.dt_dy(xc(i), 0.5 * self.ly, zc(m)));
            }
        }

        ManufacturedData {
            t_exact,
            source,
            ambient_top,
            ambient_bottom,
            flux_x_lo,
            flux_x_hi,
            flux_y_lo,
            flux_y_hi,
        }
    }
}

/// Least-squares slope of log(error) against log(h); the observed order of
/// accuracy of a refinement study.
pub fn convergence_order(errors: &[f64], spacings: &[f64]) -> Result<f64> {
    if errors.len() != spacings.len() || errors.len() < 2 {
        return Err(Error::Domain(
            "convergence order needs at least two (error, spacing) pairs".into(),
        ));
    }
    if errors.iter().chain(spacings).any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("errors and spacings must be positive".into()));
    }
    let n = errors.len() as f64;
    let xs: Vec<f64> = spacings.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    if den == 0.0 {
        return Err(Error::Domain("spacings must not all be equal".into()));
    }
    Ok(num / den)
}
