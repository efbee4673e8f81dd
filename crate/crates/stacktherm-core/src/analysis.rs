//! Metrics derived from solved temperature fields: hotspot extent, junction
//! thermal resistance, uniformity statistics, an exponential leakage-savings
//! estimator, and effective-conductivity scaling across the stack.

use crate::error::{Error, Result};
use crate::materials::{effective_tsv_medium, MaterialLibrary};
use crate::solve::TemperatureField;
use crate::stack::{LayerSpec, VoxelModel};

/// Default width of the temperature band that counts as "hotspot", K.
pub const DEFAULT_HOTSPOT_BAND_K: f64 = 5.0;

/// Default decay temperature of the leakage estimator, K. Chosen so a 20 K
/// junction reduction corresponds to a 22 % leakage saving.
pub const DEFAULT_LEAKAGE_THETA_K: f64 = 80.5;

/// Peak temperature and the plan-projected area within `band` of it.
#[derive(Debug, Clone, PartialEq)]
pub struct HotspotReport {
    pub t_max: f64,
    /// Grid coordinates (ix, iy, iz) of the peak; ties resolve to the
    /// smallest linear index.
    pub location: (usize, usize, usize),
    /// Plan area of columns holding at least one cell within the band, m².
    pub hotspot_area: f64,
    pub band: f64,
}

/// Projects a cell region to plan columns and measures the footprint of
/// those within `band` of the region maximum.
pub fn hotspot(
    field: &TemperatureField,
    model: &VoxelModel,
    region: &[usize],
    band: f64,
) -> Result<HotspotReport> {
    if region.is_empty() {
        return Err(Error::Domain("hotspot region is empty".into()));
    }
    let mut t_max = f64::NEG_INFINITY;
    let mut arg = region[0];
    for &idx in region {
        let t = field.values[idx];
        if t > t_max || (t == t_max && idx < arg) {
            t_max = t;
            arg = idx;
        }
    }
    let threshold = t_max - band;
    let mut hot_columns = std::collections::BTreeSet::new();
    for &idx in region {
        if field.values[idx] >= threshold {
            let (ix, iy, _) = model.coords(idx);
            hot_columns.insert((ix, iy));
        }
    }
    let hotspot_area = hot_columns
        .iter()
        .map(|&(ix, iy)| model.dx(ix) * model.dy(iy))
        .sum();
    Ok(HotspotReport {
        t_max,
        location: model.coords(arg),
        hotspot_area,
        band,
    })
}

/// Junction-to-ambient thermal resistance (t_max − t_e) / P, K/W.
pub fn thermal_resistance(t_max: f64, total_power: f64, t_ambient: f64) -> Result<f64> {
    if !(total_power > 0.0) {
        return Err(Error::Domain(
            "thermal resistance needs a positive total power".into(),
        ));
    }
    Ok((t_max - t_ambient) / total_power)
}

/// Area-weighted statistics over a cell region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformityStats {
    pub mean: f64,
    pub std: f64,
    pub range: f64,
}

pub fn uniformity(
    field: &TemperatureField,
    model: &VoxelModel,
    region: &[usize],
) -> Result<UniformityStats> {
    if region.is_empty() {
        return Err(Error::Domain("uniformity region is empty".into()));
    }
    let mut w_sum = 0.0;
    let mut mean = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &idx in region {
        let (ix, iy, _) = model.coords(idx);
        let w = model.dx(ix) * model.dy(iy);
        let t = field.values[idx];
        w_sum += w;
        mean += w * t;
        lo = lo.min(t);
        hi = hi.max(t);
    }
    mean /= w_sum;
    let mut var = 0.0;
    for &idx in region {
        let (ix, iy, _) = model.coords(idx);
        let w = model.dx(ix) * model.dy(iy);
        var += w * (field.values[idx] - mean).powi(2);
    }
    var /= w_sum;
    Ok(UniformityStats {
        mean,
        std: var.sqrt(),
        range: hi - lo,
    })
}

/// Fraction of leakage power saved by cooling the junction `delta_t` kelvin,
/// modelled as 1 − exp(−ΔT/θ). This is a calibrated estimator, not a
/// transistor-level leakage model.
pub fn leakage_reduction(delta_t: f64, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::Domain("leakage theta must be positive".into()));
    }
    Ok(1.0 - (-delta_t / theta).exp())
}

/// Effective vertical (series) and in-plane (parallel) conductivities of an
/// expanded layer list, thickness-weighted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveConductivity {
    pub k_eff_z: f64,
    pub k_eff_inplane: f64,
}

pub fn effective_k(layers: &[LayerSpec], lib: &MaterialLibrary) -> Result<EffectiveConductivity> {
    if layers.is_empty() {
        return Err(Error::Domain("empty layer list".into()));
    }
    let copper = lib.get("copper")?.clone();
    let mut total = 0.0;
    let mut series = 0.0; // Σ t/k_zz
    let mut parallel = 0.0; // Σ t·k_xx
    for layer in layers {
        let base = lib.get(&layer.material)?.clone();
        let mat = match layer.tsv_fraction {
            Some(f) if f > 0.0 => effective_tsv_medium(&base, &copper, f)?,
            _ => base,
        };
        total += layer.thickness;
        series += layer.thickness / mat.k_zz;
        parallel += layer.thickness * mat.k_xx;
    }
    Ok(EffectiveConductivity {
        k_eff_z: total / series,
        k_eff_inplane: parallel / total,
    })
}

/// Scaling prediction ΔT ≈ c·q̇·L²/k_eff. Useful only for ratios between
/// configurations; the constant c absorbs all geometry the expression drops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingEstimate {
    pub q_vol: f64,
    pub path_length: f64,
    pub k_eff: f64,
    pub delta_t_est: f64,
}

pub fn scaling_estimate(
    q_vol: f64,
    path_length: f64,
    k_eff: f64,
    calibration: f64,
) -> Result<ScalingEstimate> {
    if !(q_vol > 0.0 && path_length > 0.0 && k_eff > 0.0 && calibration > 0.0) {
        return Err(Error::Domain(
            "scaling estimate needs positive inputs".into(),
        ));
    }
    Ok(ScalingEstimate {
        q_vol,
        path_length,
        k_eff,
        delta_t_est: calibration * q_vol * path_length * path_length / k_eff,
    })
}
