//! Strict JSON run configuration.
//!
//! Unknown keys are rejected rather than ignored, so a typo cannot silently
//! fall back to a default. Values are SI unless the key name embeds a unit
//! (`thickness_um`, `footprint_mm`, `tdp_w`, ...). A minimal config needs
//! only the footprint, the interposer, the HBM split and the GPU power;
//! everything else falls back to the built-in package defaults.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use stacktherm_core::materials::{builtin_library, Material, MaterialLibrary};
use stacktherm_core::solve::{Preconditioner, SolverOptions, TransientSchedule};
use stacktherm_core::stack::{GpuPower, GridOptions, StackSpec};
use stacktherm_core::sweep::{SweepFamily, DEFAULT_TDPS_W, DEFAULT_THICKNESSES_UM};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Package footprint, mm.
    pub footprint_mm: [f64; 2],
    pub interposer: InterposerSection,
    pub hbm: HbmSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gpu: Option<GpuSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundarySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<LayersSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub materials: Option<BTreeMap<String, MaterialOverride>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tsv: Option<TsvSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transient: Option<TransientSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterposerSection {
    pub material: String,
    pub thickness_um: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HbmSection {
    pub total: usize,
    pub per_layer: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub die_mm: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier_thickness_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_per_die_w: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpuSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tdp_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_density_w_cm2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub die_mm: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness_um: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    /// Film coefficient on the top surface, W/(m²·K).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_top: Option<f64>,
    /// Film coefficient on the bottom surface, W/(m²·K).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_bottom: Option<f64>,
    /// Ambient temperature, K.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_ambient: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayersSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substrate_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substrate_material: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tim_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tim_material: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink_material: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill_material: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gpu_material: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbm_die_material: Option<String>,
}

/// Partial override of a built-in material, or a full definition of a new
/// one (then `density` and `cp` are required alongside the conductivity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialOverride {
    /// Isotropic conductivity, W/(m·K); shorthand for all three axes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_inplane: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_through: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cte: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells_per_layer: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TsvSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    /// "jacobi" (default) or "none".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preconditioner: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransientSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_stride: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// One of "hbm_distribution", "interposer_thickness", "tdp_transient".
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thicknesses_um: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub materials: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tdps_w: Option<Vec<f64>>,
}

/// Parsed and resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw: ConfigFile,
    pub stack: StackSpec,
    pub library: MaterialLibrary,
    pub grid: GridOptions,
    pub solver: SolverOptions,
    pub transient: TransientSchedule,
    pub sweep: Option<SweepFamily>,
    /// Non-fatal validation remarks, printed by the front end.
    pub warnings: Vec<String>,
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn apply_material_overrides(
    lib: &mut MaterialLibrary,
    overrides: &BTreeMap<String, MaterialOverride>,
) -> Result<()> {
    for (name, over) in overrides {
        let mut mat = match lib.get(name) {
            Ok(existing) => existing.clone(),
            Err(_) => {
                let k_ok =
                    over.k.is_some() || (over.k_inplane.is_some() && over.k_through.is_some());
                if !(k_ok && over.density.is_some() && over.cp.is_some()) {
                    return Err(cfg_err(format!(
                        "material '{name}' is not built in; a new material needs \
                         k (or k_inplane + k_through), density and cp"
                    )));
                }
                Material::isotropic(name, 1.0, 1.0, 1.0, 0.0)
            }
        };
        mat.name = name.clone();
        if let Some(k) = over.k {
            mat.k_xx = k;
            mat.k_yy = k;
            mat.k_zz = k;
        }
        if let Some(k) = over.k_inplane {
            mat.k_xx = k;
            mat.k_yy = k;
        }
        if let Some(k) = over.k_through {
            mat.k_zz = k;
        }
        if let Some(v) = over.density {
            mat.density = v;
        }
        if let Some(v) = over.cp {
            mat.cp = v;
        }
        if let Some(v) = over.cte {
            mat.cte = v;
        }
        lib.insert(mat).map_err(|e| cfg_err(e.to_string()))?;
    }
    Ok(())
}

fn resolve_sweep(section: &SweepSection, transient: &TransientSchedule) -> Result<SweepFamily> {
    match section.family.as_str() {
        "hbm_distribution" => Ok(SweepFamily::HbmDistribution {
            total: section.total.unwrap_or(20),
        }),
        "interposer_thickness" => {
            let um = section
                .thicknesses_um
                .clone()
                .unwrap_or_else(|| DEFAULT_THICKNESSES_UM.to_vec());
            Ok(SweepFamily::InterposerThickness {
                thicknesses_m: um.iter().map(|u| u * 1e-6).collect(),
            })
        }
        "tdp_transient" => Ok(SweepFamily::TdpTransient {
            materials: section
                .materials
                .clone()
                .unwrap_or_else(|| vec!["silicon".into(), "hbn".into()]),
            tdps_w: section
                .tdps_w
                .clone()
                .unwrap_or_else(|| DEFAULT_TDPS_W.to_vec()),
            schedule: *transient,
        }),
        other => Err(cfg_err(format!(
            "unknown sweep family '{other}' (expected hbm_distribution, \
             interposer_thickness or tdp_transient)"
        ))),
    }
}

/// Parses a strict JSON config into a resolved run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: ConfigFile = serde_json::from_str(text).map_err(|e| cfg_err(e.to_string()))?;

    let mut library = builtin_library();
    if let Some(overrides) = &raw.materials {
        apply_material_overrides(&mut library, overrides)?;
    }

    let mut stack = StackSpec::default_package();
    stack.footprint_x = raw.footprint_mm[0] * 1e-3;
    stack.footprint_y = raw.footprint_mm[1] * 1e-3;
    stack.interposer_material = raw.interposer.material.clone();
    stack.interposer_thickness = raw.interposer.thickness_um * 1e-6;

    let hbm = &raw.hbm;
    if hbm.per_layer == 0 || hbm.total == 0 {
        return Err(cfg_err("hbm.total and hbm.per_layer must be at least 1"));
    }
    if !hbm.total.is_multiple_of(hbm.per_layer) {
        return Err(cfg_err(format!(
            "hbm.per_layer ({}) does not divide hbm.total ({})",
            hbm.per_layer, hbm.total
        )));
    }
    stack.hbm.total_dies = hbm.total;
    stack.hbm.dies_per_layer = hbm.per_layer;
    stack.hbm.n_layers = hbm.total / hbm.per_layer;
    if let Some([dx, dy]) = hbm.die_mm {
        stack.hbm.die_x = dx * 1e-3;
        stack.hbm.die_y = dy * 1e-3;
    }
    if let Some(gap) = hbm.gap_mm {
        stack.hbm.gap = gap * 1e-3;
    }
    if let Some(t) = hbm.tier_thickness_um {
        stack.hbm_tier_thickness = t * 1e-6;
    }
    if let Some(p) = hbm.power_per_die_w {
        stack.hbm_power_per_die_w = p;
    }

    if let Some(gpu) = &raw.gpu {
        stack.gpu_power = match (gpu.tdp_w, gpu.power_density_w_cm2) {
            (Some(w), None) => GpuPower::Tdp(w),
            (None, Some(d)) => GpuPower::Density(d * 1e4),
            (Some(_), Some(_)) => {
                return Err(cfg_err(
                    "gpu: set exactly one of tdp_w and power_density_w_cm2, not both",
                ))
            }
            (None, None) => {
                return Err(cfg_err(
                    "gpu: set exactly one of tdp_w and power_density_w_cm2",
                ))
            }
        };
        if let Some([dx, dy]) = gpu.die_mm {
            stack.gpu_die_x = dx * 1e-3;
            stack.gpu_die_y = dy * 1e-3;
        }
        if let Some(t) = gpu.thickness_um {
            stack.gpu_thickness = t * 1e-6;
        }
    }

    if let Some(b) = &raw.boundary {
        if let Some(h) = b.h_top {
            stack.h_top = h;
        }
        if let Some(h) = b.h_bottom {
            stack.h_bottom = h;
        }
        if let Some(t) = b.t_ambient {
            stack.t_ambient = t;
        }
    }

    if let Some(l) = &raw.layers {
        if let Some(v) = l.substrate_um {
            stack.substrate_thickness = v * 1e-6;
        }
        if let Some(v) = &l.substrate_material {
            stack.substrate_material = v.clone();
        }
        if let Some(v) = l.tim_um {
            stack.tim_thickness = v * 1e-6;
        }
        if let Some(v) = &l.tim_material {
            stack.tim_material = v.clone();
        }
        if let Some(v) = l.sink_um {
            stack.sink_thickness = v * 1e-6;
        }
        if let Some(v) = &l.sink_material {
            stack.sink_material = v.clone();
        }
        if let Some(v) = &l.fill_material {
            stack.fill_material = v.clone();
        }
        if let Some(v) = &l.gpu_material {
            stack.gpu_material = v.clone();
        }
        if let Some(v) = &l.hbm_die_material {
            stack.hbm_die_material = v.clone();
        }
    }

    if let Some(t) = &raw.tsv {
        if let Some(f) = t.fraction {
            stack.tsv_fraction = f;
        }
    }

    // every referenced material must resolve
    for name in [
        &stack.interposer_material,
        &stack.substrate_material,
        &stack.tim_material,
        &stack.sink_material,
        &stack.fill_material,
        &stack.gpu_material,
        &stack.hbm_die_material,
    ] {
        library.get(name).map_err(|e| cfg_err(e.to_string()))?;
    }

    let warnings = stack.validate().map_err(|e| cfg_err(e.to_string()))?;

    let mut grid = GridOptions::default();
    if let Some(g) = &raw.grid {
        if let Some(c) = g.cell_mm {
            grid.target_cell = c * 1e-3;
        }
        if let Some(n) = g.cells_per_layer {
            grid.cells_per_layer = n;
        }
    }

    let mut solver = SolverOptions::default();
    if let Some(s) = &raw.solver {
        if let Some(tol) = s.rel_tol {
            solver.rel_tol = tol;
        }
        if s.max_iters.is_some() {
            solver.max_iters = s.max_iters;
        }
        if let Some(p) = &s.preconditioner {
            solver.preconditioner = match p.as_str() {
                "jacobi" => Preconditioner::Jacobi,
                "none" => Preconditioner::None,
                other => {
                    return Err(cfg_err(format!(
                        "unknown preconditioner '{other}' (expected jacobi or none)"
                    )))
                }
            };
        }
    }

    let mut transient = TransientSchedule::default();
    if let Some(t) = &raw.transient {
        if let Some(dt) = t.dt_s {
            transient.dt = dt;
        }
        if let Some(te) = t.t_end_s {
            transient.t_end = te;
        }
        if let Some(s) = t.sample_stride {
            transient.sample_stride = s;
        }
    }

    let sweep = raw
        .sweep
        .as_ref()
        .map(|s| resolve_sweep(s, &transient))
        .transpose()?;

    Ok(RunConfig {
        raw,
        stack,
        library,
        grid,
        solver,
        transient,
        sweep,
        warnings,
    })
}

/// Serializes the raw config back to pretty JSON. `parse_config` of the
/// result resolves to the same run configuration.
pub fn emit_config(cfg: &RunConfig) -> String {
    serde_json::to_string_pretty(&cfg.raw).expect("config serializes")
}

/// Ready-to-edit configs for the three built-in sweep families.
pub fn builtin_family_configs() -> BTreeMap<&'static str, ConfigFile> {
    let base = |sweep: SweepSection| ConfigFile {
        footprint_mm: [24.0, 24.0],
        interposer: InterposerSection {
            material: "hbn".into(),
            thickness_um: 300.0,
        },
        hbm: HbmSection {
            total: 20,
            per_layer: 5,
            die_mm: None,
            gap_mm: None,
            tier_thickness_um: None,
            power_per_die_w: None,
        },
        gpu: Some(GpuSection {
            tdp_w: None,
            power_density_w_cm2: Some(100.0),
            die_mm: None,
            thickness_um: None,
        }),
        boundary: None,
        layers: None,
        materials: None,
        grid: None,
        tsv: None,
        solver: None,
        transient: None,
        sweep: Some(sweep),
    };
    let mut out = BTreeMap::new();
    out.insert(
        "hbm_distribution",
        base(SweepSection {
            family: "hbm_distribution".into(),
            total: Some(20),
            thicknesses_um: None,
            materials: None,
            tdps_w: None,
        }),
    );
    out.insert(
        "interposer_thickness",
        base(SweepSection {
            family: "interposer_thickness".into(),
            total: None,
            thicknesses_um: Some(DEFAULT_THICKNESSES_UM.to_vec()),
            materials: None,
            tdps_w: None,
        }),
    );
    out.insert(
        "tdp_transient",
        base(SweepSection {
            family: "tdp_transient".into(),
            total: None,
            thicknesses_um: None,
            materials: Some(vec!["silicon".into(), "hbn".into()]),
            tdps_w: Some(DEFAULT_TDPS_W.to_vec()),
        }),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "footprint_mm": [24, 24],
        "interposer": {"material": "hbn", "thickness_um": 300},
        "hbm": {"total": 20, "per_layer": 5},
        "gpu": {"tdp_w": 256}
    }"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.stack.hbm.n_layers, 4);
        assert_eq!(cfg.stack.interposer_material, "hbn");
        assert!((cfg.stack.interposer_thickness - 300e-6).abs() < 1e-12);
        assert_eq!(cfg.stack.gpu_power, GpuPower::Tdp(256.0));
        // defaults carried over from the baseline package
        assert!((cfg.stack.substrate_thickness - 1.0e-3).abs() < 1e-12);
        assert!((cfg.stack.h_top - 350.0).abs() < 1e-12);
        assert!((cfg.stack.h_bottom - 10.0).abs() < 1e-12);
        assert!((cfg.grid.target_cell - 0.25e-3).abs() < 1e-12);
        assert!(cfg.sweep.is_none());
        assert!(cfg.warnings.is_empty());
    }

    #[test]
    fn non_divisor_split_is_semantic_error() {
        let text = MINIMAL.replace("\"per_layer\": 5", "\"per_layer\": 6");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("does not divide"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("\"thickness_um\"", "\"thiccness\"");
        let err = parse_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("thiccness"), "{msg}");
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_config("{\"footprint_mm\": [24, 2447,,]").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line") && msg.contains("column"), "{msg}");
    }

    #[test]
    fn gpu_power_is_exactly_one_of() {
        let both = MINIMAL.replace(
            "\"gpu\": {\"tdp_w\": 256}",
            "\"gpu\": {\"tdp_w\": 256, \"power_density_w_cm2\": 100}",
        );
        assert!(parse_config(&both).is_err());
        let neither = MINIMAL.replace("\"gpu\": {\"tdp_w\": 256}", "\"gpu\": {}");
        assert!(parse_config(&neither).is_err());
        // omitting the section keeps the default areal density
        let omitted = r#"{
            "footprint_mm": [24, 24],
            "interposer": {"material": "hbn", "thickness_um": 300},
            "hbm": {"total": 20, "per_layer": 5}
        }"#;
        let cfg = parse_config(omitted).unwrap();
        assert_eq!(cfg.stack.gpu_power, GpuPower::Density(100.0e4));
    }

    #[test]
    fn material_override_applies() {
        let text = r#"{
            "footprint_mm": [24, 24],
            "interposer": {"material": "hbn", "thickness_um": 300},
            "hbm": {"total": 20, "per_layer": 5},
            "gpu": {"tdp_w": 256},
            "materials": {"hbn": {"k_through": 5.0}, "silicon": {"k": 150.0}}
        }"#;
        let cfg = parse_config(text).unwrap();
        let hbn = cfg.library.get("hbn").unwrap();
        assert_eq!(hbn.k_zz, 5.0);
        assert_eq!(hbn.k_xx, 751.0);
        assert_eq!(cfg.library.get("silicon").unwrap().k_xx, 150.0);
    }

    #[test]
    fn new_material_requires_full_definition() {
        let text = r#"{
            "footprint_mm": [24, 24],
            "interposer": {"material": "aln", "thickness_um": 300},
            "hbm": {"total": 20, "per_layer": 5},
            "gpu": {"tdp_w": 256},
            "materials": {"aln": {"k": 285.0}}
        }"#;
        assert!(parse_config(text).is_err());
        let full = text.replace(
            "{\"k\": 285.0}",
            "{\"k\": 285.0, \"density\": 3260.0, \"cp\": 740.0}",
        );
        let cfg = parse_config(&full).unwrap();
        assert_eq!(cfg.stack.interposer_material, "aln");
        assert_eq!(cfg.library.get("aln").unwrap().k_xx, 285.0);
    }

    #[test]
    fn unresolved_material_reference_fails() {
        let text = MINIMAL.replace("\"hbn\"", "\"unobtainium\"");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("unobtainium"), "{err}");
    }

    #[test]
    fn sweep_family_resolution() {
        let text = r#"{
            "footprint_mm": [24, 24],
            "interposer": {"material": "hbn", "thickness_um": 300},
            "hbm": {"total": 20, "per_layer": 5},
            "gpu": {"tdp_w": 256},
            "sweep": {"family": "interposer_thickness"}
        }"#;
        let cfg = parse_config(text).unwrap();
        match cfg.sweep.unwrap() {
            SweepFamily::InterposerThickness { thicknesses_m } => {
                assert_eq!(thicknesses_m.len(), 8);
            }
            other => panic!("wrong family: {other:?}"),
        }
        let bad = text.replace("interposer_thickness", "sideways");
        assert!(parse_config(&bad).is_err());
    }

    #[test]
    fn out_of_band_h_top_warns() {
        let text = MINIMAL.replace(
            "\"gpu\": {\"tdp_w\": 256}",
            "\"gpu\": {\"tdp_w\": 256}, \"boundary\": {\"h_top\": 50}",
        );
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.warnings.len(), 1);
        assert!(cfg.warnings[0].contains("150"), "{}", cfg.warnings[0]);
    }

    #[test]
    fn emit_parse_round_trip() {
        let text = r#"{
            "footprint_mm": [20, 22],
            "interposer": {"material": "silicon", "thickness_um": 150},
            "hbm": {"total": 12, "per_layer": 4, "die_mm": [4.0, 3.0], "gap_mm": 1.5},
            "gpu": {"power_density_w_cm2": 80, "die_mm": [12, 12], "thickness_um": 400},
            "boundary": {"h_top": 200, "h_bottom": 12, "t_ambient": 298.15},
            "grid": {"cell_mm": 0.5, "cells_per_layer": 3},
            "solver": {"rel_tol": 1e-9},
            "sweep": {"family": "hbm_distribution", "total": 12}
        }"#;
        let first = parse_config(text).unwrap();
        let emitted = emit_config(&first);
        let second = parse_config(&emitted).unwrap();
        assert_eq!(first.raw, second.raw);
        assert_eq!(first.stack, second.stack);
        assert_eq!(first.grid, second.grid);
        assert_eq!(first.solver, second.solver);
    }

    #[test]
    fn builtin_family_configs_parse() {
        for (name, cfg) in builtin_family_configs() {
            let text = serde_json::to_string_pretty(&cfg).unwrap();
            let parsed = parse_config(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(parsed.sweep.is_some(), "{name} lost its sweep section");
        }
    }
}
