//! Thermophysical material data and effective media for via-filled regions.
//!
//! Conductivities are stored as a diagonal tensor (k_xx, k_yy, k_zz) so that
//! strongly anisotropic sheets such as hexagonal boron nitride (in-plane
//! 751 W/m·K, through-plane 20 W/m·K) sit next to isotropic bulk materials
//! in the same library.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// One material record. Conductivities in W/(m·K), density in kg/m³,
/// specific heat in J/(kg·K), thermal expansion in 1/K.
///
/// The expansion coefficient is carried along for completeness; no solver in
/// this crate consumes it.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    pub k_xx: f64,
    pub k_yy: f64,
    pub k_zz: f64,
    pub density: f64,
    pub cp: f64,
    pub cte: f64,
}

impl Material {
    /// Isotropic material: one conductivity for all three axes.
    pub fn isotropic(name: &str, k: f64, density: f64, cp: f64, cte: f64) -> Self {
        Self {
            name: name.to_string(),
            k_xx: k,
            k_yy: k,
            k_zz: k,
            density,
            cp,
            cte,
        }
    }

    /// Transversely isotropic sheet: equal in-plane conductivity, independent
    /// through-plane value.
    pub fn anisotropic_sheet(
        name: &str,
        k_inplane: f64,
        k_through: f64,
        density: f64,
        cp: f64,
        cte: f64,
    ) -> Self {
        Self {
            name: name.to_string(),
            k_xx: k_inplane,
            k_yy: k_inplane,
            k_zz: k_through,
            density,
            cp,
            cte,
        }
    }

    /// Checks positivity of every transport property.
    pub fn validate(&self) -> Result<()> {
        for (label, v) in [
            ("k_xx", self.k_xx),
            ("k_yy", self.k_yy),
            ("k_zz", self.k_zz),
            ("density", self.density),
            ("cp", self.cp),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!(
                    "material '{}': {} must be positive and finite, got {}",
                    self.name, label, v
                )));
            }
        }
        Ok(())
    }

    /// Volumetric heat capacity ρ·cp, J/(m³·K).
    pub fn volumetric_heat_capacity(&self) -> f64 {
        self.density * self.cp
    }

    pub fn is_isotropic(&self) -> bool {
        self.k_xx == self.k_yy && self.k_yy == self.k_zz
    }
}

/// Named collection of materials. Immutable once built; shared freely across
/// concurrent solves.
#[derive(Debug, Clone, Default)]
pub struct MaterialLibrary {
    by_name: BTreeMap<String, Material>,
}

impl MaterialLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces a material after validating it.
    pub fn insert(&mut self, material: Material) -> Result<()> {
        material.validate()?;
        self.by_name.insert(material.name.clone(), material);
        Ok(())
    }

    /// Looks a material up by name. `si` is accepted as a shorthand for
    /// `silicon`.
    pub fn get(&self, name: &str) -> Result<&Material> {
        let key = if name == "si" { "silicon" } else { name };
        self.by_name.get(key).ok_or_else(|| {
            Error::Validation(format!(
                "unknown material '{}' (available: {})",
                name,
                self.names().join(", ")
            ))
        })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_ok()
    }

    pub fn names(&self) -> Vec<String> {
        self.by_name.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Material> {
        self.by_name.values()
    }
}

/// Default volume fraction of copper vias inside HBM tiers and interposer
/// sheets.
pub const DEFAULT_TSV_FRACTION: f64 = 0.05;

/// Builds the library of package materials used by the default stack.
///
/// Silicon is pinned at the middle of its usual 130–150 W/m·K bulk range and
/// the boron-nitride through-plane value at the top of its reported 2–20
/// W/m·K spread; both can be overridden through the run configuration.
pub fn builtin_library() -> MaterialLibrary {
    let mut lib = MaterialLibrary::new();
    let entries = [
        Material::anisotropic_sheet("hbn", 751.0, 20.0, 2100.0, 800.0, 2.5e-6),
        Material::isotropic("silicon", 140.0, 2329.0, 700.0, 2.6e-6),
        Material::isotropic("copper", 400.0, 8960.0, 385.0, 1.7e-5),
        Material::isotropic("tim", 5.0, 2500.0, 1000.0, 3.0e-5),
        Material::isotropic("mold", 1.0, 1900.0, 900.0, 1.0e-5),
        Material::isotropic("organic_substrate", 0.5, 1850.0, 1000.0, 1.5e-5),
    ];
    for m in entries {
        lib.insert(m).expect("builtin materials are valid");
    }
    // Precomputed via-filled media at the default fill fraction, so the
    // library names every material a default stack can reference.
    let copper = lib.get("copper").unwrap().clone();
    for base in ["silicon", "hbn"] {
        let matrix = lib.get(base).unwrap().clone();
        let mut eff = effective_tsv_medium(&matrix, &copper, DEFAULT_TSV_FRACTION)
            .expect("default fraction is in range");
        eff.name = format!("tsv_region_{base}");
        lib.insert(eff).expect("homogenized materials are valid");
    }
    lib
}

/// Homogenizes a via-filled region of `matrix` material with cylindrical
/// `via` inclusions occupying `volume_fraction` of the volume.
///
/// Along the via axis the two phases conduct in parallel,
/// `k_zz = φ·k_via + (1−φ)·k_matrix`. In the plane the vias act as dilute
/// inclusions and the Maxwell–Eucken bound applies:
///
/// ```text
/// k_in = k_m · (k_v(1+φ) + k_m(1−φ)) / (k_v(1−φ) + k_m(1+φ))
/// ```
///
/// Density and heat capacity mix by volume fraction.
pub fn effective_tsv_medium(
    matrix: &Material,
    via: &Material,
    volume_fraction: f64,
) -> Result<Material> {
    if !(0.0..=1.0).contains(&volume_fraction) || !volume_fraction.is_finite() {
        return Err(Error::Domain(format!(
            "TSV volume fraction must lie in [0, 1], got {volume_fraction}"
        )));
    }
    matrix.validate()?;
    via.validate()?;
    let phi = volume_fraction;
    if phi == 0.0 {
        return Ok(matrix.clone());
    }
    if phi == 1.0 {
        return Ok(via.clone());
    }

    let k_zz = phi * via.k_zz + (1.0 - phi) * matrix.k_zz;
    let maxwell_eucken = |k_m: f64, k_v: f64| -> f64 {
        k_m * (k_v * (1.0 + phi) + k_m * (1.0 - phi)) / (k_v * (1.0 - phi) + k_m * (1.0 + phi))
    };
    let k_xx = maxwell_eucken(matrix.k_xx, via.k_xx);
    let k_yy = maxwell_eucken(matrix.k_yy, via.k_yy);

    Ok(Material {
        name: format!("{}+{}@{:.3}", matrix.name, via.name, phi),
        k_xx,
        k_yy,
        k_zz,
        density: phi * via.density + (1.0 - phi) * matrix.density,
        cp: phi * via.cp + (1.0 - phi) * matrix.cp,
        cte: phi * via.cte + (1.0 - phi) * matrix.cte,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_values() {
        let lib = builtin_library();
        let hbn = lib.get("hbn").unwrap();
        assert_eq!(hbn.k_xx, 751.0);
        assert_eq!(hbn.k_yy, 751.0);
        assert_eq!(hbn.k_zz, 20.0);
        assert_eq!(hbn.cp, 800.0);

        let si = lib.get("silicon").unwrap();
        assert!(si.is_isotropic());
        assert_eq!(si.k_xx, 140.0);
        assert_eq!(si.cp, 700.0);
    }

    #[test]
    fn builtin_names_complete() {
        let lib = builtin_library();
        for name in [
            "hbn",
            "silicon",
            "copper",
            "tim",
            "mold",
            "organic_substrate",
            "tsv_region_silicon",
            "tsv_region_hbn",
        ] {
            assert!(lib.contains(name), "missing builtin material {name}");
        }
        // shorthand lookup
        assert_eq!(lib.get("si").unwrap().name, "silicon");
    }

    #[test]
    fn builtin_materials_satisfy_invariants() {
        for m in builtin_library().iter() {
            m.validate().unwrap();
        }
    }

    #[test]
    fn tsv_medium_endpoints() {
        let lib = builtin_library();
        let si = lib.get("silicon").unwrap();
        let cu = lib.get("copper").unwrap();

        let zero = effective_tsv_medium(si, cu, 0.0).unwrap();
        assert_eq!(zero.k_xx, si.k_xx);
        assert_eq!(zero.k_zz, si.k_zz);
        assert_eq!(zero.density, si.density);

        let one = effective_tsv_medium(si, cu, 1.0).unwrap();
        assert_eq!(one.k_zz, cu.k_zz);
        assert_eq!(one.cp, cu.cp);
    }

    #[test]
    fn tsv_medium_parallel_rule_along_via() {
        let lib = builtin_library();
        let si = lib.get("silicon").unwrap();
        let cu = lib.get("copper").unwrap();
        let eff = effective_tsv_medium(si, cu, 0.1).unwrap();
        // 0.1·400 + 0.9·140
        assert!((eff.k_zz - 166.0).abs() < 1e-12, "k_zz = {}", eff.k_zz);
    }

    #[test]
    fn tsv_medium_monotone_and_bounded() {
        let lib = builtin_library();
        let si = lib.get("silicon").unwrap();
        let cu = lib.get("copper").unwrap();
        let mut prev: Option<Material> = None;
        for step in 0..=100 {
            let phi = step as f64 / 100.0;
            let eff = effective_tsv_medium(si, cu, phi).unwrap();
            let (lo_z, hi_z) = (si.k_zz.min(cu.k_zz), si.k_zz.max(cu.k_zz));
            let (lo_x, hi_x) = (si.k_xx.min(cu.k_xx), si.k_xx.max(cu.k_xx));
            assert!(eff.k_zz >= lo_z - 1e-12 && eff.k_zz <= hi_z + 1e-12);
            assert!(eff.k_xx >= lo_x - 1e-12 && eff.k_xx <= hi_x + 1e-12);
            if let Some(p) = prev {
                // k_via > k_matrix here, so every component must grow with fill
                assert!(eff.k_zz >= p.k_zz);
                assert!(eff.k_xx >= p.k_xx);
                assert!(eff.k_yy >= p.k_yy);
            }
            prev = Some(eff);
        }
    }

    #[test]
    fn tsv_medium_rejects_bad_fraction() {
        let lib = builtin_library();
        let si = lib.get("silicon").unwrap();
        let cu = lib.get("copper").unwrap();
        assert!(effective_tsv_medium(si, cu, -0.01).is_err());
        assert!(effective_tsv_medium(si, cu, 1.01).is_err());
        assert!(effective_tsv_medium(si, cu, f64::NAN).is_err());
    }

    #[test]
    fn invalid_material_rejected() {
        let bad = Material::isotropic("broken", -1.0, 1000.0, 700.0, 0.0);
        assert!(bad.validate().is_err());
        let mut lib = MaterialLibrary::new();
        assert!(lib.insert(bad).is_err());
    }
}
