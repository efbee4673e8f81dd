//! Package geometry: layer ordering, HBM die placement, and voxelization of
//! the whole stack onto a structured grid.
//!
//! The stack is built bottom-to-top as substrate, then one (HBM tier,
//! interposer sheet) pair per memory layer, then the GPU die, a thermal
//! interface layer and the heat sink. Side walls are adiabatic; the top and
//! bottom surfaces exchange heat convectively.

use crate::error::{Error, Result};
use crate::materials::{effective_tsv_medium, Material, MaterialLibrary};

/// How the GPU power is specified: either a total dissipation or an areal
/// density over the die.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GpuPower {
    /// Total thermal design power, W.
    Tdp(f64),
    /// Areal power density over the die, W/m².
    Density(f64),
}

impl GpuPower {
    /// Total power for a die of the given plan dimensions, W.
    pub fn total_w(&self, die_x: f64, die_y: f64) -> f64 {
        match *self {
            GpuPower::Tdp(w) => w,
            GpuPower::Density(d) => d * die_x * die_y,
        }
    }
}

/// Spatial arrangement of the HBM dies.
#[derive(Debug, Clone, PartialEq)]
pub struct HbmDistribution {
    pub total_dies: usize,
    pub dies_per_layer: usize,
    pub n_layers: usize,
    /// Die plan dimensions, m.
    pub die_x: f64,
    pub die_y: f64,
    /// Clearance between neighbouring dies, m.
    pub gap: f64,
}

impl HbmDistribution {
    pub fn validate(&self) -> Result<()> {
        if self.dies_per_layer == 0 || self.n_layers == 0 {
            return Err(Error::Validation(
                "HBM distribution requires at least one die per layer and one layer".into(),
            ));
        }
        if self.dies_per_layer * self.n_layers != self.total_dies {
            return Err(Error::Validation(format!(
                "dies_per_layer ({}) × n_layers ({}) must equal total_dies ({})",
                self.dies_per_layer, self.n_layers, self.total_dies
            )));
        }
        if !(self.die_x > 0.0 && self.die_y > 0.0 && self.gap > 0.0) {
            return Err(Error::Validation(
                "HBM die dimensions and gap must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Role a layer plays in the stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Substrate,
    HbmTier,
    Interposer,
    Gpu,
    Tim,
    HeatSink,
}

impl LayerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LayerKind::Substrate => "substrate",
            LayerKind::HbmTier => "hbm_tier",
            LayerKind::Interposer => "interposer",
            LayerKind::Gpu => "gpu",
            LayerKind::Tim => "tim",
            LayerKind::HeatSink => "heat_sink",
        }
    }
}

/// One concrete layer of the expanded stack.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    pub kind: LayerKind,
    /// Layer thickness, m.
    pub thickness: f64,
    /// Base material name, resolved against the library at voxelization.
    pub material: String,
    /// Copper via volume fraction homogenized into the layer, if any.
    pub tsv_fraction: Option<f64>,
}

impl LayerSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.thickness > 0.0) {
            return Err(Error::Validation(format!(
                "{} layer thickness must be positive",
                self.kind.as_str()
            )));
        }
        if let Some(f) = self.tsv_fraction {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Validation(format!(
                    "{} layer TSV fraction {} outside [0, 1]",
                    self.kind.as_str(),
                    f
                )));
            }
        }
        Ok(())
    }
}

/// Declarative description of the whole package. All lengths in m,
/// powers in W, film coefficients in W/(m²·K), temperatures in K.
#[derive(Debug, Clone, PartialEq)]
pub struct StackSpec {
    pub footprint_x: f64,
    pub footprint_y: f64,
    pub hbm: HbmDistribution,
    pub interposer_material: String,
    pub interposer_thickness: f64,
    pub gpu_power: GpuPower,
    pub gpu_die_x: f64,
    pub gpu_die_y: f64,
    pub gpu_thickness: f64,
    pub gpu_material: String,
    pub hbm_tier_thickness: f64,
    pub hbm_die_material: String,
    pub fill_material: String,
    pub substrate_thickness: f64,
    pub substrate_material: String,
    pub tim_thickness: f64,
    pub tim_material: String,
    pub sink_thickness: f64,
    pub sink_material: String,
    /// Via fill fraction applied to HBM tiers and interposer sheets.
    pub tsv_fraction: f64,
    pub hbm_power_per_die_w: f64,
    pub h_top: f64,
    pub h_bottom: f64,
    pub t_ambient: f64,
}

impl StackSpec {
    /// Baseline package: 24×24 mm footprint, 16×16×0.5 mm GPU die powered at
    /// 100 W/cm², twenty 1 W HBM dies in a 5-dies × 4-layers arrangement
    /// under a 300 µm interposer, forced convection on top and natural
    /// convection underneath.
    pub fn default_package() -> Self {
        StackSpec {
            footprint_x: 24.0e-3,
            footprint_y: 24.0e-3,
            hbm: HbmDistribution {
                total_dies: 20,
                dies_per_layer: 5,
                n_layers: 4,
                die_x: 4.75e-3,
                die_y: 3.6e-3,
                gap: 1.0e-3,
            },
            interposer_material: "hbn".into(),
            interposer_thickness: 300.0e-6,
            gpu_power: GpuPower::Density(100.0e4), // 100 W/cm²
            gpu_die_x: 16.0e-3,
            gpu_die_y: 16.0e-3,
            gpu_thickness: 0.5e-3,
            gpu_material: "silicon".into(),
            hbm_tier_thickness: 0.3e-3,
            hbm_die_material: "silicon".into(),
            fill_material: "mold".into(),
            substrate_thickness: 1.0e-3,
            substrate_material: "organic_substrate".into(),
            tim_thickness: 0.05e-3,
            tim_material: "tim".into(),
            sink_thickness: 0.5e-3,
            sink_material: "copper".into(),
            tsv_fraction: crate::materials::DEFAULT_TSV_FRACTION,
            hbm_power_per_die_w: 1.0,
            h_top: 350.0,
            h_bottom: 10.0,
            t_ambient: 293.15,
        }
    }

    /// Total GPU power, W.
    pub fn gpu_power_w(&self) -> f64 {
        self.gpu_power.total_w(self.gpu_die_x, self.gpu_die_y)
    }

    /// Total configured dissipation (GPU + all HBM dies), W.
    pub fn total_power_w(&self) -> f64 {
        self.gpu_power_w() + self.hbm.total_dies as f64 * self.hbm_power_per_die_w
    }

    /// Checks the spec invariants. Returns non-fatal warnings (such as a film
    /// coefficient outside the usual forced-convection band).
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.footprint_x > 0.0 && self.footprint_y > 0.0) {
            return Err(Error::Validation("footprint must be positive".into()));
        }
        for (label, v) in [
            ("interposer thickness", self.interposer_thickness),
            ("gpu thickness", self.gpu_thickness),
            ("hbm tier thickness", self.hbm_tier_thickness),
            ("substrate thickness", self.substrate_thickness),
            ("tim thickness", self.tim_thickness),
            ("sink thickness", self.sink_thickness),
        ] {
            if !(v > 0.0) {
                return Err(Error::Validation(format!("{label} must be positive")));
            }
        }
        if !(self.h_bottom > 0.0) || !(self.h_top > 0.0) {
            return Err(Error::Validation(
                "film coefficients must be positive".into(),
            ));
        }
        if self.gpu_power_w() < 0.0 || self.hbm_power_per_die_w < 0.0 {
            return Err(Error::Validation("power must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.tsv_fraction) {
            return Err(Error::Validation("TSV fraction outside [0, 1]".into()));
        }
        self.hbm.validate()?;
        if self.gpu_die_x > self.footprint_x || self.gpu_die_y > self.footprint_y {
            return Err(Error::Geometry(format!(
                "GPU die ({} × {} mm) exceeds footprint ({} × {} mm)",
                self.gpu_die_x * 1e3,
                self.gpu_die_y * 1e3,
                self.footprint_x * 1e3,
                self.footprint_y * 1e3
            )));
        }

        let mut warnings = Vec::new();
        if !(150.0..=350.0).contains(&self.h_top) {
            warnings.push(format!(
                "h_top = {} W/(m²·K) is outside the usual 150–350 forced-convection band",
                self.h_top
            ));
        }
        Ok(warnings)
    }
}

/// Axis-aligned rectangle in footprint coordinates, m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn centered(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Rect {
            x0: cx - 0.5 * w,
            y0: cy - 0.5 * h,
            x1: cx + 0.5 * w,
            y1: cy + 0.5 * h,
        }
    }
}

/// Regular die placement for one HBM tier.
#[derive(Debug, Clone)]
pub struct HbmLayout {
    /// Die count along x (the smaller grid dimension).
    pub rows: usize,
    /// Die count along y.
    pub cols: usize,
    /// One rectangle per die, row-major (x index fastest).
    pub rects: Vec<Rect>,
}

/// Arranges `dies_per_layer` dies in a near-square grid centered in the
/// footprint: the x count is the largest divisor not exceeding the square
/// root, the y count its cofactor, and neighbouring dies keep `gap` spacing.
pub fn hbm_layout(
    dies_per_layer: usize,
    footprint: (f64, f64),
    die: (f64, f64),
    gap: f64,
) -> Result<HbmLayout> {
    if dies_per_layer == 0 {
        return Err(Error::Validation("need at least one die per layer".into()));
    }
    let rows = (1..=dies_per_layer)
        .filter(|d| dies_per_layer.is_multiple_of(*d))
        .filter(|&d| (d * d) <= dies_per_layer)
        .max()
        .unwrap_or(1);
    let cols = dies_per_layer / rows;

    let (die_x, die_y) = die;
    let span_x = rows as f64 * die_x + (rows - 1) as f64 * gap;
    let span_y = cols as f64 * die_y + (cols - 1) as f64 * gap;
    if span_x > footprint.0 {
        return Err(Error::Geometry(format!(
            "HBM grid extent along x ({:.3} mm for {} dies) exceeds footprint x ({:.3} mm)",
            span_x * 1e3,
            rows,
            footprint.0 * 1e3
        )));
    }
    if span_y > footprint.1 {
        return Err(Error::Geometry(format!(
            "HBM grid extent along y ({:.3} mm for {} dies) exceeds footprint y ({:.3} mm)",
            span_y * 1e3,
            cols,
            footprint.1 * 1e3
        )));
    }

    let origin_x = 0.5 * (footprint.0 - span_x);
    let origin_y = 0.5 * (footprint.1 - span_y);
    let mut rects = Vec::with_capacity(dies_per_layer);
    for j in 0..cols {
        for i in 0..rows {
            let x0 = origin_x + i as f64 * (die_x + gap);
            let y0 = origin_y + j as f64 * (die_y + gap);
            rects.push(Rect {
                x0,
                y0,
                x1: x0 + die_x,
                y1: y0 + die_y,
            });
        }
    }
    Ok(HbmLayout { rows, cols, rects })
}

/// Expands a stack spec into its ordered bottom-to-top layer list.
pub fn expand_stack(spec: &StackSpec) -> Result<Vec<LayerSpec>> {
    spec.hbm.validate()?;
    let tsv = if spec.tsv_fraction > 0.0 {
        Some(spec.tsv_fraction)
    } else {
        None
    };
    let mut layers = Vec::with_capacity(3 + 2 * spec.hbm.n_layers + 2);
    layers.push(LayerSpec {
        kind: LayerKind::Substrate,
        thickness: spec.substrate_thickness,
        material: spec.substrate_material.clone(),
        tsv_fraction: None,
    });
    for _ in 0..spec.hbm.n_layers {
        layers.push(LayerSpec {
            kind: LayerKind::HbmTier,
            thickness: spec.hbm_tier_thickness,
            material: spec.hbm_die_material.clone(),
            tsv_fraction: tsv,
        });
        layers.push(LayerSpec {
            kind: LayerKind::Interposer,
            thickness: spec.interposer_thickness,
            material: spec.interposer_material.clone(),
            tsv_fraction: tsv,
        });
    }
    layers.push(LayerSpec {
        kind: LayerKind::Gpu,
        thickness: spec.gpu_thickness,
        material: spec.gpu_material.clone(),
        tsv_fraction: None,
    });
    layers.push(LayerSpec {
        kind: LayerKind::Tim,
        thickness: spec.tim_thickness,
        material: spec.tim_material.clone(),
        tsv_fraction: None,
    });
    layers.push(LayerSpec {
        kind: LayerKind::HeatSink,
        thickness: spec.sink_thickness,
        material: spec.sink_material.clone(),
        tsv_fraction: None,
    });
    for l in &layers {
        l.validate()?;
    }
    Ok(layers)
}

/// Grid resolution request for voxelization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    /// Target in-plane cell edge, m.
    pub target_cell: f64,
    /// Minimum cell count across each layer's thickness.
    pub cells_per_layer: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            target_cell: 0.25e-3,
            cells_per_layer: 2,
        }
    }
}

/// One z-slab of the voxel grid with its resolved material and the layer it
/// came from.
#[derive(Debug, Clone)]
pub struct ConcreteLayer {
    pub kind: LayerKind,
    pub material: String,
    pub z0: f64,
    pub z1: f64,
}

/// Structured rectilinear voxel grid with per-cell material ids and power
/// densities. Cell index is `ix + nx·(iy + ny·iz)` (x fastest).
#[derive(Debug, Clone)]
pub struct VoxelModel {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Cell edge coordinates, lengths nx+1 / ny+1 / nz+1, m.
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    pub z_edges: Vec<f64>,
    /// Material palette; `material_id` indexes into it.
    pub materials: Vec<Material>,
    pub material_id: Vec<u32>,
    /// Volumetric heating per cell, W/m³.
    pub power_density: Vec<f64>,
    /// Layer index per z cell.
    pub z_layer: Vec<usize>,
    pub layers: Vec<ConcreteLayer>,
    pub h_top: f64,
    pub h_bottom: f64,
    pub t_ambient: f64,
}

impl VoxelModel {
    pub fn cell_count(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.nx * (iy + self.ny * iz)
    }

    /// Inverse of `index`.
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let ix = idx % self.nx;
        let iy = (idx / self.nx) % self.ny;
        let iz = idx / (self.nx * self.ny);
        (ix, iy, iz)
    }

    #[inline]
    pub fn dx(&self, ix: usize) -> f64 {
        self.x_edges[ix + 1] - self.x_edges[ix]
    }

    #[inline]
    pub fn dy(&self, iy: usize) -> f64 {
        self.y_edges[iy + 1] - self.y_edges[iy]
    }

    #[inline]
    pub fn dz(&self, iz: usize) -> f64 {
        self.z_edges[iz + 1] - self.z_edges[iz]
    }

    pub fn cell_volume(&self, idx: usize) -> f64 {
        let (ix, iy, iz) = self.coords(idx);
        self.dx(ix) * self.dy(iy) * self.dz(iz)
    }

    #[inline]
    pub fn material(&self, idx: usize) -> &Material {
        &self.materials[self.material_id[idx] as usize]
    }

    /// Σ q̇·V over all cells, W.
    pub fn total_power(&self) -> f64 {
        let mut sum = 0.0;
        for iz in 0..self.nz {
            let dz = self.dz(iz);
            for iy in 0..self.ny {
                let dy = self.dy(iy);
                for ix in 0..self.nx {
                    let idx = self.index(ix, iy, iz);
                    sum += self.power_density[idx] * self.dx(ix) * dy * dz;
                }
            }
        }
        sum
    }

    /// Indices of all cells inside layers of the given kind.
    pub fn layer_cells(&self, kind: LayerKind) -> Vec<usize> {
        let mut out = Vec::new();
        for iz in 0..self.nz {
            if self.layers[self.z_layer[iz]].kind != kind {
                continue;
            }
            for iy in 0..self.ny {
                for ix in 0..self.nx {
                    out.push(self.index(ix, iy, iz));
                }
            }
        }
        out
    }

    /// Indices of the powered GPU die cells.
    pub fn gpu_die_cells(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for iz in 0..self.nz {
            if self.layers[self.z_layer[iz]].kind != LayerKind::Gpu {
                continue;
            }
            for iy in 0..self.ny {
                for ix in 0..self.nx {
                    let idx = self.index(ix, iy, iz);
                    if self.power_density[idx] > 0.0 {
                        out.push(idx);
                    }
                }
            }
        }
        // an unpowered GPU still has a die region: fall back to the full layer
        if out.is_empty() {
            out = self.layer_cells(LayerKind::Gpu);
        }
        out
    }

    /// Returns a copy with every power density multiplied by `factor`.
    pub fn with_scaled_power(&self, factor: f64) -> VoxelModel {
        let mut out = self.clone();
        for q in &mut out.power_density {
            *q *= factor;
        }
        out
    }
}

fn intern(palette: &mut Vec<Material>, material: &Material) -> u32 {
    if let Some(pos) = palette.iter().position(|m| m == material) {
        return pos as u32;
    }
    palette.push(material.clone());
    (palette.len() - 1) as u32
}

/// Discretizes the stack onto a rectilinear grid. Every layer boundary falls
/// exactly on a z plane and each layer holds at least `cells_per_layer`
/// cells; cells take the material found at their center.
pub fn voxelize(spec: &StackSpec, lib: &MaterialLibrary, grid: &GridOptions) -> Result<VoxelModel> {
    spec.validate()?;
    if !(grid.target_cell > 0.0) || grid.cells_per_layer == 0 {
        return Err(Error::Validation(
            "grid needs a positive cell size and at least one cell per layer".into(),
        ));
    }

    // The in-plane grid must resolve the narrowest feature, otherwise dies
    // merge with their neighbours or vanish entirely.
    let min_feature = spec.hbm.gap.min(spec.hbm.die_x).min(spec.hbm.die_y);
    if grid.target_cell > min_feature {
        return Err(Error::Refinement {
            message: format!(
                "in-plane cell {:.3e} m larger than the smallest feature {:.3e} m (die gap / die edge)",
                grid.target_cell, min_feature
            ),
            suggested_cell_m: 0.5 * min_feature,
        });
    }

    let layers_spec = expand_stack(spec)?;
    let copper = lib.get("copper")?.clone();

    let nx = (spec.footprint_x / grid.target_cell).ceil().max(1.0) as usize;
    let ny = (spec.footprint_y / grid.target_cell).ceil().max(1.0) as usize;
    let x_edges: Vec<f64> = (0..=nx)
        .map(|i| spec.footprint_x * i as f64 / nx as f64)
        .collect();
    let y_edges: Vec<f64> = (0..=ny)
        .map(|j| spec.footprint_y * j as f64 / ny as f64)
        .collect();

    // z planes on every layer boundary, cells_per_layer uniform cells inside
    let mut z_edges = vec![0.0];
    let mut z_layer = Vec::new();
    let mut layers = Vec::with_capacity(layers_spec.len());
    let mut z0 = 0.0;
    for (li, layer) in layers_spec.iter().enumerate() {
        let m = grid.cells_per_layer;
        for c in 1..=m {
            z_edges.push(z0 + layer.thickness * c as f64 / m as f64);
            z_layer.push(li);
        }
        layers.push(ConcreteLayer {
            kind: layer.kind,
            material: layer.material.clone(),
            z0,
            z1: z0 + layer.thickness,
        });
        z0 += layer.thickness;
    }
    let nz = z_layer.len();

    // Per-layer material ids. A layer with a TSV fraction is homogenized
    // across its whole footprint: the via/microbump field runs through the
    // inter-die fill as much as through the dies.
    let mut palette: Vec<Material> = Vec::new();
    let plain_fill = lib.get(&spec.fill_material)?.clone();
    let fill_id = intern(&mut palette, &plain_fill);
    let mut layer_mat_id = Vec::with_capacity(layers_spec.len());
    let mut layer_fill_id = Vec::with_capacity(layers_spec.len());
    for layer in &layers_spec {
        let base = lib.get(&layer.material)?.clone();
        let (resolved, resolved_fill) = match layer.tsv_fraction {
            Some(f) if f > 0.0 => (
                effective_tsv_medium(&base, &copper, f)?,
                effective_tsv_medium(&plain_fill, &copper, f)?,
            ),
            _ => (base, plain_fill.clone()),
        };
        layer_mat_id.push(intern(&mut palette, &resolved));
        layer_fill_id.push(intern(&mut palette, &resolved_fill));
    }

    let layout = hbm_layout(
        spec.hbm.dies_per_layer,
        (spec.footprint_x, spec.footprint_y),
        (spec.hbm.die_x, spec.hbm.die_y),
        spec.hbm.gap,
    )?;
    let gpu_rect = Rect::centered(
        0.5 * spec.footprint_x,
        0.5 * spec.footprint_y,
        spec.gpu_die_x,
        spec.gpu_die_y,
    );

    let n = nx * ny * nz;
    let mut material_id = vec![0u32; n];
    let mut power_density = vec![0.0f64; n];

    let xc: Vec<f64> = (0..nx)
        .map(|i| 0.5 * (x_edges[i] + x_edges[i + 1]))
        .collect();
    let yc: Vec<f64> = (0..ny)
        .map(|j| 0.5 * (y_edges[j] + y_edges[j + 1]))
        .collect();

    // Track covered volumes so each power source is conserved exactly.
    let mut gpu_cells: Vec<usize> = Vec::new();
    let mut gpu_volume = 0.0;
    let mut die_cells: Vec<Vec<usize>> = vec![Vec::new(); layout.rects.len() * spec.hbm.n_layers];
    let mut die_volume = vec![0.0f64; die_cells.len()];

    for iz in 0..nz {
        let li = z_layer[iz];
        let layer = &layers_spec[li];
        let dz = z_edges[iz + 1] - z_edges[iz];
        // which HBM tier (counted from the bottom) this z slice belongs to
        let tier_index = if layer.kind == LayerKind::HbmTier {
            Some(
                layers_spec[..li]
                    .iter()
                    .filter(|l| l.kind == LayerKind::HbmTier)
                    .count(),
            )
        } else {
            None
        };

        for iy in 0..ny {
            let dy = y_edges[iy + 1] - y_edges[iy];
            for ix in 0..nx {
                let idx = ix + nx * (iy + ny * iz);
                let vol = (x_edges[ix + 1] - x_edges[ix]) * dy * dz;
                match layer.kind {
                    LayerKind::HbmTier => {
                        let die = layout.rects.iter().position(|r| r.contains(xc[ix], yc[iy]));
                        match die {
                            Some(d) => {
                                material_id[idx] = layer_mat_id[li];
                                let slot = tier_index.unwrap() * layout.rects.len() + d;
                                die_cells[slot].push(idx);
                                die_volume[slot] += vol;
                            }
                            None => material_id[idx] = layer_fill_id[li],
                        }
                    }
                    LayerKind::Gpu => {
                        if gpu_rect.contains(xc[ix], yc[iy]) {
                            material_id[idx] = layer_mat_id[li];
                            gpu_cells.push(idx);
                            gpu_volume += vol;
                        } else {
                            material_id[idx] = fill_id;
                        }
                    }
                    _ => material_id[idx] = layer_mat_id[li],
                }
            }
        }
    }

    // Power assignment, normalized over the covered volume so the configured
    // totals are conserved under any resolution.
    let gpu_w = spec.gpu_power_w();
    if gpu_w > 0.0 {
        if gpu_cells.is_empty() {
            return Err(Error::Refinement {
                message: "GPU die not resolved by any cell center".into(),
                suggested_cell_m: 0.5 * spec.gpu_die_x.min(spec.gpu_die_y),
            });
        }
        let q = gpu_w / gpu_volume;
        for &idx in &gpu_cells {
            power_density[idx] = q;
        }
    }
    if spec.hbm_power_per_die_w > 0.0 {
        for (slot, cells) in die_cells.iter().enumerate() {
            if cells.is_empty() {
                return Err(Error::Refinement {
                    message: format!(
                        "HBM die {} not resolved by any cell center",
                        slot % layout.rects.len()
                    ),
                    suggested_cell_m: 0.5 * min_feature,
                });
            }
            let q = spec.hbm_power_per_die_w / die_volume[slot];
            for &idx in cells {
                power_density[idx] = q;
            }
        }
    }

    Ok(VoxelModel {
        nx,
        ny,
        nz,
        x_edges,
        y_edges,
        z_edges,
        materials: palette,
        material_id,
        power_density,
        z_layer,
        layers,
        h_top: spec.h_top,
        h_bottom: spec.h_bottom,
        t_ambient: spec.t_ambient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::builtin_library;

    #[test]
    fn layout_grid_shapes() {
        let fp = (0.1, 0.1);
        let die = (4.75e-3, 3.6e-3);
        let l20 = hbm_layout(20, fp, die, 1e-3).unwrap();
        assert_eq!((l20.rows, l20.cols), (4, 5));
        let l7 = hbm_layout(7, fp, die, 1e-3).unwrap();
        assert_eq!((l7.rows, l7.cols), (1, 7));
        let l1 = hbm_layout(1, fp, die, 1e-3).unwrap();
        assert_eq!((l1.rows, l1.cols), (1, 1));
        // single die is centered
        let r = &l1.rects[0];
        assert!((0.5 * (r.x0 + r.x1) - 0.05).abs() < 1e-12);
        assert!((0.5 * (r.y0 + r.y1) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn layout_rects_disjoint_and_inside() {
        for dies in [1, 2, 4, 5, 10, 20] {
            let spec = StackSpec::default_package();
            let l = hbm_layout(
                dies,
                (spec.footprint_x, spec.footprint_y),
                (spec.hbm.die_x, spec.hbm.die_y),
                spec.hbm.gap,
            )
            .unwrap();
            assert_eq!(l.rects.len(), dies);
            for (i, a) in l.rects.iter().enumerate() {
                assert!(a.x0 >= -1e-15 && a.y0 >= -1e-15);
                assert!(a.x1 <= spec.footprint_x + 1e-15 && a.y1 <= spec.footprint_y + 1e-15);
                for b in &l.rects[i + 1..] {
                    let overlap_x = a.x0 < b.x1 && b.x0 < a.x1;
                    let overlap_y = a.y0 < b.y1 && b.y0 < a.y1;
                    assert!(!(overlap_x && overlap_y), "dies overlap");
                }
            }
        }
    }

    #[test]
    fn layout_reports_violating_dimension() {
        // 7 dies in a 1×7 column need 31.2 mm of footprint along y
        let spec = StackSpec::default_package();
        let err = hbm_layout(
            7,
            (spec.footprint_x, spec.footprint_y),
            (spec.hbm.die_x, spec.hbm.die_y),
            spec.hbm.gap,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("along y"), "message was: {msg}");
    }

    #[test]
    fn expand_minimal_stack() {
        let mut spec = StackSpec::default_package();
        spec.hbm.n_layers = 1;
        spec.hbm.dies_per_layer = 20;
        let layers = expand_stack(&spec).unwrap();
        let kinds: Vec<LayerKind> = layers.iter().map(|l| l.kind).collect();
        assert_eq!(
            kinds,
            vec![
                LayerKind::Substrate,
                LayerKind::HbmTier,
                LayerKind::Interposer,
                LayerKind::Gpu,
                LayerKind::Tim,
                LayerKind::HeatSink,
            ]
        );
    }

    #[test]
    fn expand_counts_interposers_per_tier() {
        let spec = StackSpec::default_package(); // 5 dies × 4 layers
        let layers = expand_stack(&spec).unwrap();
        let n_interp = layers
            .iter()
            .filter(|l| l.kind == LayerKind::Interposer)
            .count();
        assert_eq!(n_interp, 4);

        let mut tall = StackSpec::default_package();
        tall.hbm.dies_per_layer = 1;
        tall.hbm.n_layers = 20;
        let layers = expand_stack(&tall).unwrap();
        let tiers = layers
            .iter()
            .filter(|l| l.kind == LayerKind::HbmTier)
            .count();
        let interps = layers
            .iter()
            .filter(|l| l.kind == LayerKind::Interposer)
            .count();
        assert_eq!((tiers, interps), (20, 20));

        let total: f64 = layers.iter().map(|l| l.thickness).sum();
        let expected = tall.substrate_thickness
            + 20.0 * (tall.hbm_tier_thickness + tall.interposer_thickness)
            + tall.gpu_thickness
            + tall.tim_thickness
            + tall.sink_thickness;
        assert!((total - expected).abs() < 1e-12);
    }

    #[test]
    fn expand_rejects_bad_distribution() {
        let mut spec = StackSpec::default_package();
        spec.hbm.dies_per_layer = 6; // 6 × 4 ≠ 20
        assert!(matches!(expand_stack(&spec), Err(Error::Validation(_))));
    }

    #[test]
    fn voxelize_unpowered_stack_has_zero_sources() {
        let mut spec = StackSpec::default_package();
        spec.gpu_power = GpuPower::Tdp(0.0);
        spec.hbm_power_per_die_w = 0.0;
        let model = voxelize(&spec, &builtin_library(), &GridOptions::default()).unwrap();
        assert!(model.power_density.iter().all(|&q| q == 0.0));
        assert_eq!(model.total_power(), 0.0);
    }

    #[test]
    fn gpu_power_density_conversion() {
        // 100 W/cm² through a 0.5 mm die → 2·10⁹ W/m³
        let spec = StackSpec::default_package();
        let model = voxelize(&spec, &builtin_library(), &GridOptions::default()).unwrap();
        let gpu = model.gpu_die_cells();
        assert!(!gpu.is_empty());
        for &idx in &gpu {
            let q = model.power_density[idx];
            assert!(
                (q - 2.0e9).abs() / 2.0e9 < 1e-9,
                "expected 2e9 W/m³, got {q}"
            );
        }
    }

    #[test]
    fn power_conserved_under_refinement() {
        let spec = StackSpec::default_package();
        let lib = builtin_library();
        let configured = spec.total_power_w();
        for (cell, cpl) in [(1.0e-3, 1), (0.5e-3, 2), (0.25e-3, 3)] {
            let model = voxelize(
                &spec,
                &lib,
                &GridOptions {
                    target_cell: cell,
                    cells_per_layer: cpl,
                },
            )
            .unwrap();
            let total = model.total_power();
            assert!(
                ((total - configured) / configured).abs() < 1e-9,
                "cell {cell}: {total} vs {configured}"
            );
        }
    }

    #[test]
    fn z_planes_align_with_layer_boundaries() {
        let spec = StackSpec::default_package();
        let model = voxelize(&spec, &builtin_library(), &GridOptions::default()).unwrap();
        for layer in &model.layers {
            let z0_hit = model.z_edges.iter().any(|&z| (z - layer.z0).abs() < 1e-15);
            let z1_hit = model.z_edges.iter().any(|&z| (z - layer.z1).abs() < 1e-15);
            assert!(z0_hit && z1_hit, "layer boundary missing from z grid");
        }
        // every z cell lies wholly inside its layer
        for iz in 0..model.nz {
            let l = &model.layers[model.z_layer[iz]];
            assert!(model.z_edges[iz] >= l.z0 - 1e-15);
            assert!(model.z_edges[iz + 1] <= l.z1 + 1e-15);
        }
    }

    #[test]
    fn voxelization_is_deterministic() {
        let spec = StackSpec::default_package();
        let lib = builtin_library();
        let a = voxelize(&spec, &lib, &GridOptions::default()).unwrap();
        let b = voxelize(&spec, &lib, &GridOptions::default()).unwrap();
        assert_eq!(a.material_id, b.material_id);
        assert_eq!(a.power_density, b.power_density);
    }

    #[test]
    fn coarse_grid_is_rejected_with_suggestion() {
        let spec = StackSpec::default_package();
        let err = voxelize(
            &spec,
            &builtin_library(),
            &GridOptions {
                target_cell: 2.0e-3, // larger than the 1 mm die gap
                cells_per_layer: 1,
            },
        )
        .unwrap_err();
        match err {
            Error::Refinement {
                suggested_cell_m, ..
            } => assert!(suggested_cell_m <= spec.hbm.gap),
            other => panic!("expected refinement error, got {other}"),
        }
    }

    #[test]
    fn scaled_power_scales_sources_only() {
        let spec = StackSpec::default_package();
        let model = voxelize(&spec, &builtin_library(), &GridOptions::default()).unwrap();
        let doubled = model.with_scaled_power(2.0);
        assert_eq!(model.material_id, doubled.material_id);
        let ratio = doubled.total_power() / model.total_power();
        assert!((ratio - 2.0).abs() < 1e-12);
    }
}
