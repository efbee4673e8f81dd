//! Legacy-ASCII VTK structured-points export of temperature fields, plus the
//! minimal reader the `render` subcommand needs to load those files back.
//!
//! Cell centers are written as points, x varying fastest. The z spacing of
//! the stack grid is non-uniform, so the file records the mean spacing;
//! values and ordering are exact, the z geometry seen by viewers is
//! approximate.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use stacktherm_core::solve::TemperatureField;
use stacktherm_core::stack::VoxelModel;

use crate::error::{io_err, CliError, Result};

/// Renders the field as a legacy VTK structured-points document.
pub fn field_vtk(field: &TemperatureField, model: &VoxelModel) -> Result<String> {
    if field.values.len() != model.cell_count() {
        return Err(CliError::Usage(
            "field dimensions do not match the model".into(),
        ));
    }
    let (nx, ny, nz) = (model.nx, model.ny, model.nz);
    let dx = model.dx(0);
    let dy = model.dy(0);
    let dz_mean = (model.z_edges[nz] - model.z_edges[0]) / nz as f64;
    let origin = (
        0.5 * (model.x_edges[0] + model.x_edges[1]),
        0.5 * (model.y_edges[0] + model.y_edges[1]),
        0.5 * (model.z_edges[0] + model.z_edges[1]),
    );

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("temperature field\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET STRUCTURED_POINTS\n");
    writeln!(out, "DIMENSIONS {nx} {ny} {nz}").unwrap();
    writeln!(
        out,
        "ORIGIN {:.9e} {:.9e} {:.9e}",
        origin.0, origin.1, origin.2
    )
    .unwrap();
    writeln!(out, "SPACING {dx:.9e} {dy:.9e} {dz_mean:.9e}").unwrap();
    writeln!(out, "POINT_DATA {}", nx * ny * nz).unwrap();
    out.push_str("SCALARS temperature_K double\n");
    out.push_str("LOOKUP_TABLE default\n");
    for (i, v) in field.values.iter().enumerate() {
        out.push_str(&format!("{v:.9e}"));
        if (i + 1) % 6 == 0 {
            out.push('\n');
        } else {
            out.push(' ');
        }
    }
    if !out.ends_with('\n') {
        out.push('\n');
    }
    Ok(out)
}

pub fn write_field_vtk(field: &TemperatureField, model: &VoxelModel, path: &Path) -> Result<()> {
    let text = field_vtk(field, model)?;
    fs::write(path, text).map_err(io_err(path))
}

/// A scalar grid loaded back from one of our VTK files.
#[derive(Debug, Clone)]
pub struct VtkScalarGrid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub values: Vec<f64>,
}

/// Reads a legacy structured-points file written by `write_field_vtk`.
pub fn read_field_vtk(text: &str) -> Result<VtkScalarGrid> {
    let bad =
        |msg: &str| CliError::Usage(format!("not a readable VTK structured-points file: {msg}"));
    let mut dims: Option<(usize, usize, usize)> = None;
    let mut values = Vec::new();
    let mut in_data = false;
    for line in text.lines() {
        let trimmed = line.trim();
        if in_data {
            for tok in trimmed.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|_| bad("bad scalar value"))?);
            }
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("DIMENSIONS") {
            let parts: Vec<usize> = rest
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("bad DIMENSIONS"))?;
            if parts.len() != 3 {
                return Err(bad("DIMENSIONS needs three integers"));
            }
            dims = Some((parts[0], parts[1], parts[2]));
        } else if trimmed.starts_with("LOOKUP_TABLE") {
            in_data = true;
        }
    }
    let (nx, ny, nz) = dims.ok_or_else(|| bad("missing DIMENSIONS"))?;
    if values.len() != nx * ny * nz {
        return Err(bad(&format!(
            "expected {} values, found {}",
            nx * ny * nz,
            values.len()
        )));
    }
    Ok(VtkScalarGrid { nx, ny, nz, values })
}
