//! Grayscale slice rendering: one binary PGM (P5) pixel per cell, intensity
//! linear in temperature between a configured minimum and maximum.

use std::fs;
use std::path::Path;

use crate::error::{io_err, CliError, Result};
use crate::vtk::VtkScalarGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl std::str::FromStr for Axis {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(CliError::Usage(format!(
                "axis must be x, y or z, got '{other}'"
            ))),
        }
    }
}

type CellFetch<'a> = Box<dyn Fn(usize, usize) -> f64 + 'a>;

/// Extracts a slice normal to `axis` at `index` and maps it to 8-bit gray,
/// `255·clamp((T − t_min)/(t_max − t_min))`. Row order follows the second
/// slice coordinate (y for z slices, z otherwise), first row first.
pub fn render_slice_pgm(
    grid: &VtkScalarGrid,
    axis: Axis,
    index: usize,
    t_min: f64,
    t_max: f64,
) -> Result<Vec<u8>> {
    if !(t_max > t_min) {
        return Err(CliError::Usage(format!(
            "degenerate gray range: t_min {t_min} must be below t_max {t_max}"
        )));
    }
    let (nx, ny, nz) = (grid.nx, grid.ny, grid.nz);
    let (width, height, fetch): (usize, usize, CellFetch) = match axis {
        Axis::Z => {
            if index >= nz {
                return Err(CliError::Usage(format!("z index {index} out of 0..{nz}")));
            }
            (
                nx,
                ny,
                Box::new(move |col, row| grid.values[col + nx * (row + ny * index)]),
            )
        }
        Axis::Y => {
            if index >= ny {
                return Err(CliError::Usage(format!("y index {index} out of 0..{ny}")));
            }
            (
                nx,
                nz,
                Box::new(move |col, row| grid.values[col + nx * (index + ny * row)]),
            )
        }
        Axis::X => {
            if index >= nx {
                return Err(CliError::Usage(format!("x index {index} out of 0..{nx}")));
            }
            (
                ny,
                nz,
                Box::new(move |col, row| grid.values[index + nx * (col + ny * row)]),
            )
        }
    };

    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.reserve(width * height);
    for row in 0..height {
        for col in 0..width {
            let t = fetch(col, row);
            let s = ((t - t_min) / (t_max - t_min)).clamp(0.0, 1.0);
            out.push((s * 255.0).round() as u8);
        }
    }
    Ok(out)
}

pub fn write_slice_pgm(
    grid: &VtkScalarGrid,
    axis: Axis,
    index: usize,
    t_min: f64,
    t_max: f64,
    path: &Path,
) -> Result<()> {
    let bytes = render_slice_pgm(grid, axis, index, t_min, t_max)?;
    fs::write(path, bytes).map_err(io_err(path))
}

/// Splits a P5 document into ((width, height), pixels). Test support.
pub fn parse_pgm(bytes: &[u8]) -> Result<((usize, usize), Vec<u8>)> {
    let text_end = bytes
        .windows(4)
        .position(|w| w == b"255\n")
        .ok_or_else(|| CliError::Usage("not a P5 document".into()))?
        + 4;
    let header = std::str::from_utf8(&bytes[..text_end])
        .map_err(|_| CliError::Usage("bad PGM header".into()))?;
    let mut lines = header.lines();
    if lines.next() != Some("P5") {
        return Err(CliError::Usage("missing P5 magic".into()));
    }
    let dims = lines
        .next()
        .ok_or_else(|| CliError::Usage("missing dimensions".into()))?;
    let mut parts = dims.split_whitespace();
    let w: usize = parts.next().unwrap_or("0").parse().unwrap_or(0);
    let h: usize = parts.next().unwrap_or("0").parse().unwrap_or(0);
    Ok(((w, h), bytes[text_end..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, ny: usize, nz: usize, values: Vec<f64>) -> VtkScalarGrid {
        VtkScalarGrid { nx, ny, nz, values }
    }

    #[test]
    fn uniform_field_maps_to_extremes() {
        let g = grid(3, 2, 1, vec![300.0; 6]);
        let ((w, h), px) =
            parse_pgm(&render_slice_pgm(&g, Axis::Z, 0, 300.0, 400.0).unwrap()).unwrap();
        assert_eq!((w, h), (3, 2));
        assert!(px.iter().all(|&p| p == 0));
        let ((_, _), px) =
            parse_pgm(&render_slice_pgm(&g, Axis::Z, 0, 200.0, 300.0).unwrap()).unwrap();
        assert!(px.iter().all(|&p| p == 255));
    }

    #[test]
    fn row_order_follows_second_coordinate() {
        // 2×2×1 grid, y=0 row cold, y=1 row hot
        let g = grid(2, 2, 1, vec![300.0, 300.0, 400.0, 400.0]);
        let ((w, h), px) =
            parse_pgm(&render_slice_pgm(&g, Axis::Z, 0, 300.0, 400.0).unwrap()).unwrap();
        assert_eq!((w, h), (2, 2));
        assert_eq!(&px, &[0, 0, 255, 255]);
    }

    #[test]
    fn degenerate_range_is_rejected() {
        let g = grid(2, 2, 1, vec![300.0; 4]);
        assert!(render_slice_pgm(&g, Axis::Z, 0, 300.0, 300.0).is_err());
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let g = grid(2, 2, 2, vec![300.0; 8]);
        assert!(render_slice_pgm(&g, Axis::Z, 2, 0.0, 1.0).is_err());
        assert!(render_slice_pgm(&g, Axis::X, 5, 0.0, 1.0).is_err());
    }

    #[test]
    fn clamping_saturates_out_of_band_values() {
        let g = grid(3, 1, 1, vec![250.0, 350.0, 450.0]);
        let ((_, _), px) =
            parse_pgm(&render_slice_pgm(&g, Axis::Z, 0, 300.0, 400.0).unwrap()).unwrap();
        assert_eq!(&px, &[0, 128, 255]);
    }
}
