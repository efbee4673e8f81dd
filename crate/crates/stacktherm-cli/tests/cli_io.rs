//! End-to-end checks of the command-line interface: files written, exit
//! codes, and consistency between the exporters and the analysis path.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use stacktherm_cli::config::parse_config;
use stacktherm_cli::pgm::parse_pgm;
use stacktherm_cli::vtk::read_field_vtk;
use stacktherm_core::analysis;
use stacktherm_core::fvm::assemble_system;
use stacktherm_core::solve::solve_steady;
use stacktherm_core::stack::{voxelize, LayerKind};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stacktherm"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn coarse_config() -> String {
    r#"{
        "footprint_mm": [24, 24],
        "interposer": {"material": "hbn", "thickness_um": 300},
        "hbm": {"total": 20, "per_layer": 5},
        "gpu": {"tdp_w": 256},
        "grid": {"cell_mm": 1.0, "cells_per_layer": 1}
    }"#
    .to_string()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.json");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn solve_writes_metrics_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &coarse_config());
    let out_dir = dir.path().join("out");
    let out = run(&["solve", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let metrics = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("case,dies_per_layer,n_layers,"));
    assert_eq!(metrics.lines().count(), 2);

    let vtk = fs::read_to_string(out_dir.join("temperature.vtk")).unwrap();
    let grid = read_field_vtk(&vtk).unwrap();
    assert_eq!((grid.nx, grid.ny), (24, 24));
}

#[test]
fn usage_error_exits_1() {
    let out = run(&["solve"]); // missing config path
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["bogus-subcommand"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_error_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &coarse_config().replace("\"interposer\"", "\"interploser\""),
    );
    let out = run(&["solve", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("interploser"), "{stderr}");
}

#[test]
fn solver_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = coarse_config().replace(
        "\"grid\":",
        "\"solver\": {\"max_iters\": 1, \"rel_tol\": 1e-14}, \"grid\":",
    );
    let cfg = write_config(dir.path(), &text);
    let out = run(&[
        "solve",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn partial_sweep_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = coarse_config().replace(
        "\"grid\":",
        "\"sweep\": {\"family\": \"interposer_thickness\", \"thicknesses_um\": [100, 300]}, \
         \"solver\": {\"max_iters\": 1, \"rel_tol\": 1e-14}, \"grid\":",
    );
    let cfg = write_config(dir.path(), &text);
    let out_dir = dir.path().join("o");
    let out = run(&["sweep", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    // report still written, one row per case with empty metric columns
    let metrics = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 3);
}

#[test]
fn sweep_without_family_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &coarse_config());
    let out = run(&["sweep", &cfg]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn transient_sweep_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let text = coarse_config().replace(
        "\"grid\":",
        "\"sweep\": {\"family\": \"tdp_transient\", \"materials\": [\"hbn\"], \"tdps_w\": [100]}, \
         \"transient\": {\"dt_s\": 0.1, \"t_end_s\": 0.3}, \"grid\":",
    );
    let cfg = write_config(dir.path(), &text);
    let out_dir = dir.path().join("o");
    let out = run(&[
        "sweep",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let trace = fs::read_to_string(out_dir.join("trace_hbn_tdp100w.csv")).unwrap();
    assert!(trace.starts_with("t_s,gpu_max_K\n"));
    assert_eq!(trace.lines().count(), 4); // header + 3 steps
}

#[test]
fn rendered_slice_peaks_at_the_hotspot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_text = coarse_config();
    let cfg = write_config(dir.path(), &cfg_text);
    let out_dir = dir.path().join("o");
    let out = run(&["solve", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());

    // reference hotspot through the analysis path
    let parsed = parse_config(&cfg_text).unwrap();
    let model = voxelize(&parsed.stack, &parsed.library, &parsed.grid).unwrap();
    let system = assemble_system(&model).unwrap();
    let field = solve_steady(&system, &parsed.solver).unwrap();
    let gpu = model.gpu_die_cells();
    let hotspot = analysis::hotspot(&field, &model, &gpu, 5.0).unwrap();
    let (hx, hy, hz) = hotspot.location;
    let gpu_layer = model
        .layers
        .iter()
        .position(|l| l.kind == LayerKind::Gpu)
        .unwrap();
    assert_eq!(model.z_layer[hz], gpu_layer);

    let vtk_path = out_dir.join("temperature.vtk");
    let out = run(&[
        "render",
        vtk_path.to_str().unwrap(),
        "--axis",
        "z",
        "--index",
        &hz.to_string(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let pgm_bytes = fs::read(out_dir.join(format!("temperature_z{hz}.pgm"))).unwrap();
    let ((w, h), pixels) = parse_pgm(&pgm_bytes).unwrap();
    assert_eq!((w, h), (model.nx, model.ny));
    let max_pixel = *pixels.iter().max().unwrap();
    assert_eq!(
        pixels[hx + w * hy],
        max_pixel,
        "hotspot cell is not the brightest pixel"
    );
}

#[test]
fn families_emits_parseable_configs() {
    let out = run(&["families"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let map = doc.as_object().unwrap();
    assert_eq!(map.len(), 3);
    for (name, value) in map {
        let text = serde_json::to_string(value).unwrap();
        let parsed = parse_config(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(parsed.sweep.is_some());
    }
}

#[test]
fn thermo_jobs_env_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let text = coarse_config().replace(
        "\"grid\":",
        "\"sweep\": {\"family\": \"interposer_thickness\", \"thicknesses_um\": [100, 300]}, \"grid\":",
    );
    let cfg = write_config(dir.path(), &text);
    let out_dir = dir.path().join("o");
    let out = bin()
        .args(["sweep", &cfg, "--out", out_dir.to_str().unwrap()])
        .env("THERMO_JOBS", "1")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out_dir.join("metrics.csv").exists());
}
