use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stacktherm_core::analysis;
use stacktherm_core::fvm::assemble_system;
use stacktherm_core::solve::solve_steady;
use stacktherm_core::stack::voxelize;
use stacktherm_core::sweep::{run_sweep, SweepSpec};

use stacktherm_cli::config::{builtin_family_configs, parse_config, RunConfig};
use stacktherm_cli::error::{io_err, CliError, Result};
use stacktherm_cli::pgm::{write_slice_pgm, Axis};
use stacktherm_cli::report::{write_metrics_csv, write_trace_csv};
use stacktherm_cli::verify::run_verification;
use stacktherm_cli::vtk::{read_field_vtk, write_field_vtk};

/// Thermal solver for 3D-stacked GPU/HBM packages.
#[derive(Parser)]
#[command(name = "stacktherm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweep cases; falls back to THERMO_JOBS, then to
    /// the core count.
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the in-plane cell size from the config, mm.
    #[arg(long)]
    cell_mm: Option<f64>,
    /// Override the per-layer cell count from the config.
    #[arg(long)]
    cells_per_layer: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Steady solve of one configuration; writes metrics.csv and
    /// temperature.vtk.
    Solve(RunArgs),
    /// Run the sweep family named in the config; writes metrics.csv and,
    /// for transient families, one trace CSV per case.
    Sweep(RunArgs),
    /// Run the analytic verification suite and print a pass/fail table.
    Verify,
    /// Render a temperature slice of a stored field to a PGM image.
    Render {
        /// VTK file produced by `solve`.
        field: PathBuf,
        #[arg(long, default_value = "z")]
        axis: String,
        /// Slice index along the axis.
        #[arg(long)]
        index: usize,
        /// Black point, K (defaults to the field minimum).
        #[arg(long)]
        min: Option<f64>,
        /// White point, K (defaults to the field maximum).
        #[arg(long)]
        max: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print ready-to-edit configs for the built-in sweep families.
    Families,
}

fn load_config(args: &RunArgs) -> Result<RunConfig> {
    let text = fs::read_to_string(&args.config).map_err(io_err(&args.config))?;
    let mut cfg = parse_config(&text)?;
    if let Some(mm) = args.cell_mm {
        cfg.grid.target_cell = mm * 1e-3;
    }
    if let Some(n) = args.cells_per_layer {
        cfg.grid.cells_per_layer = n;
    }
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn ensure_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn jobs_for(args: &RunArgs) -> usize {
    args.jobs
        .or_else(|| {
            std::env::var("THERMO_JOBS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .max(1)
}

fn cmd_solve(args: &RunArgs) -> Result<()> {
    let cfg = load_config(args)?;
    ensure_out(&args.out)?;
    let started = std::time::Instant::now();

    let model = voxelize(&cfg.stack, &cfg.library, &cfg.grid)?;
    let system = assemble_system(&model)?;
    let field = solve_steady(&system, &cfg.solver)?;

    let gpu = model.gpu_die_cells();
    let hotspot = analysis::hotspot(&field, &model, &gpu, analysis::DEFAULT_HOTSPOT_BAND_K)?;
    let stats = analysis::uniformity(&field, &model, &gpu)?;
    let r =
        analysis::thermal_resistance(hotspot.t_max, cfg.stack.total_power_w(), model.t_ambient)?;
    let excess: Vec<f64> = field.values.iter().map(|t| t - field.t_ambient).collect();
    let (generated, convected, balance) = system.energy_balance(&excess);

    let report = stacktherm_core::sweep::SweepReport {
        cases: vec![stacktherm_core::sweep::CaseResult {
            label: "solve".into(),
            params: stacktherm_core::sweep::CaseParams {
                dies_per_layer: cfg.stack.hbm.dies_per_layer,
                n_layers: cfg.stack.hbm.n_layers,
                interposer_material: cfg.stack.interposer_material.clone(),
                thickness_um: cfg.stack.interposer_thickness * 1e6,
                tdp_w: cfg.stack.gpu_power_w(),
            },
            outcome: Ok(stacktherm_core::sweep::CaseMetrics {
                t_max: hotspot.t_max,
                hotspot_area_m2: hotspot.hotspot_area,
                r_k_per_w: r,
                mean_k: stats.mean,
                std_k: stats.std,
                range_k: stats.range,
                iterations: field.iterations,
                energy_residual_rel: balance,
                trace: None,
                t95_s: None,
            }),
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        }],
    };
    write_metrics_csv(&report, &args.out.join("metrics.csv"))?;
    write_field_vtk(&field, &model, &args.out.join("temperature.vtk"))?;

    println!(
        "grid {}x{}x{} ({} cells), {} iterations, residual {:.2e}",
        model.nx,
        model.ny,
        model.nz,
        model.cell_count(),
        field.iterations,
        field.residual
    );
    println!(
        "t_max {:.3} K at {:?}, hotspot area {:.2} mm² (band {:.1} K)",
        hotspot.t_max,
        hotspot.location,
        hotspot.hotspot_area * 1e6,
        hotspot.band
    );
    println!(
        "GPU mean {:.3} K, std {:.3} K, range {:.3} K; R {:.4} K/W",
        stats.mean, stats.std, stats.range, r
    );
    println!(
        "energy: generated {generated:.3} W, convected {convected:.3} W, residual {balance:.2e}"
    );
    println!("wrote {}", args.out.join("metrics.csv").display());
    println!("wrote {}", args.out.join("temperature.vtk").display());
    Ok(())
}

fn cmd_sweep(args: &RunArgs) -> Result<()> {
    let cfg = load_config(args)?;
    let family = cfg.sweep.clone().ok_or_else(|| {
        CliError::Config("sweep subcommand needs a \"sweep\" section in the config".into())
    })?;
    ensure_out(&args.out)?;

    let mut spec = SweepSpec::new(cfg.stack.clone(), family);
    spec.parallelism = jobs_for(args);
    spec.grid = cfg.grid;
    spec.solver = cfg.solver;
    let report = run_sweep(&spec, &cfg.library)?;

    write_metrics_csv(&report, &args.out.join("metrics.csv"))?;
    for case in &report.cases {
        if let Ok(metrics) = &case.outcome {
            if let Some(trace) = &metrics.trace {
                write_trace_csv(trace, &args.out.join(format!("trace_{}.csv", case.label)))?;
            }
        }
    }

    let mut failed = 0;
    for case in &report.cases {
        match &case.outcome {
            Ok(m) => println!(
                "{:<16} t_max {:9.3} K  R {:.4} K/W  iters {:6}  {:8.1} ms",
                case.label, m.t_max, m.r_k_per_w, m.iterations, case.wall_ms
            ),
            Err(e) => {
                failed += 1;
                eprintln!("{:<16} FAILED: {e}", case.label);
            }
        }
    }
    println!("wrote {}", args.out.join("metrics.csv").display());
    if failed > 0 {
        return Err(CliError::SweepPartial {
            failed,
            total: report.cases.len(),
        });
    }
    Ok(())
}

fn cmd_render(
    field: &Path,
    axis: &str,
    index: usize,
    min: Option<f64>,
    max: Option<f64>,
    out: &Path,
) -> Result<()> {
    let text = fs::read_to_string(field).map_err(io_err(field))?;
    let grid = read_field_vtk(&text)?;
    let axis: Axis = axis.parse()?;
    let lo = min.unwrap_or_else(|| grid.values.iter().cloned().fold(f64::INFINITY, f64::min));
    let hi = max.unwrap_or_else(|| {
        grid.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    });
    ensure_out(out)?;
    let stem = field
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("field");
    let name = format!("{stem}_{}{index}.pgm", format!("{axis:?}").to_lowercase());
    let path = out.join(name);
    write_slice_pgm(&grid, axis, index, lo, hi, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_families() -> Result<()> {
    let configs = builtin_family_configs();
    let doc: serde_json::Value = configs
        .iter()
        .map(|(name, cfg)| {
            (
                name.to_string(),
                serde_json::to_value(cfg).expect("config serializes"),
            )
        })
        .collect::<serde_json::Map<String, serde_json::Value>>()
        .into();
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify => {
            let ok = run_verification(&mut std::io::stdout())?;
            if ok {
                Ok(())
            } else {
                Err(CliError::VerificationFailed)
            }
        }
        Command::Render {
            field,
            axis,
            index,
            min,
            max,
            out,
        } => cmd_render(field, axis, *index, *min, *max, out),
        Command::Families => cmd_families(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
