//! Metrics CSV export. Columns and number formats are part of the tool's
//! stable interface; temperatures carry enough digits to round-trip within
//! a microkelvin.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use stacktherm_core::sweep::SweepReport;

use crate::error::{io_err, CliError, Result};

pub const METRICS_HEADER: &str = "case,dies_per_layer,n_layers,interposer_material,thickness_um,\
tdp_w,t_max_K,hotspot_area_mm2,R_KperW,mean_K,std_K,iters,wall_ms";

fn num(v: f64) -> String {
    format!("{v:.9}")
}

/// Renders the metrics table. Failed cases keep their identity columns and
/// leave the metric cells empty. LF line endings, plain decimal points.
pub fn metrics_csv(report: &SweepReport) -> Result<String> {
    if report.cases.is_empty() {
        return Err(CliError::Usage("refusing to write an empty report".into()));
    }
    let mut out = String::new();
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for case in &report.cases {
        let p = &case.params;
        write!(
            out,
            "{},{},{},{},{},{}",
            case.label,
            p.dies_per_layer,
            p.n_layers,
            p.interposer_material,
            num(p.thickness_um),
            num(p.tdp_w)
        )
        .unwrap();
        match &case.outcome {
            Ok(m) => write!(
                out,
                ",{},{},{},{},{},{},{:.3}",
                num(m.t_max),
                num(m.hotspot_area_m2 * 1e6),
                num(m.r_k_per_w),
                num(m.mean_k),
                num(m.std_k),
                m.iterations,
                case.wall_ms
            )
            .unwrap(),
            Err(_) => write!(out, ",,,,,,,{:.3}", case.wall_ms).unwrap(),
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes the metrics table to `path`. Refuses empty reports before
/// creating the file.
pub fn write_metrics_csv(report: &SweepReport, path: &Path) -> Result<()> {
    let text = metrics_csv(report)?;
    fs::write(path, text).map_err(io_err(path))
}

/// Writes one transient trace as `t_s,gpu_max_K` rows.
pub fn write_trace_csv(trace: &[(f64, f64)], path: &Path) -> Result<()> {
    let mut out = String::from("t_s,gpu_max_K\n");
    for (t, v) in trace {
        writeln!(out, "{t:.6},{}", num(*v)).unwrap();
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Strips the wall-time column, for content comparisons across runs.
pub fn without_wall_times(csv: &str) -> String {
    let mut out = String::new();
    for line in csv.lines() {
        let cut = line.rsplit_once(',').map(|(head, _)| head).unwrap_or(line);
        out.push_str(cut);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use stacktherm_core::sweep::{CaseMetrics, CaseParams, CaseResult};

    fn sample_report() -> SweepReport {
        let params = CaseParams {
            dies_per_layer: 5,
            n_layers: 4,
            interposer_material: "hbn".into(),
            thickness_um: 300.0,
            tdp_w: 256.0,
        };
        SweepReport {
            cases: vec![CaseResult {
                label: "hbm_5x4".into(),
                params,
                outcome: Ok(CaseMetrics {
                    t_max: 1660.123456789,
                    hotspot_area_m2: 92.0e-6,
                    r_k_per_w: 4.95,
                    mean_k: 1655.5,
                    std_k: 2.25,
                    range_k: 9.0,
                    iterations: 317,
                    energy_residual_rel: 1e-12,
                    trace: None,
                    t95_s: None,
                }),
                wall_ms: 311.25,
            }],
        }
    }

    #[test]
    fn golden_row() {
        let csv = metrics_csv(&sample_report()).unwrap();
        let expected = format!(
            "{METRICS_HEADER}\n\
             hbm_5x4,5,4,hbn,300.000000000,256.000000000,1660.123456789,\
             92.000000000,4.950000000,1655.500000000,2.250000000,317,311.250\n"
        );
        assert_eq!(csv, expected);
    }

    #[test]
    fn temperatures_round_trip_to_microkelvin() {
        let csv = metrics_csv(&sample_report()).unwrap();
        let row = csv.lines().nth(1).unwrap();
        let t_max: f64 = row.split(',').nth(6).unwrap().parse().unwrap();
        assert!((t_max - 1660.123456789).abs() < 1e-6);
    }

    #[test]
    fn empty_report_is_refused() {
        let empty = SweepReport { cases: vec![] };
        assert!(metrics_csv(&empty).is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        assert!(write_metrics_csv(&empty, &path).is_err());
        assert!(!path.exists(), "no file on refusal");
    }

    #[test]
    fn failed_case_keeps_identity_columns() {
        let mut report = sample_report();
        report.cases[0].outcome = Err("did not converge".into());
        let csv = metrics_csv(&report).unwrap();
        let row = csv.lines().nth(1).unwrap();
        assert!(row.starts_with("hbm_5x4,5,4,hbn,"));
        assert_eq!(row.split(',').count(), 13);
        assert_eq!(row.split(',').nth(6).unwrap(), "");
    }

    #[test]
    fn one_row_per_case() {
        let mut report = sample_report();
        let splits = [(20, 1), (10, 2), (5, 4), (4, 5), (2, 10), (1, 20)];
        report.cases = splits
            .iter()
            .map(|&(d, l)| {
                let mut case = report.cases[0].clone();
                case.label = format!("hbm_{d}x{l}");
                case.params.dies_per_layer = d;
                case.params.n_layers = l;
                case
            })
            .collect();
        let csv = metrics_csv(&report).unwrap();
        assert_eq!(csv.lines().count(), 7); // header + six cases
    }

    #[test]
    fn wall_time_mask_drops_last_column() {
        let csv = metrics_csv(&sample_report()).unwrap();
        let masked = without_wall_times(&csv);
        assert!(masked.lines().all(|l| l.split(',').count() == 12));
        assert!(!masked.contains("311.250"));
    }
}
