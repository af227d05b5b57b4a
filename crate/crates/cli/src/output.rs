//! Report writers: a text table, JSON records and CSV tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bicoherent::coordinate::WavefunctionRow;
use serde::Serialize;

use crate::suite::{CheckReport, ConvergenceRow, Status, SuiteOutcome};
use crate::CliError;

pub const TABLE_FILE: &str = "report.txt";
pub const JSON_FILE: &str = "report.json";
pub const RESIDUALS_FILE: &str = "residuals.csv";
pub const QUADRATURE_FILE: &str = "quadrature.csv";
pub const CONVERGENCE_FILE: &str = "convergence.csv";

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn fmt_z(z: Option<[f64; 2]>) -> String {
    match z {
        Some([re, im]) => format!("{re}{im:+}i"),
        None => "-".into(),
    }
}

fn fmt_residual(r: Option<f64>) -> String {
    r.map_or_else(|| "-".into(), |v| format!("{v:.3e}"))
}

/// Fixed-width table, one line per check, followed by a summary line.
pub fn table(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<32} {:>5} {:>10} {:>11} {:>11} {:<13} {:>9}",
        "check", "dim", "z", "residual", "tolerance", "status", "ms"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<32} {:>5} {:>10} {:>11} {:>11.3e} {:<13} {:>9.2}",
            r.check_id,
            r.params.dim,
            fmt_z(r.params.z),
            fmt_residual(r.residual),
            r.tolerance,
            r.status.as_str(),
            r.wall_time_ms
        );
        if let Some(m) = &r.message {
            let _ = writeln!(out, "    {m}");
        }
    }
    let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
    let _ = writeln!(
        out,
        "{} checks: {} pass, {} fail, {} out-of-regime",
        reports.len(),
        count(Status::Pass),
        count(Status::Fail),
        count(Status::OutOfRegime)
    );
    out
}

#[derive(Serialize)]
struct ResidualLine<'a> {
    check_id: &'a str,
    dim: usize,
    z_re: Option<f64>,
    z_im: Option<f64>,
    residual: Option<f64>,
    tolerance: f64,
    status: &'static str,
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Writes the table, the JSON records, the residual CSV and the quadrature
/// CSV into `dir`, returning the paths written.
pub fn write_suite(dir: &Path, outcome: &SuiteOutcome) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(dir)?;
    let table_path = dir.join(TABLE_FILE);
    fs::write(&table_path, table(&outcome.reports)).map_err(|e| io_err(&table_path, e))?;

    let json_path = dir.join(JSON_FILE);
    let json = serde_json::to_string_pretty(&outcome.reports).map_err(|e| io_err(&json_path, e))?;
    fs::write(&json_path, json + "\n").map_err(|e| io_err(&json_path, e))?;

    let residual_path = dir.join(RESIDUALS_FILE);
    write_csv(
        &residual_path,
        outcome.reports.iter().map(|r| ResidualLine {
            check_id: &r.check_id,
            dim: r.params.dim,
            z_re: r.params.z.map(|z| z[0]),
            z_im: r.params.z.map(|z| z[1]),
            residual: r.residual,
            tolerance: r.tolerance,
            status: r.status.as_str(),
        }),
    )?;

    let quad_path = dir.join(QUADRATURE_FILE);
    write_csv(&quad_path, outcome.quadrature.to_vec())?;
    Ok(vec![table_path, json_path, residual_path, quad_path])
}

pub fn write_convergence(dir: &Path, rows: &[ConvergenceRow]) -> Result<PathBuf, CliError> {
    ensure_dir(dir)?;
    let path = dir.join(CONVERGENCE_FILE);
    write_csv(&path, rows.to_vec())?;
    Ok(path)
}

#[derive(Serialize)]
struct WaveLine {
    x: f64,
    re_big_phi: f64,
    im_big_phi: f64,
    re_phi: f64,
    im_phi: f64,
    re_psi: f64,
    im_psi: f64,
}

/// `wavefunction_<index>.csv` with columns x, Φ, φ, Ψ (real and imaginary
/// parts).
pub fn write_wavefunctions(dir: &Path, index: usize, rows: &[WavefunctionRow]) -> Result<PathBuf, CliError> {
    ensure_dir(dir)?;
    let path = dir.join(format!("wavefunction_{index}.csv"));
    write_csv(
        &path,
        rows.iter().map(|r| WaveLine {
            x: r.x,
            re_big_phi: r.big_phi.re,
            im_big_phi: r.big_phi.im,
            re_phi: r.phi.re,
            im_phi: r.phi.im,
            re_psi: r.psi.re,
            im_psi: r.psi.im,
        }),
    )?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::Params;

    #[test]
    fn table_has_one_line_per_check_and_a_summary() {
        let reports = vec![
            CheckReport {
                check_id: "a".into(),
                params: Params {
                    dim: 4,
                    ..Params::default()
                },
                residual: Some(1e-12),
                tolerance: 1e-10,
                status: Status::Pass,
                message: None,
                wall_time_ms: 0.5,
            },
            CheckReport {
                check_id: "b".into(),
                params: Params {
                    dim: 4,
                    z: Some([1.0, -1.0]),
                    ..Params::default()
                },
                residual: None,
                tolerance: 1e-10,
                status: Status::Fail,
                message: Some("broken".into()),
                wall_time_ms: 0.5,
            },
        ];
        let t = table(&reports);
        assert_eq!(t.lines().count(), 5);
        assert!(t.contains("1-1i"));
        assert!(t.contains("broken"));
        assert!(t.ends_with("2 checks: 1 pass, 1 fail, 0 out-of-regime\n"));
    }
}
