//! Deterministic text artifacts: CSV grids and JSON fit reports.
//!
//! Every artifact opens with a `#`-prefixed metadata block — tool version,
//! subcommand, config digest, wall-clock timing, the fit seed where one was
//! used, and the column list — so a file alone identifies the run that made
//! it. Every numeric cell is printed with 17 significant digits
//! (`{:.16e}`), which round-trips an `f64` bit-exactly; data rows are
//! therefore reproducible to the bit, while the two timing lines in the
//! header are the only part of an artifact that varies between identical
//! runs.
//!
//! CSV layout is time-major: the probe (or cut) index cycles fastest, so
//! consecutive rows at one time form one spatial profile.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use otoc::{EntanglementProfile, FitParams, FitResult, OtocGrid, RenyiBoundReport, WindowConfig};
use serde_json::{json, Value};

use crate::run::Failure;

/// Binary name stamped into headers.
pub const TOOL_NAME: &str = "otoc";

/// Crate version stamped into headers.
pub fn tool_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Everything stamped into an artifact header besides the column list.
pub struct Meta<'a> {
    pub command: &'a str,
    pub config_sha256: &'a str,
    /// Fit-restart seed; present only on artifacts whose numbers could
    /// depend on it.
    pub seed: Option<u64>,
    pub wall_clock_seconds: f64,
}

pub(crate) fn unix_seconds() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn header(meta: &Meta<'_>, columns: &str) -> String {
    let mut h = String::new();
    let _ = writeln!(h, "# tool: {TOOL_NAME} {}", tool_version());
    let _ = writeln!(h, "# command: {}", meta.command);
    let _ = writeln!(h, "# config_sha256: {}", meta.config_sha256);
    let _ = writeln!(h, "# generated_unix_seconds: {}", unix_seconds());
    let _ = writeln!(h, "# wall_clock_seconds: {:.6}", meta.wall_clock_seconds);
    if let Some(seed) = meta.seed {
        let _ = writeln!(h, "# seed: {seed}");
    }
    let _ = writeln!(h, "# columns: {columns}");
    h
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display())))
}

/// The squared-commutator grid as `t,x,C,norm` rows, where `x` is the
/// separation `|probe site - base site|`.
pub fn write_otoc_csv(path: &Path, grid: &OtocGrid, meta: &Meta<'_>) -> Result<(), Failure> {
    let mut out = header(meta, "t,x,C,norm");
    for (k, &t) in grid.times.iter().enumerate() {
        for (p, &site) in grid.probe_sites.iter().enumerate() {
            let x = site.abs_diff(grid.base_site) as f64;
            let _ = writeln!(
                out,
                "{t:.16e},{x:.16e},{:.16e},{:.16e}",
                grid.values[p][k], grid.norms[k]
            );
        }
    }
    write_text(path, &out)
}

/// The operator-entanglement profile as `t,cut,S_vn,S_renyi2` rows.
pub fn write_entanglement_csv(
    path: &Path,
    profile: &EntanglementProfile,
    meta: &Meta<'_>,
) -> Result<(), Failure> {
    let mut out = header(meta, "t,cut,S_vn,S_renyi2");
    for (k, &t) in profile.times.iter().enumerate() {
        for (c, &cut) in profile.cuts.iter().enumerate() {
            let _ = writeln!(
                out,
                "{t:.16e},{:.16e},{:.16e},{:.16e}",
                cut as f64, profile.s_vn[c][k], profile.s_renyi2[c][k]
            );
        }
    }
    write_text(path, &out)
}

/// Both sides of the entanglement/commutator bound per `(t, cut)` point.
/// Where the bound degenerates (commutator sum at or beyond 2) the
/// undefined cells are written as `NaN`; `satisfied` is 1 or 0 otherwise.
pub fn write_bound_csv(
    path: &Path,
    times: &[f64],
    cuts: &[usize],
    reports: &[Vec<RenyiBoundReport>],
    meta: &Meta<'_>,
) -> Result<(), Failure> {
    let mut out = header(meta, "t,cut,lhs,commutator_sum,rhs,margin,satisfied");
    for (k, &t) in times.iter().enumerate() {
        for (c, &cut) in cuts.iter().enumerate() {
            let report = &reports[k][c];
            let rhs = report.rhs.unwrap_or(f64::NAN);
            let margin = report.margin.unwrap_or(f64::NAN);
            let satisfied = report
                .satisfied
                .map(|ok| if ok { 1.0 } else { 0.0 })
                .unwrap_or(f64::NAN);
            let _ = writeln!(
                out,
                "{t:.16e},{:.16e},{:.16e},{:.16e},{rhs:.16e},{margin:.16e},{satisfied:.16e}",
                cut as f64, report.lhs, report.commutator_sum
            );
        }
    }
    write_text(path, &out)
}

/// Rescaled front points as `x,t,u,log_C` rows, one per window point,
/// where `u = (x - v_B t - x0) / t^{p/(1+p)}`.
pub fn write_collapse_csv(
    path: &Path,
    points: &[(f64, f64, f64, f64)],
    meta: &Meta<'_>,
) -> Result<(), Failure> {
    let mut out = header(meta, "x,t,u,log_C");
    for &(x, t, u, log_c) in points {
        let _ = writeln!(out, "{x:.16e},{t:.16e},{u:.16e},{log_c:.16e}");
    }
    write_text(path, &out)
}

fn params_value(params: &FitParams) -> Value {
    match *params {
        FitParams::XsForm { lambda, p, v_b, x0 } => json!({
            "lambda": lambda, "p": p, "v_B": v_b, "x0": x0,
        }),
        FitParams::Perturbative { a, b } => json!({ "a": a, "b": b }),
        FitParams::Exponential { lambda, mu } => json!({ "lambda": lambda, "mu": mu }),
        FitParams::RandomCircuit { v, d } => json!({ "v": v, "d": d }),
        FitParams::GrowthDiffusion { lambda, d } => json!({ "lambda": lambda, "d": d }),
    }
}

/// The wavefront-fit report. The front parameters sit at the top level
/// under their own names (`lambda`, `p`, `v_B`, `x0`); competitor fits,
/// when any were requested, follow under `competitors` with their own
/// parameter objects.
pub fn write_fit_json(
    path: &Path,
    window: WindowConfig,
    fit: &FitResult,
    competitors: &[FitResult],
    meta: &Meta<'_>,
) -> Result<(), Failure> {
    let FitParams::XsForm { lambda, p, v_b, x0 } = fit.params else {
        return Err(Failure::Compute(
            "fit report expects wavefront-form parameters".to_string(),
        ));
    };
    let competitor_entries: Vec<Value> = competitors
        .iter()
        .map(|c| {
            json!({
                "model": c.params.model_name(),
                "params": params_value(&c.params),
                "rms_residual": c.rms_residual,
                "iterations": c.iterations,
                "converged": c.converged,
            })
        })
        .collect();
    let report = json!({
        "meta": {
            "tool": format!("{TOOL_NAME} {}", tool_version()),
            "command": meta.command,
            "config_sha256": meta.config_sha256,
            "generated_unix_seconds": unix_seconds(),
            "wall_clock_seconds": meta.wall_clock_seconds,
            "seed": meta.seed,
        },
        "model": fit.params.model_name(),
        "lambda": lambda,
        "p": p,
        "v_B": v_b,
        "x0": x0,
        "rms_residual": fit.rms_residual,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "n_points": fit.n_points,
        "window": window,
        "competitors": competitor_entries,
    });
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Failure::Compute(format!("cannot serialize fit report: {e}")))?;
    write_text(path, &format!("{text}\n"))
}

/// Strict numeric-CSV reader: `#` lines and blank lines are skipped, every
/// remaining line must hold the same number of comma-separated floats.
/// Problems are reported with the file and line number; a malformed input
/// is a validation failure because no compute has happened yet.
pub fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(Failure::Validation(format!(
                    "{}:{}: expected {w} comma-separated values, found {}",
                    path.display(),
                    index + 1,
                    fields.len()
                )));
            }
            Some(_) => {}
        }
        let mut row = Vec::with_capacity(fields.len());
        for field in fields {
            let value: f64 = field.trim().parse().map_err(|e| {
                Failure::Validation(format!(
                    "{}:{}: {field:?} is not a number: {e}",
                    path.display(),
                    index + 1
                ))
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    Ok(rows)
}
