//! Reduction reports: a tab-separated table and a JSON sidecar with the same
//! fields.
//!
//! Everything that varies between identical runs (creation time, wall
//! times) lives in the first line of the table and the `header` object of
//! the sidecar, so the rest is byte-for-byte reproducible.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::write_atomic;
use crate::sysfile::fmt_num;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub method: String,
    /// Cumulative step (1-based); `None` for one-shot truncations.
    pub step: Option<usize>,
    pub order: usize,
    pub interval: String,
    /// Limited ℋ₂ error; `None` when the reduced model is not Hurwitz.
    pub error: Option<f64>,
    /// `err² − (‖H‖² − ‖H_r‖²)` over the interval.
    pub gap: Option<f64>,
    /// In-band error from the sigma response (frequency intervals).
    pub sigma_error: Option<f64>,
    /// `eigmin(Approx_i − Approx_{i−1}) / ‖Approx_i‖` (cumulative methods).
    pub growth_eigmin: Option<f64>,
    /// `eigmin(G − Approx_i) / ‖G‖` against the exact limited Gramian.
    pub deficit_eigmin: Option<f64>,
    pub stable: bool,
    /// `false` when the error grew from the previous step beyond round-off.
    pub monotone: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodFailure {
    pub method: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportHeader {
    pub created: String,
    pub wall_seconds: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub header: ReportHeader,
    pub system: String,
    /// Limited ℋ₂ norm of the full model per interval.
    pub norms: BTreeMap<String, f64>,
    pub rows: Vec<ReportRow>,
    pub failures: Vec<MethodFailure>,
    /// Non-fatal remarks (e.g. skipped impulse responses).
    pub notes: Vec<String>,
}

pub const COLUMNS: [&str; 11] = [
    "method",
    "step",
    "order",
    "interval",
    "error",
    "gap",
    "sigma_error",
    "growth_eigmin",
    "deficit_eigmin",
    "stable",
    "monotone",
];

fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), fmt_num)
}

impl ReductionReport {
    /// Rows whose error grew beyond round-off.
    pub fn monotonicity_violations(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.monotone == Some(false))
            .count()
    }

    /// Rows of one method, in step order.
    pub fn method_rows<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn to_tsv(&self) -> String {
        let walls: Vec<String> = self
            .header
            .wall_seconds
            .iter()
            .map(|(m, s)| format!("{m}={s:.6}"))
            .collect();
        let mut out = format!(
            "# limred report created={} wall_seconds={}\n",
            self.header.created,
            walls.join(",")
        );
        out.push_str(&format!("# system {}\n", self.system));
        for (iv, n) in &self.norms {
            out.push_str(&format!("# norm {iv} {}\n", fmt_num(*n)));
        }
        out.push_str(&COLUMNS.join("\t"));
        out.push('\n');
        for r in &self.rows {
            let cells = [
                r.method.clone(),
                r.step.map_or_else(|| "-".into(), |s| s.to_string()),
                r.order.to_string(),
                r.interval.clone(),
                opt_num(r.error),
                opt_num(r.gap),
                opt_num(r.sigma_error),
                opt_num(r.growth_eigmin),
                opt_num(r.deficit_eigmin),
                r.stable.to_string(),
                r.monotone.map_or_else(|| "-".into(), |m| m.to_string()),
            ];
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        for f in &self.failures {
            out.push_str(&format!("# failed {}: {}\n", f.method, f.message));
        }
        for n in &self.notes {
            out.push_str(&format!("# note {n}\n"));
        }
        out
    }

    pub fn to_json(&self) -> CliResult<String> {
        serde_json::to_string_pretty(self)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| CliError::Config(format!("cannot serialize report: {e}")))
    }

    /// Writes `<dir>/<name>_report.tsv` and `<dir>/<name>_report.json`.
    pub fn write(&self, dir: &Path, name: &str) -> CliResult<()> {
        write_atomic(
            &dir.join(format!("{name}_report.tsv")),
            self.to_tsv().as_bytes(),
        )?;
        write_atomic(
            &dir.join(format!("{name}_report.json")),
            self.to_json()?.as_bytes(),
        )
    }
}
