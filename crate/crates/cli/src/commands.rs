//! The command-line verbs as functions returning the text they print.

use std::path::Path;

use limred_core::gramians::gramians as interval_gramians;
use limred_core::norms::error_terms;
use limred_core::{balanced_truncation, limited_h2_norm, Interval, StateSpace};

use crate::config::{Grid, RunConfig};
use crate::error::{CliError, CliResult};
use crate::response::{write_impulse, write_sigma};
use crate::run::run;
use crate::sysfile::{fmt_num, load_system};

/// What a verb prints and the process exit code it asks for.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub exit_code: u8,
}

impl Outcome {
    fn success(stdout: String) -> Self {
        Self {
            stdout,
            exit_code: 0,
        }
    }
}

/// `reduce <config>`: runs every method and writes the outputs. Exits with
/// 1 when a method failed or a cumulative error grew.
pub fn reduce(config: &Path, parallel: bool) -> CliResult<Outcome> {
    let cfg = RunConfig::load(config)?;
    let outcome = run(&cfg, parallel)?;
    let report = &outcome.report;
    let problems = report.failures.len() + report.monotonicity_violations();
    Ok(Outcome {
        stdout: report.to_tsv(),
        exit_code: if problems > 0 {
            CliError::MethodFailures(problems).exit_code()
        } else {
            0
        },
    })
}

fn load_model(path: &Path) -> CliResult<StateSpace> {
    let sys = load_system(path)?;
    sys.require_hurwitz().map_err(|source| CliError::Model {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(sys)
}

/// `norms <system> [--interval ...] [--rom <file>]`: limited ℋ₂ norms and,
/// with a reduced model, the errors and pseudo-optimality gaps.
pub fn norms(system: &Path, intervals: &[Interval], rom: Option<&Path>) -> CliResult<Outcome> {
    let sys = load_model(system)?;
    let rom = rom.map(load_model).transpose()?;
    let unlimited = [Interval::Unlimited];
    let intervals = if intervals.is_empty() {
        &unlimited[..]
    } else {
        intervals
    };
    let mut out = String::from(if rom.is_some() {
        "interval\tnorm\terror\tgap\n"
    } else {
        "interval\tnorm\n"
    });
    for iv in intervals {
        let mut cells = vec![iv.to_string(), fmt_num(limited_h2_norm(&sys, iv)?)];
        if let Some(r) = &rom {
            let terms = error_terms(&sys, r, iv)?;
            cells.push(fmt_num(terms.error()));
            cells.push(fmt_num(terms.pseudo_optimality_gap()));
        }
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    Ok(Outcome::success(out))
}

fn matrix_block(name: &str, m: &limred_core::DenseMatrix) -> String {
    let mut out = format!("{name} {} {}\n", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// `gramians <system> [--interval ...]`: both limited Gramians and the
/// Hankel-type singular values over the interval.
pub fn gramians(system: &Path, iv: &Interval) -> CliResult<Outcome> {
    let sys = load_model(system)?;
    let pair = interval_gramians(&sys, iv)?;
    let mut out = format!("# interval {iv}\n");
    out.push_str(&matrix_block("P", &pair.p));
    out.push_str(&matrix_block("Q", &pair.q));
    if sys.order() > 1 {
        let bt = balanced_truncation(&sys, 1, iv, None)?;
        let hsv: Vec<String> = bt.hsv.iter().map(|&x| fmt_num(x)).collect();
        out.push_str(&format!("hsv {}\n", hsv.join(" ")));
    }
    Ok(Outcome::success(out))
}

/// `response <system> <rom>`: writes `<dir>/<name>_sigma.tsv` and
/// `<dir>/<name>_impulse.tsv`.
pub fn response(
    system: &Path,
    rom: &Path,
    freq_grid: &Grid,
    time_grid: &Grid,
    dir: &Path,
    name: &str,
) -> CliResult<Outcome> {
    let sys = load_system(system)?;
    let rom = load_system(rom)?;
    let sigma = dir.join(format!("{name}_sigma.tsv"));
    let impulse = dir.join(format!("{name}_impulse.tsv"));
    write_sigma(&sigma, &sys, &rom, freq_grid)?;
    write_impulse(&impulse, &sys, &rom, time_grid)?;
    Ok(Outcome::success(format!(
        "{}\n{}\n",
        sigma.display(),
        impulse.display()
    )))
}

/// `validate <system>`: parses the file and checks stability.
pub fn validate(system: &Path) -> CliResult<Outcome> {
    let sys = load_system(system)?;
    let alpha = sys.spectral_abscissa()?;
    let out = format!(
        "order\t{}\ninputs\t{}\noutputs\t{}\nspectral_abscissa\t{}\nhurwitz\t{}\n",
        sys.order(),
        sys.inputs(),
        sys.outputs(),
        fmt_num(alpha),
        alpha < 0.0
    );
    if alpha >= 0.0 {
        return Err(CliError::Model {
            path: system.to_path_buf(),
            source: limred_core::Error::NotHurwitz(alpha),
        });
    }
    Ok(Outcome::success(out))
}
