//! Response data for plotting: the error sigma response over a frequency
//! grid and full/reduced impulse responses over a time grid.

use std::path::Path;

use limred_core::{sigma_response, StateSpace};

use crate::config::Grid;
use crate::error::CliResult;
use crate::output::write_atomic;
use crate::sysfile::fmt_num;

/// Tab-separated `omega  sigma_error` rows of `σ_max(H(jω) − H_r(jω))`.
pub fn sigma_table(sys: &StateSpace, rom: &StateSpace, grid: &Grid) -> CliResult<String> {
    let omegas = grid.nodes();
    let sigma = sigma_response(&sys.error_system(rom)?, &omegas)?;
    let mut out = String::from("omega\tsigma_error\n");
    for (w, s) in omegas.iter().zip(sigma) {
        out.push_str(&format!("{}\t{}\n", fmt_num(*w), fmt_num(s)));
    }
    Ok(out)
}

/// Tab-separated impulse responses: `t`, then `h_i_j` for every entry of the
/// full model and `hr_i_j` for the reduced one (1-based indices).
///
/// Both models must be Hurwitz.
pub fn impulse_table(sys: &StateSpace, rom: &StateSpace, grid: &Grid) -> CliResult<String> {
    sys.require_hurwitz()?;
    rom.require_hurwitz()?;
    let (p, m) = (sys.outputs(), sys.inputs());
    let mut header = vec!["t".to_string()];
    for prefix in ["h", "hr"] {
        for i in 1..=p {
            for j in 1..=m {
                header.push(format!("{prefix}_{i}_{j}"));
            }
        }
    }
    let mut out = header.join("\t");
    out.push('\n');
    for t in grid.nodes() {
        let mut cells = vec![fmt_num(t)];
        for model in [sys, rom] {
            let h = model.impulse(t)?;
            for i in 0..p {
                for j in 0..m {
                    cells.push(fmt_num(h[(i, j)]));
                }
            }
        }
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_sigma(path: &Path, sys: &StateSpace, rom: &StateSpace, grid: &Grid) -> CliResult<()> {
    write_atomic(path, sigma_table(sys, rom, grid)?.as_bytes())
}

pub fn write_impulse(
    path: &Path,
    sys: &StateSpace,
    rom: &StateSpace,
    grid: &Grid,
) -> CliResult<()> {
    write_atomic(path, impulse_table(sys, rom, grid)?.as_bytes())
}
