//! Plain-text state-space files.
//!
//! ```text
//! limred-ss v1
//! A <n> <n>
//! <n rows of n numbers>
//! B <n> <m>
//! <n rows of m numbers>
//! C <p> <n>
//! <p rows of n numbers>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Numbers are written
//! with 17 significant digits, which reproduces every `f64` exactly.

use std::path::Path;

use limred_core::{DenseMatrix, StateSpace};

use crate::error::{CliError, CliResult, ParseError};
use crate::output::write_atomic;

pub const MAGIC: &str = "limred-ss v1";
const BLOCKS: [&str; 3] = ["A", "B", "C"];

/// Why a system file could not be turned into a model.
#[derive(Debug)]
pub enum SystemFileError {
    Syntax(ParseError),
    Model(limred_core::Error),
}

impl From<ParseError> for SystemFileError {
    fn from(e: ParseError) -> Self {
        SystemFileError::Syntax(e)
    }
}

/// Significant lines with their 1-based numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}

/// Whitespace-separated tokens with their 1-based columns.
pub(crate) fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, tok)| (line[..byte].chars().count() + 1, tok))
        .collect()
}

fn parse_usize(line: usize, (col, tok): (usize, &str)) -> Result<usize, ParseError> {
    tok.parse()
        .map_err(|_| ParseError::new(line, col, format!("expected a dimension, found '{tok}'")))
}

pub(crate) fn parse_f64(line: usize, (col, tok): (usize, &str)) -> Result<f64, ParseError> {
    match tok.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(ParseError::new(
            line,
            col,
            format!("expected a finite number, found '{tok}'"),
        )),
    }
}

pub fn parse_system(text: &str) -> Result<StateSpace, SystemFileError> {
    let mut it = lines(text);
    let end = text.lines().count() + 1;
    match it.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        Some((n, l)) => {
            let col = l.len() - l.trim_start().len() + 1;
            return Err(ParseError::new(n, col, format!("expected header '{MAGIC}'")).into());
        }
        None => return Err(ParseError::new(1, 1, "empty system file").into()),
    }
    let mut mats = Vec::with_capacity(3);
    for name in BLOCKS {
        let (ln, line) = it
            .next()
            .ok_or_else(|| ParseError::new(end, 1, format!("missing block {name}")))?;
        let toks = tokens(line);
        if toks.len() != 3 || toks[0].1 != name {
            let col = toks.first().map_or(1, |t| t.0);
            return Err(
                ParseError::new(ln, col, format!("expected '{name} <rows> <cols>'")).into(),
            );
        }
        let rows = parse_usize(ln, toks[1])?;
        let cols = parse_usize(ln, toks[2])?;
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (rl, row) = it.next().ok_or_else(|| {
                ParseError::new(
                    end,
                    1,
                    format!("block {name}: missing row {} of {rows}", r + 1),
                )
            })?;
            let toks = tokens(row);
            if toks.len() != cols {
                let col = toks.get(cols).map_or(row.len() + 1, |t| t.0);
                return Err(ParseError::new(
                    rl,
                    col,
                    format!(
                        "block {name}: expected {cols} entries, found {}",
                        toks.len()
                    ),
                )
                .into());
            }
            for t in toks {
                data.push(parse_f64(rl, t)?);
            }
        }
        mats.push(DenseMatrix::from_row_slice(rows, cols, &data));
    }
    if let Some((ln, l)) = it.next() {
        let col = l.len() - l.trim_start().len() + 1;
        return Err(ParseError::new(ln, col, "unexpected content after block C").into());
    }
    let c = mats.pop().unwrap_or_default();
    let b = mats.pop().unwrap_or_default();
    let a = mats.pop().unwrap_or_default();
    StateSpace::new(a, b, c).map_err(SystemFileError::Model)
}

pub fn load_system(path: &Path) -> CliResult<StateSpace> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_system(&text).map_err(|e| match e {
        SystemFileError::Syntax(source) => CliError::Parse {
            path: path.to_path_buf(),
            source,
        },
        SystemFileError::Model(source) => CliError::Model {
            path: path.to_path_buf(),
            source,
        },
    })
}

/// A number with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_system(sys: &StateSpace) -> String {
    let mut out = String::from(MAGIC);
    out.push('\n');
    for (name, m) in BLOCKS.iter().zip([sys.a(), sys.b(), sys.c()]) {
        out.push_str(&format!("{name} {} {}\n", m.nrows(), m.ncols()));
        for row in m.row_iter() {
            let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn write_system(path: &Path, sys: &StateSpace) -> CliResult<()> {
    write_atomic(path, format_system(sys).as_bytes())
}
