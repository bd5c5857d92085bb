//! Run configurations: one `key = value` per line, `#` comments.
//!
//! ```text
//! system     = example1.ss            # relative to the config file
//! methods    = BT, FLBT, CURE, FL-CURE, CUREd-FLBT
//! interval   = freq:8,9; time:0,0.5   # one per kind, `;`-separated
//! shifts     = 1; 2                   # steps `;`, shifts within a step `,`
//! directions = 1; 1                   # steps `;`, per-shift vectors `|`
//! order      = 2
//! output     = out
//! freq_grid  = 8, 9, 200
//! time_grid  = 0, 0.5, 500
//! ```
//!
//! Instead of `shifts`, `seed` and `count` draw `count` single real shifts
//! log-uniformly from `[1e-2, 1e2]` with random directions. Complex numbers
//! are written `re`, `re+imj` or `re-imj`.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use limred_core::{Interval, Side};
use num_complex::Complex64;

use crate::error::{CliError, CliResult, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Bt,
    Tlbt,
    Flbt,
    Cure,
    TlCure,
    FlCure,
    CuredFlbt,
    CuredTlbt,
}

/// The interval a method works over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalKind {
    Unlimited,
    Time,
    Frequency,
}

/// How a method builds its model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Truncation with exact interval Gramians.
    Balanced,
    /// Step-by-step pseudo-optimal accumulation.
    Cumulative,
    /// Truncation with Gramians approximated by accumulation.
    CumulativeBalanced,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Bt,
        Method::Tlbt,
        Method::Flbt,
        Method::Cure,
        Method::TlCure,
        Method::FlCure,
        Method::CuredFlbt,
        Method::CuredTlbt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Bt => "BT",
            Method::Tlbt => "TLBT",
            Method::Flbt => "FLBT",
            Method::Cure => "CURE",
            Method::TlCure => "TL-CURE",
            Method::FlCure => "FL-CURE",
            Method::CuredFlbt => "CUREd-FLBT",
            Method::CuredTlbt => "CUREd-TLBT",
        }
    }

    pub fn kind(self) -> IntervalKind {
        match self {
            Method::Bt | Method::Cure => IntervalKind::Unlimited,
            Method::Tlbt | Method::TlCure | Method::CuredTlbt => IntervalKind::Time,
            Method::Flbt | Method::FlCure | Method::CuredFlbt => IntervalKind::Frequency,
        }
    }

    pub fn family(self) -> Family {
        match self {
            Method::Bt | Method::Tlbt | Method::Flbt => Family::Balanced,
            Method::Cure | Method::TlCure | Method::FlCure => Family::Cumulative,
            Method::CuredFlbt | Method::CuredTlbt => Family::CumulativeBalanced,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                format!(
                    "unknown method '{s}' (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// Uniform grid `[lo, hi]` with `points` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid {
    pub fn nodes(&self) -> Vec<f64> {
        limred_core::balancing::uniform_grid(self.lo, self.hi, self.points)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [lo, hi, points] = parts[..] else {
            return Err(format!("grid '{s}' must be '<lo>, <hi>, <points>'"));
        };
        let num = |x: &str| {
            x.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("grid bound '{x}' is not a finite number"))
        };
        let grid = Grid {
            lo: num(lo)?,
            hi: num(hi)?,
            points: points
                .parse()
                .map_err(|_| format!("grid point count '{points}' is not an integer"))?,
        };
        if grid.points < 2 || grid.hi.partial_cmp(&grid.lo) != Some(std::cmp::Ordering::Greater) {
            return Err(format!("grid '{s}' needs lo < hi and at least 2 points"));
        }
        Ok(grid)
    }
}

/// Shifts of one step and, optionally, their tangential directions.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSpec {
    pub shifts: Vec<Complex64>,
    pub directions: Option<Vec<Vec<Complex64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShiftPlan {
    Explicit(Vec<StepSpec>),
    Random { seed: u64, count: usize },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Prefix of every output file.
    pub name: String,
    pub system: PathBuf,
    pub methods: Vec<Method>,
    pub time_interval: Option<Interval>,
    pub freq_interval: Option<Interval>,
    pub shifts: ShiftPlan,
    /// Truncation order of the balanced methods.
    pub order: Option<usize>,
    pub side: Side,
    pub output: PathBuf,
    pub freq_grid: Option<Grid>,
    pub time_grid: Option<Grid>,
}

const KEYS: [&str; 13] = [
    "name",
    "system",
    "methods",
    "interval",
    "shifts",
    "directions",
    "seed",
    "count",
    "order",
    "side",
    "output",
    "freq_grid",
    "time_grid",
];

/// Parses a complex number `re`, `re+imj`, `re-imj`, `imj` (`i` also accepted).
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    let Some(body) = s.strip_suffix(['j', 'i']) else {
        return s
            .parse::<f64>()
            .ok()
            .filter(|re| re.is_finite())
            .map(|re| Complex64::new(re, 0.0));
    };
    // Split at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].trim().parse().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im.trim() {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse().ok()?,
    };
    Some(Complex64::new(re, im)).filter(|z| z.re.is_finite() && z.im.is_finite())
}

struct Entry<'a> {
    line: usize,
    column: usize,
    value: &'a str,
}

impl Entry<'_> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column, message)
    }
}

fn complex_list(e: &Entry<'_>, s: &str) -> Result<Vec<Complex64>, ParseError> {
    s.split(',')
        .map(|x| {
            parse_complex(x).ok_or_else(|| e.err(format!("cannot parse number '{}'", x.trim())))
        })
        .collect()
}

fn parse_steps(shifts: &Entry<'_>, dirs: Option<&Entry<'_>>) -> Result<Vec<StepSpec>, ParseError> {
    let groups: Vec<&str> = shifts
        .value
        .split(';')
        .map(str::trim)
        .filter(|g| !g.is_empty())
        .collect();
    let mut steps: Vec<StepSpec> = groups
        .iter()
        .map(|g| {
            Ok(StepSpec {
                shifts: complex_list(shifts, g)?,
                directions: None,
            })
        })
        .collect::<Result<_, ParseError>>()?;
    if let Some(d) = dirs {
        let dgroups: Vec<&str> = d
            .value
            .split(';')
            .map(str::trim)
            .filter(|g| !g.is_empty())
            .collect();
        if dgroups.len() != steps.len() {
            return Err(d.err(format!(
                "{} direction groups for {} shift steps",
                dgroups.len(),
                steps.len()
            )));
        }
        for (step, g) in steps.iter_mut().zip(dgroups) {
            let vecs: Vec<Vec<Complex64>> = g
                .split('|')
                .map(|v| complex_list(d, v))
                .collect::<Result<_, _>>()?;
            if vecs.len() != step.shifts.len() {
                return Err(d.err(format!(
                    "step with {} shifts has {} directions",
                    step.shifts.len(),
                    vecs.len()
                )));
            }
            step.directions = Some(vecs);
        }
    }
    Ok(steps)
}

/// Parses a configuration; relative paths are resolved against `base`.
pub fn parse_config(text: &str, base: &Path, default_name: &str) -> Result<RunConfig, ParseError> {
    let mut entries: HashMap<&str, Entry<'_>> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let indent = line.chars().take_while(|c| c.is_whitespace()).count() + 1;
        let eq = line
            .find('=')
            .ok_or_else(|| ParseError::new(i + 1, indent, "expected 'key = value'"))?;
        let key = line[..eq].trim();
        if !KEYS.contains(&key) {
            return Err(ParseError::new(
                i + 1,
                indent,
                format!("unknown key '{key}'"),
            ));
        }
        let value = &line[eq + 1..];
        let lead = value.len() - value.trim_start().len();
        let entry = Entry {
            line: i + 1,
            column: line[..eq + 1 + lead].chars().count() + 1,
            value: value.trim(),
        };
        if entries.insert(key, entry).is_some() {
            return Err(ParseError::new(
                i + 1,
                indent,
                format!("duplicate key '{key}'"),
            ));
        }
    }
    let missing = |key: &str| ParseError::new(1, 1, format!("missing required key '{key}'"));

    let system = entries.get("system").ok_or_else(|| missing("system"))?;
    let methods_e = entries.get("methods").ok_or_else(|| missing("methods"))?;
    let mut methods = Vec::new();
    for m in methods_e.value.split(',') {
        let m: Method = m.parse().map_err(|e: String| methods_e.err(e))?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }

    let (mut time_interval, mut freq_interval) = (None, None);
    if let Some(e) = entries.get("interval") {
        for part in e.value.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let iv: Interval = part
                .parse()
                .map_err(|x: limred_core::Error| e.err(x.to_string()))?;
            let slot = match iv {
                Interval::Time { .. } => &mut time_interval,
                Interval::Frequency { .. } => &mut freq_interval,
                Interval::Unlimited => continue,
            };
            if slot.replace(iv).is_some() {
                return Err(e.err(format!("more than one interval of the kind of '{part}'")));
            }
        }
    }

    let shifts = match (
        entries.get("shifts"),
        entries.get("seed"),
        entries.get("count"),
    ) {
        (Some(s), None, None) => ShiftPlan::Explicit(parse_steps(s, entries.get("directions"))?),
        (None, Some(seed), Some(count)) => {
            if let Some(d) = entries.get("directions") {
                return Err(d.err("directions cannot be combined with random shifts"));
            }
            ShiftPlan::Random {
                seed: seed
                    .value
                    .parse()
                    .map_err(|_| seed.err("seed must be an unsigned integer"))?,
                count: count
                    .value
                    .parse()
                    .map_err(|_| count.err("count must be an unsigned integer"))?,
            }
        }
        (None, None, None) => match entries.get("directions") {
            Some(d) => return Err(d.err("directions given without shifts")),
            None => ShiftPlan::None,
        },
        (Some(s), _, _) => {
            return Err(s.err("give either 'shifts' or 'seed' and 'count', not both"))
        }
        (None, Some(e), None) | (None, None, Some(e)) => {
            return Err(e.err("'seed' and 'count' must be given together"))
        }
    };

    let order = entries
        .get("order")
        .map(|e| {
            e.value
                .parse()
                .map_err(|_| e.err("order must be a positive integer"))
        })
        .transpose()?;
    let side = match entries.get("side") {
        None => Side::Input,
        Some(e) => match e.value.to_ascii_lowercase().as_str() {
            "input" | "v" => Side::Input,
            "output" | "w" => Side::Output,
            _ => return Err(e.err("side must be 'input' or 'output'")),
        },
    };
    let grid = |key: &str| {
        entries
            .get(key)
            .map(|e| e.value.parse::<Grid>().map_err(|x| e.err(x)))
            .transpose()
    };
    Ok(RunConfig {
        name: entries
            .get("name")
            .map_or_else(|| default_name.to_string(), |e| e.value.to_string()),
        system: base.join(system.value),
        methods,
        time_interval,
        freq_interval,
        shifts,
        order,
        side,
        output: base.join(entries.get("output").map_or("out", |e| e.value)),
        freq_grid: grid("freq_grid")?,
        time_grid: grid("time_grid")?,
    })
}

impl RunConfig {
    /// Reads and validates a configuration file.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        let cfg = parse_config(&text, base, stem).map_err(|source| CliError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Semantic checks that need more than one key.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.methods.is_empty() {
            return bad("no methods given".into());
        }
        for m in &self.methods {
            let ok = match m.kind() {
                IntervalKind::Unlimited => true,
                IntervalKind::Time => self.time_interval.is_some(),
                IntervalKind::Frequency => self.freq_interval.is_some(),
            };
            if !ok {
                return bad(format!("method {m} needs an interval of its kind"));
            }
        }
        if self.order == Some(0) {
            return bad("order must be at least 1".into());
        }
        let needs_steps = self.methods.iter().any(|m| m.family() != Family::Balanced);
        match &self.shifts {
            ShiftPlan::Explicit(steps) => {
                if steps.is_empty() {
                    return bad("at least one step of shifts is required".into());
                }
                for z in steps.iter().flat_map(|s| &s.shifts) {
                    if z.re.is_nan() || z.re <= 0.0 {
                        return bad(format!("shift {z} must have a positive real part"));
                    }
                }
            }
            ShiftPlan::Random { count, .. } if *count == 0 => {
                return bad("count must be at least 1".into())
            }
            ShiftPlan::Random { .. } => {}
            ShiftPlan::None if needs_steps => {
                return bad("cumulative methods need shifts or a seed and count".into())
            }
            ShiftPlan::None => {}
        }
        if matches!(self.shifts, ShiftPlan::None) && self.order.is_none() {
            return bad("balanced methods need an order when no shifts are given".into());
        }
        Ok(())
    }

    pub fn interval(&self, kind: IntervalKind) -> Interval {
        match kind {
            IntervalKind::Unlimited => Interval::Unlimited,
            IntervalKind::Time => self.time_interval.unwrap_or(Interval::Unlimited),
            IntervalKind::Frequency => self.freq_interval.unwrap_or(Interval::Unlimited),
        }
    }

    /// Frequency grid for sigma responses: the configured one, else the band
    /// with 200 points, else `[0, 10]`.
    pub fn sigma_grid(&self) -> Grid {
        self.freq_grid.unwrap_or(match self.freq_interval {
            Some(Interval::Frequency { w1, w2 }) => Grid {
                lo: w1,
                hi: w2,
                points: 200,
            },
            _ => Grid {
                lo: 0.0,
                hi: 10.0,
                points: 200,
            },
        })
    }

    /// Time grid for impulse responses: the configured one, else the window
    /// (ten time units past a semi-infinite start) with 500 points, else
    /// `[0, 10]`.
    pub fn impulse_grid(&self) -> Grid {
        self.time_grid.unwrap_or(match self.time_interval {
            Some(Interval::Time { t1, t2 }) if t2.is_finite() => Grid {
                lo: t1,
                hi: t2,
                points: 500,
            },
            Some(Interval::Time { t1, .. }) => Grid {
                lo: t1,
                hi: t1 + 10.0,
                points: 500,
            },
            _ => Grid {
                lo: 0.0,
                hi: 10.0,
                points: 500,
            },
        })
    }
}
