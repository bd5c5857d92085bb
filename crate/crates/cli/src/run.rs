//! The `reduce` pipeline: every configured method on one system, collected
//! into a report and written with the reduced models and response data.

use std::collections::BTreeMap;
use std::time::Instant;

use chrono::{SecondsFormat, Utc};
use limred_core::gramians::{controllability_gramian, observability_gramian};
use limred_core::linalg::{min_sym_eigenvalue, norm2};
use limred_core::norms::error_terms;
use limred_core::{
    balanced_truncation, limited_h2_norm, sigma_band_error, CureState, DenseMatrix, GramianFactors,
    Interval, Side, StateSpace,
};
use log::{info, warn};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Family, Method, RunConfig, ShiftPlan, StepSpec};
use crate::error::{CliError, CliResult};
use crate::report::{MethodFailure, ReductionReport, ReportHeader, ReportRow};
use crate::response::{write_impulse, write_sigma};
use crate::sysfile::{load_system, write_system};

/// Relative slack (against the full model's norm) allowed when checking that
/// cumulative errors do not grow.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Bounds of the log-uniform distribution of random shifts.
const RANDOM_SHIFT_RANGE: (f64, f64) = (1e-2, 1e2);

/// A computed report plus the final reduced model of every method that
/// produced one, in configuration order.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: ReductionReport,
    pub roms: Vec<(Method, StateSpace)>,
}

/// Result of one method, before report assembly.
struct MethodRun {
    rows: Vec<ReportRow>,
    rom: Option<StateSpace>,
    failure: Option<String>,
    notes: Vec<String>,
    seconds: f64,
}

struct Context<'a> {
    cfg: &'a RunConfig,
    sys: &'a StateSpace,
    steps: &'a [StepSpec],
    order: usize,
    norms: &'a BTreeMap<String, f64>,
}

/// The cumulative steps of the run: the configured ones, or `count` single
/// real shifts drawn log-uniformly with random directions of the configured
/// side's dimension.
pub fn resolve_steps(cfg: &RunConfig, sys: &StateSpace) -> Vec<StepSpec> {
    match &cfg.shifts {
        ShiftPlan::Explicit(steps) => steps.clone(),
        ShiftPlan::None => Vec::new(),
        ShiftPlan::Random { seed, count } => {
            let dim = side_dimension(sys, cfg.side);
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let (lo, hi) = (RANDOM_SHIFT_RANGE.0.log10(), RANDOM_SHIFT_RANGE.1.log10());
            (0..*count)
                .map(|_| {
                    let shift = 10f64.powf(rng.gen_range(lo..hi));
                    let dir = (0..dim)
                        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
                        .collect();
                    StepSpec {
                        shifts: vec![Complex64::new(shift, 0.0)],
                        directions: Some(vec![dir]),
                    }
                })
                .collect()
        }
    }
}

fn side_dimension(sys: &StateSpace, side: Side) -> usize {
    match side {
        Side::Input => sys.inputs(),
        Side::Output => sys.outputs(),
    }
}

/// Directions of one step for an accumulation on `side`. Configured
/// directions belong to the configured side; everything else uses ones.
fn step_directions(
    ctx: &Context<'_>,
    step: &StepSpec,
    side: Side,
) -> Result<Vec<DVector<Complex64>>, String> {
    let dim = side_dimension(ctx.sys, side);
    match (&step.directions, side == ctx.cfg.side) {
        (Some(dirs), true) => dirs
            .iter()
            .map(|d| {
                if d.len() == dim {
                    Ok(DVector::from_column_slice(d))
                } else {
                    Err(format!(
                        "direction of length {} where {dim} is needed",
                        d.len()
                    ))
                }
            })
            .collect(),
        _ => Ok(vec![
            DVector::from_element(dim, Complex64::new(1.0, 0.0));
            step.shifts.len()
        ]),
    }
}

/// Stability, Gramian-based error and gap, and in-band sigma error.
fn measure(
    ctx: &Context<'_>,
    method: Method,
    step: Option<usize>,
    rom: &StateSpace,
    iv: &Interval,
) -> CliResult<ReportRow> {
    let stable = rom.is_hurwitz();
    let (error, gap) = if stable {
        let terms = error_terms(ctx.sys, rom, iv)?;
        (Some(terms.error()), Some(terms.pseudo_optimality_gap()))
    } else {
        (None, None)
    };
    let sigma_error = match *iv {
        Interval::Frequency { w1, w2 } if w2.is_finite() => Some(sigma_band_error(
            ctx.sys,
            rom,
            w1,
            w2,
            ctx.cfg.sigma_grid().points,
        )?),
        _ => None,
    };
    Ok(ReportRow {
        method: method.name().to_string(),
        step,
        order: rom.order(),
        interval: iv.to_string(),
        error,
        gap,
        sigma_error,
        growth_eigmin: None,
        deficit_eigmin: None,
        stable,
        monotone: None,
    })
}

fn exact_gramian(sys: &StateSpace, side: Side, iv: &Interval) -> CliResult<DenseMatrix> {
    Ok(match side {
        Side::Input => controllability_gramian(sys, iv)?,
        Side::Output => observability_gramian(sys, iv)?,
    })
}

/// `eigmin(G − Approx) / ‖G‖`.
fn deficit(exact: &DenseMatrix, approx: &DenseMatrix) -> f64 {
    min_sym_eigenvalue(&(exact - approx)) / norm2(exact).max(f64::MIN_POSITIVE)
}

fn run_balanced(ctx: &Context<'_>, method: Method, run: &mut MethodRun) -> CliResult<()> {
    let iv = ctx.cfg.interval(method.kind());
    let bt = balanced_truncation(ctx.sys, ctx.order, &iv, None)?;
    if let Some(e) = &bt.rank_collapse {
        run.notes.push(format!("{method}: {e}"));
    }
    run.rows.push(measure(ctx, method, None, &bt.rom, &iv)?);
    run.rom = Some(bt.rom);
    Ok(())
}

fn run_cumulative(ctx: &Context<'_>, method: Method, run: &mut MethodRun) -> CliResult<()> {
    let iv = ctx.cfg.interval(method.kind());
    let side = ctx.cfg.side;
    let exact = exact_gramian(ctx.sys, side, &iv)?;
    let full = ctx.norms[&iv.to_string()];
    let mut state = CureState::new(ctx.sys, side)?;
    let mut previous_error = full;
    let mut previous_approx: Option<DenseMatrix> = None;
    for (k, step) in ctx.steps.iter().enumerate() {
        let dirs = step_directions(ctx, step, side)
            .map_err(|e| CliError::Config(format!("step {}: {e}", k + 1)))?;
        state.step(&step.shifts, &dirs)?;
        let rom = state.emit(&iv)?;
        let approx = state.gramian_approx(&iv)?.dense;
        let mut row = measure(ctx, method, Some(k + 1), &rom, &iv)?;
        row.growth_eigmin = previous_approx
            .as_ref()
            .map(|p| min_sym_eigenvalue(&(&approx - p)) / norm2(&approx).max(f64::MIN_POSITIVE));
        row.deficit_eigmin = Some(deficit(&exact, &approx));
        if let Some(e) = row.error {
            let ok = e <= previous_error + MONOTONE_SLACK * full;
            if !ok {
                warn!(
                    "{method}: error grew from {previous_error:e} to {e:e} at step {}",
                    k + 1
                );
                run.notes.push(format!(
                    "{method}: error grew at step {} ({previous_error:e} -> {e:e})",
                    k + 1
                ));
            }
            row.monotone = Some(ok);
            previous_error = e;
        }
        run.rows.push(row);
        run.rom = Some(rom);
        previous_approx = Some(approx);
    }
    Ok(())
}

fn run_cumulative_balanced(
    ctx: &Context<'_>,
    method: Method,
    run: &mut MethodRun,
) -> CliResult<()> {
    let iv = ctx.cfg.interval(method.kind());
    let mut states = [
        CureState::new(ctx.sys, Side::Input)?,
        CureState::new(ctx.sys, Side::Output)?,
    ];
    for (k, step) in ctx.steps.iter().enumerate() {
        for state in &mut states {
            let dirs = step_directions(ctx, step, state.side())
                .map_err(|e| CliError::Config(format!("step {}: {e}", k + 1)))?;
            state.step(&step.shifts, &dirs)?;
        }
    }
    let p = states[0].gramian_approx(&iv)?;
    let q = states[1].gramian_approx(&iv)?;
    let factors = GramianFactors::from_low_rank(&p, &q);
    let bt = balanced_truncation(ctx.sys, ctx.order, &iv, Some(&factors))?;
    if let Some(e) = &bt.rank_collapse {
        run.notes.push(format!("{method}: {e}"));
    }
    let mut row = measure(ctx, method, None, &bt.rom, &iv)?;
    let dp = deficit(&exact_gramian(ctx.sys, Side::Input, &iv)?, &p.dense);
    let dq = deficit(&exact_gramian(ctx.sys, Side::Output, &iv)?, &q.dense);
    row.deficit_eigmin = Some(dp.min(dq));
    run.rows.push(row);
    run.rom = Some(bt.rom);
    Ok(())
}

fn run_method(ctx: &Context<'_>, method: Method) -> MethodRun {
    let start = Instant::now();
    let mut run = MethodRun {
        rows: Vec::new(),
        rom: None,
        failure: None,
        notes: Vec::new(),
        seconds: 0.0,
    };
    let result = match method.family() {
        Family::Balanced => run_balanced(ctx, method, &mut run),
        Family::Cumulative => run_cumulative(ctx, method, &mut run),
        Family::CumulativeBalanced => run_cumulative_balanced(ctx, method, &mut run),
    };
    if let Err(e) = result {
        warn!("{method} failed: {e}");
        run.failure = Some(e.to_string());
    }
    run.seconds = start.elapsed().as_secs_f64();
    info!("{method} finished in {:.3} s", run.seconds);
    run
}

/// Runs every configured method on `sys`, concurrently when `parallel`.
/// Method failures are recorded in the report; only an unusable system or
/// configuration is an error.
pub fn run_with_system(cfg: &RunConfig, sys: &StateSpace, parallel: bool) -> CliResult<RunOutcome> {
    sys.require_hurwitz().map_err(|source| CliError::Model {
        path: cfg.system.clone(),
        source,
    })?;
    let steps = resolve_steps(cfg, sys);
    let order = cfg
        .order
        .unwrap_or_else(|| steps.iter().map(|s| s.shifts.len()).sum());
    let mut norms = BTreeMap::new();
    for m in &cfg.methods {
        let iv = cfg.interval(m.kind());
        if let std::collections::btree_map::Entry::Vacant(slot) = norms.entry(iv.to_string()) {
            slot.insert(limited_h2_norm(sys, &iv)?);
        }
    }
    let ctx = Context {
        cfg,
        sys,
        steps: &steps,
        order,
        norms: &norms,
    };
    let runs: Vec<MethodRun> = if parallel && cfg.methods.len() > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = cfg
                .methods
                .iter()
                .map(|&m| {
                    let ctx = &ctx;
                    scope.spawn(move || run_method(ctx, m))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
                .collect()
        })
    } else {
        cfg.methods.iter().map(|&m| run_method(&ctx, m)).collect()
    };

    let mut report = ReductionReport {
        header: ReportHeader {
            created: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            wall_seconds: BTreeMap::new(),
        },
        system: cfg.system.display().to_string(),
        norms,
        rows: Vec::new(),
        failures: Vec::new(),
        notes: Vec::new(),
    };
    let mut roms = Vec::new();
    for (&method, run) in cfg.methods.iter().zip(runs) {
        report
            .header
            .wall_seconds
            .insert(method.name().to_string(), run.seconds);
        report.rows.extend(run.rows);
        report.notes.extend(run.notes);
        if let Some(message) = run.failure {
            report.failures.push(MethodFailure {
                method: method.name().to_string(),
                message,
            });
        }
        if let Some(rom) = run.rom {
            roms.push((method, rom));
        }
    }
    Ok(RunOutcome { report, roms })
}

/// File-name form of a method name (`FL-CURE` → `fl-cure`).
pub fn method_slug(method: Method) -> String {
    method.name().to_ascii_lowercase()
}

/// Writes the reduced models, their response data and the report into the
/// configured output directory. Responses that cannot be computed (e.g. the
/// impulse response of an unstable model) are skipped with a note.
pub fn write_outputs(cfg: &RunConfig, sys: &StateSpace, outcome: &mut RunOutcome) -> CliResult<()> {
    let dir = &cfg.output;
    let (sigma_grid, time_grid) = (cfg.sigma_grid(), cfg.impulse_grid());
    for (method, rom) in &outcome.roms {
        let stem = format!("{}_{}", cfg.name, method_slug(*method));
        write_system(&dir.join(format!("{stem}.ss")), rom)?;
        if let Err(e) = write_sigma(
            &dir.join(format!("{stem}_sigma.tsv")),
            sys,
            rom,
            &sigma_grid,
        ) {
            outcome
                .report
                .notes
                .push(format!("{method}: sigma response skipped: {e}"));
        }
        if let Err(e) = write_impulse(
            &dir.join(format!("{stem}_impulse.tsv")),
            sys,
            rom,
            &time_grid,
        ) {
            outcome
                .report
                .notes
                .push(format!("{method}: impulse response skipped: {e}"));
        }
    }
    outcome.report.write(dir, &cfg.name)
}

/// Loads the system, runs all methods and writes every output file.
pub fn run(cfg: &RunConfig, parallel: bool) -> CliResult<RunOutcome> {
    let sys = load_system(&cfg.system)?;
    let mut outcome = run_with_system(cfg, &sys, parallel)?;
    write_outputs(cfg, &sys, &mut outcome)?;
    Ok(outcome)
}
