//! The four subcommands. Each writes its human-readable output to `out` so
//! callers (and tests) choose where it goes.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use misreport_core::identification::{build_ab_task, run_session, Chords};
use misreport_core::mechanisms::{check_properness, ScoringRule};
use misreport_core::model::{state_expectation, Agent, Payoff};
use misreport_core::oracle::{theorem_sweep, AgentOutcome, MIN_ORACLE_GRID};

use crate::{fmt_num, CliError, Outcome, RunConfig};

/// Default grid for `check-rule`.
pub const CHECK_GRID: usize = 1001;

/// Points sampled along the normalized payoff axis by `chords`.
pub const CHORD_SAMPLES: usize = 101;

const SWEEP_HEADER: [&str; 12] = [
    "mu", "mu_hat", "ratio", "p_solver", "p_closed", "p_grid", "q_match", "u_a", "u_b", "choice", "verdict",
    "theorem_ok",
];

const CHORD_HEADER: [&str; 9] =
    ["x_norm", "x_raw", "u0", "u1", "e_mu", "e_mu_hat", "chord_1", "chord_2", "x_star"];

fn stdout_err(e: io::Error) -> CliError {
    CliError::Io { path: "<stdout>".into(), source: e }
}

fn require_agent(config: &RunConfig) -> Result<&Agent, CliError> {
    config.agent.as_ref().ok_or_else(|| CliError::Input("config has no [agent] section".into()))
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Io { path: path.to_path_buf(), source: e.into() }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// One elicitation-plus-A/B session for the configured agent.
pub fn simulate(config_path: &Path, seed: Option<u64>, out: &mut impl Write) -> Result<Outcome, CliError> {
    let config = RunConfig::load(config_path)?;
    let agent = require_agent(&config)?;
    let action = config.action.as_ref().expect("validated alongside the agent");
    let rule = &config.rule;
    if !check_properness(rule, MIN_ORACLE_GRID)?.is_proper {
        return Err(CliError::Input(format!(
            "rule.kind = {} is not proper; reports under it say nothing about beliefs",
            rule.kind()
        )));
    }
    let task = build_ab_task(rule.bad_payoff(), rule.prize())?;
    let seed = seed.or(config.seed).unwrap_or(0);
    let record = run_session(agent, rule, &task, action, config.epsilon, seed)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let stdout_csv = |e: csv::Error| stdout_err(e.into());
    w.write_record(["reported", "choice", "verdict", "paid_task", "realized_action_taken", "realized_payoff"])
        .map_err(stdout_csv)?;
    w.write_record([
        fmt_num(record.reported.value()),
        record.choice.to_string(),
        record.verdict.to_string(),
        record.paid_task.to_string(),
        record.realized_action_taken.to_string(),
        record.realized_payoff.map(fmt_num).unwrap_or_default(),
    ])
    .map_err(stdout_csv)?;
    let bytes = w.into_inner().map_err(|e| stdout_err(e.into_error()))?;
    out.write_all(&bytes).map_err(stdout_err)?;
    writeln!(
        out,
        "verdict: {} (p = {:.6}, mu = {:.6}, mu_hat = {:.6})",
        record.verdict,
        record.reported.value(),
        agent.mu().value(),
        agent.mu_hat().value()
    )
    .map_err(stdout_err)?;
    Ok(Outcome::Success)
}

/// Runs the configured sweep and writes one CSV row per agent to `out_path`.
/// Negative when any agent breaks the report/choice equivalence.
pub fn sweep(
    config_path: &Path,
    out_path: &Path,
    seed: Option<u64>,
    grid: Option<usize>,
    out: &mut impl Write,
) -> Result<Outcome, CliError> {
    let config = RunConfig::load(config_path)?;
    let mut sweep = config.sweep.ok_or_else(|| CliError::Input("config has no [sweep] section".into()))?;
    if let Some(seed) = seed {
        sweep.seed = seed;
    }
    if let Some(grid) = grid {
        sweep.grid_size = grid;
    }
    sweep.validate().map_err(|e| CliError::Input(format!("sweep: {e}")))?;

    let file = create(out_path)?;
    let report = theorem_sweep(&sweep)?;
    write_sweep_csv(file, &report.outcomes, out_path)?;

    writeln!(out, "seed              {}", sweep.seed).map_err(stdout_err)?;
    writeln!(out, "{}", report.stats).map_err(stdout_err)?;
    Ok(if report.stats.n_theorem_violations == 0 { Outcome::Success } else { Outcome::Negative })
}

fn write_sweep_csv(file: File, outcomes: &[AgentOutcome], path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(io::BufWriter::new(file));
    w.write_record(SWEEP_HEADER).map_err(csv_err(path))?;
    for o in outcomes {
        w.write_record([
            fmt_num(o.mu),
            fmt_num(o.mu_hat),
            fmt_num(o.ratio),
            fmt_num(o.p_solver),
            fmt_num(o.p_closed),
            fmt_num(o.p_grid),
            fmt_num(o.q_match),
            fmt_num(o.u_a),
            fmt_num(o.u_b),
            o.choice.to_string(),
            o.verdict.to_string(),
            o.theorem_ok.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Grid check of properness. Negative, with a counterexample table, for an
/// improper rule.
pub fn check_rule(kind: &str, grid: usize, out: &mut impl Write) -> Result<Outcome, CliError> {
    let kind = kind.parse().map_err(|e: misreport_core::Error| CliError::Input(e.to_string()))?;
    let rule = ScoringRule::new(kind, Payoff::new(0.0)?, Payoff::new(1.0)?)?;
    let report = check_properness(&rule, grid).map_err(|e| CliError::Input(e.to_string()))?;

    if report.is_proper {
        writeln!(out, "{}: proper on a {}-point grid", report.rule, report.grid_size).map_err(stdout_err)?;
        return Ok(Outcome::Success);
    }
    writeln!(
        out,
        "{}: NOT proper on a {}-point grid, {} counterexamples",
        report.rule,
        report.grid_size,
        report.counterexamples.len()
    )
    .map_err(stdout_err)?;
    writeln!(out, "{:>14} {:>14} {:>14}", "mu", "best_report", "gain").map_err(stdout_err)?;
    for c in &report.counterexamples {
        writeln!(out, "{:>14.6} {:>14.6} {:>14.6e}", c.mu, c.report, c.gain).map_err(stdout_err)?;
    }
    Ok(Outcome::Negative)
}

/// Plot data for the chord picture: both state utilities, both state
/// expectations and both chords on the normalized payoff axis, with the
/// chord crossing repeated on every row (empty when parallel).
pub fn chords(config_path: &Path, out_path: &Path, out: &mut impl Write) -> Result<Outcome, CliError> {
    let config = RunConfig::load(config_path)?;
    let agent = require_agent(&config)?;
    let (x_lo, x_hi) = (config.rule.bad_payoff(), config.rule.prize());
    let chords = Chords::new(agent, x_lo, x_hi)?;
    let x_star = chords.intersection();
    let u = agent.utility();

    let file = create(out_path)?;
    let mut w = csv::Writer::from_writer(io::BufWriter::new(file));
    w.write_record(CHORD_HEADER).map_err(csv_err(out_path))?;
    let (lo, hi) = (x_lo.value(), x_hi.value());
    for i in 0..CHORD_SAMPLES {
        let t = i as f64 / (CHORD_SAMPLES - 1) as f64;
        let x = if i + 1 == CHORD_SAMPLES { hi } else { lo + t * (hi - lo) };
        w.write_record([
            fmt_num(t),
            fmt_num(x),
            fmt_num(u.u0.eval(x)?),
            fmt_num(u.u1.eval(x)?),
            fmt_num(state_expectation(u, agent.mu(), x)?),
            fmt_num(state_expectation(u, agent.mu_hat(), x)?),
            fmt_num(chords.first(t)),
            fmt_num(chords.second(t)),
            x_star.map(fmt_num).unwrap_or_default(),
        ])
        .map_err(csv_err(out_path))?;
    }
    w.flush().map_err(io_err(out_path))?;

    match x_star {
        Some(x) => writeln!(out, "x* = {x:.6}"),
        None => writeln!(out, "x* = none (chords are parallel)"),
    }
    .map_err(stdout_err)?;
    Ok(Outcome::Success)
}
