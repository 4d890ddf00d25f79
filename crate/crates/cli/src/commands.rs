//! `solve`, `verify` and `compare`. Each returns the process exit code.

use std::path::Path;

use frsr::harness::run_grid;
use frsr::solvers::{solve_alpha_star, solve_d_star, SolveReport, SolveStatus};
use frsr::utility::{certainty_equivalent, expected_utility};
use frsr::contracts::expected_payoffs;
use frsr::{Error, PayoffMap, Scenario};

use crate::config::RunConfig;
use crate::report::{self, fmt_bool, fmt_f64, fmt_opt, Csv};
use crate::{exit, CliError};

const SOLVE_FLAGS: [&str; 5] = [
    "beta_ge_half",
    "sign_change_found",
    "alpha_star_interior",
    "alpha_star_lt_half",
    "closed_form_agrees",
];

enum Solved {
    Ok(SolveReport),
    NoRoot(String),
    Failed(String),
}

fn classify(r: frsr::Result<SolveReport>) -> Solved {
    match r {
        Ok(rep) => Solved::Ok(rep),
        Err(e @ Error::NoRoot { .. }) => Solved::NoRoot(e.to_string()),
        Err(e) => Solved::Failed(e.to_string()),
    }
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Converged => "converged",
        SolveStatus::Boundary => "boundary",
        SolveStatus::Stalled => "stalled",
    }
}

/// One row per scenario with `α*`, and `D*` solved at that `α*`.
pub fn solve(cfg: &RunConfig, out: &Path) -> Result<i32, CliError> {
    let scenarios = cfg.expand()?;
    let mut header = vec![
        "id",
        "beta",
        "D",
        "alpha_star",
        "alpha_star_residual",
        "alpha_star_status",
        "d_star",
        "d_star_residual",
        "d_star_status",
    ];
    header.extend(SOLVE_FLAGS);
    header.extend(["status", "note"]);
    let mut csv = Csv::new(&header);
    let mut code = exit::OK;
    for s in &scenarios {
        let mut row = vec![s.id.clone(), fmt_f64(s.alloc.beta()), fmt_f64(s.rate)];
        let mut status = "ok";
        let mut note = String::new();
        let star = classify(solve_alpha_star(&s.alloc, &s.dist, s.rate, &s.quad, &s.tol));
        let mut flags = vec![String::new(); SOLVE_FLAGS.len()];
        match &star {
            Solved::Ok(rep) => {
                row.extend([fmt_f64(rep.value), fmt_f64(rep.residual), status_name(rep.status).into()]);
                for (cell, name) in flags.iter_mut().zip(SOLVE_FLAGS) {
                    *cell = fmt_bool(rep.flag(name).unwrap_or(false)).into();
                }
                if rep.status != SolveStatus::Converged {
                    status = status_name(rep.status);
                }
            }
            Solved::NoRoot(msg) | Solved::Failed(msg) => {
                row.extend([String::new(), String::new(), String::new()]);
                note = msg.clone();
                flags[0] = fmt_bool(s.alloc.beta() >= 0.5).into();
                flags[1] = "false".into();
            }
        }
        let d_star = match &star {
            Solved::Ok(rep) if rep.value > 0.0 && rep.value < 1.0 => {
                Some(classify(solve_d_star(&s.alloc, &s.dist, rep.value, &s.quad, &s.tol)))
            }
            _ => None,
        };
        match &d_star {
            Some(Solved::Ok(rep)) => {
                row.extend([fmt_f64(rep.value), fmt_f64(rep.residual), status_name(rep.status).into()]);
            }
            Some(Solved::NoRoot(msg)) | Some(Solved::Failed(msg)) => {
                row.extend([String::new(), String::new(), String::new()]);
                note = msg.clone();
            }
            None => row.extend([String::new(), String::new(), String::new()]),
        }
        for solved in std::iter::once(&star).chain(d_star.as_ref()) {
            match solved {
                Solved::NoRoot(_) => {
                    status = "no_root";
                    code = code.max(exit::NO_ROOT);
                }
                Solved::Failed(_) => {
                    status = "error";
                    code = exit::INVARIANT;
                }
                Solved::Ok(_) => {}
            }
        }
        row.extend(flags);
        row.extend([status.to_string(), note]);
        csv.push(row);
    }
    report::write(out, "solve.csv", &csv.render())?;
    Ok(code)
}

/// Runs the checks and writes `report.json` and `summary.csv`. Premise
/// failures do not fail the run; conclusion failures do.
pub fn verify(cfg: &RunConfig, out: &Path, jobs: usize) -> Result<i32, CliError> {
    let scenarios = cfg.expand()?;
    let grid = run_grid(&scenarios, &cfg.propositions, cfg.mc_samples, jobs)?;
    report::write(out, "report.json", &report::verify_json(cfg.seed, &grid)?)?;
    report::write(out, "summary.csv", &report::summary_csv(&grid))?;
    for (key, s) in &grid.summary {
        eprintln!(
            "{key}: {} pass, {} premise failures, {} conclusion failures, {} errored",
            s.passes, s.premise_failures, s.conclusion_failures, s.errored
        );
    }
    Ok(if grid.conclusion_failures() == 0 { exit::OK } else { exit::INVARIANT })
}

const COMPARE_HEADER: [&str; 19] = [
    "id", "beta", "D", "alpha", "e_p1", "e_p2", "v_p1", "v_p2", "e_y1", "e_y2", "eu_y1", "eu_y2",
    "ce_y1", "ce_y2", "eu_p1", "eu_p2", "ce_p1", "ce_p2", "status",
];

fn compare_row(s: &Scenario) -> frsr::Result<Vec<f64>> {
    let p = expected_payoffs(&s.alloc, &s.dist, s.rate, s.alpha, &s.quad)?;
    let u = &s.utility;
    // utilities are per unit of funds
    let maps = [
        PayoffMap::Proportional { share: s.alpha },
        PayoffMap::Residual { mult: 1.0, strike: s.rate },
        PayoffMap::Proportional { share: 1.0 - s.alpha },
        PayoffMap::Capped { mult: 1.0, cap: s.rate },
    ];
    let mut eu = Vec::with_capacity(4);
    let mut ce = Vec::with_capacity(4);
    for m in &maps {
        eu.push(expected_utility(u, &s.dist, m, &s.quad)?);
        ce.push(certainty_equivalent(u, &s.dist, m, &s.quad)?);
    }
    Ok(vec![
        p.e_p1, p.e_p2, p.v_p1, p.v_p2, p.e_y1, p.e_y2, eu[0], eu[1], ce[0], ce[1], eu[2], eu[3],
        ce[2], ce[3],
    ])
}

/// Side-by-side FR and SR payoffs, variances and utilities.
pub fn compare(cfg: &RunConfig, out: &Path) -> Result<i32, CliError> {
    let scenarios = cfg.expand()?;
    let mut csv = Csv::new(&COMPARE_HEADER);
    let mut code = exit::OK;
    for s in &scenarios {
        let mut row = vec![s.id.clone(), fmt_f64(s.alloc.beta()), fmt_f64(s.rate), fmt_f64(s.alpha)];
        match compare_row(s) {
            Ok(values) => {
                row.extend(values.into_iter().map(fmt_f64));
                row.push("ok".into());
            }
            Err(e) => {
                eprintln!("{}: {e}", s.id);
                row.extend(std::iter::repeat_n(fmt_opt(None), COMPARE_HEADER.len() - 5));
                row.push(if e.is_no_root() { "no_root".into() } else { "error".into() });
                code = code.max(if e.is_no_root() { exit::NO_ROOT } else { exit::INVARIANT });
            }
        }
        csv.push(row);
    }
    report::write(out, "compare.csv", &csv.render())?;
    Ok(code)
}
