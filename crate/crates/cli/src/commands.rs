//! Subcommand dispatch.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use robinlap::closedform::{
    aux_inequality_constant, check_inequality, half_line_eigenvalue, half_space_trace_constant, sector_eigenvalue,
};
use robinlap::experiments::{alpha_sweep, concentration_report, fit_remainder_rate, half_line_error, isoperimetric_compare};
use robinlap::quotient::solve_domain;
use robinlap::trace::{trace_constant, trace_expansion_slope};
use robinlap::{Domain, Error};
use serde::Serialize;

use crate::args::{Command, RunConfig};
use crate::output::{emit, to_csv, to_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_SELFTEST: i32 = 4;

/// Failure of a run, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Failure { code: EXIT_VALIDATION, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged { .. } | Error::Bracket { .. } | Error::FitRejected(_) => EXIT_NOT_CONVERGED,
            _ => EXIT_VALIDATION,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        Failure::validation(message)
    }
}

#[derive(Serialize)]
struct SolveReport<'a> {
    domain: &'a Domain,
    p: f64,
    alpha: f64,
    eigenvalue: f64,
    raw_eigenvalue: Option<f64>,
    residual: Option<f64>,
    iterations: Option<usize>,
    converged: bool,
    method: &'static str,
    formula: Option<&'static str>,
    half_line_value: Option<f64>,
}

#[derive(Serialize)]
struct Check {
    name: String,
    passed: bool,
    value: f64,
    expected: f64,
}

#[derive(Serialize)]
struct SelftestReport {
    seed: u64,
    passed: bool,
    checks: Vec<Check>,
}

fn write(run: &RunConfig, text: &str) -> Result<(), Failure> {
    emit(text, run.output.as_deref())
        .map_err(|e| Failure { code: EXIT_VALIDATION, message: format!("cannot write output: {e}") })
}

fn not_converged(what: &str) -> Failure {
    Failure { code: EXIT_NOT_CONVERGED, message: format!("{what} did not converge") }
}

pub fn run(run: &RunConfig) -> Result<(), Failure> {
    match run.command {
        Command::Solve => solve(run),
        Command::Sweep => sweep(run),
        Command::Trace => {
            let r = trace_constant(run.need_domain()?, run.need_p()?, run.tol, &run.solver)?;
            write(run, &to_json(&r))
        }
        Command::TraceSlope => {
            let fit = trace_expansion_slope(run.need_domain()?, run.need_p()?, run.need_mus()?, run.tol, &run.solver, run.jobs)?;
            if run.csv {
                let rows: Vec<Vec<f64>> = fit.mus.iter().zip(&fit.values).map(|(m, s)| vec![*m, *s]).collect();
                write(run, &to_csv("mu,S", &rows))
            } else {
                write(run, &to_json(&fit))
            }
        }
        Command::Compare => {
            let inner = run.inner.ok_or_else(|| Failure::validation("--inner is required"))?;
            let c = isoperimetric_compare(run.rho, inner, run.need_p()?, run.need_alpha()?, run.nu, &run.solver)?;
            write(run, &to_json(&c))
        }
        Command::Rates => {
            let domain = run.need_domain()?;
            let sweep = alpha_sweep(domain, run.need_p()?, run.need_alphas()?, &run.solver, run.jobs)?;
            let curv = domain.curvature();
            let fit = fit_remainder_rate(&sweep, curv.h_max(), curv.dimension)?;
            write(run, &to_json(&fit))
        }
        Command::Concentration => {
            let (domain, p, alpha) = (run.need_domain()?, run.need_p()?, run.need_alpha()?);
            let s = solve_domain(domain, p, alpha, &run.solver, None)?;
            let report = concentration_report(&s, domain, p, alpha, &run.solver)?;
            write(run, &to_json(&report))?;
            if s.converged {
                Ok(())
            } else {
                Err(not_converged("eigenvalue solve"))
            }
        }
        Command::Selftest => selftest(run),
    }
}

fn solve(run: &RunConfig) -> Result<(), Failure> {
    let (domain, p, alpha) = (run.need_domain()?, run.need_p()?, run.need_alpha()?);
    if let Domain::Sector { theta } = domain {
        if run.csv {
            return Err(Failure::validation("sectors have no eigenfunction table"));
        }
        let v = sector_eigenvalue(*theta, p, alpha)?;
        let report = SolveReport {
            domain,
            p,
            alpha,
            eigenvalue: v.value,
            raw_eigenvalue: None,
            residual: None,
            iterations: None,
            converged: true,
            method: "closed_form",
            formula: Some(v.formula),
            half_line_value: None,
        };
        return write(run, &to_json(&report));
    }
    let s = solve_domain(domain, p, alpha, &run.solver, None)?;
    if run.csv {
        write(run, &s.to_csv())?;
    } else {
        let report = SolveReport {
            domain,
            p,
            alpha,
            eigenvalue: s.value(),
            raw_eigenvalue: Some(s.eigenvalue),
            residual: Some(s.residual),
            iterations: Some(s.iterations),
            converged: s.converged,
            method: if s.extrapolated.is_some() { "solver+richardson" } else { "solver" },
            formula: None,
            half_line_value: matches!(domain, Domain::HalfLine).then(|| (1.0 - p) * alpha.powf(p / (p - 1.0))),
        };
        write(run, &to_json(&report))?;
    }
    if s.converged {
        Ok(())
    } else {
        Err(not_converged("eigenvalue solve"))
    }
}

fn sweep(run: &RunConfig) -> Result<(), Failure> {
    let s = alpha_sweep(run.need_domain()?, run.need_p()?, run.need_alphas()?, &run.solver, run.jobs)?;
    write(run, &s.to_csv())?;
    if s.partial {
        Err(not_converged("sweep"))
    } else {
        Ok(())
    }
}

fn selftest(run: &RunConfig) -> Result<(), Failure> {
    let mut checks = Vec::new();
    let mut close = |name: String, value: f64, expected: f64, tol: f64| {
        let passed = (value - expected).abs() <= tol * expected.abs().max(1.0);
        checks.push(Check { name, passed, value, expected });
    };

    for p in [1.5, 2.0, 3.0] {
        for a in [1.0, 4.0, 16.0] {
            let exact = half_line_eigenvalue(p, a)?.value;
            let s = solve_domain(&Domain::HalfLine, p, a, &run.solver, None)?;
            let err = half_line_error(p, a, s.value())?;
            close(format!("half-line p={p} alpha={a} (relative error)"), err, 0.0, 1e-3);
            close(format!("half-line closed form p={p} alpha={a}"), exact, -(p - 1.0) * a.powf(p / (p - 1.0)), 1e-14);
        }
    }
    close("sector theta=pi/4 p=2 alpha=1".into(), sector_eigenvalue(FRAC_PI_4, 2.0, 1.0)?.value, -2.0, 1e-12);
    close(
        "sector theta=pi/2 equals half-plane".into(),
        sector_eigenvalue(FRAC_PI_2, 2.5, 3.0)?.value,
        half_line_eigenvalue(2.5, 3.0)?.value,
        1e-14,
    );
    close("half-space trace constant p=2".into(), half_space_trace_constant(2.0)?.value, 1.0, 1e-15);
    close("half-space trace constant p=3".into(), half_space_trace_constant(3.0)?.value, 2f64.powf(-2.0 / 3.0), 1e-14);
    close("inequality constant p=2".into(), aux_inequality_constant(2.0)?.value, 2.0, 1e-15);
    for (i, p) in [1.2, 1.5, 2.0, 3.0, 5.0].into_iter().enumerate() {
        let r = check_inequality(p, 100_000, run.seed.wrapping_add(i as u64))?;
        close(format!("inequality p={p} violations in 100000 samples"), r.violations as f64, 0.0, 0.0);
    }

    let passed = checks.iter().all(|c| c.passed);
    write(run, &to_json(&SelftestReport { seed: run.seed, passed, checks }))?;
    if passed {
        Ok(())
    } else {
        Err(Failure { code: EXIT_SELFTEST, message: "selftest failed".into() })
    }
}
