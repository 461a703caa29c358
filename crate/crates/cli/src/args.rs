//! Command-line flags, the JSON run configuration and their merge.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use robinlap::{Domain, FarEnd, SolverConfig};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "robinlap", version, about = "Robin p-Laplacian eigenvalue laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Principal eigenvalue for one domain, p and α.
    Solve,
    /// Eigenvalues along a list of α values (CSV).
    Sweep,
    /// Trace constant S(Ω, p, p).
    Trace,
    /// Trace constants of dilations μΩ and the fitted μ⁻¹ expansion.
    TraceSlope,
    /// Ball against the equal-volume shell.
    Compare,
    /// Log-log fit of the remainder after the two-term asymptote.
    Rates,
    /// Boundary concentration diagnostics of the eigenfunction.
    Concentration,
    /// Closed-form oracle checks and the inequality property test.
    Selftest,
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Domain as JSON ({"kind": "ball", "rho": 1, "nu": 2}) or a bare kind
    /// name for parameter-free domains ("halfline").
    #[arg(long, global = true)]
    pub domain: Option<String>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Comma-separated increasing α values.
    #[arg(long, global = true, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Comma-separated increasing dilation factors.
    #[arg(long, global = true, value_delimiter = ',')]
    pub mus: Option<Vec<f64>>,
    /// Bisection tolerance on |Λ + 1| for trace constants.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Ball radius for `compare`.
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// Inner shell radius for `compare`.
    #[arg(long, global = true)]
    pub inner: Option<f64>,
    /// Dimension for `compare`.
    #[arg(long, global = true)]
    pub nu: Option<u32>,
    /// Worker threads; 1 keeps sweeps sequential and warm-started.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Emit the tabular form: "t,u" for `solve`, "mu,S" for `trace-slope`.
    #[arg(long, global = true)]
    pub csv: bool,
    #[arg(long, global = true)]
    pub cells: Option<usize>,
    #[arg(long, global = true)]
    pub max_iterations: Option<usize>,
    #[arg(long, global = true)]
    pub residual_tolerance: Option<f64>,
    #[arg(long, global = true)]
    pub quotient_tolerance: Option<f64>,
    /// "neumann_free" or "dirichlet_cap".
    #[arg(long, global = true)]
    pub far_end: Option<String>,
    /// Report the Richardson-extrapolated value.
    #[arg(long, global = true)]
    pub richardson: bool,
    /// Gradient steps only.
    #[arg(long, global = true)]
    pub no_newton: bool,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub domain: Option<Domain>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub mus: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub rho: Option<f64>,
    pub inner: Option<f64>,
    pub nu: Option<u32>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub csv: Option<bool>,
    pub solver: Option<SolverConfig>,
}

/// Validated settings for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub domain: Option<Domain>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub mus: Option<Vec<f64>>,
    pub tol: f64,
    pub rho: f64,
    pub inner: Option<f64>,
    pub nu: u32,
    pub jobs: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub csv: bool,
    pub solver: SolverConfig,
}

pub fn parse_domain(text: &str) -> Result<Domain, String> {
    let trimmed = text.trim();
    let domain: Domain = if trimmed.starts_with('{') {
        serde_json::from_str(trimmed).map_err(|e| format!("bad domain JSON: {e}"))?
    } else {
        match trimmed {
            "halfline" => Domain::HalfLine,
            other => {
                return Err(format!(
                    "domain '{other}' needs parameters; pass JSON such as {{\"kind\": \"{other}\", ...}}"
                ))
            }
        }
    };
    domain.validate().map_err(|e| e.to_string())?;
    Ok(domain)
}

fn read_file_config(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
}

fn increasing(name: &str, xs: &[f64]) -> Result<(), String> {
    if xs.is_empty() {
        return Err(format!("--{name} is empty"));
    }
    if xs.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(format!("--{name} values must be finite and nonnegative"));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!("--{name} must be strictly increasing"));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, String> {
        let file = match &cli.common.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };
        let c = cli.common;
        let domain = match c.domain {
            Some(text) => Some(parse_domain(&text)?),
            None => file.domain,
        };
        if let Some(d) = &domain {
            d.validate().map_err(|e| e.to_string())?;
        }

        let mut solver = file.solver.unwrap_or_default();
        if let Some(v) = c.cells {
            solver.cells = v;
        }
        if let Some(v) = c.max_iterations {
            solver.max_iterations = v;
        }
        if let Some(v) = c.residual_tolerance {
            solver.residual_tolerance = v;
        }
        if let Some(v) = c.quotient_tolerance {
            solver.quotient_tolerance = v;
        }
        if let Some(v) = c.far_end {
            solver.far_end = match v.as_str() {
                "neumann_free" => FarEnd::NeumannFree,
                "dirichlet_cap" => FarEnd::DirichletCap,
                other => return Err(format!("--far-end must be neumann_free or dirichlet_cap, got {other}")),
            };
        }
        if c.richardson {
            solver.richardson = true;
        }
        if c.no_newton {
            solver.newton = false;
        }
        solver.validate().map_err(|e| e.to_string())?;

        let run = RunConfig {
            command: cli.command,
            domain,
            p: c.p.or(file.p),
            alpha: c.alpha.or(file.alpha),
            alphas: c.alphas.or(file.alphas),
            mus: c.mus.or(file.mus),
            tol: c.tol.or(file.tol).unwrap_or(1e-8),
            rho: c.rho.or(file.rho).unwrap_or(1.0),
            inner: c.inner.or(file.inner),
            nu: c.nu.or(file.nu).unwrap_or(2),
            jobs: c.jobs.or(file.jobs).unwrap_or(1),
            seed: c.seed.or(file.seed).unwrap_or(0),
            output: c.output.or(file.output),
            csv: c.csv || file.csv.unwrap_or(false),
            solver,
        };
        run.validate()?;
        Ok(run)
    }

    fn validate(&self) -> Result<(), String> {
        if let Some(p) = self.p {
            if !(p.is_finite() && p > 1.0) {
                return Err(format!("--p must exceed 1, got {p}"));
            }
        }
        if let Some(a) = self.alpha {
            if !(a.is_finite() && a >= 0.0) {
                return Err(format!("--alpha must be finite and nonnegative, got {a}"));
            }
        }
        if let Some(xs) = &self.alphas {
            increasing("alphas", xs)?;
        }
        if let Some(xs) = &self.mus {
            increasing("mus", xs)?;
            if xs.len() < 3 || xs[0] <= 0.0 {
                return Err("--mus needs at least 3 positive values".into());
            }
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(format!("--tol must be positive, got {}", self.tol));
        }
        if self.jobs == 0 {
            return Err("--jobs must be at least 1".into());
        }
        Ok(())
    }

    pub fn need_domain(&self) -> Result<&Domain, String> {
        self.domain.as_ref().ok_or_else(|| "--domain is required".to_string())
    }

    pub fn need_p(&self) -> Result<f64, String> {
        self.p.ok_or_else(|| "--p is required".to_string())
    }

    pub fn need_alpha(&self) -> Result<f64, String> {
        self.alpha.ok_or_else(|| "--alpha is required".to_string())
    }

    pub fn need_alphas(&self) -> Result<&[f64], String> {
        self.alphas.as_deref().ok_or_else(|| "--alphas is required".to_string())
    }

    pub fn need_mus(&self) -> Result<&[f64], String> {
        self.mus.as_deref().ok_or_else(|| "--mus is required".to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_and_json_domains() {
        assert_eq!(parse_domain("halfline").unwrap(), Domain::HalfLine);
        assert_eq!(parse_domain(r#"{"kind":"ball","rho":1,"nu":2}"#).unwrap(), Domain::Ball { rho: 1.0, nu: 2 });
        assert!(parse_domain("ball").is_err());
        assert!(parse_domain(r#"{"kind":"ball","rho":-1,"nu":2}"#).is_err());
        assert!(parse_domain(r#"{"kind":"ball","rho":1,"nu":2,"extra":0}"#).is_err());
    }

    #[test]
    fn flags_override_the_file() {
        let dir = std::env::temp_dir().join(format!("robinlap-args-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.json");
        std::fs::write(&path, r#"{"p": 3, "alpha": 2, "solver": {"cells": 100}}"#).unwrap();
        let cli = Cli::parse_from(["robinlap", "solve", "--config", path.to_str().unwrap(), "--alpha", "5", "--domain", "halfline"]);
        let run = RunConfig::from_cli(cli).unwrap();
        assert_eq!(run.p, Some(3.0));
        assert_eq!(run.alpha, Some(5.0));
        assert_eq!(run.solver.cells, 100);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            vec!["robinlap", "solve", "--p", "1"],
            vec!["robinlap", "sweep", "--alphas", "4,2"],
            vec!["robinlap", "solve", "--far-end", "sideways"],
            vec!["robinlap", "solve", "--cells", "2"],
            vec!["robinlap", "trace-slope", "--mus", "1,2"],
        ];
        for argv in bad {
            assert!(RunConfig::from_cli(Cli::parse_from(argv.clone())).is_err(), "{argv:?}");
        }
    }
}
