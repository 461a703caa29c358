//! α-sweeps, remainder-rate fits, ball/shell comparisons and diagnostics of
//! eigenfunction concentration near the boundary.

use rayon::prelude::*;
use serde::Serialize;

use crate::closedform::{half_line_eigenvalue, leading_asymptote, remainder_reference_exponent};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::quotient::{layer_rate, radial_eigenvalue, solve_domain, EigenSolution, Layout, SolverConfig};
use crate::trace::least_squares;

/// Relative slack of the upper bound λ ≤ (1−p)α^{p/(p−1)}.
pub const UPPER_BOUND_SLACK: f64 = 1e-6;

/// Largest accepted rms deviation (in log units) of a remainder-rate fit.
pub const FIT_RESIDUAL_LIMIT: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub domain: Domain,
    pub p: f64,
    pub config: SolverConfig,
    pub rows: Vec<SweepRow>,
    /// Some row did not converge.
    pub partial: bool,
    #[serde(skip)]
    pub solutions: Vec<EigenSolution>,
}

impl SweepResult {
    /// `alpha,lambda,residual,converged` table.
    pub fn to_csv(&self) -> String {
        use crate::report::sig12;
        let mut out = String::from("alpha,lambda,residual,converged\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", sig12(r.alpha), sig12(r.lambda), sig12(r.residual), r.converged));
        }
        out
    }

    /// Converged rows with λ > (1−p)α^{p/(p−1)} + 10⁻⁶|λ|.
    pub fn upper_bound_violations(&self) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.converged && !upper_bound_holds(self.p, r.alpha, r.lambda))
            .map(|r| r.alpha)
            .collect()
    }

    /// Converged rows are strictly decreasing in α.
    pub fn strictly_decreasing(&self) -> bool {
        let lam: Vec<f64> = self.rows.iter().filter(|r| r.converged).map(|r| r.lambda).collect();
        lam.windows(2).all(|w| w[1] < w[0])
    }
}

pub fn upper_bound_holds(p: f64, alpha: f64, lambda: f64) -> bool {
    let bound = (1.0 - p) * alpha.powf(p / (p - 1.0));
    lambda <= bound + UPPER_BOUND_SLACK * lambda.abs()
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("empty α list".into()));
    }
    if alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) || alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!("α list must be positive and strictly increasing: {alphas:?}")));
    }
    Ok(())
}

/// Solves Λ(Ω, p, α) along `alphas`. With `jobs` ≤ 1 the rows are solved in
/// order, each warm-started from the previous one; otherwise they run
/// independently on `jobs` threads.
pub fn alpha_sweep(domain: &Domain, p: f64, alphas: &[f64], config: &SolverConfig, jobs: usize) -> Result<SweepResult> {
    check_alphas(alphas)?;
    let solutions: Vec<EigenSolution> = if jobs <= 1 {
        let mut out: Vec<EigenSolution> = Vec::with_capacity(alphas.len());
        for a in alphas {
            let s = solve_domain(domain, p, *a, config, out.last())?;
            out.push(s);
        }
        out
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| alphas.par_iter().map(|a| solve_domain(domain, p, *a, config, None)).collect::<Result<_>>())?
    };
    let rows: Vec<SweepRow> = alphas
        .iter()
        .zip(&solutions)
        .map(|(a, s)| SweepRow {
            alpha: *a,
            lambda: s.value(),
            residual: s.residual,
            iterations: s.iterations,
            converged: s.converged,
        })
        .collect();
    let partial = rows.iter().any(|r| !r.converged);
    Ok(SweepResult { domain: domain.clone(), p, config: config.clone(), rows, partial, solutions })
}

/// |λ(α) − leading(α)|, the remainder beyond the two-term asymptote.
pub fn remainder(p: f64, alpha: f64, lambda: f64, h_max: f64, nu: u32) -> Result<f64> {
    Ok((lambda - leading_asymptote(p, alpha, h_max, nu)?.value).abs())
}

/// Log–log least-squares fit of the remainder |λ − leading| ≈ C·α^e.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Twice the standard error of the slope.
    pub confidence: f64,
    /// rms deviation in log units.
    pub fit_residual: f64,
    /// 1 − κ for smooth boundaries.
    pub reference_exponent: f64,
    pub points: usize,
    /// The remainder is o(α) along the sweep, i.e. slope < 1.
    pub sublinear: bool,
}

/// Rate fit requiring at least 4 converged rows over two decades of α.
pub fn fit_remainder_rate(sweep: &SweepResult, h_max: f64, nu: u32) -> Result<RateFit> {
    fit_remainder_rate_span(sweep, h_max, nu, 2.0)
}

/// Rate fit over at least `min_decades` decades of α.
pub fn fit_remainder_rate_span(sweep: &SweepResult, h_max: f64, nu: u32, min_decades: f64) -> Result<RateFit> {
    let rows: Vec<&SweepRow> = sweep.rows.iter().filter(|r| r.converged).collect();
    if rows.len() < 4 {
        return Err(Error::FitRejected(format!("need at least 4 converged rows, got {}", rows.len())));
    }
    let span = (rows[rows.len() - 1].alpha / rows[0].alpha).log10();
    if span < min_decades * (1.0 - 1e-12) {
        return Err(Error::FitRejected(format!("α spans {span:.3} decades, need {min_decades}")));
    }
    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for r in &rows {
        let rem = remainder(sweep.p, r.alpha, r.lambda, h_max, nu)?;
        if !(rem > 0.0) {
            return Err(Error::FitRejected(format!("zero remainder at α = {}", r.alpha)));
        }
        xs.push(r.alpha.ln());
        ys.push(rem.ln());
    }
    let (intercept, slope, fit_residual) = least_squares(&xs, &ys);
    if fit_residual > FIT_RESIDUAL_LIMIT {
        return Err(Error::FitRejected(format!("log–log residual {fit_residual:.3} exceeds {FIT_RESIDUAL_LIMIT}")));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sse = fit_residual * fit_residual * n;
    let stderr = if n > 2.0 { (sse / (n - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    Ok(RateFit {
        slope,
        intercept,
        confidence: 2.0 * stderr,
        fit_residual,
        reference_exponent: remainder_reference_exponent(sweep.p),
        points: rows.len(),
        sublinear: slope < 1.0,
    })
}

/// Ball B_ρ against the shell r < |x| < R of equal volume.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoperimetricComparison {
    pub rho: f64,
    pub inner: f64,
    pub outer: f64,
    pub lambda_ball: f64,
    pub lambda_shell: f64,
    /// λ_shell − λ_ball.
    pub gap: f64,
    /// (ν−1)(1/ρ − 1/R)·α from the two-term asymptote.
    pub predicted_gap: f64,
    /// λ_ball < λ_shell strictly.
    pub ball_below: bool,
}

/// Outer radius R with R^ν − r^ν = ρ^ν.
pub fn equal_volume_outer(rho: f64, r: f64, nu: u32) -> f64 {
    (rho.powi(nu as i32) + r.powi(nu as i32)).powf(1.0 / nu as f64)
}

pub fn isoperimetric_compare(
    rho: f64,
    r: f64,
    p: f64,
    alpha: f64,
    nu: u32,
    config: &SolverConfig,
) -> Result<IsoperimetricComparison> {
    let outer = equal_volume_outer(rho, r, nu);
    let ball = Domain::ball(rho, nu)?;
    let shell = Domain::shell(r, outer, nu)?;
    let solve = |d: &Domain| -> Result<f64> {
        let s = radial_eigenvalue(d, p, alpha, config)?;
        if !s.converged {
            return Err(Error::NotConverged { alpha, residual: s.residual });
        }
        Ok(s.value())
    };
    let lambda_ball = solve(&ball)?;
    let lambda_shell = solve(&shell)?;
    Ok(IsoperimetricComparison {
        rho,
        inner: r,
        outer,
        lambda_ball,
        lambda_shell,
        gap: lambda_shell - lambda_ball,
        predicted_gap: nu.saturating_sub(1) as f64 * (1.0 / rho - 1.0 / outer) * alpha,
        ball_below: lambda_ball < lambda_shell,
    })
}

/// Boundary-layer diagnostics of a computed eigenfunction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub beta: f64,
    /// (a, m(a)): share of the L^p mass within distance a/β of the Robin
    /// boundary.
    pub mass_fractions: Vec<(f64, f64)>,
    /// Slope of log u against the boundary distance over [2/β, 10/β].
    pub decay_slope: f64,
    /// The grid does not reach 10/β away from the boundary.
    pub truncated_window: bool,
    /// Shells only: (1/R + 1/r)·(mass within 5/β of the inner sphere).
    pub localization: Option<f64>,
    /// Cut-off a of the Agmon integral, taken over distances > a/β.
    pub agmon_cutoff: f64,
    /// log of ∫(|u'|^p + α^{p/(p−1)}|u|^p)·e^{(p−1)^{1/p}β·dist}·w / α^{2p/(p−1)}.
    pub agmon_log_ratio: f64,
}

pub const MASS_RADII: [f64; 4] = [1.0, 2.0, 5.0, 10.0];

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

pub fn concentration_report(
    solution: &EigenSolution,
    domain: &Domain,
    p: f64,
    alpha: f64,
    config: &SolverConfig,
) -> Result<ConcentrationReport> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("concentration needs α > 0, got {alpha}")));
    }
    let layout = Layout::for_domain(domain, p, alpha, config)?;
    let nodes = &solution.nodes;
    let u = &solution.values;
    if nodes.len() < 2 || nodes.len() != u.len() {
        return Err(Error::ShapeMismatch { expected: nodes.len(), got: u.len() });
    }
    let beta = layer_rate(p, alpha);

    struct Cell {
        dist: f64,
        mass: f64,
        slope: f64,
        mid: f64,
        weighted_width: f64,
    }
    let cells: Vec<Cell> = (0..nodes.len() - 1)
        .map(|i| {
            let h = nodes[i + 1] - nodes[i];
            let t = 0.5 * (nodes[i] + nodes[i + 1]);
            let mid = 0.5 * (u[i] + u[i + 1]);
            let ww = layout.weight(t) * h;
            Cell {
                dist: layout.boundary_distance(t),
                mass: mid.abs().powf(p) * ww,
                slope: (u[i + 1] - u[i]) / h,
                mid,
                weighted_width: ww,
            }
        })
        .collect();
    let total: f64 = cells.iter().map(|c| c.mass).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroFunction);
    }
    let mass_within = |d: f64| cells.iter().filter(|c| c.dist <= d).map(|c| c.mass).sum::<f64>() / total;
    let mass_fractions = MASS_RADII.iter().map(|a| (*a, mass_within(a / beta).min(1.0))).collect();

    let (lo, hi) = (2.0 / beta, 10.0 / beta);
    let max_dist = nodes.iter().map(|t| layout.boundary_distance(*t)).fold(0.0, f64::max);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, v) in nodes.iter().zip(u) {
        let d = layout.boundary_distance(*t);
        if d >= lo && d <= hi && *v > 0.0 {
            xs.push(d);
            ys.push(v.ln());
        }
    }
    let decay_slope = if xs.len() >= 2 { least_squares(&xs, &ys).1 } else { f64::NAN };

    let localization = match domain {
        Domain::Shell { inner, outer, .. } => {
            let near: f64 = cells
                .iter()
                .zip(nodes.windows(2))
                .filter(|(_, w)| 0.5 * (w[0] + w[1]) - inner <= 5.0 / beta)
                .map(|(c, _)| c.mass)
                .sum::<f64>()
                / total;
            Some((1.0 / outer + 1.0 / inner) * near)
        }
        _ => None,
    };

    let agmon_cutoff = 1.0;
    let rate = (p - 1.0).powf(1.0 / p) * beta;
    let scale = alpha.powf(p / (p - 1.0));
    let logs: Vec<f64> = cells
        .iter()
        .filter(|c| c.dist > agmon_cutoff / beta)
        .map(|c| {
            let density = c.slope.abs().powf(p) + scale * c.mid.abs().powf(p);
            density.ln() + rate * c.dist + c.weighted_width.ln()
        })
        .collect();
    let agmon_log_ratio = log_sum_exp(&logs) - 2.0 * p / (p - 1.0) * alpha.ln();

    Ok(ConcentrationReport {
        beta,
        mass_fractions,
        decay_slope,
        truncated_window: max_dist < hi,
        localization,
        agmon_cutoff,
        agmon_log_ratio,
    })
}

/// Fraction of ∫|u|^p w within the absolute distance `distance` of the Robin
/// boundary.
pub fn mass_within_distance(
    solution: &EigenSolution,
    domain: &Domain,
    p: f64,
    alpha: f64,
    config: &SolverConfig,
    distance: f64,
) -> Result<f64> {
    let layout = Layout::for_domain(domain, p, alpha, config)?;
    let (t, u) = (&solution.nodes, &solution.values);
    let mut near = 0.0;
    let mut total = 0.0;
    for i in 0..t.len().saturating_sub(1) {
        let mid = 0.5 * (t[i] + t[i + 1]);
        let m = (0.5 * (u[i] + u[i + 1])).abs().powf(p) * layout.weight(mid) * (t[i + 1] - t[i]);
        total += m;
        if layout.boundary_distance(mid) <= distance {
            near += m;
        }
    }
    if !(total > 0.0) {
        return Err(Error::ZeroFunction);
    }
    Ok((near / total).min(1.0))
}

/// λ(B_{μρ}, p, α)·μ^p against λ(B_ρ, p, μ^{p−1}α); returns both sides.
pub fn scaling_pair(rho: f64, nu: u32, p: f64, alpha: f64, mu: f64, config: &SolverConfig) -> Result<(f64, f64)> {
    let big = radial_eigenvalue(&Domain::ball(mu * rho, nu)?, p, alpha, config)?;
    let small = radial_eigenvalue(&Domain::ball(rho, nu)?, p, mu.powf(p - 1.0) * alpha, config)?;
    Ok((big.value() * mu.powf(p), small.value()))
}

/// Relative deviation of a computed eigenvalue from the half-line value.
pub fn half_line_error(p: f64, alpha: f64, lambda: f64) -> Result<f64> {
    let exact = half_line_eigenvalue(p, alpha)?.value;
    Ok((lambda - exact).abs() / exact.abs().max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_line_sweep() {
        let cfg = SolverConfig::default();
        let sweep = alpha_sweep(&Domain::HalfLine, 2.0, &[1.0, 2.0, 4.0, 8.0], &cfg, 1).unwrap();
        assert!(!sweep.partial);
        for (r, exact) in sweep.rows.iter().zip([-1.0, -4.0, -16.0, -64.0]) {
            assert!((r.lambda - exact).abs() <= 1e-3 * exact.abs(), "{r:?}");
        }
        assert!(sweep.strictly_decreasing());
        assert!(sweep.upper_bound_violations().is_empty());
        let csv = sweep.to_csv();
        assert!(csv.starts_with("alpha,lambda,residual,converged\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn parallel_sweep_matches_cold_sequential() {
        let cfg = SolverConfig::default();
        let d = Domain::ball(1.0, 2).unwrap();
        let par = alpha_sweep(&d, 2.0, &[2.0, 4.0, 8.0], &cfg, 3).unwrap();
        for r in &par.rows {
            let cold = solve_domain(&d, 2.0, r.alpha, &cfg, None).unwrap();
            assert_eq!(cold.value(), r.lambda);
        }
    }

    #[test]
    fn rejects_bad_alpha_lists() {
        let cfg = SolverConfig::default();
        assert!(alpha_sweep(&Domain::HalfLine, 2.0, &[2.0, 1.0], &cfg, 1).is_err());
        assert!(alpha_sweep(&Domain::HalfLine, 2.0, &[0.0, 1.0], &cfg, 1).is_err());
        assert!(alpha_sweep(&Domain::HalfLine, 2.0, &[], &cfg, 1).is_err());
    }

    #[test]
    fn equal_volume_geometry() {
        assert!((equal_volume_outer(1.0, 0.75, 2) - 1.25).abs() < 1e-15);
        let r = equal_volume_outer(1.0, 0.5, 3);
        assert!((r.powi(3) - 0.125 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn comparison_at_zero_alpha() {
        let c = isoperimetric_compare(1.0, 0.75, 2.0, 0.0, 2, &SolverConfig::default()).unwrap();
        assert_eq!(c.lambda_ball, 0.0);
        assert_eq!(c.lambda_shell, 0.0);
        assert!(!c.ball_below);
    }

    #[test]
    fn rate_fit_preconditions() {
        let cfg = SolverConfig::default();
        let sweep = alpha_sweep(&Domain::ball(1.0, 2).unwrap(), 2.0, &[10.0, 20.0, 40.0], &cfg, 1).unwrap();
        assert!(matches!(fit_remainder_rate(&sweep, 1.0, 2), Err(Error::FitRejected(_))));
        let sweep = alpha_sweep(&Domain::ball(1.0, 2).unwrap(), 2.0, &[10.0, 20.0, 40.0, 80.0], &cfg, 1).unwrap();
        assert!(matches!(fit_remainder_rate(&sweep, 1.0, 2), Err(Error::FitRejected(_))));
        assert!(fit_remainder_rate_span(&sweep, 1.0, 2, 0.9).is_ok());
    }

    #[test]
    fn flat_layer_remainder_is_truncation_only() {
        // Flat weight: the asymptote is exact up to a truncation error that
        // decays like e^{−2αδ}.
        let cfg = SolverConfig::default();
        let d = Domain::model_layer(vec![0.0], 1.0).unwrap();
        let sweep = alpha_sweep(&d, 2.0, &[1.0, 1.5, 2.0, 3.0, 4.0], &cfg, 1).unwrap();
        let fit = fit_remainder_rate_span(&sweep, 0.0, 2, 0.6).unwrap();
        assert!(fit.slope < -1.5, "{fit:?}");
    }

    #[test]
    fn half_line_concentration() {
        let cfg = SolverConfig::default();
        let s = solve_domain(&Domain::HalfLine, 2.0, 10.0, &cfg, None).unwrap();
        let r = concentration_report(&s, &Domain::HalfLine, 2.0, 10.0, &cfg).unwrap();
        assert!((r.decay_slope + 10.0).abs() < 1e-3, "{r:?}");
        assert!(!r.truncated_window);
        assert!(r.localization.is_none());
        // m(a) = 1 − e^{−2a} up to the truncation at 30/β.
        for (a, m) in &r.mass_fractions {
            assert!((m - (1.0 - (-2.0 * a).exp())).abs() < 1e-3, "{a} {m}");
        }
        assert!(r.mass_fractions.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(r.agmon_log_ratio.is_finite());
    }
}
