//! Trace constants S(Ω, p, p), defined through Λ(Ω, p, S) = −1, their
//! large-dilation expansion and the extension-operator lower bound.

use rayon::prelude::*;
use serde::Serialize;

use crate::closedform::half_space_trace_constant;
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::quotient::{layer_rate, solve_layout, EigenSolution, Layout, SolverConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceResult {
    pub s: f64,
    /// Final bisection bracket; degenerate for closed-form values.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// Λ(Ω, p, S), ideally −1.
    pub lambda_at_s: f64,
    pub method: &'static str,
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")))
    }
}

/// Bisection on α ↦ Λ(α) + 1 for a fixed 1D reduction.
fn bisect_layout(layout: &Layout, p: f64, tol: f64, config: &SolverConfig) -> Result<TraceResult> {
    let mut warm: Option<EigenSolution> = None;
    let eval = |alpha: f64, warm: &mut Option<EigenSolution>| -> Result<f64> {
        let sol = solve_layout(layout, p, alpha, config, warm.as_ref())?;
        if !sol.converged {
            return Err(Error::NotConverged { alpha, residual: sol.residual });
        }
        let v = sol.value();
        *warm = Some(sol);
        Ok(v)
    };

    let mut lo = 0.0;
    let mut f_lo = 1.0;
    let mut hi = 4.0 * (p - 1.0).powf(-(p - 1.0) / p);
    let mut lambda_hi = eval(hi, &mut warm)?;
    let mut doublings = 0;
    while lambda_hi + 1.0 >= 0.0 {
        if doublings == 60 {
            return Err(Error::Bracket { alpha_lo: lo, lambda_lo: f_lo - 1.0, alpha_hi: hi, lambda_hi });
        }
        lo = hi;
        f_lo = lambda_hi + 1.0;
        hi *= 2.0;
        lambda_hi = eval(hi, &mut warm)?;
        doublings += 1;
    }
    if f_lo.abs() <= tol {
        return Ok(TraceResult { s: lo, bracket: (lo, hi), iterations: 0, lambda_at_s: f_lo - 1.0, method: "bisection" });
    }
    let mut f_hi = lambda_hi + 1.0;
    if f_hi.abs() <= tol {
        return Ok(TraceResult { s: hi, bracket: (lo, hi), iterations: 0, lambda_at_s: lambda_hi, method: "bisection" });
    }

    let mut iterations = 0;
    loop {
        assert!(f_lo > 0.0 && f_hi < 0.0, "bracket lost its sign change: f({lo}) = {f_lo}, f({hi}) = {f_hi}");
        let mid = 0.5 * (lo + hi);
        iterations += 1;
        let f = eval(mid, &mut warm)? + 1.0;
        if f.abs() <= tol {
            return Ok(TraceResult { s: mid, bracket: (lo, hi), iterations, lambda_at_s: f - 1.0, method: "bisection" });
        }
        if f > 0.0 {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi || iterations >= 200 {
            return Err(Error::NotConverged { alpha: mid, residual: f.abs() });
        }
    }
}

/// S(Ω, p, p) to within |Λ(Ω, p, S) + 1| ≤ `tol`. The half-line and sectors
/// use the exact value; other domains bisect on the solver.
pub fn trace_constant(domain: &Domain, p: f64, tol: f64, config: &SolverConfig) -> Result<TraceResult> {
    check_tol(tol)?;
    domain.validate()?;
    let exact = |s: f64| TraceResult { s, bracket: (s, s), iterations: 0, lambda_at_s: -1.0, method: "closed_form" };
    match domain {
        Domain::HalfLine => Ok(exact(half_space_trace_constant(p)?.value)),
        Domain::Sector { theta } => {
            let s = half_space_trace_constant(p)?.value;
            if *theta >= std::f64::consts::FRAC_PI_2 {
                Ok(exact(s))
            } else {
                Ok(exact(s * theta.sin()))
            }
        }
        _ => {
            let layout = Layout::for_domain(domain, p, 1.0, config)?;
            bisect_layout(&layout, p, tol, config)
        }
    }
}

/// Trace constant of the exterior of the ball B_ρ, approximated by the
/// annulus ρ < |x| < ρ + L with a free outer end. L is `halfline_length`
/// boundary-layer widths at the half-space trace rate.
pub fn exterior_trace_constant(rho: f64, nu: u32, p: f64, tol: f64, config: &SolverConfig) -> Result<TraceResult> {
    check_tol(tol)?;
    let s_half = half_space_trace_constant(p)?.value;
    let outer = rho + config.halfline_length / layer_rate(p, s_half);
    let layout = Layout::exterior_ball(rho, nu, outer)?;
    let mut r = bisect_layout(&layout, p, tol, config)?;
    r.method = "bisection (truncated exterior)";
    Ok(r)
}

/// Least-squares fit S(μ) ≈ S_∞ − s/μ over a list of dilations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionFit {
    pub mus: Vec<f64>,
    pub values: Vec<f64>,
    pub s_inf: f64,
    pub slope: f64,
    /// Root-mean-square deviation of the fitted line.
    pub fit_residual: f64,
    pub reference_s_inf: f64,
    pub reference_slope: f64,
}

impl ExpansionFit {
    /// Plot-ready `mu,S` table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mu,S\n");
        for (m, s) in self.mus.iter().zip(&self.values) {
            out.push_str(&format!("{},{}\n", crate::report::sig12(*m), crate::report::sig12(*s)));
        }
        out
    }
}

/// Reference μ⁻¹ coefficient (p−1)^{(2−p)/p}·(ν−1)·H_max/p.
pub fn reference_slope(p: f64, nu: u32, h_max: f64) -> f64 {
    (p - 1.0).powf((2.0 - p) / p) * nu.saturating_sub(1) as f64 * h_max / p
}

/// Fits S(μ) ≈ S_∞ − s/μ to a precomputed table. Values that move in both
/// directions by more than `monotone_slack` are rejected.
pub fn fit_expansion(mus: &[f64], values: &[f64], monotone_slack: f64) -> Result<(f64, f64, f64)> {
    if mus.len() != values.len() {
        return Err(Error::ShapeMismatch { expected: mus.len(), got: values.len() });
    }
    if mus.len() < 3 {
        return Err(Error::FitRejected(format!("need at least 3 dilations, got {}", mus.len())));
    }
    if mus.iter().any(|m| !(*m > 0.0)) || mus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::FitRejected("dilations must be positive and strictly increasing".into()));
    }
    let rises = values.windows(2).any(|w| w[1] - w[0] > monotone_slack);
    let falls = values.windows(2).any(|w| w[0] - w[1] > monotone_slack);
    if rises && falls {
        return Err(Error::FitRejected(format!("trace constants are not monotone in μ: {values:?}")));
    }
    let xs: Vec<f64> = mus.iter().map(|m| 1.0 / m).collect();
    let (intercept, slope, rms) = least_squares(&xs, values);
    Ok((intercept, -slope, rms))
}

/// Ordinary least squares y ≈ a + b·x, returning (a, b, rms residual).
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum::<f64>() / n).sqrt();
    (a, b, rms)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

/// Trace constants of the dilations μΩ and the fitted μ⁻¹ expansion.
/// Dilations are solved on up to `jobs` threads; results do not depend on
/// the thread count.
pub fn trace_expansion_slope(
    domain: &Domain,
    p: f64,
    mus: &[f64],
    tol: f64,
    config: &SolverConfig,
    jobs: usize,
) -> Result<ExpansionFit> {
    let scaled: Vec<Domain> = mus.iter().map(|m| domain.scaled(*m)).collect::<Result<_>>()?;
    let values: Vec<f64> = pool(jobs)?.install(|| {
        scaled
            .par_iter()
            .map(|d| trace_constant(d, p, tol, config).map(|r| r.s))
            .collect::<Result<Vec<f64>>>()
    })?;
    let (s_inf, slope, fit_residual) = fit_expansion(mus, &values, 100.0 * tol)?;
    let curv = domain.curvature();
    Ok(ExpansionFit {
        mus: mus.to_vec(),
        values,
        s_inf,
        slope,
        fit_residual,
        reference_s_inf: half_space_trace_constant(p)?.value,
        reference_slope: reference_slope(p, domain.dimension(), curv.h_max()),
    })
}

/// Expansion fit for the truncated exterior of the ball B_ρ.
pub fn exterior_expansion_slope(
    rho: f64,
    nu: u32,
    p: f64,
    mus: &[f64],
    tol: f64,
    config: &SolverConfig,
    jobs: usize,
) -> Result<ExpansionFit> {
    let values: Vec<f64> = pool(jobs)?.install(|| {
        mus.par_iter()
            .map(|m| exterior_trace_constant(m * rho, nu, p, tol, config).map(|r| r.s))
            .collect::<Result<Vec<f64>>>()
    })?;
    let (s_inf, slope, fit_residual) = fit_expansion(mus, &values, 100.0 * tol)?;
    Ok(ExpansionFit {
        mus: mus.to_vec(),
        values,
        s_inf,
        slope,
        fit_residual,
        reference_s_inf: half_space_trace_constant(p)?.value,
        // The complement of B_ρ has H = −1/ρ for the normal pointing into the ball.
        reference_slope: reference_slope(p, nu, -1.0 / rho),
    })
}

/// Lower bound (1 + S(Ω^c)/S(Ω))^{1/p} for the norm of any extension
/// operator W^{1,p}(Ω) → W^{1,p}(ℝ^ν).
pub fn extension_lower_bound(s_omega: f64, s_complement: f64, p: f64) -> Result<f64> {
    if !(s_omega > 0.0 && s_complement > 0.0 && s_omega.is_finite() && s_complement.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "trace constants must be positive, got {s_omega} and {s_complement}"
        )));
    }
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("exponent p must exceed 1, got {p}")));
    }
    Ok((1.0 + s_complement / s_omega).powf(1.0 / p))
}

/// μ⁻¹ coefficient of the extension bound for μΩ assembled from the two
/// expansion fits: 2^{1/p}·(s_Ω − s_c)/(2p·S_∞).
pub fn extension_coefficient(omega: &ExpansionFit, complement: &ExpansionFit, p: f64) -> f64 {
    let s_inf = 0.5 * (omega.s_inf + complement.s_inf);
    2f64.powf(1.0 / p) * (omega.slope - complement.slope) / (2.0 * p * s_inf)
}

/// Predicted coefficient (p−1)^{1/p}(ν−1)(H_max + H_min)/(2^{(p−1)/p}p²).
pub fn extension_coefficient_reference(p: f64, nu: u32, h_max: f64, h_min: f64) -> f64 {
    (p - 1.0).powf(1.0 / p) * nu.saturating_sub(1) as f64 * (h_max + h_min)
        / (2f64.powf((p - 1.0) / p) * p * p)
}
