use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{EigenSolution, QuotientEvaluator, SolverConfig};
use crate::error::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

/// Slack allowed when comparing quotients that agree up to rounding.
fn slack(lambda: f64) -> f64 {
    64.0 * f64::EPSILON * lambda.abs() + f64::MIN_POSITIVE
}

struct Iterate {
    u: Vec<f64>,
    lambda: f64,
}

fn trial(ev: &QuotientEvaluator, u: &[f64], dir: &[f64], t: f64) -> Option<Iterate> {
    let moved: Vec<f64> = u.iter().zip(dir).map(|(a, d)| a + t * d).collect();
    let projected = ev.project(&moved);
    let (u, lambda) = ev.normalize(&projected).ok()?;
    lambda.is_finite().then_some(Iterate { u, lambda })
}

/// Newton direction for the bordered system
/// (∇J − λ∇N)/p = 0, N(u) = 1, linearized at a normalized u.
fn newton_direction(ev: &QuotientEvaluator, u: &[f64], lambda: f64, residual: &[f64]) -> Option<Vec<f64>> {
    let (_, gn) = ev.gradients(u).ok()?;
    let mut shift = lambda;
    for _ in 0..3 {
        let a = ev.newton_matrix(u, shift);
        if let (Some(x), Some(y)) = (a.solve(residual), a.solve(&gn)) {
            let by = dot(&gn, &y);
            if by != 0.0 && by.is_finite() {
                let dl = dot(&gn, &x) / by;
                let d: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| dl * yi - xi).collect();
                if d.iter().all(|v| v.is_finite()) {
                    return Some(d);
                }
            }
        }
        shift += 1e-12 * lambda.abs().max(1.0);
    }
    None
}

/// Minimizes the discrete Rayleigh quotient from `init`.
///
/// Each iteration first tries a Newton step of the Euler–Lagrange system
/// (a nonlinear Rayleigh-quotient iteration); it is kept only if the
/// quotient does not increase. Otherwise a preconditioned gradient step
/// with Armijo backtracking is taken. Every accepted iterate is clamped to
/// the nonnegative cone and renormalized to unit discrete mass, so the
/// quotient sequence is nonincreasing.
///
/// Non-convergence is not an error: the best iterate comes back with
/// `converged = false`.
pub fn minimize(ev: &QuotientEvaluator, config: &SolverConfig, init: &[f64]) -> Result<EigenSolution> {
    config.validate()?;
    if init.len() != ev.len() {
        return Err(Error::ShapeMismatch { expected: ev.len(), got: init.len() });
    }
    let start = ev.project(&init.iter().map(|x| x.abs()).collect::<Vec<_>>());
    let (u0, lambda0) = ev.normalize(&start)?;

    let finish = |u: Vec<f64>, lambda: f64, residual: f64, iterations: usize, converged: bool| EigenSolution {
        eigenvalue: lambda,
        extrapolated: None,
        residual,
        iterations,
        converged,
        nodes: ev.nodes().to_vec(),
        values: u,
    };

    if ev.alpha() == 0.0 && !ev.has_pinned_end() {
        // Constants attain the infimum 0.
        let (u, _) = ev.normalize(&vec![1.0; ev.len()])?;
        return Ok(finish(u, 0.0, 0.0, 0, true));
    }

    let p = ev.p();
    let mut it = Iterate { u: u0, lambda: lambda0 };
    let mut last_decrease = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut residual_vec = ev.residual_vector(&it.u, it.lambda)?;
    let mut residual = l1(&residual_vec);

    let stopping = |decrease: f64, residual: f64, lambda: f64| {
        decrease.abs() < config.quotient_tolerance && residual <= config.residual_tolerance * lambda.abs()
    };

    while iterations < config.max_iterations {
        if stopping(last_decrease, residual, it.lambda) {
            converged = true;
            break;
        }

        let mut next: Option<Iterate> = None;
        if config.newton {
            if let Some(d) = newton_direction(ev, &it.u, it.lambda, &residual_vec) {
                for t in [1.0, 0.5, 0.25] {
                    if let Some(c) = trial(ev, &it.u, &d, t) {
                        if c.lambda < it.lambda {
                            next = Some(c);
                            break;
                        }
                        // A rounding-level change is kept only if it improves
                        // the residual.
                        if c.lambda <= it.lambda + slack(it.lambda) {
                            let r = ev.residual_norm(&c.u, c.lambda)?;
                            if r < 0.5 * residual {
                                next = Some(c);
                                break;
                            }
                        }
                    }
                }
            }
        }

        if next.is_none() {
            let shift = it.lambda.abs() + 1.0;
            let dir = ev
                .preconditioner(&it.u, shift)
                .solve(&residual_vec)
                .map(|x| x.iter().map(|v| -v).collect::<Vec<f64>>());
            if let Some(d) = dir {
                // ∇R = p·(∇J − λ∇N)/p on the unit sphere N = 1.
                let slope = p * dot(&residual_vec, &d);
                if slope < 0.0 {
                    let mut t = config.initial_step;
                    while t > 1e-14 {
                        if let Some(c) = trial(ev, &it.u, &d, t) {
                            if c.lambda <= it.lambda + config.sufficient_decrease * t * slope {
                                next = Some(c);
                                break;
                            }
                        }
                        t *= config.shrink_factor;
                    }
                }
            }
        }

        match next {
            Some(c) => {
                last_decrease = (it.lambda - c.lambda) / it.lambda.abs().max(f64::MIN_POSITIVE);
                it = c;
                iterations += 1;
                residual_vec = ev.residual_vector(&it.u, it.lambda)?;
                residual = l1(&residual_vec);
            }
            None => {
                // No admissible step: the quotient has stagnated at rounding level.
                last_decrease = 0.0;
                converged = stopping(last_decrease, residual, it.lambda);
                break;
            }
        }
    }
    if !converged {
        converged = stopping(last_decrease, residual, it.lambda);
    }
    Ok(finish(it.u, it.lambda, residual, iterations, converged))
}

/// Outcome of re-solving from randomly perturbed initializers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationCheck {
    pub reference: f64,
    pub perturbed: Vec<f64>,
    /// All perturbed runs agree with the reference within `tolerance`·|λ|.
    pub consistent: bool,
}

/// Re-solves from three multiplicatively perturbed copies of `base` and
/// flags disagreement beyond `tolerance` (relative).
pub fn perturbation_check(
    ev: &QuotientEvaluator,
    config: &SolverConfig,
    base: &EigenSolution,
    tolerance: f64,
    seed: u64,
) -> Result<PerturbationCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perturbed = Vec::with_capacity(3);
    for _ in 0..3 {
        let init: Vec<f64> = base.values.iter().map(|v| v * (1.0 + 0.2 * rng.gen_range(-1.0..1.0))).collect();
        perturbed.push(minimize(ev, config, &init)?.eigenvalue);
    }
    let reference = base.eigenvalue;
    let consistent = perturbed.iter().all(|l| (l - reference).abs() <= tolerance * reference.abs().max(1e-300));
    Ok(PerturbationCheck { reference, perturbed, consistent })
}
