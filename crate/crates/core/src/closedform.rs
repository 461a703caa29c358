//! Exact reference values: the half-line and planar sectors, the constant
//! of the elementary inequality (a+b)^p ≤ (1+ε)a^p + c·ε^{1−p}·b^p, and the
//! two-term large-α asymptote.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// A closed-form number together with the formula that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedFormValue {
    pub value: f64,
    pub formula: &'static str,
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("exponent p must exceed 1, got {p}")))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("α must be finite and ≥ 0, got {alpha}")))
    }
}

/// Λ(ℝ₊, p, α) = (1 − p)·α^{p/(p−1)}.
pub fn half_line_eigenvalue(p: f64, alpha: f64) -> Result<ClosedFormValue> {
    check_p(p)?;
    check_alpha(alpha)?;
    Ok(ClosedFormValue { value: (1.0 - p) * alpha.powf(p / (p - 1.0)), formula: "(1-p)*alpha^(p/(p-1))" })
}

/// The half-line minimizer e^{−βt}, β = α^{1/(p−1)}.
pub fn half_line_minimizer(p: f64, alpha: f64, t: f64) -> f64 {
    (-alpha.powf(1.0 / (p - 1.0)) * t).exp()
}

/// Λ for the infinite planar sector of opening angle 2θ. Blunt sectors
/// (θ ≥ π/2) share the half-plane value.
pub fn sector_eigenvalue(theta: f64, p: f64, alpha: f64) -> Result<ClosedFormValue> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::InvalidDomain(format!("sector angle must lie in (0, π), got {theta}")));
    }
    check_p(p)?;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("sector values need α > 0, got {alpha}")));
    }
    if theta >= FRAC_PI_2 {
        let v = half_line_eigenvalue(p, alpha)?;
        Ok(ClosedFormValue { value: v.value, formula: "(1-p)*alpha^(p/(p-1)) [theta >= pi/2]" })
    } else {
        Ok(ClosedFormValue {
            value: (1.0 - p) * (alpha / theta.sin()).powf(p / (p - 1.0)),
            formula: "(1-p)*(alpha/sin(theta))^(p/(p-1))",
        })
    }
}

/// c(p) = max{(1 − 2^{1/(1−p)})^{1−p}, 1}.
pub fn aux_inequality_constant(p: f64) -> Result<ClosedFormValue> {
    check_p(p)?;
    let c = (1.0 - 2f64.powf(1.0 / (1.0 - p))).powf(1.0 - p).max(1.0);
    Ok(ClosedFormValue { value: c, formula: "max{(1-2^(1/(1-p)))^(1-p), 1}" })
}

/// Two-term asymptote −(p−1)α^{p/(p−1)} − (ν−1)·H_max·α.
pub fn leading_asymptote(p: f64, alpha: f64, h_max: f64, nu: u32) -> Result<ClosedFormValue> {
    check_p(p)?;
    check_alpha(alpha)?;
    let m = nu.saturating_sub(1) as f64 * h_max;
    Ok(ClosedFormValue {
        value: -(p - 1.0) * alpha.powf(p / (p - 1.0)) - m * alpha,
        formula: "-(p-1)*alpha^(p/(p-1)) - (nu-1)*H_max*alpha",
    })
}

/// κ of the improved remainder O(α^{1−κ}) for smooth boundaries:
/// 2/(p+2) for p ≤ 2 and 1/(2(p−1)) above.
pub fn remainder_kappa(p: f64) -> f64 {
    if p <= 2.0 {
        2.0 / (p + 2.0)
    } else {
        1.0 / (2.0 * (p - 1.0))
    }
}

/// Reference exponent 1 − κ of the remainder.
pub fn remainder_reference_exponent(p: f64) -> f64 {
    1.0 - remainder_kappa(p)
}

/// Trace constant of the half-space, (p−1)^{(1−p)/p}.
pub fn half_space_trace_constant(p: f64) -> Result<ClosedFormValue> {
    check_p(p)?;
    Ok(ClosedFormValue { value: (p - 1.0).powf((1.0 - p) / p), formula: "(p-1)^((1-p)/p)" })
}

/// Outcome of random testing of the elementary inequality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub p: f64,
    pub constant: f64,
    pub samples: usize,
    pub violations: usize,
    /// Largest observed lhs/rhs.
    pub worst_ratio: f64,
}

/// Samples a, b log-uniformly from [10⁻³, 10³] and ε uniformly from (0, 1)
/// and counts violations of (a+b)^p ≤ (1+ε)a^p + c(p)·ε^{1−p}·b^p. A sample
/// counts as a violation only beyond a relative rounding slack of 10⁻¹².
pub fn check_inequality(p: f64, samples: usize, seed: u64) -> Result<InequalityCheck> {
    let c = aux_inequality_constant(p)?.value;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ln_range = 1e3f64.ln();
    let mut violations = 0;
    let mut worst_ratio = 0.0f64;
    for _ in 0..samples {
        let a = rng.gen_range(-ln_range..ln_range).exp();
        let b = rng.gen_range(-ln_range..ln_range).exp();
        let eps: f64 = loop {
            let e = rng.gen::<f64>();
            if e > 0.0 {
                break e;
            }
        };
        let lhs = (a + b).powf(p);
        let rhs = (1.0 + eps) * a.powf(p) + c * eps.powf(1.0 - p) * b.powf(p);
        worst_ratio = worst_ratio.max(lhs / rhs);
        if lhs > rhs * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    Ok(InequalityCheck { p, constant: c, samples, violations, worst_ratio })
}
