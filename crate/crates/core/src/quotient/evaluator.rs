use serde::{Deserialize, Serialize};

use super::tridiag::Tridiagonal;
use super::ProblemSpec;
use crate::error::{Error, Result};

/// Boundary behaviour at one end of the interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    /// Robin term −α·σ·|u|^p with surface factor σ.
    Robin { sigma: f64 },
    /// Natural (free) end: no boundary term, no constraint.
    Free,
    /// u = 0 imposed.
    Pinned,
}

/// Relative floor applied to |u'| and |u| inside the p-dependent Hessian
/// coefficients, which blow up (p < 2) or vanish (p > 2) at zero.
const HESSIAN_FLOOR: f64 = 1e-30;

#[inline]
fn abs_pow(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else {
        x.abs().powf(p)
    }
}

/// |x|^{p−2}·x
#[inline]
fn signed_pow(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x
    } else {
        x.abs().powf(p - 1.0).copysign(x)
    }
}

/// Discrete p-Rayleigh quotient with piecewise-linear elements and midpoint
/// quadrature:
///
/// ```text
/// J(u) = Σ |Δu/Δt|^p w(mid) Δt − α Σ_b σ_b |u_b|^p
/// N(u) = Σ |ū|^p w(mid) Δt,     ū = cell average of the end values
/// R(u) = J(u) / N(u)
/// ```
#[derive(Clone, Debug)]
pub struct QuotientEvaluator {
    nodes: Vec<f64>,
    widths: Vec<f64>,
    weights: Vec<f64>,
    p: f64,
    alpha: f64,
    left: Endpoint,
    right: Endpoint,
}

impl QuotientEvaluator {
    pub(crate) fn new(spec: &ProblemSpec) -> Self {
        Self {
            nodes: spec.grid.nodes().to_vec(),
            widths: spec.grid.widths(),
            weights: spec.weights.clone(),
            p: spec.p,
            alpha: spec.alpha,
            left: spec.left,
            right: spec.right,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Volume weight at each cell midpoint.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn endpoints(&self) -> (Endpoint, Endpoint) {
        (self.left, self.right)
    }

    pub fn has_pinned_end(&self) -> bool {
        self.left == Endpoint::Pinned || self.right == Endpoint::Pinned
    }

    fn robin_terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let last = self.len() - 1;
        [(0, self.left), (last, self.right)].into_iter().filter_map(|(i, e)| match e {
            Endpoint::Robin { sigma } => Some((i, sigma)),
            _ => None,
        })
    }

    fn pinned(&self) -> impl Iterator<Item = usize> + '_ {
        let last = self.len() - 1;
        [(0, self.left), (last, self.right)]
            .into_iter()
            .filter_map(|(i, e)| (e == Endpoint::Pinned).then_some(i))
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() == self.len() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch { expected: self.len(), got: u.len() })
        }
    }

    pub fn energy(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        let p = self.p;
        let bulk: f64 = (0..self.widths.len())
            .map(|i| {
                let h = self.widths[i];
                abs_pow((u[i + 1] - u[i]) / h, p) * self.weights[i] * h
            })
            .sum();
        let boundary: f64 = self.robin_terms().map(|(i, s)| s * abs_pow(u[i], p)).sum();
        Ok(bulk - self.alpha * boundary)
    }

    pub fn mass(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        let p = self.p;
        Ok((0..self.widths.len())
            .map(|i| abs_pow(0.5 * (u[i] + u[i + 1]), p) * self.weights[i] * self.widths[i])
            .sum())
    }

    pub fn quotient(&self, u: &[f64]) -> Result<f64> {
        let n = self.mass(u)?;
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroFunction);
        }
        Ok(self.energy(u)? / n)
    }

    /// Gradients of J/p and N/p.
    pub fn gradients(&self, u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(u)?;
        let p = self.p;
        let n = self.len();
        let mut gj = vec![0.0; n];
        let mut gn = vec![0.0; n];
        for i in 0..self.widths.len() {
            let h = self.widths[i];
            let w = self.weights[i];
            let flux = signed_pow((u[i + 1] - u[i]) / h, p) * w;
            gj[i] -= flux;
            gj[i + 1] += flux;
            let m = signed_pow(0.5 * (u[i] + u[i + 1]), p) * w * h * 0.5;
            gn[i] += m;
            gn[i + 1] += m;
        }
        for (i, s) in self.robin_terms() {
            gj[i] -= self.alpha * s * signed_pow(u[i], p);
        }
        for j in self.pinned() {
            gj[j] = 0.0;
            gn[j] = 0.0;
        }
        Ok((gj, gn))
    }

    /// Nodal residual of the discrete Euler–Lagrange system,
    /// ∇J/p − λ∇N/p. Interior entries approximate the weak form of
    /// (|u'|^{p−2}u'w)' + λ|u|^{p−2}u w; end entries carry the boundary defects.
    pub fn residual_vector(&self, u: &[f64], lambda: f64) -> Result<Vec<f64>> {
        let (gj, gn) = self.gradients(u)?;
        Ok(gj.iter().zip(&gn).map(|(a, b)| a - lambda * b).collect())
    }

    pub fn residual_norm(&self, u: &[f64], lambda: f64) -> Result<f64> {
        Ok(self.residual_vector(u, lambda)?.iter().map(|r| r.abs()).sum())
    }

    /// Clamps to the nonnegative cone and enforces pinned ends.
    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        let mut v: Vec<f64> = u.iter().map(|x| x.max(0.0)).collect();
        for j in self.pinned() {
            v[j] = 0.0;
        }
        v
    }

    /// Rescales to unit discrete mass; returns the scaled vector and R(u).
    pub fn normalize(&self, u: &[f64]) -> Result<(Vec<f64>, f64)> {
        let n = self.mass(u)?;
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroFunction);
        }
        let scale = n.powf(-1.0 / self.p);
        let v: Vec<f64> = u.iter().map(|x| x * scale).collect();
        let q = self.quotient(&v)?;
        Ok((v, q))
    }

    fn floors(&self, u: &[f64]) -> (f64, f64) {
        let mut gmax = 0.0_f64;
        let mut mmax = 0.0_f64;
        for i in 0..self.widths.len() {
            gmax = gmax.max(((u[i + 1] - u[i]) / self.widths[i]).abs());
            mmax = mmax.max((0.5 * (u[i] + u[i + 1])).abs());
        }
        let g = if gmax > 0.0 { HESSIAN_FLOOR * gmax } else { 1.0 };
        let m = if mmax > 0.0 { HESSIAN_FLOOR * mmax } else { 1.0 };
        (g, m)
    }

    /// Per-cell second-derivative coefficients of J/p (stiffness) and N/p (mass).
    ///
    /// With `majorize` and p < 2 the stiffness uses the weight |u'|^{p−2}
    /// without the factor p − 1. That quadratic lies above |u'|^p/p along the
    /// step, so slopes heading to zero are not overshot; the exact curvature
    /// sends s to −s there.
    fn cell_coefficients(&self, u: &[f64], majorize: bool) -> (Vec<f64>, Vec<f64>) {
        let p = self.p;
        let (gfloor, mfloor) = self.floors(u);
        let cells = self.widths.len();
        let mut stiff = Vec::with_capacity(cells);
        let mut mass = Vec::with_capacity(cells);
        for i in 0..cells {
            let h = self.widths[i];
            let w = self.weights[i];
            let g = ((u[i + 1] - u[i]) / h).abs().max(gfloor);
            let m = (0.5 * (u[i] + u[i + 1])).abs().max(mfloor);
            let (gp, mp) = if p == 2.0 { (1.0, 1.0) } else { (g.powf(p - 2.0), m.powf(p - 2.0)) };
            let factor = if majorize && p < 2.0 { 1.0 } else { p - 1.0 };
            stiff.push(factor * gp * w / h);
            mass.push((p - 1.0) * mp * w * h * 0.25);
        }
        (stiff, mass)
    }

    /// Hessian of (J − λN)/p.
    #[cfg(test)]
    pub(crate) fn lagrangian_hessian(&self, u: &[f64], lambda: f64) -> Tridiagonal {
        self.step_matrix(u, lambda, false)
    }

    /// Hessian of (J − λN)/p with the majorized stiffness for p < 2, used
    /// to compute Newton steps.
    pub(crate) fn newton_matrix(&self, u: &[f64], lambda: f64) -> Tridiagonal {
        self.step_matrix(u, lambda, true)
    }

    fn step_matrix(&self, u: &[f64], lambda: f64, majorize: bool) -> Tridiagonal {
        let (stiff, mass) = self.cell_coefficients(u, majorize);
        let mut a = Tridiagonal::zeros(self.len());
        for i in 0..stiff.len() {
            a.add_element(i, stiff[i] - lambda * mass[i], -stiff[i] - lambda * mass[i]);
        }
        let p = self.p;
        let ufloor = u.iter().fold(0.0_f64, |m, x| m.max(x.abs())) * HESSIAN_FLOOR;
        for (i, s) in self.robin_terms() {
            let ub = u[i].abs().max(ufloor);
            let c = if p == 2.0 { 1.0 } else { ub.powf(p - 2.0) };
            a.diag[i] -= (p - 1.0) * self.alpha * s * c;
        }
        for j in self.pinned() {
            a.pin(j);
        }
        a
    }

    /// Symmetric positive definite surrogate of the Hessian: the bulk
    /// stiffness plus `shift` times the mass, Robin terms dropped.
    pub(crate) fn preconditioner(&self, u: &[f64], shift: f64) -> Tridiagonal {
        let (stiff, mass) = self.cell_coefficients(u, true);
        let mut a = Tridiagonal::zeros(self.len());
        for i in 0..stiff.len() {
            a.add_element(i, stiff[i] + shift * mass[i], -stiff[i] + shift * mass[i]);
        }
        for j in self.pinned() {
            a.pin(j);
        }
        a
    }
}
