//! Discretization and minimization of weighted one-dimensional p-Rayleigh
//! quotients with Robin boundary terms.
//!
//! Every geometry handled here reduces to an interval [a, b] carrying a
//! positive volume weight w(t):
//!
//! * half-line (truncated) and intervals: w ≡ 1;
//! * balls and shells in ℝ^ν: w(r) = r^{ν−1}, with surface factors
//!   b^{ν−1} at the Robin radii;
//! * model boundary layers: w(t) = ∏ⱼ(1 − κⱼt).

mod evaluator;
mod grid;
mod solver;
mod tridiag;

use serde::{Deserialize, Serialize};

pub use evaluator::{Endpoint, QuotientEvaluator};
pub use grid::Grid1D;
pub use solver::{minimize, perturbation_check, PerturbationCheck};

use crate::error::{Error, Result};
use crate::geometry::{weight_from_curvatures, Domain, WeightProfile};

/// Exponents outside (P_MIN, P_MAX) are rejected by the solver.
pub const P_MIN: f64 = 1.01;
pub const P_MAX: f64 = 20.0;

/// Condition at an endpoint that carries no Robin term (truncation end of
/// a half-line or model layer).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FarEnd {
    #[default]
    NeumannFree,
    DirichletCap,
}

impl FarEnd {
    fn endpoint(self) -> Endpoint {
        match self {
            FarEnd::NeumannFree => Endpoint::Free,
            FarEnd::DirichletCap => Endpoint::Pinned,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Relative decrease of the quotient over one iteration below which the
    /// iteration counts as stagnated.
    pub quotient_tolerance: f64,
    /// Euler–Lagrange residual threshold, relative to |λ|.
    pub residual_tolerance: f64,
    pub initial_step: f64,
    pub shrink_factor: f64,
    pub sufficient_decrease: f64,
    /// Number of grid cells.
    pub cells: usize,
    /// Fraction of cells inside the boundary layers.
    pub layer_fraction: f64,
    /// Layer width in units of 1/β, β = α^{1/(p−1)}.
    pub layer_width: f64,
    /// Truncation length of the half-line in units of 1/β.
    pub halfline_length: f64,
    pub far_end: FarEnd,
    /// Try Newton (nonlinear Rayleigh-quotient) directions before falling
    /// back to preconditioned gradient steps.
    pub newton: bool,
    /// Also solve on the refined grid and report the Richardson value
    /// (4λ_{h/2} − λ_h)/3.
    pub richardson: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            quotient_tolerance: 1e-10,
            residual_tolerance: 1e-6,
            initial_step: 1.0,
            shrink_factor: 0.5,
            sufficient_decrease: 1e-4,
            cells: 2000,
            layer_fraction: 0.5,
            layer_width: 5.0,
            halfline_length: 30.0,
            far_end: FarEnd::NeumannFree,
            newton: true,
            richardson: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let positive = [
            ("quotient_tolerance", self.quotient_tolerance),
            ("residual_tolerance", self.residual_tolerance),
            ("initial_step", self.initial_step),
            ("sufficient_decrease", self.sufficient_decrease),
            ("layer_width", self.layer_width),
            ("halfline_length", self.halfline_length),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return bad(format!("shrink_factor must lie in (0, 1), got {}", self.shrink_factor));
        }
        if !(self.layer_fraction > 0.0 && self.layer_fraction < 1.0) {
            return bad(format!("layer_fraction must lie in (0, 1), got {}", self.layer_fraction));
        }
        if self.cells < 4 {
            return bad(format!("need at least 4 cells, got {}", self.cells));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        Ok(())
    }
}

/// Boundary-layer rate β = α^{1/(p−1)}.
pub fn layer_rate(p: f64, alpha: f64) -> f64 {
    alpha.powf(1.0 / (p - 1.0))
}

pub fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > P_MIN && p < P_MAX {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "exponent p = {p} outside the supported range ({P_MIN}, {P_MAX})"
        )))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("Robin parameter α must be finite and ≥ 0, got {alpha}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Weight {
    Flat,
    Radial(i32),
    Layer(WeightProfile),
}

impl Weight {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Weight::Flat => 1.0,
            Weight::Radial(k) => t.powi(*k),
            Weight::Layer(w) => w.eval(t),
        }
    }
}

/// Interval, weight and endpoint conditions of the 1D reduction of a domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub start: f64,
    pub end: f64,
    pub left: Endpoint,
    pub right: Endpoint,
    weight: Weight,
}

impl Layout {
    pub fn for_domain(domain: &Domain, p: f64, alpha: f64, config: &SolverConfig) -> Result<Self> {
        domain.validate()?;
        let far = config.far_end.endpoint();
        let unit = Endpoint::Robin { sigma: 1.0 };
        let layout = match domain {
            Domain::HalfLine => {
                let beta = layer_rate(p, alpha);
                let end = if beta > 0.0 { config.halfline_length / beta } else { 1.0 };
                Layout { start: 0.0, end, left: unit, right: far, weight: Weight::Flat }
            }
            Domain::Interval { delta } => {
                Layout { start: 0.0, end: *delta, left: unit, right: unit, weight: Weight::Flat }
            }
            Domain::Ball { rho, nu } => Layout {
                start: 0.0,
                end: *rho,
                left: Endpoint::Free,
                right: Endpoint::Robin { sigma: rho.powi(*nu as i32 - 1) },
                weight: Weight::Radial(*nu as i32 - 1),
            },
            Domain::Shell { inner, outer, nu } => Layout {
                start: *inner,
                end: *outer,
                left: Endpoint::Robin { sigma: inner.powi(*nu as i32 - 1) },
                right: Endpoint::Robin { sigma: outer.powi(*nu as i32 - 1) },
                weight: Weight::Radial(*nu as i32 - 1),
            },
            Domain::ModelLayer { curvatures, delta } => Layout {
                start: 0.0,
                end: *delta,
                left: unit,
                right: far,
                weight: Weight::Layer(weight_from_curvatures(curvatures, *delta)?),
            },
            Domain::Sector { .. } => return Err(Error::Unsupported("the planar sector".into())),
        };
        Ok(layout)
    }

    /// Radial problem outside a ball, truncated at `outer` with a free end:
    /// Robin only at r = ρ.
    pub fn exterior_ball(rho: f64, nu: u32, outer: f64) -> Result<Self> {
        Domain::shell(rho, outer, nu)?;
        Ok(Layout {
            start: rho,
            end: outer,
            left: Endpoint::Robin { sigma: rho.powi(nu as i32 - 1) },
            right: Endpoint::Free,
            weight: Weight::Radial(nu as i32 - 1),
        })
    }

    pub fn weight(&self, t: f64) -> f64 {
        self.weight.eval(t)
    }

    pub fn robin_points(&self) -> Vec<f64> {
        let mut pts = Vec::with_capacity(2);
        if matches!(self.left, Endpoint::Robin { .. }) {
            pts.push(self.start);
        }
        if matches!(self.right, Endpoint::Robin { .. }) {
            pts.push(self.end);
        }
        pts
    }

    /// Distance to the nearest Robin endpoint.
    pub fn boundary_distance(&self, t: f64) -> f64 {
        self.robin_points().iter().map(|b| (t - b).abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn grid(&self, p: f64, alpha: f64, config: &SolverConfig) -> Result<Grid1D> {
        let beta = layer_rate(p, alpha);
        let layers = (
            matches!(self.left, Endpoint::Robin { .. }),
            matches!(self.right, Endpoint::Robin { .. }),
        );
        if beta > 0.0 {
            Grid1D::graded(
                self.start,
                self.end,
                config.cells,
                layers,
                config.layer_width / beta,
                config.layer_fraction,
            )
        } else {
            Grid1D::uniform(self.start, self.end, config.cells)
        }
    }

    pub fn problem(&self, grid: Grid1D, p: f64, alpha: f64) -> Result<ProblemSpec> {
        let weights = grid.midpoints().iter().map(|t| self.weight(*t)).collect();
        ProblemSpec::new(grid, weights, p, alpha, self.left, self.right)
    }
}

/// A fully specified discrete problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub grid: Grid1D,
    /// Volume weight at each cell midpoint.
    pub weights: Vec<f64>,
    pub p: f64,
    pub alpha: f64,
    pub left: Endpoint,
    pub right: Endpoint,
}

impl ProblemSpec {
    pub fn new(
        grid: Grid1D,
        weights: Vec<f64>,
        p: f64,
        alpha: f64,
        left: Endpoint,
        right: Endpoint,
    ) -> Result<Self> {
        check_exponent(p)?;
        check_alpha(alpha)?;
        if weights.len() != grid.cells() {
            return Err(Error::ShapeMismatch { expected: grid.cells(), got: weights.len() });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidParameter("volume weights must be positive and finite".into()));
        }
        for e in [left, right] {
            if let Endpoint::Robin { sigma } = e {
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::InvalidParameter(format!("surface factor must be positive, got {sigma}")));
                }
            }
        }
        Ok(Self { grid, weights, p, alpha, left, right })
    }

    pub fn has_pinned_end(&self) -> bool {
        self.left == Endpoint::Pinned || self.right == Endpoint::Pinned
    }
}

pub fn assemble(spec: &ProblemSpec) -> Result<QuotientEvaluator> {
    Ok(QuotientEvaluator::new(spec))
}

/// Result of a principal eigenvalue computation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenSolution {
    pub eigenvalue: f64,
    /// Richardson value from this grid and its refinement, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extrapolated: Option<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub nodes: Vec<f64>,
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl EigenSolution {
    /// Best available eigenvalue estimate.
    pub fn value(&self) -> f64 {
        self.extrapolated.unwrap_or(self.eigenvalue)
    }

    /// Linear interpolation of the nodal values, constant beyond the ends.
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = &self.nodes;
        if t <= n[0] {
            return self.values[0];
        }
        if t >= n[n.len() - 1] {
            return self.values[n.len() - 1];
        }
        let k = n.partition_point(|x| *x <= t).min(n.len() - 1);
        let (t0, t1) = (n[k - 1], n[k]);
        let s = (t - t0) / (t1 - t0);
        self.values[k - 1] * (1.0 - s) + self.values[k] * s
    }

    /// Plot-ready `t,u` table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,u\n");
        for (t, u) in self.nodes.iter().zip(&self.values) {
            out.push_str(&format!("{},{}\n", crate::report::sig12(*t), crate::report::sig12(*u)));
        }
        out
    }
}

/// Weak-form Euler–Lagrange residual of a normalized solution: Σ over
/// nodes of |flux jump + λ·mass term| including the boundary defects.
pub fn euler_lagrange_residual(solution: &EigenSolution, spec: &ProblemSpec) -> Result<f64> {
    let ev = assemble(spec)?;
    ev.residual_norm(&solution.values, solution.eigenvalue)
}

/// e^{−β·dist(t, Robin endpoints)} on the grid.
pub fn default_initializer(layout: &Layout, grid: &Grid1D, p: f64, alpha: f64) -> Vec<f64> {
    let beta = layer_rate(p, alpha);
    grid.nodes().iter().map(|t| (-beta * layout.boundary_distance(*t)).exp()).collect()
}

/// Start for a layout with two Robin ends: c·e^{−β(t−a)} + e^{−β(b−t)} with
/// the amplitude ratio c (including one-sided profiles) that gives the
/// lowest quotient. The optimal ratio can be astronomically far from 1, and
/// for p < 2 the iteration shrinks a misplaced layer only very slowly.
fn balanced_initializer(layout: &Layout, ev: &QuotientEvaluator, grid: &Grid1D, p: f64, alpha: f64) -> Vec<f64> {
    let fresh = default_initializer(layout, grid, p, alpha);
    let ends = layout.robin_points();
    if ends.len() != 2 {
        return fresh;
    }
    let beta = layer_rate(p, alpha);
    let left: Vec<f64> = grid.nodes().iter().map(|t| (-beta * (t - ends[0]).abs()).exp()).collect();
    let right: Vec<f64> = grid.nodes().iter().map(|t| (-beta * (t - ends[1]).abs()).exp()).collect();
    let mut best = (ev.quotient(&fresh).unwrap_or(f64::INFINITY), fresh);
    let mut consider = |candidate: Vec<f64>| {
        if let Ok(q) = ev.quotient(&candidate) {
            if q < best.0 {
                best = (q, candidate);
            }
        }
    };
    consider(left.clone());
    consider(right.clone());
    for k in [-64, -32, -16, -8, -4, -2, -1, 0, 1, 2, 4, 8, 16, 32, 64] {
        let c = 10f64.powi(k);
        consider(left.iter().zip(&right).map(|(l, r)| c * l + r).collect());
    }
    best.1
}

/// Principal eigenvalue of the 1D reduction described by `layout`.
pub fn solve_layout(
    layout: &Layout,
    p: f64,
    alpha: f64,
    config: &SolverConfig,
    warm: Option<&EigenSolution>,
) -> Result<EigenSolution> {
    config.validate()?;
    check_exponent(p)?;
    check_alpha(alpha)?;
    let grid = layout.grid(p, alpha, config)?;
    let run = |grid: Grid1D| -> Result<EigenSolution> {
        let spec = layout.problem(grid, p, alpha)?;
        let ev = assemble(&spec)?;
        let fresh = balanced_initializer(layout, &ev, &spec.grid, p, alpha);
        // A warm start is used only when it beats the boundary-layer profile.
        let init = match warm {
            Some(w) => {
                let moved: Vec<f64> = spec.grid.nodes().iter().map(|t| w.interpolate(*t)).collect();
                match (ev.quotient(&moved), ev.quotient(&fresh)) {
                    (Ok(a), Ok(b)) if a < b => moved,
                    _ => fresh,
                }
            }
            None => fresh,
        };
        minimize(&ev, config, &init)
    };
    if config.richardson {
        let coarse = run(grid.clone())?;
        let mut fine = run(grid.refined())?;
        fine.extrapolated = Some((4.0 * fine.eigenvalue - coarse.eigenvalue) / 3.0);
        fine.converged &= coarse.converged;
        Ok(fine)
    } else {
        run(grid)
    }
}

/// Principal eigenvalue for any meshable domain (everything but sectors).
pub fn solve_domain(
    domain: &Domain,
    p: f64,
    alpha: f64,
    config: &SolverConfig,
    warm: Option<&EigenSolution>,
) -> Result<EigenSolution> {
    let layout = Layout::for_domain(domain, p, alpha, config)?;
    solve_layout(&layout, p, alpha, config, warm)
}

/// The model problem on (0, δ) with weight ∏(1 − κⱼt), Robin at t = 0 and
/// the far end set by `config.far_end`.
pub fn model_layer_eigenvalue(
    p: f64,
    alpha: f64,
    curvatures: &[f64],
    delta: f64,
    config: &SolverConfig,
) -> Result<EigenSolution> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("model layer needs α > 0, got {alpha}")));
    }
    let domain = Domain::model_layer(curvatures.to_vec(), delta)?;
    solve_domain(&domain, p, alpha, config, None)
}

/// Radial minimization for a ball or a shell. Radial test functions give
/// an upper bound for the full eigenvalue; the value is reported as is.
pub fn radial_eigenvalue(domain: &Domain, p: f64, alpha: f64, config: &SolverConfig) -> Result<EigenSolution> {
    if !matches!(domain, Domain::Ball { .. } | Domain::Shell { .. }) {
        return Err(Error::InvalidDomain(format!(
            "radial solve needs a ball or a shell, got {}",
            domain.name()
        )));
    }
    check_alpha(alpha)?;
    solve_domain(domain, p, alpha, config, None)
}
