//! Domain descriptors, boundary curvature data and the boundary-layer
//! volume weight.
//!
//! Curvatures follow the outward-normal convention: a sphere of radius ρ
//! seen from inside has principal curvatures 1/ρ, while the inner sphere of
//! a spherical shell has principal curvatures −1/r.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible value of δ·max|κⱼ| for a model boundary layer.
pub const WEIGHT_CAP: f64 = 0.5;

/// Geometry descriptor. Serialized as `{"kind": "...", ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    /// The half-line (0, ∞); its Robin point is t = 0.
    #[serde(rename = "halfline")]
    HalfLine,
    /// The interval (0, δ) with Robin conditions at both ends.
    Interval { delta: f64 },
    /// The ball of radius ρ in ℝ^ν.
    Ball { rho: f64, nu: u32 },
    /// The spherical shell r < |x| < R in ℝ^ν.
    Shell { inner: f64, outer: f64, nu: u32 },
    /// The infinite planar sector |arg z| < θ.
    Sector { theta: f64 },
    /// A tubular layer of depth δ over a boundary patch with principal
    /// curvatures κ₁…κ_{ν−1}.
    ModelLayer { curvatures: Vec<f64>, delta: f64 },
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDomain(format!("{name} must be positive and finite, got {x}")))
    }
}

fn dimension_at_least_two(nu: u32) -> Result<()> {
    if nu >= 2 {
        Ok(())
    } else {
        Err(Error::InvalidDomain(format!("dimension ν must be at least 2, got {nu}")))
    }
}

impl Domain {
    pub fn ball(rho: f64, nu: u32) -> Result<Self> {
        let d = Domain::Ball { rho, nu };
        d.validate()?;
        Ok(d)
    }

    pub fn shell(inner: f64, outer: f64, nu: u32) -> Result<Self> {
        let d = Domain::Shell { inner, outer, nu };
        d.validate()?;
        Ok(d)
    }

    pub fn interval(delta: f64) -> Result<Self> {
        let d = Domain::Interval { delta };
        d.validate()?;
        Ok(d)
    }

    pub fn sector(theta: f64) -> Result<Self> {
        let d = Domain::Sector { theta };
        d.validate()?;
        Ok(d)
    }

    pub fn model_layer(curvatures: Vec<f64>, delta: f64) -> Result<Self> {
        let d = Domain::ModelLayer { curvatures, delta };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::HalfLine => Ok(()),
            Domain::Interval { delta } => positive("interval length δ", *delta),
            Domain::Ball { rho, nu } => {
                positive("radius ρ", *rho)?;
                dimension_at_least_two(*nu)
            }
            Domain::Shell { inner, outer, nu } => {
                positive("inner radius r", *inner)?;
                positive("outer radius R", *outer)?;
                dimension_at_least_two(*nu)?;
                if inner < outer {
                    Ok(())
                } else {
                    Err(Error::InvalidDomain(format!(
                        "shell needs r < R, got r = {inner}, R = {outer}"
                    )))
                }
            }
            Domain::Sector { theta } => {
                if theta.is_finite() && *theta > 0.0 && *theta < std::f64::consts::PI {
                    Ok(())
                } else {
                    Err(Error::InvalidDomain(format!("sector angle must lie in (0, π), got {theta}")))
                }
            }
            Domain::ModelLayer { curvatures, delta } => {
                weight_from_curvatures(curvatures, *delta).map(|_| ())
            }
        }
    }

    /// Ambient dimension ν.
    pub fn dimension(&self) -> u32 {
        match self {
            Domain::HalfLine | Domain::Interval { .. } => 1,
            Domain::Ball { nu, .. } | Domain::Shell { nu, .. } => *nu,
            Domain::Sector { .. } => 2,
            Domain::ModelLayer { curvatures, .. } => curvatures.len() as u32 + 1,
        }
    }

    pub fn curvature(&self) -> CurvatureData {
        let flat = |label: &str| BoundaryComponent::new(label, Vec::new());
        let sphere = |label: &str, k: f64, nu: u32| {
            BoundaryComponent::new(label, vec![k; nu as usize - 1])
        };
        let components = match self {
            Domain::HalfLine => vec![flat("origin")],
            Domain::Interval { .. } => vec![flat("left"), flat("right")],
            Domain::Ball { rho, nu } => vec![sphere("sphere", 1.0 / rho, *nu)],
            Domain::Shell { inner, outer, nu } => vec![
                sphere("inner", -1.0 / inner, *nu),
                sphere("outer", 1.0 / outer, *nu),
            ],
            Domain::Sector { .. } => vec![flat("edges")],
            Domain::ModelLayer { curvatures, .. } => {
                vec![BoundaryComponent::new("patch", curvatures.clone())]
            }
        };
        CurvatureData::new(self.dimension(), components)
    }

    /// The dilated domain μΩ.
    pub fn scaled(&self, mu: f64) -> Result<Self> {
        positive("scale factor μ", mu)?;
        let d = match self {
            Domain::HalfLine => Domain::HalfLine,
            Domain::Interval { delta } => Domain::Interval { delta: mu * delta },
            Domain::Ball { rho, nu } => Domain::Ball { rho: mu * rho, nu: *nu },
            Domain::Shell { inner, outer, nu } => Domain::Shell {
                inner: mu * inner,
                outer: mu * outer,
                nu: *nu,
            },
            Domain::Sector { theta } => Domain::Sector { theta: *theta },
            Domain::ModelLayer { curvatures, delta } => Domain::ModelLayer {
                curvatures: curvatures.iter().map(|k| k / mu).collect(),
                delta: mu * delta,
            },
        };
        d.validate()?;
        Ok(d)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Domain::HalfLine => "halfline",
            Domain::Interval { .. } => "interval",
            Domain::Ball { .. } => "ball",
            Domain::Shell { .. } => "shell",
            Domain::Sector { .. } => "sector",
            Domain::ModelLayer { .. } => "model_layer",
        }
    }
}

/// One connected piece of the boundary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryComponent {
    pub label: String,
    pub principal: Vec<f64>,
    /// Mean curvature H; zero when there are no principal curvatures.
    pub mean: f64,
}

impl BoundaryComponent {
    fn new(label: &str, principal: Vec<f64>) -> Self {
        let mean = if principal.is_empty() {
            0.0
        } else {
            principal.iter().sum::<f64>() / principal.len() as f64
        };
        Self { label: label.to_string(), principal, mean }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureData {
    pub dimension: u32,
    pub components: Vec<BoundaryComponent>,
}

impl CurvatureData {
    fn new(dimension: u32, components: Vec<BoundaryComponent>) -> Self {
        Self { dimension, components }
    }

    pub fn h_max(&self) -> f64 {
        self.components.iter().map(|c| c.mean).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn h_min(&self) -> f64 {
        self.components.iter().map(|c| c.mean).fold(f64::INFINITY, f64::min)
    }

    /// M = (ν−1)·H for each component.
    pub fn m_values(&self) -> Vec<f64> {
        let factor = self.dimension.saturating_sub(1) as f64;
        self.components.iter().map(|c| factor * c.mean).collect()
    }

    pub fn m_max(&self) -> f64 {
        self.dimension.saturating_sub(1) as f64 * self.h_max()
    }
}

/// The volume weight t ↦ ∏ⱼ(1 − κⱼt) on [0, δ], stored as monomial
/// coefficients in increasing degree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightProfile {
    coefficients: Vec<f64>,
    depth: f64,
}

impl WeightProfile {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// Coefficient of t, equal to −M.
    pub fn slope_at_zero(&self) -> f64 {
        self.coefficients.get(1).copied().unwrap_or(0.0)
    }
}

/// Expands ∏ⱼ(1 − κⱼt) and checks that the weight stays within [1/2, 2].
pub fn weight_from_curvatures(curvatures: &[f64], delta: f64) -> Result<WeightProfile> {
    positive("layer depth δ", delta)?;
    if curvatures.iter().any(|k| !k.is_finite()) {
        return Err(Error::InvalidDomain("curvatures must be finite".into()));
    }
    let kmax = curvatures.iter().fold(0.0_f64, |m, k| m.max(k.abs()));
    if delta * kmax > WEIGHT_CAP {
        return Err(Error::InvalidDomain(format!(
            "δ·max|κ| = {} exceeds {WEIGHT_CAP}; the layer weight may degenerate",
            delta * kmax
        )));
    }

    let mut coefficients = vec![1.0];
    for k in curvatures {
        let mut next = vec![0.0; coefficients.len() + 1];
        for (i, c) in coefficients.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= k * c;
        }
        coefficients = next;
    }
    let profile = WeightProfile { coefficients, depth: delta };

    // Each factor is positive on [0, δ], so log φ is concave: the minimum
    // sits at an endpoint and the maximum is bounded by the product of the
    // growing factors at δ.
    let lower = profile.eval(0.0).min(profile.eval(delta));
    let upper: f64 = curvatures.iter().filter(|k| **k < 0.0).map(|k| 1.0 - k * delta).product();
    if lower < 0.5 || upper > 2.0 {
        return Err(Error::InvalidDomain(format!(
            "layer weight leaves [1/2, 2] on [0, δ] (min {lower}, bound on max {upper})"
        )));
    }
    Ok(profile)
}

/// Radial volume factor r^{ν−1} for balls and shells.
pub fn radial_weight(domain: &Domain, r: f64) -> Result<f64> {
    let (lo, hi, nu) = match domain {
        Domain::Ball { rho, nu } => (0.0, *rho, *nu),
        Domain::Shell { inner, outer, nu } => (*inner, *outer, *nu),
        other => {
            return Err(Error::InvalidDomain(format!(
                "radial weight is defined for balls and shells, not {}",
                other.name()
            )))
        }
    };
    if !(lo..=hi).contains(&r) {
        return Err(Error::InvalidParameter(format!("radius {r} outside [{lo}, {hi}]")));
    }
    Ok(r.powi(nu as i32 - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_product_is_one() {
        let w = weight_from_curvatures(&[], 3.0).unwrap();
        assert_eq!(w.coefficients(), &[1.0]);
        assert_eq!(w.eval(2.5), 1.0);
    }

    #[test]
    fn double_unit_curvature() {
        let w = weight_from_curvatures(&[1.0, 1.0], 0.25).unwrap();
        assert_eq!(w.coefficients(), &[1.0, -2.0, 1.0]);
        assert!((w.eval(0.25) - 0.5625).abs() < 1e-15);
        assert_eq!(w.slope_at_zero(), -2.0);
    }

    #[test]
    fn mixed_sign_curvatures() {
        let w = weight_from_curvatures(&[2.0, -1.0], 0.2).unwrap();
        assert_eq!(w.coefficients(), &[1.0, -1.0, -2.0]);
        let d = Domain::model_layer(vec![2.0, -1.0], 0.2).unwrap();
        assert_eq!(d.curvature().m_max(), 1.0);
    }

    #[test]
    fn cap_violation_rejected() {
        assert!(weight_from_curvatures(&[3.0], 0.2).is_err());
        assert!(weight_from_curvatures(&[1.0], 0.0).is_err());
    }

    #[test]
    fn radial_weights() {
        let b2 = Domain::ball(1.0, 2).unwrap();
        let b3 = Domain::ball(1.0, 3).unwrap();
        let s3 = Domain::shell(1.0, 2.0, 3).unwrap();
        assert_eq!(radial_weight(&b2, 0.5).unwrap(), 0.5);
        assert_eq!(radial_weight(&b3, 0.5).unwrap(), 0.25);
        assert_eq!(radial_weight(&s3, 2.0).unwrap(), 4.0);
        assert!(radial_weight(&s3, 0.5).is_err());
        assert!(radial_weight(&Domain::HalfLine, 0.5).is_err());
    }

    #[test]
    fn curvature_of_ball_and_shell() {
        let b = Domain::ball(2.0, 3).unwrap().curvature();
        assert_eq!(b.h_max(), 0.5);
        assert_eq!(b.m_max(), 1.0);
        let s = Domain::shell(0.75, 1.25, 2).unwrap().curvature();
        assert_eq!(s.h_max(), 0.8);
        assert!((s.h_min() + 1.0 / 0.75).abs() < 1e-15);
        assert!(Domain::ball(1.0, 2).unwrap().curvature().h_max() > s.h_max());
    }

    #[test]
    fn invalid_domains() {
        assert!(Domain::shell(2.0, 1.0, 2).is_err());
        assert!(Domain::ball(-1.0, 2).is_err());
        assert!(Domain::ball(1.0, 1).is_err());
        assert!(Domain::sector(std::f64::consts::PI).is_err());
        assert!(Domain::interval(0.0).is_err());
    }

    #[test]
    fn json_shape() {
        let d: Domain = serde_json::from_str(r#"{"kind":"ball","rho":1,"nu":2}"#).unwrap();
        assert_eq!(d, Domain::Ball { rho: 1.0, nu: 2 });
        let h: Domain = serde_json::from_str(r#"{"kind":"halfline"}"#).unwrap();
        assert_eq!(h, Domain::HalfLine);
        assert!(serde_json::from_str::<Domain>(r#"{"kind":"ball","rho":1,"nu":2,"x":0}"#).is_err());
    }

    #[test]
    fn scaling_preserves_layer_product() {
        let d = Domain::model_layer(vec![1.0, 1.0], 0.25).unwrap();
        let s = d.scaled(2.0).unwrap();
        assert_eq!(s, Domain::ModelLayer { curvatures: vec![0.5, 0.5], delta: 0.5 });
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn binomial(n: usize, k: usize) -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        }

        proptest! {
            #[test]
            fn equal_curvatures_give_binomial_weight(k in -2.0f64..2.0, m in 1usize..5, frac in 0.01f64..1.0) {
                let delta = frac * WEIGHT_CAP / k.abs().max(1e-3);
                if let Ok(w) = weight_from_curvatures(&vec![k; m], delta) {
                    for (j, c) in w.coefficients().iter().enumerate() {
                        let expected = binomial(m, j) * (-k).powi(j as i32);
                        prop_assert!((c - expected).abs() <= 1e-12 * expected.abs().max(1.0));
                    }
                }
            }

            #[test]
            fn ball_beats_shell_in_h_max(rho in 0.1f64..10.0, extra in 0.01f64..10.0, r in 0.01f64..5.0) {
                let outer = rho + extra;
                let inner = r.min(0.99 * outer);
                let ball = Domain::ball(rho, 2).unwrap().curvature().h_max();
                let shell = Domain::shell(inner, outer, 2).unwrap().curvature().h_max();
                prop_assert!(ball > shell);
            }
        }
    }
}
