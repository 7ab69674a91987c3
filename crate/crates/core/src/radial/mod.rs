//! Radial vector fields `V = H(R) d/dR` on `R^3 \ {0}` viewed as 3-dimensional
//! sections of the neutral tangent bundle `(TR^3, G)`, with
//! `G(d_x^i, d_xdot^j) = delta_ij`.
//!
//! The induced metric has eigenvalues `2H'` (radial) and `2H/R` (twice), so
//! the section is spacelike exactly when `H > 0` and `H' > 0`. Its mean
//! curvature vector is `c(R) (d_R - H' d_Rdot)` with
//! `c = -(R H H'' + 2 R H'^2 - 2 H H') / (4 R H H'^2)`, and the flow of the
//! section reduces to `dH/dt = -2 H' c = (R H H'' + 2 R H'^2 - 2 H H') / (2 R H H')`.

mod cross_check;
mod flow;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use cross_check::{cross_check_against_generic, shell_grid, CrossCheckReport};
pub use flow::{radial_flow_step, radial_run, RadialMonitorRow, RadialProfile, RadialRun, RadialStep};

/// Analytic profiles `H(R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialFunction {
    /// `H = a R`: a minimal section.
    Linear { a: f64 },
    /// `H = R + c R^3`.
    PlusCubic { c: f64 },
    /// `H = R + amp sin(pi (R - r_min)/(r_max - r_min))`, pinned to `R` at both ends.
    SineBump { amp: f64, r_min: f64, r_max: f64 },
}

impl RadialFunction {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            RadialFunction::Linear { a } => a * r,
            RadialFunction::PlusCubic { c } => r + c * r.powi(3),
            RadialFunction::SineBump { amp, r_min, r_max } => {
                r + amp * (std::f64::consts::PI * (r - r_min) / (r_max - r_min)).sin()
            }
        }
    }

    pub fn d1(&self, r: f64) -> f64 {
        match *self {
            RadialFunction::Linear { a } => a,
            RadialFunction::PlusCubic { c } => 1.0 + 3.0 * c * r * r,
            RadialFunction::SineBump { amp, r_min, r_max } => {
                let k = std::f64::consts::PI / (r_max - r_min);
                1.0 + amp * k * (k * (r - r_min)).cos()
            }
        }
    }

    pub fn d2(&self, r: f64) -> f64 {
        match *self {
            RadialFunction::Linear { .. } => 0.0,
            RadialFunction::PlusCubic { c } => 6.0 * c * r,
            RadialFunction::SineBump { amp, r_min, r_max } => {
                let k = std::f64::consts::PI / (r_max - r_min);
                -amp * k * k * (k * (r - r_min)).sin()
            }
        }
    }
}

/// Signature of the induced metric, as counts of positive and negative
/// directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignatureClass {
    pub positive: u8,
    pub negative: u8,
}

impl fmt::Display for SignatureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.positive, self.negative) {
            (0, 0) => write!(f, "0"),
            (3, 0) => write!(f, "+3"),
            (0, 3) => write!(f, "-3"),
            (p, q) => write!(f, "({p},{q})"),
        }
    }
}

/// Table cell for the signs of `H` and `H'`: the radial direction
/// contributes the sign of `H'`, the two angular directions the sign of `H`.
pub fn signature_classify(h: f64, h_prime: f64) -> SignatureClass {
    let pos = u8::from(h_prime > 0.0) + 2 * u8::from(h > 0.0);
    let neg = u8::from(h_prime < 0.0) + 2 * u8::from(h < 0.0);
    SignatureClass {
        positive: pos,
        negative: neg,
    }
}

/// `R H H'' + 2 R H'^2 - 2 H H'`.
pub fn numerator(r: f64, h: f64, h1: f64, h2: f64) -> f64 {
    r * h * h2 + 2.0 * r * h1 * h1 - 2.0 * h * h1
}

/// Coefficient of `(d_R - H' d_Rdot)` in the mean curvature vector, or
/// `None` where `H` or `H'` vanishes.
pub fn mean_curvature_factor(r: f64, h: f64, h1: f64, h2: f64) -> Option<f64> {
    let den = 4.0 * r * h * h1 * h1;
    if den == 0.0 || !den.is_finite() {
        return None;
    }
    Some(-numerator(r, h, h1, h2) / den)
}

/// Right-hand side of the radial flow, `-2 H' c`.
pub fn flow_rhs(r: f64, h: f64, h1: f64, h2: f64) -> Option<f64> {
    let den = 2.0 * r * h * h1;
    if den == 0.0 || !den.is_finite() {
        return None;
    }
    Some(numerator(r, h, h1, h2) / den)
}

/// Closed-form mean curvature on a discrete profile: per interior node the
/// factor `c` (central differences for `H'`, `H''`) and the chart direction
/// coefficients `(1, -H')` along `(d_R, d_Rdot)`. End nodes and degenerate
/// nodes are `None`.
pub fn closed_form_mean_curvature(profile: &RadialProfile) -> Vec<Option<(f64, f64)>> {
    let k = profile.r.len();
    (0..k)
        .map(|i| {
            if i == 0 || i + 1 == k {
                return None;
            }
            let (h1, h2) = profile.derivatives(i);
            mean_curvature_factor(profile.r[i], profile.h[i], h1, h2).map(|c| (c, -h1))
        })
        .collect()
}

#[cfg(test)]
mod tests;
