//! Convex increasing test functions and the integral mean that composes them
//! with a temperature profile.
//!
//! The family is closed and parameterized: |x|^p for p >= 1, a hinge
//! max(0, x - t), an exponential e^{rx}, and the identity. Every member is
//! convex on the whole line and non-decreasing on [0, inf), which is where
//! all profile values live.

use crate::error::{Error, Result};
use crate::robin::TemperatureProfile;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConvexTestFunction {
    /// |x|^p with p >= 1. Strictly convex for p > 1.
    Power { p: f64 },
    /// max(0, x - threshold) with threshold >= 0. Convex, flat below the
    /// threshold, so not strictly increasing.
    Hinge { threshold: f64 },
    /// e^{rate * x} with rate > 0. Strictly convex and strictly increasing.
    Exponential { rate: f64 },
    /// x itself.
    Identity,
}

impl ConvexTestFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::BadPhiParameter(format!("power exponent p = {p}, need p >= 1")));
        }
        Ok(Self::Power { p })
    }

    pub fn hinge(threshold: f64) -> Result<Self> {
        if !(threshold >= 0.0) || !threshold.is_finite() {
            return Err(Error::BadPhiParameter(format!(
                "hinge threshold t = {threshold}, need t >= 0"
            )));
        }
        Ok(Self::Hinge { threshold })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::BadPhiParameter(format!(
                "exponential rate r = {rate}, need r > 0"
            )));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn identity() -> Self {
        Self::Identity
    }

    pub fn eval(&self, x: f64) -> f64 {
        debug_assert!(x.is_finite(), "phi argument must be finite, got {x}");
        match *self {
            Self::Power { p } => x.abs().powf(p),
            Self::Hinge { threshold } => (x - threshold).max(0.0),
            Self::Exponential { rate } => (rate * x).exp(),
            Self::Identity => x,
        }
    }

    /// Strictly increasing on [0, inf)? The hinge is flat below its
    /// threshold, everything else grows strictly.
    pub fn strictly_increasing(&self) -> bool {
        !matches!(self, Self::Hinge { .. })
    }

    /// Strictly convex on [0, inf)? Powers with p > 1 and exponentials are;
    /// the identity, power(1), and hinge are piecewise linear.
    pub fn strictly_convex(&self) -> bool {
        match *self {
            Self::Power { p } => p > 1.0,
            Self::Exponential { .. } => true,
            Self::Hinge { .. } | Self::Identity => false,
        }
    }

    /// Short descriptor, e.g. `power:2`, `hinge:1.5`, `exp:0.25`, `identity`.
    pub fn descriptor(&self) -> String {
        match *self {
            Self::Power { p } => format!("power:{p}"),
            Self::Hinge { threshold } => format!("hinge:{threshold}"),
            Self::Exponential { rate } => format!("exp:{rate}"),
            Self::Identity => "identity".to_string(),
        }
    }

    /// Parse the descriptor form accepted by config files and flags.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "identity" {
            return Ok(Self::Identity);
        }
        let bad = || Error::BadPhiParameter(format!("unrecognized descriptor {text:?}"));
        let (kind, arg) = text.split_once(':').ok_or_else(bad)?;
        let value: f64 = arg.trim().parse().map_err(|_| bad())?;
        match kind.trim() {
            "power" => Self::power(value),
            "hinge" => Self::hinge(value),
            "exp" => Self::exponential(value),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for ConvexTestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.descriptor())
    }
}

/// Integral of phi composed with the profile, by composite Simpson on each
/// cell (boundary, midpoint, boundary). The profile is piecewise quadratic,
/// so the rule is exact for phi = identity and fourth-order otherwise.
pub fn convex_mean(profile: &TemperatureProfile, phi: ConvexTestFunction) -> f64 {
    let grid = profile.grid();
    let h = grid.cell_width();
    let ub = profile.boundary_values();
    let um = profile.midpoint_values();
    let mut total = 0.0;
    for i in 0..grid.n_cells() {
        total += phi.eval(ub[i]) + 4.0 * phi.eval(um[i]) + phi.eval(ub[i + 1]);
    }
    total * h / 6.0
}

/// Lp norm of a profile, p in [1, inf]. Finite p shares the Simpson
/// quadrature with [`convex_mean`] (so norm comparisons and mean
/// comparisons can never disagree); p = inf takes the maximum over the
/// boundary points, matching the sup-norm comparison checker.
pub fn profile_lp_norm(profile: &TemperatureProfile, p: f64) -> Result<f64> {
    if p == f64::INFINITY {
        return Ok(profile.max_boundary_value());
    }
    let phi = ConvexTestFunction::power(p)?;
    Ok(convex_mean(profile, phi).powf(1.0 / p))
}
