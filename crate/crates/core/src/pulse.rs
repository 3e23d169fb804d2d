//! The periodic feedback function σ and its derivative.
//!
//! The production pulse is a comb of unit-normalized Gaussians,
//!
//! ```text
//! σ(θ) = Σ_n exp(−(θ + nξ)² / 2w²) / √(2πw²)
//! ```
//!
//! which integrates to one over each period. A constant pulse is provided
//! for tests that need a coupling term with no phase dependence.

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};

/// Default truncation half-width of the Gaussian comb.
pub const DEFAULT_COMB_RANGE: u32 = 20;

/// Terms whose exponent sits this far below the nearest term's exponent
/// are below one ulp of the sum and are not evaluated.
const NEGLIGIBLE_EXPONENT_GAP: f64 = 40.0;

/// Period, width and truncation of a Gaussian comb.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    pub xi: f64,
    pub w: f64,
    pub comb_range: u32,
}

impl PulseParams {
    pub fn new(xi: f64, w: f64) -> Result<Self> {
        Self::with_comb_range(xi, w, DEFAULT_COMB_RANGE)
    }

    pub fn with_comb_range(xi: f64, w: f64, comb_range: u32) -> Result<Self> {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(invalid("pulse period xi must be positive and finite"));
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(invalid("pulse width w must be positive and finite"));
        }
        if comb_range < 1 {
            return Err(invalid("comb_range must be at least 1"));
        }
        Ok(Self { xi, w, comb_range })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseFunction {
    GaussianComb(PulseParams),
    /// σ ≡ level; `xi` is still needed to define the period integrals.
    Constant { level: f64, xi: f64 },
}

impl PulseFunction {
    pub fn gaussian(xi: f64, w: f64) -> Result<Self> {
        PulseParams::new(xi, w).map(PulseFunction::GaussianComb)
    }

    pub fn constant(level: f64, xi: f64) -> Result<Self> {
        if !(level.is_finite() && level >= 0.0) {
            return Err(invalid("constant pulse level must be finite and non-negative"));
        }
        if !(xi.is_finite() && xi > 0.0) {
            return Err(invalid("pulse period xi must be positive and finite"));
        }
        Ok(PulseFunction::Constant { level, xi })
    }

    /// The period ξ.
    pub fn period(&self) -> f64 {
        match *self {
            PulseFunction::GaussianComb(p) => p.xi,
            PulseFunction::Constant { xi, .. } => xi,
        }
    }

    pub fn sigma(&self, theta: f64) -> f64 {
        self.sigma_and_prime(theta).0
    }

    pub fn sigma_prime(&self, theta: f64) -> f64 {
        self.sigma_and_prime(theta).1
    }

    /// Like [`sigma`](Self::sigma) but rejects NaN and infinite phases.
    pub fn try_sigma(&self, theta: f64) -> Result<f64> {
        if !theta.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(self.sigma(theta))
    }

    pub fn try_sigma_prime(&self, theta: f64) -> Result<f64> {
        if !theta.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(self.sigma_prime(theta))
    }

    /// σ(θ) and σ′(θ) from a single pass over the comb.
    pub fn sigma_and_prime(&self, theta: f64) -> (f64, f64) {
        match *self {
            PulseFunction::Constant { level, .. } => (level, 0.0),
            PulseFunction::GaussianComb(p) => comb(p, theta),
        }
    }

    /// Smallest and largest value of σ over a period.
    pub fn extrema(&self) -> (f64, f64) {
        match *self {
            PulseFunction::Constant { level, .. } => (level, level),
            // The comb peaks on the lattice nξ and is smallest halfway between.
            PulseFunction::GaussianComb(p) => (self.sigma(0.5 * p.xi), self.sigma(0.0)),
        }
    }
}

/// Reduces θ into [−ξ/2, ξ/2).
fn reduce(theta: f64, xi: f64) -> f64 {
    let x = theta - xi * (theta / xi + 0.5).floor();
    // Rounding can land just outside either edge.
    if x >= 0.5 * xi {
        x - xi
    } else if x < -0.5 * xi {
        x + xi
    } else {
        x
    }
}

fn comb(p: PulseParams, theta: f64) -> (f64, f64) {
    let x = reduce(theta, p.xi);
    let two_w2 = 2.0 * p.w * p.w;
    let norm = 1.0 / (PI * two_w2).sqrt();
    let inv_w2 = 1.0 / (p.w * p.w);

    let lead = -(x * x) / two_w2;
    let cutoff = lead - NEGLIGIBLE_EXPONENT_GAP;
    let g0 = lead.exp();
    let mut value = g0;
    let mut slope = -x * inv_w2 * g0;

    // Sum outward on each side; distances grow monotonically with |n|.
    for sign in [1.0, -1.0] {
        for n in 1..=p.comb_range {
            let d = x + sign * f64::from(n) * p.xi;
            let e = -(d * d) / two_w2;
            if e < cutoff {
                break;
            }
            let g = e.exp();
            value += g;
            slope -= d * inv_w2 * g;
        }
    }
    (value * norm, slope * norm)
}
