//! Composite Simpson quadrature with panel doubling.

use crate::error::{Error, Result};

/// Stopping rule and limits for [`simpson_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpsonOptions {
    /// Stop once successive estimates differ by less than this, relative.
    pub rtol: f64,
    /// Panels used for the first estimate (rounded up to even).
    pub min_panels: usize,
    /// Doublings allowed after the first estimate.
    pub max_doublings: u32,
    /// Absolute change that is always accepted, for integrals close to zero.
    pub atol: f64,
}

impl Default for SimpsonOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, min_panels: 64, max_doublings: 24, atol: 0.0 }
    }
}

/// Composite Simpson rule on a fixed grid of `panels` (even) sub-intervals.
pub fn simpson_fixed<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(2).next_multiple_of(2);
    let h = (b - a) / panels as f64;
    let mut ends = f(a) + f(b);
    let mut odd = 0.0;
    let mut even = 0.0;
    for k in 1..panels {
        let y = f(a + k as f64 * h);
        if k % 2 == 1 {
            odd += y;
        } else {
            even += y;
        }
    }
    ends += 4.0 * odd + 2.0 * even;
    ends * h / 3.0
}

/// Integrates `f` over `[a, b]`, doubling the number of Simpson panels
/// until two successive estimates agree to `opts.rtol`.
///
/// Function values are reused across doublings: each refinement evaluates
/// only the new midpoints.
pub fn simpson_adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: &SimpsonOptions) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut panels = opts.min_panels.max(2).next_multiple_of(2);
    let mut h = (b - a) / panels as f64;
    // Simpson = (ends + 4·odd + 2·even)·h/3; after doubling, old odd and
    // even points all become even points of the finer grid.
    let ends = f(a) + f(b);
    let mut odd = 0.0;
    let mut even = 0.0;
    for k in 1..panels {
        let y = f(a + k as f64 * h);
        if k % 2 == 1 {
            odd += y;
        } else {
            even += y;
        }
    }
    let mut estimate = (ends + 4.0 * odd + 2.0 * even) * h / 3.0;

    for _ in 0..opts.max_doublings {
        even += odd;
        panels *= 2;
        h *= 0.5;
        odd = 0.0;
        for k in (1..panels).step_by(2) {
            odd += f(a + k as f64 * h);
        }
        let refined = (ends + 4.0 * odd + 2.0 * even) * h / 3.0;
        let change = (refined - estimate).abs();
        estimate = refined;
        if change <= opts.rtol * refined.abs() || change <= opts.atol {
            return Ok(refined);
        }
    }
    Err(Error::QuadratureNotConverged { panels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_cubics() {
        let v = simpson_fixed(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 2);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_converges_on_smooth_integrand() {
        let v = simpson_adaptive(|x: f64| x.exp(), 0.0, 1.0, &SimpsonOptions::default()).unwrap();
        let exact = core::f64::consts::E - 1.0;
        assert!((v - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn adaptive_matches_fixed_grid_and_reversed_limits() {
        let f = |x: f64| (3.0 * x).sin() / (1.0 + x * x);
        let opts = SimpsonOptions::default();
        let a = simpson_adaptive(f, -1.0, 2.5, &opts).unwrap();
        let b = simpson_fixed(f, -1.0, 2.5, 20_000);
        assert!((a - b).abs() < 1e-10 * b.abs());
        let r = simpson_adaptive(f, 2.5, -1.0, &opts).unwrap();
        assert!((a + r).abs() < 1e-13);
    }

    #[test]
    fn zero_width_interval() {
        assert_eq!(simpson_adaptive(|x| x, 1.0, 1.0, &SimpsonOptions::default()).unwrap(), 0.0);
    }

    #[test]
    fn reports_non_convergence() {
        let opts = SimpsonOptions { rtol: 0.0, min_panels: 2, max_doublings: 3, atol: 0.0 };
        let err = simpson_adaptive(|x: f64| x.sqrt(), 0.0, 1.0, &opts).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }
}
