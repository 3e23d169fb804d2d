//! Linearized theory around the synchronized state.
//!
//! The mean phase θ̄ follows the lag-free mean equation
//! `θ̄̇ = ω + J̃σ(θ̄)`, so time is a quadrature over phase. Deviations from
//! θ̄ decay mode by mode with rates set by the period integrals
//!
//! ```text
//! ψ = ∫₀^ξ dθ / (ω + J̃σ(θ)),   S = ∫₀^ξ dθ σ′²(θ) / (ω + J̃σ(θ)).
//! ```

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dde::SystemSpec;
use crate::error::{invalid, Error, Result};
use crate::network::{mode_growth, SpectralDecomposition};
use crate::pulse::PulseFunction;
use crate::quad::{simpson_adaptive, simpson_fixed, SimpsonOptions};

/// Below this |J̃| the mode prefactor uses its J̃ → 0 limit.
pub const SMALL_JTILDE: f64 = 1e-8;

/// Phase tolerance of [`mean_phase_at`].
pub const PHASE_TOL: f64 = 1e-12;

/// Relative size of an integral below which further refinement is pointless.
const QUAD_ATOL_FRACTION: f64 = 1e-13;

/// Parameters of the mean-phase dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    pub pulse: PulseFunction,
    pub omega: f64,
    pub jtilde: f64,
    pub delta_t: f64,
    pub quad: SimpsonOptions,
}

impl TheoryParams {
    /// Validates that the mean rate `ω + J̃σ` stays positive for every phase.
    pub fn new(pulse: PulseFunction, omega: f64, jtilde: f64, delta_t: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(invalid("omega must be positive and finite"));
        }
        if !jtilde.is_finite() {
            return Err(invalid("row sum must be finite"));
        }
        if !(delta_t.is_finite() && delta_t >= 0.0) {
            return Err(invalid("delta_t must be finite and non-negative"));
        }
        let (lo, hi) = pulse.extrema();
        let (phase, slowest) = if jtilde * lo <= jtilde * hi { (0.5, jtilde * lo) } else { (0.0, jtilde * hi) };
        let rate = omega + slowest;
        if rate <= 0.0 {
            return Err(Error::NonPositiveRate { phase: phase * pulse.period(), rate });
        }
        Ok(Self { pulse, omega, jtilde, delta_t, quad: SimpsonOptions::default() })
    }

    /// Parameters of a simulated system; refuses per-oscillator frequencies.
    pub fn from_system(spec: &SystemSpec) -> Result<Self> {
        let omega = spec.uniform_omega().ok_or(Error::HeterogeneousOmega)?;
        Self::new(spec.pulse, omega, spec.coupling.row_sum(), spec.delta_t)
    }

    pub fn with_delta_t(mut self, delta_t: f64) -> Result<Self> {
        if !(delta_t.is_finite() && delta_t >= 0.0) {
            return Err(invalid("delta_t must be finite and non-negative"));
        }
        self.delta_t = delta_t;
        Ok(self)
    }

    /// Lag-free mean rate `ω + J̃σ(θ)`.
    pub fn mean_rate(&self, theta: f64) -> f64 {
        self.omega + self.jtilde * self.pulse.sigma(theta)
    }

    /// Lag-corrected rate `T(θ) = ω + J̃(σ − δt·(ω + J̃σ)·σ′)`.
    pub fn t_rate(&self, theta: f64) -> Result<f64> {
        let (s, sp) = self.pulse.sigma_and_prime(theta);
        let d = self.omega + self.jtilde * s;
        let t = self.omega + self.jtilde * (s - self.delta_t * d * sp);
        if t > 0.0 {
            Ok(t)
        } else {
            Err(Error::NonPositiveRate { phase: theta, rate: t })
        }
    }

    fn integrate<F: FnMut(f64) -> f64>(&self, f: F, a: f64, b: f64, scale: f64) -> Result<f64> {
        let opts = SimpsonOptions { atol: QUAD_ATOL_FRACTION * scale, ..self.quad };
        simpson_adaptive(f, a, b, &opts)
    }
}

/// ψ and S over one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodIntegrals {
    pub psi: f64,
    pub s: f64,
}

pub fn period_integrals(params: &TheoryParams) -> Result<PeriodIntegrals> {
    let xi = params.pulse.period();
    let psi = params.integrate(|th| 1.0 / params.mean_rate(th), 0.0, xi, xi / params.omega)?;
    let peak_slope = params.pulse.extrema().1 / period_width(&params.pulse);
    let s = params.integrate(|th| decay_integrand(params, th), 0.0, xi, peak_slope * peak_slope * psi)?;
    Ok(PeriodIntegrals { psi, s })
}

/// Phase scale over which σ varies.
fn period_width(pulse: &PulseFunction) -> f64 {
    match *pulse {
        PulseFunction::GaussianComb(p) => p.w,
        PulseFunction::Constant { xi, .. } => xi,
    }
}

/// Cells per period in the cumulative integral tables.
const TABLE_CELLS: usize = 2048;
/// Simpson panels per table cell.
const CELL_PANELS: usize = 8;
/// Simpson panels for the partial cell at a query point.
const LOCAL_PANELS: usize = 4;

/// Cumulative integral of a ξ-periodic integrand on a uniform grid over one
/// period, so that partial-period integrals cost one short quadrature.
#[derive(Debug, Clone, PartialEq)]
struct PeriodTable {
    xi: f64,
    cum: Vec<f64>,
}

impl PeriodTable {
    fn build<F: Fn(f64) -> f64>(f: F, xi: f64) -> Self {
        let dx = xi / TABLE_CELLS as f64;
        let mut cum = Vec::with_capacity(TABLE_CELLS + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for k in 0..TABLE_CELLS {
            acc += simpson_fixed(&f, k as f64 * dx, (k + 1) as f64 * dx, CELL_PANELS);
            cum.push(acc);
        }
        Self { xi, cum }
    }

    fn per_period(&self) -> f64 {
        self.cum[TABLE_CELLS]
    }

    fn dx(&self) -> f64 {
        self.xi / TABLE_CELLS as f64
    }

    /// Splits θ into whole periods and an offset in `[0, ξ)`.
    fn split(&self, theta: f64) -> (f64, f64) {
        let periods = (theta / self.xi).floor();
        let r = theta - periods * self.xi;
        if r >= self.xi {
            (periods + 1.0, 0.0)
        } else if r < 0.0 {
            (periods - 1.0, r + self.xi)
        } else {
            (periods, r)
        }
    }

    /// Within-period primitive at offset `r ∈ [0, ξ)`.
    fn offset_primitive<F: Fn(f64) -> f64>(&self, f: &F, r: f64) -> f64 {
        let k = ((r / self.dx()) as usize).min(TABLE_CELLS - 1);
        let node = k as f64 * self.dx();
        self.cum[k] + simpson_fixed(f, node, r, LOCAL_PANELS)
    }

    /// Primitive G with G(0) = 0 and G(θ + ξ) = G(θ) + per-period integral.
    fn primitive<F: Fn(f64) -> f64>(&self, f: &F, theta: f64) -> f64 {
        let (periods, r) = self.split(theta);
        periods * self.per_period() + self.offset_primitive(f, r)
    }

    /// Solves G(θ) = g for θ given the integrand and its reciprocal as the
    /// derivative of the inverse.
    fn invert<F: Fn(f64) -> f64, D: Fn(f64) -> f64>(&self, f: &F, inv_f: &D, g: f64) -> f64 {
        let total = self.per_period();
        let periods = (g / total).floor();
        let rem = (g - periods * total).clamp(0.0, total);
        let k = self.cum.partition_point(|&c| c <= rem).clamp(1, TABLE_CELLS) - 1;
        let dx = self.dx();
        let (mut lo, mut hi) = (k as f64 * dx, (k + 1) as f64 * dx);
        let mut x = lo + (rem - self.cum[k]) * inv_f(lo);
        for _ in 0..60 {
            if !(x > lo && x < hi) {
                x = 0.5 * (lo + hi);
            }
            let err = self.offset_primitive(f, x) - rem;
            if err > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let step = err * inv_f(x);
            x -= step;
            if step.abs() <= PHASE_TOL || hi - lo <= PHASE_TOL {
                break;
            }
        }
        periods * self.xi + x.clamp(lo, hi)
    }
}

/// Precomputed period integrals for repeated predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTheory {
    pub params: TheoryParams,
    pub integrals: PeriodIntegrals,
    s_t: Result<f64>,
    time_table: PeriodTable,
    decay_table: PeriodTable,
    decay_t_table: Option<PeriodTable>,
}

impl LinearTheory {
    pub fn new(params: TheoryParams) -> Result<Self> {
        let integrals = period_integrals(&params)?;
        let xi = params.pulse.period();
        let s_t = check_t_positive(&params).and_then(|()| {
            params.integrate(|th| decay_t_integrand(&params, th), 0.0, xi, integrals.s.max(f64::MIN_POSITIVE))
        });
        let time_table = PeriodTable::build(|th| 1.0 / params.mean_rate(th), xi);
        let decay_table = PeriodTable::build(|th| decay_integrand(&params, th), xi);
        let decay_t_table = s_t.is_ok().then(|| PeriodTable::build(|th| decay_t_integrand(&params, th), xi));
        Ok(Self { params, integrals, s_t, time_table, decay_table, decay_t_table })
    }

    /// ∫₀^ξ σ′²/T, or [`Error::NonPositiveRate`] if T changes sign.
    pub fn s_t(&self) -> Result<f64> {
        self.s_t.clone()
    }

    pub fn psi(&self) -> f64 {
        self.integrals.psi
    }

    pub fn s(&self) -> f64 {
        self.integrals.s
    }

    /// Time for θ̄ to move from `theta_bar0` to `theta_bar` (signed).
    pub fn mean_phase_time(&self, theta_bar: f64, theta_bar0: f64) -> Result<f64> {
        if !(theta_bar.is_finite() && theta_bar0.is_finite()) {
            return Err(Error::NonFinite);
        }
        let p = &self.params;
        let f = |th: f64| 1.0 / p.mean_rate(th);
        Ok(self.time_table.primitive(&f, theta_bar) - self.time_table.primitive(&f, theta_bar0))
    }

    /// Mean phase at time `t ≥ 0` when θ̄(0) = `theta_bar0`.
    pub fn mean_phase_at(&self, t: f64, theta_bar0: f64) -> Result<f64> {
        if !(t.is_finite() && theta_bar0.is_finite()) {
            return Err(Error::NonFinite);
        }
        if t < 0.0 {
            return Err(invalid("mean_phase_at needs t >= 0"));
        }
        if t == 0.0 {
            return Ok(theta_bar0);
        }
        let p = &self.params;
        let f = |th: f64| 1.0 / p.mean_rate(th);
        let rate = |th: f64| p.mean_rate(th);
        let g0 = self.time_table.primitive(&f, theta_bar0);
        Ok(self.time_table.invert(&f, &rate, g0 + t).max(theta_bar0))
    }

    /// ∫ σ′²/(ω + J̃σ) between two phases.
    pub fn decay_integral(&self, from: f64, to: f64) -> Result<f64> {
        if !(from.is_finite() && to.is_finite()) {
            return Err(Error::NonFinite);
        }
        let p = &self.params;
        let f = |th: f64| decay_integrand(p, th);
        Ok(self.decay_table.primitive(&f, to) - self.decay_table.primitive(&f, from))
    }

    /// ∫ σ′²/T between two phases.
    pub fn decay_integral_t(&self, from: f64, to: f64) -> Result<f64> {
        self.s_t()?;
        if !(from.is_finite() && to.is_finite()) {
            return Err(Error::NonFinite);
        }
        let table = self.decay_t_table.as_ref().ok_or(Error::NonFinite)?;
        let p = &self.params;
        let f = |th: f64| decay_t_integrand(p, th);
        Ok(table.primitive(&f, to) - table.primitive(&f, from))
    }

    /// τ = ψ / (2J̃²δt S).
    pub fn sync_time_two(&self) -> Result<f64> {
        let p = &self.params;
        let denom = 2.0 * p.jtilde * p.jtilde * p.delta_t * self.integrals.s;
        if denom <= 0.0 {
            return Err(Error::InfiniteSyncTime);
        }
        Ok(self.integrals.psi / denom)
    }

    /// τ_i = ψ / (−Re[λ(J̃ − λ)]·δt·S).
    pub fn mode_sync_time(&self, lambda: Complex64) -> Result<f64> {
        let p = &self.params;
        let growth = mode_growth(lambda, p.jtilde);
        if growth >= 0.0 {
            return Err(Error::NonDecayingMode { growth });
        }
        let denom = -growth * p.delta_t * self.integrals.s;
        if denom <= 0.0 {
            return Err(Error::InfiniteSyncTime);
        }
        Ok(self.integrals.psi / denom)
    }

    /// Mean rate felt at time `t`: `ω + J̃σ(θ̄(t − δt))`, with free rotation
    /// for negative arguments.
    pub fn delayed_mean_rate(&self, t: f64, theta_bar0: f64) -> Result<f64> {
        let p = &self.params;
        let s = t - p.delta_t;
        let th = if s >= 0.0 { self.mean_phase_at(s, theta_bar0)? } else { theta_bar0 + p.omega * s };
        Ok(p.mean_rate(th))
    }

    /// Two-oscillator half difference φ(t) for symmetric unit coupling.
    pub fn predict_phi(&self, t: f64, phi0: f64, theta_bar0: f64) -> Result<f64> {
        let p = &self.params;
        let theta_bar = self.mean_phase_at(t, theta_bar0)?;
        let prefactor = self.delayed_mean_rate(0.0, theta_bar0)? / self.delayed_mean_rate(t, theta_bar0)?;
        let exponent = -2.0 * p.delta_t * p.jtilde * p.jtilde * self.decay_integral(theta_bar0, theta_bar)?;
        Ok(phi0 * prefactor * exponent.exp())
    }

    /// Normal-mode amplitude ⟨i|φ(t)⟩.
    pub fn predict_mode(&self, t: f64, mode: &ModePrediction, theta_bar0: f64) -> Result<Complex64> {
        let p = &self.params;
        let lambda = mode.lambda;
        let theta_bar = self.mean_phase_at(t, theta_bar0)?;
        let (s, sp) = p.pulse.sigma_and_prime(theta_bar);
        let (s0, sp0) = p.pulse.sigma_and_prime(theta_bar0);
        let t_zero = p.t_rate(theta_bar0)?;
        let log_factor = if p.jtilde.abs() < SMALL_JTILDE {
            lambda * ((s - s0) / p.omega - p.delta_t * (sp - sp0))
        } else {
            // T − T₀ formed directly so that small J̃ keeps full precision.
            let d = p.mean_rate(theta_bar);
            let d0 = p.mean_rate(theta_bar0);
            let diff = p.jtilde * ((s - s0) - p.delta_t * (d * sp - d0 * sp0));
            let ln_ratio = (diff / t_zero).ln_1p();
            lambda * (ln_ratio / p.jtilde)
        };
        let decay = lambda * (p.jtilde - lambda) * (p.delta_t * self.decay_integral_t(theta_bar0, theta_bar)?);
        Ok(mode.amplitude * (log_factor + decay).exp())
    }

    /// Predictions for every non-Perron mode of `decomp` given the initial
    /// deviation from the mean phase.
    pub fn mode_predictions(&self, decomp: &SpectralDecomposition, theta0: &[f64]) -> Result<Vec<ModePrediction>> {
        if theta0.len() != decomp.n() {
            return Err(invalid("initial phase vector length differs from n"));
        }
        let mean = decomp.project(decomp.perron_index, theta0).re;
        let phi0: Vec<f64> = theta0.iter().map(|t| t - mean).collect();
        decomp
            .non_perron()
            .map(|i| {
                let lambda = decomp.eigenvalues[i];
                let growth = mode_growth(lambda, self.params.jtilde);
                let tau = match self.mode_sync_time(lambda) {
                    Ok(tau) => tau,
                    Err(Error::NonDecayingMode { .. }) | Err(Error::InfiniteSyncTime) => f64::INFINITY,
                    Err(e) => return Err(e),
                };
                Ok(ModePrediction { index: i, lambda, amplitude: decomp.project(i, &phi0), growth, tau })
            })
            .collect()
    }
}

fn decay_integrand(p: &TheoryParams, theta: f64) -> f64 {
    let sp = p.pulse.sigma_prime(theta);
    sp * sp / p.mean_rate(theta)
}

fn decay_t_integrand(p: &TheoryParams, theta: f64) -> f64 {
    let (s, sp) = p.pulse.sigma_and_prime(theta);
    let d = p.omega + p.jtilde * s;
    sp * sp / (p.omega + p.jtilde * (s - p.delta_t * d * sp))
}

/// Scans one period for a non-positive T.
fn check_t_positive(p: &TheoryParams) -> Result<()> {
    const SAMPLES: usize = 2048;
    let xi = p.pulse.period();
    for k in 0..SAMPLES {
        p.t_rate(xi * k as f64 / SAMPLES as f64)?;
    }
    Ok(())
}

/// One normal mode of the deviation vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePrediction {
    pub index: usize,
    pub lambda: Complex64,
    /// A_i = ⟨i|φ(0)⟩.
    pub amplitude: Complex64,
    /// Re[λ(J̃ − λ)].
    pub growth: f64,
    /// Synchronization time, infinite unless `growth < 0`.
    pub tau: f64,
}

pub fn mean_phase_time(theta_bar: f64, params: &TheoryParams, theta_bar0: f64) -> Result<f64> {
    LinearTheory::new(*params)?.mean_phase_time(theta_bar, theta_bar0)
}

pub fn mean_phase_at(t: f64, params: &TheoryParams, theta_bar0: f64) -> Result<f64> {
    LinearTheory::new(*params)?.mean_phase_at(t, theta_bar0)
}

pub fn sync_time_two(params: &TheoryParams) -> Result<f64> {
    let p = params.with_delta_t(params.delta_t)?;
    if p.delta_t == 0.0 {
        return Err(Error::InfiniteSyncTime);
    }
    let integrals = period_integrals(&p)?;
    let denom = 2.0 * p.jtilde * p.jtilde * p.delta_t * integrals.s;
    if denom <= 0.0 {
        return Err(Error::InfiniteSyncTime);
    }
    Ok(integrals.psi / denom)
}

pub fn mode_sync_time(lambda: Complex64, params: &TheoryParams) -> Result<f64> {
    let growth = mode_growth(lambda, params.jtilde);
    if growth >= 0.0 {
        return Err(Error::NonDecayingMode { growth });
    }
    let integrals = period_integrals(params)?;
    let denom = -growth * params.delta_t * integrals.s;
    if denom <= 0.0 {
        return Err(Error::InfiniteSyncTime);
    }
    Ok(integrals.psi / denom)
}
