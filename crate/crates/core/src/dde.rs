//! Method-of-steps integration of the delayed equations of motion
//!
//! ```text
//! θ̇_i(t) = ω_i + Σ_j J_ij σ(θ_j(t − δt))
//! ```
//!
//! For δt > 0 the step is shrunk so that the lag is an integer number `m` of
//! steps. Every delayed RK4 stage then falls either on a stored node or on
//! the midpoint of a stored interval, where it is read from the cubic
//! Hermite interpolant built from the stored phases and rates. Because the
//! right-hand side depends only on the delayed state, the rate stored at a
//! new node is exactly the last stage evaluation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::lintheory::{period_integrals, TheoryParams};
use crate::network::CouplingMatrix;
use crate::pulse::PulseFunction;

/// Smallest number of steps per lag.
pub const MIN_STEPS_PER_LAG: usize = 4;

/// Relative change of `θ(t_end)` tolerated by the step-halving check.
pub const HALVING_RTOL: f64 = 1e-8;

/// Phases before `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HistoryPolicy {
    /// Free rotation, `θ_i(t) = θ_i(0) + ω_i t`.
    #[default]
    ConstantRate,
    /// `θ_i(t) = θ_i(0)`.
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    EulerForward,
}

/// Pulse, coupling, eigenfrequencies and lag of a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub pulse: PulseFunction,
    pub coupling: CouplingMatrix,
    omega: Vec<f64>,
    pub delta_t: f64,
}

impl SystemSpec {
    pub fn new(pulse: PulseFunction, coupling: CouplingMatrix, omega: f64, delta_t: f64) -> Result<Self> {
        let n = coupling.n();
        Self::with_omegas(pulse, coupling, vec![omega; n], delta_t)
    }

    /// Per-oscillator eigenfrequencies. Linear predictions refuse such systems
    /// unless all entries are equal.
    pub fn with_omegas(pulse: PulseFunction, coupling: CouplingMatrix, omega: Vec<f64>, delta_t: f64) -> Result<Self> {
        if omega.len() != coupling.n() {
            return Err(invalid("omega vector length differs from n"));
        }
        if omega.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(invalid("omega must be positive and finite"));
        }
        if !(delta_t.is_finite() && delta_t >= 0.0) {
            return Err(invalid("delta_t must be finite and non-negative"));
        }
        Ok(Self { pulse, coupling, omega, delta_t })
    }

    pub fn n(&self) -> usize {
        self.coupling.n()
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omega
    }

    /// The common eigenfrequency, if all oscillators share one.
    pub fn uniform_omega(&self) -> Option<f64> {
        let w0 = self.omega[0];
        self.omega.iter().all(|&w| w == w0).then_some(w0)
    }

    /// Right-hand side for a given (delayed) state.
    pub fn rhs(&self, delayed: &[f64], out: &mut [f64]) {
        let mut sig = vec![0.0; self.n()];
        self.rhs_with(delayed, &mut sig, out);
    }

    fn rhs_with(&self, delayed: &[f64], sig: &mut [f64], out: &mut [f64]) {
        for (s, &th) in sig.iter_mut().zip(delayed) {
            *s = self.pulse.sigma(th);
        }
        self.coupling.apply(sig, out);
        for (o, w) in out.iter_mut().zip(&self.omega) {
            *o += w;
        }
    }
}

/// Default requested step: `min(ψ/200, δt/4)` for δt > 0, `ψ/200` otherwise.
///
/// ψ uses the mean eigenfrequency; if the mean rate is not positive the
/// free period `ξ/ω` is used instead.
pub fn default_step(spec: &SystemSpec) -> f64 {
    let omega = spec.omega.iter().sum::<f64>() / spec.n() as f64;
    let xi = spec.pulse.period();
    let psi = TheoryParams::new(spec.pulse, omega, spec.coupling.row_sum(), spec.delta_t)
        .and_then(|p| period_integrals(&p))
        .map(|pi| pi.psi)
        .unwrap_or(xi / omega);
    let h = psi / 200.0;
    if spec.delta_t > 0.0 {
        h.min(spec.delta_t / MIN_STEPS_PER_LAG as f64)
    } else {
        h
    }
}

/// Uniformly gridded solution with phases and rates at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    spec: SystemSpec,
    policy: HistoryPolicy,
    method: Method,
    h: f64,
    /// Steps per lag, zero when δt = 0.
    lag_steps: usize,
    states: Vec<f64>,
    rates: Vec<f64>,
}

pub(crate) fn hermite(y0: f64, m0: f64, y1: f64, m1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}

pub(crate) fn hermite_slope(y0: f64, m0: f64, y1: f64, m1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let d00 = 6.0 * s2 - 6.0 * s;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = -6.0 * s2 + 6.0 * s;
    let d11 = 3.0 * s2 - 2.0 * s;
    (d00 * y0 + d01 * y1) / h + d10 * m0 + d11 * m1
}

impl Trajectory {
    /// Builds a trajectory from precomputed samples (row-major `[node][osc]`).
    /// Used to analyse externally generated data.
    pub fn from_samples(
        spec: SystemSpec,
        policy: HistoryPolicy,
        h: f64,
        states: Vec<f64>,
        rates: Vec<f64>,
    ) -> Result<Self> {
        let n = spec.n();
        if !(h.is_finite() && h > 0.0) {
            return Err(invalid("step must be positive"));
        }
        if states.is_empty() || states.len() % n != 0 || rates.len() != states.len() {
            return Err(invalid("sample arrays must hold the same whole number of nodes"));
        }
        let lag_steps = lag_steps_for(spec.delta_t, h)?;
        Ok(Self { spec, policy, method: Method::Rk4, h, lag_steps, states, rates })
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn policy(&self) -> HistoryPolicy {
        self.policy
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    /// Number of grid nodes.
    pub fn len(&self) -> usize {
        self.states.len() / self.n()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn state(&self, k: usize) -> &[f64] {
        let n = self.n();
        &self.states[k * n..(k + 1) * n]
    }

    pub fn rate(&self, k: usize) -> &[f64] {
        let n = self.n();
        &self.rates[k * n..(k + 1) * n]
    }

    pub fn initial_phases(&self) -> &[f64] {
        self.state(0)
    }

    /// Arithmetic mean phase at node `k`.
    pub fn mean_phase(&self, k: usize) -> f64 {
        self.state(k).iter().sum::<f64>() / self.n() as f64
    }

    pub fn mean_rate(&self, k: usize) -> f64 {
        self.rate(k).iter().sum::<f64>() / self.n() as f64
    }

    /// Phase and rate of oscillator `i` at any time up to the grid end:
    /// stored values on nodes, cubic Hermite between nodes and the history
    /// policy before `t = 0`.
    pub fn history_eval(&self, t: f64, i: usize) -> Result<(f64, f64)> {
        if !t.is_finite() {
            return Err(Error::NonFinite);
        }
        let end = self.end_time();
        if t > end {
            return Err(Error::OutOfRange { time: t, end });
        }
        if t < 0.0 {
            return Ok(self.pre_initial(t, i));
        }
        let last = self.len() - 1;
        let mut k = ((t / self.h).floor() as usize).min(last);
        if k < last && self.time(k + 1) <= t {
            k += 1;
        }
        if t == self.time(k) || k == last {
            return Ok((self.state(k)[i], self.rate(k)[i]));
        }
        let s = (t - self.time(k)) / self.h;
        Ok(self.interpolate(k, i, s))
    }

    /// Hermite interpolant on `[t_k, t_{k+1}]` at fraction `s`.
    fn interpolate(&self, k: usize, i: usize, s: f64) -> (f64, f64) {
        let (y0, m0) = (self.state(k)[i], self.rate(k)[i]);
        let (y1, m1) = (self.state(k + 1)[i], self.rate(k + 1)[i]);
        (hermite(y0, m0, y1, m1, self.h, s), hermite_slope(y0, m0, y1, m1, self.h, s))
    }

    fn pre_initial(&self, t: f64, i: usize) -> (f64, f64) {
        let th0 = self.states[i];
        match self.policy {
            HistoryPolicy::ConstantRate => {
                let w = self.spec.omega[i];
                (th0 + w * t, w)
            }
            HistoryPolicy::Frozen => (th0, 0.0),
        }
    }

    /// Delayed state at node index `j` (negative indices are history).
    fn node_state(&self, j: isize, out: &mut [f64]) {
        if j >= 0 {
            out.copy_from_slice(self.state(j as usize));
        } else {
            let t = j as f64 * self.h;
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.pre_initial(t, i).0;
            }
        }
    }

    /// Delayed state half a step after node index `j`.
    fn mid_state(&self, j: isize, out: &mut [f64]) {
        if j >= 0 {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.interpolate(j as usize, i, 0.5).0;
            }
        } else {
            let t = (j as f64 + 0.5) * self.h;
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.pre_initial(t, i).0;
            }
        }
    }

    /// Continues the integration with the same method and step until the
    /// grid covers `t_end`.
    pub fn extend(&mut self, t_end: f64) -> Result<()> {
        if !t_end.is_finite() {
            return Err(Error::NonFinite);
        }
        let target = steps_to_cover(t_end, self.h);
        let n = self.n();
        let mut work = Workspace::new(n);
        self.states.reserve((target + 1).saturating_sub(self.len()) * n);
        self.rates.reserve((target + 1).saturating_sub(self.len()) * n);
        while self.len() <= target {
            match (self.method, self.lag_steps) {
                (Method::EulerForward, _) => self.step_euler(&mut work),
                (Method::Rk4, 0) => self.step_rk4_ode(&mut work),
                (Method::Rk4, m) => self.step_rk4_delay(m, &mut work),
            }
            self.check_monotone()?;
        }
        Ok(())
    }

    fn push(&mut self, state: &[f64], rate: &[f64]) {
        self.states.extend_from_slice(state);
        self.rates.extend_from_slice(rate);
    }

    fn step_rk4_delay(&mut self, m: usize, w: &mut Workspace) {
        let k = self.len() - 1;
        let j = k as isize - m as isize;
        let h = self.h;
        self.mid_state(j, &mut w.y);
        self.spec.rhs_with(&w.y, &mut w.sig, &mut w.k2);
        self.node_state(j + 1, &mut w.y);
        self.spec.rhs_with(&w.y, &mut w.sig, &mut w.k4);
        let cur = self.state(k);
        let k1 = self.rate(k);
        for i in 0..cur.len() {
            w.next[i] = cur[i] + h / 6.0 * (k1[i] + 4.0 * w.k2[i] + w.k4[i]);
        }
        let (next, k4) = (core::mem::take(&mut w.next), core::mem::take(&mut w.k4));
        self.push(&next, &k4);
        w.next = next;
        w.k4 = k4;
    }

    fn step_rk4_ode(&mut self, w: &mut Workspace) {
        let k = self.len() - 1;
        let h = self.h;
        let n = self.n();
        let cur: Vec<f64> = self.state(k).to_vec();
        let k1: Vec<f64> = self.rate(k).to_vec();
        for i in 0..n {
            w.y[i] = cur[i] + 0.5 * h * k1[i];
        }
        self.spec.rhs_with(&w.y, &mut w.sig, &mut w.k2);
        for i in 0..n {
            w.y[i] = cur[i] + 0.5 * h * w.k2[i];
        }
        self.spec.rhs_with(&w.y, &mut w.sig, &mut w.k3);
        for i in 0..n {
            w.y[i] = cur[i] + h * w.k3[i];
        }
        self.spec.rhs_with(&w.y, &mut w.sig, &mut w.k4);
        for i in 0..n {
            w.next[i] = cur[i] + h / 6.0 * (k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
        }
        self.spec.rhs_with(&w.next, &mut w.sig, &mut w.k1);
        let (next, rate) = (core::mem::take(&mut w.next), core::mem::take(&mut w.k1));
        self.push(&next, &rate);
        w.next = next;
        w.k1 = rate;
    }

    fn step_euler(&mut self, w: &mut Workspace) {
        let k = self.len() - 1;
        let h = self.h;
        let n = self.n();
        for i in 0..n {
            w.next[i] = self.state(k)[i] + h * self.rate(k)[i];
        }
        self.spec.rhs_with(&w.next, &mut w.sig, &mut w.k1);
        let (next, rate) = (core::mem::take(&mut w.next), core::mem::take(&mut w.k1));
        self.push(&next, &rate);
        w.next = next;
        w.k1 = rate;
    }

    fn check_monotone(&self) -> Result<()> {
        let k = self.len() - 1;
        let (prev, cur) = (self.state(k - 1), self.state(k));
        for i in 0..cur.len() {
            if !(cur[i] > prev[i]) {
                return Err(Error::StepTooLarge {
                    time: self.time(k),
                    oscillator: i,
                    detail: format!("phase not increasing ({} -> {})", prev[i], cur[i]),
                });
            }
        }
        Ok(())
    }
}

struct Workspace {
    y: Vec<f64>,
    sig: Vec<f64>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    next: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            y: vec![0.0; n],
            sig: vec![0.0; n],
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            next: vec![0.0; n],
        }
    }
}

fn steps_to_cover(t_end: f64, h: f64) -> usize {
    let raw = t_end / h;
    let k = raw.round();
    // Accept a grid that reaches t_end up to rounding of the quotient.
    if (raw - k).abs() <= 1e-9 * raw.max(1.0) {
        k as usize
    } else {
        raw.ceil() as usize
    }
}

fn lag_steps_for(delta_t: f64, h: f64) -> Result<usize> {
    if delta_t == 0.0 {
        return Ok(0);
    }
    let m = (delta_t / h).round();
    if m < 1.0 || ((m * h) - delta_t).abs() > 1e-9 * delta_t {
        return Err(invalid("step does not divide the lag"));
    }
    Ok(m as usize)
}

/// Actual step for a requested one: for δt > 0 the largest `δt/m`, `m ≥ 4`,
/// not exceeding `h_req`.
pub fn effective_step(delta_t: f64, h_req: f64) -> f64 {
    if delta_t > 0.0 {
        let m = ((delta_t / h_req).ceil() as usize).max(MIN_STEPS_PER_LAG);
        delta_t / m as f64
    } else {
        h_req
    }
}

/// Options for [`integrate_rk4_with`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rk4Options {
    /// Repeat the run at half the step and fail with
    /// [`Error::StepTooLarge`] if any `θ_i(t_end)` moves by more than
    /// [`HALVING_RTOL`] relative.
    pub verify_halving: bool,
}

fn validate_run(spec: &SystemSpec, theta0: &[f64], t_end: f64, h: f64) -> Result<()> {
    if theta0.len() != spec.n() {
        return Err(invalid("initial phase vector length differs from n"));
    }
    if theta0.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(invalid("t_end must be positive"));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid("step must be positive"));
    }
    Ok(())
}

fn start(spec: &SystemSpec, theta0: &[f64], policy: HistoryPolicy, method: Method, h: f64) -> Result<Trajectory> {
    let lag_steps = lag_steps_for(spec.delta_t, h)?;
    let n = spec.n();
    let mut traj = Trajectory {
        spec: spec.clone(),
        policy,
        method,
        h,
        lag_steps,
        states: theta0.to_vec(),
        rates: vec![0.0; n],
    };
    let mut delayed = vec![0.0; n];
    traj.node_state(-(lag_steps as isize), &mut delayed);
    let mut rate = vec![0.0; n];
    traj.spec.rhs(&delayed, &mut rate);
    traj.rates.copy_from_slice(&rate);
    Ok(traj)
}

/// Integrates with RK4 (method of steps when δt > 0) on `[0, t_end]`.
pub fn integrate_rk4(
    spec: &SystemSpec,
    theta0: &[f64],
    policy: HistoryPolicy,
    t_end: f64,
    h_req: f64,
) -> Result<Trajectory> {
    integrate_rk4_with(spec, theta0, policy, t_end, h_req, &Rk4Options::default())
}

pub fn integrate_rk4_with(
    spec: &SystemSpec,
    theta0: &[f64],
    policy: HistoryPolicy,
    t_end: f64,
    h_req: f64,
    opts: &Rk4Options,
) -> Result<Trajectory> {
    validate_run(spec, theta0, t_end, h_req)?;
    let h = effective_step(spec.delta_t, h_req);
    let mut traj = start(spec, theta0, policy, Method::Rk4, h)?;
    traj.extend(t_end)?;
    if opts.verify_halving {
        let mut fine = start(spec, theta0, policy, Method::Rk4, 0.5 * h)?;
        fine.extend(t_end)?;
        for i in 0..spec.n() {
            let a = traj.history_eval(t_end, i)?.0;
            let b = fine.history_eval(t_end, i)?.0;
            if (a - b).abs() > HALVING_RTOL * a.abs().max(1.0) {
                return Err(Error::StepTooLarge {
                    time: t_end,
                    oscillator: i,
                    detail: format!("halving the step moved θ(t_end) by {:e}", (a - b).abs()),
                });
            }
        }
    }
    Ok(traj)
}

/// Naive forward Euler for the undelayed system. Its one-step lag acts as
/// an artificial transmission delay and produces spurious synchronization.
pub fn integrate_euler_forward(spec: &SystemSpec, theta0: &[f64], t_end: f64, h: f64) -> Result<Trajectory> {
    if spec.delta_t != 0.0 {
        return Err(invalid("forward Euler is only provided for delta_t = 0"));
    }
    validate_run(spec, theta0, t_end, h)?;
    let mut traj = start(spec, theta0, HistoryPolicy::ConstantRate, Method::EulerForward, h)?;
    traj.extend(t_end)?;
    Ok(traj)
}
