//! Exact event-driven simulation of Dirac pulses on an all-to-all network.
//!
//! Every oscillator rotates at rate ω. When its phase passes an integer by
//! continuous motion it emits a pulse that reaches every other oscillator
//! δt later and advances its phase by J. A jump that carries a receiver
//! across (or onto) an integer skips that receiver's firing.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};

/// Events closer than this are simultaneous.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracParams {
    pub omega: f64,
    pub jump: f64,
    pub delta_t: f64,
    /// Event budget per unit time and oscillator before the run is aborted.
    pub max_event_rate: f64,
}

impl DiracParams {
    pub fn new(omega: f64, jump: f64, delta_t: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(invalid("omega must be positive and finite"));
        }
        if !(jump.is_finite() && jump >= 0.0) {
            return Err(invalid("jump must be finite and non-negative"));
        }
        if !(delta_t.is_finite() && delta_t >= 0.0) {
            return Err(invalid("delta_t must be finite and non-negative"));
        }
        Ok(Self { omega, jump, delta_t, max_event_rate: 1e6 })
    }
}

/// One receiver's phase change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub receiver: usize,
    pub before: f64,
    pub after: f64,
}

/// Arrival of one pulse at all receivers.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracEvent {
    pub time: f64,
    pub emitter: usize,
    pub emitter_phase: f64,
    pub jumps: Vec<Jump>,
    /// Some receiver sat on an integer when the pulse arrived.
    pub coincidence: bool,
}

/// A continuous integer crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emission {
    pub time: f64,
    pub emitter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Arrival {
    time: f64,
    emitter: usize,
}

impl Eq for Arrival {}

impl Ord for Arrival {
    // Reversed so that the max-heap pops the earliest arrival.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.emitter.cmp(&self.emitter))
    }
}

impl PartialOrd for Arrival {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Result of [`simulate_dirac`]: the event log plus piecewise-linear phases.
#[derive(Debug, Clone, PartialEq)]
pub struct EventTrajectory {
    pub params: DiracParams,
    pub t_end: f64,
    pub events: Vec<DiracEvent>,
    pub emissions: Vec<Emission>,
    /// Arrivals scheduled after `t_end`, as `(time, emitter)`.
    pub pending: Vec<(f64, usize)>,
    /// Per oscillator, `(t, θ(t⁺))` at t = 0 and after every jump.
    segments: Vec<Vec<(f64, f64)>>,
}

impl EventTrajectory {
    pub fn n(&self) -> usize {
        self.segments.len()
    }

    fn breakpoint(&self, i: usize, t: f64, inclusive: bool) -> (f64, f64) {
        let seg = &self.segments[i];
        let idx = if inclusive {
            seg.partition_point(|&(tb, _)| tb <= t)
        } else {
            seg.partition_point(|&(tb, _)| tb < t)
        };
        seg[idx.max(1) - 1]
    }

    /// θ_i(t), right-continuous at jumps.
    pub fn phase_at(&self, t: f64, i: usize) -> Result<f64> {
        self.check_time(t)?;
        let (tb, th) = self.breakpoint(i, t, true);
        Ok(th + self.params.omega * (t - tb))
    }

    /// Left limit θ_i(t⁻).
    pub fn phase_before(&self, t: f64, i: usize) -> Result<f64> {
        self.check_time(t)?;
        let (tb, th) = self.breakpoint(i, t, false);
        Ok(th + self.params.omega * (t - tb))
    }

    pub fn phases_at(&self, t: f64) -> Result<Vec<f64>> {
        (0..self.n()).map(|i| self.phase_at(t, i)).collect()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() {
            return Err(Error::NonFinite);
        }
        if t < 0.0 || t > self.t_end {
            return Err(Error::OutOfRange { time: t, end: self.t_end });
        }
        Ok(())
    }

    /// Emission times of oscillator `i`.
    pub fn emission_times(&self, i: usize) -> Vec<f64> {
        self.emissions.iter().filter(|e| e.emitter == i).map(|e| e.time).collect()
    }

    /// Number of sign changes of `θ_i − θ_j`.
    pub fn sign_changes(&self, i: usize, j: usize) -> usize {
        self.count_sign_changes(i, j, |d| d)
    }

    /// Number of sign changes of the circular difference `θ_i − θ_j`
    /// reduced to `[−½, ½)`, i.e. how often the firing order swaps.
    pub fn order_swaps(&self, i: usize, j: usize) -> usize {
        self.count_sign_changes(i, j, |d| d - (d + 0.5).floor())
    }

    fn count_sign_changes(&self, i: usize, j: usize, map: impl Fn(f64) -> f64) -> usize {
        let diff = |t: f64| {
            let a = self.phase_at(t, i).unwrap_or(0.0);
            let b = self.phase_at(t, j).unwrap_or(0.0);
            map(a - b)
        };
        let mut last = diff(0.0).signum();
        let mut count = 0;
        for e in &self.events {
            let d = diff(e.time);
            if d != 0.0 && d.signum() != last {
                if last != 0.0 {
                    count += 1;
                }
                last = d.signum();
            }
        }
        count
    }
}

/// Simulates `n = theta0.len()` oscillators up to `t_end`.
pub fn simulate_dirac(params: &DiracParams, theta0: &[f64], t_end: f64) -> Result<EventTrajectory> {
    let n = theta0.len();
    if n < 2 {
        return Err(invalid("need at least two oscillators"));
    }
    if theta0.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(invalid("t_end must be positive"));
    }
    let omega = params.omega;
    let cap = (params.max_event_rate * n as f64 * t_end).ceil() as usize + n;

    let mut t = 0.0;
    let mut theta = theta0.to_vec();
    let mut next_fire: Vec<f64> = theta.iter().map(|th| th.floor() + 1.0).collect();
    let mut queue = BinaryHeap::new();
    let mut events = Vec::new();
    let mut emissions = Vec::new();
    let mut segments: Vec<Vec<(f64, f64)>> = theta.iter().map(|&th| vec![(0.0, th)]).collect();

    loop {
        if events.len() + emissions.len() > cap {
            return Err(Error::EventFlood { time: t, events: events.len() + emissions.len() });
        }
        let crossing = (0..n)
            .map(|i| t + (next_fire[i] - theta[i]) / omega)
            .fold(f64::INFINITY, f64::min);
        let arrival = queue.peek().map_or(f64::INFINITY, |a: &Arrival| a.time);
        let now = crossing.min(arrival);
        if now > t_end {
            break;
        }
        for th in theta.iter_mut() {
            *th += omega * (now - t);
        }
        t = now;

        // Continuous crossings first, in ascending index.
        for i in 0..n {
            let due = t + (next_fire[i] - theta[i]) / omega;
            if due <= t + TIE_TOL {
                theta[i] = next_fire[i];
                next_fire[i] += 1.0;
                emissions.push(Emission { time: t, emitter: i });
                queue.push(Arrival { time: t + params.delta_t, emitter: i });
            }
        }

        // Then all arrivals that are due, in ascending emitter index.
        let mut due = Vec::new();
        while let Some(a) = queue.peek() {
            if a.time <= t + TIE_TOL {
                due.push(queue.pop().map(|a| a.emitter).unwrap_or_default());
            } else {
                break;
            }
        }
        due.sort_unstable();
        for emitter in due {
            let mut jumps = Vec::with_capacity(n - 1);
            let mut coincidence = false;
            for r in (0..n).filter(|&r| r != emitter) {
                let before = theta[r];
                if (before - before.round()).abs() <= TIE_TOL {
                    coincidence = true;
                }
                let after = before + params.jump;
                theta[r] = after;
                next_fire[r] = next_fire[r].max(after.floor() + 1.0);
                segments[r].push((t, after));
                jumps.push(Jump { receiver: r, before, after });
            }
            events.push(DiracEvent { time: t, emitter, emitter_phase: theta[emitter], jumps, coincidence });
        }
    }

    let mut pending: Vec<(f64, usize)> = queue.into_iter().map(|a| (a.time, a.emitter)).collect();
    pending.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(EventTrajectory { params: *params, t_end, events, emissions, pending, segments })
}
