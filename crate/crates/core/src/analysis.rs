//! Synchronization observables measured on integrated trajectories.
//!
//! Phase differences oscillate within each period of σ, so most
//! observables are averaged over a trailing window in which the mean phase
//! advances by exactly one period ξ.

use alloc::vec;
use alloc::vec::Vec;

// Float math comes from libm unless std is linked elsewhere in the build.
#[allow(unused_imports)]
use num_traits::Float;

use crate::dde::{hermite, Trajectory};
use crate::error::{invalid, Error, Result};

/// Default band of the log-linear fit, as fractions of the initial value.
pub const DEFAULT_UPPER_FRAC: f64 = 0.9;
pub const DEFAULT_LOWER_FRAC: f64 = 0.01;

/// Minimum number of samples in the fit band.
pub const MIN_FIT_POINTS: usize = 10;

/// Windows inspected by [`strong_sync_check`].
pub const TREND_WINDOWS: usize = 5;

/// Default strong-synchronization tolerance in units of ξ.
pub const DEFAULT_SYNC_TOL_FRAC: f64 = 1e-3;

/// Window-averaged series.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WindowSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Length t* of each window.
    pub windows: Vec<f64>,
}

impl WindowSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Window start for one output node: the start lies at fraction `s` of the
/// grid interval `[t_j, t_{j+1}]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct WindowStart {
    node: usize,
    j: usize,
    s: f64,
}

/// Window starts of a trajectory, shared by every averaged series.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPlan {
    h: f64,
    times: Vec<f64>,
    starts: Vec<WindowStart>,
}

impl WindowPlan {
    /// Locates, for every node after the first full period, the earlier time
    /// at which the mean phase was one period ξ behind.
    pub fn new(traj: &Trajectory) -> Result<Self> {
        let xi = traj.spec().pulse.period();
        let len = traj.len();
        let mean: Vec<f64> = (0..len).map(|k| traj.mean_phase(k)).collect();
        let rate: Vec<f64> = (0..len).map(|k| traj.mean_rate(k)).collect();
        let h = traj.h();
        let mut starts = Vec::new();
        let mut j = 0;
        for k in 0..len {
            let target = mean[k] - xi;
            if target < mean[0] {
                continue;
            }
            while j + 1 < k && mean[j + 1] <= target {
                j += 1;
            }
            let s = if mean[j] == target {
                0.0
            } else {
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if hermite(mean[j], rate[j], mean[j + 1], rate[j + 1], h, mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            starts.push(WindowStart { node: k, j, s });
        }
        if starts.len() < 2 {
            return Err(Error::TooShort);
        }
        Ok(Self { h, times: (0..len).map(|k| traj.time(k)).collect(), starts })
    }

    /// Average of a node series with slopes over each window, integrating
    /// the cubic Hermite interpolant exactly.
    pub fn average(&self, values: &[f64], slopes: &[f64]) -> Result<WindowSeries> {
        if values.len() != self.times.len() || slopes.len() != values.len() {
            return Err(invalid("series length differs from the trajectory"));
        }
        let h = self.h;
        let mut cumulative = vec![0.0; values.len()];
        for k in 1..values.len() {
            let piece = 0.5 * h * (values[k - 1] + values[k]) + h * h / 12.0 * (slopes[k - 1] - slopes[k]);
            cumulative[k] = cumulative[k - 1] + piece;
        }
        let mut out = WindowSeries::default();
        for w in &self.starts {
            let j = w.j;
            let tail = hermite_integral_from(values[j], slopes[j], values[j + 1], slopes[j + 1], h, w.s);
            let integral = tail + cumulative[w.node] - cumulative[j + 1];
            let length = self.times[w.node] - (self.times[j] + w.s * h);
            out.times.push(self.times[w.node]);
            out.values.push(integral / length);
            out.windows.push(length);
        }
        Ok(out)
    }
}

/// ∫ over `[t_j + s·h, t_{j+1}]` of the Hermite cubic on the interval.
fn hermite_integral_from(y0: f64, m0: f64, y1: f64, m1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let p00 = 0.5 * s4 - s3 + s;
    let p10 = 0.25 * s4 - 2.0 * s3 / 3.0 + 0.5 * s2;
    let p01 = -0.5 * s4 + s3;
    let p11 = 0.25 * s4 - s3 / 3.0;
    h * ((0.5 - p00) * y0 + (1.0 / 12.0 - p10) * h * m0 + (0.5 - p01) * y1 + (-1.0 / 12.0 - p11) * h * m1)
}

/// Window average of an arbitrary node series with slopes.
pub fn windowed_average(traj: &Trajectory, values: &[f64], slopes: &[f64]) -> Result<WindowSeries> {
    WindowPlan::new(traj)?.average(values, slopes)
}

/// Window average of `θ_i − θ_j`.
pub fn windowed_phase_diff(traj: &Trajectory, i: usize, j: usize) -> Result<WindowSeries> {
    let plan = WindowPlan::new(traj)?;
    pair_average(traj, &plan, i, j, 0.0)
}

fn pair_average(traj: &Trajectory, plan: &WindowPlan, i: usize, j: usize, offset: f64) -> Result<WindowSeries> {
    let n = traj.n();
    if i >= n || j >= n {
        return Err(invalid("oscillator index out of range"));
    }
    let len = traj.len();
    let values: Vec<f64> = (0..len).map(|k| traj.state(k)[i] - traj.state(k)[j] - offset).collect();
    let slopes: Vec<f64> = (0..len).map(|k| traj.rate(k)[i] - traj.rate(k)[j]).collect();
    plan.average(&values, &slopes)
}

/// Log-linear fit of a decaying series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncFit {
    pub tau: f64,
    pub slope: f64,
    pub intercept: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
    /// RMS of the residuals of `ln(value)` about the fitted line.
    pub rms: f64,
}

/// Fits `ln(value/initial)` against time over the contiguous stretch where
/// the ratio lies in `[lower_frac, upper_frac]`; τ = −1/slope.
pub fn measure_sync_time(series: &WindowSeries, upper_frac: f64, lower_frac: f64) -> Result<SyncFit> {
    if !(0.0 < lower_frac && lower_frac < upper_frac) {
        return Err(invalid("fit band needs 0 < lower_frac < upper_frac"));
    }
    let initial = *series.values.first().ok_or(Error::TooShort)?;
    if initial == 0.0 || !initial.is_finite() {
        return Err(Error::NoDecay { points: 0, slope: 0.0 });
    }
    let ratio = |k: usize| series.values[k] / initial;
    let Some(first) = (0..series.len()).find(|&k| ratio(k) < upper_frac) else {
        return Err(Error::NoDecay { points: 0, slope: 0.0 });
    };
    let mut last = first;
    while last < series.len() && ratio(last) >= lower_frac {
        last += 1;
    }
    let points = last - first;
    if points < MIN_FIT_POINTS {
        return Err(Error::NoDecay { points, slope: 0.0 });
    }
    let xs = &series.times[first..last];
    let ys: Vec<f64> = (first..last).map(|k| ratio(k).ln()).collect();
    let np = points as f64;
    let mx = xs.iter().sum::<f64>() / np;
    let my = ys.iter().sum::<f64>() / np;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::NoDecay { points, slope });
    }
    let intercept = my - slope * mx;
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / np).sqrt();
    Ok(SyncFit {
        tau: -1.0 / slope,
        slope,
        intercept: intercept + initial.abs().ln(),
        t_start: xs[0],
        t_end: xs[points - 1],
        points,
        rms,
    })
}

/// Strong-synchronization verdict for one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncReport {
    pub pair: (usize, usize),
    /// Integer μ closest to `(θ_i − θ_j)/ξ` at the end of the run.
    pub mu: i64,
    /// `|θ_i − θ_j − μξ|` at the end of the run.
    pub residual: f64,
    pub synced: bool,
    pub tau_measured: Option<f64>,
    pub fit: Option<SyncFit>,
    /// Windowed `θ_i − θ_j − μξ`.
    pub series: WindowSeries,
}

/// Nearest multiple of ξ and the distance to it.
pub fn nearest_multiple(delta: f64, xi: f64) -> (i64, f64) {
    let mu = (delta / xi).round();
    (mu as i64, (delta - mu * xi).abs())
}

/// Checks every pair `i < j` for convergence to a multiple of ξ.
///
/// A pair is synchronized if its final residual is below `tol` and the
/// residuals at the last [`TREND_WINDOWS`] window boundaries do not grow.
pub fn strong_sync_check(traj: &Trajectory, tol: f64) -> Result<Vec<SyncReport>> {
    let xi = traj.spec().pulse.period();
    let last = traj.len() - 1;
    let end_mean = traj.mean_phase(last);
    if end_mean - traj.mean_phase(0) < TREND_WINDOWS as f64 * xi {
        return Err(Error::TooShort);
    }
    let boundaries = window_boundaries(traj, end_mean, xi)?;
    let plan = WindowPlan::new(traj)?;
    let n = traj.n();
    let mut reports = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let delta = traj.state(last)[i] - traj.state(last)[j];
            let (mu, residual) = nearest_multiple(delta, xi);
            let offset = mu as f64 * xi;
            let mut trend = Vec::with_capacity(boundaries.len());
            for &t in &boundaries {
                let d = traj.history_eval(t, i)?.0 - traj.history_eval(t, j)?.0;
                trend.push((d - offset).abs());
            }
            let slack = 1e-9 * xi;
            let non_increasing = trend.windows(2).all(|w| w[1] <= w[0] + slack);
            let series = pair_average(traj, &plan, i, j, offset)?;
            let fit = measure_sync_time(&series, DEFAULT_UPPER_FRAC, DEFAULT_LOWER_FRAC).ok();
            reports.push(SyncReport {
                pair: (i, j),
                mu,
                residual,
                synced: residual < tol && non_increasing,
                tau_measured: fit.map(|f| f.tau),
                fit,
                series,
            });
        }
    }
    Ok(reports)
}

/// Times at which the mean phase sits 4ξ, 3ξ, …, 0 behind its final value.
fn window_boundaries(traj: &Trajectory, end_mean: f64, xi: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(TREND_WINDOWS);
    for back in (0..TREND_WINDOWS).rev() {
        out.push(time_of_mean_phase(traj, end_mean - back as f64 * xi)?);
    }
    Ok(out)
}

/// First time the grid mean phase reaches `target`, refined on the Hermite
/// interpolant.
pub fn time_of_mean_phase(traj: &Trajectory, target: f64) -> Result<f64> {
    let len = traj.len();
    if target < traj.mean_phase(0) || target > traj.mean_phase(len - 1) {
        return Err(Error::TooShort);
    }
    let (mut lo, mut hi) = (0, len - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if traj.mean_phase(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (y0, m0) = (traj.mean_phase(lo), traj.mean_rate(lo));
    let (y1, m1) = (traj.mean_phase(hi), traj.mean_rate(hi));
    if y0 >= target {
        return Ok(traj.time(lo));
    }
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        if hermite(y0, m0, y1, m1, traj.h(), mid) < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(traj.time(lo) + 0.5 * (a + b) * traj.h())
}

/// One maximum of `σ(θ_i(t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulsePeak {
    pub time: f64,
    pub height: f64,
    /// Full width at half maximum in time, if both half crossings exist.
    pub fwhm: Option<f64>,
    /// Time of the nearest rate maximum minus `time`; `None` when the rate
    /// series has no maxima.
    pub rate_offset: Option<f64>,
}

/// `σ(θ_i(t))` and `θ̇_i(t)` on the grid plus their peak statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismSeries {
    pub times: Vec<f64>,
    /// `sigma[i][k] = σ(θ_i(t_k))`.
    pub sigma: Vec<Vec<f64>>,
    /// `rate[i][k] = θ̇_i(t_k)`.
    pub rate: Vec<Vec<f64>>,
    pub peaks: Vec<Vec<PulsePeak>>,
}

pub fn mechanism_series(traj: &Trajectory) -> Result<MechanismSeries> {
    let len = traj.len();
    if len < 3 {
        return Err(Error::TooShort);
    }
    let pulse = traj.spec().pulse;
    let times: Vec<f64> = (0..len).map(|k| traj.time(k)).collect();
    let mut sigma = Vec::with_capacity(traj.n());
    let mut rate = Vec::with_capacity(traj.n());
    let mut peaks = Vec::with_capacity(traj.n());
    for i in 0..traj.n() {
        let s: Vec<f64> = (0..len).map(|k| pulse.sigma(traj.state(k)[i])).collect();
        let r: Vec<f64> = (0..len).map(|k| traj.rate(k)[i]).collect();
        let rate_peaks: Vec<f64> = find_peaks(&r).into_iter().map(|k| refine_peak(&times, &r, k).0).collect();
        let list = find_peaks(&s)
            .into_iter()
            .map(|k| {
                let (time, height) = refine_peak(&times, &s, k);
                let rate_offset = rate_peaks
                    .iter()
                    .map(|&t| t - time)
                    .min_by(|a, b| a.abs().total_cmp(&b.abs()));
                PulsePeak { time, height, fwhm: fwhm(&times, &s, k, height), rate_offset }
            })
            .collect();
        sigma.push(s);
        rate.push(r);
        peaks.push(list);
    }
    Ok(MechanismSeries { times, sigma, rate, peaks })
}

/// Interior discrete maxima that rise above the midpoint of the series range.
fn find_peaks(v: &[f64]) -> Vec<usize> {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !(hi - lo > 1e-12 * hi.abs().max(1e-300)) {
        return Vec::new();
    }
    let level = 0.5 * (lo + hi);
    (1..v.len() - 1).filter(|&k| v[k] > level && v[k] > v[k - 1] && v[k] >= v[k + 1]).collect()
}

/// Vertex of the parabola through the three samples around `k`.
fn refine_peak(t: &[f64], v: &[f64], k: usize) -> (f64, f64) {
    let (a, b, c) = (v[k - 1], v[k], v[k + 1]);
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return (t[k], b);
    }
    let off = 0.5 * (a - c) / denom;
    let h = t[k + 1] - t[k];
    (t[k] + off * h, b - 0.25 * (a - c) * off)
}

fn fwhm(t: &[f64], v: &[f64], k: usize, height: f64) -> Option<f64> {
    let half = 0.5 * height;
    let cross = |a: usize, b: usize| t[a] + (half - v[a]) / (v[b] - v[a]) * (t[b] - t[a]);
    let mut l = k;
    while l > 0 && v[l - 1] > half {
        l -= 1;
    }
    let mut r = k;
    while r + 1 < v.len() && v[r + 1] > half {
        r += 1;
    }
    if l == 0 || r + 1 == v.len() {
        return None;
    }
    Some(cross(r, r + 1) - cross(l - 1, l))
}
