//! Experiment runners. Each writes its CSV files into the output directory
//! and returns them together with the values it resolved at run time.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use pulsesync_core::analysis::{
    measure_sync_time, mechanism_series, strong_sync_check, windowed_average, windowed_phase_diff,
};
use pulsesync_core::dde::{
    default_step, integrate_euler_forward, integrate_rk4_with, HistoryPolicy, Rk4Options, SystemSpec, Trajectory,
};
use pulsesync_core::dirac::{simulate_dirac, DiracParams, EventTrajectory};
use pulsesync_core::lintheory::{LinearTheory, ModePrediction, TheoryParams};
use pulsesync_core::network::{classify_stability, spectral_decompose, CouplingMatrix, Verdict};
use pulsesync_core::pulse::PulseFunction;
use pulsesync_core::Error;

use crate::config::{resolved, Config, ConfigError, Experiment};
use crate::error::{Context, RunError};
use crate::io::{read_matrix_csv, sync_report_text, write_event_samples, write_events, write_text, write_trajectory, CsvWriter};
use crate::numfmt::fmt_f64;
use crate::rng::uniform_phases;

/// Files written by a run plus the values resolved from `auto` settings.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub resolved: Vec<(String, String)>,
}

impl RunOutput {
    fn note(&mut self, key: &str, value: f64) {
        self.resolved.push(resolved(key, value));
    }

    fn note_text(&mut self, key: &str, value: impl Into<String>) {
        self.resolved.push((key.to_string(), value.into()));
    }
}

/// Runs the configured experiment and writes `manifest.txt` last.
pub fn run(config: &Config, out_dir: &Path) -> Result<RunOutput, RunError> {
    std::fs::create_dir_all(out_dir).map_err(|source| RunError::Io { path: out_dir.to_path_buf(), source })?;
    let mut out = RunOutput::default();
    match config.experiment() {
        Experiment::Simulate => simulate(config, out_dir, &mut out)?,
        Experiment::Dirac => dirac(config, out_dir, &mut out)?,
        Experiment::Predict => predict(config, out_dir, &mut out)?,
        Experiment::Spectrum => spectrum(config, out_dir, &mut out)?,
        Experiment::SweepDelay => sweep_delay(config, out_dir, &mut out)?,
        Experiment::Fig1 => fig1(config, out_dir, &mut out)?,
        Experiment::Fig2 => fig2(config, out_dir, &mut out)?,
        Experiment::Fig3 => fig3(config, out_dir, &mut out)?,
        Experiment::Mechanism => mechanism(config, out_dir, &mut out)?,
    }
    let manifest = write_text(&out_dir.join("manifest.txt"), &config.manifest(&out.resolved))?;
    out.files.push(manifest);
    Ok(out)
}

fn pulse(c: &Config) -> Result<PulseFunction, RunError> {
    let (xi, w) = (c.f64("xi")?, c.f64("w")?);
    PulseFunction::gaussian(xi, w).context(|| "pulse parameters".into())
}

fn coupling(c: &Config) -> Result<CouplingMatrix, RunError> {
    let a = c.f64("coupling_a")?;
    let what = || "coupling matrix".to_string();
    match c.choice("coupling", &["all_to_all", "ring_laplacian", "file"])? {
        "all_to_all" => CouplingMatrix::all_to_all(c.usize("n")?, a).context(what),
        "ring_laplacian" => CouplingMatrix::ring_laplacian(c.usize("n")?, a).context(what),
        _ => {
            let path = c.raw("coupling_file");
            if path.is_empty() {
                return Err(ConfigError::Invalid {
                    key: "coupling_file".into(),
                    value: String::new(),
                    expected: "a CSV path when coupling = file".into(),
                }
                .into());
            }
            let (n, w) = read_matrix_csv(Path::new(path))?;
            CouplingMatrix::new(n, w).context(|| format!("coupling matrix from {path}"))
        }
    }
}

fn system(c: &Config, delta_t: f64) -> Result<SystemSpec, RunError> {
    SystemSpec::new(pulse(c)?, coupling(c)?, c.f64("omega")?, delta_t).context(|| "system".into())
}

fn policy(c: &Config) -> Result<HistoryPolicy, RunError> {
    Ok(match c.choice("history", &["constant_rate", "frozen"])? {
        "frozen" => HistoryPolicy::Frozen,
        _ => HistoryPolicy::ConstantRate,
    })
}

fn theta_bar0(c: &Config) -> Result<f64, RunError> {
    Ok(c.auto_f64("theta_bar0")?.unwrap_or(c.f64("xi")? / 2.0))
}

/// Initial phases according to `init`.
fn initial_phases(c: &Config, n: usize, out: &mut RunOutput) -> Result<Vec<f64>, RunError> {
    let list = c.f64_list("theta0")?;
    let mode = match c.choice("init", &["auto", "list", "pair", "random"])? {
        "auto" if !list.is_empty() => "list",
        "auto" if n == 2 => "pair",
        "auto" => "random",
        other => other,
    };
    let theta0 = match mode {
        "list" => {
            if list.len() != n {
                return Err(ConfigError::Invalid {
                    key: "theta0".into(),
                    value: c.raw("theta0").into(),
                    expected: format!("{n} phases"),
                }
                .into());
            }
            list
        }
        "pair" => {
            if n != 2 {
                return Err(ConfigError::Invalid { key: "init".into(), value: "pair".into(), expected: "n = 2".into() }.into());
            }
            let (mid, phi0) = (theta_bar0(c)?, c.f64("phi0")?);
            vec![mid + phi0, mid - phi0]
        }
        _ => uniform_phases(c.u64("seed")?, n, c.f64("xi")?),
    };
    out.note_text("init_used", mode);
    out.note_text("theta0_used", theta0.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(","));
    Ok(theta0)
}

fn theory(spec: &SystemSpec) -> Result<LinearTheory, RunError> {
    let params = TheoryParams::from_system(spec).context(|| "linear theory".into())?;
    LinearTheory::new(params).context(|| "linear theory".into())
}

fn mode_predictions(spec: &SystemSpec, lt: &LinearTheory, theta0: &[f64]) -> Result<Vec<ModePrediction>, RunError> {
    let dec = spectral_decompose(&spec.coupling).context(|| "spectrum".into())?;
    lt.mode_predictions(&dec, theta0).context(|| "mode predictions".into())
}

/// Slowest predicted synchronization time, if any mode decays.
fn slowest_tau(modes: &[ModePrediction]) -> Option<f64> {
    let tau = modes.iter().map(|m| m.tau).fold(0.0, f64::max);
    (tau.is_finite() && tau > 0.0).then_some(tau)
}

fn step(c: &Config, spec: &SystemSpec) -> Result<f64, RunError> {
    Ok(c.auto_f64("h")?.unwrap_or_else(|| default_step(spec)))
}

fn integrate(c: &Config, spec: &SystemSpec, theta0: &[f64], t_end: f64, h: f64) -> Result<Trajectory, RunError> {
    let what = || format!("integration to t={} with delta_t={}", fmt_f64(t_end), fmt_f64(spec.delta_t));
    match c.choice("method", &["rk4", "euler"])? {
        "euler" => integrate_euler_forward(spec, theta0, t_end, h).context(what),
        _ => {
            let opts = Rk4Options { verify_halving: c.bool("verify_halving")? };
            integrate_rk4_with(spec, theta0, policy(c)?, t_end, h, &opts).context(what)
        }
    }
}

fn simulate(c: &Config, dir: &Path, out: &mut RunOutput) -> Result<(), RunError> {
    let spec = system(c, c.f64("delta_t")?)?;
    let theta0 = initial_phases(c, spec.n(), out)?;
    let h = step(c, &spec)?;
    let t_end = match c.auto_f64("t_end")? {
        Some(t) => t,
        None => {
            let lt = theory(&spec)?;
            let tau = mode_predictions(&spec, &lt, &theta0)?;
            slowest_tau(&tau).map_or(20.0 * lt.psi(), |t| 10.0 * t)
        }
    };
    out.note("h_requested", h);
    out.note("t_end_used", t_end);
    let traj = integrate(c, &spec, &theta0, t_end, h)?;
    out.note("h_used", traj.h());
    out.files.push(write_trajectory(&dir.join("trajectory.csv"), &traj, c.usize("sample_every")?)?);
    let tol = c.auto_f64("sync_tol")?.unwrap_or(1e-3 * c.f64("xi")?);
    match strong_sync_check(&traj, tol) {
        Ok(reports) => out.files.push(write_text(&dir.join("sync_report.txt"), &sync_report_text(&reports))?),
        Err(Error::TooShort) => out.note_text("sync_report", "run shorter than five periods"),
        Err(e) => return Err(RunError::Numerical { context: "strong synchronization check".into(), source: e }),
    }
    Ok(())
}

fn dirac_run(c: &Config, delta_t: f64, theta0: &[f64]) -> Result<EventTrajectory, RunError> {
    let params = DiracParams::new(c.f64("omega")?, c.f64("jump")?, delta_t).context(|| "Dirac parameters".into())?;
    let t_end = c.auto_f64("t_end")?.unwrap_or(20.0 / params.omega);
    simulate_dirac(&params, theta0, t_end).context(|| format!("Dirac simulation with delta_t={}", fmt_f64(delta_t)))
}

fn dirac_summary(traj: &EventTrajectory) -> String {
    let n = traj.n();
    let mut s = format!("t_end = {}\nevents = {}\npending = {}\n", fmt_f64(traj.t_end), traj.events.len(), traj.pending.len());
    s.push_str(&format!("coincidences = {}\n", traj.events.iter().filter(|e| e.coincidence).count()));
    for i in 0..n {
        s.push_str(&format!("emissions_{} = {}\n", i + 1, traj.emission_times(i).len()));
    }
    for i in 0..n {
        for j in i + 1..n {
            s.push_str(&format!("order_swaps_{}_{} = {}\n", i + 1, j + 1, traj.order_swaps(i, j)));
        }
    }
    s
}

fn dirac(c: &Config, dir: &Path, out: &mut RunOutput) -> Result<(), RunError> {
    let n = c.usize("n")?;
    let theta0 = initial_phases(c, n, out)?;
    let traj = dirac_run(c, c.f64("delta_t")?, &theta0)?;
    out.files.push(write_events(&dir.join("events.csv"), &traj)?);
    out.files.push(write_event_samples(&dir.join("trajectory.csv"), &traj, c.f64("sample_dt")?)?);
    out.files.push(write_text(&dir.join("summary.txt"), &dirac_summary(&traj))?);
    Ok(())
}

fn fig1(c: &Config, dir: &Path, out: &mut RunOutput) -> Result<(), RunError> {
    let n = c.usize("n")?;
    let theta0 = initial_phases(c, n, out)?;
    let dt = c.f64("sample_dt")?;
    for (label, delta_t) in [("no_delay", 0.0), ("delay", c.f64("delta_t")?)] {
        let traj = dirac_run(c, delta_t, &theta0)?;
        out.files.push(write_event_samples(&dir.join(format!("fig1_{label}.csv")), &traj, dt)?);
        out.files.push(write_events(&dir.join(format!("fig1_{label}_events.csv")), &traj)?);
        out.files.push(write_text(&dir.join(format!("fig1_{label}_summary.txt")), &dirac_summary(&traj))?);
    }
    Ok(())
}

fn predict(c: &Config, dir: &Path, out: &mut RunOutput) -> Result<(), RunError> {
    let spec = system(c, c.f64("delta_t")?)?;
    let theta0 = initial_phases(c, spec.n(), out)?;
    let lt = theory(&spec)?;
    let modes = mode_predictions(&spec, &lt, &theta0)?;
    let mid = theta0.iter().sum::<f64>() / theta0.len() as f64;
    let t_end = c.auto_f64("t_end")?.unwrap_or_else(|| slowest_tau(&modes).map_or(10.0 * lt.psi(), |t| 10.0 * t));
    out.note("t_end_used", t_end);

    let mut text = format!("psi = {}\nS = {}\n", fmt_f64(lt.psi()), fmt_f64(lt.s()));
    match lt.s_t() {
        Ok(s) => text.push_str(&format!("S_T = {}\n", fmt_f64(s))),
        Err(e) => text.push_str(&format!("S_T = undefined ({e})\n")),
    }
    for m in &modes {
        text.push_str(&format!(
            "mode {}: lambda = {} {:+}i, growth = {}, tau = {}, amplitude = {} {:+}i\n",
            m.index,
            fmt_f64(m.lambda.re),
            m.lambda.im,
            fmt_f64(m.growth),
            fmt_f64(m.tau),
            fmt_f64(m.amplitude.re),
            m.amplitude.im
        ));
    }
    out.files.push(write_text(&dir.join("theory.txt"), &text)?);

    let pair = spec.n() == 2;
    let mut header = vec!["t".to_string(), "theta_bar".to_string()];
    if pair {
        header.push("phi_linear".into());
    }
    for m in &modes {
        header.push(format!("mode_{}_re", m.index + 1));
        header.push(format!("mode_{}_im", m.index + 1));
    }
    let path = dir.join("predict.csv");
    let mut w = CsvWriter::create(&path, &header)?;
    let dt = c.f64("sample_dt")?;
    let phi0 = 0.5 * (theta0[0] - theta0.get(1).copied().unwrap_or(theta0[0]));
    let steps = (t_end / dt).floor() as usize;
    for k in 0..=steps {
        let t = k as f64 * dt;
        let what = || format!("prediction at t={}", fmt_f64(t));
        let mut row = vec![t, lt.mean_phase_at(t, mid).context(what)?];
        if pair {
            row.push(lt.predict_phi(t, phi0, mid).context(what)?);
        }
        for m in &modes {
            let z = lt.predict_mode(t, m, mid).context(what)?;
            row.push(z.re);
            row.push(z.im);
        }
        w.row(&row)?;
    }
    out.files.push(w.finish()?);
    Ok(())
}

fn spectrum(c: &Config, dir: &Path, out: &mut RunOutput) -> Result<(), RunError> {
    let spec = system(c, c.f64("delta_t")?)?;
    let dec = spectral_decompose(&spec.coupling).context(|| "spectrum".into())?;
    out.note("row_sum", dec.row_sum);
    out.note("condition", dec.condition);
    let lt = (spec.delta_t > 0.0).then(|| theory(&spec)).transpose()?;
    let path = dir.join("spectrum.csv");
    let mut w = CsvWriter::create(&path, &["mode", "lambda_re", "lambda_im", "growth", "tau", "verdict"])?;
    w.fields(&[
        (dec.perron_index + 1).to_string(),
        fmt_f64(dec.eigenvalues[dec.perron_index].re),
        fmt_f64(dec.eigenvalues[dec.perron_index].im),
        String::new(),
        String::new(),
        "perron".into(),
    ])?;
    for s in classify_stability(&dec) {
        let tau = match &lt {
            Some(lt) if s.growth < 0.0 => lt.mode_sync_time(s.lambda).context(|| "mode synchronization time".into())?,
            _ => f64::INFINITY,
        };
        let verdict = match s.verdict {
            Verdict::Synchronizing => "synchronizing",
            Verdict::Marginal => "marginal",
            Verdict::NonSynchronizing => "non_synchronizing",
        };
        w.fields(&[(s.index + 1).to_string(), fmt_f64(s.lambda.re), fmt_f64(s.lambda.im), fmt_f64(s.growth), fmt_f64(tau), verdict.into()])?;
    }
    out.files.push(w.finish()?);
    Ok(())
}

/// Lags of a delay sweep in increasing order.
pub fn sweep_grid(c: &Config) -> Result<Vec<f64>, RunError> {
    let (lo, hi, points) = (c.f64("sweep_min")?, c.f64("sweep_max")?, c.usize("sweep_points")?);
    if !(lo > 0.0 && hi > lo && points >= 2) {
        return Err(ConfigError::Invalid {
            key: "sweep_min".into(),
            value: format!("{lo}..{hi} with {points} points"),
            expected: "0 < sweep_min < sweep_max and sweep_points >= 2".into(),
        }
        .into());
    }
    let log = c.choice("sweep_scale", &["log", "linear"])? == "log";
    Ok((0..points)
        .map(|k| {
            let f = k as f64 / (points - 1) as f64;
            if k == 0 {
                lo
            } else if k == points - 1 {
                hi
            } else if log {
                lo * (hi / lo).powf(f)
            } else {
                lo + f * (hi - lo)
            }
        })
        .collect())
}

/// Result of one delay-sweep point.
struct SweepPoint {
    delta_t: f64,
    measured: f64,
    linear: f64,
    predicted: f64,
    note: Option<String>,
}

/// Full run at one lag: measured τ of the windowed pair difference, τ of the
/// same fit applied to the linear prediction (pairs only) and the closed form.
fn sweep_point(c: &Config, delta_t: f64, theta0: &[f64], with_linear: bool) -> Result<SweepPoint, RunError> {
    let spec = system(c, delta_t)?;
    let lt = theory(&spec)?;
    let modes = mode_predictions(&spec, &lt, theta0)?;
    let predicted = slowest_tau(&modes).unwrap_or(f64::INFINITY);
    let t_end = c.auto_f64("t_end")?.unwrap_or(8.0 * predicted.min(1e3 * lt.psi()) + 4.0 * lt.psi());
    let traj = integrate(c, &spec, theta0, t_end, step(c, &spec)?)?;
    let (upper, lower) = (c.f64("fit_upper")?, c.f64("fit_lower")?);
    let mut notes = Vec::new();
    let measured = match windowed_phase_diff(&traj, 0, 1).and_then(|s| measure_sync_time(&s, upper, lower)) {
        Ok(fit) => fit.tau,
        Err(e) => {
            notes.push(format!("measured: {e}"));
            f64::NAN
        }
    };
    let linear = if with_linear {
        match linear_tau(&traj, &lt, theta0, upper, lower) {
            Ok(t) => t,
            Err(e) => {
                notes.push(format!("linear: {e}"));
                f64::NAN
            }
        }
    } else {
        f64::NAN
    };
    let note = (!notes.is_empty()).then(|| notes.join("; "));
    Ok(SweepPoint { delta_t, measured, linear, predicted, note })
}

/// Windowed fit of the linear prediction sampled on the trajectory grid.
fn linear_tau(traj: &Trajectory, lt: &LinearTheory, theta0: &[f64], upper: f64, lower: f64) -> pulsesync_core::Result<f64> {
    let mid = 0.5 * (theta0[0] + theta0[1]);
    let phi0 = 0.5 * (theta0[0] - theta0[1]);
    let values: Vec<f64> = (0..traj.len()).map(|k| lt.predict_phi(traj.time(k), phi0, mid)).collect::<pulsesync_core::Result<_>>()?;
    let h = traj.h();
    let last = values.len() - 1;
    let slopes: Vec<f64> = (0..=last)
        .map(|k| match k {
            0 => (values[1] - values[0]) / h,
            k if k == last => (values[last] - values[last - 1]) / h,
            k => (values[k + 1] - values[k - 1]) / (2.0 * h),
        })
        .collect();
    Ok(measure_sync_time(&windowed_average(traj, &values, &slopes)?, upper, lower)?.tau)
}

fn run_sweep(c: &Config, out: &mut RunOutput, with_linear: bool) -> Result<Vec<SweepPoint>, RunError> {
    let n = coupling(c)?.n();
    if n < 2 {
        return Err(ConfigError::Invalid { key: "n".into(), value: n.to_string(), expected: "at least 2".into() }.into());
    }
    let theta0 = initial_phases(c, n, out)?;
    let grid = sweep_grid(c)?;
    let points: Vec<SweepPoint> = grid
        .par_iter()
        .map(|&dt| sweep_point(c, dt, &theta0, with_linear))
        .collect::<Result<_, _>>()?;
    for p in &points {
        if let Some(note) = &p.note {
            out.note_text(&format!("fit_failed_delta_t_{}", fmt_f64(p.delta_t)), note.clone());
        }
    }
    Ok(points)
}

fn sweep_delay(c: &Config, dir: &Path, out: &mut RunOutput) -> Result<(), RunError> {
    let points = run_sweep(c, out, false)?;
    let path = dir.join("sweep_delay.csv");
    let mut w = CsvWriter::create(&path, &["delta_t", "tau_measured", "tau_predicted"])?;
    for p in &points {
        w.row(&[p.delta_t, p.measured, p.predicted])?;
    }
    out.files.push(w.finish()?);
    Ok(())
}

fn fig3(c: &Config, dir: &Path, out: &mut RunOutput) -> Result<(), RunError> {
    if coupling(c)?.n() != 2 {
        return Err(ConfigError::Invalid { key: "n".into(), value: c.raw("n").into(), expected: "2 for fig3".into() }.into());
    }
    let points = run_sweep(c, out, true)?;
    let path = dir.join("fig3.csv");
    let mut w = CsvWriter::create(&path, &["delta_t", "tau_measured_full", "tau_linear", "tau_formula"])?;
    for p in &points {
        w.row(&[p.delta_t, p.measured, p.linear, p.predicted])?;
    }
    out.files.push(w.finish()?);
    Ok(())
}

fn fig2_panel(c: &Config, delta_t: f64, theta0: &[f64], path: &Path, out: &mut RunOutput, label: &str) -> Result<PathBuf, RunError> {
    let spec = system(c, delta_t)?;
    let lt = theory(&spec)?;
    let mid = 0.5 * (theta0[0] + theta0[1]);
    let phi0 = 0.5 * (theta0[0] - theta0[1]);
    let t_end = match c.auto_f64("t_end")? {
        Some(t) => t,
        None => 3.0 * 10f64.ln() * lt.sync_time_two().context(|| "synchronization time".into())? + 4.0 * lt.psi(),
    };
    let h = c.auto_f64("h")?.unwrap_or_else(|| default_step(&spec).min(1e-3));
    let traj = integrate(c, &spec, theta0, t_end, h)?;
    out.note(&format!("{label}_t_end_used"), t_end);
    out.note(&format!("{label}_h_used"), traj.h());
    let mut w = CsvWriter::create(path, &["t", "phi_full", "phi_linear"])?;
    let every = c.usize("sample_every")?.max(1);
    let last = traj.len() - 1;
    for k in (0..traj.len()).filter(|k| k % every == 0 || *k == last) {
        let t = traj.time(k);
        let linear = lt.predict_phi(t, phi0, mid).context(|| format!("prediction at t={}", fmt_f64(t)))?;
        w.row(&[t, 0.5 * (traj.state(k)[0] - traj.state(k)[1]), linear])?;
    }
    w.finish()
}

fn fig2(c: &Config, dir: &Path, out: &mut RunOutput) -> Result<(), RunError> {
    let spec = system(c, c.f64("delta_t")?)?;
    if spec.n() != 2 {
        return Err(ConfigError::Invalid { key: "n".into(), value: c.raw("n").into(), expected: "2 for fig2".into() }.into());
    }
    let theta0 = initial_phases(c, 2, out)?;
    let main = fig2_panel(c, c.f64("delta_t")?, &theta0, &dir.join("fig2.csv"), out, "main")?;
    out.files.push(main);
    let inset = fig2_panel(c, c.f64("inset_delta_t")?, &theta0, &dir.join("fig2_inset.csv"), out, "inset")?;
    out.files.push(inset);
    Ok(())
}

fn mechanism(c: &Config, dir: &Path, out: &mut RunOutput) -> Result<(), RunError> {
    let spec = system(c, c.f64("delta_t")?)?;
    let theta0 = initial_phases(c, spec.n(), out)?;
    let t_end = match c.auto_f64("t_end")? {
        Some(t) => t,
        None => 5.0 * theory(&spec)?.psi(),
    };
    let traj = integrate(c, &spec, &theta0, t_end, step(c, &spec)?)?;
    let series = mechanism_series(&traj).context(|| "mechanism series".into())?;
    let n = spec.n();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("sigma_{i}")));
    header.extend((1..=n).map(|i| format!("rate_{i}")));
    let path = dir.join("mechanism.csv");
    let mut w = CsvWriter::create(&path, &header)?;
    for (k, &t) in series.times.iter().enumerate() {
        let mut row = vec![t];
        row.extend(series.sigma.iter().map(|s| s[k]));
        row.extend(series.rate.iter().map(|r| r[k]));
        w.row(&row)?;
    }
    out.files.push(w.finish()?);

    let path = dir.join("mechanism_peaks.csv");
    let mut w = CsvWriter::create(&path, &["oscillator", "t", "sigma", "fwhm", "rate_offset"])?;
    let opt = |x: Option<f64>| x.map_or(String::new(), fmt_f64);
    for (i, peaks) in series.peaks.iter().enumerate() {
        for p in peaks {
            w.fields(&[(i + 1).to_string(), fmt_f64(p.time), fmt_f64(p.height), opt(p.fwhm), opt(p.rate_offset)])?;
        }
    }
    out.files.push(w.finish()?);
    Ok(())
}
