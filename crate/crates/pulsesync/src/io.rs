//! CSV and text formats.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use pulsesync_core::analysis::SyncReport;
use pulsesync_core::dde::Trajectory;
use pulsesync_core::dirac::EventTrajectory;

use crate::error::{Context, RunError};
use crate::numfmt::fmt_f64;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

/// Comma-separated writer with a header line and LF line endings.
pub struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvWriter {
    pub fn create<S: AsRef<str>>(path: &Path, header: &[S]) -> Result<Self, RunError> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut w = Self { path: path.to_path_buf(), out: BufWriter::new(file) };
        let header: Vec<&str> = header.iter().map(AsRef::as_ref).collect();
        w.line(&header.join(","))?;
        Ok(w)
    }

    fn line(&mut self, text: &str) -> Result<(), RunError> {
        self.out.write_all(text.as_bytes()).map_err(io_err(&self.path))?;
        self.out.write_all(b"\n").map_err(io_err(&self.path))
    }

    pub fn row(&mut self, values: &[f64]) -> Result<(), RunError> {
        let text: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        self.line(&text.join(","))
    }

    pub fn fields(&mut self, fields: &[String]) -> Result<(), RunError> {
        self.line(&fields.join(","))
    }

    pub fn finish(mut self) -> Result<PathBuf, RunError> {
        self.out.flush().map_err(io_err(&self.path))?;
        Ok(self.path)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<PathBuf, RunError> {
    std::fs::write(path, text).map_err(io_err(path))?;
    Ok(path.to_path_buf())
}

fn trajectory_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("theta_{i}")));
    h.extend((1..=n).map(|i| format!("dtheta_{i}")));
    h
}

/// `t,theta_1..theta_n,dtheta_1..dtheta_n` on every `every`-th node; the last
/// node is always written.
pub fn write_trajectory(path: &Path, traj: &Trajectory, every: usize) -> Result<PathBuf, RunError> {
    let n = traj.n();
    let mut w = CsvWriter::create(path, &trajectory_header(n))?;
    let every = every.max(1);
    let last = traj.len() - 1;
    let mut row = Vec::with_capacity(2 * n + 1);
    for k in (0..traj.len()).filter(|k| k % every == 0 || *k == last) {
        row.clear();
        row.push(traj.time(k));
        row.extend_from_slice(traj.state(k));
        row.extend_from_slice(traj.rate(k));
        w.row(&row)?;
    }
    w.finish()
}

/// Event-driven phases sampled every `dt`, with the free rate as derivative.
pub fn write_event_samples(path: &Path, traj: &EventTrajectory, dt: f64) -> Result<PathBuf, RunError> {
    let n = traj.n();
    let mut w = CsvWriter::create(path, &trajectory_header(n))?;
    let steps = (traj.t_end / dt).floor() as usize;
    for k in 0..=steps {
        let t = k as f64 * dt;
        let mut row = vec![t];
        row.extend(traj.phases_at(t).context(|| format!("sampling at t={t}"))?);
        row.extend(std::iter::repeat_n(traj.params.omega, n));
        w.row(&row)?;
    }
    w.finish()
}

/// `t,emitter,theta_emitter_after,receiver_jumps` with jumps written as
/// `receiver:before:after` joined by `;`. Oscillators are numbered from 1.
pub fn write_events(path: &Path, traj: &EventTrajectory) -> Result<PathBuf, RunError> {
    let mut w = CsvWriter::create(path, &["t", "emitter", "theta_emitter_after", "receiver_jumps"])?;
    for e in &traj.events {
        let jumps: Vec<String> = e
            .jumps
            .iter()
            .map(|j| format!("{}:{}:{}", j.receiver + 1, fmt_f64(j.before), fmt_f64(j.after)))
            .collect();
        w.fields(&[fmt_f64(e.time), (e.emitter + 1).to_string(), fmt_f64(e.emitter_phase), jumps.join(";")])?;
    }
    w.finish()
}

/// One `key = value` block per pair, separated by blank lines.
pub fn sync_report_text(reports: &[SyncReport]) -> String {
    let mut out = String::new();
    for (k, r) in reports.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        out.push_str(&format!("pair = {},{}\n", r.pair.0 + 1, r.pair.1 + 1));
        out.push_str(&format!("mu = {}\n", r.mu));
        out.push_str(&format!("residual = {}\n", fmt_f64(r.residual)));
        out.push_str(&format!("synced = {}\n", r.synced));
        let tau = r.tau_measured.map_or("none".to_string(), fmt_f64);
        out.push_str(&format!("tau_measured = {tau}\n"));
    }
    out
}

/// Square matrix from `n` lines of `n` comma-separated numbers. Blank lines
/// and `#` comments are skipped.
pub fn read_matrix_csv(path: &Path) -> Result<(usize, Vec<f64>), RunError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let fail = |line: usize, message: String| RunError::Format { path: path.to_path_buf(), line, message };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| fail(no + 1, format!("not a row of numbers: `{line}`")))?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(fail(0, "empty matrix".into()));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != n) {
        return Err(fail(bad + 1, format!("row {} has {} entries, expected {n}", bad + 1, rows[bad].len())));
    }
    Ok((n, rows.concat()))
}
