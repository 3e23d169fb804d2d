use proptest::prelude::*;

use pulsesync_core::analysis::{measure_sync_time, strong_sync_check, windowed_average, windowed_phase_diff};
use pulsesync_core::dde::{integrate_rk4, HistoryPolicy, SystemSpec, Trajectory};
use pulsesync_core::lintheory::{LinearTheory, TheoryParams};
use pulsesync_core::network::{spectral_decompose, CouplingMatrix};
use pulsesync_core::pulse::PulseFunction;
use pulsesync_core::quad::{simpson_adaptive, SimpsonOptions};
use pulsesync_core::Complex64;

fn fig2_pulse() -> PulseFunction {
    PulseFunction::gaussian(1.01, 0.1).unwrap()
}

fn row_sum_matrix(n: usize, row_sum: f64, raw: &[f64]) -> CouplingMatrix {
    let mut w = raw[..n * n].to_vec();
    for i in 0..n {
        let s: f64 = w[i * n..(i + 1) * n].iter().sum();
        w[i * n + i] += row_sum - s;
    }
    CouplingMatrix::new(n, w).unwrap()
}

/// Trajectory sampled from closed-form phases `theta(t)[i]` and rates.
fn synthetic(n: usize, h: f64, nodes: usize, f: impl Fn(f64, usize) -> (f64, f64)) -> Trajectory {
    let spec = SystemSpec::new(fig2_pulse(), CouplingMatrix::new(n, vec![0.0; n * n]).unwrap(), 2.0, 0.0).unwrap();
    let mut states = Vec::with_capacity(n * nodes);
    let mut rates = Vec::with_capacity(n * nodes);
    for k in 0..nodes {
        for i in 0..n {
            let (y, m) = f(k as f64 * h, i);
            states.push(y);
            rates.push(m);
        }
    }
    Trajectory::from_samples(spec, HistoryPolicy::ConstantRate, h, states, rates).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_is_periodic(theta in -1e4f64..1e4, k in -1000i32..1000) {
        let p = fig2_pulse();
        let shifted = theta + k as f64 * 1.01;
        prop_assert!((p.sigma(theta) - p.sigma(shifted)).abs() < 1e-7);
    }

    #[test]
    fn sigma_integrates_to_one(xi in 0.5f64..2.0, frac in 0.02f64..0.2) {
        let p = PulseFunction::gaussian(xi, frac * xi).unwrap();
        let total = simpson_adaptive(|x| p.sigma(x), 0.0, xi, &SimpsonOptions::default()).unwrap();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn derivative_matches_finite_difference(theta in -3.0f64..3.0) {
        let p = fig2_pulse();
        let e = 1e-5;
        let fd = (p.sigma(theta + e) - p.sigma(theta - e)) / (2.0 * e);
        prop_assert!((fd - p.sigma_prime(theta)).abs() < 1e-6 * (1.0 + p.sigma_prime(theta).abs()));
    }

    #[test]
    fn eigenvectors_are_biorthonormal(n in 2usize..=32, row_sum in -2.0f64..2.0, raw in prop::collection::vec(-1.0f64..1.0, 1024)) {
        let j = row_sum_matrix(n, row_sum, &raw);
        let dec = spectral_decompose(&j).unwrap();
        prop_assert!((dec.eigenvalues[dec.perron_index] - Complex64::new(row_sum, 0.0)).norm() < 1e-9);
        for i in 0..n {
            let left = dec.left_vector(i);
            for k in 0..n {
                let right = dec.right_vector(k);
                let dot: Complex64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
                let target = if i == k { 1.0 } else { 0.0 };
                prop_assert!((dot - target).norm() < 1e-9, "({i},{k}) -> {dot}");
            }
        }
        let rebuilt = dec.reconstruct();
        for r in 0..n {
            for c in 0..n {
                prop_assert!((rebuilt[(r, c)] - Complex64::new(j.get(r, c), 0.0)).norm() < 1e-9 * j.norm().max(1.0));
            }
        }
    }

    #[test]
    fn spectrum_is_permutation_invariant(n in 2usize..=10, seed in prop::collection::vec(-1.0f64..1.0, 100), shift in 1usize..10) {
        let j = row_sum_matrix(n, 0.5, &seed);
        let perm: Vec<usize> = (0..n).map(|k| (k + shift) % n).collect();
        let a = spectral_decompose(&j).unwrap().eigenvalues;
        let b = spectral_decompose(&j.permuted(&perm).unwrap()).unwrap().eigenvalues;
        for x in &a {
            let closest = b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(closest < 1e-8);
        }
    }

    #[test]
    fn window_average_commutes_with_shift(c in -5.0f64..5.0) {
        let traj = synthetic(2, 0.01, 400, |t, i| (2.0 * t + 0.1 * i as f64, 2.0));
        let values: Vec<f64> = (0..traj.len()).map(|k| (3.0 * traj.time(k)).sin()).collect();
        let slopes: Vec<f64> = (0..traj.len()).map(|k| 3.0 * (3.0 * traj.time(k)).cos()).collect();
        let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
        let a = windowed_average(&traj, &values, &slopes).unwrap();
        let b = windowed_average(&traj, &shifted, &slopes).unwrap();
        prop_assert_eq!(a.times.len(), b.times.len());
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x + c - y).abs() < 1e-10);
        }
    }

    #[test]
    fn strong_sync_ignores_whole_cycles_and_labels(k in -3i32..3, lag in 0.0f64..0.5) {
        let xi = 1.01;
        let decaying = move |t: f64, i: usize| {
            let offset = if i == 1 { k as f64 * xi + 0.05 * (-t).exp() } else { 0.0 };
            (2.0 * t + offset + lag, 2.0 - if i == 1 { 0.05 * (-t).exp() } else { 0.0 })
        };
        let a = strong_sync_check(&synthetic(2, 0.01, 1200, decaying), 1e-3).unwrap();
        let swapped = strong_sync_check(&synthetic(2, 0.01, 1200, move |t, i| decaying(t, 1 - i)), 1e-3).unwrap();
        prop_assert!(a[0].synced && swapped[0].synced);
        prop_assert_eq!(a[0].mu, -(k as i64));
        prop_assert_eq!(swapped[0].mu, k as i64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn zero_lag_conserves_phase_difference(phi0 in 0.01f64..0.2, mid in 0.0f64..1.0) {
        let spec = SystemSpec::new(fig2_pulse(), CouplingMatrix::all_to_all(2, 1.0).unwrap(), 2.0, 0.0).unwrap();
        let traj = integrate_rk4(&spec, &[mid + phi0 / 2.0, mid - phi0 / 2.0], HistoryPolicy::ConstantRate, 4.0, 1e-3).unwrap();
        let series = windowed_phase_diff(&traj, 0, 1).unwrap();
        for v in &series.values {
            prop_assert!((v - series.values[0]).abs() < 1e-6 * phi0);
        }
    }

    #[test]
    fn synchronized_state_is_the_mean_mode(n in 3usize..6, jt in -0.4f64..1.0, lag in 0.0f64..0.05, raw in prop::collection::vec(-0.3f64..0.3, 36)) {
        let pulse = fig2_pulse();
        let start = 0.2;
        let run = |j: CouplingMatrix, lag: f64| {
            let m = j.n();
            let spec = SystemSpec::new(pulse, j, 2.0, lag).unwrap();
            integrate_rk4(&spec, &vec![start; m], HistoryPolicy::ConstantRate, 1.5, 2e-3).unwrap()
        };
        let network = run(row_sum_matrix(n, jt, &raw), lag);
        let pair = run(CouplingMatrix::all_to_all(2, jt).unwrap(), lag);
        let last = network.len() - 1;
        prop_assert_eq!(last, pair.len() - 1);
        for &theta in network.state(last) {
            prop_assert!((theta - pair.state(last)[0]).abs() < 1e-10, "{theta} vs {}", pair.state(last)[0]);
        }
        let free = run(row_sum_matrix(n, jt, &raw), 0.0);
        let theory = LinearTheory::new(TheoryParams::new(pulse, 2.0, jt, 0.0).unwrap()).unwrap();
        let end = free.len() - 1;
        let expected = theory.mean_phase_at(free.time(end), start).unwrap();
        prop_assert!((free.state(end)[0] - expected).abs() < 1e-7);
    }
}

#[test]
fn hermite_interpolation_is_fourth_order() {
    let error_at = |h: f64| {
        let nodes = (2.0 / h).round() as usize + 1;
        let traj = synthetic(2, h, nodes, |t, i| ((3.0 * t).sin() + i as f64, 3.0 * (3.0 * t).cos()));
        (0..500)
            .map(|k| {
                let t = 1.9 * (k as f64 + 0.5) / 500.0;
                (traj.history_eval(t, 0).unwrap().0 - (3.0 * t).sin()).abs()
            })
            .fold(0.0, f64::max)
    };
    let hs: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
    let pts: Vec<(f64, f64)> = hs.iter().map(|&h| (h.ln(), error_at(h).ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((3.7..=4.3).contains(&slope), "slope {slope}");
}

#[test]
fn rk4_converges_at_fourth_order_with_lag() {
    let spec = SystemSpec::new(fig2_pulse(), CouplingMatrix::all_to_all(2, 1.0).unwrap(), 2.0, 0.04).unwrap();
    let end = |h: f64| {
        let traj = integrate_rk4(&spec, &[0.53, 0.48], HistoryPolicy::ConstantRate, 1.0, h).unwrap();
        let s = traj.state(traj.len() - 1);
        s[0] - s[1]
    };
    let reference = end(0.04 / 256.0);
    let e1 = (end(0.01) - reference).abs();
    let e2 = (end(0.005) - reference).abs();
    assert!((e1 / e2).log2() >= 3.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn perron_projection_obeys_mean_mode_equation(n in 2usize..7, jt in 0.0f64..0.4, lag in 0.005f64..0.05, raw in prop::collection::vec(-0.1f64..0.1, 49), spread in prop::collection::vec(-0.05f64..0.05, 7)) {
        let pulse = fig2_pulse();
        let j = row_sum_matrix(n, jt, &raw);
        let dec = spectral_decompose(&j).unwrap();
        let left = dec.left_vector(dec.perron_index).to_vec();
        let spec = SystemSpec::new(pulse, j, 2.0, lag).unwrap();
        let theta0: Vec<f64> = (0..n).map(|i| 0.3 + spread[i]).collect();
        let traj = integrate_rk4(&spec, &theta0, HistoryPolicy::ConstantRate, 1.0, 2e-3).unwrap();
        let ones: Complex64 = left.iter().sum();
        for k in (0..traj.len()).step_by(7) {
            let t = traj.time(k);
            let lhs: Complex64 = left.iter().zip(traj.rate(k)).map(|(l, r)| l * r).sum();
            let delayed_sigma: Complex64 = (0..n)
                .map(|i| left[i] * pulse.sigma(traj.history_eval(t - lag, i).unwrap().0))
                .sum();
            let rhs = ones * 2.0 + delayed_sigma * jt;
            prop_assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1.0), "t={t}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn sync_time_is_insensitive_to_history_policy() {
    let spec = SystemSpec::new(fig2_pulse(), CouplingMatrix::all_to_all(2, 1.0).unwrap(), 2.0, 0.01).unwrap();
    let tau = |policy| {
        let traj = integrate_rk4(&spec, &[0.53, 0.48], policy, 5.0, 2.5e-3).unwrap();
        measure_sync_time(&windowed_phase_diff(&traj, 0, 1).unwrap(), 0.9, 0.01).unwrap().tau
    };
    let (a, b) = (tau(HistoryPolicy::ConstantRate), tau(HistoryPolicy::Frozen));
    assert!((a / b - 1.0).abs() < 1e-3, "{a} vs {b}");
}
