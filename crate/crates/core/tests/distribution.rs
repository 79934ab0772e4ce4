//! Distribution-level checks of the clock machinery against closed forms:
//! Laplace transforms, self-similarity, and moment asymptotics.

use pathstab_core::math::gamma;
use pathstab_core::rng::{stream_rng, StreamRole};
use pathstab_core::subordinator::{
    check_slln, inverse_at_times, simulate_subordinator_path, ClockSpec, SubordinatorSpec,
};

/// Empirical mean and standard error of `exp(-s D(1))` from simulated paths.
fn laplace_at(
    spec: &SubordinatorSpec,
    s: f64,
    n_paths: usize,
    delta: f64,
    seed: u64,
) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for path in 0..n_paths as u64 {
        let mut rng = stream_rng(seed, path, StreamRole::Clock);
        let d = simulate_subordinator_path(spec, 1.0, delta, &mut rng).unwrap();
        let v = (-s * d.last().unwrap()).exp();
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / n_paths as f64;
    let var = (sumsq / n_paths as f64 - mean * mean).max(0.0);
    (mean, (var / n_paths as f64).sqrt())
}

#[test]
fn laplace_transform_matches_exponent_for_stable_and_mixture() {
    let specs = [
        SubordinatorSpec::stable(0.5).unwrap(),
        SubordinatorSpec::stable(0.8).unwrap(),
        SubordinatorSpec::mixture(&[(0.5, 0.3), (0.5, 0.7)]).unwrap(),
    ];
    for (i, spec) in specs.iter().enumerate() {
        for &s in &[0.5, 1.0, 2.0] {
            let (mean, se) = laplace_at(spec, s, 30_000, 1.0 / 32.0, 301 + i as u64);
            let target = (-spec.laplace_exponent(s)).exp();
            assert!(
                (mean - target).abs() < 3.0 * se,
                "spec {i}, s = {s}: {mean} vs {target} (3se = {})",
                3.0 * se
            );
        }
    }
}

/// Two-sample Kolmogorov-Smirnov distance.
fn ks_distance(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let mut d = 0.0f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < n && j < m {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

#[test]
fn inverse_clock_is_self_similar_in_law() {
    // E_t has the law of t^alpha E_1; rescaled samples at t = 1 and t = 16
    // must agree within the 1% KS critical distance.
    let alpha = 0.8;
    let spec = SubordinatorSpec::stable(alpha).unwrap();
    let n = 1200;
    let delta = 1.0 / 256.0;
    let mut at_1 = Vec::with_capacity(n);
    let mut at_16 = Vec::with_capacity(n);
    for path in 0..n as u64 {
        let mut rng = stream_rng(7, path, StreamRole::Clock);
        at_1.push(inverse_at_times(&spec, &[1.0], delta, &mut rng).unwrap()[0]);
        let mut rng = stream_rng(8, path, StreamRole::Clock);
        at_16.push(
            inverse_at_times(&spec, &[16.0], delta, &mut rng).unwrap()[0] / 16f64.powf(alpha),
        );
    }
    let d = ks_distance(at_1, at_16);
    let critical = 1.628 * ((n + n) as f64 / (n * n) as f64).sqrt();
    assert!(
        d < critical,
        "KS distance {d} exceeds the 1% critical value {critical}"
    );
}

#[test]
fn slln_mean_matches_exact_moment() {
    // E[E_t]/t = t^{alpha-1} / Gamma(1 + alpha); Monte Carlo within 5%.
    let alpha = 0.8;
    let clock = ClockSpec::inverse_stable(alpha, 0.05).unwrap();
    let grid = [100.0, 1000.0, 10_000.0];
    let report = check_slln(&clock, &grid, 512, 31).unwrap();
    for (t, mean) in grid.iter().zip(&report.means) {
        let exact = t.powf(alpha - 1.0) / gamma(1.0 + alpha);
        assert!(
            (mean - exact).abs() / exact < 0.05,
            "t = {t}: mean {mean} vs exact {exact}"
        );
    }
    assert!(report.medians.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn mixture_moment_slope_follows_smallest_index() {
    // log E[E_t] against log t regresses to the smallest mixture index.
    let spec = SubordinatorSpec::mixture(&[(0.5, 0.3), (0.5, 0.7)]).unwrap();
    let times = [100.0, 1000.0, 10_000.0];
    let n_paths = 400;
    let mut means = [0.0f64; 3];
    for path in 0..n_paths as u64 {
        let mut rng = stream_rng(17, path, StreamRole::Clock);
        let es = inverse_at_times(&spec, &times, 0.01, &mut rng).unwrap();
        for (m, e) in means.iter_mut().zip(es) {
            *m += e / n_paths as f64;
        }
    }
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xbar) * (x - xbar)).sum::<f64>();
    assert!(
        (slope - 0.3).abs() < 0.05,
        "regression slope {slope} should be near the smallest index 0.3"
    );
}
