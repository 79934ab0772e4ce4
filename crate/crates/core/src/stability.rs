//! Sample Lyapunov exponents and path-stability verdicts.
//!
//! The real-clock ratio `log|X_t| / t` estimates the exponential rate; the
//! operational-clock ratio `log|X_t| / E_t` estimates the rate relative to
//! the time change. A finite-horizon limsup is read off as the maximum of
//! the ratio over a tail window, which is robust to late jumps. Verdicts
//! require the estimate to clear a certification margin below zero.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy::{JumpRegion, LevyMeasureSpec};
use crate::rng::{stream_rng, StreamRole};
use crate::sde::{ensemble_map, SdeSpec, SimOptions, TrajectoryBundle, NUMERIC_FLOOR};
use crate::subordinator::{median_of, simulate_clock, ClockSpec};

/// Which clock normalizes the log-magnitude ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockScale {
    Real,
    Operational,
}

pub const DEFAULT_TAIL_FRACTION: f64 = 0.2;

/// Ratio series `r(t)`; masked entries mark points where the ratio is
/// undefined (zero denominator or state at the numeric floor), they are
/// never fabricated.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSeries {
    clock: ClockScale,
    times: Vec<f64>,
    ratios: Vec<Option<f64>>,
    pub tail_fraction: f64,
}

impl LyapunovSeries {
    pub fn clock(&self) -> ClockScale {
        self.clock
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn ratios(&self) -> &[Option<f64>] {
        &self.ratios
    }
}

/// Ratio series of a trajectory on the chosen clock.
pub fn lyapunov_series(traj: &TrajectoryBundle, clock: ClockScale) -> Result<LyapunovSeries> {
    let times = traj.clock().real_grid().to_vec();
    let denominators: &[f64] = match clock {
        ClockScale::Real => &times,
        ClockScale::Operational => traj.clock().e_values(),
    };
    if clock == ClockScale::Operational {
        let e_end = *traj.clock().e_values().last().unwrap();
        if !(e_end > 0.0) {
            return Err(Error::Diagnostic(
                "operational clock never advanced; ratios undefined".into(),
            ));
        }
    }
    let ratios: Vec<Option<f64>> = traj
        .x_values()
        .iter()
        .zip(denominators)
        .map(|(&x, &d)| {
            if d <= 0.0 || x.abs() < NUMERIC_FLOOR {
                None
            } else {
                let r = x.abs().ln() / d;
                r.is_finite().then_some(r)
            }
        })
        .collect();
    if ratios.iter().all(Option::is_none) {
        return Err(Error::Diagnostic("all ratio entries are masked".into()));
    }
    Ok(LyapunovSeries {
        clock,
        times,
        ratios,
        tail_fraction: DEFAULT_TAIL_FRACTION,
    })
}

/// Finite-horizon limsup estimate: maximum unmasked ratio over the last
/// `tail_fraction` of the horizon. Needs at least 50 unmasked tail points.
pub fn estimate_limsup(series: &LyapunovSeries, tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::Domain(format!(
            "tail fraction {tail_fraction} outside (0, 1]"
        )));
    }
    let t_first = series.times[0];
    let t_last = *series.times.last().unwrap();
    let window_start = t_first + (1.0 - tail_fraction) * (t_last - t_first);
    let mut count = 0usize;
    let mut max = f64::NEG_INFINITY;
    for (t, r) in series.times.iter().zip(&series.ratios) {
        if *t >= window_start {
            if let Some(r) = r {
                count += 1;
                max = max.max(*r);
            }
        }
    }
    if count < 50 {
        return Err(Error::Diagnostic(format!(
            "only {count} unmasked tail points (need >= 50); extend the horizon or grid"
        )));
    }
    Ok(max)
}

/// Stability verdict from finite-horizon estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ExponentiallyPathStable,
    /// Stable at the operational rate `E_t`.
    PathStable,
    NotCertified,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::ExponentiallyPathStable => write!(f, "exponentially path stable"),
            Verdict::PathStable => write!(f, "path stable (rate E_t)"),
            Verdict::NotCertified => write!(f, "not certified"),
        }
    }
}

/// Threshold rule on the two clock estimates: the exponential verdict wins
/// when the real-clock estimate clears the margin, then the operational
/// one; lowering either estimate never weakens the verdict.
pub fn classify(real: Option<f64>, operational: Option<f64>, margin: f64) -> Verdict {
    if real.is_some_and(|r| r < -margin) {
        Verdict::ExponentiallyPathStable
    } else if operational.is_some_and(|r| r < -margin) {
        Verdict::PathStable
    } else {
        Verdict::NotCertified
    }
}

/// Per-path limsup estimates on both clocks; entries are `None` when the
/// estimator declined (all-masked or thin tails).
#[derive(Debug, Clone, PartialEq)]
pub struct PathEstimate {
    pub path_index: u64,
    pub real: Option<f64>,
    pub operational: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEstimate {
    pub per_path: Vec<PathEstimate>,
    pub median_real: Option<f64>,
    pub median_operational: Option<f64>,
    pub n_paths: usize,
    pub seed: u64,
    pub tail_fraction: f64,
}

/// Simulate an ensemble and aggregate the limsup estimates by the median,
/// which resists blow-up outliers; the reduction order is by path index.
pub fn ensemble_lyapunov(
    spec: &SdeSpec,
    t_end: f64,
    dt: f64,
    seed: u64,
    n_paths: usize,
    tail_fraction: f64,
) -> Result<EnsembleEstimate> {
    if n_paths == 0 {
        return Err(Error::Domain("need at least one path".into()));
    }
    let per_path_raw = ensemble_map(
        spec,
        t_end,
        dt,
        seed,
        n_paths,
        SimOptions::default(),
        |traj| {
            let real = lyapunov_series(traj, ClockScale::Real)
                .and_then(|s| estimate_limsup(&s, tail_fraction))
                .ok();
            let operational = lyapunov_series(traj, ClockScale::Operational)
                .and_then(|s| estimate_limsup(&s, tail_fraction))
                .ok();
            (traj.path_index(), real, operational)
        },
    )?;
    let per_path: Vec<PathEstimate> = per_path_raw
        .into_iter()
        .map(|(path_index, real, operational)| PathEstimate {
            path_index,
            real,
            operational,
        })
        .collect();
    let reals: Vec<f64> = per_path.iter().filter_map(|p| p.real).collect();
    let ops: Vec<f64> = per_path.iter().filter_map(|p| p.operational).collect();
    Ok(EnsembleEstimate {
        median_real: (!reals.is_empty()).then(|| median_of(reals)),
        median_operational: (!ops.is_empty()).then(|| median_of(ops)),
        per_path,
        n_paths,
        seed,
        tail_fraction,
    })
}

pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type TimeMarkFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

pub fn time_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> TimeFn {
    Arc::new(f)
}

pub fn time_mark_fn(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> TimeMarkFn {
    Arc::new(f)
}

#[derive(Debug, Clone, Copy)]
pub struct MartingaleCheckParams {
    pub lambda: f64,
    pub kappa: f64,
    pub t_end: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleCheck {
    pub empirical: f64,
    pub bound: f64,
    pub std_err: f64,
    pub exceed_count: usize,
    pub n_paths: usize,
    pub passes: bool,
}

/// Monte Carlo check of the exponential-martingale tail bound: simulate
///
/// ```text
/// sup_{0<=t<=T} { int g dB_E - (lambda/2) int g^2 dE
///                 + int int h dN~ - (1/lambda) int int (e^{lambda h} - 1 - lambda h) d nu dE }
/// ```
///
/// and compare the exceedance frequency over `kappa` against
/// `exp(-lambda kappa)`. Passes when the empirical probability stays within
/// three binomial standard errors of the bound.
pub fn martingale_inequality_check(
    g: &TimeFn,
    h: &TimeMarkFn,
    clock: &ClockSpec,
    measure: &LevyMeasureSpec,
    params: &MartingaleCheckParams,
) -> Result<MartingaleCheck> {
    let MartingaleCheckParams {
        lambda,
        kappa,
        t_end,
        dt,
        n_paths,
        seed,
    } = *params;
    if !(lambda > 0.0 && kappa > 0.0) {
        return Err(Error::Domain("lambda and kappa must be positive".into()));
    }
    if !(t_end > 0.0) || !(dt > 0.0) || dt > t_end / 100.0 {
        return Err(Error::Domain("need 0 < dt <= T/100".into()));
    }
    if n_paths == 0 {
        return Err(Error::Domain("need at least one path".into()));
    }
    let n_steps = (t_end / dt).round() as usize;
    let grid: Vec<f64> = (0..=n_steps).map(|i| i as f64 * dt).collect();
    // The nu integrals are deterministic in t; evaluate once per grid point
    // and share them across paths.
    let mut comp_h = Vec::with_capacity(n_steps);
    let mut comp_exp = Vec::with_capacity(n_steps);
    for &t in &grid[..n_steps] {
        comp_h.push(measure.integrate(JumpRegion::Small, &|y| h(t, y))?);
        comp_exp.push(measure.integrate(JumpRegion::Small, &|y| {
            let lh = lambda * h(t, y);
            lh.exp() - 1.0 - lh
        })?);
    }
    let exceed_flags: Vec<Result<bool>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|path_index| {
            let mut clock_rng = stream_rng(seed, path_index, StreamRole::Clock);
            let clock_path = simulate_clock(clock, &grid, &mut clock_rng)?;
            let mut rng = stream_rng(seed, path_index, StreamRole::Martingale);
            let e = clock_path.e_values();
            let mut m = 0.0f64;
            let mut sup = 0.0f64; // the functional starts at zero
            for j in 0..n_steps {
                let d_e = e[j + 1] - e[j];
                let z: f64 = rng.sample(StandardNormal);
                let d_b = d_e.sqrt() * z;
                let gt = g(grid[j]);
                m += gt * d_b - 0.5 * lambda * gt * gt * d_e;
                for y in measure.sample_marks(JumpRegion::Small, d_e, &mut rng)? {
                    m += h(grid[j], y);
                }
                m -= comp_h[j] * d_e;
                m -= comp_exp[j] * d_e / lambda;
                sup = sup.max(m);
            }
            Ok(sup > kappa)
        })
        .collect();
    let mut exceed_count = 0usize;
    for flag in exceed_flags {
        if flag? {
            exceed_count += 1;
        }
    }
    let empirical = exceed_count as f64 / n_paths as f64;
    let bound = (-lambda * kappa).exp();
    let std_err = (bound * (1.0 - bound) / n_paths as f64).sqrt();
    Ok(MartingaleCheck {
        empirical,
        bound,
        std_err,
        exceed_count,
        n_paths,
        passes: empirical <= bound + 3.0 * std_err,
    })
}
