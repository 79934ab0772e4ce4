//! Strictly increasing subordinators and their inverse clocks.
//!
//! A subordinator `D` with Laplace transform `E[e^{-sD(t)}] = e^{-t psi(s)}`
//! is simulated on a uniform operational grid `k * delta`. Supported Laplace
//! exponents are the one-sided stable `psi(s) = s^alpha` and finite power
//! mixtures `psi(s) = sum_i c_i s^{beta_i}` with `sum c_i = 1`, realized as a
//! superposition of independent scaled stable components (exponents add).
//!
//! The operational clock is the right-continuous inverse
//! `E_t = inf{ tau > 0 : D(tau) > t }`, discretized as
//! `E_t = delta * min{ k : D(k delta) > t }`, which overshoots the exact
//! inverse by at most one grid cell. `E` is continuous and nondecreasing,
//! with flat pieces wherever `D` jumps.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math;
use crate::rng::{stream_rng, StreamRole};

/// Law of a subordinator: finite mixture of one-sided stable components,
/// each a `(weight, index)` pair, kept sorted ascending by index.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorSpec {
    components: Vec<(f64, f64)>,
}

impl SubordinatorSpec {
    /// Single stable subordinator with `psi(s) = s^alpha`.
    pub fn stable(alpha: f64) -> Result<Self> {
        Self::mixture(&[(1.0, alpha)])
    }

    /// Finite mixture `psi(s) = sum c_i s^{beta_i}`; weights must be positive
    /// and sum to one, indices must lie in (0, 1).
    pub fn mixture(components: &[(f64, f64)]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidSpec(
                "mixture needs at least one component".into(),
            ));
        }
        for &(c, beta) in components {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::InvalidSpec(format!("weight {c} must be positive")));
            }
            if !(beta > 0.0 && beta < 1.0) {
                return Err(Error::InvalidSpec(format!("index {beta} outside (0, 1)")));
            }
        }
        let total: f64 = components.iter().map(|&(c, _)| c).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let mut components = components.to_vec();
        components.sort_by(|a, b| a.1.total_cmp(&b.1));
        for pair in components.windows(2) {
            if pair[0].1 == pair[1].1 {
                return Err(Error::InvalidSpec(format!("duplicate index {}", pair[0].1)));
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    /// Smallest index `beta_1`; it governs the `t^{beta_1}` moment growth.
    pub fn smallest_index(&self) -> f64 {
        self.components[0].1
    }

    pub fn is_single_stable(&self) -> bool {
        self.components.len() == 1
    }

    /// Laplace exponent `psi(s)`.
    pub fn laplace_exponent(&self, s: f64) -> f64 {
        self.components
            .iter()
            .map(|&(c, beta)| c * s.powf(beta))
            .sum()
    }
}

/// Time change driving an SDE: a genuine inverse subordinator, or the
/// identity clock `E_t = t` used as a degenerate test hook.
#[derive(Debug, Clone, PartialEq)]
pub enum ClockSpec {
    Inverse {
        spec: SubordinatorSpec,
        op_step: f64,
    },
    Identity,
}

impl ClockSpec {
    pub fn inverse_stable(alpha: f64, op_step: f64) -> Result<Self> {
        Ok(ClockSpec::Inverse {
            spec: SubordinatorSpec::stable(alpha)?,
            op_step,
        })
    }
}

/// Default operational step for a given horizon: fine enough that the
/// inversion bias stays below plotting resolution.
pub fn default_op_step(horizon_op: f64) -> f64 {
    (horizon_op / 1e4).min(1e-3)
}

/// A discretized clock: the subordinator on its operational grid together
/// with the inverse sampled on a real-time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockPath {
    op_step: f64,
    d_values: Vec<f64>,
    real_grid: Vec<f64>,
    e_values: Vec<f64>,
}

impl ClockPath {
    /// Assemble a path from parts, enforcing the monotonicity invariants.
    pub fn new(
        op_step: f64,
        d_values: Vec<f64>,
        real_grid: Vec<f64>,
        e_values: Vec<f64>,
    ) -> Result<Self> {
        if !(op_step > 0.0) {
            return Err(Error::InvalidSpec("op_step must be positive".into()));
        }
        if real_grid.len() != e_values.len() {
            return Err(Error::InvalidSpec(
                "real grid and E values differ in length".into(),
            ));
        }
        if d_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec(
                "D path must be strictly increasing".into(),
            ));
        }
        if real_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec(
                "real grid must be strictly increasing".into(),
            ));
        }
        if e_values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidSpec("E values must be nondecreasing".into()));
        }
        Ok(Self {
            op_step,
            d_values,
            real_grid,
            e_values,
        })
    }

    /// Identity clock `E_t = t` on the given grid.
    pub fn identity(real_grid: Vec<f64>) -> Result<Self> {
        let step = if real_grid.len() > 1 {
            (real_grid[real_grid.len() - 1] - real_grid[0]) / (real_grid.len() - 1) as f64
        } else {
            1.0
        };
        let e_values = real_grid.clone();
        let d_values = real_grid.clone();
        Self::new(step.max(f64::MIN_POSITIVE), d_values, real_grid, e_values)
    }

    pub fn op_step(&self) -> f64 {
        self.op_step
    }

    /// `D(k delta)` for `k = 0..`.
    pub fn d_values(&self) -> &[f64] {
        &self.d_values
    }

    pub fn real_grid(&self) -> &[f64] {
        &self.real_grid
    }

    /// `E_t` aligned with the real grid.
    pub fn e_values(&self) -> &[f64] {
        &self.e_values
    }

    /// Grid-cell index of `E` at real grid point `j` (E values are integer
    /// multiples of the operational step).
    pub fn e_cell_index(&self, j: usize) -> usize {
        (self.e_values[j] / self.op_step).round() as usize
    }
}

#[inline]
fn clamp_open01(u: f64) -> f64 {
    u.clamp(1e-15, 1.0 - 1e-15)
}

/// Standard totally skewed positive stable variate with
/// `E[e^{-sS}] = e^{-s^alpha}`, by the trigonometric transform of a
/// uniform and an exponential draw.
fn standard_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    loop {
        let u = clamp_open01(rng.random::<f64>()) * PI;
        let w: f64 = rng.sample(Exp1);
        let w = w.max(1e-300);
        let s1 = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
        let s2 = (((1.0 - alpha) * u).sin() / w).powf((1.0 - alpha) / alpha);
        let draw = s1 * s2;
        if draw.is_finite() && draw > 0.0 {
            return draw;
        }
    }
}

/// One increment `D(dt)` of a stable subordinator with Laplace exponent
/// `(scale * s)^alpha`; strictly positive.
pub fn sample_stable_increment<R: Rng + ?Sized>(
    alpha: f64,
    scale: f64,
    dt: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "stable index {alpha} outside (0, 1)"
        )));
    }
    if !(scale > 0.0) {
        return Err(Error::Domain(format!("scale {scale} must be positive")));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt {dt} must be positive")));
    }
    Ok(scale * dt.powf(1.0 / alpha) * standard_positive_stable(alpha, rng))
}

/// Per-step increment sampler for a mixture; component `i` contributes an
/// independent stable increment with scale `(c_i * delta)^{1/beta_i}`.
struct IncrementSampler {
    parts: Vec<(f64, f64)>, // (beta_i, per-step scale)
}

impl IncrementSampler {
    fn new(spec: &SubordinatorSpec, delta: f64) -> Self {
        let parts = spec
            .components()
            .iter()
            .map(|&(c, beta)| (beta, (c * delta).powf(1.0 / beta)))
            .collect();
        Self { parts }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.parts
            .iter()
            .map(|&(beta, scale)| scale * standard_positive_stable(beta, rng))
            .sum()
    }
}

/// Advance the running subordinator level. Small-index increments can be so
/// tiny that `d + inc` rounds back to `d`; the true process is strictly
/// increasing, so bump by one ulp in that case.
#[inline]
fn advance(d: f64, inc: f64) -> f64 {
    let next = d + inc;
    if next > d {
        next
    } else {
        d.next_up()
    }
}

/// Sample `D` on the grid `0, delta, ..., ceil(horizon/delta) * delta`.
/// The returned path starts at exactly 0 and is strictly increasing.
pub fn simulate_subordinator_path<R: Rng + ?Sized>(
    spec: &SubordinatorSpec,
    horizon_op: f64,
    delta: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(horizon_op > 0.0) || !(delta > 0.0) {
        return Err(Error::Domain("horizon and step must be positive".into()));
    }
    if delta > horizon_op / 10.0 {
        return Err(Error::Domain(format!(
            "operational step {delta} too coarse for horizon {horizon_op} (need <= horizon/10)"
        )));
    }
    let steps = (horizon_op / delta).ceil() as usize;
    let sampler = IncrementSampler::new(spec, delta);
    let mut path = Vec::with_capacity(steps + 1);
    let mut d = 0.0;
    path.push(d);
    for _ in 0..steps {
        d = advance(d, sampler.draw(rng));
        path.push(d);
    }
    Ok(path)
}

/// Invert a stored subordinator path on a real-time grid:
/// `E_t = delta * min{ k : D(k delta) > t }`.
///
/// Fails with a horizon error if the path does not reach past the last grid
/// time; both grids are consumed with a single moving cursor.
pub fn invert_subordinator(d_path: &[f64], delta: f64, real_grid: &[f64]) -> Result<ClockPath> {
    if d_path.len() < 2 || d_path[0] != 0.0 {
        return Err(Error::Domain(
            "subordinator path must start at 0 with >= 2 points".into(),
        ));
    }
    if d_path.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "subordinator path must be strictly increasing".into(),
        ));
    }
    if real_grid.is_empty() || real_grid[0] < 0.0 {
        return Err(Error::Domain(
            "real grid must be nonempty and nonnegative".into(),
        ));
    }
    let d_max = *d_path.last().unwrap();
    let mut e_values = Vec::with_capacity(real_grid.len());
    let mut k = 0usize;
    for &t in real_grid {
        while k < d_path.len() && d_path[k] <= t {
            k += 1;
        }
        if k == d_path.len() {
            return Err(Error::Horizon {
                needed: t,
                available: d_max,
            });
        }
        e_values.push(k as f64 * delta);
    }
    ClockPath::new(delta, d_path.to_vec(), real_grid.to_vec(), e_values)
}

/// Ceiling on operational steps before giving up on a horizon: generous
/// multiple of the expected `E_t` so only pathological requests fail.
fn op_step_cap(spec: &SubordinatorSpec, t_max: f64, delta: f64) -> usize {
    let beta1 = spec.smallest_index();
    let expected_e = t_max.max(1.0).powf(beta1) / math::gamma(1.0 + beta1);
    ((64.0 * expected_e / delta).ceil() as usize).saturating_add(4096)
}

/// Build a clock over `real_grid`, extending the subordinator in chunks
/// until it covers the horizon (up to a generous default cap).
pub fn simulate_clock<R: Rng + ?Sized>(
    clock: &ClockSpec,
    real_grid: &[f64],
    rng: &mut R,
) -> Result<ClockPath> {
    simulate_clock_with_cap(clock, real_grid, rng, None)
}

/// As [`simulate_clock`], with an explicit ceiling on operational steps.
pub fn simulate_clock_with_cap<R: Rng + ?Sized>(
    clock: &ClockSpec,
    real_grid: &[f64],
    rng: &mut R,
    max_steps: Option<usize>,
) -> Result<ClockPath> {
    if real_grid.is_empty() {
        return Err(Error::Domain("real grid must be nonempty".into()));
    }
    if real_grid.windows(2).any(|w| w[1] <= w[0]) || real_grid[0] < 0.0 {
        return Err(Error::Domain(
            "real grid must be strictly increasing and nonnegative".into(),
        ));
    }
    match clock {
        ClockSpec::Identity => ClockPath::identity(real_grid.to_vec()),
        ClockSpec::Inverse { spec, op_step } => {
            let delta = *op_step;
            if !(delta > 0.0) {
                return Err(Error::Domain("op_step must be positive".into()));
            }
            let t_max = *real_grid.last().unwrap();
            let cap = max_steps.unwrap_or_else(|| op_step_cap(spec, t_max, delta));
            let sampler = IncrementSampler::new(spec, delta);
            let mut d_values = vec![0.0];
            let mut e_values = Vec::with_capacity(real_grid.len());
            let mut d = 0.0;
            let mut k = 0usize;
            let mut j = 0usize;
            while j < real_grid.len() {
                if k >= cap {
                    return Err(Error::Horizon {
                        needed: real_grid[j],
                        available: d,
                    });
                }
                k += 1;
                d = advance(d, sampler.draw(rng));
                d_values.push(d);
                while j < real_grid.len() && d > real_grid[j] {
                    e_values.push(k as f64 * delta);
                    j += 1;
                }
            }
            ClockPath::new(delta, d_values, real_grid.to_vec(), e_values)
        }
    }
}

/// Sample `E` at the given sorted times without storing the subordinator
/// path; used by the moment and ratio statistics.
pub fn inverse_at_times<R: Rng + ?Sized>(
    spec: &SubordinatorSpec,
    times: &[f64],
    delta: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) || times[0] < 0.0 {
        return Err(Error::Domain(
            "times must be nonempty, increasing, nonnegative".into(),
        ));
    }
    if !(delta > 0.0) {
        return Err(Error::Domain("op_step must be positive".into()));
    }
    let cap = op_step_cap(spec, *times.last().unwrap(), delta);
    let sampler = IncrementSampler::new(spec, delta);
    let mut out = Vec::with_capacity(times.len());
    let mut d = 0.0;
    let mut k = 0usize;
    let mut j = 0usize;
    while j < times.len() {
        if k >= cap {
            return Err(Error::Horizon {
                needed: times[j],
                available: d,
            });
        }
        k += 1;
        d = advance(d, sampler.draw(rng));
        while j < times.len() && d > times[j] {
            out.push(k as f64 * delta);
            j += 1;
        }
    }
    Ok(out)
}

/// Moment of the inverse clock: exact for a single stable index, a power-law
/// exponent prediction for mixtures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentInfo {
    /// `E[E_t^n] = n! t^{n alpha} / Gamma(1 + n alpha)`.
    Exact(f64),
    /// `E[E_t^n]` grows like `t^exponent` for large `t`.
    PowerLaw { exponent: f64 },
}

pub fn inverse_moment(spec: &SubordinatorSpec, n: u32, t: f64) -> Result<MomentInfo> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    if n == 0 {
        return Ok(MomentInfo::Exact(1.0));
    }
    if spec.is_single_stable() {
        let alpha = spec.components()[0].1;
        let na = n as f64 * alpha;
        Ok(MomentInfo::Exact(
            math::factorial(n) * t.powf(na) / math::gamma(1.0 + na),
        ))
    } else {
        Ok(MomentInfo::PowerLaw {
            exponent: n as f64 * spec.smallest_index(),
        })
    }
}

/// Ratio statistics of `E_t / t` over an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct SllnReport {
    pub t_grid: Vec<f64>,
    pub means: Vec<f64>,
    pub medians: Vec<f64>,
    /// True iff means and medians decrease strictly along the grid and the
    /// final mean is below a fifth of the first.
    pub decay_flag: bool,
    pub n_paths: usize,
    pub seed: u64,
}

pub fn median_of(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Monte Carlo check that `E_t / t` decays: per-time mean and median of the
/// ratio over independently seeded paths.
pub fn check_slln(
    clock: &ClockSpec,
    t_grid: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<SllnReport> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("t grid must be increasing".into()));
    }
    if !(t_grid[0] > 0.0) {
        return Err(Error::Domain("t grid must be strictly positive".into()));
    }
    if *t_grid.last().unwrap() < 1e3 {
        return Err(Error::Domain("t grid must reach at least 1e3".into()));
    }
    if n_paths == 0 {
        return Err(Error::Domain("need at least one path".into()));
    }
    let rows: Vec<Result<Vec<f64>>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|path_index| match clock {
            ClockSpec::Identity => Ok(t_grid.to_vec()),
            ClockSpec::Inverse { spec, op_step } => {
                let mut rng = stream_rng(seed, path_index, StreamRole::Clock);
                inverse_at_times(spec, t_grid, *op_step, &mut rng)
            }
        })
        .collect();
    let mut per_time: Vec<Vec<f64>> = vec![Vec::with_capacity(n_paths); t_grid.len()];
    for row in rows {
        let row = row?;
        for (i, e) in row.into_iter().enumerate() {
            debug_assert!(e >= 0.0);
            per_time[i].push(e / t_grid[i]);
        }
    }
    let means: Vec<f64> = per_time
        .iter()
        .map(|v| v.iter().sum::<f64>() / v.len() as f64)
        .collect();
    let medians: Vec<f64> = per_time.into_iter().map(median_of).collect();
    let strictly_dec = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let decay_flag =
        strictly_dec(&means) && strictly_dec(&medians) && *means.last().unwrap() < means[0] / 5.0;
    Ok(SllnReport {
        t_grid: t_grid.to_vec(),
        means,
        medians,
        decay_flag,
        n_paths,
        seed,
    })
}
