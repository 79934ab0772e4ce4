//! Explicit Euler integration of time-changed SDEs on a uniform real grid.
//!
//! Per step the state advances by
//!
//! ```text
//! x' = x + f dt + k dE + g dB - (integral of h d nu) dE
//!        + sum of small-jump marks + sum of large-jump marks
//! ```
//!
//! with every coefficient evaluated at the pre-step state (the left-limit
//! convention), `dB ~ N(0, dE)` conditionally on the clock, and jumps
//! applied after the continuous increments, each at the running pre-jump
//! state in mark-sampled order. The compensator uses the exact measure
//! integral, so the small-jump term is centered in expectation.
//!
//! For SDEs without a `dt` drift the module also provides the dual route:
//! integrate the corresponding classical SDE on the operational grid and
//! compose with `E_t`. Refinement studies share one underlying noise across
//! grid levels by generating Brownian increments and Poisson marks per
//! operational cell.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy::{JumpRegion, LevyMeasureSpec};
use crate::rng::{stream_rng, StreamRole};
use crate::subordinator::{simulate_clock, ClockPath, ClockSpec, SubordinatorSpec};

/// Coefficient callable `(t, e, x) -> value`.
pub type Coeff = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
/// Linear jump scaling `y -> h(y)`; the jump applied to the state is `h(y) x`.
pub type MarkFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// General additive jump `(t, e, x, y) -> h`.
pub type StateJump = Arc<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;

pub fn coeff(f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Coeff {
    Arc::new(f)
}

pub fn mark_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> MarkFn {
    Arc::new(f)
}

pub fn state_jump(f: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static) -> StateJump {
    Arc::new(f)
}

/// Jump structure of the SDE. Large jumps require the linear form.
#[derive(Clone)]
pub enum JumpForm {
    /// No jump terms at all.
    None,
    /// Multiplicative jumps `h(y) x` below the cutoff and `H(y) x` above it.
    Linear {
        small: MarkFn,
        large: Option<MarkFn>,
    },
    /// General additive small jumps `h(t, e, x, y)`; no large jumps.
    General { small: StateJump },
}

impl JumpForm {
    pub fn has_small(&self) -> bool {
        !matches!(self, JumpForm::None)
    }

    pub fn has_large(&self) -> bool {
        matches!(self, JumpForm::Linear { large: Some(_), .. })
    }
}

/// Numeric floor on `|X|`; crossings are logged as events, never clamped.
pub const NUMERIC_FLOOR: f64 = 1e-300;

/// Full description of a time-changed SDE.
#[derive(Clone)]
pub struct SdeSpec {
    drift: Option<Coeff>,
    op_drift: Coeff,
    diffusion: Coeff,
    jumps: JumpForm,
    x0: f64,
    t0: f64,
    clock: ClockSpec,
    noise: LevyMeasureSpec,
    /// Cached `integral of h d nu` over the small region for linear jumps.
    linear_small_integral: f64,
}

impl SdeSpec {
    pub fn builder(x0: f64, clock: ClockSpec, noise: LevyMeasureSpec) -> SdeSpecBuilder {
        SdeSpecBuilder {
            drift: None,
            op_drift: coeff(|_, _, _| 0.0),
            diffusion: coeff(|_, _, _| 0.0),
            jumps: JumpForm::None,
            x0,
            t0: 0.0,
            clock,
            noise,
        }
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn clock(&self) -> &ClockSpec {
        &self.clock
    }

    pub fn noise(&self) -> &LevyMeasureSpec {
        &self.noise
    }

    pub fn jumps(&self) -> &JumpForm {
        &self.jumps
    }

    /// Whether the SDE carries a real-clock (`dt`) drift.
    pub fn has_drift(&self) -> bool {
        self.drift.is_some()
    }

    pub fn eval_drift(&self, t: f64, e: f64, x: f64) -> f64 {
        self.drift.as_ref().map_or(0.0, |f| f(t, e, x))
    }

    pub fn eval_op_drift(&self, t: f64, e: f64, x: f64) -> f64 {
        (self.op_drift)(t, e, x)
    }

    pub fn eval_diffusion(&self, t: f64, e: f64, x: f64) -> f64 {
        (self.diffusion)(t, e, x)
    }

    /// Jump increment for one small mark, applied at state `x`.
    pub fn small_jump(&self, t: f64, e: f64, x: f64, y: f64) -> f64 {
        match &self.jumps {
            JumpForm::None => 0.0,
            JumpForm::Linear { small, .. } => small(y) * x,
            JumpForm::General { small } => small(t, e, x, y),
        }
    }

    /// Jump increment for one large mark, applied at state `x`.
    pub fn large_jump(&self, x: f64, y: f64) -> f64 {
        match &self.jumps {
            JumpForm::Linear { large: Some(h), .. } => h(y) * x,
            _ => 0.0,
        }
    }

    /// Small-jump compensator integrand `integral of h d nu` at the given
    /// point; exact for the linear form, quadrature for the general one.
    pub fn compensator(&self, t: f64, e: f64, x: f64) -> Result<f64> {
        match &self.jumps {
            JumpForm::None => Ok(0.0),
            JumpForm::Linear { .. } => Ok(self.linear_small_integral * x),
            JumpForm::General { small } => self
                .noise
                .integrate(JumpRegion::Small, &|y| small(t, e, x, y)),
        }
    }
}

pub struct SdeSpecBuilder {
    drift: Option<Coeff>,
    op_drift: Coeff,
    diffusion: Coeff,
    jumps: JumpForm,
    x0: f64,
    t0: f64,
    clock: ClockSpec,
    noise: LevyMeasureSpec,
}

impl SdeSpecBuilder {
    /// Real-clock drift `f(t, e, x)`; leaving it unset means `f = 0`
    /// structurally (required by the duality route).
    pub fn drift(mut self, f: Coeff) -> Self {
        self.drift = Some(f);
        self
    }

    /// Operational drift `k(t, e, x)`.
    pub fn op_drift(mut self, k: Coeff) -> Self {
        self.op_drift = k;
        self
    }

    /// Diffusion `g(t, e, x)` against `dB_{E_t}`.
    pub fn diffusion(mut self, g: Coeff) -> Self {
        self.diffusion = g;
        self
    }

    pub fn jumps(mut self, jumps: JumpForm) -> Self {
        self.jumps = jumps;
        self
    }

    pub fn linear_jumps(mut self, small: MarkFn, large: Option<MarkFn>) -> Self {
        self.jumps = JumpForm::Linear { small, large };
        self
    }

    pub fn general_jumps(mut self, small: StateJump) -> Self {
        self.jumps = JumpForm::General { small };
        self
    }

    pub fn t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn build(self) -> Result<SdeSpec> {
        if self.x0 == 0.0 || !self.x0.is_finite() {
            return Err(Error::InvalidSpec(
                "initial condition must be nonzero and finite".into(),
            ));
        }
        if self.t0 < 0.0 || !self.t0.is_finite() {
            return Err(Error::InvalidSpec(
                "t0 must be nonnegative and finite".into(),
            ));
        }
        let linear_small_integral = match &self.jumps {
            JumpForm::Linear { small, .. } => {
                self.noise.integrate(JumpRegion::Small, &|y| small(y))?
            }
            _ => 0.0,
        };
        Ok(SdeSpec {
            drift: self.drift,
            op_drift: self.op_drift,
            diffusion: self.diffusion,
            jumps: self.jumps,
            x0: self.x0,
            t0: self.t0,
            clock: self.clock,
            noise: self.noise,
            linear_small_integral,
        })
    }
}

/// One Euler step; marks must have been sampled for this `d_e`.
#[allow(clippy::too_many_arguments)]
pub fn step_euler(
    x: f64,
    t: f64,
    e: f64,
    dt: f64,
    d_e: f64,
    d_b: f64,
    small_marks: &[f64],
    large_marks: &[f64],
    spec: &SdeSpec,
) -> Result<f64> {
    if d_e < 0.0 {
        return Err(Error::Precondition(format!(
            "operational increment {d_e} must be >= 0"
        )));
    }
    let comp = spec.compensator(t, e, x)?;
    step_euler_inner(x, t, e, dt, d_e, d_b, small_marks, large_marks, spec, comp)
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn step_euler_inner(
    x: f64,
    t: f64,
    e: f64,
    dt: f64,
    d_e: f64,
    d_b: f64,
    small_marks: &[f64],
    large_marks: &[f64],
    spec: &SdeSpec,
    comp: f64,
) -> Result<f64> {
    let mut xn = x;
    xn += spec.eval_drift(t, e, x) * dt;
    xn += spec.eval_op_drift(t, e, x) * d_e;
    xn += spec.eval_diffusion(t, e, x) * d_b;
    xn -= comp * d_e;
    for &y in small_marks {
        xn += spec.small_jump(t, e, xn, y);
    }
    for &y in large_marks {
        xn += spec.large_jump(xn, y);
    }
    if !xn.is_finite() {
        return Err(Error::BlowUp { t, x });
    }
    Ok(xn)
}

/// One step's retained noise, for Ito-check replay.
#[derive(Debug, Clone, PartialEq)]
pub struct StepIncrement {
    pub d_e: f64,
    pub d_b: f64,
    pub small_marks: Vec<f64>,
    pub large_marks: Vec<f64>,
}

/// `|X|` fell below [`NUMERIC_FLOOR`] at this step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorEvent {
    pub step: usize,
    pub t: f64,
    pub abs_x: f64,
}

/// A simulated path with its clock, floor events, and seed provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBundle {
    clock: ClockPath,
    x_values: Vec<f64>,
    floor_events: Vec<FloorEvent>,
    rng_seed: u64,
    path_index: u64,
    increments: Option<Vec<StepIncrement>>,
}

impl TrajectoryBundle {
    /// Wrap externally computed values (analytic injections in tests, CSV
    /// reloads); floor events are derived from the values.
    pub fn synthetic(clock: ClockPath, x_values: Vec<f64>) -> Result<Self> {
        if clock.real_grid().len() != x_values.len() {
            return Err(Error::InvalidSpec(
                "values must align with the real grid".into(),
            ));
        }
        let floor_events = x_values
            .iter()
            .enumerate()
            .filter(|(_, x)| x.abs() < NUMERIC_FLOOR)
            .map(|(j, x)| FloorEvent {
                step: j,
                t: clock.real_grid()[j],
                abs_x: x.abs(),
            })
            .collect();
        Ok(Self {
            clock,
            x_values,
            floor_events,
            rng_seed: 0,
            path_index: 0,
            increments: None,
        })
    }

    pub fn clock(&self) -> &ClockPath {
        &self.clock
    }

    pub fn x_values(&self) -> &[f64] {
        &self.x_values
    }

    pub fn floor_events(&self) -> &[FloorEvent] {
        &self.floor_events
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    pub fn increments(&self) -> Option<&[StepIncrement]> {
        self.increments.as_deref()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SimOptions {
    pub keep_increments: bool,
}

/// Brownian increments and Poisson marks generated per operational cell of
/// width `delta`; grid levels that are integer multiples of `delta` consume
/// the same noise by aggregation.
pub struct CellNoise {
    delta: f64,
    d_b: Vec<f64>,
    small: Vec<(u32, f64)>,
    large: Vec<(u32, f64)>,
}

impl CellNoise {
    pub fn generate<R: Rng + ?Sized>(
        measure: &LevyMeasureSpec,
        with_small: bool,
        with_large: bool,
        n_cells: usize,
        delta: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let sqrt_delta = delta.sqrt();
        let mut d_b = Vec::with_capacity(n_cells);
        let mut small = Vec::new();
        let mut large = Vec::new();
        for cell in 0..n_cells {
            let z: f64 = rng.sample(StandardNormal);
            d_b.push(sqrt_delta * z);
            if with_small {
                for y in measure.sample_marks(JumpRegion::Small, delta, rng)? {
                    small.push((cell as u32, y));
                }
            }
            if with_large {
                for y in measure.sample_marks(JumpRegion::Large, delta, rng)? {
                    large.push((cell as u32, y));
                }
            }
        }
        Ok(Self {
            delta,
            d_b,
            small,
            large,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n_cells(&self) -> usize {
        self.d_b.len()
    }
}

/// Per-step noise: fresh conditional draws, or aggregation of shared cells
/// (with `stride` fine cells per caller-visible cell).
enum NoiseSource<'a, R: Rng> {
    Fresh {
        rng: &'a mut R,
    },
    Cells {
        cells: &'a CellNoise,
        stride: usize,
        small_cursor: usize,
        large_cursor: usize,
    },
}

impl<R: Rng> NoiseSource<'_, R> {
    /// Noise for a step spanning operational cells `[c0, c1)` with total
    /// increment `d_e = (c1 - c0) * op_step`.
    fn step(
        &mut self,
        spec: &SdeSpec,
        d_e: f64,
        c0: usize,
        c1: usize,
    ) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        match self {
            NoiseSource::Fresh { rng } => {
                let z: f64 = rng.sample(StandardNormal);
                let d_b = d_e.sqrt() * z;
                let small = if spec.jumps().has_small() {
                    spec.noise().sample_marks(JumpRegion::Small, d_e, rng)?
                } else {
                    Vec::new()
                };
                let large = if spec.jumps().has_large() {
                    spec.noise().sample_marks(JumpRegion::Large, d_e, rng)?
                } else {
                    Vec::new()
                };
                Ok((d_b, small, large))
            }
            NoiseSource::Cells {
                cells,
                stride,
                small_cursor,
                large_cursor,
            } => {
                let (c0, c1) = (c0 * *stride, c1 * *stride);
                let d_b: f64 = cells.d_b[c0..c1].iter().sum();
                let mut small = Vec::new();
                while *small_cursor < cells.small.len()
                    && (cells.small[*small_cursor].0 as usize) < c1
                {
                    if (cells.small[*small_cursor].0 as usize) >= c0 {
                        small.push(cells.small[*small_cursor].1);
                    }
                    *small_cursor += 1;
                }
                let mut large = Vec::new();
                while *large_cursor < cells.large.len()
                    && (cells.large[*large_cursor].0 as usize) < c1
                {
                    if (cells.large[*large_cursor].0 as usize) >= c0 {
                        large.push(cells.large[*large_cursor].1);
                    }
                    *large_cursor += 1;
                }
                Ok((d_b, small, large))
            }
        }
    }
}

fn uniform_grid(t0: f64, t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_end > t0) {
        return Err(Error::Domain(format!(
            "horizon {t_end} must exceed t0 = {t0}"
        )));
    }
    if !(dt > 0.0) || dt > (t_end - t0) / 100.0 {
        return Err(Error::Domain(format!(
            "step {dt} must be positive and at most (T - t0)/100 = {}",
            (t_end - t0) / 100.0
        )));
    }
    let n = ((t_end - t0) / dt).round() as usize;
    Ok((0..=n).map(|i| t0 + i as f64 * dt).collect())
}

fn integrate_on_clock<R: Rng>(
    spec: &SdeSpec,
    clock: ClockPath,
    mut noise: NoiseSource<'_, R>,
    opts: SimOptions,
    rng_seed: u64,
    path_index: u64,
) -> Result<TrajectoryBundle> {
    let grid = clock.real_grid();
    let n = grid.len();
    let mut x_values = Vec::with_capacity(n);
    let mut floor_events = Vec::new();
    let mut increments = opts.keep_increments.then(|| Vec::with_capacity(n - 1));
    let mut x = spec.x0();
    x_values.push(x);
    for j in 0..n - 1 {
        let (t, e) = (grid[j], clock.e_values()[j]);
        let dt = grid[j + 1] - grid[j];
        let d_e = clock.e_values()[j + 1] - clock.e_values()[j];
        debug_assert!(d_e >= 0.0, "clock must be nondecreasing");
        let (c0, c1) = (clock.e_cell_index(j), clock.e_cell_index(j + 1));
        let (d_b, small_marks, large_marks) = noise.step(spec, d_e, c0, c1)?;
        let comp = spec.compensator(t, e, x)?;
        x = step_euler_inner(
            x,
            t,
            e,
            dt,
            d_e,
            d_b,
            &small_marks,
            &large_marks,
            spec,
            comp,
        )
        .map_err(|err| match err {
            Error::BlowUp { .. } => Error::BlowUp { t: grid[j + 1], x },
            other => other,
        })?;
        if x.abs() < NUMERIC_FLOOR {
            floor_events.push(FloorEvent {
                step: j + 1,
                t: grid[j + 1],
                abs_x: x.abs(),
            });
        }
        x_values.push(x);
        if let Some(incs) = increments.as_mut() {
            incs.push(StepIncrement {
                d_e,
                d_b,
                small_marks,
                large_marks,
            });
        }
    }
    Ok(TrajectoryBundle {
        clock,
        x_values,
        floor_events,
        rng_seed,
        path_index,
        increments,
    })
}

/// Simulate one path on the uniform grid `t0, t0 + dt, ..., T`.
///
/// The clock is built first from the `Clock` stream, then the noise is drawn
/// from the `Noise` stream conditioned on each step's `dE`; the result is a
/// deterministic function of `(seed, path_index)`.
pub fn simulate_path(
    spec: &SdeSpec,
    t_end: f64,
    dt: f64,
    seed: u64,
    path_index: u64,
) -> Result<TrajectoryBundle> {
    simulate_path_opts(spec, t_end, dt, seed, path_index, SimOptions::default())
}

pub fn simulate_path_opts(
    spec: &SdeSpec,
    t_end: f64,
    dt: f64,
    seed: u64,
    path_index: u64,
    opts: SimOptions,
) -> Result<TrajectoryBundle> {
    let grid = uniform_grid(spec.t0(), t_end, dt)?;
    let mut clock_rng = stream_rng(seed, path_index, StreamRole::Clock);
    let clock = simulate_clock(spec.clock(), &grid, &mut clock_rng)?;
    let mut noise_rng = stream_rng(seed, path_index, StreamRole::Noise);
    let noise = NoiseSource::Fresh {
        rng: &mut noise_rng,
    };
    integrate_on_clock(spec, clock, noise, opts, seed, path_index)
}

/// Integrate on a prebuilt clock consuming shared per-cell noise; the
/// clock's operational step must be an integer multiple of the cell width.
pub fn simulate_path_on_cells(
    spec: &SdeSpec,
    clock: &ClockPath,
    cells: &CellNoise,
    opts: SimOptions,
) -> Result<TrajectoryBundle> {
    let stride = cell_stride(clock, cells)?;
    let noise: NoiseSource<'_, rand_chacha::ChaCha8Rng> = NoiseSource::Cells {
        cells,
        stride,
        small_cursor: 0,
        large_cursor: 0,
    };
    integrate_on_clock(spec, clock.clone(), noise, opts, 0, 0)
}

fn cell_stride(clock: &ClockPath, cells: &CellNoise) -> Result<usize> {
    let ratio = clock.op_step() / cells.delta();
    let stride = ratio.round() as usize;
    if stride == 0 || (ratio - stride as f64).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Precondition(format!(
            "op_step {} is not an integer multiple of the cell width {}",
            clock.op_step(),
            cells.delta()
        )));
    }
    Ok(stride)
}

/// Simulate paths `0..n_paths` concurrently and reduce each to a summary
/// before the trajectory is dropped; output order is by path index.
pub fn ensemble_map<T, F>(
    spec: &SdeSpec,
    t_end: f64,
    dt: f64,
    seed: u64,
    n_paths: usize,
    opts: SimOptions,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&TrajectoryBundle) -> T + Send + Sync,
{
    (0..n_paths as u64)
        .into_par_iter()
        .map(|path_index| {
            let traj = simulate_path_opts(spec, t_end, dt, seed, path_index, opts)?;
            Ok(f(&traj))
        })
        .collect()
}

/// Integrate the classical (non-time-changed) SDE on the operational grid
/// and compose with the clock: returns `t -> z(E_t)` on the clock's real
/// grid. Requires `f = 0`; with a `dt` drift the time change does not
/// commute with the classical dynamics.
pub fn duality_compose(spec: &SdeSpec, clock: &ClockPath, seed: u64) -> Result<Vec<f64>> {
    if spec.has_drift() {
        return Err(Error::Precondition("duality requires no dt drift".into()));
    }
    let mut rng = stream_rng(seed, 0, StreamRole::DualNoise);
    let mut noise = NoiseSource::Fresh { rng: &mut rng };
    let z = dual_path(spec, clock, &mut noise)?;
    Ok(clock
        .real_grid()
        .iter()
        .enumerate()
        .map(|(j, _)| z[clock.e_cell_index(j)])
        .collect())
}

/// Classical path `z` on the operational grid of `clock`.
fn dual_path<R: Rng>(
    spec: &SdeSpec,
    clock: &ClockPath,
    noise: &mut NoiseSource<'_, R>,
) -> Result<Vec<f64>> {
    let delta = clock.op_step();
    let n_ops = clock.e_cell_index(clock.real_grid().len() - 1);
    let d_values = clock.d_values();
    let mut z = Vec::with_capacity(n_ops + 1);
    let mut state = spec.x0();
    z.push(state);
    for k in 0..n_ops {
        // Real time along the operational axis is D(k delta); the first
        // coefficient slot sees the subordinator, the second sees tau.
        let t_arg = d_values[k.min(d_values.len() - 1)];
        let tau = k as f64 * delta;
        let (d_b, small_marks, large_marks) = noise.step(spec, delta, k, k + 1)?;
        let comp = spec.compensator(t_arg, tau, state)?;
        state = step_euler_inner(
            state,
            t_arg,
            tau,
            0.0,
            delta,
            d_b,
            &small_marks,
            &large_marks,
            spec,
            comp,
        )?;
        z.push(state);
    }
    Ok(z)
}

/// Jointly refined grids sharing one subordinator path: level `l` halves
/// both the real step and the operational step of level `l - 1`, and every
/// level's clock is a subsample of the finest simulated path.
pub fn clock_refinement_family(
    spec: &SubordinatorSpec,
    t0: f64,
    t_end: f64,
    dt0: f64,
    delta0: f64,
    n_levels: usize,
    seed: u64,
) -> Result<Vec<ClockPath>> {
    if n_levels == 0 {
        return Err(Error::Domain("need at least one refinement level".into()));
    }
    let m_max = 1usize << (n_levels - 1);
    let delta_fine = delta0 / m_max as f64;
    // Finest subordinator path, extended so every subsampled level covers
    // the horizon: the last retained coarse point must exceed t_end.
    let fine_clock = {
        let grid = uniform_grid(t0, t_end, dt0 / m_max as f64)?;
        let mut rng = stream_rng(seed, 0, StreamRole::Clock);
        simulate_clock(
            &ClockSpec::Inverse {
                spec: spec.clone(),
                op_step: delta_fine,
            },
            &grid,
            &mut rng,
        )?
    };
    let mut d_fine = fine_clock.d_values().to_vec();
    {
        // Pad with one extra coarse block worth of increments if needed.
        let mut rng = stream_rng(seed, 1, StreamRole::Clock);
        while (d_fine.len() - 1) % m_max != 0 || d_fine[(d_fine.len() - 1) / m_max * m_max] <= t_end
        {
            let inc = sample_mixture_increment(spec, delta_fine, &mut rng)?;
            let last = *d_fine.last().unwrap();
            let next = last + inc;
            d_fine.push(if next > last { next } else { last.next_up() });
        }
    }
    let mut levels = Vec::with_capacity(n_levels);
    for l in 0..n_levels {
        let m = 1usize << (n_levels - 1 - l);
        let delta = delta_fine * m as f64;
        let d_sub: Vec<f64> = d_fine.iter().copied().step_by(m).collect();
        let grid = uniform_grid(t0, t_end, dt0 / (1usize << l) as f64)?;
        let clock = crate::subordinator::invert_subordinator(&d_sub, delta, &grid)?;
        levels.push(clock);
    }
    Ok(levels)
}

fn sample_mixture_increment<R: Rng + ?Sized>(
    spec: &SubordinatorSpec,
    delta: f64,
    rng: &mut R,
) -> Result<f64> {
    let mut total = 0.0;
    for &(c, beta) in spec.components() {
        total +=
            crate::subordinator::sample_stable_increment(beta, c.powf(1.0 / beta), delta, rng)?;
    }
    Ok(total)
}

/// Sup-norm distance between the direct simulation and the duality
/// composition, both driven by the same per-cell noise, across refinement
/// levels (coarsest first).
pub fn duality_refinement_study(
    spec: &SdeSpec,
    t_end: f64,
    dt0: f64,
    delta0: f64,
    n_levels: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if spec.has_drift() {
        return Err(Error::Precondition("duality requires no dt drift".into()));
    }
    let sub = match spec.clock() {
        ClockSpec::Inverse { spec, .. } => spec.clone(),
        ClockSpec::Identity => {
            return Err(Error::Precondition(
                "refinement study needs a genuine inverse clock".into(),
            ))
        }
    };
    let clocks = clock_refinement_family(&sub, spec.t0(), t_end, dt0, delta0, n_levels, seed)?;
    let m_max = 1usize << (n_levels - 1);
    let delta_fine = delta0 / m_max as f64;
    // Coarser grids overshoot the true inverse further, so the coarsest
    // level can consume the most fine cells.
    let n_cells = clocks
        .iter()
        .enumerate()
        .map(|(l, c)| c.e_cell_index(c.real_grid().len() - 1) << (n_levels - 1 - l))
        .max()
        .unwrap()
        .max(1);
    let mut rng = stream_rng(seed, 0, StreamRole::Noise);
    let cells = CellNoise::generate(
        spec.noise(),
        spec.jumps().has_small(),
        spec.jumps().has_large(),
        n_cells,
        delta_fine,
        &mut rng,
    )?;
    let mut errors = Vec::with_capacity(n_levels);
    for clock in clocks.iter() {
        // Direct Euler on the level's real grid, aggregating shared cells.
        let direct = simulate_path_on_cells(spec, clock, &cells, SimOptions::default())?;
        // Dual route on the level's operational grid, same cells.
        let stride = cell_stride(clock, &cells)?;
        let mut dual_noise: NoiseSource<'_, rand_chacha::ChaCha8Rng> = NoiseSource::Cells {
            cells: &cells,
            stride,
            small_cursor: 0,
            large_cursor: 0,
        };
        let z = dual_path(spec, clock, &mut dual_noise)?;
        let sup = direct
            .x_values()
            .iter()
            .enumerate()
            .map(|(j, &x)| (x - z[clock.e_cell_index(j)]).abs())
            .fold(0.0f64, f64::max);
        errors.push(sup);
    }
    Ok(errors)
}

/// A scalar functional `F(t, e, x)` with the derivatives the Ito expansion
/// needs.
#[derive(Clone)]
pub struct ItoFunction {
    pub f: Coeff,
    pub f_t: Coeff,
    pub f_e: Coeff,
    pub f_x: Coeff,
    pub f_xx: Coeff,
}

impl ItoFunction {
    /// `F(t, e, x) = x`.
    pub fn identity() -> Self {
        ItoFunction {
            f: coeff(|_, _, x| x),
            f_t: coeff(|_, _, _| 0.0),
            f_e: coeff(|_, _, _| 0.0),
            f_x: coeff(|_, _, _| 1.0),
            f_xx: coeff(|_, _, _| 0.0),
        }
    }

    /// `F(t, e, x) = x^2`.
    pub fn square() -> Self {
        ItoFunction {
            f: coeff(|_, _, x| x * x),
            f_t: coeff(|_, _, _| 0.0),
            f_e: coeff(|_, _, _| 0.0),
            f_x: coeff(|_, _, x| 2.0 * x),
            f_xx: coeff(|_, _, _| 2.0),
        }
    }

    /// `F(t, e, x) = log(x^2)`.
    pub fn log_square() -> Self {
        ItoFunction {
            f: coeff(|_, _, x: f64| (x * x).ln()),
            f_t: coeff(|_, _, _| 0.0),
            f_e: coeff(|_, _, _| 0.0),
            f_x: coeff(|_, _, x| 2.0 / x),
            f_xx: coeff(|_, _, x| -2.0 / (x * x)),
        }
    }
}

/// Residual series of the discretized Ito expansion along a trajectory.
#[derive(Debug, Clone)]
pub struct ItoResidual {
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_abs: f64,
}

/// Replay a trajectory's retained noise through the Ito expansion of `F`
/// and report `F(t, E_t, X_t) - F(t0, E_0, x0) - (discretized right side)`.
pub fn ito_consistency_check(
    traj: &TrajectoryBundle,
    func: &ItoFunction,
    spec: &SdeSpec,
) -> Result<ItoResidual> {
    let incs = traj
        .increments()
        .ok_or_else(|| Error::Precondition("trajectory must retain its noise increments".into()))?;
    let grid = traj.clock().real_grid();
    let e = traj.clock().e_values();
    let xs = traj.x_values();
    let f0 = (func.f)(grid[0], e[0], xs[0]);
    let mut acc = 0.0;
    let mut times = Vec::with_capacity(incs.len());
    let mut residuals = Vec::with_capacity(incs.len());
    let mut max_abs = 0.0f64;
    for (j, inc) in incs.iter().enumerate() {
        let (t, ee, x) = (grid[j], e[j], xs[j]);
        let dt = grid[j + 1] - grid[j];
        let fx = (func.f_x)(t, ee, x);
        let l1 = (func.f_t)(t, ee, x) + fx * spec.eval_drift(t, ee, x);
        let g = spec.eval_diffusion(t, ee, x);
        // The nu integral inside L2 and the compensator of the small-jump
        // Poisson integral collapse to -F_x * (integral of h d nu).
        let l2 = (func.f_e)(t, ee, x)
            + fx * spec.eval_op_drift(t, ee, x)
            + 0.5 * g * g * (func.f_xx)(t, ee, x);
        let comp = spec.compensator(t, ee, x)?;
        acc += l1 * dt + l2 * inc.d_e + fx * g * inc.d_b;
        // The nu integral inside L2 and the compensator of the small-jump
        // Poisson integral cancel down to -F_x * (integral of h d nu).
        acc -= fx * comp * inc.d_e;
        // Jump differences F(x + jump) - F(x) at the running pre-jump
        // state, replaying the integrator's own application order.
        let mut running = x;
        running += spec.eval_drift(t, ee, x) * dt;
        running += spec.eval_op_drift(t, ee, x) * inc.d_e;
        running += g * inc.d_b;
        running -= comp * inc.d_e;
        for &y in &inc.small_marks {
            let jump = spec.small_jump(t, ee, running, y);
            acc += (func.f)(t, ee, running + jump) - (func.f)(t, ee, running);
            running += jump;
        }
        for &y in &inc.large_marks {
            let jump = spec.large_jump(running, y);
            acc += (func.f)(t, ee, running + jump) - (func.f)(t, ee, running);
            running += jump;
        }
        let lhs = (func.f)(grid[j + 1], e[j + 1], xs[j + 1]) - f0;
        let r = lhs - acc;
        max_abs = max_abs.max(r.abs());
        times.push(grid[j + 1]);
        residuals.push(r);
    }
    Ok(ItoResidual {
        times,
        residuals,
        max_abs,
    })
}

/// Whether a trajectory stayed away from zero; the events carry step
/// context for diagnosis.
#[derive(Debug, Clone, PartialEq)]
pub struct NonzeroReport {
    pub ok: bool,
    pub events: Vec<FloorEvent>,
}

pub fn check_nonzero(traj: &TrajectoryBundle) -> NonzeroReport {
    NonzeroReport {
        ok: traj.floor_events().is_empty(),
        events: traj.floor_events().to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subordinator::SubordinatorSpec;

    fn no_noise() -> LevyMeasureSpec {
        LevyMeasureSpec::uniform01(1.0).unwrap()
    }

    fn identity_clock() -> ClockSpec {
        ClockSpec::Identity
    }

    fn stable_clock(alpha: f64, delta: f64) -> ClockSpec {
        ClockSpec::Inverse {
            spec: SubordinatorSpec::stable(alpha).unwrap(),
            op_step: delta,
        }
    }

    #[test]
    fn zero_coefficients_leave_state_fixed() {
        let spec = SdeSpec::builder(1.5, identity_clock(), no_noise())
            .build()
            .unwrap();
        let x = step_euler(1.5, 0.0, 0.0, 0.01, 0.02, 0.3, &[], &[], &spec).unwrap();
        assert_eq!(x, 1.5);
    }

    #[test]
    fn explicit_euler_ode_step() {
        let spec = SdeSpec::builder(1.0, identity_clock(), no_noise())
            .drift(coeff(|_, _, x| -x))
            .build()
            .unwrap();
        let x = step_euler(1.0, 0.0, 0.0, 0.01, 0.0, 0.0, &[], &[], &spec).unwrap();
        assert_eq!(x, 0.99);
    }

    #[test]
    fn negative_operational_increment_rejected() {
        let spec = SdeSpec::builder(1.0, identity_clock(), no_noise())
            .build()
            .unwrap();
        assert!(step_euler(1.0, 0.0, 0.0, 0.01, -0.1, 0.0, &[], &[], &spec).is_err());
    }

    #[test]
    fn zero_initial_condition_rejected() {
        assert!(SdeSpec::builder(0.0, identity_clock(), no_noise())
            .build()
            .is_err());
    }

    #[test]
    fn constant_path_for_zero_spec() {
        let spec = SdeSpec::builder(2.5, stable_clock(0.8, 1e-3), no_noise())
            .build()
            .unwrap();
        let traj = simulate_path(&spec, 2.0, 0.02, 7, 0).unwrap();
        assert!(traj.x_values().iter().all(|&x| x == 2.5));
        assert!(traj.floor_events().is_empty());
    }

    #[test]
    fn step_precondition_enforced() {
        let spec = SdeSpec::builder(1.0, identity_clock(), no_noise())
            .build()
            .unwrap();
        // dt > (T - t0)/100 is out of contract.
        assert!(simulate_path(&spec, 1.0, 0.5, 7, 0).is_err());
    }

    #[test]
    fn identity_clock_reduces_to_classical_ode() {
        let spec = SdeSpec::builder(1.0, identity_clock(), no_noise())
            .op_drift(coeff(|_, _, x| -x))
            .build()
            .unwrap();
        let traj = simulate_path(&spec, 5.0, 0.005, 7, 0).unwrap();
        let x_end = *traj.x_values().last().unwrap();
        let exact = (-5.0f64).exp();
        assert!(
            (x_end - exact).abs() / exact < 0.02,
            "Euler endpoint {x_end} vs {exact}"
        );
    }

    #[test]
    fn paths_are_bitwise_deterministic() {
        let spec = SdeSpec::builder(
            0.1,
            stable_clock(0.8, 1e-3),
            LevyMeasureSpec::std_normal(1.0).unwrap(),
        )
        .drift(coeff(|_, _, x| -x))
        .diffusion(coeff(|_, _, x| x))
        .linear_jumps(mark_fn(|y| 2.0 * y * y), Some(mark_fn(|y| 2.0 * y * y)))
        .build()
        .unwrap();
        let a = simulate_path(&spec, 2.0, 0.01, 42, 3).unwrap();
        let b = simulate_path(&spec, 2.0, 0.01, 42, 3).unwrap();
        assert_eq!(a, b);
        let c = simulate_path(&spec, 2.0, 0.01, 42, 4).unwrap();
        assert_ne!(a.x_values(), c.x_values());
    }

    #[test]
    fn blow_up_carries_location() {
        let spec = SdeSpec::builder(1.0, identity_clock(), no_noise())
            .drift(coeff(|_, _, x| x * 1e200))
            .build()
            .unwrap();
        match simulate_path(&spec, 1.0, 0.01, 7, 0) {
            Err(Error::BlowUp { t, .. }) => assert!(t > 0.0 && t <= 1.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn brownian_increments_have_clock_variance() {
        let spec = SdeSpec::builder(1.0, stable_clock(0.8, 1e-3), no_noise())
            .build()
            .unwrap();
        let traj = simulate_path_opts(
            &spec,
            5.0,
            0.005,
            11,
            0,
            SimOptions {
                keep_increments: true,
            },
        )
        .unwrap();
        let incs = traj.increments().unwrap();
        let zs: Vec<f64> = incs
            .iter()
            .filter(|i| i.d_e > 0.0)
            .map(|i| i.d_b / i.d_e.sqrt())
            .collect();
        let n = zs.len() as f64;
        assert!(n > 100.0);
        let mean = zs.iter().sum::<f64>() / n;
        let var = zs.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 3.0 / n.sqrt(), "standardized mean {mean}");
        assert!(
            (var - 1.0).abs() < 3.0 * (2.0 / n).sqrt(),
            "standardized var {var}"
        );
    }

    #[test]
    fn geometric_solution_matches_closed_form_under_refinement() {
        // dX = kappa X dE + sigma X dB_E has the exact solution
        // x0 exp((kappa - sigma^2/2) E_t + sigma B_{E_t}); with shared
        // per-cell noise the Euler endpoint converges to it as the grids
        // refine jointly.
        let (kappa, sigma) = (-0.5, 0.4);
        let sub = SubordinatorSpec::stable(0.8).unwrap();
        let n_levels = 3;
        let spec = SdeSpec::builder(
            1.0,
            ClockSpec::Inverse {
                spec: sub.clone(),
                op_step: 0.02,
            },
            no_noise(),
        )
        .op_drift(coeff(move |_, _, x| kappa * x))
        .diffusion(coeff(move |_, _, x| sigma * x))
        .build()
        .unwrap();
        let clocks = clock_refinement_family(&sub, 0.0, 3.0, 0.03, 0.02, n_levels, 5).unwrap();
        let delta_fine = clocks.last().unwrap().op_step();
        let n_cells = clocks
            .iter()
            .enumerate()
            .map(|(l, c)| c.e_cell_index(c.real_grid().len() - 1) << (n_levels - 1 - l))
            .max()
            .unwrap();
        // Single-path aggregation error is not pathwise monotone; average
        // over independent noise draws on the shared clock family.
        let n_noises = 8;
        let mut errors = vec![0.0f64; n_levels];
        for noise_idx in 0..n_noises {
            let mut rng = stream_rng(9, noise_idx, StreamRole::Noise);
            let cells =
                CellNoise::generate(spec.noise(), false, false, n_cells, delta_fine, &mut rng)
                    .unwrap();
            for (l, clock) in clocks.iter().enumerate() {
                let traj = simulate_path_on_cells(
                    &spec,
                    clock,
                    &cells,
                    SimOptions {
                        keep_increments: true,
                    },
                )
                .unwrap();
                let incs = traj.increments().unwrap();
                let mut b = 0.0;
                let mut max_rel = 0.0f64;
                for (j, inc) in incs.iter().enumerate() {
                    b += inc.d_b;
                    let e = clock.e_values()[j + 1];
                    let exact = ((kappa - 0.5 * sigma * sigma) * e + sigma * b).exp();
                    let got = traj.x_values()[j + 1];
                    max_rel = max_rel.max((got - exact).abs() / exact.abs());
                }
                errors[l] += max_rel / n_noises as f64;
            }
        }
        assert!(
            errors.windows(2).all(|w| w[1] < w[0]),
            "mean errors must shrink under refinement: {errors:?}"
        );
        assert!(errors.last().unwrap() < &0.05, "finest error {errors:?}");
    }

    #[test]
    fn duality_composition_matches_exponential() {
        let spec = SdeSpec::builder(1.0, stable_clock(0.8, 1e-3), no_noise())
            .op_drift(coeff(|_, _, x| -x))
            .build()
            .unwrap();
        let grid: Vec<f64> = (0..=200).map(|j| 0.01 * j as f64).collect();
        let mut rng = stream_rng(13, 0, StreamRole::Clock);
        let clock = crate::subordinator::simulate_clock(spec.clock(), &grid, &mut rng).unwrap();
        let composed = duality_compose(&spec, &clock, 13).unwrap();
        for (j, &x) in composed.iter().enumerate() {
            let exact = (-clock.e_values()[j]).exp();
            assert!(
                (x - exact).abs() < 0.01,
                "t={} x={x} exact={exact}",
                grid[j]
            );
        }
    }

    #[test]
    fn duality_on_identity_clock_is_the_classical_path() {
        let spec = SdeSpec::builder(1.0, identity_clock(), no_noise())
            .op_drift(coeff(|_, _, x| -x))
            .build()
            .unwrap();
        let traj = simulate_path(&spec, 2.0, 0.01, 7, 0).unwrap();
        let composed = duality_compose(&spec, traj.clock(), 7).unwrap();
        for (a, b) in traj.x_values().iter().zip(&composed) {
            // Same Euler recursion; only step-width rounding differs.
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn duality_rejects_dt_drift() {
        let spec = SdeSpec::builder(1.0, stable_clock(0.8, 1e-2), no_noise())
            .drift(coeff(|_, _, _| 1.0))
            .build()
            .unwrap();
        let grid: Vec<f64> = (0..=100).map(|j| 0.01 * j as f64).collect();
        let mut rng = stream_rng(13, 0, StreamRole::Clock);
        let clock = crate::subordinator::simulate_clock(spec.clock(), &grid, &mut rng).unwrap();
        match duality_compose(&spec, &clock, 13) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("duality")),
            other => panic!("expected precondition error, got {other:?}"),
        }
    }

    #[test]
    fn duality_refinement_errors_shrink() {
        let spec = SdeSpec::builder(
            1.0,
            stable_clock(0.8, 0.02),
            LevyMeasureSpec::std_normal(1.0).unwrap(),
        )
        .op_drift(coeff(|_, _, x| -x))
        .diffusion(coeff(|_, _, x| 0.5 * x))
        .linear_jumps(mark_fn(|y| y * y), None)
        .build()
        .unwrap();
        let errors = duality_refinement_study(&spec, 2.0, 0.02, 0.02, 3, 21).unwrap();
        assert_eq!(errors.len(), 3);
        assert!(
            errors.windows(2).all(|w| w[1] < w[0]),
            "sup errors must decrease: {errors:?}"
        );
    }

    #[test]
    fn ito_identity_reconstruction_is_exact() {
        // F(t,e,x) = x replays the integrator's own arithmetic; the
        // residual is pure rounding noise.
        let spec = SdeSpec::builder(
            1.0,
            stable_clock(0.8, 1e-3),
            LevyMeasureSpec::std_normal(1.0).unwrap(),
        )
        .op_drift(coeff(|_, _, x: f64| -x * x.abs().sqrt()))
        .diffusion(coeff(|_, _, x| x))
        .linear_jumps(mark_fn(|y| y * y), None)
        .build()
        .unwrap();
        let traj = simulate_path_opts(
            &spec,
            10.0,
            0.01,
            3,
            0,
            SimOptions {
                keep_increments: true,
            },
        )
        .unwrap();
        let res = ito_consistency_check(&traj, &ItoFunction::identity(), &spec).unwrap();
        assert!(res.max_abs <= 1e-12, "identity residual {}", res.max_abs);
    }

    #[test]
    fn ito_residual_requires_increments() {
        let spec = SdeSpec::builder(1.0, identity_clock(), no_noise())
            .build()
            .unwrap();
        let traj = simulate_path(&spec, 2.0, 0.01, 3, 0).unwrap();
        assert!(ito_consistency_check(&traj, &ItoFunction::identity(), &spec).is_err());
    }

    #[test]
    fn ito_square_residual_shrinks_under_refinement() {
        // Linear diffusion SDE, ensemble mean of the max residual over a
        // few paths per level; levels halve (dt, delta) jointly.
        let sub = SubordinatorSpec::stable(0.8).unwrap();
        let mut level_means = Vec::new();
        for level in 0..3 {
            let dt = 0.01 / (1 << level) as f64;
            let delta = 0.01 / (1 << level) as f64;
            let spec = SdeSpec::builder(
                1.0,
                ClockSpec::Inverse {
                    spec: sub.clone(),
                    op_step: delta,
                },
                no_noise(),
            )
            .op_drift(coeff(|_, _, x| -x))
            .diffusion(coeff(|_, _, x| 0.3 * x))
            .build()
            .unwrap();
            let n_paths = 16;
            let mut total = 0.0;
            for path in 0..n_paths {
                let traj = simulate_path_opts(
                    &spec,
                    1.0,
                    dt,
                    77,
                    path,
                    SimOptions {
                        keep_increments: true,
                    },
                )
                .unwrap();
                let res = ito_consistency_check(&traj, &ItoFunction::square(), &spec).unwrap();
                total += res.max_abs;
            }
            level_means.push(total / n_paths as f64);
        }
        assert!(
            level_means.windows(2).all(|w| w[1] < w[0]),
            "mean residuals must decrease: {level_means:?}"
        );
    }

    #[test]
    fn ito_log_square_bounded_on_multiplicative_dynamics() {
        // log(x^2) along geometric-type dynamics stays finite and the
        // residual shrinks when the grids refine.
        let sub = SubordinatorSpec::stable(0.8).unwrap();
        let mut maxima = Vec::new();
        for level in 0..2 {
            let h = 0.01 / (1 << level) as f64;
            let spec = SdeSpec::builder(
                1.0,
                ClockSpec::Inverse {
                    spec: sub.clone(),
                    op_step: h,
                },
                LevyMeasureSpec::std_normal(1.0).unwrap(),
            )
            .op_drift(coeff(|_, _, x: f64| -x * x.abs().sqrt()))
            .diffusion(coeff(|_, _, x| x))
            .linear_jumps(mark_fn(|y| y * y), None)
            .build()
            .unwrap();
            let traj = simulate_path_opts(
                &spec,
                2.0,
                h,
                5,
                0,
                SimOptions {
                    keep_increments: true,
                },
            )
            .unwrap();
            let res = ito_consistency_check(&traj, &ItoFunction::log_square(), &spec).unwrap();
            assert!(res.max_abs.is_finite());
            maxima.push(res.max_abs);
        }
        assert!(maxima[1] < maxima[0], "residuals {maxima:?}");
    }

    #[test]
    fn multiplicative_dynamics_preserve_sign() {
        // Jump factors 1 + h(y) and 1 + H(y) stay positive, so the sign of
        // x0 is invariant along every path.
        let spec = SdeSpec::builder(
            -0.1,
            stable_clock(0.8, 1e-3),
            LevyMeasureSpec::std_normal(1.0).unwrap(),
        )
        .drift(coeff(|_, _, x| -x))
        .diffusion(coeff(|_, _, x| x))
        .linear_jumps(mark_fn(|y| 2.0 * y * y), Some(mark_fn(|y| 2.0 * y * y)))
        .build()
        .unwrap();
        for path in 0..8 {
            let traj = simulate_path(&spec, 5.0, 0.01, 15, path).unwrap();
            assert!(traj.x_values().iter().all(|&x| x < 0.0));
        }
    }

    #[test]
    fn engineered_zero_crossing_is_logged() {
        // An additive jump h = -x sends the state exactly to zero.
        let spec = SdeSpec::builder(1.0, identity_clock(), no_noise())
            .general_jumps(state_jump(|_, _, x, _| -x))
            .build()
            .unwrap();
        let mut found = false;
        for path in 0..20 {
            let traj = simulate_path(&spec, 2.0, 0.01, 19, path).unwrap();
            let report = check_nonzero(&traj);
            if !report.ok {
                assert!(report.events[0].abs_x < NUMERIC_FLOOR);
                assert!(report.events[0].t > 0.0);
                found = true;
                break;
            }
        }
        assert!(found, "no path received a mark in 20 tries");
    }

    #[test]
    fn nonzero_report_clean_for_constant_path() {
        let spec = SdeSpec::builder(1.0, identity_clock(), no_noise())
            .build()
            .unwrap();
        let traj = simulate_path(&spec, 2.0, 0.01, 7, 0).unwrap();
        assert!(check_nonzero(&traj).ok);
    }

    #[test]
    fn general_jump_compensator_matches_linear_cache() {
        // h(t,e,x,y) = x y^2 through the general route must agree with the
        // linear route h(y) = y^2 at every evaluation point.
        let noise = LevyMeasureSpec::std_normal(1.0).unwrap();
        let lin = SdeSpec::builder(1.0, identity_clock(), noise.clone())
            .linear_jumps(mark_fn(|y| y * y), None)
            .build()
            .unwrap();
        let gen = SdeSpec::builder(1.0, identity_clock(), noise)
            .general_jumps(state_jump(|_, _, x, y| x * y * y))
            .build()
            .unwrap();
        for &x in &[0.5, -1.0, 2.0] {
            let a = lin.compensator(0.0, 0.0, x).unwrap();
            let b = gen.compensator(0.0, 0.0, x).unwrap();
            assert!((a - b).abs() < 1e-8, "x={x}: {a} vs {b}");
        }
    }
}
