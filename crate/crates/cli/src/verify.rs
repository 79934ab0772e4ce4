//! Property verification suites at pinned seeds and sizes.
//!
//! Each suite exercises one analytic statement with a desk-scale Monte
//! Carlo surrogate and reports machine-readable statistics plus a pass
//! flag; `verify <suite>` exits nonzero when a suite fails.

use anyhow::{bail, Result};
use pathstab_core::math::gamma;
use pathstab_core::rng::{stream_rng, StreamRole};
use pathstab_core::sde::{
    clock_refinement_family, coeff, ito_consistency_check, simulate_path_on_cells,
    simulate_path_opts, CellNoise, ItoFunction, SdeSpec, SimOptions,
};
use pathstab_core::stability::{
    martingale_inequality_check, time_fn, time_mark_fn, MartingaleCheckParams,
};
use pathstab_core::subordinator::{check_slln, inverse_at_times, ClockSpec, SubordinatorSpec};
use pathstab_core::LevyMeasureSpec;

pub const SUITES: [&str; 5] = ["slln", "martingale", "duality", "ito", "moments"];

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub lines: Vec<String>,
}

impl SuiteOutcome {
    pub fn print(&self) {
        println!("suite = {}", self.name);
        for line in &self.lines {
            println!("{line}");
        }
        println!("passed = {}", self.passed);
    }
}

pub fn run_suite(name: &str) -> Result<SuiteOutcome> {
    match name {
        "slln" => slln_suite(),
        "martingale" => martingale_suite(),
        "duality" => duality_suite(),
        "ito" => ito_suite(),
        "moments" => moments_suite(),
        other => bail!(
            "unknown verify suite {other:?}; available: {}",
            SUITES.join(", ")
        ),
    }
}

/// Decaying time-average of the operational clock: medians of E_t/t must
/// fall across decades, landing in the derived window at t = 1e4.
fn slln_suite() -> Result<SuiteOutcome> {
    let alpha = 0.8;
    let clock = ClockSpec::inverse_stable(alpha, 0.01)?;
    let grid = [100.0, 1000.0, 10_000.0];
    let report = check_slln(&clock, &grid, 400, 1202)?;
    let mut lines = vec![
        format!("alpha = {alpha}"),
        format!("n_paths = {}", report.n_paths),
    ];
    for ((t, mean), median) in grid.iter().zip(&report.means).zip(&report.medians) {
        let exact_mean = t.powf(alpha - 1.0) / gamma(1.0 + alpha);
        lines.push(format!(
            "t = {t}: mean = {mean:.5}, median = {median:.5}, exact_mean = {exact_mean:.5}"
        ));
    }
    let medians_fall = report.medians.windows(2).all(|w| w[1] < w[0]);
    let final_median = *report.medians.last().unwrap();
    let in_window = (0.10..=0.25).contains(&final_median);
    lines.push(format!("medians_strictly_decreasing = {medians_fall}"));
    lines.push(format!("final_median_in_[0.10,0.25] = {in_window}"));
    Ok(SuiteOutcome {
        name: "slln",
        passed: medians_fall && in_window,
        lines,
    })
}

/// Exponential-martingale tail bound with g = 1, h = 0 on the alpha = 0.8
/// clock: empirical exceedance within three binomial standard errors of
/// exp(-lambda kappa).
fn martingale_suite() -> Result<SuiteOutcome> {
    let check = martingale_inequality_check(
        &time_fn(|_| 1.0),
        &time_mark_fn(|_, _| 0.0),
        &ClockSpec::inverse_stable(0.8, 1e-3)?,
        &LevyMeasureSpec::std_normal(1.0)?,
        &MartingaleCheckParams {
            lambda: 1.0,
            kappa: 2.0,
            t_end: 10.0,
            dt: 0.01,
            n_paths: 10_000,
            seed: 1206,
        },
    )?;
    let lines = vec![
        "g = 1, h = 0, lambda = 1, kappa = 2, T = 10, alpha = 0.8".into(),
        format!("n_paths = {}", check.n_paths),
        format!("empirical_exceedance = {:.5}", check.empirical),
        format!("bound = {:.5}", check.bound),
        format!("bound_plus_3se = {:.5}", check.bound + 3.0 * check.std_err),
    ];
    Ok(SuiteOutcome {
        name: "martingale",
        passed: check.passes,
        lines,
    })
}

/// Duality route for dX = -X dE: the direct Euler path must track
/// x0 exp(-E_t) within 5% at the base grids and the sup error must fall
/// monotonically over three joint halvings on a shared subordinator path.
fn duality_suite() -> Result<SuiteOutcome> {
    let alpha = 0.8;
    let t_end = 10.0;
    let base = 1e-3;
    let n_levels = 4;
    let sub = SubordinatorSpec::stable(alpha)?;
    let clocks = clock_refinement_family(&sub, 0.0, t_end, base, base, n_levels, 1204)?;
    let delta_fine = clocks.last().unwrap().op_step();
    let n_cells = clocks
        .iter()
        .enumerate()
        .map(|(l, c)| c.e_cell_index(c.real_grid().len() - 1) << (n_levels - 1 - l))
        .max()
        .unwrap();
    let mut lines = vec![format!(
        "alpha = {alpha}, T = {t_end}, base dt = delta = {base}"
    )];
    let mut sup_errors = Vec::with_capacity(n_levels);
    let mut terminal_rel = f64::NAN;
    for (l, clock) in clocks.iter().enumerate() {
        let spec = SdeSpec::builder(
            1.0,
            ClockSpec::Inverse {
                spec: sub.clone(),
                op_step: clock.op_step(),
            },
            LevyMeasureSpec::uniform01(1.0)?,
        )
        .op_drift(coeff(|_, _, x| -x))
        .build()?;
        // The dynamics are noise-free given the clock; empty cells satisfy
        // the shared-noise interface.
        let mut rng = stream_rng(1204, 0, StreamRole::Noise);
        let cells = CellNoise::generate(spec.noise(), false, false, n_cells, delta_fine, &mut rng)?;
        let traj = simulate_path_on_cells(&spec, clock, &cells, SimOptions::default())?;
        let mut sup = 0.0f64;
        for (j, &x) in traj.x_values().iter().enumerate() {
            let exact = (-clock.e_values()[j]).exp();
            sup = sup.max((x - exact).abs());
        }
        sup_errors.push(sup);
        if l == 0 {
            let x_end = *traj.x_values().last().unwrap();
            let exact = (-clock.e_values().last().unwrap()).exp();
            terminal_rel = (x_end - exact).abs() / exact;
            lines.push(format!("terminal_rel_error_at_base = {terminal_rel:.6}"));
        }
        lines.push(format!(
            "level {l}: dt = delta = {:.6e}, sup_error = {sup:.6e}",
            clock.op_step()
        ));
    }
    let monotone = sup_errors.windows(2).all(|w| w[1] < w[0]);
    lines.push(format!("sup_errors_monotone_decreasing = {monotone}"));
    let passed = terminal_rel < 0.05 && monotone;
    Ok(SuiteOutcome {
        name: "duality",
        passed,
        lines,
    })
}

/// Ito-expansion closure for F = x^2 on a linear diffusion SDE: the mean
/// max residual over a small ensemble falls monotonically as (dt, delta)
/// halve, and the worst residual at the finest level stays below 1e-2.
fn ito_suite() -> Result<SuiteOutcome> {
    let sub = SubordinatorSpec::stable(0.8)?;
    let t_end = 1.0;
    let n_paths = 16u64;
    let mut lines = vec!["F = x^2 on dX = -X dE + 0.3 X dB_E, T = 1".into()];
    let mut means = Vec::new();
    let mut finest_max = 0.0f64;
    for level in 0..3 {
        let h = 1e-3 / (1 << level) as f64;
        let spec = SdeSpec::builder(
            1.0,
            ClockSpec::Inverse {
                spec: sub.clone(),
                op_step: h,
            },
            LevyMeasureSpec::uniform01(1.0)?,
        )
        .op_drift(coeff(|_, _, x| -x))
        .diffusion(coeff(|_, _, x| 0.3 * x))
        .build()?;
        let mut total = 0.0;
        let mut level_max = 0.0f64;
        for path in 0..n_paths {
            let traj = simulate_path_opts(
                &spec,
                t_end,
                h,
                1205,
                path,
                SimOptions {
                    keep_increments: true,
                },
            )?;
            let res = ito_consistency_check(&traj, &ItoFunction::square(), &spec)?;
            total += res.max_abs;
            level_max = level_max.max(res.max_abs);
        }
        let mean = total / n_paths as f64;
        means.push(mean);
        if level == 2 {
            finest_max = level_max;
        }
        lines.push(format!(
            "level {level}: dt = delta = {h:.6e}, mean_max_residual = {mean:.6e}, \
             worst = {level_max:.6e}"
        ));
    }
    let monotone = means.windows(2).all(|w| w[1] < w[0]);
    lines.push(format!("mean_residuals_monotone_decreasing = {monotone}"));
    lines.push(format!(
        "finest_worst_residual = {finest_max:.6e} (tolerance 1e-2)"
    ));
    Ok(SuiteOutcome {
        name: "ito",
        passed: monotone && finest_max < 1e-2,
        lines,
    })
}

/// Exact first-moment formula for the stable inverse clock at t = 10 and
/// t = 100 (relative error under 3% at 1e4 paths), plus the power-law slope
/// of the mixture clock's mean.
fn moments_suite() -> Result<SuiteOutcome> {
    let alpha = 0.8;
    let spec = SubordinatorSpec::stable(alpha)?;
    let times = [10.0, 100.0];
    let n_paths = 10_000u64;
    let delta = 1e-3;
    let mut sums = [0.0f64; 2];
    for path in 0..n_paths {
        let mut rng = stream_rng(1203, path, StreamRole::Clock);
        let es = inverse_at_times(&spec, &times, delta, &mut rng)?;
        for (s, e) in sums.iter_mut().zip(es) {
            *s += e;
        }
    }
    let mut lines = vec![format!(
        "alpha = {alpha}, n_paths = {n_paths}, delta = {delta}"
    )];
    let mut passed = true;
    for (t, sum) in times.iter().zip(sums) {
        let mean = sum / n_paths as f64;
        let exact = t.powf(alpha) / gamma(1.0 + alpha);
        let rel = (mean - exact).abs() / exact;
        passed &= rel < 0.03;
        lines.push(format!(
            "t = {t}: mc_mean = {mean:.5}, exact = {exact:.5}, rel_error = {rel:.5}"
        ));
    }

    // Mixture clock: log-log slope of the mean across decades tracks the
    // smallest index.
    let mix = SubordinatorSpec::mixture(&[(0.5, 0.3), (0.5, 0.7)])?;
    let slope_times = [100.0, 1000.0, 10_000.0];
    let n_mix = 500u64;
    let mut means = [0.0f64; 3];
    for path in 0..n_mix {
        let mut rng = stream_rng(1207, path, StreamRole::Clock);
        let es = inverse_at_times(&mix, &slope_times, 0.01, &mut rng)?;
        for (m, e) in means.iter_mut().zip(es) {
            *m += e / n_mix as f64;
        }
    }
    let xs: Vec<f64> = slope_times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / 3.0;
    let ybar = ys.iter().sum::<f64>() / 3.0;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xbar) * (x - xbar)).sum::<f64>();
    let slope_ok = (slope - 0.3).abs() < 0.05;
    passed &= slope_ok;
    lines.push(format!(
        "mixture (0.5, 0.3) + (0.5, 0.7): mean slope = {slope:.4} (target 0.3 +- 0.05)"
    ));
    Ok(SuiteOutcome {
        name: "moments",
        passed,
        lines,
    })
}
