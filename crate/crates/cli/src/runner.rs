//! Experiment orchestration: wire the clock, noise, integrator, stability
//! estimators and criteria evaluators together and emit the artifact set.

use std::path::PathBuf;

use anyhow::Result;
use pathstab_core::criteria::{
    check_standing_assumptions, evaluate_theorem_combined, evaluate_theorem_general,
    evaluate_theorem_linear, CriteriaReport, DomainGrid, LyapunovFunctionSpec,
};
use pathstab_core::sde::{ensemble_map, simulate_path_opts, SimOptions};
use pathstab_core::stability::{
    classify, estimate_limsup, lyapunov_series, martingale_inequality_check, time_fn, time_mark_fn,
    ClockScale, MartingaleCheckParams, Verdict,
};
use pathstab_core::subordinator::{check_slln, median_of, ClockSpec};

use crate::artifacts::{csv_float, csv_opt_float, ArtifactSet, Provenance};
use crate::config::{ExperimentConfig, OutputKind, TheoremChoice};
use crate::examples;
use crate::svg::{plot_csv_series, PlotSpec};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Emit dB, dE and mark counts alongside the trajectory for replay.
    pub keep_increments: bool,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub manifest: PathBuf,
    pub verdict: Option<Verdict>,
    pub criteria_verdict: Option<Verdict>,
    pub summary: Vec<String>,
}

/// SLLN check sizes inside a run: a coarser operational step keeps the
/// decade sweep to t = 1e4 affordable without moving the medians.
const SLLN_GRID: [f64; 3] = [100.0, 1000.0, 10_000.0];
const SLLN_OP_STEP: f64 = 0.01;

pub fn run(cfg: &ExperimentConfig, opts: RunOptions) -> Result<RunOutcome> {
    cfg.validate()?;
    let spec = cfg.to_sde_spec()?;
    let prov = Provenance {
        config_hash: cfg.digest(),
        seed: cfg.seed,
    };
    let mut artifacts = ArtifactSet::create(&cfg.out_dir, prov)?;
    artifacts.write_raw("config.resolved.conf", cfg.render().as_bytes())?;

    let example = cfg.example.as_deref().and_then(examples::registered);
    let mut summary = Vec::new();
    let mut verdict = None;
    let mut criteria_verdict = None;

    if cfg.outputs.contains(&OutputKind::Trajectories) {
        let traj = simulate_path_opts(
            &spec,
            cfg.t_end,
            cfg.dt,
            cfg.seed,
            0,
            SimOptions {
                keep_increments: opts.keep_increments,
            },
        )?;
        let grid = traj.clock().real_grid();
        let e = traj.clock().e_values();
        let mut rows = Vec::with_capacity(grid.len());
        if let (true, Some(incs)) = (opts.keep_increments, traj.increments()) {
            for j in 0..grid.len() {
                let (db, de, ns, nl) = if j == 0 {
                    (0.0, 0.0, 0, 0)
                } else {
                    let inc = &incs[j - 1];
                    (
                        inc.d_b,
                        inc.d_e,
                        inc.small_marks.len(),
                        inc.large_marks.len(),
                    )
                };
                rows.push(format!(
                    "{},{},{},{},{},{},{}",
                    csv_float(grid[j]),
                    csv_float(e[j]),
                    csv_float(traj.x_values()[j]),
                    csv_float(db),
                    csv_float(de),
                    ns,
                    nl
                ));
            }
            artifacts.write_csv("trajectory.csv", "t,E_t,X_t,dB,dE,n_small,n_large", &rows)?;
        } else {
            for j in 0..grid.len() {
                rows.push(format!(
                    "{},{},{}",
                    csv_float(grid[j]),
                    csv_float(e[j]),
                    csv_float(traj.x_values()[j])
                ));
            }
            artifacts.write_csv("trajectory.csv", "t,E_t,X_t", &rows)?;
        }
        let real_rows: Vec<String> = grid
            .iter()
            .zip(e)
            .map(|(t, e)| format!("{},{}", csv_float(*t), csv_float(*e)))
            .collect();
        artifacts.write_csv("clock_real.csv", "t,E_t", &real_rows)?;
        let op_rows: Vec<String> = traj
            .clock()
            .d_values()
            .iter()
            .enumerate()
            .map(|(k, d)| {
                format!(
                    "{},{}",
                    csv_float(k as f64 * traj.clock().op_step()),
                    csv_float(*d)
                )
            })
            .collect();
        artifacts.write_csv("clock_op.csv", "tau,D_tau", &op_rows)?;
    }

    if cfg.outputs.contains(&OutputKind::Lyapunov) {
        // One pass over the ensemble: limsup estimates on both clocks plus
        // floor-event counts.
        let per_path = ensemble_map(
            &spec,
            cfg.t_end,
            cfg.dt,
            cfg.seed,
            cfg.n_paths,
            SimOptions::default(),
            |traj| {
                let real = lyapunov_series(traj, ClockScale::Real)
                    .and_then(|s| estimate_limsup(&s, cfg.tail_fraction))
                    .ok();
                let op = lyapunov_series(traj, ClockScale::Operational)
                    .and_then(|s| estimate_limsup(&s, cfg.tail_fraction))
                    .ok();
                (traj.path_index(), real, op, traj.floor_events().len())
            },
        )?;
        let rows: Vec<String> = per_path
            .iter()
            .map(|(idx, real, op, _)| {
                format!("{idx},{},{}", csv_opt_float(*real), csv_opt_float(*op))
            })
            .collect();
        artifacts.write_csv(
            "estimates.csv",
            "path_index,real_estimate,op_estimate",
            &rows,
        )?;

        let reals: Vec<f64> = per_path.iter().filter_map(|p| p.1).collect();
        let ops: Vec<f64> = per_path.iter().filter_map(|p| p.2).collect();
        let median_real = (!reals.is_empty()).then(|| median_of(reals));
        let median_op = (!ops.is_empty()).then(|| median_of(ops));
        let floor_paths = per_path.iter().filter(|p| p.3 > 0).count();
        let v = classify(median_real, median_op, cfg.margin);
        verdict = Some(v);

        // Path 0 ratio series on both clocks, then the figure plots.
        let traj0 =
            simulate_path_opts(&spec, cfg.t_end, cfg.dt, cfg.seed, 0, SimOptions::default())?;
        for (scale, csv_name, svg_name, label) in [
            (
                ClockScale::Real,
                "lyapunov_real.csv",
                "ratio_real.svg",
                "log|X(t)| / t",
            ),
            (
                ClockScale::Operational,
                "lyapunov_operational.csv",
                "ratio_operational.svg",
                "log|X(t)| / E_t",
            ),
        ] {
            let series = match lyapunov_series(&traj0, scale) {
                Ok(s) => s,
                Err(e) => {
                    summary.push(format!("ratio series on {csv_name} unavailable: {e}"));
                    continue;
                }
            };
            let rows: Vec<String> = series
                .times()
                .iter()
                .zip(series.ratios())
                .map(|(t, r)| format!("{},{}", csv_float(*t), csv_opt_float(*r)))
                .collect();
            let path = artifacts.write_csv(csv_name, "t,ratio", &rows)?;
            let csv_text = std::fs::read_to_string(&path)?;
            let title = match (&cfg.example, scale) {
                (Some(id), ClockScale::Real) => format!("{id}: log|X(t)|/t"),
                (Some(id), ClockScale::Operational) => format!("{id}: log|X(t)|/E_t"),
                (None, ClockScale::Real) => "log|X(t)|/t".to_string(),
                (None, ClockScale::Operational) => "log|X(t)|/E_t".to_string(),
            };
            let svg = plot_csv_series(
                &[csv_text.as_str()],
                &PlotSpec {
                    title: &title,
                    x_label: "t",
                    y_label: label,
                },
            )?;
            artifacts.write_raw(svg_name, svg.as_bytes())?;
        }

        let mut report = vec![
            format!("n_paths = {}", cfg.n_paths),
            format!("horizon_t = {}", cfg.t_end),
            format!("dt = {}", cfg.dt),
            format!("tail_fraction = {}", cfg.tail_fraction),
            format!("margin = {}", cfg.margin),
            format!("median_real_estimate = {}", fmt_opt(median_real)),
            format!("median_operational_estimate = {}", fmt_opt(median_op)),
            format!("paths_with_floor_events = {floor_paths}"),
            format!("verdict = {v}"),
        ];
        if let Some(ex) = &example {
            report.insert(0, format!("example = {}", ex.id));
            report.insert(1, format!("summary = {}", ex.summary));
            report.insert(
                2,
                format!(
                    "figure_clock = {}",
                    match ex.figure_clock {
                        ClockScale::Real => "real",
                        ClockScale::Operational => "operational",
                    }
                ),
            );
            if let Some(note) = ex.note {
                report.push(format!("note = {note}"));
            }
        }
        artifacts.write_report("stability_report.txt", &report)?;
        summary.push(format!(
            "lyapunov: median real {} / operational {} -> {v}",
            fmt_opt(median_real),
            fmt_opt(median_op)
        ));
    }

    if cfg.outputs.contains(&OutputKind::Criteria) && cfg.theorem != TheoremChoice::None {
        let grid = DomainGrid::standard();
        let pins = example.as_ref().map(|ex| &ex.pins);
        let report: CriteriaReport = match cfg.theorem {
            TheoremChoice::General => {
                let v = LyapunovFunctionSpec::power(cfg.v_power)?;
                evaluate_theorem_general(&spec, &v, &grid, pins)?
            }
            TheoremChoice::Linear => evaluate_theorem_linear(&spec, &grid, pins)?,
            TheoremChoice::Combined => evaluate_theorem_combined(&spec, &grid, pins)?,
            TheoremChoice::None => unreachable!(),
        };
        criteria_verdict = Some(report.verdict);
        let rows: Vec<String> = report
            .constants
            .iter()
            .map(|c| format!("{},{},\"{}\"", c.name, csv_float(c.value), c.where_attained))
            .collect();
        artifacts.write_csv("criteria_constants.csv", "name,value,where_attained", &rows)?;

        let assumptions = check_standing_assumptions(&spec, &grid)?;
        let mut lines = vec![
            format!("theorem = {}", report.theorem.label()),
            format!("bound = {}", csv_float(report.bound)),
            format!("verdict = {}", report.verdict),
            format!("hypothesis_ok = {}", report.hypothesis_ok),
            format!("domain = {}", report.domain),
        ];
        for c in &report.constants {
            lines.push(format!(
                "constant.{} = {}{}",
                c.name,
                csv_float(c.value),
                if c.pinned { "  (pinned)" } else { "" }
            ));
        }
        for (i, w) in report.warnings.iter().enumerate() {
            lines.push(format!("warning.{} = {w}", i + 1));
        }
        for check in &assumptions.checks {
            lines.push(format!(
                "assumption.{} = {}{}",
                check.name,
                if check.passed { "pass" } else { "FAIL" },
                check
                    .witness
                    .as_ref()
                    .map(|w| format!("  ({w})"))
                    .unwrap_or_else(|| format!("  (constant {:.6e})", check.constant)),
            ));
        }
        artifacts.write_report("criteria_report.txt", &lines)?;
        summary.push(format!(
            "criteria[{}]: bound {:.6} -> {}",
            report.theorem.label(),
            report.bound,
            report.verdict
        ));
    }

    if cfg.outputs.contains(&OutputKind::MartingaleCheck) {
        let clock = martingale_clock(&cfg.clock.to_clock_spec()?);
        let check = martingale_inequality_check(
            &time_fn(|_| 1.0),
            &time_mark_fn(|_, _| 0.0),
            &clock,
            spec.noise(),
            &MartingaleCheckParams {
                lambda: 1.0,
                kappa: 2.0,
                t_end: 10.0,
                dt: 0.01,
                n_paths: 2000,
                seed: cfg.seed,
            },
        )?;
        artifacts.write_report(
            "martingale.txt",
            &[
                "functional = sup_t [ int g dB_E - (lambda/2) int g^2 dE ] with g = 1".into(),
                "lambda = 1".into(),
                "kappa = 2".into(),
                format!("empirical_exceedance = {}", csv_float(check.empirical)),
                format!("bound = {}", csv_float(check.bound)),
                format!("std_err = {}", csv_float(check.std_err)),
                format!("n_paths = {}", check.n_paths),
                format!("passes = {}", check.passes),
            ],
        )?;
        summary.push(format!(
            "martingale: empirical {:.4} vs bound {:.4} ({})",
            check.empirical,
            check.bound,
            if check.passes { "pass" } else { "FAIL" }
        ));
    }

    if cfg.outputs.contains(&OutputKind::SllnCheck) {
        let clock = slln_clock(&cfg.clock.to_clock_spec()?);
        let report = check_slln(&clock, &SLLN_GRID, cfg.n_paths, cfg.seed)?;
        let rows: Vec<String> = report
            .t_grid
            .iter()
            .zip(report.means.iter().zip(&report.medians))
            .map(|(t, (mean, median))| {
                format!(
                    "{},{},{}",
                    csv_float(*t),
                    csv_float(*mean),
                    csv_float(*median)
                )
            })
            .collect();
        artifacts.write_csv("slln.csv", "t,mean_ratio,median_ratio", &rows)?;
        summary.push(format!(
            "slln: median E_t/t at t = 1e4 is {:.4} (decay flag {})",
            report.medians.last().unwrap(),
            report.decay_flag
        ));
    }

    let manifest = artifacts.finish()?;
    Ok(RunOutcome {
        out_dir: cfg.out_dir.clone(),
        manifest,
        verdict,
        criteria_verdict,
        summary,
    })
}

/// The in-run SLLN sweep reuses the configured law but at a coarser
/// operational step; the decade medians are insensitive to it.
fn slln_clock(clock: &ClockSpec) -> ClockSpec {
    match clock {
        ClockSpec::Identity => ClockSpec::Identity,
        ClockSpec::Inverse { spec, .. } => ClockSpec::Inverse {
            spec: spec.clone(),
            op_step: SLLN_OP_STEP,
        },
    }
}

fn martingale_clock(clock: &ClockSpec) -> ClockSpec {
    match clock {
        ClockSpec::Identity => ClockSpec::Identity,
        ClockSpec::Inverse { spec, .. } => ClockSpec::Inverse {
            spec: spec.clone(),
            op_step: 1e-3,
        },
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}"))
        .unwrap_or_else(|| "absent".into())
}
