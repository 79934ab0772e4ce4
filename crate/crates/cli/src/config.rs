//! Flat `key = value` experiment configs with dotted keys.
//!
//! The format is diff-friendly: one key per line, `#` comments, no nesting.
//! Coefficients come from a small closed set of forms (see [`CoeffForm`]
//! and [`MarkForm`]); registered examples prefill every key and explicit
//! keys override them. `render` emits the resolved config in canonical key
//! order, and `parse(render(c))` reproduces `c` exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use pathstab_core::levy::{LevyMeasureSpec, MeasureKind, TabulatedDensity};
use pathstab_core::sde::{coeff, mark_fn, Coeff, JumpForm, MarkFn, SdeSpec};
use pathstab_core::subordinator::{ClockSpec, SubordinatorSpec};

/// Real/operational coefficient families `(t, e, x) -> value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoeffForm {
    Zero,
    /// `a`
    Const(f64),
    /// `a x`
    Linear(f64),
    /// `a sign(x) |x|^p`
    Power {
        scale: f64,
        exponent: f64,
    },
    /// `a sin(x) x`
    SineLinear(f64),
    /// `a x / (1 + e)`
    OpDecay(f64),
}

impl CoeffForm {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| -> Result<f64> {
            p.parse::<f64>()
                .map_err(|_| anyhow!("bad number {p:?} in coefficient {s:?}"))
        };
        match parts.as_slice() {
            ["zero"] => Ok(CoeffForm::Zero),
            ["const", a] => Ok(CoeffForm::Const(num(a)?)),
            ["lin", a] => Ok(CoeffForm::Linear(num(a)?)),
            ["pow", a, p] => Ok(CoeffForm::Power {
                scale: num(a)?,
                exponent: num(p)?,
            }),
            ["sinx", a] => Ok(CoeffForm::SineLinear(num(a)?)),
            ["edecay", a] => Ok(CoeffForm::OpDecay(num(a)?)),
            _ => bail!(
                "unknown coefficient form {s:?} (expected zero | const:a | lin:a | pow:a:p | \
                 sinx:a | edecay:a)"
            ),
        }
    }

    pub fn to_coeff(self) -> Coeff {
        match self {
            CoeffForm::Zero => coeff(|_, _, _| 0.0),
            CoeffForm::Const(a) => coeff(move |_, _, _| a),
            CoeffForm::Linear(a) => coeff(move |_, _, x| a * x),
            CoeffForm::Power { scale, exponent } => {
                coeff(move |_, _, x: f64| scale * x.signum() * x.abs().powf(exponent))
            }
            CoeffForm::SineLinear(a) => coeff(move |_, _, x: f64| a * x.sin() * x),
            CoeffForm::OpDecay(a) => coeff(move |_, e, x| a * x / (1.0 + e)),
        }
    }
}

impl fmt::Display for CoeffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffForm::Zero => write!(f, "zero"),
            CoeffForm::Const(a) => write!(f, "const:{a}"),
            CoeffForm::Linear(a) => write!(f, "lin:{a}"),
            CoeffForm::Power { scale, exponent } => write!(f, "pow:{scale}:{exponent}"),
            CoeffForm::SineLinear(a) => write!(f, "sinx:{a}"),
            CoeffForm::OpDecay(a) => write!(f, "edecay:{a}"),
        }
    }
}

/// Jump scaling families `y -> h(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarkForm {
    Zero,
    /// `a`
    Const(f64),
    /// `a y`
    Linear(f64),
    /// `a y^2`
    Quadratic(f64),
}

impl MarkForm {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| -> Result<f64> {
            p.parse::<f64>()
                .map_err(|_| anyhow!("bad number {p:?} in jump form {s:?}"))
        };
        match parts.as_slice() {
            ["zero"] => Ok(MarkForm::Zero),
            ["const", a] => Ok(MarkForm::Const(num(a)?)),
            ["lin", a] => Ok(MarkForm::Linear(num(a)?)),
            ["quad", a] => Ok(MarkForm::Quadratic(num(a)?)),
            _ => bail!("unknown jump form {s:?} (expected zero | const:a | lin:a | quad:a)"),
        }
    }

    pub fn to_mark_fn(self) -> MarkFn {
        match self {
            MarkForm::Zero => mark_fn(|_| 0.0),
            MarkForm::Const(a) => mark_fn(move |_| a),
            MarkForm::Linear(a) => mark_fn(move |y| a * y),
            MarkForm::Quadratic(a) => mark_fn(move |y| a * y * y),
        }
    }
}

impl fmt::Display for MarkForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkForm::Zero => write!(f, "zero"),
            MarkForm::Const(a) => write!(f, "const:{a}"),
            MarkForm::Linear(a) => write!(f, "lin:{a}"),
            MarkForm::Quadratic(a) => write!(f, "quad:{a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClockConfig {
    Stable {
        alpha: f64,
        delta: f64,
    },
    Mixture {
        weights: Vec<f64>,
        indices: Vec<f64>,
        delta: f64,
    },
    Identity,
}

impl ClockConfig {
    pub fn to_clock_spec(&self) -> Result<ClockSpec> {
        Ok(match self {
            ClockConfig::Identity => ClockSpec::Identity,
            ClockConfig::Stable { alpha, delta } => ClockSpec::Inverse {
                spec: SubordinatorSpec::stable(*alpha)?,
                op_step: *delta,
            },
            ClockConfig::Mixture {
                weights,
                indices,
                delta,
            } => {
                if weights.len() != indices.len() {
                    bail!("clock.weights and clock.indices must have equal length");
                }
                let comps: Vec<(f64, f64)> = weights
                    .iter()
                    .copied()
                    .zip(indices.iter().copied())
                    .collect();
                ClockSpec::Inverse {
                    spec: SubordinatorSpec::mixture(&comps)?,
                    op_step: *delta,
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseConfig {
    Normal { c: f64 },
    Uniform01 { c: f64 },
    Table { c: f64, path: PathBuf },
}

impl NoiseConfig {
    pub fn cutoff(&self) -> f64 {
        match self {
            NoiseConfig::Normal { c }
            | NoiseConfig::Uniform01 { c }
            | NoiseConfig::Table { c, .. } => *c,
        }
    }

    pub fn to_measure(&self) -> Result<LevyMeasureSpec> {
        Ok(match self {
            NoiseConfig::Normal { c } => LevyMeasureSpec::std_normal(*c)?,
            NoiseConfig::Uniform01 { c } => LevyMeasureSpec::uniform01(*c)?,
            NoiseConfig::Table { c, path } => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading density table {}", path.display()))?;
                LevyMeasureSpec::new(
                    MeasureKind::Tabulated(TabulatedDensity::from_csv(&text)?),
                    *c,
                )?
            }
        })
    }
}

/// SDE coefficient block.
#[derive(Debug, Clone, PartialEq)]
pub struct SdeConfig {
    pub x0: f64,
    pub t0: f64,
    /// `None` means no dt drift, structurally.
    pub f: Option<CoeffForm>,
    pub k: CoeffForm,
    pub g: CoeffForm,
    pub jump_small: Option<MarkForm>,
    pub jump_large: Option<MarkForm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremChoice {
    None,
    General,
    Linear,
    Combined,
}

impl TheoremChoice {
    fn as_str(&self) -> &'static str {
        match self {
            TheoremChoice::None => "none",
            TheoremChoice::General => "general",
            TheoremChoice::Linear => "linear",
            TheoremChoice::Combined => "combined",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => TheoremChoice::None,
            "general" => TheoremChoice::General,
            "linear" => TheoremChoice::Linear,
            "combined" => TheoremChoice::Combined,
            _ => bail!("unknown criteria.theorem {s:?}"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutputKind {
    Trajectories,
    Lyapunov,
    Criteria,
    MartingaleCheck,
    SllnCheck,
}

impl OutputKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutputKind::Trajectories => "trajectories",
            OutputKind::Lyapunov => "lyapunov",
            OutputKind::Criteria => "criteria",
            OutputKind::MartingaleCheck => "martingale-check",
            OutputKind::SllnCheck => "slln-check",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "trajectories" => OutputKind::Trajectories,
            "lyapunov" => OutputKind::Lyapunov,
            "criteria" => OutputKind::Criteria,
            "martingale-check" => OutputKind::MartingaleCheck,
            "slln-check" => OutputKind::SllnCheck,
            _ => bail!("unknown output kind {s:?}"),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub example: Option<String>,
    pub seed: u64,
    pub n_paths: usize,
    pub t_end: f64,
    pub dt: f64,
    pub clock: ClockConfig,
    pub noise: NoiseConfig,
    pub sde: SdeConfig,
    pub theorem: TheoremChoice,
    pub v_power: f64,
    pub tail_fraction: f64,
    pub margin: f64,
    pub outputs: Vec<OutputKind>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            example: None,
            seed: 1,
            n_paths: 200,
            t_end: 50.0,
            dt: 0.01,
            clock: ClockConfig::Stable {
                alpha: 0.8,
                delta: 1e-3,
            },
            noise: NoiseConfig::Normal { c: 1.0 },
            sde: SdeConfig {
                x0: 1.0,
                t0: 0.0,
                f: None,
                k: CoeffForm::Zero,
                g: CoeffForm::Zero,
                jump_small: None,
                jump_large: None,
            },
            theorem: TheoremChoice::None,
            v_power: 2.0,
            tail_fraction: 0.2,
            margin: 0.05,
            outputs: vec![
                OutputKind::Trajectories,
                OutputKind::Lyapunov,
                OutputKind::Criteria,
            ],
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("bad number {p:?} in list"))
        })
        .collect()
}

fn join_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl ExperimentConfig {
    /// Parse `key = value` text. Keys may arrive in any order; an `example`
    /// key prefills the config and every other key overrides it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value, got {raw:?}", lineno + 1))?;
            pairs.insert(key.trim().to_string(), value.trim().to_string());
        }
        Self::from_pairs(&pairs)
    }

    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = match pairs.get("example") {
            Some(id) => {
                let mut base = crate::examples::registered(id)
                    .ok_or_else(|| {
                        anyhow!(
                            "example: unknown id {id:?}; registered: {}",
                            crate::examples::registered_ids().join(", ")
                        )
                    })?
                    .config();
                base.example = Some(id.clone());
                base
            }
            None => ExperimentConfig::default(),
        };
        let num = |key: &str, v: &String| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| anyhow!("{key}: bad number {v:?}"))
        };
        // Mixture clock keys arrive as up to three separate entries.
        let mut mix_weights: Option<Vec<f64>> = None;
        let mut mix_indices: Option<Vec<f64>> = None;
        for (key, value) in pairs {
            match key.as_str() {
                "example" => {}
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| anyhow!("seed: bad integer {value:?}"))?
                }
                "paths" => {
                    cfg.n_paths = value
                        .parse()
                        .map_err(|_| anyhow!("paths: bad integer {value:?}"))?
                }
                "horizon.t" => cfg.t_end = num(key, value)?,
                "horizon.dt" => cfg.dt = num(key, value)?,
                "clock.kind" => {
                    cfg.clock = match value.as_str() {
                        "identity" => ClockConfig::Identity,
                        "stable" => match cfg.clock {
                            ClockConfig::Stable { .. } => cfg.clock,
                            _ => ClockConfig::Stable {
                                alpha: 0.8,
                                delta: 1e-3,
                            },
                        },
                        "mixture" => match cfg.clock {
                            ClockConfig::Mixture { .. } => cfg.clock,
                            _ => ClockConfig::Mixture {
                                weights: vec![1.0],
                                indices: vec![0.8],
                                delta: 1e-3,
                            },
                        },
                        other => bail!("clock.kind: unknown kind {other:?}"),
                    }
                }
                "clock.alpha" => {
                    let alpha = num(key, value)?;
                    cfg.clock = match cfg.clock {
                        ClockConfig::Stable { delta, .. } => ClockConfig::Stable { alpha, delta },
                        other => other,
                    };
                    if matches!(
                        cfg.clock,
                        ClockConfig::Identity | ClockConfig::Mixture { .. }
                    ) {
                        // alpha on a non-stable clock re-types it.
                        let delta = match &cfg.clock {
                            ClockConfig::Mixture { delta, .. } => *delta,
                            _ => 1e-3,
                        };
                        cfg.clock = ClockConfig::Stable { alpha, delta };
                    }
                }
                "clock.delta" => {
                    let d = num(key, value)?;
                    cfg.clock = match cfg.clock {
                        ClockConfig::Stable { alpha, .. } => {
                            ClockConfig::Stable { alpha, delta: d }
                        }
                        ClockConfig::Mixture {
                            weights, indices, ..
                        } => ClockConfig::Mixture {
                            weights,
                            indices,
                            delta: d,
                        },
                        ClockConfig::Identity => ClockConfig::Identity,
                    };
                }
                "clock.weights" => mix_weights = Some(parse_list(value).context("clock.weights")?),
                "clock.indices" => mix_indices = Some(parse_list(value).context("clock.indices")?),
                "noise.kind" => {
                    let c = cfg.noise.cutoff();
                    cfg.noise = match value.as_str() {
                        "normal" => NoiseConfig::Normal { c },
                        "uniform01" => NoiseConfig::Uniform01 { c },
                        "table" => NoiseConfig::Table {
                            c,
                            path: PathBuf::new(),
                        },
                        other => bail!("noise.kind: unknown kind {other:?}"),
                    };
                }
                "noise.c" => {
                    let c = num(key, value)?;
                    cfg.noise = match cfg.noise {
                        NoiseConfig::Normal { .. } => NoiseConfig::Normal { c },
                        NoiseConfig::Uniform01 { .. } => NoiseConfig::Uniform01 { c },
                        NoiseConfig::Table { path, .. } => NoiseConfig::Table { c, path },
                    };
                }
                "noise.table" => {
                    cfg.noise = NoiseConfig::Table {
                        c: cfg.noise.cutoff(),
                        path: PathBuf::from(value),
                    };
                }
                "sde.x0" => cfg.sde.x0 = num(key, value)?,
                "sde.t0" => cfg.sde.t0 = num(key, value)?,
                "sde.f" => {
                    cfg.sde.f = if value == "none" {
                        None
                    } else {
                        Some(CoeffForm::parse(value).context("sde.f")?)
                    }
                }
                "sde.k" => cfg.sde.k = CoeffForm::parse(value).context("sde.k")?,
                "sde.g" => cfg.sde.g = CoeffForm::parse(value).context("sde.g")?,
                "sde.jump.small" => {
                    cfg.sde.jump_small = if value == "none" {
                        None
                    } else {
                        Some(MarkForm::parse(value).context("sde.jump.small")?)
                    }
                }
                "sde.jump.large" => {
                    cfg.sde.jump_large = if value == "none" {
                        None
                    } else {
                        Some(MarkForm::parse(value).context("sde.jump.large")?)
                    }
                }
                "criteria.theorem" => cfg.theorem = TheoremChoice::parse(value)?,
                "criteria.v_power" => cfg.v_power = num(key, value)?,
                "tail_fraction" => cfg.tail_fraction = num(key, value)?,
                "margin" => cfg.margin = num(key, value)?,
                "outputs" => {
                    let mut outs = Vec::new();
                    for part in value.split(',') {
                        let part = part.trim();
                        if !part.is_empty() {
                            outs.push(OutputKind::parse(part)?);
                        }
                    }
                    outs.sort();
                    outs.dedup();
                    cfg.outputs = outs;
                }
                "output.dir" => cfg.out_dir = PathBuf::from(value),
                other => bail!("unknown config key {other:?}"),
            }
        }
        if mix_weights.is_some() || mix_indices.is_some() {
            let delta = match &cfg.clock {
                ClockConfig::Stable { delta, .. } | ClockConfig::Mixture { delta, .. } => *delta,
                ClockConfig::Identity => 1e-3,
            };
            let (weights, indices) = match (&cfg.clock, mix_weights, mix_indices) {
                (_, Some(w), Some(i)) => (w, i),
                (ClockConfig::Mixture { weights, .. }, None, Some(i)) => (weights.clone(), i),
                (ClockConfig::Mixture { indices, .. }, Some(w), None) => (w, indices.clone()),
                _ => bail!("clock.weights and clock.indices must be given together"),
            };
            cfg.clock = ClockConfig::Mixture {
                weights,
                indices,
                delta,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            bail!("paths: need at least one path");
        }
        if !(self.t_end > self.sde.t0) {
            bail!("horizon.t: horizon must exceed sde.t0");
        }
        if !(self.dt > 0.0) {
            bail!("horizon.dt: step must be positive");
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            bail!("tail_fraction: must lie in (0, 1]");
        }
        if self.margin < 0.0 {
            bail!("margin: must be nonnegative");
        }
        if self.sde.x0 == 0.0 {
            bail!("sde.x0: initial condition must be nonzero");
        }
        if self.sde.jump_large.is_some() && self.sde.jump_small.is_none() {
            bail!("sde.jump.large: large jumps require a small-jump form (use zero)");
        }
        if let NoiseConfig::Table { path, .. } = &self.noise {
            if path.as_os_str().is_empty() {
                bail!("noise.table: a table path is required for noise.kind = table");
            }
        }
        Ok(())
    }

    /// Canonical resolved serialization; parsing it reproduces the config.
    pub fn render(&self) -> String {
        let mut lines: Vec<String> = Vec::new();
        if let Some(example) = &self.example {
            lines.push(format!("example = {example}"));
        }
        lines.push(format!("seed = {}", self.seed));
        lines.push(format!("paths = {}", self.n_paths));
        lines.push(format!("horizon.t = {}", self.t_end));
        lines.push(format!("horizon.dt = {}", self.dt));
        match &self.clock {
            ClockConfig::Identity => lines.push("clock.kind = identity".into()),
            ClockConfig::Stable { alpha, delta } => {
                lines.push("clock.kind = stable".into());
                lines.push(format!("clock.alpha = {alpha}"));
                lines.push(format!("clock.delta = {delta}"));
            }
            ClockConfig::Mixture {
                weights,
                indices,
                delta,
            } => {
                lines.push("clock.kind = mixture".into());
                lines.push(format!("clock.weights = {}", join_list(weights)));
                lines.push(format!("clock.indices = {}", join_list(indices)));
                lines.push(format!("clock.delta = {delta}"));
            }
        }
        match &self.noise {
            NoiseConfig::Normal { c } => {
                lines.push("noise.kind = normal".into());
                lines.push(format!("noise.c = {c}"));
            }
            NoiseConfig::Uniform01 { c } => {
                lines.push("noise.kind = uniform01".into());
                lines.push(format!("noise.c = {c}"));
            }
            NoiseConfig::Table { c, path } => {
                lines.push("noise.kind = table".into());
                lines.push(format!("noise.c = {c}"));
                lines.push(format!("noise.table = {}", path.display()));
            }
        }
        lines.push(format!("sde.x0 = {}", self.sde.x0));
        lines.push(format!("sde.t0 = {}", self.sde.t0));
        lines.push(format!(
            "sde.f = {}",
            self.sde.f.map_or("none".to_string(), |f| f.to_string())
        ));
        lines.push(format!("sde.k = {}", self.sde.k));
        lines.push(format!("sde.g = {}", self.sde.g));
        lines.push(format!(
            "sde.jump.small = {}",
            self.sde
                .jump_small
                .map_or("none".to_string(), |f| f.to_string())
        ));
        lines.push(format!(
            "sde.jump.large = {}",
            self.sde
                .jump_large
                .map_or("none".to_string(), |f| f.to_string())
        ));
        lines.push(format!("criteria.theorem = {}", self.theorem.as_str()));
        lines.push(format!("criteria.v_power = {}", self.v_power));
        lines.push(format!("tail_fraction = {}", self.tail_fraction));
        lines.push(format!("margin = {}", self.margin));
        lines.push(format!(
            "outputs = {}",
            self.outputs
                .iter()
                .map(|o| o.as_str())
                .collect::<Vec<_>>()
                .join(",")
        ));
        lines.push(format!("output.dir = {}", self.out_dir.display()));
        lines.join("\n") + "\n"
    }

    /// Build the core SDE spec this config describes.
    pub fn to_sde_spec(&self) -> Result<SdeSpec> {
        let clock = self.clock.to_clock_spec()?;
        let noise = self.noise.to_measure()?;
        let jumps = match (&self.sde.jump_small, &self.sde.jump_large) {
            (None, None) => JumpForm::None,
            (Some(s), large) => JumpForm::Linear {
                small: s.to_mark_fn(),
                large: large.map(|l| l.to_mark_fn()),
            },
            (None, Some(_)) => bail!("large jumps require a small-jump form"),
        };
        let mut builder = SdeSpec::builder(self.sde.x0, clock, noise)
            .t0(self.sde.t0)
            .op_drift(self.sde.k.to_coeff())
            .diffusion(self.sde.g.to_coeff())
            .jumps(jumps);
        if let Some(f) = self.sde.f {
            builder = builder.drift(f.to_coeff());
        }
        Ok(builder.build()?)
    }

    /// Hash of the canonical rendering, for provenance lines.
    pub fn digest(&self) -> String {
        crate::artifacts::sha256_hex(self.render().as_bytes())
    }
}
