//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use balred::reducers::TsiaConfig;
use balred::system::DEFAULT_DENSE_CAP;
use balred::{AlrsConfig, AtiaConfig, ModelSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    SolveLyap,
    AtiaBt,
    DenseBt,
    Tcr,
    Tor,
    Tsia,
    Compare,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::SolveLyap => "solve-lyap",
            Task::AtiaBt => "atia-bt",
            Task::DenseBt => "dense-bt",
            Task::Tcr => "tcr",
            Task::Tor => "tor",
            Task::Tsia => "tsia",
            Task::Compare => "compare",
        }
    }

    fn uses_adaptive(self) -> bool {
        matches!(self, Task::SolveLyap | Task::AtiaBt | Task::Compare)
    }

    fn uses_order(self) -> bool {
        matches!(self, Task::DenseBt | Task::Tcr | Task::Tor | Task::Tsia)
    }

    fn needs_dense(self) -> bool {
        !matches!(self, Task::SolveLyap | Task::AtiaBt)
    }
}

/// Algorithm parameters; which ones are allowed depends on the task.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub r0: Option<usize>,
    pub dr: Option<usize>,
    pub tol: Option<f64>,
    pub stage_tol: Option<f64>,
    pub i_max: Option<usize>,
    pub k_max: Option<usize>,
    /// Fixed reduced order for dense-bt, tcr, tor and tsia.
    pub r: Option<usize>,
    /// Tolerances swept by compare.
    pub tols: Option<Vec<f64>>,
    pub max_iter: Option<usize>,
    pub conv_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Option<Task>,
    pub model: ModelSpec,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub dense_cap: Option<usize>,
    #[serde(default)]
    pub params: Params,
}

/// Configuration after overrides, defaults and validation.
#[derive(Clone, Debug, Serialize)]
pub struct Resolved {
    pub task: Task,
    pub model: ModelSpec,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub dense_cap: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tols: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alrs: Option<AlrsConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atia: Option<AtiaConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tsia: Option<TsiaConfig>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub task: Option<Task>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

/// 1-based line of the byte offset `pos` in `text`.
fn line_at(text: &str, pos: usize) -> usize {
    text[..pos.min(text.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

/// First line that assigns `key`, or the first line of the file.
fn line_of_key(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let t = l.trim_start();
            t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(1, |i| i + 1)
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<Resolved, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        line: e.span().map_or(1, |s| line_at(&text, s.start)),
        msg: e.message().trim().to_string(),
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    resolve(cfg, overrides, &base).map_err(|(key, msg)| CliError::Config {
        path: path.to_path_buf(),
        line: line_of_key(&text, key),
        msg,
    })
}

type Invalid = (&'static str, String);

fn forbid<T>(value: &Option<T>, key: &'static str, task: Task) -> Result<(), Invalid> {
    match value {
        Some(_) => Err((key, format!("parameter `{key}` is not used by task {}", task.name()))),
        None => Ok(()),
    }
}

fn resolve(cfg: ExperimentConfig, overrides: &Overrides, base: &Path) -> Result<Resolved, Invalid> {
    let task = match (overrides.task, cfg.task) {
        (Some(o), Some(t)) if o != t => {
            return Err(("task", format!("task {} cannot be run by the {} command", t.name(), o.name())));
        }
        (Some(t), _) | (None, Some(t)) => t,
        (None, None) => return Err(("task", "missing key `task`".into())),
    };
    let model = match cfg.model {
        ModelSpec::MatrixMarket { a, b, c } => {
            ModelSpec::MatrixMarket { a: base.join(a), b: base.join(b), c: base.join(c) }
        }
        other => other,
    };
    model.validate().map_err(|e| ("kind", e.to_string()))?;
    let dense_cap = cfg.dense_cap.unwrap_or(DEFAULT_DENSE_CAP);
    if dense_cap == 0 || dense_cap > DEFAULT_DENSE_CAP {
        return Err(("dense_cap", format!("dense_cap must lie in 1..={DEFAULT_DENSE_CAP}")));
    }
    if task.needs_dense() {
        if let Some(n) = model.state_dim() {
            if n > dense_cap {
                return Err((
                    "n",
                    format!("task {} needs dense Gramians but n = {n} exceeds dense_cap {dense_cap}", task.name()),
                ));
            }
        }
    }
    let seed = overrides.seed.or(cfg.seed).unwrap_or(0);
    let output_dir =
        overrides.output_dir.clone().or(cfg.output_dir.map(|d| base.join(d))).unwrap_or_else(|| "results".into());
    let p = cfg.params;

    let mut resolved =
        Resolved { task, model, seed, output_dir, dense_cap, r: None, tols: None, alrs: None, atia: None, tsia: None };
    if task.uses_adaptive() {
        forbid(&p.r, "r", task)?;
    } else {
        for (v, key) in [(&p.r0, "r0"), (&p.dr, "dr"), (&p.i_max, "i_max"), (&p.k_max, "k_max")] {
            forbid(v, key, task)?;
        }
        forbid(&p.tol, "tol", task)?;
        forbid(&p.stage_tol, "stage_tol", task)?;
    }
    if task != Task::Compare {
        forbid(&p.tols, "tols", task)?;
    }
    if task != Task::Tsia {
        forbid(&p.max_iter, "max_iter", task)?;
        forbid(&p.conv_tol, "conv_tol", task)?;
    }
    if task.uses_order() {
        let r = p.r.ok_or(("r", format!("task {} needs the reduced order `r`", task.name())))?;
        if r == 0 || resolved.model.state_dim().is_some_and(|n| r > n) {
            return Err(("r", format!("order r = {r} outside 1..=n")));
        }
        resolved.r = Some(r);
    }
    match task {
        Task::SolveLyap => {
            let d = AlrsConfig::default();
            let c = AlrsConfig {
                r0: p.r0.unwrap_or(d.r0),
                dr: p.dr.unwrap_or(d.dr),
                tol: p.tol.unwrap_or(d.tol),
                stage_tol: p.stage_tol,
                i_max: p.i_max.unwrap_or(d.i_max),
                k_max: p.k_max.unwrap_or(d.k_max),
                seed,
            };
            c.validate().map_err(|e| ("tol", e.to_string()))?;
            resolved.alrs = Some(c);
        }
        Task::AtiaBt | Task::Compare => {
            let d = AtiaConfig::default();
            let c = AtiaConfig {
                r0: p.r0.unwrap_or(d.r0),
                dr: p.dr.unwrap_or(d.dr),
                tol: p.tol.unwrap_or(d.tol),
                stage_tol: p.stage_tol,
                i_max: p.i_max.unwrap_or(d.i_max),
                k_max: p.k_max.unwrap_or(d.k_max),
                seed,
            };
            c.validate().map_err(|e| ("tol", e.to_string()))?;
            if task == Task::Compare {
                forbid(&p.tol, "tol", task)?;
                let tols = p.tols.ok_or(("tols", "task compare needs a non-empty list `tols`".to_string()))?;
                if tols.is_empty() || tols.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
                    return Err(("tols", "`tols` must be a non-empty list of values in (0, 1)".into()));
                }
                resolved.tols = Some(tols);
            }
            resolved.atia = Some(c);
        }
        Task::Tsia => {
            let d = TsiaConfig::default();
            let c =
                TsiaConfig { max_iter: p.max_iter.unwrap_or(d.max_iter), conv_tol: p.conv_tol.unwrap_or(d.conv_tol) };
            if c.max_iter == 0 || c.conv_tol.is_nan() || c.conv_tol <= 0.0 {
                return Err(("max_iter", "max_iter must be >= 1 and conv_tol > 0".into()));
            }
            resolved.tsia = Some(c);
        }
        Task::DenseBt | Task::Tcr | Task::Tor => {}
    }
    Ok(resolved)
}
