//! Run configuration: a TOML document with a model table, a task and grid settings.

use std::collections::BTreeMap;
use std::path::PathBuf;

use nhsense::metrology::{DerivativeOptions, DerivativePath, Selector};
use nhsense::{Bc, Family, InterCell, ModelSpec, C64};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Spectrum,
    Winding,
    Population,
    Qfi,
    Scaling,
    Sweep,
    Reproduce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub family: Family,
    pub size: usize,
    pub bc: Bc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc_y: Option<Bc>,
    #[serde(default)]
    pub inter_cell: InterCell,
    pub params: BTreeMap<String, f64>,
}

impl ModelConfig {
    pub fn to_spec(&self) -> Result<ModelSpec, CliError> {
        let spec = ModelSpec {
            family: self.family,
            params: self.params.clone(),
            size: self.size,
            bc: self.bc,
            bc_y: self.bc_y,
            inter_cell: self.inter_cell,
        };
        spec.validate().map_err(|e| CliError::Config(format!("model: {e}")))?;
        Ok(spec)
    }
}

fn default_nk() -> usize {
    1024
}

fn default_fd_step() -> f64 {
    1e-5
}

fn default_selector() -> String {
    "steady".into()
}

fn default_e0() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    /// Control-parameter values; defaults to the model's own value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    /// System sizes; defaults to the model size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    /// Momentum samples per Bloch trace, or phase samples for the quasiperiodic winding.
    #[serde(default = "default_nk")]
    pub nk: usize,
    /// Finite-difference step relative to max(1, |λ|).
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    /// "steady", "edge", "m=<k>" or "m=L".
    #[serde(default = "default_selector")]
    pub selector: String,
    #[serde(default)]
    pub path: DerivativePath,
    #[serde(default)]
    pub allow_untrusted: bool,
    /// Reference energies as [re, im] pairs.
    #[serde(default = "default_e0")]
    pub e0: Vec<[f64; 2]>,
    /// k_x values for the QWZ stripe traces and windings.
    #[serde(default)]
    pub kx: Vec<f64>,
    /// Also export Bloch traces with the spectrum.
    #[serde(default)]
    pub curves: bool,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            lambdas: None,
            sizes: None,
            nk: default_nk(),
            fd_step: default_fd_step(),
            selector: default_selector(),
            path: DerivativePath::Auto,
            allow_untrusted: false,
            e0: default_e0(),
            kx: Vec::new(),
            curves: false,
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: Format,
}

impl Default for Output {
    fn default() -> Self {
        Output { dir: default_dir(), format: Format::Csv }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    /// Recipe name for `reproduce`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub output: Output,
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Selector with "m=L" resolved against the cell size.
pub fn parse_selector(s: &str, size: usize) -> Result<Selector, CliError> {
    match s {
        "steady" => Ok(Selector::SteadyState),
        "edge" => Ok(Selector::EdgeState),
        "m=L" => Ok(Selector::Mode(size)),
        _ => match s.strip_prefix("m=").and_then(|m| m.parse::<usize>().ok()) {
            Some(m) if m >= 1 => Ok(Selector::Mode(m)),
            _ => Err(CliError::Config(format!(
                "grid.selector: expected \"steady\", \"edge\", \"m=<k>\" or \"m=L\", got {s:?}"
            ))),
        },
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |key: &str, msg: String| Err(CliError::Config(format!("{key}: {msg}")));
        if self.task == Task::Reproduce {
            if self.figure.is_none() {
                return bad("figure", "required for task \"reproduce\"".into());
            }
            return Ok(());
        }
        let Some(model) = &self.model else {
            return bad("model", "missing table".into());
        };
        model.to_spec()?;
        let g = &self.grid;
        if let Some(l) = &g.lambdas {
            if l.is_empty() {
                return bad("grid.lambdas", "empty grid".into());
            }
            if l.iter().any(|x| !x.is_finite()) {
                return bad("grid.lambdas", "non-finite value".into());
            }
        }
        if let Some(s) = &g.sizes {
            if s.is_empty() {
                return bad("grid.sizes", "empty grid".into());
            }
            if s.iter().any(|&l| l < 2) {
                return bad("grid.sizes", "sizes must be at least 2".into());
            }
        }
        if matches!(self.task, Task::Scaling | Task::Sweep) && self.sizes().len() < 5 {
            return bad("grid.sizes", format!("{} sizes; a scaling fit needs at least 5", self.sizes().len()));
        }
        if !(64..=1 << 20).contains(&g.nk) {
            return bad("grid.nk", format!("{} outside 64..=1048576", g.nk));
        }
        if !(g.fd_step > 0.0 && g.fd_step <= 1e-2) {
            return bad("grid.fd_step", format!("{} outside (0, 1e-2]", g.fd_step));
        }
        parse_selector(&g.selector, 2)?;
        if g.e0.is_empty() {
            return bad("grid.e0", "empty grid".into());
        }
        if self.task == Task::Winding && model.family == Family::NhQwz && g.kx.is_empty() {
            return bad("grid.kx", "QWZ windings need at least one k_x".into());
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<ModelSpec, CliError> {
        self.model
            .as_ref()
            .ok_or_else(|| CliError::Config("model: missing table".into()))?
            .to_spec()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        match (&self.grid.lambdas, &self.model) {
            (Some(l), _) => l.clone(),
            (None, Some(m)) => m.to_spec().map(|s| vec![s.lambda()]).unwrap_or_default(),
            (None, None) => Vec::new(),
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        match (&self.grid.sizes, &self.model) {
            (Some(s), _) => s.clone(),
            (None, Some(m)) => vec![m.size],
            (None, None) => Vec::new(),
        }
    }

    pub fn e0(&self) -> Vec<C64> {
        self.grid.e0.iter().map(|p| C64::new(p[0], p[1])).collect()
    }

    pub fn derivative_options(&self) -> DerivativeOptions {
        DerivativeOptions {
            rel_step: self.grid.fd_step,
            path: self.grid.path,
            allow_untrusted: self.grid.allow_untrusted,
        }
    }
}
