//! Declarative inputs: experiment sweeps, per-method settings and bound grids.

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use hrpca_core::baselines::BaselineMethod;
use hrpca_core::datagen::GenSpec;
use hrpca_core::tailbound::TrimLevel;
use hrpca_core::{HrPcaConfig, KernelFn, TailModel};

/// One method and its settings. Unset trim and removal budgets fall back to
/// `t_hat = ceil(n/2)` and `t_bar = n - d - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum MethodSpec {
    Pca,
    Hrpca {
        #[serde(default)]
        t_hat: Option<usize>,
        #[serde(default)]
        t_bar: Option<usize>,
        #[serde(default)]
        center: bool,
    },
    Khrpca {
        #[serde(default = "default_kernel")]
        kernel: KernelFn,
        #[serde(default)]
        t_hat: Option<usize>,
        #[serde(default)]
        t_bar: Option<usize>,
        #[serde(default)]
        center: bool,
    },
    Mvt {
        #[serde(default = "default_trim_fraction")]
        trim_fraction: f64,
        #[serde(default = "default_iterations")]
        iterations: usize,
    },
    Pp {
        #[serde(default)]
        trim_level: Option<usize>,
    },
}

fn default_kernel() -> KernelFn {
    KernelFn::Linear
}

fn default_trim_fraction() -> f64 {
    0.05
}

fn default_iterations() -> usize {
    10
}

impl MethodSpec {
    /// Default settings for a method name.
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "pca" => MethodSpec::Pca,
            "hrpca" => MethodSpec::Hrpca {
                t_hat: None,
                t_bar: None,
                center: false,
            },
            "khrpca" => MethodSpec::Khrpca {
                kernel: default_kernel(),
                t_hat: None,
                t_bar: None,
                center: false,
            },
            "mvt" => MethodSpec::Mvt {
                trim_fraction: default_trim_fraction(),
                iterations: default_iterations(),
            },
            "pp" => MethodSpec::Pp { trim_level: None },
            other => bail!("unknown method {other:?} (expected pca, hrpca, khrpca, mvt or pp)"),
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            MethodSpec::Pca => "pca",
            MethodSpec::Hrpca { .. } => "hrpca",
            MethodSpec::Khrpca { .. } => "khrpca",
            MethodSpec::Mvt { .. } => "mvt",
            MethodSpec::Pp { .. } => "pp",
        }
    }

    /// Overrides the trim and removal budgets of the robust methods.
    pub fn with_budgets(mut self, t_hat_arg: Option<usize>, t_bar_arg: Option<usize>) -> Result<Self> {
        match &mut self {
            MethodSpec::Hrpca { t_hat, t_bar, .. } | MethodSpec::Khrpca { t_hat, t_bar, .. } => {
                if t_hat_arg.is_some() {
                    *t_hat = t_hat_arg;
                }
                if t_bar_arg.is_some() {
                    *t_bar = t_bar_arg;
                }
            }
            MethodSpec::Pp { trim_level } if t_bar_arg.is_none() => {
                if t_hat_arg.is_some() {
                    *trim_level = t_hat_arg;
                }
            }
            _ => {
                ensure!(
                    t_hat_arg.is_none() && t_bar_arg.is_none(),
                    "--t-hat/--t-bar do not apply to {}",
                    self.label()
                );
            }
        }
        Ok(self)
    }

    /// Loop configuration for the robust methods on `n` points.
    pub fn loop_config(&self, n: usize, d: usize, seed: u64) -> Option<HrPcaConfig> {
        match *self {
            MethodSpec::Hrpca { t_hat, t_bar, center } | MethodSpec::Khrpca { t_hat, t_bar, center, .. } => {
                let mut cfg = HrPcaConfig::defaults(n, d, seed);
                cfg.t_hat = t_hat.unwrap_or(cfg.t_hat);
                cfg.t_bar = t_bar.unwrap_or(cfg.t_bar);
                cfg.center = center;
                Some(cfg)
            }
            _ => None,
        }
    }

    pub fn baseline(&self, n: usize) -> Option<BaselineMethod> {
        match *self {
            MethodSpec::Pca => Some(BaselineMethod::Pca),
            MethodSpec::Mvt {
                trim_fraction,
                iterations,
            } => Some(BaselineMethod::Mvt {
                trim_fraction,
                iterations,
            }),
            MethodSpec::Pp { trim_level } => Some(match trim_level {
                Some(trim_level) => BaselineMethod::Pp { trim_level },
                None => BaselineMethod::pp_default(n),
            }),
            _ => None,
        }
    }
}

fn default_trials() -> usize {
    20
}

fn default_gaussian() -> TailModel {
    TailModel::gaussian()
}

/// A grid of generator settings crossed with a list of methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub lambda: Vec<f64>,
    pub sigma: Vec<f64>,
    pub mag: Vec<f64>,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub d: Vec<usize>,
    pub methods: Vec<MethodSpec>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Number of outlier lines; defaults to `d` for each cell.
    #[serde(default)]
    pub outlier_lines: Option<usize>,
    #[serde(default = "default_gaussian")]
    pub signal_marginal: TailModel,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// One point of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub id: usize,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub lambda: f64,
    pub sigma: f64,
    pub mag: f64,
}

impl ExperimentSpec {
    /// Cells in row-major order over `n, m, d, lambda, sigma, mag`.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &m in &self.m {
                for &d in &self.d {
                    for &lambda in &self.lambda {
                        for &sigma in &self.sigma {
                            for &mag in &self.mag {
                                out.push(Cell {
                                    id: out.len(),
                                    n,
                                    m,
                                    d,
                                    lambda,
                                    sigma,
                                    mag,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn gen_spec(&self, cell: &Cell, seed: u64) -> GenSpec {
        let mut g = GenSpec::new(cell.n, cell.m, cell.d, cell.lambda, cell.sigma, cell.mag, seed);
        g.outlier_lines = self.outlier_lines.unwrap_or(cell.d);
        g.signal_marginal = self.signal_marginal.clone();
        g
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.trials >= 1, "trials must be at least 1");
        ensure!(!self.methods.is_empty(), "no methods listed");
        let cells = self.cells();
        ensure!(!cells.is_empty(), "every sweep axis needs at least one value");
        for cell in &cells {
            self.gen_spec(cell, 0)
                .validate()
                .with_context(|| format!("cell {} ({cell:?})", cell.id))?;
        }
        for method in &self.methods {
            if let MethodSpec::Khrpca { kernel, .. } = method {
                kernel.validate()?;
            }
            if let Some(b) = method.baseline(1) {
                b.validate()?;
            }
        }
        Ok(())
    }
}

fn default_models() -> Vec<TailModel> {
    vec![TailModel::gaussian(), TailModel::uniform()]
}

fn default_trim() -> TrimLevel {
    TrimLevel::OfTotal(0.5)
}

fn default_lambdas() -> Vec<f64> {
    (0..50).map(|k| k as f64 / 100.0).collect()
}

/// Bound curves to tabulate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    #[serde(default = "default_models")]
    pub models: Vec<TailModel>,
    #[serde(default = "default_trim")]
    pub trim: TrimLevel,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
}

impl Default for BoundSpec {
    fn default() -> Self {
        BoundSpec {
            models: default_models(),
            trim: default_trim(),
            lambdas: default_lambdas(),
        }
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
