//! Running methods on datasets and sweeping generator grids.

use std::time::Instant;

use anyhow::Result;
use rayon::prelude::*;

use hrpca_core::baselines::{run_baseline, BaselineConfig};
use hrpca_core::datagen::{generate, GroundTruth};
use hrpca_core::hrpca::run;
use hrpca_core::kernel::run_kernel;
use hrpca_core::linalg::orthonormalize;
use hrpca_core::sampling::mix_seed;
use hrpca_core::{Basis, Error, ObservationSet};

use crate::record::{Metric, ResultRow};
use crate::spec::{Cell, ExperimentSpec, MethodSpec};

/// What a single method run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub ev: Option<f64>,
    pub opt: Option<f64>,
    pub status: String,
    pub runtime_ms: f64,
}

/// Short status code for a failed run.
pub fn status_code(e: &Error) -> &'static str {
    match e {
        Error::IllConditioned { .. } => "ill_conditioned",
        Error::TooFewCandidates { .. } => "too_few_candidates",
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => "invalid_argument",
        Error::NoConvergence => "no_convergence",
        Error::EmptySet => "empty_set",
        _ => "error",
    }
}

fn fit(method: &MethodSpec, data: &ObservationSet, d: usize, seed: u64) -> hrpca_core::Result<(Option<Basis>, Option<f64>)> {
    let n = data.len();
    match method {
        MethodSpec::Hrpca { .. } => {
            let cfg = method.loop_config(n, d, seed).expect("robust method");
            let out = run(data, &cfg)?;
            Ok((Some(out.basis), Some(out.opt)))
        }
        MethodSpec::Khrpca { kernel, .. } => {
            let cfg = method.loop_config(n, d, seed).expect("robust method");
            let out = run_kernel(data, kernel, &cfg)?;
            // only a linear model has input-space directions to score
            let basis = match out.model.linear_directions() {
                Some(dirs) if !dirs.is_empty() => Some(orthonormalize(&dirs)?),
                _ => None,
            };
            Ok((basis, Some(out.opt)))
        }
        _ => {
            let cfg = BaselineConfig {
                method: method.baseline(n).expect("baseline method"),
                d,
            };
            Ok((Some(run_baseline(data, &cfg)?), None))
        }
    }
}

/// Runs one method and scores it against `truth` when available.
pub fn run_method(method: &MethodSpec, data: &ObservationSet, truth: Option<&GroundTruth>, d: usize, seed: u64) -> Outcome {
    let start = Instant::now();
    let result = fit(method, data, d, seed).and_then(|(basis, opt)| {
        let ev = match (basis, truth) {
            (Some(b), Some(t)) => Some(t.score(&b)?.ev),
            _ => None,
        };
        Ok((ev, opt))
    });
    let runtime_ms = (start.elapsed().as_secs_f64() * 1e6).round() / 1e3;
    match result {
        Ok((ev, opt)) => Outcome {
            ev,
            opt,
            status: "ok".into(),
            runtime_ms,
        },
        Err(e) => Outcome {
            ev: None,
            opt: None,
            status: status_code(&e).into(),
            runtime_ms,
        },
    }
}

fn row(cell: &Cell, method: &MethodSpec, trial: usize, seed: u64, o: Outcome) -> ResultRow {
    ResultRow {
        cell_id: cell.id,
        method: method.label().into(),
        lambda: cell.lambda,
        sigma: Metric(Some(cell.sigma)),
        mag: Metric(Some(cell.mag)),
        n: cell.n,
        m: cell.m,
        d: cell.d,
        trial,
        seed,
        ev: Metric(o.ev),
        opt: Metric(o.opt),
        status: o.status,
        runtime_ms: o.runtime_ms,
    }
}

/// Runs every trial of every cell; each trial's dataset is shared by all
/// methods. Rows come back sorted by cell, method position and trial.
pub fn sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let cells = spec.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.trials).map(move |t| (c, t)))
        .collect();
    let mut rows: Vec<(usize, ResultRow)> = jobs
        .par_iter()
        .flat_map_iter(|&(c, trial)| {
            let cell = &cells[c];
            let seed = mix_seed(spec.base_seed, c as u64, trial as u64);
            let generated = generate(&spec.gen_spec(cell, seed));
            spec.methods
                .iter()
                .enumerate()
                .map(|(k, method)| {
                    let outcome = match &generated {
                        Ok((data, truth)) => run_method(method, data, Some(truth), cell.d, seed),
                        Err(e) => Outcome {
                            ev: None,
                            opt: None,
                            status: format!("generate_{}", status_code(e)),
                            runtime_ms: 0.0,
                        },
                    };
                    (k, row(cell, method, trial, seed, outcome))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.1.cell_id, a.0, a.1.trial).cmp(&(b.1.cell_id, b.0, b.1.trial))
    });
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}
