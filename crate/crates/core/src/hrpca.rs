//! Robust PCA by alternating PCA with randomized point removal.
//!
//! Each iteration computes the leading `d` principal directions of the
//! current working set, scores them with the trimmed variance estimator on
//! the full observed set, keeps the best-scoring directions seen so far, and
//! removes one working point drawn with probability proportional to its
//! squared projection onto the current directions.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{second_moment, top_eigs, Basis, ObservationSet};
use crate::metrics::rve;
use crate::sampling::{removal_rng, sample_weighted};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HrPcaConfig {
    /// Number of directions to recover.
    pub d: usize,
    /// Maximum number of removals; the loop runs `t_bar + 1` times.
    pub t_bar: usize,
    /// Number of smallest squared projections kept by the variance estimator.
    pub t_hat: usize,
    pub seed: u64,
    /// Subtract the sample mean once before the loop.
    pub center: bool,
}

impl HrPcaConfig {
    /// Defaults for `n` points when the number of authentic points is
    /// unknown: `t_hat = ceil(n/2)` and `t_bar = n - d - 1`, so that at least
    /// `d + 1` points remain for the last PCA step.
    pub fn defaults(n: usize, d: usize, seed: u64) -> Self {
        HrPcaConfig {
            d,
            t_bar: n.saturating_sub(d + 1),
            t_hat: n.div_ceil(2).max(1),
            seed,
            center: false,
        }
    }

    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        if self.d == 0 || self.d > m {
            return Err(invalid(format!("d = {} outside 1..={m}", self.d)));
        }
        if n < self.d + 1 {
            return Err(invalid(format!("need at least d + 1 = {} points, have {n}", self.d + 1)));
        }
        if self.t_bar > n - 1 {
            return Err(invalid(format!("t_bar = {} exceeds n - 1 = {}", self.t_bar, n - 1)));
        }
        if self.t_hat == 0 || self.t_hat > n {
            return Err(invalid(format!("t_hat = {} outside 1..={n}", self.t_hat)));
        }
        Ok(())
    }
}

/// One pass through the loop body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub s: usize,
    /// Index into the original observation set.
    pub removed: usize,
    /// Champion value before this iteration's comparison.
    pub opt_before: f64,
    /// Summed robust variance of this iteration's candidate.
    pub candidate_value: f64,
    pub champion_updated: bool,
    /// Every working point was orthogonal to the candidate, so the removal
    /// was uniform.
    pub uniform_removal: bool,
    /// Directions dropped as numerically zero (kernel runs only).
    pub dropped_directions: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub iterations: Vec<IterationRecord>,
    pub final_opt: f64,
}

impl RunTrace {
    pub fn removed_indices(&self) -> Vec<usize> {
        self.iterations.iter().map(|r| r.removed).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HrPcaResult {
    pub basis: Basis,
    pub opt: f64,
    pub trace: RunTrace,
}

/// `sum_j (w_j^T y_i)^2` for every remaining point.
pub fn removal_weights(basis: &Basis, remaining: &ObservationSet) -> Vec<f64> {
    remaining.iter().map(|y| basis.energy(y)).collect()
}

/// Runs the robust PCA loop on `data`.
///
/// If no candidate ever scores above zero the first candidate is returned.
pub fn run(data: &ObservationSet, cfg: &HrPcaConfig) -> Result<HrPcaResult> {
    let n = data.len();
    cfg.validate(n, data.dim())?;
    let centered;
    let data = if cfg.center {
        centered = data.centered();
        &centered
    } else {
        data
    };

    let mut rng = removal_rng(cfg.seed);
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut opt = 0.0;
    let mut champion: Option<Basis> = None;
    let mut first: Option<Basis> = None;
    let mut trace = RunTrace::default();

    for s in 0..=cfg.t_bar {
        if remaining.is_empty() {
            break;
        }
        let working = data.subset(&remaining);
        let sigma = second_moment(&working, remaining.len())?;
        let basis = top_eigs(&sigma, cfg.d)?.into_basis();
        let value = rve(&basis, data, cfg.t_hat)?;

        let opt_before = opt;
        let updated = value > opt;
        if updated {
            opt = value;
            champion = Some(basis.clone());
        }

        let weights = removal_weights(&basis, &working);
        let draw = sample_weighted(&weights, &mut rng);
        let removed = remaining.remove(draw.index);
        trace.iterations.push(IterationRecord {
            s,
            removed,
            opt_before,
            candidate_value: value,
            champion_updated: updated,
            uniform_removal: draw.uniform,
            dropped_directions: 0,
        });
        if first.is_none() {
            first = Some(basis);
        }
    }

    trace.final_opt = opt;
    let basis = champion
        .or(first)
        .expect("the loop runs at least once because n >= d + 1");
    Ok(HrPcaResult { basis, opt, trace })
}
