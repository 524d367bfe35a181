//! Comparison methods: plain PCA, Mahalanobis iterative trimming and a fast
//! projection pursuit that only searches the sample directions.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, dot, norm, orthonormalize, second_moment, top_eigs, Basis, ObservationSet};
use crate::metrics::trimmed_second_moment;

/// Largest tolerated covariance condition number before trimming gives up.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineMethod {
    Pca,
    Mvt { trim_fraction: f64, iterations: usize },
    Pp { trim_level: usize },
}

impl BaselineMethod {
    /// Trimming with 5% per round for 10 rounds.
    pub fn mvt_default() -> Self {
        BaselineMethod::Mvt {
            trim_fraction: 0.05,
            iterations: 10,
        }
    }

    /// Projection pursuit keeping the `ceil(n/2)` smallest projections.
    pub fn pp_default(n: usize) -> Self {
        BaselineMethod::Pp {
            trim_level: n.div_ceil(2).max(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BaselineMethod::Pca => Ok(()),
            BaselineMethod::Mvt {
                trim_fraction,
                iterations,
            } => {
                if !(trim_fraction > 0.0 && trim_fraction < 0.5) {
                    return Err(invalid(format!("trim_fraction = {trim_fraction} outside (0, 0.5)")));
                }
                if iterations == 0 {
                    return Err(invalid("iterations must be at least 1"));
                }
                Ok(())
            }
            BaselineMethod::Pp { trim_level } => {
                if trim_level == 0 {
                    return Err(invalid("trim_level must be at least 1"));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub method: BaselineMethod,
    pub d: usize,
}

pub fn run_baseline(data: &ObservationSet, cfg: &BaselineConfig) -> Result<Basis> {
    cfg.method.validate()?;
    match cfg.method {
        BaselineMethod::Pca => pca_baseline(data, cfg.d),
        BaselineMethod::Mvt {
            trim_fraction,
            iterations,
        } => mvt(data, trim_fraction, iterations, cfg.d).map(|o| o.basis),
        BaselineMethod::Pp { trim_level } => pp_approx(data, trim_level, cfg.d),
    }
}

/// Top `d` eigenvectors of `(1/n) sum_i y_i y_i^T`.
pub fn pca_baseline(data: &ObservationSet, d: usize) -> Result<Basis> {
    let sigma = second_moment(data, data.len())?;
    Ok(top_eigs(&sigma, d)?.into_basis())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MvtOutput {
    pub basis: Basis,
    /// Kept-set size at the start of each round, then the final size.
    pub kept_sizes: Vec<usize>,
    /// Indices (into the input) of the final kept set, ascending.
    pub kept: Vec<usize>,
}

/// Iterative trimming by Mahalanobis distance.
///
/// Each round fits the mean and covariance of the kept points and drops the
/// `ceil(trim_fraction * kept)` points farthest in Mahalanobis distance. The
/// result is plain PCA of whatever survives. Fails as soon as a covariance is
/// singular or its condition number exceeds [`MAX_CONDITION`], which is
/// unavoidable once the kept set has no more points than dimensions.
pub fn mvt(data: &ObservationSet, trim_fraction: f64, iterations: usize, d: usize) -> Result<MvtOutput> {
    BaselineMethod::Mvt {
        trim_fraction,
        iterations,
    }
    .validate()?;
    let m = data.dim();
    if d == 0 || d > m {
        return Err(invalid(format!("d = {d} outside 1..={m}")));
    }
    let mut kept: Vec<usize> = (0..data.len()).collect();
    let mut kept_sizes = Vec::with_capacity(iterations + 1);
    for _ in 0..iterations {
        kept_sizes.push(kept.len());
        if kept.len() <= m {
            return Err(Error::IllConditioned {
                condition: f64::INFINITY,
            });
        }
        let set = data.subset(&kept);
        let mean = set.mean();
        let cov = second_moment(&set.centered(), kept.len())?;
        let eig = top_eigs(&cov, m)?;
        let largest = eig.values[0];
        let smallest = eig.values[m - 1];
        let condition = if smallest > 0.0 { largest / smallest } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::IllConditioned { condition });
        }

        let mut dist: Vec<(f64, usize)> = kept
            .iter()
            .map(|&i| {
                let y = data.point(i);
                let dev: Vec<f64> = y.iter().zip(&mean).map(|(a, b)| a - b).collect();
                let d2: f64 = eig
                    .vectors
                    .iter()
                    .zip(&eig.values)
                    .map(|(v, l)| dot(v, &dev).powi(2) / l)
                    .sum();
                (d2, i)
            })
            .collect();
        // farthest first, earlier index first among ties
        dist.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let drop = (trim_fraction * kept.len() as f64).ceil() as usize;
        kept = dist[drop..].iter().map(|&(_, i)| i).collect();
        kept.sort_unstable();
    }
    kept_sizes.push(kept.len());
    let basis = pca_baseline(&data.subset(&kept), d)?;
    Ok(MvtOutput {
        basis,
        kept_sizes,
        kept,
    })
}

/// Projection pursuit over the normalized sample directions.
///
/// Every nonzero point (after deflation) is a candidate; candidates are scored
/// by the trimmed second moment of all `n` projections keeping the
/// `trim_level` smallest. The winner is deflated out and the search repeats
/// `d` times.
pub fn pp_approx(data: &ObservationSet, trim_level: usize, d: usize) -> Result<Basis> {
    let n = data.len();
    let m = data.dim();
    if n == 0 {
        return Err(Error::EmptySet);
    }
    if trim_level == 0 || trim_level > n {
        return Err(invalid(format!("trim_level = {trim_level} outside 1..={n}")));
    }
    if d == 0 || d > m {
        return Err(invalid(format!("d = {d} outside 1..={m}")));
    }
    if n < d {
        return Err(Error::TooFewCandidates { needed: d, found: n });
    }
    let scale = data.iter().map(norm).fold(0.0, f64::max);
    let mut work: Vec<Vec<f64>> = data.iter().map(<[f64]>::to_vec).collect();
    let mut found: Vec<Vec<f64>> = Vec::with_capacity(d);
    for _ in 0..d {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for y in &work {
            let ny = norm(y);
            if !(ny > 1e-12 * scale) {
                continue;
            }
            let w: Vec<f64> = y.iter().map(|v| v / ny).collect();
            let score = trimmed_second_moment(work.iter().map(|z| dot(&w, z)), trim_level, n);
            if best.as_ref().is_none_or(|(b, _)| score > *b) {
                best = Some((score, w));
            }
        }
        let Some((_, w)) = best else {
            return Err(Error::TooFewCandidates {
                needed: d,
                found: found.len(),
            });
        };
        for y in work.iter_mut() {
            let c = dot(&w, y);
            axpy(-c, &w, y);
        }
        found.push(w);
    }
    orthonormalize(&found)
}
