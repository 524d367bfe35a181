//! Kernelized robust PCA.
//!
//! Principal directions live in the feature space of a positive semidefinite
//! kernel and are represented by coefficients over the current working points:
//! `w_q = sum_j alpha_j(q) phi(y_j)`. Projections, the trimmed variance
//! estimate and the removal weights are all evaluated through the kernel, so
//! with the linear kernel the run reproduces [`crate::hrpca::run`] step for
//! step.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hrpca::{HrPcaConfig, IterationRecord, RunTrace};
use crate::linalg::{axpy, dot, gram, top_eigs, Mat, ObservationSet};
use crate::metrics::trimmed_second_moment;
use crate::sampling::{removal_rng, sample_weighted};

pub trait Kernel {
    fn eval(&self, a: &[f64], b: &[f64]) -> f64;
}

impl<K: Kernel + ?Sized> Kernel for &K {
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        (**self).eval(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFn {
    /// `a^T b`
    Linear,
    /// `exp(-gamma ||a - b||^2)`
    Rbf { gamma: f64 },
    /// `(a^T b + offset)^degree`
    Polynomial { degree: u32, offset: f64 },
}

impl KernelFn {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelFn::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(invalid("rbf gamma must be positive"))
            }
            KernelFn::Polynomial { offset, .. } if !(offset >= 0.0 && offset.is_finite()) => {
                Err(invalid("polynomial offset must be non-negative"))
            }
            _ => Ok(()),
        }
    }
}

impl Kernel for KernelFn {
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelFn::Linear => dot(a, b),
            KernelFn::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            KernelFn::Polynomial { degree, offset } => {
                (dot(a, b) + offset).powi(degree as i32)
            }
        }
    }
}

/// Kernel of the feature map `phi(x) - mean_i phi(y_i)` over a fixed anchor set.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredKernel<K> {
    inner: K,
    anchors: ObservationSet,
    grand_mean: f64,
}

pub fn center_kernel<K: Kernel>(kernel: K, anchor_set: &ObservationSet) -> CenteredKernel<K> {
    let n = anchor_set.len();
    let mut total = 0.0;
    for a in anchor_set.iter() {
        for b in anchor_set.iter() {
            total += kernel.eval(a, b);
        }
    }
    let grand_mean = if n == 0 { 0.0 } else { total / (n * n) as f64 };
    CenteredKernel {
        inner: kernel,
        anchors: anchor_set.clone(),
        grand_mean,
    }
}

impl<K> CenteredKernel<K> {
    pub fn inner(&self) -> &K {
        &self.inner
    }

    pub fn anchors(&self) -> &ObservationSet {
        &self.anchors
    }
}

impl<K: Kernel> CenteredKernel<K> {
    fn anchor_mean(&self, x: &[f64]) -> f64 {
        let n = self.anchors.len();
        if n == 0 {
            return 0.0;
        }
        self.anchors.iter().map(|y| self.inner.eval(x, y)).sum::<f64>() / n as f64
    }
}

impl<K: Kernel> Kernel for CenteredKernel<K> {
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        self.inner.eval(a, b) - self.anchor_mean(a) - self.anchor_mean(b) + self.grand_mean
    }
}

/// Centers a Gram matrix over its own index set:
/// `K - 1K/n - K1/n + 1K1/n^2`.
pub fn center_gram(k: &mut Mat) {
    let n = k.rows();
    if n == 0 {
        return;
    }
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| k.row(i).iter().sum::<f64>() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    for i in 0..n {
        for j in 0..n {
            // symmetric, so column means equal row means
            let v = k.get(i, j) - row_means[i] - row_means[j] + grand;
            k.set(i, j, v);
        }
    }
}

/// The feature kernel a run actually used: raw, or centered on the observed set.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureKernel<K> {
    Raw(K),
    Centered(CenteredKernel<K>),
}

impl<K: Kernel> Kernel for FeatureKernel<K> {
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            FeatureKernel::Raw(k) => k.eval(a, b),
            FeatureKernel::Centered(k) => k.eval(a, b),
        }
    }
}

/// Leading normalized eigen-coefficients of a Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPcs {
    /// `sigma_q`, square roots of the retained eigenvalues.
    pub sigmas: Vec<f64>,
    /// `alpha(q) = alpha_hat(q) / sigma_q`, so that `alpha^T K alpha = 1`.
    pub alphas: Vec<Vec<f64>>,
    /// Requested directions whose eigenvalue was at or below
    /// `1e-10 * trace(K)` and were therefore dropped.
    pub dropped: usize,
}

/// Kernel PCA on a Gram matrix.
///
/// Eigenvalues in `(-1e-10 trace, 0)` are PSD rounding noise; any eigenvalue
/// at or below `1e-10 * trace(K)` is treated as zero and its direction is
/// dropped. The normalizer is the Rayleigh quotient of the unit eigenvector,
/// which equals the eigenvalue and makes `alpha^T K alpha = 1` hold to
/// rounding.
pub fn kernel_pca(k: &Mat, d: usize) -> Result<KernelPcs> {
    let eig = top_eigs(k, d)?;
    let tol = 1e-10 * k.trace();
    let mut sigmas = Vec::with_capacity(d);
    let mut alphas = Vec::with_capacity(d);
    for (value, v) in eig.values.iter().zip(eig.vectors) {
        if !(tol > 0.0 && *value > tol) {
            break;
        }
        let kv = k.mat_vec(&v)?;
        let rayleigh = dot(&v, &kv);
        if !(rayleigh > tol) {
            break;
        }
        let sigma = rayleigh.sqrt();
        sigmas.push(sigma);
        alphas.push(v.iter().map(|x| x / sigma).collect());
    }
    let dropped = d - sigmas.len();
    Ok(KernelPcs {
        sigmas,
        alphas,
        dropped,
    })
}

/// `<w, phi(v)> = sum_j alpha_j k(y_j, v)`.
pub fn kernel_project<K: Kernel + ?Sized>(
    alpha: &[f64],
    support: &ObservationSet,
    kernel: &K,
    query: &[f64],
) -> Result<f64> {
    if alpha.len() != support.len() {
        return Err(Error::DimensionMismatch {
            expected: support.len(),
            found: alpha.len(),
        });
    }
    Ok(alpha
        .iter()
        .zip(support.iter())
        .map(|(a, y)| a * kernel.eval(y, query))
        .sum())
}

/// Output of a kernel run: coefficients over the support points held when
/// the champion was found.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel<K> {
    /// One coefficient vector per retained direction.
    pub coefficients: Vec<Vec<f64>>,
    pub support_points: ObservationSet,
    /// Original indices of `support_points`.
    pub support_indices: Vec<usize>,
    pub kernel: FeatureKernel<K>,
}

impl<K: Kernel> KernelModel<K> {
    /// Feature-space projections of `query` onto every retained direction.
    pub fn project(&self, query: &[f64]) -> Result<Vec<f64>> {
        self.coefficients
            .iter()
            .map(|a| kernel_project(a, &self.support_points, &self.kernel, query))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

impl KernelModel<KernelFn> {
    /// Explicit input-space directions `sum_j alpha_j (y_j - mean)` for a
    /// linear-kernel model; `None` for any other kernel.
    pub fn linear_directions(&self) -> Option<Vec<Vec<f64>>> {
        let mean = match &self.kernel {
            FeatureKernel::Raw(KernelFn::Linear) => vec![0.0; self.support_points.dim()],
            FeatureKernel::Centered(c) if *c.inner() == KernelFn::Linear => c.anchors().mean(),
            _ => return None,
        };
        let dirs = self
            .coefficients
            .iter()
            .map(|alpha| {
                let mut w = vec![0.0; mean.len()];
                for (a, y) in alpha.iter().zip(self.support_points.iter()) {
                    axpy(*a, y, &mut w);
                    axpy(-a, &mean, &mut w);
                }
                w
            })
            .collect();
        Some(dirs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelRun<K> {
    pub model: KernelModel<K>,
    pub opt: f64,
    pub trace: RunTrace,
}

/// Kernel version of the robust PCA loop.
///
/// The Gram matrix of the full observed set is formed once (and centered on
/// it when `cfg.center` is set); the working Gram matrix is obtained by
/// deleting the row and column of each removed point.
pub fn run_kernel<K: Kernel + Clone>(
    data: &ObservationSet,
    kernel: &K,
    cfg: &HrPcaConfig,
) -> Result<KernelRun<K>> {
    let n = data.len();
    if cfg.d == 0 {
        return Err(invalid("d must be at least 1"));
    }
    if n < cfg.d + 1 {
        return Err(invalid(format!("need at least d + 1 = {} points, have {n}", cfg.d + 1)));
    }
    if cfg.t_bar > n - 1 {
        return Err(invalid(format!("t_bar = {} exceeds n - 1 = {}", cfg.t_bar, n - 1)));
    }
    if cfg.t_hat == 0 || cfg.t_hat > n {
        return Err(invalid(format!("t_hat = {} outside 1..={n}", cfg.t_hat)));
    }

    let mut full = gram(data, kernel)?;
    let feature = if cfg.center {
        center_gram(&mut full);
        FeatureKernel::Centered(center_kernel(kernel.clone(), data))
    } else {
        FeatureKernel::Raw(kernel.clone())
    };
    let mut working = full.clone();

    let mut rng = removal_rng(cfg.seed);
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut opt = 0.0;
    let mut champion: Option<(Vec<Vec<f64>>, Vec<usize>)> = None;
    let mut first: Option<(Vec<Vec<f64>>, Vec<usize>)> = None;
    let mut trace = RunTrace::default();

    for s in 0..=cfg.t_bar {
        if remaining.is_empty() {
            break;
        }
        let pcs = kernel_pca(&working, cfg.d)?;

        // projections of every original point onto each direction
        let value: f64 = pcs
            .alphas
            .iter()
            .map(|alpha| {
                let proj = (0..n).map(|i| {
                    alpha
                        .iter()
                        .zip(&remaining)
                        .map(|(a, &j)| a * full.get(j, i))
                        .sum::<f64>()
                });
                trimmed_second_moment(proj, cfg.t_hat, n)
            })
            .sum();

        let opt_before = opt;
        let updated = value > opt;
        if updated {
            opt = value;
            champion = Some((pcs.alphas.clone(), remaining.clone()));
        }

        let weights: Vec<f64> = (0..remaining.len())
            .map(|i| {
                pcs.alphas
                    .iter()
                    .map(|alpha| {
                        // working is symmetric, so row i holds k(y_j, y_i)
                        let p = dot(alpha, working.row(i));
                        p * p
                    })
                    .sum()
            })
            .collect();
        let draw = sample_weighted(&weights, &mut rng);
        if first.is_none() {
            first = Some((pcs.alphas, remaining.clone()));
        }
        let removed = remaining.remove(draw.index);
        working.remove_row_col(draw.index);
        trace.iterations.push(IterationRecord {
            s,
            removed,
            opt_before,
            candidate_value: value,
            champion_updated: updated,
            uniform_removal: draw.uniform,
            dropped_directions: pcs.dropped,
        });
    }

    trace.final_opt = opt;
    let (coefficients, support_indices) = champion
        .or(first)
        .expect("the loop runs at least once because n >= d + 1");
    Ok(KernelRun {
        model: KernelModel {
            coefficients,
            support_points: data.subset(&support_indices),
            support_indices,
            kernel: feature,
        },
        opt,
        trace,
    })
}
