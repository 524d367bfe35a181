//! High-dimensional robust principal component analysis.
//!
//! The central routine ([`hrpca::run`]) alternates plain PCA on a shrinking
//! working set with a randomized removal step that drops points in proportion
//! to their energy along the current candidate directions. Each candidate is
//! scored by a trimmed second moment computed on the *original* observations,
//! and the best-scoring candidate is returned. [`kernel::run_kernel`] performs
//! the same procedure in a reproducing-kernel feature space.
//!
//! Supporting modules provide the dense linear algebra ([`linalg`]), scoring
//! ([`metrics`]), the asymptotic performance bound ([`tailbound`]), a synthetic
//! contaminated-data generator ([`datagen`]) and comparison methods
//! ([`baselines`]).

// negated comparisons are used on purpose so that NaN takes the failing branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod datagen;
mod error;
pub mod hrpca;
pub mod kernel;
pub mod linalg;
pub mod metrics;
pub mod sampling;
pub mod tailbound;

pub use baselines::{BaselineConfig, BaselineMethod};
pub use datagen::{GenSpec, GroundTruth};
pub use error::{Error, Result};
pub use hrpca::{HrPcaConfig, HrPcaResult, IterationRecord, RunTrace};
pub use kernel::{Kernel, KernelFn, KernelModel};
pub use linalg::{Basis, EigPairs, Mat, ObservationSet};
pub use metrics::Score;
pub use tailbound::{BoundQuery, TailModel};
