//! Expressed variance and the robust (trimmed) variance estimator.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, top_eigs, Basis, Mat, ObservationSet};

/// Expressed variance of a basis against a known signal matrix `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    /// `h / h_bar`, in `[0, 1]` up to rounding.
    pub ev: f64,
    /// `sum_j ||w_j^T A||^2`
    pub h: f64,
    /// Sum of the `d` largest eigenvalues of `A A^T`.
    pub h_bar: f64,
}

/// Fraction of the signal variance `A A^T` captured by `basis`.
///
/// `a` is `m x k` with `k >= basis.len()`; the normalizer is the sum of the
/// `d` largest eigenvalues of `A A^T`, which is `trace(A A^T)` when `d = k`.
pub fn expressed_variance(basis: &Basis, a: &Mat) -> Result<Score> {
    if basis.dim() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: basis.dim(),
        });
    }
    let d = basis.len();
    if d == 0 || d > a.cols() {
        return Err(invalid(format!(
            "basis has {d} directions but the signal matrix has {} columns",
            a.cols()
        )));
    }
    let h: f64 = basis
        .iter()
        .map(|w| {
            (0..a.cols())
                .map(|c| {
                    let p: f64 = (0..a.rows()).map(|r| w[r] * a.get(r, c)).sum();
                    p * p
                })
                .sum::<f64>()
        })
        .sum();
    // nonzero spectrum of A A^T equals that of the small k x k matrix A^T A
    let ata = a.transpose().matmul(a)?;
    let h_bar: f64 = if d == a.cols() {
        ata.trace()
    } else {
        top_eigs(&ata, d)?.values.iter().sum()
    };
    if !(h_bar > 0.0) {
        return Err(invalid("signal matrix is zero"));
    }
    Ok(Score {
        ev: h / h_bar,
        h,
        h_bar,
    })
}

/// `(1/n) * (sum of the t_hat smallest squared values)`.
///
/// Values are sorted ascending (ties by position) and summed in that order.
pub fn trimmed_second_moment<I>(projections: I, t_hat: usize, n: usize) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let mut sq: Vec<(f64, usize)> = projections
        .into_iter()
        .enumerate()
        .map(|(i, p)| (p * p, i))
        .collect();
    sq.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    sq.iter().take(t_hat).map(|(v, _)| v).sum::<f64>() / n as f64
}

/// Robust variance estimate summed over the directions of `basis`, always
/// computed on the full observed set.
pub fn rve(basis: &Basis, full_set: &ObservationSet, t_hat: usize) -> Result<f64> {
    let n = full_set.len();
    if t_hat == 0 || t_hat > n {
        return Err(invalid(format!("t_hat = {t_hat} outside 1..={n}")));
    }
    if basis.dim() != full_set.dim() {
        return Err(Error::DimensionMismatch {
            expected: full_set.dim(),
            found: basis.dim(),
        });
    }
    Ok(basis
        .iter()
        .map(|w| trimmed_second_moment(full_set.iter().map(|y| dot(w, y)), t_hat, n))
        .sum())
}
