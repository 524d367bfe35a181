//! Dense linear algebra: matrices, observation sets, orthonormal frames and a
//! deterministic symmetric eigensolver.
//!
//! The eigensolver reduces the input to tridiagonal form with Householder
//! reflections and then either runs implicit QL with vector accumulation
//! (when most of the spectrum is wanted) or computes eigenvalues only and
//! recovers the requested eigenvectors by inverse iteration on the
//! tridiagonal matrix. Both paths are deterministic, so repeated calls on the
//! same input give bit-identical output.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::Kernel;

const EPS: f64 = f64::EPSILON;

/// Dense row-major matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatRepr", into = "MatRepr")]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatRepr {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<MatRepr> for Mat {
    type Error = Error;

    fn try_from(r: MatRepr) -> Result<Self> {
        Mat::from_vec(r.rows, r.cols, r.data)
    }
}

impl From<Mat> for MatRepr {
    fn from(m: Mat) -> Self {
        MatRepr {
            rows: m.rows,
            cols: m.cols,
            data: m.data,
        }
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Mat::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Mat::from_vec(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        // chunks_exact panics on a zero chunk size
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                axpy(a, other.row(k), out_row);
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(self.iter_rows().map(|r| dot(r, v)).collect())
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest absolute difference between `M[i][j]` and `M[j][i]`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols.min(self.rows) {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Deletes row `k` and column `k` of a square matrix in place.
    pub fn remove_row_col(&mut self, k: usize) {
        assert!(self.rows == self.cols && k < self.rows);
        let n = self.rows;
        let mut out = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != k) {
            let row = &self.data[i * n..(i + 1) * n];
            out.extend_from_slice(&row[..k]);
            out.extend_from_slice(&row[k + 1..]);
        }
        self.rows = n - 1;
        self.cols = n - 1;
        self.data = out;
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a * x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// A set of `n` observations in `R^m`, stored one point per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    points: Mat,
}

impl ObservationSet {
    pub fn new(points: Mat) -> Self {
        ObservationSet { points }
    }

    pub fn from_points<R: AsRef<[f64]>>(points: &[R]) -> Result<Self> {
        Ok(ObservationSet::new(Mat::from_rows(points)?))
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Ambient dimension `m`.
    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.points.row(i)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.iter_rows()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.points
    }

    pub fn into_mat(self) -> Mat {
        self.points
    }

    /// Points at the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> ObservationSet {
        let m = self.dim();
        let mut data = Vec::with_capacity(indices.len() * m);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        ObservationSet::new(Mat {
            rows: indices.len(),
            cols: m,
            data,
        })
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim()];
        if self.is_empty() {
            return mean;
        }
        for p in self.iter() {
            axpy(1.0, p, &mut mean);
        }
        let n = self.len() as f64;
        mean.iter_mut().for_each(|v| *v /= n);
        mean
    }

    /// Copy with the sample mean subtracted from every point.
    pub fn centered(&self) -> ObservationSet {
        let mean = self.mean();
        let mut out = self.clone();
        for i in 0..out.len() {
            axpy(-1.0, &mean, out.points.row_mut(i));
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> ObservationSet {
        let mut out = self.clone();
        out.points.scale(factor);
        out
    }
}

/// Ordered orthonormal frame of `d` unit vectors in `R^m`, one per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    vectors: Mat,
}

impl Basis {
    /// Wraps the rows of `vectors`, checking orthonormality to `1e-8`.
    pub fn new(vectors: Mat) -> Result<Self> {
        let d = vectors.rows();
        for i in 0..d {
            let vi = vectors.row(i);
            if (norm(vi) - 1.0).abs() > 1e-8 {
                return Err(invalid(format!("basis vector {i} is not unit length")));
            }
            for j in 0..i {
                if dot(vi, vectors.row(j)).abs() > 1e-8 {
                    return Err(invalid(format!(
                        "basis vectors {j} and {i} are not orthogonal"
                    )));
                }
            }
        }
        Ok(Basis { vectors })
    }

    pub fn from_vectors<R: AsRef<[f64]>>(vectors: &[R]) -> Result<Self> {
        Basis::new(Mat::from_rows(vectors)?)
    }

    pub(crate) fn from_orthonormal(vectors: Mat) -> Self {
        Basis { vectors }
    }

    /// Number of directions `d`.
    pub fn len(&self) -> usize {
        self.vectors.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Ambient dimension `m`.
    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        self.vectors.row(j)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.vectors.iter_rows()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.vectors
    }

    /// `sum_j (w_j^T y)^2`, the squared norm of the projection of `y`.
    pub fn energy(&self, y: &[f64]) -> f64 {
        self.iter()
            .map(|w| {
                let p = dot(w, y);
                p * p
            })
            .sum()
    }
}

/// Leading eigenpairs of a symmetric matrix, eigenvalues non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct EigPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl EigPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_basis(self) -> Basis {
        let dim = self.vectors.first().map_or(0, Vec::len);
        let data = self.vectors.into_iter().flatten().collect();
        Basis::from_orthonormal(Mat {
            rows: self.values.len(),
            cols: dim,
            data,
        })
    }
}

/// `(1/divisor) * sum_i y_i y_i^T` over the given points.
pub fn second_moment(points: &ObservationSet, divisor: usize) -> Result<Mat> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    if divisor == 0 {
        return Err(invalid("divisor must be positive"));
    }
    let m = points.dim();
    let mut acc = Mat::zeros(m, m);
    for y in points.iter() {
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            // upper triangle only, mirrored below
            axpy(yi, &y[i..], &mut acc.data[i * m + i..(i + 1) * m]);
        }
    }
    let inv = 1.0 / divisor as f64;
    for i in 0..m {
        for j in i..m {
            let v = acc.data[i * m + j] * inv;
            acc.data[i * m + j] = v;
            acc.data[j * m + i] = v;
        }
    }
    Ok(acc)
}

/// Gram matrix `K_ij = k(y_i, y_j)`.
pub fn gram<K: Kernel + ?Sized>(points: &ObservationSet, kernel: &K) -> Result<Mat> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = points.len();
    let mut k = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(points.point(i), points.point(j));
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            k.data[i * n + j] = v;
            k.data[j * n + i] = v;
        }
    }
    Ok(k)
}

/// Modified Gram-Schmidt on the given vectors. Fails if they are linearly
/// dependent (a residual falls below `1e-12` of the original norm).
pub fn orthonormalize(vectors: &[Vec<f64>]) -> Result<Basis> {
    let dim = vectors.first().map_or(0, Vec::len);
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        let scale = norm(v);
        let mut r = v.clone();
        // two passes keep the result orthogonal to working precision
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &r);
                axpy(-c, q, &mut r);
            }
        }
        let nr = norm(&r);
        if !(nr > 1e-12 * scale) {
            return Err(invalid("vectors are linearly dependent"));
        }
        r.iter_mut().for_each(|x| *x /= nr);
        out.push(r);
    }
    Ok(Basis::from_orthonormal(Mat {
        rows: out.len(),
        cols: dim,
        data: out.into_iter().flatten().collect(),
    }))
}

/// The `d` largest eigenpairs of a symmetric matrix.
///
/// Eigenvectors are unit length and sign-normalized so that the entry of
/// largest magnitude is positive. The order of eigenvectors within a
/// degenerate eigenvalue is not specified.
pub fn top_eigs(m: &Mat, d: usize) -> Result<EigPairs> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.cols(),
        });
    }
    if d > n {
        return Err(invalid(format!("requested {d} eigenpairs of a {n}x{n} matrix")));
    }
    let scale = m.data.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let asym = m.asymmetry();
    if asym > 1e-9 * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    if d == 0 {
        return Ok(EigPairs {
            values: vec![],
            vectors: vec![],
        });
    }

    let mut a = m.data.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    let tri = Tridiagonal::reduce(a, n);

    let mut pairs = if 3 * d >= n || n <= 8 {
        tri.full_spectrum()?
    } else {
        match tri.leading_by_inverse_iteration(d)? {
            Some(p) => p,
            None => tri.full_spectrum()?,
        }
    };
    pairs.truncate(d);
    let (values, vectors): (Vec<f64>, Vec<Vec<f64>>) = pairs
        .into_iter()
        .map(|(v, mut x)| {
            fix_sign(&mut x);
            (v, x)
        })
        .unzip();
    Ok(EigPairs { values, vectors })
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Eigenvalue and unit eigenvector.
type Pair = (f64, Vec<f64>);

/// Householder reduction `A = Q T Q^T` with `Q = H_0 H_1 ... H_{n-3}`.
struct Tridiagonal {
    n: usize,
    diag: Vec<f64>,
    /// `sub[i]` couples rows `i-1` and `i`; `sub[0] = 0`.
    sub: Vec<f64>,
    /// Unit Householder vectors acting on coordinates `j+1..n`.
    reflectors: Vec<Option<Vec<f64>>>,
}

impl Tridiagonal {
    fn reduce(mut a: Vec<f64>, n: usize) -> Self {
        let mut sub = vec![0.0; n];
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
        for j in 0..n.saturating_sub(2) {
            let len = n - j - 1;
            let x: Vec<f64> = (0..len).map(|r| a[(j + 1 + r) * n + j]).collect();
            let tail = x[1..].iter().map(|v| v * v).sum::<f64>();
            if tail == 0.0 {
                sub[j + 1] = x[0];
                reflectors.push(None);
                continue;
            }
            let xnorm = (x[0] * x[0] + tail).sqrt();
            let alpha = if x[0] > 0.0 { -xnorm } else { xnorm };
            let mut v = x;
            v[0] -= alpha;
            let vn = norm(&v);
            v.iter_mut().for_each(|t| *t /= vn);

            // trailing block B <- H B H with H = I - 2 v v^T
            let off = j + 1;
            let mut p = vec![0.0; len];
            for r in 0..len {
                let row = &a[(off + r) * n + off..(off + r) * n + n];
                p[r] = dot(row, &v);
            }
            let k = dot(&v, &p);
            let q: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - k * vi).collect();
            for r in 0..len {
                let (vr, qr) = (v[r], q[r]);
                let row = &mut a[(off + r) * n + off..(off + r) * n + n];
                for c in 0..len {
                    row[c] -= 2.0 * (vr * q[c] + qr * v[c]);
                }
            }
            sub[j + 1] = alpha;
            reflectors.push(Some(v));
        }
        if n >= 2 {
            sub[n - 1] = a[(n - 1) * n + n - 2];
        }
        let diag = (0..n).map(|i| a[i * n + i]).collect();
        Tridiagonal {
            n,
            diag,
            sub,
            reflectors,
        }
    }

    /// Maps an eigenvector of `T` to one of `A` by applying `Q`.
    fn back_transform(&self, x: &mut [f64]) {
        for (j, refl) in self.reflectors.iter().enumerate().rev() {
            if let Some(v) = refl {
                let seg = &mut x[j + 1..];
                let c = 2.0 * dot(v, seg);
                axpy(-c, v, seg);
            }
        }
    }

    fn norm_estimate(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.diag[i].abs()
                    + self.sub[i].abs()
                    + self.sub.get(i + 1).map_or(0.0, |v| v.abs())
            })
            .fold(0.0, f64::max)
    }

    /// All eigenpairs, sorted by non-increasing eigenvalue.
    fn full_spectrum(&self) -> Result<Vec<Pair>> {
        let n = self.n;
        let mut z: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                self.back_transform(&mut e);
                e
            })
            .collect();
        let mut d = self.diag.clone();
        let mut e = self.sub.clone();
        tql(&mut d, &mut e, Some(&mut z))?;
        let mut pairs: Vec<Pair> = d.into_iter().zip(z).collect();
        sort_descending(&mut pairs);
        Ok(pairs)
    }

    /// Leading `k` eigenpairs via eigenvalues of `T` plus inverse iteration.
    /// Returns `None` if any recovered vector misses the residual target.
    fn leading_by_inverse_iteration(&self, k: usize) -> Result<Option<Vec<Pair>>> {
        let n = self.n;
        let mut d = self.diag.clone();
        let mut e = self.sub.clone();
        tql(&mut d, &mut e, None)?;
        let mut values = d;
        values.sort_by(|a, b| b.total_cmp(a));
        values.truncate(k);

        let tnorm = self.norm_estimate().max(f64::MIN_POSITIVE);
        let pertol = 10.0 * EPS * tnorm;
        let cluster_tol = 1e-3 * tnorm;

        let mut found: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut shifts: Vec<f64> = Vec::with_capacity(k);
        for (idx, &lambda) in values.iter().enumerate() {
            let mut mu = lambda;
            if let Some(&prev) = shifts.last() {
                if prev - mu < pertol {
                    mu = prev - pertol;
                }
            }
            shifts.push(mu);
            let cluster: Vec<usize> = (0..idx)
                .filter(|&p| (values[p] - lambda).abs() < cluster_tol)
                .collect();
            let lu = TriLu::factor(&self.diag, &self.sub, mu, EPS * tnorm);
            let mut x: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.5 * (((i * 7919 + idx * 104_729) % 1000) as f64 / 1000.0))
                .collect();
            for _ in 0..4 {
                lu.solve(&mut x);
                for &p in &cluster {
                    let c = dot(&found[p], &x);
                    axpy(-c, &found[p], &mut x);
                }
                let nx = norm(&x);
                if !(nx.is_finite() && nx > 0.0) {
                    return Ok(None);
                }
                x.iter_mut().for_each(|t| *t /= nx);
            }
            if tri_residual(&self.diag, &self.sub, lambda, &x) > 1e-10 * tnorm {
                return Ok(None);
            }
            found.push(x);
        }
        let pairs = values
            .into_iter()
            .zip(found)
            .map(|(v, mut x)| {
                self.back_transform(&mut x);
                let nx = norm(&x);
                x.iter_mut().for_each(|t| *t /= nx);
                (v, x)
            })
            .collect();
        Ok(Some(pairs))
    }
}

fn sort_descending(pairs: &mut [(f64, Vec<f64>)]) {
    // stable, so ties keep solver order
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
}

fn tri_residual(diag: &[f64], sub: &[f64], lambda: f64, x: &[f64]) -> f64 {
    let n = diag.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut r = (diag[i] - lambda) * x[i];
        if i > 0 {
            r += sub[i] * x[i - 1];
        }
        if i + 1 < n {
            r += sub[i + 1] * x[i + 1];
        }
        acc += r * r;
    }
    acc.sqrt()
}

/// Implicit QL on a symmetric tridiagonal matrix. `e[i]` couples `i-1` and
/// `i`. When `z` is given, its rows are rotated alongside so that on exit
/// `z[i]` is the eigenvector for `d[i]`.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Vec<Vec<f64>>>) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= EPS * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut(i + 1);
                        let zi = &mut lo[i];
                        let zi1 = &mut hi[0];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let t = *b;
                            *b = s * *a + c * t;
                            *a = c * *a - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= EPS * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// LU factorization with partial pivoting of `T - mu I` for tridiagonal `T`.
struct TriLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TriLu {
    fn factor(diag: &[f64], sub: &[f64], mu: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|v| v - mu).collect();
        let mut dl: Vec<f64> = sub[1..].to_vec();
        let mut du: Vec<f64> = sub[1..].to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < 0.0 { -tiny } else { tiny };
            }
        }
        TriLu {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}
