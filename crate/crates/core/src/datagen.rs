//! Synthetic contaminated observations.
//!
//! Authentic points follow `z = A x + n` with `A` an `m x d` matrix whose `d`
//! singular values all equal `sigma`, `x` drawn coordinatewise from the signal
//! marginal, and `n ~ N(0, I_m)`. Outliers sit on `outlier_lines` random lines
//! through the origin with coefficients uniform on `[-sigma*mag, sigma*mag]`
//! and carry no noise. The combined set is shuffled.
//!
//! Only the Gaussian marginal gives an exactly spherically symmetric signal;
//! uniform and empirical marginals are drawn independently per coordinate.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, dot, norm, orthonormalize, Basis, Mat, ObservationSet};
use crate::metrics::{expressed_variance, Score};
use crate::sampling::data_rng;
use crate::tailbound::{Marginal, TailModel};

fn default_true() -> bool {
    true
}

fn default_lines() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    /// Outlier fraction, in `[0, 0.5)`.
    pub lambda: f64,
    /// Common singular value of `A`.
    pub sigma: f64,
    /// Outlier magnitude relative to `sigma`.
    pub mag: f64,
    #[serde(default = "default_lines")]
    pub outlier_lines: usize,
    #[serde(default = "TailModel::gaussian")]
    pub signal_marginal: TailModel,
    #[serde(default)]
    pub seed: u64,
    /// Add `N(0, I_m)` noise to authentic points. Disabling it is a test hook.
    #[serde(default = "default_true")]
    pub noise: bool,
}

impl GenSpec {
    /// A Gaussian-signal spec with noise and one outlier line per signal
    /// direction.
    pub fn new(n: usize, m: usize, d: usize, lambda: f64, sigma: f64, mag: f64, seed: u64) -> Self {
        GenSpec {
            n,
            m,
            d,
            lambda,
            sigma,
            mag,
            outlier_lines: d,
            signal_marginal: TailModel::gaussian(),
            seed,
            noise: true,
        }
    }

    /// Number of authentic points, `round((1 - lambda) n)`.
    pub fn authentic_count(&self) -> usize {
        ((1.0 - self.lambda) * self.n as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.lambda) {
            return Err(invalid(format!("lambda = {} outside [0, 0.5)", self.lambda)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma must be positive"));
        }
        if !(self.mag > 0.0 && self.mag.is_finite()) {
            return Err(invalid("mag must be positive"));
        }
        if self.d == 0 || self.d > self.m {
            return Err(invalid(format!("d = {} outside 1..={}", self.d, self.m)));
        }
        if self.outlier_lines == 0 {
            return Err(invalid("outlier_lines must be at least 1"));
        }
        if self.authentic_count() < self.d + 1 {
            return Err(invalid(format!(
                "only {} authentic points for d = {}",
                self.authentic_count(),
                self.d
            )));
        }
        Ok(())
    }
}

/// What the generator knows about a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// `m x d` signal matrix.
    pub a: Mat,
    /// Sorted positions of authentic points in the shuffled set.
    pub authentic_indices: Vec<usize>,
    /// Sorted positions of outliers in the shuffled set.
    pub outlier_indices: Vec<usize>,
    /// Signals `x` (`t x d`), row `k` belongs to `authentic_indices[k]`.
    pub signals: Mat,
    /// Unit directions of the outlier lines, one per row.
    pub outlier_directions: Mat,
    pub spec: GenSpec,
}

impl GroundTruth {
    pub fn score(&self, basis: &Basis) -> Result<Score> {
        expressed_variance(basis, &self.a)
    }
}

fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

fn draw_marginal<R: Rng + ?Sized>(rng: &mut R, model: &TailModel, pool: Option<&[f64]>) -> f64 {
    match (model.marginal(), pool) {
        // unit variance
        (Marginal::Uniform, _) => {
            let h = 3f64.sqrt();
            rng.random_range(-h..h)
        }
        (Marginal::Empirical { .. }, Some(pool)) => pool[rng.random_range(0..pool.len())],
        _ => rng.sample(StandardNormal),
    }
}

/// Generates a contaminated dataset. Same spec, same output, bit for bit.
pub fn generate(spec: &GenSpec) -> Result<(ObservationSet, GroundTruth)> {
    spec.validate()?;
    let GenSpec { n, m, d, .. } = *spec;
    let t = spec.authentic_count();
    let mut rng = data_rng(spec.seed);

    // all singular values equal to sigma
    let cols: Vec<Vec<f64>> = (0..d).map(|_| gaussian_vec(&mut rng, m)).collect();
    let q = orthonormalize(&cols)?;
    let mut a = q.as_mat().transpose();
    a.scale(spec.sigma);

    let lines: Vec<Vec<f64>> = (0..spec.outlier_lines)
        .map(|_| loop {
            let mut v = gaussian_vec(&mut rng, m);
            let nv = norm(&v);
            if nv > 0.0 {
                v.iter_mut().for_each(|x| *x /= nv);
                break v;
            }
        })
        .collect();

    let pool = spec.signal_marginal.standardized_samples();
    let mut source: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut signals: Vec<Vec<f64>> = Vec::with_capacity(t);
    for _ in 0..t {
        let x: Vec<f64> = (0..d)
            .map(|_| draw_marginal(&mut rng, &spec.signal_marginal, pool.as_deref()))
            .collect();
        let mut z = if spec.noise {
            gaussian_vec(&mut rng, m)
        } else {
            vec![0.0; m]
        };
        for (c, &xc) in x.iter().enumerate() {
            for (r, zr) in z.iter_mut().enumerate() {
                *zr += a.get(r, c) * xc;
            }
        }
        source.push(z);
        signals.push(x);
    }
    let half_width = spec.sigma * spec.mag;
    for k in 0..(n - t) {
        let coef = rng.random_range(-half_width..=half_width);
        let mut o = vec![0.0; m];
        axpy(coef, &lines[k % lines.len()], &mut o);
        source.push(o);
    }

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut authentic = Vec::with_capacity(t);
    let mut outliers = Vec::with_capacity(n - t);
    let mut ordered_signals = Vec::with_capacity(t);
    for (pos, &src) in perm.iter().enumerate() {
        if src < t {
            authentic.push(pos);
            ordered_signals.push(signals[src].clone());
        } else {
            outliers.push(pos);
        }
    }
    let points: Vec<&[f64]> = perm.iter().map(|&src| source[src].as_slice()).collect();
    let data = ObservationSet::from_points(&points)?;
    let signals = if ordered_signals.is_empty() {
        Mat::zeros(0, d)
    } else {
        Mat::from_rows(&ordered_signals)?
    };

    Ok((
        data,
        GroundTruth {
            a,
            authentic_indices: authentic,
            outlier_indices: outliers,
            signals,
            outlier_directions: Mat::from_rows(&lines)?,
            spec: spec.clone(),
        },
    ))
}

/// High-dimensional noise diagnostics over the authentic points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    /// Mean `||n_i||_2`.
    pub mean_noise_norm: f64,
    /// `mean_noise_norm / sqrt(m)`.
    pub noise_norm_ratio: f64,
    /// Mean `|cos|` of the angle between `z_i` and the column space of `A`.
    pub mean_abs_cos: f64,
}

pub fn noise_explosion_report(truth: &GroundTruth, data: &ObservationSet) -> Result<NoiseReport> {
    let m = data.dim();
    if truth.a.rows() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: truth.a.rows(),
        });
    }
    let t = truth.authentic_indices.len();
    if t == 0 {
        return Err(Error::EmptySet);
    }
    let cols: Vec<Vec<f64>> = (0..truth.a.cols()).map(|c| truth.a.column(c)).collect();
    let span = orthonormalize(&cols)?;
    let mut noise_sum = 0.0;
    let mut cos_sum = 0.0;
    for (k, &i) in truth.authentic_indices.iter().enumerate() {
        let z = data.point(i);
        let signal = truth.a.mat_vec(truth.signals.row(k))?;
        let noise: Vec<f64> = z.iter().zip(&signal).map(|(a, b)| a - b).collect();
        noise_sum += norm(&noise);
        let nz = norm(z);
        if nz > 0.0 {
            cos_sum += span.energy(z).sqrt() / nz;
        }
    }
    let mean_noise_norm = noise_sum / t as f64;
    Ok(NoiseReport {
        mean_noise_norm,
        noise_norm_ratio: mean_noise_norm / (m as f64).sqrt(),
        mean_abs_cos: cos_sum / t as f64,
    })
}

/// Header values of a dataset file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetHeader {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub lambda: f64,
    pub seed: u64,
}

/// Writes one point per line, space-separated, after a `# n m d lambda seed`
/// header line.
pub fn write_dataset(path: &Path, data: &ObservationSet, header: &DatasetHeader) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(
        w,
        "# {} {} {} {} {}",
        header.n, header.m, header.d, header.lambda, header.seed
    )?;
    for p in data.iter() {
        let mut first = true;
        for v in p {
            if !first {
                w.write_all(b" ")?;
            }
            write!(w, "{v}")?;
            first = false;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<(DatasetHeader, ObservationSet)> {
    let r = BufReader::new(fs::File::open(path)?);
    let mut lines = r.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let fields: Vec<&str> = head
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("missing '#' header".into()))?
        .split_whitespace()
        .collect();
    if fields.len() != 5 {
        return Err(Error::Parse(format!("header has {} fields, expected 5", fields.len())));
    }
    let bad = |what: &str| Error::Parse(format!("bad header field {what}"));
    let header = DatasetHeader {
        n: fields[0].parse().map_err(|_| bad("n"))?,
        m: fields[1].parse().map_err(|_| bad("m"))?,
        d: fields[2].parse().map_err(|_| bad("d"))?,
        lambda: fields[3].parse().map_err(|_| bad("lambda"))?,
        seed: fields[4].parse().map_err(|_| bad("seed"))?,
    };
    let mut data = Vec::with_capacity(header.n * header.m);
    let mut rows = 0;
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            data.push(tok.parse::<f64>().map_err(|_| {
                Error::Parse(format!("line {}: bad number {tok:?}", lineno + 2))
            })?);
        }
        if data.len() - before != header.m {
            return Err(Error::Parse(format!(
                "line {} has {} values, expected {}",
                lineno + 2,
                data.len() - before,
                header.m
            )));
        }
        rows += 1;
    }
    if rows != header.n {
        return Err(Error::Parse(format!("found {rows} points, header says {}", header.n)));
    }
    Ok((header, ObservationSet::new(Mat::from_vec(rows, header.m, data)?)))
}

/// Path of the truth sidecar for a dataset file: `<dataset>.truth.json`.
pub fn truth_path(dataset: &Path) -> std::path::PathBuf {
    let mut s = dataset.as_os_str().to_owned();
    s.push(".truth.json");
    s.into()
}

pub fn write_truth(path: &Path, truth: &GroundTruth) -> Result<()> {
    let w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(w, truth)?;
    Ok(())
}

pub fn read_truth(path: &Path) -> Result<GroundTruth> {
    let r = BufReader::new(fs::File::open(path)?);
    Ok(serde_json::from_reader(r)?)
}

/// Residual of `y` after projecting onto the line spanned by unit `u`.
pub fn line_residual(y: &[f64], u: &[f64]) -> f64 {
    let c = dot(y, u);
    y.iter()
        .zip(u)
        .map(|(a, b)| (a - c * b).powi(2))
        .sum::<f64>()
        .sqrt()
}
