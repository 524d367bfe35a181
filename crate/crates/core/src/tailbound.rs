//! Tail weight of a one-dimensional marginal and the asymptotic lower bound
//! on expressed variance as a function of the contamination level.
//!
//! For a symmetric unit-variance marginal `mu`, `c(alpha)` is the half-width
//! of the centered interval holding mass `alpha`, and the tail weight
//! `V(alpha)` is the second moment of `mu` restricted to that interval. By
//! convention `V(x) = 0` for `x < 0` and `V(x) = +inf` for `x > 1`.
//!
//! The bound for contamination `lambda` and trim ratio `r = t_hat / t` is
//!
//! ```text
//! max_{kappa > 0} V(1 - lambda (1 + kappa) / ((1 - lambda) kappa)) / (1 + kappa)
//!     * V(r - lambda / (1 - lambda)) / V(r)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// One-dimensional signal marginal.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    /// Standard normal.
    Gaussian,
    /// Uniform on `[-sqrt(3), sqrt(3)]`.
    Uniform,
    /// Standardized samples (mean 0, variance 1), kept as sorted magnitudes.
    Empirical {
        samples: Vec<f64>,
        sorted_abs: Vec<f64>,
        /// `prefix_sq[k] = sum of the k smallest squared magnitudes`.
        prefix_sq: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarginalSpec", into = "MarginalSpec")]
pub struct TailModel {
    marginal: Marginal,
    /// Absolute tolerance of the adaptive quadrature for `V`.
    pub quad_tol: f64,
}

/// Serialized form of a [`TailModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalSpec {
    Gaussian,
    Uniform,
    Empirical(Vec<f64>),
}

impl TryFrom<MarginalSpec> for TailModel {
    type Error = Error;

    fn try_from(spec: MarginalSpec) -> Result<Self> {
        match spec {
            MarginalSpec::Gaussian => Ok(TailModel::gaussian()),
            MarginalSpec::Uniform => Ok(TailModel::uniform()),
            MarginalSpec::Empirical(s) => TailModel::empirical(&s),
        }
    }
}

impl From<TailModel> for MarginalSpec {
    fn from(m: TailModel) -> Self {
        match m.marginal {
            Marginal::Gaussian => MarginalSpec::Gaussian,
            Marginal::Uniform => MarginalSpec::Uniform,
            Marginal::Empirical { samples, .. } => MarginalSpec::Empirical(samples),
        }
    }
}

const DEFAULT_QUAD_TOL: f64 = 1e-13;

impl TailModel {
    pub fn gaussian() -> Self {
        TailModel {
            marginal: Marginal::Gaussian,
            quad_tol: DEFAULT_QUAD_TOL,
        }
    }

    pub fn uniform() -> Self {
        TailModel {
            marginal: Marginal::Uniform,
            quad_tol: DEFAULT_QUAD_TOL,
        }
    }

    /// Empirical marginal from raw samples; they are centered and scaled to
    /// unit variance (divisor `N`).
    pub fn empirical(samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invalid("empirical marginal needs at least two samples"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        if !(var > 0.0) {
            return Err(invalid("empirical samples have zero variance"));
        }
        let sd = var.sqrt();
        let std: Vec<f64> = samples.iter().map(|x| (x - mean) / sd).collect();
        let mut sorted_abs: Vec<f64> = std.iter().map(|x| x.abs()).collect();
        sorted_abs.sort_by(f64::total_cmp);
        let mut prefix_sq = Vec::with_capacity(sorted_abs.len() + 1);
        prefix_sq.push(0.0);
        for a in &sorted_abs {
            prefix_sq.push(prefix_sq.last().unwrap() + a * a);
        }
        Ok(TailModel {
            marginal: Marginal::Empirical {
                samples: samples.to_vec(),
                sorted_abs,
                prefix_sq,
            },
            quad_tol: DEFAULT_QUAD_TOL,
        })
    }

    pub fn marginal(&self) -> &Marginal {
        &self.marginal
    }

    pub fn name(&self) -> &'static str {
        match self.marginal {
            Marginal::Gaussian => "gaussian",
            Marginal::Uniform => "uniform",
            Marginal::Empirical { .. } => "empirical",
        }
    }

    /// Signed standardized samples of an empirical model.
    pub(crate) fn standardized_samples(&self) -> Option<Vec<f64>> {
        match &self.marginal {
            Marginal::Empirical { samples, .. } => {
                let n = samples.len() as f64;
                let mean = samples.iter().sum::<f64>() / n;
                let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
                Some(samples.iter().map(|x| (x - mean) / sd).collect())
            }
            _ => None,
        }
    }

    /// `mu([-c, c])`
    pub fn symmetric_mass(&self, c: f64) -> f64 {
        if c <= 0.0 {
            return 0.0;
        }
        match &self.marginal {
            Marginal::Gaussian => libm::erf(c / std::f64::consts::SQRT_2),
            Marginal::Uniform => (c / SQRT_3).min(1.0),
            Marginal::Empirical { sorted_abs, .. } => {
                // inverse of the piecewise-linear quantile used by c_alpha
                let n = sorted_abs.len();
                let k = sorted_abs.partition_point(|&a| a < c);
                if k >= n {
                    return 1.0;
                }
                let lo = if k == 0 { 0.0 } else { sorted_abs[k - 1] };
                let hi = sorted_abs[k];
                let frac = if hi > lo { (c - lo) / (hi - lo) } else { 1.0 };
                (k as f64 + frac) / n as f64
            }
        }
    }

    fn density(&self, x: f64) -> f64 {
        match self.marginal {
            Marginal::Gaussian => INV_SQRT_2PI * (-0.5 * x * x).exp(),
            Marginal::Uniform => {
                if x.abs() <= SQRT_3 {
                    0.5 / SQRT_3
                } else {
                    0.0
                }
            }
            Marginal::Empirical { .. } => unreachable!("empirical marginals have no density"),
        }
    }

    /// Half-width `c` with `mu([-c, c]) = alpha`.
    ///
    /// Continuous marginals use bisection on the symmetric mass down to an
    /// interval width of `1e-12`; `alpha = 1` maps to the support edge
    /// (`+inf` for the Gaussian).
    pub fn c_alpha(&self, alpha: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(invalid(format!("alpha = {alpha} outside [0, 1]")));
        }
        if alpha == 0.0 {
            return Ok(0.0);
        }
        let hi = match &self.marginal {
            Marginal::Gaussian if alpha == 1.0 => return Ok(f64::INFINITY),
            Marginal::Gaussian => 40.0,
            Marginal::Uniform => SQRT_3,
            Marginal::Empirical { sorted_abs, .. } => {
                let n = sorted_abs.len();
                let pos = alpha * n as f64;
                let k = (pos.floor() as usize).min(n - 1);
                let lo = if k == 0 { 0.0 } else { sorted_abs[k - 1] };
                let frac = pos - k as f64;
                return Ok(lo + frac * (sorted_abs[k] - lo));
            }
        };
        let (mut lo, mut hi) = (0.0f64, hi);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.symmetric_mass(mid) < alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Tail weight `V(alpha)`.
    pub fn tail_weight(&self, alpha: f64) -> f64 {
        if alpha.is_nan() {
            return f64::NAN;
        }
        if alpha <= 0.0 {
            return 0.0;
        }
        if alpha > 1.0 {
            return f64::INFINITY;
        }
        if alpha == 1.0 {
            return 1.0;
        }
        match &self.marginal {
            Marginal::Empirical {
                sorted_abs,
                prefix_sq,
                ..
            } => {
                let n = sorted_abs.len();
                let pos = alpha * n as f64;
                let k = (pos.floor() as usize).min(n - 1);
                let frac = pos - k as f64;
                (prefix_sq[k] + frac * sorted_abs[k] * sorted_abs[k]) / n as f64
            }
            _ => {
                let c = self.c_alpha(alpha).expect("alpha checked above");
                let f = |x: f64| x * x * self.density(x);
                2.0 * adaptive_simpson(&f, 0.0, c, self.quad_tol)
            }
        }
    }
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Log-spaced search range for `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    /// Golden-section refinement around the best grid point.
    pub refine: bool,
}

impl Default for KappaGrid {
    fn default() -> Self {
        KappaGrid {
            min: 1e-4,
            max: 1e4,
            points: 2000,
            refine: true,
        }
    }
}

impl KappaGrid {
    pub fn values(&self) -> Vec<f64> {
        let (lo, hi) = (self.min.ln(), self.max.ln());
        let n = self.points.max(2);
        (0..n)
            .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    /// Asymptotic contamination level, in `[0, 0.5)`.
    pub lambda_star: f64,
    /// `t_hat / t`, in `(lambda / (1 - lambda), 1]`.
    pub t_hat_ratio: f64,
    #[serde(default)]
    pub kappa: KappaGrid,
}

impl BoundQuery {
    pub fn new(lambda_star: f64, t_hat_ratio: f64) -> Self {
        BoundQuery {
            lambda_star,
            t_hat_ratio,
            kappa: KappaGrid::default(),
        }
    }
}

/// How the trim level of a bound curve is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrimLevel {
    /// Fixed `t_hat / t`.
    OfAuthentic(f64),
    /// Fixed `t_hat / n`; the ratio `t_hat / t` becomes `f / (1 - lambda)`.
    OfTotal(f64),
}

impl TrimLevel {
    pub fn ratio_at(&self, lambda: f64) -> f64 {
        match *self {
            TrimLevel::OfAuthentic(r) => r,
            TrimLevel::OfTotal(f) => f / (1.0 - lambda),
        }
    }
}

/// First factor of the bound at a given `kappa`.
fn removal_factor(model: &TailModel, lambda: f64, kappa: f64) -> f64 {
    let arg = 1.0 - lambda * (1.0 + kappa) / ((1.0 - lambda) * kappa);
    model.tail_weight(arg) / (1.0 + kappa)
}

/// Asymptotic lower bound on expressed variance.
///
/// At `lambda_star = 0` the supremum over `kappa` is approached as
/// `kappa -> 0` and equals 1; that limit is returned exactly.
pub fn asymptotic_bound(model: &TailModel, q: &BoundQuery) -> Result<f64> {
    let lambda = q.lambda_star;
    let r = q.t_hat_ratio;
    if !(0.0..0.5).contains(&lambda) {
        return Err(invalid(format!("lambda_star = {lambda} outside [0, 0.5)")));
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(invalid(format!("t_hat_ratio = {r} outside (0, 1]")));
    }
    let g = q.kappa;
    if !(g.min > 0.0 && g.max > g.min && g.points >= 2) {
        return Err(invalid("kappa grid must be positive and increasing"));
    }
    let contamination = lambda / (1.0 - lambda);
    let v_r = model.tail_weight(r);
    if r <= contamination || !(v_r > 0.0) {
        return Err(Error::TrimBelowContamination);
    }
    let trim_factor = model.tail_weight(r - contamination) / v_r;
    if lambda == 0.0 {
        return Ok(trim_factor);
    }

    let grid = g.values();
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, &k) in grid.iter().enumerate() {
        let v = removal_factor(model, lambda, k);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    if g.refine && best > 0.0 {
        let lo = grid[best_i.saturating_sub(1)].ln();
        let hi = grid[(best_i + 1).min(grid.len() - 1)].ln();
        let f = |t: f64| removal_factor(model, lambda, t.exp());
        let (_, v) = golden_section_max(&f, lo, hi, 1e-12);
        best = best.max(v);
    }
    Ok(best.max(0.0) * trim_factor)
}

fn golden_section_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `(lambda, bound)` for each contamination level.
pub fn bound_curve(model: &TailModel, lambdas: &[f64], trim: TrimLevel) -> Result<Vec<(f64, f64)>> {
    lambdas
        .iter()
        .map(|&l| {
            let q = BoundQuery::new(l, trim.ratio_at(l));
            asymptotic_bound(model, &q).map(|b| (l, b))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_alpha_examples() {
        let g = TailModel::gaussian();
        assert_eq!(g.c_alpha(0.0).unwrap(), 0.0);
        assert!((g.c_alpha(0.5).unwrap() - 0.674_489_750_196_081_7).abs() < 1e-10);
        let u = TailModel::uniform();
        for a in [0.1, 0.37, 0.9] {
            assert!((u.c_alpha(a).unwrap() - SQRT_3 * a).abs() < 1e-11);
        }
        assert!(g.c_alpha(-0.1).is_err());
        assert!(g.c_alpha(1.1).is_err());
        assert_eq!(g.c_alpha(1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn c_alpha_inverts_mass() {
        let g = TailModel::gaussian();
        for i in 1..100 {
            let a = i as f64 / 100.0;
            let c = g.c_alpha(a).unwrap();
            assert!((g.symmetric_mass(c) - a).abs() < 1e-10);
        }
    }

    #[test]
    fn tail_weight_conventions() {
        for m in [TailModel::gaussian(), TailModel::uniform()] {
            assert_eq!(m.tail_weight(0.0), 0.0);
            assert_eq!(m.tail_weight(1.0), 1.0);
            assert_eq!(m.tail_weight(-0.3), 0.0);
            assert_eq!(m.tail_weight(1.2), f64::INFINITY);
        }
    }

    #[test]
    fn gaussian_half_mass_tail_weight() {
        let v = TailModel::gaussian().tail_weight(0.5);
        assert!((v - 0.0713).abs() < 1e-3, "{v}");
    }

    #[test]
    fn empirical_model_standardizes() {
        let samples: Vec<f64> = (0..1000).map(|i| 3.0 + 2.0 * ((i as f64 + 0.5) / 1000.0 - 0.5)).collect();
        let m = TailModel::empirical(&samples).unwrap();
        assert_eq!(m.tail_weight(1.0), 1.0);
        assert_eq!(m.tail_weight(0.0), 0.0);
        // standardized uniform grid approximates the uniform marginal
        for a in [0.2, 0.5, 0.8] {
            assert!((m.tail_weight(a) - a.powi(3)).abs() < 1e-3);
            assert!((m.c_alpha(a).unwrap() - SQRT_3 * a).abs() < 1e-2);
        }
        let mut prev = 0.0;
        for i in 0..=200 {
            let v = m.tail_weight(i as f64 / 200.0);
            assert!(v >= prev);
            prev = v;
        }
        assert!(TailModel::empirical(&[1.0]).is_err());
        assert!(TailModel::empirical(&[2.0, 2.0, 2.0]).is_err());
    }

    #[test]
    fn tail_weight_bounded_by_interval() {
        for m in [TailModel::gaussian(), TailModel::uniform()] {
            for i in 1..100 {
                let a = i as f64 / 100.0;
                let c = m.c_alpha(a).unwrap();
                let v = m.tail_weight(a);
                assert!(v >= 0.0);
                assert!(v <= a * c * c + 1e-12);
                assert!((m.tail_weight(a + 1e-6) - v).abs() <= 1e-4);
            }
        }
    }

    #[test]
    fn bound_at_zero_contamination_is_one() {
        for m in [TailModel::gaussian(), TailModel::uniform()] {
            assert_eq!(asymptotic_bound(&m, &BoundQuery::new(0.0, 0.7)).unwrap(), 1.0);
            assert_eq!(bound_curve(&m, &[0.0], TrimLevel::OfAuthentic(1.0)).unwrap(), vec![(0.0, 1.0)]);
        }
    }

    #[test]
    fn bound_rejects_bad_queries() {
        let g = TailModel::gaussian();
        assert!(asymptotic_bound(&g, &BoundQuery::new(0.5, 1.0)).is_err());
        assert!(asymptotic_bound(&g, &BoundQuery::new(0.2, 0.0)).is_err());
        assert!(matches!(
            asymptotic_bound(&g, &BoundQuery::new(0.4, 0.5)),
            Err(Error::TrimBelowContamination)
        ));
    }

    #[test]
    fn bound_curves_in_unit_interval_and_decreasing() {
        let lambdas: Vec<f64> = (0..=45).map(|i| i as f64 / 100.0).collect();
        for m in [TailModel::gaussian(), TailModel::uniform()] {
            let curve = bound_curve(&m, &lambdas, TrimLevel::OfTotal(0.5)).unwrap();
            for w in curve.windows(2) {
                assert!(w[1].1 <= w[0].1 + 1e-12);
            }
            for &(l, b) in &curve {
                assert!(b > 0.0 && b <= 1.0, "lambda {l}: {b}");
            }
        }
        let u = TailModel::uniform();
        let c = bound_curve(&u, &[0.1, 0.3], TrimLevel::OfAuthentic(1.0)).unwrap();
        assert!(c[0].1 >= c[1].1);
    }

    #[test]
    fn marginal_serde_round_trip() {
        let m = TailModel::empirical(&[1.0, -2.0, 0.5]).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: TailModel = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
        let g: TailModel = serde_json::from_str("\"gaussian\"").unwrap();
        assert_eq!(g, TailModel::gaussian());
    }
}
