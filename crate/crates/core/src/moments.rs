//! Method-of-moments estimators and vector similarity measures.
//!
//! Divisors: single-series variance-like statistics ([`central_moment`]) use
//! `N - 1`; ensemble statistics (joint moments, mean similarity measures) use
//! the number of realizations `N`. Lag estimators divide by the number of
//! products `N - k`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs_powi, powf, sqrt};
use crate::processes::Covariance;

/// Positive moment order `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MomentOrder(u32);

impl MomentOrder {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("MomentOrder", "m must be >= 1"));
        }
        Ok(MomentOrder(m))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for MomentOrder {
    type Error = Error;

    fn try_from(m: u32) -> Result<Self> {
        MomentOrder::new(m)
    }
}

/// Realizations of a random vector, stored row-major (one row per trial).
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    dim: usize,
    data: Vec<f64>,
}

impl Ensemble {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("Ensemble", "dimension must be >= 1"));
        }
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                op: "Ensemble",
                expected: dim * (data.len() / dim + 1),
                found: data.len(),
            });
        }
        Ok(Ensemble { dim, data })
    }

    pub fn with_capacity(dim: usize, trials: usize) -> Result<Self> {
        let mut e = Ensemble::new(dim, Vec::new())?;
        e.data.reserve(dim * trials);
        Ok(e)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut e = Ensemble::with_capacity(dim, rows.len())?;
        for r in rows {
            e.push(r.as_ref())?;
        }
        Ok(e)
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        Error::check_len("Ensemble::push", self.dim, row.len())?;
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trials(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Per-coordinate ensemble means.
    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for r in self.rows() {
            for (a, x) in m.iter_mut().zip(r) {
                *a += x;
            }
        }
        let n = self.trials() as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// Per-coordinate ensemble variances about `means`, divisor `N`.
    pub fn column_variances(&self, means: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for r in self.rows() {
            for ((a, x), m) in v.iter_mut().zip(r).zip(means) {
                *a += (x - m) * (x - m);
            }
        }
        let n = self.trials() as f64;
        v.iter_mut().for_each(|a| *a /= n);
        v
    }

    fn require_trials(&self, op: &'static str, needed: usize) -> Result<()> {
        if self.trials() < needed {
            return Err(Error::TooShort { op, needed, found: self.trials() });
        }
        Ok(())
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// `(1/N) Σ |x_i|^m`.
pub fn general_moment(x: &[f64], m: MomentOrder) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::TooShort { op: "general_moment", needed: 1, found: 0 });
    }
    Ok(x.iter().map(|&v| abs_powi(v, m.get())).sum::<f64>() / x.len() as f64)
}

/// `(1/(N-1)) Σ |x_i - x̄|^m`, optionally divided by `s^m` with `s²` the
/// `N - 1` sample variance.
pub fn central_moment(x: &[f64], m: MomentOrder, normalized: bool) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::TooShort { op: "central_moment", needed: 2, found: x.len() });
    }
    let xm = mean(x);
    let d = (x.len() - 1) as f64;
    let mu = x.iter().map(|&v| abs_powi(v - xm, m.get())).sum::<f64>() / d;
    if !normalized {
        return Ok(mu);
    }
    let var = x.iter().map(|&v| (v - xm) * (v - xm)).sum::<f64>() / d;
    if var == 0.0 {
        return Err(Error::Degenerate { op: "central_moment", detail: "zero variance" });
    }
    Ok(mu / powf(var, m.get() as f64 / 2.0))
}

/// Whether lag estimators enforce `k <= N/10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LagGuard {
    #[default]
    Enforced,
    Disabled,
}

impl LagGuard {
    fn check(self, lag: usize, n: usize) -> Result<()> {
        if lag >= n {
            return Err(Error::LagTooLarge { lag, limit: n.saturating_sub(1) });
        }
        if self == LagGuard::Enforced && lag * 10 > n {
            return Err(Error::LagTooLarge { lag, limit: n / 10 });
        }
        Ok(())
    }
}

/// `(1/(N-k)) Σ_{i<N-k} (x_i - x̄)(x_{i+k} - x̄)`; with `demean = false` the
/// raw product moment.
pub fn autocov_est(x: &[f64], k: usize, demean: bool, guard: LagGuard) -> Result<f64> {
    crosscov_est(x, x, k as i64, demean, guard)
}

/// `(1/(N-k)) Σ (x1_i - x̄1)(x2_{i+k} - x̄2)` with `N = min(N1, N2)`;
/// negative `k` swaps the roles of the two series.
pub fn crosscov_est(x1: &[f64], x2: &[f64], k: i64, demean: bool, guard: LagGuard) -> Result<f64> {
    let n = x1.len().min(x2.len());
    if n == 0 {
        return Err(Error::TooShort { op: "crosscov_est", needed: 1, found: 0 });
    }
    let (a, b) = (&x1[..n], &x2[..n]);
    let lag = k.unsigned_abs() as usize;
    guard.check(lag, n)?;
    let (ma, mb) = if demean { (mean(a), mean(b)) } else { (0.0, 0.0) };
    let (lead, lagged, ml, mg) = if k >= 0 { (a, b, ma, mb) } else { (b, a, mb, ma) };
    let s: f64 = (0..n - lag).map(|i| (lead[i] - ml) * (lagged[i + lag] - mg)).sum();
    Ok(s / (n - lag) as f64)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `⟨x1, x2⟩ / (‖x1‖₂‖x2‖₂)`.
pub fn cosine_similarity(x1: &[f64], x2: &[f64]) -> Result<f64> {
    Error::check_len("cosine_similarity", x1.len(), x2.len())?;
    let (n1, n2) = (sqrt(dot(x1, x1)), sqrt(dot(x2, x2)));
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::Degenerate { op: "cosine_similarity", detail: "zero vector" });
    }
    Ok((dot(x1, x2) / (n1 * n2)).clamp(-1.0, 1.0))
}

fn check_pair_ensembles(op: &'static str, e1: &Ensemble, e2: &Ensemble) -> Result<()> {
    Error::check_len(op, e1.dim(), e2.dim())?;
    Error::check_len(op, e1.trials(), e2.trials())?;
    e1.require_trials(op, 1)
}

/// Mean cosine similarity of paired realizations: the coordinate-averaged
/// ensemble covariance divided by the geometric mean of the
/// coordinate-averaged variances.
pub fn mean_cosine_similarity(e1: &Ensemble, e2: &Ensemble) -> Result<f64> {
    check_pair_ensembles("mean_cosine_similarity", e1, e2)?;
    let (m1, m2) = (e1.column_means(), e2.column_means());
    let (mut c, mut v1, mut v2) = (0.0, 0.0, 0.0);
    for (r1, r2) in e1.rows().zip(e2.rows()) {
        for i in 0..e1.dim() {
            let (a, b) = (r1[i] - m1[i], r2[i] - m2[i]);
            c += a * b;
            v1 += a * a;
            v2 += b * b;
        }
    }
    if v1 == 0.0 || v2 == 0.0 {
        return Err(Error::Degenerate { op: "mean_cosine_similarity", detail: "zero variance" });
    }
    Ok(c / sqrt(v1 * v2))
}

/// `(Σ |x1_i - x2_i|^m)^{1/m}`.
pub fn minkowski_distance(x1: &[f64], x2: &[f64], m: MomentOrder) -> Result<f64> {
    Error::check_len("minkowski_distance", x1.len(), x2.len())?;
    let s: f64 = x1.iter().zip(x2).map(|(a, b)| abs_powi(a - b, m.get())).sum();
    Ok(powf(s, 1.0 / m.get() as f64))
}

/// Unnormalized: `(Σ_i Ê|X1_i - X2_i|^m)^{1/m}`. Normalized: the coordinate
/// average of `Ê|D_i - D̄_i|^m / var(D_i)^{m/2}` for the difference
/// `D = X1 - X2` (ensemble means and divisor `N`).
pub fn mean_minkowski(e1: &Ensemble, e2: &Ensemble, m: MomentOrder, normalized: bool) -> Result<f64> {
    check_pair_ensembles("mean_minkowski", e1, e2)?;
    let dim = e1.dim();
    let n = e1.trials() as f64;
    let mut diff = Ensemble::with_capacity(dim, e1.trials())?;
    let mut row = vec![0.0; dim];
    for (r1, r2) in e1.rows().zip(e2.rows()) {
        for i in 0..dim {
            row[i] = r1[i] - r2[i];
        }
        diff.push(&row)?;
    }
    if !normalized {
        let mut s = 0.0;
        for r in diff.rows() {
            s += r.iter().map(|&d| abs_powi(d, m.get())).sum::<f64>();
        }
        return Ok(powf(s / n, 1.0 / m.get() as f64));
    }
    let means = diff.column_means();
    let vars = diff.column_variances(&means);
    if vars.contains(&0.0) {
        return Err(Error::Degenerate { op: "mean_minkowski", detail: "zero-variance coordinate" });
    }
    let mut mu = vec![0.0; dim];
    for r in diff.rows() {
        for i in 0..dim {
            mu[i] += abs_powi(r[i] - means[i], m.get());
        }
    }
    let total: f64 = (0..dim).map(|i| mu[i] / n / powf(vars[i], m.get() as f64 / 2.0)).sum();
    Ok(total / dim as f64)
}

/// `Ê[Π_i (X_i - X̄_i)^{m_i}]` with ensemble means and divisor `N`.
pub fn joint_central_moment(e: &Ensemble, orders: &[u32]) -> Result<f64> {
    Error::check_len("joint_central_moment", e.dim(), orders.len())?;
    e.require_trials("joint_central_moment", 1)?;
    if orders.contains(&0) {
        return Err(Error::domain("joint_central_moment", "orders must be >= 1"));
    }
    let means = e.column_means();
    let mut s = 0.0;
    for r in e.rows() {
        let mut p = 1.0;
        for ((x, m), &o) in r.iter().zip(&means).zip(orders) {
            p *= crate::math::powi(x - m, o);
        }
        s += p;
    }
    Ok(s / e.trials() as f64)
}

/// `Σ_{i<N} (x_{i+1} - x_i)²` over a series of `N + 1` samples.
pub fn total_variation_sq(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::TooShort { op: "total_variation_sq", needed: 2, found: x.len() });
    }
    Ok(x.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum())
}

/// Ensemble average of [`total_variation_sq`] over the rows of `e`.
pub fn mean_total_variation_sq(e: &Ensemble) -> Result<f64> {
    e.require_trials("mean_total_variation_sq", 1)?;
    let mut s = 0.0;
    for r in e.rows() {
        s += total_variation_sq(r)?;
    }
    Ok(s / e.trials() as f64)
}

/// `2N (C(0) - C(1))`, the expected [`total_variation_sq`] of `N` increments
/// of a stationary process with covariance `kernel`.
pub fn mean_tv_closed<K: Covariance + ?Sized>(kernel: &K, n: usize) -> f64 {
    2.0 * n as f64 * (kernel.at(0) - kernel.at(1))
}
