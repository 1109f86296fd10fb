//! Statistics of the sum of the components of a random vector.
//!
//! For a realization `x` with per-coordinate means `x̄`, the centered sum is
//! `|X| = Σ_i (x_i - x̄_i)`. The central sum-moment of order `m` is
//! `E|Σ_i (X_i - X̄_i)|^m`; for `m = 2` it equals the grand sum of the
//! covariance matrix.
//!
//! Ensemble functions take the centering means as an `Option`: `Some` uses
//! the supplied (true) means, `None` estimates them from the ensemble.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math::{abs, abs_powi, exp, powi, sqrt};
use crate::moments::{Ensemble, MomentOrder};
use crate::processes::CovMatrix;
use crate::specfun::gaussian_abs_moment;

/// Polynomial `Σ_l p_l x^l` with a declared degree `coeffs.len() - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySpec {
    coeffs: Vec<f64>,
}

impl PolySpec {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::domain("PolySpec", "at least one coefficient is required"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("PolySpec", "non-finite coefficient"));
        }
        Ok(PolySpec { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        self.coeffs.iter().enumerate().skip(2).rev().fold(0.0, |acc, (l, c)| acc * x + c * (l * (l - 1)) as f64)
    }
}

fn centered_sum(op: &'static str, x: &[f64], means: &[f64]) -> Result<f64> {
    Error::check_len(op, x.len(), means.len())?;
    Ok(x.iter().zip(means).map(|(a, b)| a - b).sum())
}

/// `Σ_l p_l (Σ_i (x_i - x̄_i))^l`.
pub fn poly_field_eval(x: &[f64], means: &[f64], poly: &PolySpec) -> Result<f64> {
    Ok(poly.eval(centered_sum("poly_field_eval", x, means)?))
}

/// `Z(a) = (1/a) Σ_i (x_i - x̄_i)`.
pub fn z_stat(x: &[f64], means: &[f64], a: f64) -> Result<f64> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::domain("z_stat", alloc::format!("normalizer a = {a} must be finite and nonzero")));
    }
    Ok(centered_sum("z_stat", x, means)? / a)
}

fn resolve_means(op: &'static str, e: &Ensemble, means: Option<&[f64]>) -> Result<Vec<f64>> {
    if e.trials() == 0 {
        return Err(Error::TooShort { op, needed: 1, found: 0 });
    }
    match means {
        Some(m) => {
            Error::check_len(op, e.dim(), m.len())?;
            Ok(m.to_vec())
        }
        None => Ok(e.column_means()),
    }
}

/// Ensemble average of `|Σ_i (X_i - X̄_i)|^m`.
pub fn central_summoment(e: &Ensemble, m: MomentOrder, means: Option<&[f64]>) -> Result<f64> {
    central_summoment_multi(&[e], m, means.map(|v| vec![v]).as_deref())
}

/// Central sum-moment over `L` blocks observed jointly (row `t` of every
/// block belongs to trial `t`): the ensemble average of
/// `|Σ_l Σ_i (X_li - X̄_li)|^m`.
pub fn central_summoment_multi(blocks: &[&Ensemble], m: MomentOrder, means: Option<&[&[f64]]>) -> Result<f64> {
    let first = blocks.first().ok_or(Error::TooShort { op: "central_summoment", needed: 1, found: 0 })?;
    let trials = first.trials();
    if let Some(ms) = means {
        Error::check_len("central_summoment: means per block", blocks.len(), ms.len())?;
    }
    let mut centers = Vec::with_capacity(blocks.len());
    for (l, b) in blocks.iter().enumerate() {
        Error::check_len("central_summoment: trials per block", trials, b.trials())?;
        centers.push(resolve_means("central_summoment", b, means.map(|ms| ms[l]))?);
    }
    let mut acc = 0.0;
    for t in 0..trials {
        let mut s = 0.0;
        for (b, c) in blocks.iter().zip(&centers) {
            s += b.row(t).iter().zip(c).map(|(x, mu)| x - mu).sum::<f64>();
        }
        acc += abs_powi(s, m.get());
    }
    Ok(acc / trials as f64)
}

/// Second central sum-moment from the covariance: its grand sum.
pub fn summoment2_from_cov(cov: &CovMatrix) -> f64 {
    cov.grand_sum()
}

/// Grand sum of the `n × n` Toeplitz matrix of `σ² e^{-α|k|}(1 + α|k|)`:
/// `σ² (N + 2 Σ_{i=1}^{N-1} i (1 + (N-i)α) e^{-α(N-i)})`.
pub fn summoment2_markov2(sigma2: f64, alpha: f64, n: usize) -> f64 {
    let mut s = n as f64;
    for i in 1..n {
        let k = (n - i) as f64;
        s += 2.0 * i as f64 * (1.0 + k * alpha) * exp(-alpha * k);
    }
    sigma2 * s
}

/// `E|1ᵀX|^m` for `X ~ N(0, C)`: `‖1ᵀT‖₂^m · E|U|^m` with `T·Tᵀ = C`.
pub fn gaussian_summoment_closed(cov: &CovMatrix, m: MomentOrder) -> f64 {
    let t = cov.factor();
    let mut s2 = 0.0;
    for j in 0..t.cols() {
        let c: f64 = (0..t.rows()).map(|i| t[(i, j)]).sum();
        s2 += c * c;
    }
    let s = sqrt(s2);
    abs_powi(s, m.get()) * gaussian_abs_moment(m.get())
}

/// Ensemble average of `(Σ_i |X_i|)^m`; with `centered` the coordinates are
/// first centered (`means` or ensemble estimates).
pub fn summoment_l1(e: &Ensemble, m: MomentOrder, centered: bool, means: Option<&[f64]>) -> Result<f64> {
    let c = if centered {
        resolve_means("summoment_l1", e, means)?
    } else {
        resolve_means("summoment_l1", e, Some(&vec![0.0; e.dim()]))?
    };
    let mut acc = 0.0;
    for r in e.rows() {
        let s: f64 = r.iter().zip(&c).map(|(x, mu)| abs(x - mu)).sum();
        acc += abs_powi(s, m.get());
    }
    Ok(acc / e.trials() as f64)
}

/// Scaled Minkowski moment `Σ_i Ê|√N·X_i|^m` (uncentered).
pub fn minkowski_summoment(e: &Ensemble, m: MomentOrder) -> Result<f64> {
    if e.trials() == 0 {
        return Err(Error::TooShort { op: "minkowski_summoment", needed: 1, found: 0 });
    }
    let scale = sqrt(e.dim() as f64);
    let mut acc = 0.0;
    for r in e.rows() {
        acc += r.iter().map(|&x| abs_powi(scale * x, m.get())).sum::<f64>();
    }
    Ok(acc / e.trials() as f64)
}

/// Ensemble average of `exp(s·Z(a))`.
pub fn mgf_estimate(e: &Ensemble, a: f64, s: f64, means: Option<&[f64]>) -> Result<f64> {
    let c = resolve_means("mgf_estimate", e, means)?;
    let mut acc = 0.0;
    for (t, r) in e.rows().enumerate() {
        let v = exp(s * z_stat(r, &c, a)?);
        acc += v;
        if !acc.is_finite() {
            return Err(Error::Overflow { op: "mgf_estimate", trial: t });
        }
    }
    Ok(acc / e.trials() as f64)
}

const MULTINOMIAL_MAX: usize = 6;

/// `((Σx)^m, Σ_{|n|=m} m!/(n_1!…n_d!) Π x_i^{n_i})`, the second computed
/// by enumerating the compositions of `m` lexicographically with exact
/// integer coefficients.
pub fn multinomial_expand_check(x: &[f64], m: MomentOrder) -> Result<(f64, f64)> {
    let d = x.len();
    let mu = m.get() as usize;
    if d == 0 || d > MULTINOMIAL_MAX || mu > MULTINOMIAL_MAX {
        return Err(Error::domain(
            "multinomial_expand_check",
            alloc::format!("dimension {d} and order {mu} must both be in 1..=6"),
        ));
    }
    let lhs = powi(x.iter().sum(), m.get());
    let fact = |k: usize| (1..=k as u64).product::<u64>();
    let mut rhs = 0.0;
    let mut n = vec![0usize; d];
    compositions(&mut n, 0, mu, &mut |n| {
        let coef = fact(mu) / n.iter().map(|&k| fact(k)).product::<u64>();
        let term: f64 = n.iter().zip(x).map(|(&k, &v)| powi(v, k as u32)).product();
        rhs += coef as f64 * term;
    });
    Ok((lhs, rhs))
}

fn compositions(n: &mut [usize], i: usize, left: usize, f: &mut impl FnMut(&[usize])) {
    if i + 1 == n.len() {
        n[i] = left;
        f(n);
        return;
    }
    for k in 0..=left {
        n[i] = k;
        compositions(n, i + 1, left - k, f);
    }
}

/// Convex polynomial of degree `2m` from an `m × m` PSD matrix `Q`:
/// `q0 + q1·x + Σ_i p_i x^{i+2} / ((i+1)(i+2))` with `p_i = Σ_{k+l=i} Q_kl`,
/// so that `p''(x) = vᵀQv ≥ 0` for `v = (1, x, …, x^{m-1})`.
pub fn convex_poly_from_psd(q: &Matrix, q0: f64, q1: f64) -> Result<PolySpec> {
    let cov = CovMatrix::new(q.clone())?;
    let m = cov.dim();
    let mut coeffs = vec![0.0; 2 * m + 1];
    coeffs[0] = q0;
    coeffs[1] = q1;
    for k in 0..m {
        for l in 0..m {
            let i = k + l;
            coeffs[i + 2] += q[(k, l)] / ((i + 1) * (i + 2)) as f64;
        }
    }
    PolySpec::new(coeffs)
}
