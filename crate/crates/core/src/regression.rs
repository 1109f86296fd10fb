//! Linear least squares and the split-data approximation.
//!
//! The split fit sorts the data by the regressor, replaces the lower and upper
//! subsets by their average points `A₁ = (W̄₁₂, X̄₁)`, `A₂ = (W̄₂₂, X̄₂)` and
//! solves the resulting 2×2 system. Only the straight-line model
//! `y = P₁ + P₂·x` (first regressor constant 1) is covered by
//! [`split_ls_fit`]; [`split_ls_fit_blocks`] extends the idea to `D`
//! parameters with `D` contiguous blocks.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{lstsq_qr, solve, Matrix};
use crate::math::{powi, sqrt};
use crate::processes::TimeSeries;
use crate::summoments::PolySpec;

const SINGULAR_CONDITION: f64 = 1e14;

/// `N × D` regressor matrix, one row `w_iᵀ` per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix(Matrix);

impl DesignMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.cols() == 0 {
            return Err(Error::domain("DesignMatrix", "at least one regressor is required"));
        }
        if m.rows() < m.cols() {
            return Err(Error::TooShort { op: "DesignMatrix", needed: m.cols(), found: m.rows() });
        }
        if !m.is_finite() {
            return Err(Error::domain("DesignMatrix", "non-finite entry"));
        }
        Ok(DesignMatrix(m))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Rows `(1, t, t², …, t^degree)`.
    pub fn vandermonde(t: &[f64], degree: usize) -> Result<Self> {
        Self::new(Matrix::from_fn(t.len(), degree + 1, |i, j| powi(t[i], j as u32)))
    }

    /// Rows `(1, x_i)`.
    pub fn straight_line(x: &[f64]) -> Result<Self> {
        Self::vandermonde(x, 1)
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn d(&self) -> usize {
        self.0.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

/// `(Σ w_i w_iᵀ, Σ w_i X_i)`.
fn normal_equations(design: &DesignMatrix, y: &[f64]) -> (Matrix, Vec<f64>) {
    let w = design.matrix();
    let d = design.d();
    let mut a = Matrix::zeros(d, d);
    let mut b = vec![0.0; d];
    for (i, &yi) in y.iter().enumerate() {
        let r = w.row(i);
        for j in 0..d {
            b[j] += r[j] * yi;
            for k in 0..d {
                a[(j, k)] += r[j] * r[k];
            }
        }
    }
    (a, b)
}

/// `P̂ = (Σ w_i w_iᵀ)⁻¹ Σ w_i X_i` solved from the normal equations, with a
/// spectral condition check on the normal matrix.
pub fn ls_fit_normal(design: &DesignMatrix, y: &[f64]) -> Result<Vec<f64>> {
    Error::check_len("ls_fit", design.n(), y.len())?;
    let (a, b) = normal_equations(design, y);
    let e = a.sym_eigen()?;
    let (max, min) = (e.max_value(), e.min_value());
    if !(min * SINGULAR_CONDITION > max) {
        return Err(Error::Singular { op: "ls_fit", condition: max / min.max(0.0) });
    }
    solve(&a, &b)
}

/// Exact least squares. Normal equations for `D <= 2`, Householder QR on the
/// design matrix otherwise.
pub fn ls_fit(design: &DesignMatrix, y: &[f64]) -> Result<Vec<f64>> {
    Error::check_len("ls_fit", design.n(), y.len())?;
    if design.d() <= 2 {
        return ls_fit_normal(design, y);
    }
    let (p, cond) = lstsq_qr(design.matrix(), y)?;
    if cond >= SINGULAR_CONDITION {
        return Err(Error::Singular { op: "ls_fit", condition: cond });
    }
    Ok(p)
}

/// Least-squares polynomial in the sample times of `x`.
pub fn poly_ls_fit(x: &TimeSeries, degree: usize) -> Result<PolySpec> {
    let t: Vec<f64> = (0..x.len()).map(|i| x.time(i)).collect();
    poly_ls_fit_points(&t, x.samples(), degree)
}

/// Least-squares polynomial through the points `(t_i, y_i)`.
pub fn poly_ls_fit_points(t: &[f64], y: &[f64], degree: usize) -> Result<PolySpec> {
    Error::check_len("poly_ls_fit", t.len(), y.len())?;
    let design = DesignMatrix::vandermonde(t, degree)?;
    PolySpec::new(ls_fit(&design, y)?)
}

/// Subset averages of the straight-line split fit with `a_l = N_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedPoints {
    /// `X̄₁`, `X̄₂`: mean observation per subset.
    pub y1: f64,
    pub y2: f64,
    /// `W̄₁₁`, `W̄₂₁`: mean of `w₁² = 1`.
    pub w11: f64,
    pub w21: f64,
    /// `W̄₁₂`, `W̄₂₂`: mean regressor per subset.
    pub w12: f64,
    pub w22: f64,
    pub a1: f64,
    pub a2: f64,
}

/// Gradient interval `(b_l, b_u)` and its width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientBounds {
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitLsResult {
    /// `(P̂₁, P̂₂)`: intercept and slope.
    pub estimates: [f64; 2],
    /// Original indices of the lower and upper subsets.
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
    pub averaged: AveragedPoints,
    pub bounds: Option<GradientBounds>,
}

/// Split fit with the balanced subsets; for odd `N` the lower subset takes
/// the extra point.
pub fn split_ls_fit(x: &[f64], y: &[f64]) -> Result<SplitLsResult> {
    split_ls_fit_with(x, y, x.len().div_ceil(2))
}

/// Split fit with the lowest `n1` points (by regressor) in the first subset.
pub fn split_ls_fit_with(x: &[f64], y: &[f64], n1: usize) -> Result<SplitLsResult> {
    Error::check_len("split_ls_fit", x.len(), y.len())?;
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort { op: "split_ls_fit", needed: 2, found: n });
    }
    if n1 == 0 || n1 >= n {
        return Err(Error::domain("split_ls_fit", alloc::format!("subset size {n1} must be in 1..{n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::domain("split_ls_fit", "non-finite input"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let (lower, upper) = order.split_at(n1);
    let avg = |idx: &[usize], v: &[f64]| idx.iter().map(|&i| v[i]).sum::<f64>() / idx.len() as f64;
    let averaged = AveragedPoints {
        y1: avg(lower, y),
        y2: avg(upper, y),
        w11: 1.0,
        w21: 1.0,
        w12: avg(lower, x),
        w22: avg(upper, x),
        a1: lower.len() as f64,
        a2: upper.len() as f64,
    };
    let spread = averaged.w22 - averaged.w12;
    if spread == 0.0 {
        return Err(Error::Degenerate { op: "split_ls_fit", detail: "subset regressor means coincide" });
    }
    let slope = (averaged.y2 - averaged.y1) / spread;
    let intercept = (averaged.w22 * averaged.y1 - averaged.w12 * averaged.y2) / spread;
    Ok(SplitLsResult {
        estimates: [intercept, slope],
        lower: lower.to_vec(),
        upper: upper.to_vec(),
        averaged,
        bounds: None,
    })
}

/// Bounds on the split-fit gradient for noise variance `noise_var`:
/// `b_{l,u} = ((X̄₂ ∓ ξ√var X̄₂) - (X̄₁ ± ξ√var X̄₁)) / (W̄₂₂ - W̄₁₂)`, centered
/// on the observed subset averages, with `var X̄ = N·noise_var` and
/// `var X̄_l = var X̄·N_l/(a_l² N)`.
pub fn split_gradient_bounds(result: &SplitLsResult, noise_var: f64, xi: f64) -> Result<GradientBounds> {
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::domain("split_gradient_bounds", alloc::format!("noise_var = {noise_var} must be > 0")));
    }
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(Error::domain("split_gradient_bounds", alloc::format!("xi = {xi} must be >= 0")));
    }
    let p = &result.averaged;
    let (n1, n2) = (result.lower.len() as f64, result.upper.len() as f64);
    let n = n1 + n2;
    let var_total = n * noise_var;
    let s1 = sqrt(var_total * n1 / (p.a1 * p.a1 * n));
    let s2 = sqrt(var_total * n2 / (p.a2 * p.a2 * n));
    let den = p.w22 - p.w12;
    let lower = ((p.y2 - xi * s2) - (p.y1 + xi * s1)) / den;
    let upper = ((p.y2 + xi * s2) - (p.y1 - xi * s1)) / den;
    Ok(GradientBounds { lower, upper, width: 2.0 * xi * (s1 + s2) / den })
}

/// `T = 100 (S_apr - S_opt) / S_opt` with `S = Σ (y_i - P₁ - P₂ x_i)²`
/// evaluated at `estimates` and at `truth`.
pub fn relative_excess_mse(y: &[f64], x: &[f64], estimates: [f64; 2], truth: [f64; 2]) -> Result<f64> {
    Error::check_len("relative_excess_mse", x.len(), y.len())?;
    let sse = |p: [f64; 2]| -> f64 {
        x.iter()
            .zip(y)
            .map(|(xi, yi)| {
                let r = yi - p[0] - p[1] * xi;
                r * r
            })
            .sum()
    };
    let s_opt = sse(truth);
    if s_opt == 0.0 {
        return Err(Error::Degenerate { op: "relative_excess_mse", detail: "zero error at the true parameters" });
    }
    Ok(100.0 * (sse(estimates) - s_opt) / s_opt)
}

/// Closed-form split fit for `x_i = Δ·i`, `i = 1..N` with `N` even and two
/// equal halves: `P̂₁ = ((2+3N)Ȳ₁ - (2+N)Ȳ₂)/(2N)`, `P̂₂ = 2(Ȳ₂ - Ȳ₁)/(ΔN)`.
pub fn split_closed_form_uniform(y: &[f64], delta: f64) -> Result<[f64; 2]> {
    let n = y.len();
    if n < 2 || n % 2 != 0 {
        return Err(Error::domain("split_closed_form_uniform", alloc::format!("N = {n} must be even and >= 2")));
    }
    if delta == 0.0 {
        return Err(Error::Degenerate { op: "split_closed_form_uniform", detail: "zero spacing" });
    }
    let h = n / 2;
    let nf = n as f64;
    let y1 = y[..h].iter().sum::<f64>() / h as f64;
    let y2 = y[h..].iter().sum::<f64>() / h as f64;
    Ok([((2.0 + 3.0 * nf) * y1 - (2.0 + nf) * y2) / (2.0 * nf), 2.0 * (y2 - y1) / (delta * nf)])
}

/// `D`-parameter split fit: rows sorted by column `sort_col`, cut into `D`
/// contiguous blocks of (nearly) equal size, each replaced by its average row
/// and observation; the resulting `D × D` system is solved exactly.
pub fn split_ls_fit_blocks(design: &DesignMatrix, y: &[f64], sort_col: usize) -> Result<Vec<f64>> {
    Error::check_len("split_ls_fit_blocks", design.n(), y.len())?;
    let (n, d) = (design.n(), design.d());
    if sort_col >= d {
        return Err(Error::domain("split_ls_fit_blocks", alloc::format!("sort column {sort_col} out of range")));
    }
    let w = design.matrix();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(i, sort_col)].total_cmp(&w[(j, sort_col)]));
    let mut a = Matrix::zeros(d, d);
    let mut b = vec![0.0; d];
    let mut start = 0;
    for l in 0..d {
        // Earlier blocks take the remainder, as in the two-subset rule.
        let len = n / d + usize::from(l < n % d);
        let block = &order[start..start + len];
        for &i in block {
            for k in 0..d {
                a[(l, k)] += w[(i, k)] / len as f64;
            }
            b[l] += y[i] / len as f64;
        }
        start += len;
    }
    solve(&a, &b)
}
