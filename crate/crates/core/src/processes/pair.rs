use alloc::vec;
use alloc::vec::Vec;

use super::cov::{CovMatrix, PSD_CLIP_TOL};
use super::TimeSeries;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math::sqrt;
use crate::rng::GaussianStream;

/// `x₁ = T₁u₁ + K·u₂`, `x₂ = T₂u₂` with independent `u₁ ~ N(0, σ₁²I)`,
/// `u₂ ~ N(0, σ₂²I)` of common length `N`.
#[derive(Debug, Clone)]
pub struct PairSpec {
    t1: Matrix,
    t2: Matrix,
    k: Matrix,
    sigma1_sq: f64,
    sigma2_sq: f64,
}

fn pad_cols(m: &Matrix, n: usize) -> Matrix {
    Matrix::from_fn(m.rows(), n, |i, j| if j < m.cols() { m[(i, j)] } else { 0.0 })
}

impl PairSpec {
    /// Matrices narrower than `N = max(cols)` are zero padded on the right.
    pub fn new(t1: Matrix, t2: Matrix, k: Matrix, sigma1_sq: f64, sigma2_sq: f64) -> Result<Self> {
        Error::check_len("PairSpec: rows of K", t1.rows(), k.rows())?;
        for s in [sigma1_sq, sigma2_sq] {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(Error::domain("PairSpec", alloc::format!("driving variance {s} must be >= 0")));
            }
        }
        if !(t1.is_finite() && t2.is_finite() && k.is_finite()) {
            return Err(Error::domain("PairSpec", "non-finite entry"));
        }
        let n = t1.cols().max(t2.cols()).max(k.cols()).max(t1.rows()).max(t2.rows());
        Ok(PairSpec { t1: pad_cols(&t1, n), t2: pad_cols(&t2, n), k: pad_cols(&k, n), sigma1_sq, sigma2_sq })
    }

    pub fn n1(&self) -> usize {
        self.t1.rows()
    }

    pub fn n2(&self) -> usize {
        self.t2.rows()
    }

    /// Length of the driving noise vectors.
    pub fn noise_len(&self) -> usize {
        self.t1.cols()
    }

    pub fn t1(&self) -> &Matrix {
        &self.t1
    }

    pub fn t2(&self) -> &Matrix {
        &self.t2
    }

    pub fn k(&self) -> &Matrix {
        &self.k
    }

    /// `σ₁²T₁T₁ᵀ + σ₂²KKᵀ`.
    pub fn c_x1(&self) -> Matrix {
        self.t1.gram().scale(self.sigma1_sq).add(&self.k.gram().scale(self.sigma2_sq)).expect("same shape")
    }

    /// `σ₂²T₂T₂ᵀ`.
    pub fn c_x2(&self) -> Matrix {
        self.t2.gram().scale(self.sigma2_sq)
    }

    /// `σ₂²KT₂ᵀ`.
    pub fn c_x1x2(&self) -> Matrix {
        self.k.matmul(&self.t2.transpose()).expect("padded to equal width").scale(self.sigma2_sq)
    }
}

/// Builds a [`PairSpec`] with unit driving variances realizing the three
/// covariance blocks: `T₂` factors `C_x2`, `K = C_x1x2·T₂^{-T}` and `T₁`
/// factors `C_x1 - KKᵀ`.
pub fn solve_pair_spec(c_x1: &CovMatrix, c_x2: &CovMatrix, c_x1x2: &Matrix) -> Result<PairSpec> {
    Error::check_len("solve_pair_spec: rows of C_x1x2", c_x1.dim(), c_x1x2.rows())?;
    Error::check_len("solve_pair_spec: cols of C_x1x2", c_x2.dim(), c_x1x2.cols())?;
    let eig = c_x2.eigen();
    let (max, min) = (eig.max_value(), eig.min_value());
    if !(min > 1e-12 * max) {
        return Err(Error::Singular { op: "solve_pair_spec", condition: max / min.max(0.0) });
    }
    let t2 = c_x2.factor().clone();
    // T₂^{-T} = U·Λ^{-1/2}
    let n2 = c_x2.dim();
    let t2_inv_t = Matrix::from_fn(n2, n2, |i, j| eig.vectors[(i, j)] / sqrt(eig.values[j]));
    let k = c_x1x2.matmul(&t2_inv_t)?;
    let resid = symmetrize(&c_x1.entries().sub(&k.gram())?);
    let r_eig = resid.sym_eigen()?;
    let scale = c_x1.eigen().max_value().max(r_eig.max_value());
    if r_eig.min_value() < -PSD_CLIP_TOL * scale {
        return Err(Error::Infeasible { min_eigenvalue: r_eig.min_value(), scale });
    }
    let n1 = c_x1.dim();
    let t1 = Matrix::from_fn(n1, n1, |i, j| r_eig.vectors[(i, j)] * sqrt(r_eig.values[j].max(0.0)));
    PairSpec::new(t1, t2, k, 1.0, 1.0)
}

fn symmetrize(m: &Matrix) -> Matrix {
    Matrix::from_fn(m.rows(), m.cols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

/// Reusable sampler for a fixed [`PairSpec`].
#[derive(Debug, Clone)]
pub struct PairSampler {
    spec: PairSpec,
    s1: f64,
    s2: f64,
}

impl PairSampler {
    pub fn new(spec: PairSpec) -> Self {
        let (s1, s2) = (sqrt(spec.sigma1_sq), sqrt(spec.sigma2_sq));
        PairSampler { spec, s1, s2 }
    }

    pub fn spec(&self) -> &PairSpec {
        &self.spec
    }

    /// Writes one draw into `x1` (length `N1`) and `x2` (length `N2`).
    pub fn sample_into(&self, g: &mut GaussianStream, x1: &mut [f64], x2: &mut [f64]) {
        let n = self.spec.noise_len();
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        g.fill_standard_normal(&mut u1);
        g.fill_standard_normal(&mut u2);
        for v in &mut u1 {
            *v *= self.s1;
        }
        for v in &mut u2 {
            *v *= self.s2;
        }
        let mut ku = vec![0.0; x1.len()];
        self.spec.t1.mul_vec_into(&u1, x1);
        self.spec.k.mul_vec_into(&u2, &mut ku);
        for (a, b) in x1.iter_mut().zip(&ku) {
            *a += b;
        }
        self.spec.t2.mul_vec_into(&u2, x2);
    }

    pub fn sample(&self, g: &mut GaussianStream) -> (Vec<f64>, Vec<f64>) {
        let mut x1 = vec![0.0; self.spec.n1()];
        let mut x2 = vec![0.0; self.spec.n2()];
        self.sample_into(g, &mut x1, &mut x2);
        (x1, x2)
    }
}

/// One draw of the correlated pair.
pub fn gen_correlated_pair(spec: &PairSpec, seed: u64) -> Result<(TimeSeries, TimeSeries)> {
    let (x1, x2) = PairSampler::new(spec.clone()).sample(&mut GaussianStream::new(seed));
    Ok((TimeSeries::new(x1)?, TimeSeries::new(x2)?))
}
