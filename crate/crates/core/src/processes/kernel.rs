use alloc::vec::Vec;

use super::cov::CovMatrix;
use super::MarkovParams;
use crate::error::Result;
use crate::math::exp;

/// A stationary covariance function of the integer lag.
pub trait Covariance {
    fn at(&self, lag: i64) -> f64;
}

impl<F: Fn(i64) -> f64> Covariance for F {
    fn at(&self, lag: i64) -> f64 {
        self(lag)
    }
}

/// Built-in covariance kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// `σ²` at lag 0, zero elsewhere.
    White {
        sigma2: f64,
    },
    Markov(MarkovParams),
    /// 1st order Markov process after a unit-tap moving average of length
    /// `n_taps`.
    MarkovMa {
        alpha: f64,
        sigma2: f64,
        n_taps: usize,
    },
    /// Explicit values for lags `0..values.len()`, zero beyond.
    Table(Vec<f64>),
}

impl Covariance for Kernel {
    fn at(&self, lag: i64) -> f64 {
        match self {
            Kernel::White { sigma2 } => {
                if lag == 0 {
                    *sigma2
                } else {
                    0.0
                }
            }
            Kernel::Markov(p) => p.cov(lag),
            Kernel::MarkovMa { alpha, sigma2, n_taps } => {
                crate::applications::cov_1mp_ma(*alpha, *sigma2, *n_taps, lag)
            }
            Kernel::Table(values) => values.get(lag.unsigned_abs() as usize).copied().unwrap_or(0.0),
        }
    }
}

/// `σ² e^{-α|k|}`.
pub fn cov_markov1(params: &MarkovParams, k: i64) -> f64 {
    if k == 0 {
        return params.sigma2;
    }
    params.sigma2 * exp(-params.alpha * k.unsigned_abs() as f64)
}

/// `σ² e^{-α|k|} (1 + α|k|)`.
pub fn cov_markov2(params: &MarkovParams, k: i64) -> f64 {
    if k == 0 {
        return params.sigma2;
    }
    let ak = params.alpha * k.unsigned_abs() as f64;
    if ak.is_infinite() {
        return 0.0;
    }
    params.sigma2 * exp(-ak) * (1.0 + ak)
}

/// Toeplitz covariance matrix `[C]_{ij} = kernel(j - i)` of size `n`.
pub fn kernel_to_cov<K: Covariance + ?Sized>(kernel: &K, n: usize) -> Result<CovMatrix> {
    let row: Vec<f64> = (0..n as i64).map(|k| kernel.at(k)).collect();
    let m = crate::linalg::Matrix::from_fn(n, n, |i, j| row[i.abs_diff(j)]);
    CovMatrix::new(m)
}
