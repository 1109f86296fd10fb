//! Gaussian process generation, covariance kernels and their propagation
//! through linear filters.
//!
//! Generators are pure functions of `(spec, seed)`. Monte Carlo code that
//! needs many independent realizations should build a sampler once
//! ([`GaussianSampler`], [`PairSampler`]) and give every trial its own
//! [`GaussianStream`](crate::rng::GaussianStream) stream id.

mod cov;
mod generate;
mod kernel;
mod pair;

use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{Error, Result};

pub use cov::{factorize, CovMatrix, PSD_CLIP_TOL};
pub use generate::{
    filter_cov, gen_gaussian_vector, gen_markov2_arma, gen_markov_ar, gen_white, ma_filter, markov2_arma_coefficients,
    markov2_arma_into, markov_ar_into, GaussianSampler,
};
pub use kernel::{cov_markov1, cov_markov2, kernel_to_cov, Covariance, Kernel};
pub use pair::{gen_correlated_pair, solve_pair_spec, PairSampler, PairSpec};

/// One realization of a discretely sampled real process.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    dt: f64,
    origin: f64,
}

impl TimeSeries {
    /// Unit spacing, origin 0.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        Self::with_spacing(samples, 1.0, 0.0)
    }

    pub fn with_spacing(samples: Vec<f64>, dt: f64, origin: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::TooShort { op: "TimeSeries", needed: 1, found: 0 });
        }
        if !(dt > 0.0) || !dt.is_finite() || !origin.is_finite() {
            return Err(Error::domain("TimeSeries", alloc::format!("dt = {dt}, origin = {origin}")));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain("TimeSeries", alloc::format!("sample {i} is not finite")));
        }
        Ok(TimeSeries { samples, dt, origin })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    /// Sample time of index `i`.
    pub fn time(&self, i: usize) -> f64 {
        self.origin + self.dt * i as f64
    }
}

impl Deref for TimeSeries {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.samples
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkovOrder {
    First,
    Second,
}

/// Decay rate (per sample), variance and order of a 1st/2nd order Markov
/// process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovParams {
    pub alpha: f64,
    pub sigma2: f64,
    pub order: MarkovOrder,
}

impl MarkovParams {
    /// `alpha` may be `+inf` (uncorrelated limit).
    pub fn new(alpha: f64, sigma2: f64, order: MarkovOrder) -> Result<Self> {
        if alpha.is_nan() || alpha < 0.0 {
            return Err(Error::domain("MarkovParams", alloc::format!("alpha = {alpha} must be >= 0")));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::domain("MarkovParams", alloc::format!("sigma2 = {sigma2} must be > 0")));
        }
        Ok(MarkovParams { alpha, sigma2, order })
    }

    pub fn first(alpha: f64, sigma2: f64) -> Result<Self> {
        Self::new(alpha, sigma2, MarkovOrder::First)
    }

    pub fn second(alpha: f64, sigma2: f64) -> Result<Self> {
        Self::new(alpha, sigma2, MarkovOrder::Second)
    }

    /// Autocovariance at integer lag `k`.
    pub fn cov(&self, k: i64) -> f64 {
        match self.order {
            MarkovOrder::First => cov_markov1(self, k),
            MarkovOrder::Second => cov_markov2(self, k),
        }
    }
}

/// Declarative description of a generator.
#[derive(Debug, Clone)]
pub enum ProcessSpec {
    White {
        n: usize,
        sigma2: f64,
    },
    /// AR recursion (see [`gen_markov_ar`]).
    Markov {
        params: MarkovParams,
        n: usize,
        burn_in: Option<usize>,
    },
    /// Exact 2nd order Markov covariance via the ARMA(2,1) recursion.
    Markov2Exact {
        alpha: f64,
        sigma2: f64,
        n: usize,
    },
    /// One draw of a Gaussian vector with explicit covariance.
    Covariance {
        cov: CovMatrix,
        mean: Vec<f64>,
    },
    /// Cross-correlated pair of Gaussian vectors.
    Pair(PairSpec),
    /// A single Markov stream observed twice: `x2` is `x1` delayed by
    /// `delay` samples, so `E[x1_i x2_{i+k}] = C(k - delay)`.
    DelayedPair {
        params: MarkovParams,
        n: usize,
        delay: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    Single(TimeSeries),
    Pair(TimeSeries, TimeSeries),
}

/// Runs the generator described by `spec`.
pub fn generate(spec: &ProcessSpec, seed: u64) -> Result<Generated> {
    Ok(match spec {
        ProcessSpec::White { n, sigma2 } => Generated::Single(gen_white(*n, *sigma2, seed)?),
        ProcessSpec::Markov { params, n, burn_in } => Generated::Single(gen_markov_ar(params, *n, seed, *burn_in)?),
        ProcessSpec::Markov2Exact { alpha, sigma2, n } => {
            Generated::Single(gen_markov2_arma(&MarkovParams::second(*alpha, *sigma2)?, *n, seed)?)
        }
        ProcessSpec::Covariance { cov, mean } => Generated::Single(gen_gaussian_vector(cov, mean, seed)?),
        ProcessSpec::Pair(p) => {
            let (a, b) = gen_correlated_pair(p, seed)?;
            Generated::Pair(a, b)
        }
        ProcessSpec::DelayedPair { params, n, delay } => {
            let total = n + delay;
            let z = match params.order {
                MarkovOrder::First => gen_markov_ar(params, total, seed, None)?,
                MarkovOrder::Second => gen_markov2_arma(params, total, seed)?,
            };
            let x1 = TimeSeries::new(z[*delay..].to_vec())?;
            let x2 = TimeSeries::new(z[..*n].to_vec())?;
            Generated::Pair(x1, x2)
        }
    })
}
