use alloc::vec;
use alloc::vec::Vec;

use super::cov::CovMatrix;
use super::kernel::Covariance;
use super::{MarkovOrder, MarkovParams, TimeSeries};
use crate::error::{Error, Result};
use crate::math::{ceil, exp, sqrt};
use crate::rng::GaussianStream;

/// `n` i.i.d. `N(0, sigma2)` samples.
pub fn gen_white(n: usize, sigma2: f64, seed: u64) -> Result<TimeSeries> {
    if n == 0 {
        return Err(Error::TooShort { op: "gen_white", needed: 1, found: 0 });
    }
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::domain("gen_white", alloc::format!("sigma2 = {sigma2} must be >= 0")));
    }
    if sigma2 == 0.0 {
        return TimeSeries::new(vec![0.0; n]);
    }
    let sigma = sqrt(sigma2);
    let mut g = GaussianStream::new(seed);
    TimeSeries::new((0..n).map(|_| sigma * g.standard_normal()).collect())
}

/// Draws `X = T·U + mean` from a fixed covariance.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    factor: crate::linalg::Matrix,
    mean: Vec<f64>,
}

impl GaussianSampler {
    pub fn new(cov: &CovMatrix, mean: &[f64]) -> Result<Self> {
        Error::check_len("GaussianSampler", cov.dim(), mean.len())?;
        Ok(GaussianSampler { factor: cov.factor().clone(), mean: mean.to_vec() })
    }

    /// Zero mean.
    pub fn centered(cov: &CovMatrix) -> Self {
        GaussianSampler { factor: cov.factor().clone(), mean: vec![0.0; cov.dim()] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Fills `out` (length `dim`) using `scratch` (length `dim`) for the
    /// driving noise.
    pub fn sample_into(&self, g: &mut GaussianStream, scratch: &mut [f64], out: &mut [f64]) {
        g.fill_standard_normal(scratch);
        self.factor.mul_vec_into(scratch, out);
        for (o, m) in out.iter_mut().zip(&self.mean) {
            *o += m;
        }
    }

    pub fn sample(&self, g: &mut GaussianStream) -> Vec<f64> {
        let mut scratch = vec![0.0; self.dim()];
        let mut out = vec![0.0; self.dim()];
        self.sample_into(g, &mut scratch, &mut out);
        out
    }
}

/// One draw of a Gaussian vector with covariance `cov` and mean `mean`.
pub fn gen_gaussian_vector(cov: &CovMatrix, mean: &[f64], seed: u64) -> Result<TimeSeries> {
    let s = GaussianSampler::new(cov, mean)?;
    TimeSeries::new(s.sample(&mut GaussianStream::new(seed)))
}

fn default_burn_in(alpha: f64) -> usize {
    ceil(10.0 / alpha) as usize
}

fn check_stable(op: &'static str, params: &MarkovParams) -> Result<()> {
    if !(params.alpha > 0.0) {
        return Err(Error::domain(op, alloc::format!("alpha = {} gives an unstable recursion", params.alpha)));
    }
    Ok(())
}

/// Markov process by AR recursion with `a = e^{-α}`.
///
/// Order 1: `x(n) = a·x(n-1) + σ√(1-a²)·u(n)`.
/// Order 2: `x(n) = 2a·x(n-1) - a²·x(n-2) + b·u(n)`, the double pole at `a`,
/// with `b = σ√((1-a²)³/(1+a²))` so the stationary variance is `σ²`. Its
/// autocorrelation is `a^|k| (1 + |k|·(1-a²)/(1+a²))`, which approaches
/// `e^{-α|k|}(1+α|k|)` only for small `α`; use [`gen_markov2_arma`] for the
/// exact kernel.
///
/// The state starts from the stationary distribution and `burn_in` further
/// samples (default `⌈10/α⌉`) are discarded.
pub fn gen_markov_ar(params: &MarkovParams, n: usize, seed: u64, burn_in: Option<usize>) -> Result<TimeSeries> {
    let mut out = vec![0.0; n];
    markov_ar_into(params, &mut GaussianStream::new(seed), burn_in, &mut out)?;
    TimeSeries::new(out)
}

/// [`gen_markov_ar`] into a caller buffer, drawing from `g`.
pub fn markov_ar_into(
    params: &MarkovParams,
    g: &mut GaussianStream,
    burn_in: Option<usize>,
    out: &mut [f64],
) -> Result<()> {
    check_stable("gen_markov_ar", params)?;
    if out.is_empty() {
        return Err(Error::TooShort { op: "gen_markov_ar", needed: 1, found: 0 });
    }
    let burn = burn_in.unwrap_or_else(|| default_burn_in(params.alpha));
    let sigma = sqrt(params.sigma2);
    let a = exp(-params.alpha);
    match params.order {
        MarkovOrder::First => {
            let b = sigma * sqrt(1.0 - a * a);
            let mut x = sigma * g.standard_normal();
            for _ in 0..burn {
                x = a * x + b * g.standard_normal();
            }
            for (i, o) in out.iter_mut().enumerate() {
                if i > 0 {
                    x = a * x + b * g.standard_normal();
                }
                *o = x;
            }
        }
        MarkovOrder::Second => {
            let a2 = a * a;
            let b = sigma * sqrt((1.0 - a2) * (1.0 - a2) * (1.0 - a2) / (1.0 + a2));
            let rho1 = 2.0 * a / (1.0 + a2);
            let z0 = g.standard_normal();
            let z1 = g.standard_normal();
            let mut prev2 = sigma * z0;
            let mut prev1 = sigma * (rho1 * z0 + sqrt(1.0 - rho1 * rho1) * z1);
            let mut step = |p1: f64, p2: f64| 2.0 * a * p1 - a2 * p2 + b * g.standard_normal();
            for _ in 0..burn {
                let x = step(prev1, prev2);
                prev2 = prev1;
                prev1 = x;
            }
            out[0] = prev2;
            if out.len() > 1 {
                out[1] = prev1;
            }
            for i in 2..out.len() {
                out[i] = step(out[i - 1], out[i - 2]);
            }
        }
    }
    Ok(())
}

/// Coefficients `(a, θ, b)` of the ARMA(2,1) recursion
/// `x(n) = 2a·x(n-1) - a²·x(n-2) + b·(u(n) + θ·u(n-1))` whose autocovariance
/// is exactly `e^{-α|k|}(1 + α|k|)` (unit variance).
pub fn markov2_arma_coefficients(alpha: f64) -> Result<(f64, f64, f64)> {
    if !(alpha > 0.0) {
        return Err(Error::domain("markov2_arma_coefficients", alloc::format!("alpha = {alpha} must be > 0")));
    }
    let a = exp(-alpha);
    let a2 = a * a;
    let c0 = 1.0 - a2 * a2 - 4.0 * alpha * a2;
    let c1 = a * (alpha * (1.0 + a2) - (1.0 - a2));
    if c1 == 0.0 {
        return Ok((a, 0.0, sqrt(c0)));
    }
    let theta = (c0 - sqrt((c0 * c0 - 4.0 * c1 * c1).max(0.0))) / (2.0 * c1);
    Ok((a, theta, sqrt(c1 / theta)))
}

/// Exact 2nd order Markov stream of length `n` via the ARMA(2,1) recursion.
pub fn gen_markov2_arma(params: &MarkovParams, n: usize, seed: u64) -> Result<TimeSeries> {
    let mut out = vec![0.0; n];
    markov2_arma_into(params, &mut GaussianStream::new(seed), &mut out)?;
    TimeSeries::new(out)
}

/// [`gen_markov2_arma`] into a caller buffer. The recursion starts at rest
/// and runs `⌈40/α⌉` warm-up samples.
pub fn markov2_arma_into(params: &MarkovParams, g: &mut GaussianStream, out: &mut [f64]) -> Result<()> {
    if out.is_empty() {
        return Err(Error::TooShort { op: "gen_markov2_arma", needed: 1, found: 0 });
    }
    let (a, theta, b) = markov2_arma_coefficients(params.alpha)?;
    let b = b * sqrt(params.sigma2);
    let warm = ceil(40.0 / params.alpha) as usize;
    let (mut x1, mut x2, mut u1) = (0.0, 0.0, g.standard_normal());
    for i in 0..warm + out.len() {
        let u = g.standard_normal();
        let x = 2.0 * a * x1 - a * a * x2 + b * (u + theta * u1);
        x2 = x1;
        x1 = x;
        u1 = u;
        if i >= warm {
            out[i - warm] = x;
        }
    }
    Ok(())
}

/// Unit-tap moving sum `y_i = Σ_{j<n_taps} x_{i-j}` over the valid region.
pub fn ma_filter(x: &TimeSeries, n_taps: usize) -> Result<TimeSeries> {
    if n_taps == 0 {
        return Err(Error::domain("ma_filter", "n_taps must be >= 1"));
    }
    if x.len() < n_taps {
        return Err(Error::TooShort { op: "ma_filter", needed: n_taps, found: x.len() });
    }
    let out = x.windows(n_taps).map(|w| w.iter().sum()).collect();
    TimeSeries::with_spacing(out, x.dt(), x.time(n_taps - 1))
}

/// Covariance at lag `k` of the kernel after filtering with taps `h`:
/// `Σ_i Σ_j h_i h_j C(k - i + j)`.
pub fn filter_cov<K: Covariance + ?Sized>(kernel: &K, h: &[f64], k: i64) -> f64 {
    let mut total = 0.0;
    for (i, hi) in h.iter().enumerate() {
        for (j, hj) in h.iter().enumerate() {
            total += hi * hj * kernel.at(k - i as i64 + j as i64);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{kernel_to_cov, Kernel};

    fn autocov(x: &[f64], k: usize) -> f64 {
        let n = x.len();
        let m = x.iter().sum::<f64>() / n as f64;
        (0..n - k).map(|i| (x[i] - m) * (x[i + k] - m)).sum::<f64>() / (n - k) as f64
    }

    #[test]
    fn white_zero_variance() {
        assert_eq!(gen_white(5, 0.0, 7).unwrap().samples(), &[0.0; 5]);
        assert!(gen_white(0, 1.0, 7).is_err());
        assert!(gen_white(3, -1.0, 7).is_err());
    }

    #[test]
    fn white_moments() {
        let x = gen_white(1_000_000, 1.0, 1).unwrap();
        let m = x.iter().sum::<f64>() / x.len() as f64;
        assert!(m.abs() < 0.004);
        let x = gen_white(1_000_000, 4.0, 1).unwrap();
        let v = autocov(&x, 0);
        assert!((3.97..=4.03).contains(&v), "{v}");
    }

    #[test]
    fn white_is_deterministic() {
        assert_eq!(gen_white(64, 2.0, 3).unwrap(), gen_white(64, 2.0, 3).unwrap());
    }

    #[test]
    fn zero_covariance_returns_mean() {
        let c = CovMatrix::new(crate::linalg::Matrix::zeros(3, 3)).unwrap();
        let x = gen_gaussian_vector(&c, &[1.0, 2.0, 3.0], 4).unwrap();
        assert_eq!(x.samples(), &[1.0, 2.0, 3.0]);
        assert!(gen_gaussian_vector(&c, &[1.0], 4).is_err());
    }

    #[test]
    fn markov1_lag_one() {
        for (alpha, expect) in [(0.5, (-0.5f64).exp()), (10.0, 0.0)] {
            let p = MarkovParams::first(alpha, 1.0).unwrap();
            let x = gen_markov_ar(&p, 1_000_000, 2, None).unwrap();
            assert!((autocov(&x, 1) - expect).abs() < 0.01);
        }
    }

    #[test]
    fn markov2_ar_matches_double_pole_kernel() {
        let alpha: f64 = 0.3;
        let a = (-alpha).exp();
        let p = MarkovParams::second(alpha, 1.0).unwrap();
        let x = gen_markov_ar(&p, 1_000_000, 3, None).unwrap();
        for k in 1..=3 {
            let kf = k as f64;
            let theory = a.powi(k) * (1.0 + kf * (1.0 - a * a) / (1.0 + a * a));
            let got = autocov(&x, k as usize);
            assert!((got - theory).abs() < 0.03, "k = {k}: {got} vs {theory}");
        }
    }

    #[test]
    fn markov_ar_rejects_zero_alpha() {
        let p = MarkovParams::first(0.0, 1.0).unwrap();
        assert!(gen_markov_ar(&p, 10, 1, None).is_err());
    }

    #[test]
    fn arma_matches_exact_markov2() {
        for alpha in [0.3, 0.8] {
            let p = MarkovParams::second(alpha, 2.0).unwrap();
            let x = gen_markov2_arma(&p, 1_000_000, 9).unwrap();
            for k in 0..5i64 {
                let got = autocov(&x, k as usize);
                let want = p.cov(k);
                assert!((got - want).abs() < 0.05, "alpha {alpha} k {k}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn ma_filter_examples() {
        let x = TimeSeries::new(vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(ma_filter(&x, 1).unwrap().samples(), x.samples());
        assert_eq!(ma_filter(&x, 2).unwrap().samples(), &[2.0, 2.0, 2.0]);
        let y = ma_filter(&TimeSeries::new(vec![1.0, 2.0, 3.0]).unwrap(), 3).unwrap();
        assert_eq!(y.samples(), &[6.0]);
        assert_eq!(y.origin(), 2.0);
        assert!(ma_filter(&x, 5).is_err());
        assert!(ma_filter(&x, 0).is_err());
    }

    #[test]
    fn filter_cov_examples() {
        let p = MarkovParams::first(0.4, 1.0).unwrap();
        let k = Kernel::Markov(p);
        for lag in -3..=3 {
            assert_eq!(filter_cov(&k, &[1.0], lag), k.at(lag));
        }
        let white = Kernel::White { sigma2: 1.0 };
        assert_eq!(filter_cov(&white, &[1.0, 1.0], 0), 2.0);
    }

    #[test]
    fn gaussian_vector_matches_markov2_cov() {
        let p = MarkovParams::second(0.4, 1.0).unwrap();
        let c = kernel_to_cov(&Kernel::Markov(p), 4).unwrap();
        let s = GaussianSampler::centered(&c);
        let mut g = GaussianStream::new(12);
        let trials = 200_000;
        let mut acc = [[0.0; 4]; 4];
        for _ in 0..trials {
            let x = s.sample(&mut g);
            for i in 0..4 {
                for j in 0..4 {
                    acc[i][j] += x[i] * x[j];
                }
            }
        }
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                let d = acc[i][j] / trials as f64 - c.entries()[(i, j)];
                num += d * d;
                den += c.entries()[(i, j)] * c.entries()[(i, j)];
            }
        }
        assert!((num / den).sqrt() < 0.02);
    }
}
