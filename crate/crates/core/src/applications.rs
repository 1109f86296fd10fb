//! Covariance of MA-filtered 1st order Markov processes, 2nd order Markov
//! fits, one-step LMMSE prediction and time alignment of two processes.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, exp, sqrt};
use crate::moments::{crosscov_est, LagGuard};
use crate::optimize::bracketed_minimum;
use crate::processes::{cov_markov2, Covariance, MarkovParams};
use crate::specfun::lambert_w_m1;

const CLAMP_TOL: f64 = 1e-9;
const FIT_ALPHA_RANGE: (f64, f64) = (1e-6, 50.0);
const FIT_GRID: usize = 400;

/// `Σ_{j=-N+1}^{N-1} (N - |j|) σ² e^{-α|k-j|}` for `N = n_taps`.
pub fn cov_1mp_ma(alpha: f64, sigma2: f64, n_taps: usize, k: i64) -> f64 {
    cov_1mp_ma_truncated(alpha, sigma2, n_taps, None, k)
}

/// [`cov_1mp_ma`] with the input covariance set to zero beyond `|j| > max_lag`.
pub fn cov_1mp_ma_truncated(alpha: f64, sigma2: f64, n_taps: usize, max_lag: Option<u64>, k: i64) -> f64 {
    let n = n_taps as i64;
    let mut s = 0.0;
    for j in (1 - n)..n {
        let lag = (k - j).unsigned_abs();
        if max_lag.is_some_and(|m| lag > m) {
            continue;
        }
        s += (n - j.abs()) as f64 * exp(-alpha * lag as f64);
    }
    sigma2 * s
}

/// Peak-normalized covariance of a length-`n_taps` MA filter applied to a
/// 1st order Markov sequence observed over `n_x·n_taps` samples.
///
/// The input covariance is kept for lags `|j| < n_x·n_taps`, so the output
/// spans `2·n_taps·(n_x + 1) - 3` lags, returned as `(lags, values)` for
/// `k = -K..=K` with `K = n_taps·(n_x + 1) - 2`.
pub fn ma_window_target(alpha: f64, n_taps: usize, n_x: usize) -> Result<(Vec<i64>, Vec<f64>)> {
    if n_taps == 0 || n_x == 0 {
        return Err(Error::domain("ma_window_target", "n_taps and n_x must be >= 1"));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain("ma_window_target", alloc::format!("alpha = {alpha} must be > 0")));
    }
    let kmax = (n_taps * (n_x + 1)) as i64 - 2;
    let max_lag = (n_x * n_taps - 1) as u64;
    let lags: Vec<i64> = (-kmax..=kmax).collect();
    let peak = cov_1mp_ma_truncated(alpha, 1.0, n_taps, Some(max_lag), 0);
    let values = lags.iter().map(|&k| cov_1mp_ma_truncated(alpha, 1.0, n_taps, Some(max_lag), k) / peak).collect();
    Ok((lags, values))
}

/// Both estimates of the 2nd order Markov decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit2mp {
    /// Minimizer of the squared error to the normalized target.
    pub alpha: f64,
    /// Linearized estimate `Σ ṽ_k / Σ |k|`.
    pub alpha_lambert: f64,
    /// Value at lag 0 used for normalization.
    pub peak: f64,
}

fn normalized(op: &'static str, lags: &[i64], target: &[f64]) -> Result<(Vec<f64>, f64)> {
    Error::check_len(op, lags.len(), target.len())?;
    let zero =
        lags.iter().position(|&k| k == 0).ok_or_else(|| Error::domain(op, "the lag window must contain lag 0"))?;
    let peak = target[zero];
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::domain(op, alloc::format!("value at lag 0 is {peak}, must be > 0")));
    }
    let mut c = Vec::with_capacity(target.len());
    for (&k, &v) in lags.iter().zip(target) {
        let r = v / peak;
        if !(r > 0.0) {
            return Err(Error::domain(op, alloc::format!("covariance at lag {k} is {v}, must be > 0")));
        }
        if r > 1.0 + CLAMP_TOL {
            return Err(Error::domain(op, alloc::format!("normalized covariance at lag {k} is {r} > 1")));
        }
        c.push(r.min(1.0));
    }
    Ok((c, peak))
}

/// `ṽ = -1 - W₋₁(-c/e)`, the inverse of `c = e^{-ṽ}(1 + ṽ)` on `ṽ >= 0`.
pub fn markov2_linearize(c: f64) -> Result<f64> {
    if !(c > 0.0) || c > 1.0 + CLAMP_TOL {
        return Err(Error::domain("markov2_linearize", alloc::format!("c = {c} is outside (0, 1]")));
    }
    Ok(-1.0 - lambert_w_m1(-c.min(1.0) / core::f64::consts::E)?)
}

fn unit_markov2(alpha: f64) -> MarkovParams {
    MarkovParams { alpha, sigma2: 1.0, order: crate::processes::MarkovOrder::Second }
}

/// Squared error `Σ_k (c_k - e^{-α|k|}(1 + α|k|))²`.
fn markov2_sse(lags: &[i64], c: &[f64], alpha: f64) -> f64 {
    let p = unit_markov2(alpha);
    lags.iter()
        .zip(c)
        .map(|(&k, &v)| {
            let d = v - cov_markov2(&p, k);
            d * d
        })
        .sum()
}

/// Fits `e^{-α|k|}(1 + α|k|)` to covariance values over the lag window
/// `lags` after dividing by the lag-0 value.
pub fn fit_2mp(lags: &[i64], target: &[f64]) -> Result<Fit2mp> {
    let (c, peak) = normalized("fit_2mp", lags, target)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (&k, &v) in lags.iter().zip(&c) {
        num += markov2_linearize(v)?;
        den += k.unsigned_abs() as f64;
    }
    if den == 0.0 {
        return Err(Error::Degenerate { op: "fit_2mp", detail: "lag window has no nonzero lag" });
    }
    let alpha =
        bracketed_minimum("fit_2mp", |a| markov2_sse(lags, &c, a), FIT_ALPHA_RANGE.0, FIT_ALPHA_RANGE.1, FIT_GRID)?;
    Ok(Fit2mp { alpha, alpha_lambert: num / den, peak })
}

/// `100 Σ (t - f)² / Σ t²`.
pub fn fit_mse_metric(target: &[f64], fit: &[f64]) -> Result<f64> {
    Error::check_len("fit_mse_metric", target.len(), fit.len())?;
    let den: f64 = target.iter().map(|t| t * t).sum();
    if den == 0.0 {
        return Err(Error::Degenerate { op: "fit_mse_metric", detail: "zero target" });
    }
    let num: f64 = target.iter().zip(fit).map(|(t, f)| (t - f) * (t - f)).sum();
    Ok(100.0 * num / den)
}

/// [`fit_mse_metric`] of the unit 2nd order Markov kernel with rate `alpha`
/// against `target` on `lags`.
pub fn markov2_fit_mse(lags: &[i64], target: &[f64], alpha: f64) -> Result<f64> {
    let p = unit_markov2(alpha);
    let fit: Vec<f64> = lags.iter().map(|&k| cov_markov2(&p, k)).collect();
    fit_mse_metric(target, &fit)
}

/// One row of the MA-window fit sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaFitPoint {
    pub n_taps: usize,
    pub alpha_hat: f64,
    pub mse_percent: f64,
}

/// Fits the 2nd order Markov kernel to [`ma_window_target`] for every filter
/// length in `taps` and reports the percent MSE.
pub fn ma_fit_sweep(alpha: f64, n_x: usize, taps: impl IntoIterator<Item = usize>) -> Result<Vec<MaFitPoint>> {
    let mut out = Vec::new();
    for n in taps {
        let (lags, t) = ma_window_target(alpha, n, n_x)?;
        let fit = fit_2mp(&lags, &t)?;
        out.push(MaFitPoint { n_taps: n, alpha_hat: fit.alpha, mse_percent: markov2_fit_mse(&lags, &t, fit.alpha)? });
    }
    Ok(out)
}

/// `X̂_{N+1} = X_N · C(1)/C(0)`.
pub fn lmmse_predict<K: Covariance + ?Sized>(x: &[f64], kernel: &K) -> Result<f64> {
    let last = *x.last().ok_or(Error::TooShort { op: "lmmse_predict", needed: 1, found: 0 })?;
    let c0 = kernel.at(0);
    if !(c0 > 0.0) {
        return Err(Error::domain("lmmse_predict", alloc::format!("kernel(0) = {c0} must be > 0")));
    }
    Ok(last * kernel.at(1) / c0)
}

/// Lag in `[-max_lag, max_lag]` maximizing the cross-covariance
/// `Ê[(x1_i - x̄1)(x2_{i+Δ} - x̄2)]`; ties go to the smaller `|Δ|`, then to
/// positive `Δ`.
pub fn align_by_argmax(x1: &[f64], x2: &[f64], max_lag: usize) -> Result<i64> {
    let n = x1.len().min(x2.len());
    if max_lag * 4 > n {
        return Err(Error::LagTooLarge { lag: max_lag, limit: n / 4 });
    }
    let mut best = (0i64, crosscov_est(x1, x2, 0, true, LagGuard::Disabled)?);
    for d in 1..=max_lag as i64 {
        for lag in [d, -d] {
            let v = crosscov_est(x1, x2, lag, true, LagGuard::Disabled)?;
            if v > best.1 {
                best = (lag, v);
            }
        }
    }
    Ok(best.0)
}

/// Result of the linearized alignment fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentEstimate {
    /// Delay as a real number (intercept / slope).
    pub delta: f64,
    /// `delta` rounded to the nearest lag.
    pub delta_hat: i64,
    pub alpha_hat: f64,
    /// Sum of squared residuals of the straight-line fit.
    pub residual: f64,
}

/// Fits `ṽ_k = α·Δ + α·k` to `ṽ_k = -1 - W₋₁(-v_k/e)` for normalized
/// cross-covariances `v_k = ρ(Δ + k)`, `k = 0..v.len()`.
pub fn align_from_normalized(v: &[f64]) -> Result<AlignmentEstimate> {
    if v.len() < 2 {
        return Err(Error::TooShort { op: "align_by_lambert", needed: 2, found: v.len() });
    }
    let mut vt = Vec::with_capacity(v.len());
    for &c in v {
        vt.push(markov2_linearize(c).map_err(|_| {
            Error::domain("align_by_lambert", alloc::format!("normalized cross-covariance {c} is outside (0, 1]"))
        })?);
    }
    let n = v.len() as f64;
    let km = (n - 1.0) / 2.0;
    let ym = vt.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, y) in vt.iter().enumerate() {
        let dx = k as f64 - km;
        sxy += dx * (y - ym);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    if !(slope > 0.0) {
        return Err(Error::domain("align_by_lambert", alloc::format!("fitted slope {slope} is not positive")));
    }
    let intercept = ym - slope * km;
    let residual = vt
        .iter()
        .enumerate()
        .map(|(k, y)| {
            let r = y - intercept - slope * k as f64;
            r * r
        })
        .sum();
    let delta = intercept / slope;
    Ok(AlignmentEstimate { delta, delta_hat: libm::round(delta) as i64, alpha_hat: slope, residual })
}

/// Estimates the delay of `x1` relative to `x2` and the 2nd order Markov
/// decay rate from `k_max` lags of the normalized cross-covariance
/// `v_k = Ê[x1_i x2_{i-k}] / (σ₁σ₂)`, `k = 0..k_max`.
pub fn align_by_lambert(x1: &[f64], x2: &[f64], k_max: usize) -> Result<AlignmentEstimate> {
    let s1 = crosscov_est(x1, x1, 0, true, LagGuard::Disabled)?;
    let s2 = crosscov_est(x2, x2, 0, true, LagGuard::Disabled)?;
    let norm = sqrt(s1 * s2);
    if norm == 0.0 {
        return Err(Error::Degenerate { op: "align_by_lambert", detail: "zero variance" });
    }
    let mut v = Vec::with_capacity(k_max);
    for k in 0..k_max as i64 {
        v.push(crosscov_est(x1, x2, -k, true, LagGuard::Enforced)? / norm);
    }
    align_from_normalized(&v)
}

/// Exact model values `e^{-α(Δ+k)}(1 + α(Δ+k))` for `k = 0..k_max`.
pub fn markov2_shifted(alpha: f64, delta: f64, k_max: usize) -> Vec<f64> {
    (0..k_max)
        .map(|k| {
            let t = alpha * abs(delta + k as f64);
            exp(-t) * (1.0 + t)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{filter_cov, generate, Generated, Kernel, MarkovOrder, ProcessSpec};
    use crate::rng::GaussianStream;
    use alloc::vec;

    #[test]
    fn ma_cov_identity_filter() {
        let p = MarkovParams::first(0.7, 2.0).unwrap();
        for k in -5..=5 {
            assert!((cov_1mp_ma(0.7, 2.0, 1, k) - p.cov(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn ma_cov_decays() {
        let peak = cov_1mp_ma(2.0, 1.0, 4, 0);
        assert!(cov_1mp_ma(2.0, 1.0, 4, 20) < 1e-6 * peak);
    }

    #[test]
    fn ma_cov_matches_filter_cov() {
        for (alpha, n) in [(0.1, 3usize), (0.5, 8), (0.9, 5)] {
            let k1 = Kernel::Markov(MarkovParams::first(alpha, 1.5).unwrap());
            let h = vec![1.0; n];
            for k in -(3 * n as i64)..=(3 * n as i64) {
                let a = cov_1mp_ma(alpha, 1.5, n, k);
                let b = filter_cov(&k1, &h, k);
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
                let mk = Kernel::MarkovMa { alpha, sigma2: 1.5, n_taps: n };
                assert_eq!(mk.at(k), a);
            }
        }
    }

    #[test]
    fn ma_cov_even_and_peaked() {
        for alpha in [0.1, 0.5, 0.9] {
            for n in 2..=32usize {
                let peak = cov_1mp_ma(alpha, 1.0, n, 0);
                for k in 1..=(3 * n as i64) {
                    let v = cov_1mp_ma(alpha, 1.0, n, k);
                    assert!((v - cov_1mp_ma(alpha, 1.0, n, -k)).abs() <= 1e-12 * peak);
                    assert!(v < peak);
                }
            }
        }
    }

    #[test]
    fn window_target_shape() {
        let (lags, t) = ma_window_target(0.5, 4, 2).unwrap();
        assert_eq!(lags.len(), 2 * 4 * 3 - 3);
        assert_eq!(t[lags.len() / 2], 1.0);
        assert!(t.iter().all(|&v| v > 0.0 && v <= 1.0));
        assert!(ma_window_target(0.5, 0, 2).is_err());
    }

    #[test]
    fn self_fit_is_fixed_point() {
        let lags: Vec<i64> = (-20..=20).collect();
        for alpha in [0.1, 0.3, 0.4, 0.5, 0.9] {
            let p = MarkovParams::second(alpha, 3.0).unwrap();
            let t: Vec<f64> = lags.iter().map(|&k| p.cov(k)).collect();
            let fit = fit_2mp(&lags, &t).unwrap();
            assert!((fit.alpha - alpha).abs() < 1e-6, "{alpha}: {fit:?}");
            assert!((fit.alpha_lambert - alpha).abs() < 1e-6);
            assert!((fit.alpha - fit.alpha_lambert).abs() < 1e-4);
            assert_eq!(fit.peak, 3.0);
        }
    }

    #[test]
    fn fit_ma_target() {
        let lags: Vec<i64> = (-24..=24).collect();
        let t: Vec<f64> = lags.iter().map(|&k| cov_1mp_ma(0.5, 1.0, 8, k)).collect();
        let fit = fit_2mp(&lags, &t).unwrap();
        assert!(fit.alpha.is_finite() && fit.alpha > 0.0);
        let peak = t[24];
        let norm: Vec<f64> = t.iter().map(|v| v / peak).collect();
        assert!(markov2_fit_mse(&lags, &norm, fit.alpha).unwrap() < 100.0);
    }

    #[test]
    fn fit_rejects_invalid_targets() {
        let lags = [-1, 0, 1];
        assert!(fit_2mp(&lags, &[0.5, 1.0, -0.1]).is_err());
        assert!(fit_2mp(&lags, &[0.5, 1.0, 1.2]).is_err());
        assert!(fit_2mp(&[1, 2], &[0.5, 0.4]).is_err());
        // Within the clamp tolerance.
        assert!(fit_2mp(&lags, &[0.5, 1.0, 1.0 + 1e-12]).is_ok());
    }

    #[test]
    fn mse_metric_examples() {
        let t = [1.0, 0.5, 0.25];
        assert_eq!(fit_mse_metric(&t, &t).unwrap(), 0.0);
        assert_eq!(fit_mse_metric(&t, &[0.0; 3]).unwrap(), 100.0);
        assert!(fit_mse_metric(&[0.0; 3], &t).is_err());
    }

    #[test]
    fn lmmse_examples() {
        assert_eq!(lmmse_predict(&[1.0, 2.0], &Kernel::White { sigma2: 1.0 }).unwrap(), 0.0);
        let k = Kernel::Markov(MarkovParams::first(0.5, 1.0).unwrap());
        assert!((lmmse_predict(&[0.3, 2.0], &k).unwrap() - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
        assert!(lmmse_predict(&[], &k).is_err());
        let x = [0.4, -1.3, 0.7];
        let scaled: Vec<f64> = x.iter().map(|v| -2.5 * v).collect();
        let k4 = Kernel::Markov(MarkovParams::first(0.5, 4.0).unwrap());
        assert!((lmmse_predict(&scaled, &k4).unwrap() + 2.5 * lmmse_predict(&x, &k4).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn argmax_examples() {
        let mut g = GaussianStream::new(1);
        let z: Vec<f64> = (0..400).map(|_| g.standard_normal()).collect();
        assert_eq!(align_by_argmax(&z, &z, 20).unwrap(), 0);
        let x1 = &z[5..];
        let x2 = &z[..395];
        assert_eq!(align_by_argmax(x1, x2, 20).unwrap(), 5);
        assert_eq!(align_by_argmax(x2, x1, 20).unwrap(), -5);
        assert!(align_by_argmax(&z, &z, 101).is_err());
    }

    #[test]
    fn lambert_exact_model() {
        let v = markov2_shifted(0.25, 4.0, 6);
        let est = align_from_normalized(&v).unwrap();
        assert!((est.alpha_hat - 0.25).abs() < 1e-8);
        assert!((est.delta - 4.0).abs() < 1e-8);
        assert_eq!(est.delta_hat, 4);
        assert!(est.residual < 1e-20);
        for (k, &c) in v.iter().enumerate() {
            let vt = markov2_linearize(c).unwrap();
            assert!((vt - 0.25 * (4.0 + k as f64)).abs() < 1e-10);
        }
    }

    #[test]
    fn lambert_rejects_bad_values() {
        assert!(align_from_normalized(&[1.2, 0.5, 0.4]).is_err());
        assert!(align_from_normalized(&[0.5, 0.0, 0.4]).is_err());
        // Increasing correlation means a negative slope.
        assert!(align_from_normalized(&[0.4, 0.6, 0.8]).is_err());
    }

    #[test]
    fn lambert_on_generated_pair() {
        let params = MarkovParams::new(0.3, 1.0, MarkovOrder::Second).unwrap();
        let spec = ProcessSpec::DelayedPair { params, n: 100_000, delay: 5 };
        let Generated::Pair(x1, x2) = generate(&spec, 3).unwrap() else { panic!() };
        let est = align_by_lambert(&x1, &x2, 6).unwrap();
        assert!((est.alpha_hat / 0.3 - 1.0).abs() < 0.1, "{est:?}");
        assert!((est.delta - 5.0).abs() <= 0.5, "{est:?}");
        assert_eq!(align_by_argmax(&x1, &x2, 20).unwrap(), 5);
    }

    #[test]
    fn lmmse_error_variance() {
        let alpha: f64 = 0.3;
        let p = MarkovParams::first(alpha, 1.0).unwrap();
        let k = Kernel::Markov(p);
        let trials = 20_000u64;
        let mut buf = [0.0; 9];
        let mut se = 0.0;
        for t in 0..trials {
            let mut g = GaussianStream::with_stream(4, t);
            crate::processes::markov_ar_into(&p, &mut g, Some(0), &mut buf).unwrap();
            let pred = lmmse_predict(&buf[..8], &k).unwrap();
            se += (buf[8] - pred) * (buf[8] - pred);
        }
        let mse = se / trials as f64;
        assert!((mse / (1.0 - (-2.0 * alpha).exp()) - 1.0).abs() < 0.05);
    }
}
