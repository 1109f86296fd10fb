//! One-dimensional minimization used by the covariance fits.

use crate::error::{Error, Result};
use crate::math::{abs, exp, ln};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, xtol: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while abs(b - a) > xtol * (1.0 + abs(a) + abs(b)) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Minimizes `f` over a positive parameter: scans a log-spaced grid on
/// `[lo, hi]` to bracket the minimum, then refines it by golden section.
/// Errors when the best grid point sits on either end of the range.
pub fn bracketed_minimum(
    op: &'static str,
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    grid: usize,
) -> Result<f64> {
    let (l0, l1) = (ln(lo), ln(hi));
    let at = |i: usize| exp(l0 + (l1 - l0) * i as f64 / (grid - 1) as f64);
    let mut best = (0usize, f64::INFINITY);
    for i in 0..grid {
        let v = f(at(i));
        if v < best.1 {
            best = (i, v);
        }
    }
    if best.0 == 0 || best.0 == grid - 1 || !best.1.is_finite() {
        return Err(Error::Degenerate { op, detail: "minimum not bracketed inside the search range" });
    }
    Ok(golden_section(f, at(best.0 - 1), at(best.0 + 1), 1e-13))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let x = golden_section(|x| (x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn bracket_failure() {
        assert!(bracketed_minimum("t", |x| x, 1e-3, 10.0, 50).is_err());
        let x = bracketed_minimum("t", |x| (x - 2.0).powi(2), 1e-3, 10.0, 50).unwrap();
        assert!((x - 2.0).abs() < 1e-8);
    }
}
