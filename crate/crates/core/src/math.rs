//! Thin wrappers over `libm` so the numeric code reads the same with or
//! without `std`.

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `|x|^m` for a positive integer order.
#[inline]
pub fn abs_powi(x: f64, m: u32) -> f64 {
    let a = abs(x);
    match m {
        1 => a,
        2 => a * a,
        3 => a * a * a,
        4 => {
            let s = a * a;
            s * s
        }
        _ => powf(a, m as f64),
    }
}

/// `x^n` for a non-negative integer power, sign preserved.
#[inline]
pub fn powi(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    let mut base = x;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}
