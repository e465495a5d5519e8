use crate::{Error, Result};

/// ln Γ(x) for x > 0.
///
/// Backed by the musl-derived `libm::lgamma_r`, which keeps relative accuracy
/// near the zeros at x = 1 and x = 2.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("log_gamma", format!("x = {x} must be positive")));
    }
    Ok(libm::lgamma_r(x).0)
}

/// ln Γ(x) for x known to be positive; internal hot-path variant.
#[inline]
pub(crate) fn lgamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    libm::lgamma_r(x).0
}

/// Γ(x) for real x, ±∞ at the poles.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// 1/Γ(x), exactly zero at the poles x = 0, −1, −2, …
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 170.0 {
        return (-lgamma_pos(x)).exp();
    }
    1.0 / libm::tgamma(x)
}

/// Rising factorial (a)_n = a (a+1) … (a+n−1).
pub fn pochhammer(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (a + i as f64))
}

/// ln (a)_n for a > 0.
pub fn ln_pochhammer(a: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n < 16 {
        return (0..n).map(|i| (a + i as f64).ln()).sum();
    }
    lgamma_pos(a + n as f64) - lgamma_pos(a)
}
