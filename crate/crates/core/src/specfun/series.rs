//! Generic engine for the hypergeometric series Σ Π(u_i)_n / Π(l_i)_n · zⁿ/n!.
//!
//! Two summation paths:
//! - all terms nonnegative: plain f64 with a running power-of-ten rescale, so
//!   sums far beyond `f64::MAX` are still representable as `mantissa·e^scale`;
//! - mixed signs: double-double terms and sum, with the rounding floor
//!   reported from the largest term magnitude.

use super::dd::Dd;
use crate::{Error, Result};

const RESCALE_AT: f64 = 1e250;
const LN_RESCALE: f64 = 575.646_273_248_511_4; // ln(1e250)
const DD_EPS: f64 = 1.2e-32;

#[derive(Debug, Clone, Copy)]
pub(crate) struct SeriesOutcome {
    /// Sum equals `mantissa · exp(ln_scale)`.
    pub mantissa: f64,
    pub ln_scale: f64,
    /// Absolute error on `mantissa` (same scale).
    pub abs_err: f64,
    pub terms: usize,
}

impl SeriesOutcome {
    pub fn rel_err(&self) -> f64 {
        if self.mantissa == 0.0 {
            self.abs_err
        } else {
            self.abs_err / self.mantissa.abs()
        }
    }
}

#[inline]
fn ratio(upper: &[f64], lower: &[f64], z: f64, n: f64) -> f64 {
    let mut r = z / (n + 1.0);
    for u in upper {
        r *= u + n;
    }
    for l in lower {
        r /= l + n;
    }
    r
}

fn is_nonpositive_int(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Sums the series to machine precision; `max_terms` caps the work.
pub(crate) fn hypergeometric_series(
    upper: &[f64],
    lower: &[f64],
    z: f64,
    max_terms: usize,
    what: &'static str,
) -> Result<SeriesOutcome> {
    if let Some(l) = lower.iter().find(|l| is_nonpositive_int(**l)) {
        return Err(Error::domain(what, format!("lower parameter {l} is a nonpositive integer")));
    }
    if z == 0.0 {
        return Ok(SeriesOutcome {
            mantissa: 1.0,
            ln_scale: 0.0,
            abs_err: 0.0,
            terms: 1,
        });
    }
    let positive = z > 0.0 && upper.iter().all(|u| *u >= 0.0) && lower.iter().all(|l| *l > 0.0);
    let limit = if upper.len() > lower.len() { z.abs() } else { 0.0 };
    if upper.len() > lower.len() + 1 || (upper.len() == lower.len() + 1 && z.abs() >= 1.0) {
        // only finite if the series terminates
        if !upper.iter().any(|u| is_nonpositive_int(*u)) {
            return Err(Error::domain(what, format!("series diverges at z = {z}")));
        }
    }
    if positive {
        sum_positive(upper, lower, z, limit, max_terms, what)
    } else {
        sum_mixed(upper, lower, z, limit, max_terms, what)
    }
}

fn sum_positive(
    upper: &[f64],
    lower: &[f64],
    z: f64,
    limit: f64,
    max_terms: usize,
    what: &'static str,
) -> Result<SeriesOutcome> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut ln_scale = 0.0;
    let mut tail = f64::INFINITY;
    let mut n = 0usize;
    while n < max_terms {
        let r = ratio(upper, lower, z, n as f64);
        if r == 0.0 {
            // terminated
            return Ok(SeriesOutcome {
                mantissa: sum,
                ln_scale,
                abs_err: (n + 1) as f64 * f64::EPSILON * sum,
                terms: n + 1,
            });
        }
        term *= r;
        sum += term;
        n += 1;
        if sum > RESCALE_AT {
            sum /= RESCALE_AT;
            term /= RESCALE_AT;
            ln_scale += LN_RESCALE;
        }
        let r_next = ratio(upper, lower, z, n as f64);
        // past the peak and in the monotone regime of the ratio
        if r_next < 1.0 && (r_next <= r || limit >= r_next) {
            let rs = r_next.max(limit);
            tail = term * rs / (1.0 - rs);
            if tail <= 0.5 * f64::EPSILON * sum {
                return Ok(SeriesOutcome {
                    mantissa: sum,
                    ln_scale,
                    abs_err: tail + n as f64 * f64::EPSILON * sum,
                    terms: n + 1,
                });
            }
        }
    }
    Err(Error::NoConvergence {
        what,
        terms: n,
        estimate: tail / sum,
    })
}

fn sum_mixed(
    upper: &[f64],
    lower: &[f64],
    z: f64,
    limit: f64,
    max_terms: usize,
    what: &'static str,
) -> Result<SeriesOutcome> {
    let zd = Dd::from_f64(z);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let mut max_abs = 1.0f64;
    let mut tail = f64::INFINITY;
    let mut n = 0usize;
    while n < max_terms {
        let nf = n as f64;
        let mut num = zd;
        for u in upper {
            num = num * Dd::sum_f64(*u, nf);
        }
        let mut den = Dd::from_f64(nf + 1.0);
        for l in lower {
            den = den * Dd::sum_f64(*l, nf);
        }
        if num.hi == 0.0 {
            let s = sum.to_f64();
            return Ok(SeriesOutcome {
                mantissa: s,
                ln_scale: 0.0,
                abs_err: (n + 1) as f64 * DD_EPS * max_abs + f64::EPSILON * s.abs(),
                terms: n + 1,
            });
        }
        let r = (num.hi / den.hi).abs();
        term = term * num / den;
        sum = sum + term;
        n += 1;
        let t_abs = term.hi.abs();
        max_abs = max_abs.max(t_abs);
        if !t_abs.is_finite() || max_abs > 1e280 {
            return Err(Error::NoConvergence {
                what,
                terms: n,
                estimate: f64::INFINITY,
            });
        }
        let r_next = ratio(upper, lower, z, n as f64).abs();
        if r_next < 1.0 && (r_next <= r || limit >= r_next) {
            let rs = r_next.max(limit);
            tail = t_abs * rs / (1.0 - rs);
            let s = sum.to_f64().abs();
            if tail <= 0.5 * f64::EPSILON * s {
                let rounding = n as f64 * DD_EPS * max_abs;
                return Ok(SeriesOutcome {
                    mantissa: sum.to_f64(),
                    ln_scale: 0.0,
                    abs_err: tail + rounding + f64::EPSILON * s,
                    terms: n + 1,
                });
            }
        }
    }
    Err(Error::NoConvergence {
        what,
        terms: n,
        estimate: tail / sum.to_f64().abs(),
    })
}
