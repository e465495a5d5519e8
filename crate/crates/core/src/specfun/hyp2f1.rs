//! Gauss hypergeometric function ₂F₁(a, b; c; z) for real z < 1.
//!
//! Transform map:
//! - z ∈ [−½, 0.7]: direct series (Euler's transform first if it terminates);
//! - z < −½: Pfaff, (1−z)^{−a} ₂F₁(a, c−b; c; z/(z−1)), lands in (⅓, 1);
//! - z ∈ (0.7, 1): the 1−z connection formula when c−a−b is safely
//!   non-integer, otherwise the direct series under the policy cap.

use super::gamma::{lgamma_pos, rgamma};
use super::series::hypergeometric_series;
use super::{EvalResult, TruncationPolicy};
use crate::{Error, Result};

const DIRECT_MAX: f64 = 0.7;

fn is_nonpositive_int(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Plain power series, no transforms. Valid for |z| < 1.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64, policy: &TruncationPolicy) -> Result<EvalResult> {
    if is_nonpositive_int(c) {
        return Err(Error::domain("hyp2f1", format!("c = {c} is a nonpositive integer")));
    }
    let terminating = is_nonpositive_int(a) || is_nonpositive_int(b);
    if !terminating && z.abs() >= 1.0 {
        return Err(Error::domain("hyp2f1_series", format!("|z| = {} >= 1", z.abs())));
    }
    let out = hypergeometric_series(&[a, b], &[c], z, policy.max_j, "hyp2f1")?;
    let scale = out.ln_scale.exp();
    Ok(EvalResult {
        value: out.mantissa * scale,
        abs_error_estimate: out.abs_err * scale,
        terms_used: out.terms,
    })
}

/// ₂F₁(a, b; c; z) for z < 1.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64, policy: &TruncationPolicy) -> Result<EvalResult> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(Error::domain("hyp2f1", "non-finite argument"));
    }
    if z >= 1.0 {
        return Err(Error::domain("hyp2f1", format!("z = {z} must be < 1")));
    }
    if is_nonpositive_int(c) {
        return Err(Error::domain("hyp2f1", format!("c = {c} is a nonpositive integer")));
    }
    if z == 0.0 {
        return Ok(EvalResult::exact(1.0));
    }
    if is_nonpositive_int(a) || is_nonpositive_int(b) {
        return hyp2f1_series(a, b, c, z, policy);
    }
    if z < -0.5 {
        let w = z / (z - 1.0);
        let inner = positive_arg(a, c - b, c, w, policy)?;
        let pre = (1.0 - z).powf(-a);
        return Ok(scaled(inner, pre));
    }
    if z <= DIRECT_MAX {
        return direct_or_euler(a, b, c, z, policy);
    }
    positive_arg(a, b, c, z, policy)
}

fn scaled(r: EvalResult, factor: f64) -> EvalResult {
    EvalResult {
        value: r.value * factor,
        abs_error_estimate: r.abs_error_estimate * factor.abs(),
        terms_used: r.terms_used,
    }
}

fn positive_arg(a: f64, b: f64, c: f64, z: f64, policy: &TruncationPolicy) -> Result<EvalResult> {
    if z <= DIRECT_MAX || is_nonpositive_int(a) || is_nonpositive_int(b) {
        return direct_or_euler(a, b, c, z, policy);
    }
    if is_nonpositive_int(c - a) || is_nonpositive_int(c - b) {
        return direct_or_euler(a, b, c, z, policy);
    }
    let s = c - a - b;
    if (s - s.round()).abs() > 0.05 {
        return connection(a, b, c, z, policy);
    }
    direct_or_euler(a, b, c, z, policy)
}

/// Direct series, or Euler's (1−z)^{c−a−b} ₂F₁(c−a, c−b; c; z) when that
/// terminates or its coefficients grow more slowly.
fn direct_or_euler(a: f64, b: f64, c: f64, z: f64, policy: &TruncationPolicy) -> Result<EvalResult> {
    let euler_terminates = is_nonpositive_int(c - a) || is_nonpositive_int(c - b);
    let direct_terminates = is_nonpositive_int(a) || is_nonpositive_int(b);
    let use_euler = !direct_terminates
        && z > 0.0
        && (euler_terminates || (z > DIRECT_MAX && c - a - b < a + b - c));
    if use_euler {
        let inner = hyp2f1_series(c - a, c - b, c, z, policy)?;
        return Ok(scaled(inner, (1.0 - z).powf(c - a - b)));
    }
    hyp2f1_series(a, b, c, z, policy)
}

/// ₂F₁(a,b;c;z) = Γ(c)Γ(s)/(Γ(c−a)Γ(c−b)) ₂F₁(a,b;1−s;1−z)
///              + (1−z)^s Γ(c)Γ(−s)/(Γ(a)Γ(b)) ₂F₁(c−a,c−b;1+s;1−z),  s = c−a−b.
fn connection(a: f64, b: f64, c: f64, z: f64, policy: &TruncationPolicy) -> Result<EvalResult> {
    let s = c - a - b;
    let w = 1.0 - z;
    let f1 = hyp2f1_series(a, b, 1.0 - s, w, policy)?;
    let f2 = hyp2f1_series(c - a, c - b, 1.0 + s, w, policy)?;
    let coef1 = gamma_ratio(&[c, s], &[c - a, c - b]);
    let coef2 = w.powf(s) * gamma_ratio(&[c, -s], &[a, b]);
    let value = coef1 * f1.value + coef2 * f2.value;
    let cancel = (coef1 * f1.value).abs().max((coef2 * f2.value).abs());
    Ok(EvalResult {
        value,
        abs_error_estimate: (coef1 * f1.abs_error_estimate).abs()
            + (coef2 * f2.abs_error_estimate).abs()
            + 8.0 * f64::EPSILON * cancel,
        terms_used: f1.terms_used + f2.terms_used,
    })
}

/// Π Γ(num) / Π Γ(den), using 1/Γ at poles and logs for large arguments.
fn gamma_ratio(num: &[f64], den: &[f64]) -> f64 {
    if den.iter().any(|d| is_nonpositive_int(*d)) {
        return 0.0;
    }
    let all_pos = num.iter().chain(den).all(|x| *x > 0.0);
    if all_pos {
        let ln: f64 = num.iter().map(|x| lgamma_pos(*x)).sum::<f64>()
            - den.iter().map(|x| lgamma_pos(*x)).sum::<f64>();
        return ln.exp();
    }
    let mut v = 1.0;
    for x in num {
        v /= rgamma(*x);
    }
    for x in den {
        v *= rgamma(*x);
    }
    v
}
