//! Confluent hypergeometric function ₁F₁(a; b; z).

use super::series::{hypergeometric_series, SeriesOutcome};
use super::{EvalResult, LogEvalResult, TruncationPolicy};
use crate::{Error, Result};

fn is_nonpositive_int(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Returns the raw series outcome plus the extra exponent `shift` contributed
/// by a Kummer transform: ₁F₁ = outcome · e^shift.
fn evaluate(a: f64, b: f64, z: f64, policy: &TruncationPolicy) -> Result<(SeriesOutcome, f64)> {
    if is_nonpositive_int(b) {
        return Err(Error::domain("hyp1f1", format!("b = {b} is a nonpositive integer")));
    }
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(Error::domain("hyp1f1", "non-finite argument"));
    }
    let cap = policy.max_j.max(16);
    // Negative arguments go through Kummer's transform
    // ₁F₁(a;b;z) = e^z ₁F₁(b−a;b;−z) unless the direct series is a polynomial.
    if z < 0.0 && !is_nonpositive_int(a) {
        let out = hypergeometric_series(&[b - a], &[b], -z, cap, "hyp1f1")?;
        return Ok((out, z));
    }
    let out = hypergeometric_series(&[a], &[b], z, cap, "hyp1f1")?;
    Ok((out, 0.0))
}

/// ₁F₁(a; b; z) by the ascending series.
///
/// Negative `z` is mapped to a positive argument with Kummer's transform, so
/// for `b ≥ a` every summed term is positive. The remaining mixed-sign cases
/// are summed in double-double and the cancellation floor is folded into
/// `abs_error_estimate`. Fails with `NoConvergence` if `policy.max_j` terms
/// are not enough.
pub fn hyp1f1(a: f64, b: f64, z: f64, policy: &TruncationPolicy) -> Result<EvalResult> {
    let (out, shift) = evaluate(a, b, z, policy)?;
    let scale = (out.ln_scale + shift).exp();
    let value = out.mantissa * scale;
    let abs_error_estimate = out.abs_err * scale;
    check_tol(out.rel_err(), policy, out.terms)?;
    Ok(EvalResult {
        value,
        abs_error_estimate,
        terms_used: out.terms,
    })
}

/// ln ₁F₁(a; b; z) for arguments where the function is positive. Survives
/// values far outside the `f64` range (large a and z in the PDF series).
pub fn hyp1f1_ln(a: f64, b: f64, z: f64, policy: &TruncationPolicy) -> Result<LogEvalResult> {
    let (out, shift) = evaluate(a, b, z, policy)?;
    if !(out.mantissa > 0.0) {
        return Err(Error::domain("hyp1f1_ln", format!("1F1({a}; {b}; {z}) is not positive")));
    }
    check_tol(out.rel_err(), policy, out.terms)?;
    Ok(LogEvalResult {
        ln_value: out.mantissa.ln() + out.ln_scale + shift,
        rel_error_estimate: out.rel_err(),
        terms_used: out.terms,
    })
}

fn check_tol(rel: f64, policy: &TruncationPolicy, terms: usize) -> Result<()> {
    if rel > policy.rel_tol {
        return Err(Error::NoConvergence {
            what: "hyp1f1",
            terms,
            estimate: rel,
        });
    }
    Ok(())
}

fn finite_order(a: f64, epsilon: f64) -> Result<usize> {
    let n = a - epsilon;
    let rounded = n.round();
    if n < -1e-9 || (n - rounded).abs() > 1e-9 * a.abs().max(1.0) || !(epsilon > 0.0) {
        return Err(Error::domain(
            "hyp1f1_kummer_finite",
            format!("a - epsilon = {n} must be a nonnegative integer with epsilon > 0"),
        ));
    }
    Ok(rounded as usize)
}

/// ₁F₁(a; ε; x) as the finite Kummer expansion
/// e^x Σ_{j=0}^{N} N! / ((N−j)! j! (ε)_j) x^j with N = a − ε a nonnegative integer.
pub fn hyp1f1_kummer_finite(a: f64, epsilon: f64, x: f64) -> Result<EvalResult> {
    let order = finite_order(a, epsilon)?;
    if x >= 0.0 {
        let (mantissa, ln_scale) = finite_sum(order, epsilon, x);
        let value = mantissa * (ln_scale + x).exp();
        return Ok(EvalResult {
            value,
            abs_error_estimate: (order + 1) as f64 * f64::EPSILON * value.abs(),
            terms_used: order + 1,
        });
    }
    let out = hypergeometric_series(&[-(order as f64)], &[epsilon], -x, order + 2, "hyp1f1_kummer_finite")?;
    let scale = (out.ln_scale + x).exp();
    Ok(EvalResult {
        value: out.mantissa * scale,
        abs_error_estimate: out.abs_err * scale,
        terms_used: out.terms,
    })
}

/// Log-domain twin of [`hyp1f1_kummer_finite`] for x ≥ 0.
pub fn ln_hyp1f1_kummer_finite(a: f64, epsilon: f64, x: f64) -> Result<LogEvalResult> {
    let order = finite_order(a, epsilon)?;
    if x < 0.0 {
        return Err(Error::domain("ln_hyp1f1_kummer_finite", "x must be nonnegative"));
    }
    let (mantissa, ln_scale) = finite_sum(order, epsilon, x);
    Ok(LogEvalResult {
        ln_value: mantissa.ln() + ln_scale + x,
        rel_error_estimate: (order + 1) as f64 * f64::EPSILON,
        terms_used: order + 1,
    })
}

fn finite_sum(order: usize, epsilon: f64, x: f64) -> (f64, f64) {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut ln_scale = 0.0;
    for j in 0..order {
        let jf = j as f64;
        term *= (order - j) as f64 * x / ((jf + 1.0) * (epsilon + jf));
        sum += term;
        if sum > 1e250 {
            sum *= 1e-250;
            term *= 1e-250;
            ln_scale += 250.0 * std::f64::consts::LN_10;
        }
    }
    (sum, ln_scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    /// Term-by-term Σ (a)_n z^n / ((b)_n n!) without any transform.
    fn direct(a: f64, b: f64, z: f64, n: usize) -> f64 {
        let mut t = 1.0;
        let mut s = 1.0;
        for k in 0..n {
            let k = k as f64;
            t *= (a + k) * z / ((b + k) * (k + 1.0));
            s += t;
        }
        s
    }

    #[test]
    fn trivial_values() {
        assert_eq!(hyp1f1(2.3, 4.1, 0.0, &pol()).unwrap().value, 1.0);
        let e = hyp1f1(3.0, 3.0, 1.0, &pol()).unwrap().value;
        assert!((e - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn matches_fifty_term_direct_sum() {
        let expected = direct(2.0, 3.0, 0.5, 50);
        let got = hyp1f1(2.0, 3.0, 0.5, &pol()).unwrap();
        assert!((got.value - expected).abs() < 1e-15 * expected);
        assert!(got.terms_used <= 50);
    }

    #[test]
    fn closed_forms_on_both_sides_of_zero() {
        // 1F1(1; 2; z) = (e^z - 1)/z
        for &z in &[-25.0, -3.0, -0.1, 0.2, 7.0, 40.0] {
            let expected = (f64::exp(z) - 1.0) / z;
            let got = hyp1f1(1.0, 2.0, z, &pol()).unwrap().value;
            assert!((got / expected - 1.0).abs() < 1e-13, "z = {z}");
        }
        // 1F1(3; 1; -x) = e^{-x} L_2(x), L_2(x) = (x^2 - 4x + 2)/2
        for &x in &[0.5, 3.0, 12.0, 29.0] {
            let expected = (-x as f64).exp() * (x * x - 4.0 * x + 2.0) / 2.0;
            let got = hyp1f1(3.0, 1.0, -x, &pol()).unwrap();
            assert!((got.value - expected).abs() <= 1e-13 * expected.abs() + got.abs_error_estimate);
        }
    }

    #[test]
    fn log_variant_survives_overflow() {
        let ln = hyp1f1_ln(800.0, 4.0, 600.0, &pol()).unwrap();
        assert!(ln.ln_value > 709.0);
        let small = hyp1f1_ln(2.0, 3.0, 0.5, &pol()).unwrap();
        assert!((small.ln_value - direct(2.0, 3.0, 0.5, 60).ln()).abs() < 1e-15);
    }

    #[test]
    fn kummer_finite_agrees_with_series() {
        let fin = hyp1f1_kummer_finite(3.0, 2.0, 1.5).unwrap().value;
        let ser = hyp1f1(3.0, 2.0, 1.5, &pol()).unwrap().value;
        assert!((fin / ser - 1.0).abs() < 1e-10);
        // N = 2: e^x (1 + x + x^2/6) hand expanded at x = 0.7
        let x: f64 = 0.7;
        let hand = x.exp() * (1.0 + 2.0 * x / 2.0 + x * x / (2.0 * 3.0));
        let got = hyp1f1_kummer_finite(4.0, 2.0, x).unwrap().value;
        assert!((got - hand).abs() < 1e-14 * hand);
        // N = 0 collapses to e^x
        let e = hyp1f1_kummer_finite(2.5, 2.5, 1.0).unwrap().value;
        assert!((e - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn kummer_finite_preconditions() {
        assert!(hyp1f1_kummer_finite(2.5, 2.0, 1.0).is_err());
        assert!(hyp1f1_kummer_finite(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn rejects_pole_parameter() {
        assert!(hyp1f1(1.0, -2.0, 1.0, &pol()).is_err());
        assert!(hyp1f1(1.0, 0.0, 1.0, &pol()).is_err());
    }

    #[test]
    fn cap_raises_no_convergence() {
        let tight = TruncationPolicy {
            max_j: 20,
            ..pol()
        };
        let err = hyp1f1(5.0, 1.5, 80.0, &tight).unwrap_err();
        assert!(err.is_convergence());
    }
}
