//! The two Meijer-G instances that show up in the MGF and capacity results,
//! evaluated through their hypergeometric / integral reductions rather than a
//! general Meijer-G engine.

use super::gamma::lgamma_pos;
use super::hyp2f1::hyp2f1;
use super::quad::{integrate_positive_axis, QuadTol};
use super::{EvalResult, LogEvalResult, TruncationPolicy};
use crate::{Error, Result};

/// G^{1,2}_{2,2}(· | a1, b2; 0, b2) through its Slater reduction
/// Γ(1−a1) · ₂F₁(1−a1, 1−b2; 1−b2; x).
///
/// `x` is the argument of the ₂F₁ after the reduction (the MGF feeds the
/// positive quantity η / (γ̄ (1 + 1/λ₁)(s + η/γ̄))); x = 1 is a pole.
pub fn meijer_g1222(a1: f64, b2: f64, x: f64, policy: &TruncationPolicy) -> Result<EvalResult> {
    let shape = 1.0 - a1;
    if !(shape > 0.0) {
        return Err(Error::domain("meijer_g1222", format!("1 - a1 = {shape} must be positive")));
    }
    if x >= 1.0 {
        return Err(Error::domain("meijer_g1222", format!("x = {x} is at or beyond the pole at 1")));
    }
    let f = hyp2f1(shape, 1.0 - b2, 1.0 - b2, x, policy)?;
    let g = libm::tgamma(shape);
    Ok(EvalResult {
        value: g * f.value,
        abs_error_estimate: g * f.abs_error_estimate,
        terms_used: f.terms_used,
    })
}

/// E[ln(1 + X)] for X ~ Gamma(shape q, rate β), by adaptive quadrature in
/// log-space split at the mode of x·f(x).
pub fn log1p_gamma_mean(q: f64, beta: f64) -> Result<EvalResult> {
    if !(q > 0.0 && beta > 0.0) {
        return Err(Error::domain("capacity_kernel", format!("need q > 0, beta > 0, got ({q}, {beta})")));
    }
    let ln_norm = q * beta.ln() - lgamma_pos(q);
    let integrand = |x: f64| {
        let ln_pdf = ln_norm + (q - 1.0) * x.ln() - beta * x;
        ln_pdf.exp() * x.ln_1p()
    };
    let tol = QuadTol {
        abs: 0.0,
        rel: 1e-12,
        max_intervals: 4000,
    };
    let r = integrate_positive_axis(integrand, q / beta, tol)?;
    if r.abs_error > 1e-9 * r.value.abs() {
        return Err(Error::Quadrature {
            what: "capacity_kernel",
            estimate: r.abs_error,
        });
    }
    Ok(EvalResult {
        value: r.value,
        abs_error_estimate: r.abs_error,
        terms_used: r.evaluations,
    })
}

/// G^{1,3}_{3,2}(1/β | 1, 1, 1−q; 1, 0) = β^q ∫_0^∞ γ^{q−1} e^{−βγ} ln(1+γ) dγ
/// = Γ(q) · E[ln(1+X)], X ~ Gamma(q, rate β).
///
/// At q = 1 this is e^β E₁(β).
pub fn capacity_kernel(q: f64, beta: f64) -> Result<EvalResult> {
    let mean = log1p_gamma_mean(q, beta)?;
    let g = libm::tgamma(q);
    Ok(EvalResult {
        value: g * mean.value,
        abs_error_estimate: g * mean.abs_error_estimate,
        terms_used: mean.terms_used,
    })
}

/// ln of [`capacity_kernel`], usable for shapes where Γ(q) overflows.
pub fn ln_capacity_kernel(q: f64, beta: f64) -> Result<LogEvalResult> {
    let mean = log1p_gamma_mean(q, beta)?;
    Ok(LogEvalResult {
        ln_value: lgamma_pos(q) + mean.value.ln(),
        rel_error_estimate: mean.rel_error_estimate(),
        terms_used: mean.terms_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::exp_e1;

    #[test]
    fn meijer_reduction_values() {
        let pol = TruncationPolicy::default();
        // Lm + k = 3 at x = 0 gives Γ(3)
        let v = meijer_g1222(-2.0, -3.0, 0.0, &pol).unwrap().value;
        assert!((v - 2.0).abs() < 1e-14);
        // Lm + k = 2, x = 0.5: Γ(2)(0.5)^{-2}
        let v = meijer_g1222(-1.0, 1.0 - 4.7, 0.5, &pol).unwrap().value;
        assert!((v - 4.0).abs() < 1e-13);
        assert!(meijer_g1222(-1.0, -3.0, 1.0, &pol).is_err());
    }

    #[test]
    fn kernel_at_unit_shape_is_e1() {
        for &beta in &[0.5f64, 1.0, 2.0] {
            let exact = beta.exp() * exp_e1(beta).unwrap();
            let got = capacity_kernel(1.0, beta).unwrap();
            assert!((got.value / exact - 1.0).abs() < 1e-10, "beta = {beta}");
        }
        let v = capacity_kernel(1.0, 1.0).unwrap().value;
        assert!((v - 0.596_347_362_3).abs() < 1e-9);
    }

    #[test]
    fn kernel_shape_two_closed_form() {
        // β²∫γ e^{-βγ} ln(1+γ) dγ = 1 + (1 − β) e^β E₁(β)
        let beta: f64 = 0.5;
        let exact = 1.0 + (1.0 - beta) * beta.exp() * exp_e1(beta).unwrap();
        let got = capacity_kernel(2.0, beta).unwrap().value;
        assert!((got / exact - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kernel_decreases_in_rate() {
        let mut prev = f64::INFINITY;
        for i in 0..12 {
            let beta = 0.25 * 2f64.powi(i);
            let v = log1p_gamma_mean(3.0, beta).unwrap().value;
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-2);
        let ln = ln_capacity_kernel(400.0, 2.0).unwrap();
        assert!(ln.ln_value.is_finite() && ln.ln_value > 709.0);
    }
}
