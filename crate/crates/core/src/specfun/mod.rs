//! Special-function kernel.
//!
//! Everything here is a pure function of its inputs. Series evaluators
//! return an [`EvalResult`] carrying a truncation-error estimate and the
//! number of terms consumed, so callers can propagate accuracy through the
//! higher-level power series.

mod bessel;
mod dd;
mod erf;
mod gamma;
mod hyp1f1;
mod hyp2f1;
mod incgamma;
mod meijer;
pub mod quad;
mod series;

pub use bessel::{bessel_i, ln_bessel_i};
pub use erf::{erfc, q_function};
pub use gamma::{gamma, ln_pochhammer, log_gamma, pochhammer, rgamma};
pub use hyp1f1::{hyp1f1, hyp1f1_kummer_finite, hyp1f1_ln, ln_hyp1f1_kummer_finite};
pub use hyp2f1::{hyp2f1, hyp2f1_series};
pub use incgamma::{exp_e1, gamma_p, gamma_q};
pub use meijer::{capacity_kernel, ln_capacity_kernel, log1p_gamma_mean, meijer_g1222};

/// Value of a truncated series or quadrature together with its accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    /// Upper bound on the truncation error (tail-ratio or quadrature estimate).
    pub abs_error_estimate: f64,
    pub terms_used: usize,
}

impl EvalResult {
    pub fn exact(value: f64) -> Self {
        EvalResult {
            value,
            abs_error_estimate: 0.0,
            terms_used: 1,
        }
    }

    pub fn rel_error_estimate(&self) -> f64 {
        if self.value == 0.0 {
            self.abs_error_estimate
        } else {
            self.abs_error_estimate / self.value.abs()
        }
    }
}

/// Logarithm of a positive quantity that may overflow `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogEvalResult {
    pub ln_value: f64,
    /// Relative error estimate of `exp(ln_value)`.
    pub rel_error_estimate: f64,
    pub terms_used: usize,
}

impl LogEvalResult {
    pub fn to_eval(self) -> EvalResult {
        let value = self.ln_value.exp();
        EvalResult {
            value,
            abs_error_estimate: value * self.rel_error_estimate,
            terms_used: self.terms_used,
        }
    }
}

/// Tolerance and term caps for the k- and j-series.
///
/// The default caps are generous because the mixture weights decay like
/// (1 − λ₁/λ_max)^k: strongly correlated branches (ρ = 0.9, three branches)
/// need close to 3000 terms for a 1e-10 tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub rel_tol: f64,
    pub max_k: usize,
    pub max_j: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            rel_tol: 1e-10,
            max_k: 20_000,
            max_j: 20_000,
        }
    }
}

impl TruncationPolicy {
    pub fn with_tol(rel_tol: f64) -> Self {
        TruncationPolicy {
            rel_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(crate::Error::InvalidParams(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if self.max_k == 0 || self.max_j == 0 {
            return Err(crate::Error::InvalidParams("term caps must be >= 1".into()));
        }
        Ok(())
    }
}

