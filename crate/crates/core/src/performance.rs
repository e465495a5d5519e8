//! Receiver metrics: M-PSK SER, M-PSK/M-QAM BER and ergodic capacity.
//!
//! The BER and capacity double series are organised as a mixture: given the
//! shadowing component k, the index j of the ₁F₁ expansion follows a negative
//! binomial law NB(Lm+k, λ₁/(1+λ₁)), and the conditional SNR given (k, j) is
//! Gamma(ε+j, rate η/γ̄). Each (j, k) term is therefore
//! A δ_k · NB_k(j) · E[metric(X_j)], which is the series term written with the
//! constants regrouped so nothing overflows.

use std::f64::consts::{LN_2, PI};

use crate::analytic::{asymptotic_weight, mgf, mgf_asymptotic, pdf_quadrature, LogAccumulator, PdfSeries};
use crate::specfun::{hyp2f1, log1p_gamma_mean, log_gamma, EvalResult, TruncationPolicy};
use crate::{Error, Result};

pub use crate::specfun::hyp1f1_kummer_finite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstellationFamily {
    Mpsk,
    Mqam,
}

/// Constellation constants of the approximation Pe(γ) = ζ Σ_{p=1}^{τ} Q(a_p √γ).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationSpec {
    pub family: ConstellationFamily,
    pub order: u32,
    pub zeta: f64,
    pub tau: usize,
    pub a: Vec<f64>,
}

impl ConstellationSpec {
    /// M-PSK: ζ = 2/max(log₂M, 2), τ = max(M/4, 1), a_p = √2 sin((2p−1)π/M).
    pub fn mpsk(order: u32) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::InvalidParams(format!("M-PSK order {order} must be a power of two >= 2")));
        }
        let m = order as f64;
        let bits = m.log2();
        let tau = (order as usize / 4).max(1);
        let a = (1..=tau)
            .map(|p| 2f64.sqrt() * ((2 * p - 1) as f64 * PI / m).sin())
            .collect();
        Ok(ConstellationSpec {
            family: ConstellationFamily::Mpsk,
            order,
            zeta: 2.0 / bits.max(2.0),
            tau,
            a,
        })
    }

    /// Square M-QAM: ζ = 4(1 − 1/√M)/log₂M, τ = √M/2, a_p = (2p−1)√(3/(M−1)).
    pub fn mqam(order: u32) -> Result<Self> {
        let side = (order as f64).sqrt().round() as u32;
        if order < 4 || !order.is_power_of_two() || side * side != order {
            return Err(Error::InvalidParams(format!(
                "M-QAM order {order} must be a square power of two >= 4"
            )));
        }
        let m = order as f64;
        let tau = side as usize / 2;
        let step = (3.0 / (m - 1.0)).sqrt();
        Ok(ConstellationSpec {
            family: ConstellationFamily::Mqam,
            order,
            zeta: 4.0 * (1.0 - 1.0 / m.sqrt()) / m.log2(),
            tau,
            a: (1..=tau).map(|p| (2 * p - 1) as f64 * step).collect(),
        })
    }

    /// Conditional error probability ζ Σ Q(a_p √γ) at a fixed SNR.
    pub fn conditional_error(&self, gamma: f64) -> f64 {
        let r = gamma.max(0.0).sqrt();
        self.zeta * self.a.iter().map(|a| crate::specfun::q_function(a * r)).sum::<f64>()
    }
}

/// The three (β_p, α_p) pairs of the MGF approximation to the M-PSK SER.
pub fn mpsk_ser_weights(order: u32) -> Result<[(f64, f64); 3]> {
    if order < 2 {
        return Err(Error::InvalidParams(format!("M-PSK order {order} must be >= 2")));
    }
    let m = order as f64;
    let theta = (m - 1.0) * PI / m;
    let g = (PI / m).sin().powi(2);
    Ok([
        (theta / (2.0 * PI) - 1.0 / 6.0, g),
        (0.25, 4.0 * g / 3.0),
        (theta / (2.0 * PI) - 0.25, g / theta.sin().powi(2)),
    ])
}

fn combine_mgf<F>(order: u32, mut eval: F) -> Result<EvalResult>
where
    F: FnMut(f64) -> Result<EvalResult>,
{
    let mut value = 0.0;
    let mut err = 0.0;
    let mut terms = 0;
    for (beta, alpha) in mpsk_ser_weights(order)? {
        if beta == 0.0 {
            continue;
        }
        let r = eval(alpha)?;
        value += beta * r.value;
        err += beta.abs() * r.abs_error_estimate;
        terms = terms.max(r.terms_used);
    }
    Ok(EvalResult {
        value,
        abs_error_estimate: err,
        terms_used: terms,
    })
}

/// Approximate M-PSK SER Σ β_p M_γ(α_p). This is an approximation of the
/// exact SER, not a bound.
pub fn ser_mpsk(series: &PdfSeries, order: u32) -> Result<EvalResult> {
    combine_mgf(order, |s| mgf(series, s))
}

/// The same approximation driven by the high-SNR asymptotic MGF.
pub fn ser_mpsk_asymptotic(series: &PdfSeries, order: u32) -> Result<EvalResult> {
    combine_mgf(order, |s| mgf_asymptotic(series, s))
}

/// Sums A δ_k NB_k(j) E_j over (k, j) along anti-diagonals n = j + k, where
/// `ln_inner(j)` returns (ln E_j, relative error). Stops when whole
/// diagonals fall below the tolerance.
fn sweep_diagonals<G>(
    series: &PdfSeries,
    what: &'static str,
    mut ln_inner: G,
) -> Result<EvalResult>
where
    G: FnMut(usize) -> Result<(f64, f64)>,
{
    let c = &series.coeffs;
    let policy = series.policy;
    let ln1p = c.lambda1().ln_1p();
    let ln_p = c.lambda1().ln() - ln1p;
    let cap = policy.max_k.min(policy.max_j);
    let mut deltas = c.deltas((cap + 1).min(64));
    // ln of A δ_k NB_k(j) for the current j of every active k
    let mut ln_w_nb: Vec<f64> = Vec::with_capacity(cap + 1);
    let mut inner: Vec<(f64, f64)> = Vec::with_capacity(cap + 1);
    let mut diag = LogAccumulator::new(policy.rel_tol);
    for n in 0..=cap {
        inner.push(ln_inner(n)?);
        // advance j → j + 1 for existing k
        for (k, w) in ln_w_nb.iter_mut().enumerate() {
            let j = (n - 1 - k) as f64;
            *w += (c.shape(k) + j).ln() - (j + 1.0).ln() + ln_p;
        }
        if n == deltas.len() {
            deltas = c.deltas((2 * n).min(cap + 1));
        }
        let d = deltas[n];
        ln_w_nb.push(if d > 0.0 { c.ln_a() + d.ln() - c.shape(n) * ln1p } else { f64::NEG_INFINITY });
        let mut sum = LogAccumulator::new(policy.rel_tol);
        for (k, w) in ln_w_nb.iter().enumerate() {
            let (ln_e, rel) = inner[n - k];
            sum.push(w + ln_e, rel);
        }
        let s = sum.total();
        if diag.push(s.ln_value, s.rel_err) {
            let total = diag.finish();
            return Ok(total.scaled(0.0));
        }
    }
    Err(Error::NoConvergence {
        what,
        terms: cap,
        estimate: diag.rel_estimate(),
    })
}

/// E[Q(a √X)] for X ~ Gamma(n, rate b), in log form:
/// Γ(n+½)/(2√π Γ(n+1)) w^n ₂F₁(n, ½; n+1; w), w = x/(1+x), x = 2b/a².
fn ln_gamma_q_mean(n: f64, a: f64, b: f64, policy: &TruncationPolicy) -> Result<(f64, f64)> {
    let x = 2.0 * b / (a * a);
    let w = x / (1.0 + x);
    let f = hyp2f1(n, 0.5, n + 1.0, w, policy)?;
    let ln = log_gamma(n + 0.5)? - log_gamma(n + 1.0)? - (2.0 * PI.sqrt()).ln() + n * w.ln() + f.value.ln();
    Ok((ln, f.rel_error_estimate()))
}

/// Average BER ζ Σ_p E[Q(a_p √γ)] from the double series over (k, j).
pub fn ber(series: &PdfSeries, constellation: &ConstellationSpec) -> Result<EvalResult> {
    let eps = series.coeffs.epsilon();
    let b = series.rate();
    let policy = series.policy;
    let mut out = sweep_diagonals(series, "ber", |j| {
        let n = eps + j as f64;
        let mut acc = LogAccumulator::new(policy.rel_tol);
        for &a in &constellation.a {
            let (ln, rel) = ln_gamma_q_mean(n, a, b, &policy)?;
            acc.push(ln, rel);
        }
        let s = acc.total();
        Ok((s.ln_value, s.rel_err))
    })?;
    out.value *= constellation.zeta;
    out.abs_error_estimate *= constellation.zeta;
    Ok(out)
}

/// Leading high-SNR term ζ Γ(ε+½) / (2ε√π (a₁/√2)^{2ε}) · A Σ_k D̃_k · (η/γ̄)^ε.
pub fn ber_asymptotic(series: &PdfSeries, constellation: &ConstellationSpec) -> Result<EvalResult> {
    let eps = series.coeffs.epsilon();
    let a1 = constellation.a[0];
    let w = asymptotic_weight(series)?;
    let ln_front = constellation.zeta.ln() + log_gamma(eps + 0.5)? - log_gamma(eps)?
        - (2.0 * eps * PI.sqrt()).ln()
        - eps * (a1 * a1 / 2.0).ln()
        + eps * series.rate().ln();
    Ok(w.scaled(ln_front))
}

/// Ergodic capacity in bits/s/Hz through the per-term kernel
/// E[ln(1+X)], X ~ Gamma(ε+j, rate η/γ̄), summed over (k, j).
pub fn capacity(series: &PdfSeries) -> Result<EvalResult> {
    let eps = series.coeffs.epsilon();
    let b = series.rate();
    let mut out = sweep_diagonals(series, "capacity", |j| {
        let r = log1p_gamma_mean(eps + j as f64, b)?;
        Ok((r.value.ln(), r.rel_error_estimate()))
    })?;
    out.value /= LN_2;
    out.abs_error_estimate /= LN_2;
    Ok(out)
}

/// Ergodic capacity by direct quadrature of log₂(1+γ) f_γ(γ).
pub fn capacity_quadrature(series: &PdfSeries) -> Result<EvalResult> {
    pdf_quadrature(series, |g| g.ln_1p() / LN_2, series.policy.rel_tol.max(1e-12))
}
