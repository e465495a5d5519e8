//! Density and MGF of the MRC output SNR γ = γ̄ Y / η.
//!
//! Conditioned on the shadowing power Z, Y is noncentral chi-square with 2ε
//! degrees of freedom; averaging over the Gamma mixture of Z gives
//!
//! f_γ(γ) = A (η/γ̄)^ε γ^{ε−1} e^{−ηγ/γ̄} Σ_k D̃_k ₁F₁(Lm+k; ε; ηγλ₁/(γ̄(1+λ₁))),
//!
//! with D̃_k = δ_k / (Γ(ε) (1+λ₁)^{Lm+k}). All terms are nonnegative and are
//! carried as logarithms.

use crate::model::{assemble, ChannelParams, SeriesCoefficients, TruncationPolicy};
use crate::specfun::quad::{integrate_positive_axis, QuadTol};
use crate::specfun::{hyp1f1_ln, ln_hyp1f1_kummer_finite, log_gamma, meijer_g1222, EvalResult};
use crate::{Error, Result};

/// Evaluator for the SNR density and everything derived from it.
#[derive(Debug, Clone)]
pub struct PdfSeries {
    pub coeffs: SeriesCoefficients,
    pub policy: TruncationPolicy,
}

impl PdfSeries {
    pub fn new(params: &ChannelParams, policy: TruncationPolicy) -> Result<Self> {
        policy.validate()?;
        Ok(PdfSeries {
            coeffs: assemble(params)?,
            policy,
        })
    }

    pub fn from_coeffs(coeffs: SeriesCoefficients, policy: TruncationPolicy) -> Result<Self> {
        policy.validate()?;
        Ok(PdfSeries { coeffs, policy })
    }

    /// Same channel at another average SNR; reuses the δ_k computed so far.
    pub fn with_avg_snr(&self, avg_snr: f64) -> Result<Self> {
        Ok(PdfSeries {
            coeffs: self.coeffs.with_avg_snr(avg_snr)?,
            policy: self.policy,
        })
    }

    pub fn avg_snr(&self) -> f64 {
        self.coeffs.avg_snr()
    }

    /// η / γ̄, the rate of the exponential envelope.
    pub(crate) fn rate(&self) -> f64 {
        self.coeffs.eta() / self.coeffs.avg_snr()
    }
}

/// Log-domain sum of a nonnegative k-series.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KSum {
    pub ln_value: f64,
    pub rel_err: f64,
    pub terms: usize,
}

impl KSum {
    pub fn scaled(self, ln_factor: f64) -> EvalResult {
        let value = (self.ln_value + ln_factor).exp();
        EvalResult {
            value,
            abs_error_estimate: value * self.rel_err,
            terms_used: self.terms,
        }
    }
}

/// Running log-domain sum of nonnegative terms with the shared stopping rule:
/// three consecutive, non-increasing terms each below `rel_tol` of the running
/// sum, and a tail bound 2 t r / (1 − r), r = t_n / t_{n−1}, below
/// `rel_tol` as well.
#[derive(Debug, Clone)]
pub(crate) struct LogAccumulator {
    tol: f64,
    ln_tol: f64,
    ref_ln: f64,
    acc: f64,
    err_acc: f64,
    prev: f64,
    quiet: usize,
    tail: f64,
    last_t: f64,
    count: usize,
}

impl LogAccumulator {
    pub fn new(rel_tol: f64) -> Self {
        LogAccumulator {
            tol: rel_tol,
            ln_tol: rel_tol.ln(),
            ref_ln: f64::NEG_INFINITY,
            acc: 0.0,
            err_acc: 0.0,
            prev: f64::NEG_INFINITY,
            quiet: 0,
            tail: f64::INFINITY,
            last_t: 0.0,
            count: 0,
        }
    }

    /// Adds a term given as (ln t, relative error of t); returns true once
    /// the stopping rule is met.
    pub fn push(&mut self, ln_t: f64, rel: f64) -> bool {
        self.count += 1;
        if ln_t > self.ref_ln {
            if self.ref_ln.is_finite() {
                let s = (self.ref_ln - ln_t).exp();
                self.acc *= s;
                self.err_acc *= s;
                self.last_t *= s;
            }
            self.ref_ln = ln_t;
        }
        let t = if ln_t.is_finite() { (ln_t - self.ref_ln).exp() } else { 0.0 };
        self.acc += t;
        // a vanishing term carries no error even when its relative error is undefined
        if t > 0.0 {
            self.err_acc += t * rel;
        }
        self.last_t = t;
        let ln_sum = self.ref_ln + self.acc.ln();
        if ln_t - ln_sum < self.ln_tol && ln_t <= self.prev {
            self.quiet += 1;
        } else {
            self.quiet = 0;
        }
        let ratio = if ln_t.is_finite() { (ln_t - self.prev).exp() } else { 0.0 };
        // doubled: ratios creep upward on these sums, so the plain geometric tail runs low
        self.tail = if ratio < 1.0 { 2.0 * t * ratio / (1.0 - ratio) } else { f64::INFINITY };
        self.prev = ln_t;
        self.quiet >= 3 && self.tail <= self.tol * self.acc
    }

    /// Relative error estimate at the current point; used in
    /// no-convergence reports.
    pub fn rel_estimate(&self) -> f64 {
        if self.acc > 0.0 {
            (self.tail.min(self.last_t * 1e6) + self.err_acc) / self.acc
        } else {
            1.0
        }
    }

    /// The sum of all pushed terms without a truncation tail.
    pub fn total(&self) -> KSum {
        KSum {
            ln_value: self.ref_ln + self.acc.ln(),
            rel_err: if self.acc > 0.0 { self.err_acc / self.acc } else { 0.0 },
            terms: self.count,
        }
    }

    pub fn finish(&self) -> KSum {
        KSum {
            ln_value: self.ref_ln + self.acc.ln(),
            rel_err: (self.tail + self.err_acc) / self.acc,
            terms: self.count,
        }
    }
}

/// Sums Σ_k t_k over the mixture index. `term(k, ln_w)` receives the log of
/// the mixture weight A·δ_k and returns (ln t_k, relative error of t_k);
/// components with δ_k = 0 contribute nothing.
pub(crate) fn sum_k_series<F>(
    coeffs: &SeriesCoefficients,
    policy: &TruncationPolicy,
    what: &'static str,
    mut term: F,
) -> Result<KSum>
where
    F: FnMut(usize, f64) -> Result<(f64, f64)>,
{
    let mut deltas = coeffs.deltas(policy.max_k.min(64));
    let mut acc = LogAccumulator::new(policy.rel_tol);
    for k in 0..policy.max_k {
        if k == deltas.len() {
            deltas = coeffs.deltas((2 * k).min(policy.max_k));
        }
        let d = deltas[k];
        let (ln_t, rel) = if d > 0.0 {
            term(k, coeffs.ln_a() + d.ln())?
        } else {
            (f64::NEG_INFINITY, 0.0)
        };
        if ln_t.is_nan() {
            return Err(Error::domain(what, format!("term {k} is not a number")));
        }
        if acc.push(ln_t, rel) {
            return Ok(acc.finish());
        }
    }
    Err(Error::NoConvergence {
        what,
        terms: policy.max_k,
        estimate: acc.rel_estimate(),
    })
}

/// Smallest nonnegative integer n with |x − n| tiny, if any.
fn as_order(x: f64) -> Option<usize> {
    let r = x.round();
    if r >= 0.0 && (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        Some(r as usize)
    } else {
        None
    }
}

/// ln ₁F₁(a; ε; z) for z ≥ 0, through the finite Kummer sum when a − ε is a
/// small nonnegative integer and the ascending series otherwise.
fn ln_hyp1f1_pos(a: f64, epsilon: f64, z: f64, policy: &TruncationPolicy) -> Result<(f64, f64)> {
    if let Some(n) = as_order(a - epsilon) {
        if n <= 4 * (z as usize + 64) {
            let r = ln_hyp1f1_kummer_finite(a, epsilon, z)?;
            return Ok((r.ln_value, r.rel_error_estimate));
        }
    }
    let mut p = *policy;
    p.max_j = p.max_j.max(4 * (z as usize) + 200);
    let r = hyp1f1_ln(a, epsilon, z, &p)?;
    Ok((r.ln_value, r.rel_error_estimate))
}

/// ln ₁F₁(a₀ + k; b; z) for increasing k at fixed z ≥ 0.
///
/// Two anchors are evaluated directly; later values follow the contiguous
/// relation M(a+1) = [(2a − b + z) M(a) + (b − a) M(a−1)] / a, carried as the
/// ratio M(a+1)/M(a). For z ≥ 0, M(a; b; z) is the dominant solution in a,
/// so the forward direction is stable.
struct Hyp1f1Ladder {
    b: f64,
    z: f64,
    a: f64,
    ln_value: f64,
    ratio: f64,
    rel: f64,
    k: usize,
}

impl Hyp1f1Ladder {
    fn new(a0: f64, b: f64, z: f64, policy: &TruncationPolicy) -> Result<Self> {
        let (l0, r0) = ln_hyp1f1_pos(a0, b, z, policy)?;
        let (l1, r1) = ln_hyp1f1_pos(a0 + 1.0, b, z, policy)?;
        Ok(Hyp1f1Ladder {
            b,
            z,
            a: a0,
            ln_value: l0,
            ratio: (l1 - l0).exp(),
            rel: r0.max(r1),
            k: 0,
        })
    }

    /// (ln M(a₀ + k), relative error); `k` must not decrease between calls.
    fn at(&mut self, k: usize) -> (f64, f64) {
        while self.k < k {
            self.ln_value += self.ratio.ln();
            self.a += 1.0;
            self.ratio = ((2.0 * self.a - self.b + self.z) + (self.b - self.a) / self.ratio) / self.a;
            self.k += 1;
        }
        (self.ln_value, self.rel + 4.0 * f64::EPSILON * self.k as f64)
    }
}

/// f_γ(γ). At γ = 0 the value is 0 for ε > 1, the finite limit for ε = 1,
/// and +∞ for ε < 1 (still integrable).
pub fn pdf(series: &PdfSeries, gamma: f64) -> Result<EvalResult> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::domain("pdf", format!("gamma = {gamma} must be finite and nonnegative")));
    }
    let c = &series.coeffs;
    let eps = c.epsilon();
    let rate = series.rate();
    let l1 = c.lambda1();
    let ln1p_l1 = l1.ln_1p();
    let lg_eps = log_gamma(eps)?;
    if gamma == 0.0 {
        if eps > 1.0 {
            return Ok(EvalResult::exact(0.0));
        }
        if eps < 1.0 {
            return Ok(EvalResult {
                value: f64::INFINITY,
                abs_error_estimate: 0.0,
                terms_used: 0,
            });
        }
        // ε = 1: rate · Σ A δ_k (1+λ₁)^{−(Lm+k)}
        let s = sum_k_series(c, &series.policy, "pdf", |k, ln_w| Ok((ln_w - c.shape(k) * ln1p_l1, 0.0)))?;
        return Ok(s.scaled(rate.ln()));
    }
    let z = rate * gamma * l1 / (1.0 + l1);
    let ln_front = eps * rate.ln() + (eps - 1.0) * gamma.ln() - rate * gamma - lg_eps;
    let mut ladder = Hyp1f1Ladder::new(c.shape(0), eps, z, &series.policy)?;
    let s = sum_k_series(c, &series.policy, "pdf", |k, ln_w| {
        let (ln_f, rel) = ladder.at(k);
        Ok((ln_w - c.shape(k) * ln1p_l1 + ln_f, rel))
    })?;
    Ok(s.scaled(ln_front))
}

/// ∫_0^∞ weight(γ) f_γ(γ) dγ by adaptive quadrature on the half line.
/// A density evaluation failure anywhere aborts the integral with that error.
pub fn pdf_quadrature<W>(series: &PdfSeries, weight: W, rel_tol: f64) -> Result<EvalResult>
where
    W: Fn(f64) -> f64,
{
    let failure = std::cell::Cell::new(None);
    let f = |g: f64| match pdf(series, g) {
        Ok(r) => weight(g) * r.value,
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };
    let r = integrate_positive_axis(f, series.avg_snr(), QuadTol::rel(rel_tol))?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(EvalResult {
        value: r.value,
        abs_error_estimate: r.abs_error,
        terms_used: r.evaluations,
    })
}

/// Closed-form density of the sum of L i.i.d. squared κ-μ shadowed variables.
pub fn iid_pdf(kappa: f64, mu: f64, m: f64, branches: usize, avg_snr: f64, gamma: f64) -> Result<EvalResult> {
    if !(kappa > 0.0 && mu > 0.0 && m > 0.0 && branches > 0 && avg_snr > 0.0) {
        return Err(Error::InvalidParams("iid_pdf needs positive kappa, mu, m, L, avg_snr".into()));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::domain("iid_pdf", format!("gamma = {gamma} must be finite and nonnegative")));
    }
    let lf = branches as f64;
    let eps = lf * mu;
    let rate = lf * mu * (1.0 + kappa) / avg_snr;
    let ln_shadow = lf * m * (m / (m + kappa * mu)).ln();
    if gamma == 0.0 {
        let v = if eps > 1.0 {
            0.0
        } else if eps < 1.0 {
            f64::INFINITY
        } else {
            rate * ln_shadow.exp()
        };
        return Ok(EvalResult::exact(v));
    }
    let z = lf * kappa * mu * mu * (1.0 + kappa) * gamma / (avg_snr * (m + kappa * mu));
    let (ln_f, rel) = ln_hyp1f1_pos(lf * m, eps, z, &TruncationPolicy::default())?;
    let ln_v = eps * rate.ln() + ln_shadow + (eps - 1.0) * gamma.ln() - log_gamma(eps)? - rate * gamma + ln_f;
    let value = ln_v.exp();
    Ok(EvalResult {
        value,
        abs_error_estimate: value * rel,
        terms_used: 1,
    })
}

/// M_γ(s) = E[e^{−sγ}] for real s ≥ 0.
///
/// With u = sγ̄/η the ₂F₁(Lm+k, ε; ε; ·) of each term is a binomial, so term k
/// is A δ_k (1+u)^{−ε} (1 + λ₁u/(1+u))^{−(Lm+k)}.
pub fn mgf(series: &PdfSeries, s: f64) -> Result<EvalResult> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::domain("mgf", format!("s = {s} must be finite and nonnegative")));
    }
    let c = &series.coeffs;
    let u = s / series.rate();
    let ln_base = -(c.lambda1() * u / (1.0 + u)).ln_1p();
    let sum = sum_k_series(c, &series.policy, "mgf", |k, ln_w| Ok((ln_w + c.shape(k) * ln_base, 0.0)))?;
    Ok(sum.scaled(-c.epsilon() * u.ln_1p()))
}

/// M_γ(s) through the Meijer-G form of each term,
/// A (η/γ̄)^ε D̃_k Γ(ε)/Γ(Lm+k) (s+η/γ̄)^{−ε} G¹²₂₂(x | 1−Lm−k, 1−ε; 0, 1−ε),
/// x = η/(γ̄(1+1/λ₁)(s+η/γ̄)). Limited to shapes where Γ(Lm+k) is finite;
/// kept as an independent check on [`mgf`].
pub fn mgf_meijer(series: &PdfSeries, s: f64) -> Result<EvalResult> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::domain("mgf_meijer", format!("s = {s} must be finite and nonnegative")));
    }
    let c = &series.coeffs;
    let eps = c.epsilon();
    let rate = series.rate();
    let l1 = c.lambda1();
    let x = rate * l1 / ((1.0 + l1) * (s + rate));
    let ln_front = eps * (rate / (s + rate)).ln();
    let policy = series.policy;
    let sum = sum_k_series(c, &policy, "mgf_meijer", |k, ln_w| {
        let a = c.shape(k);
        let g = meijer_g1222(1.0 - a, 1.0 - eps, x, &policy)?;
        if !g.value.is_finite() {
            return Err(Error::NoConvergence {
                what: "mgf_meijer",
                terms: k,
                estimate: f64::INFINITY,
            });
        }
        // A D̃_k Γ(ε) = A δ_k (1+λ₁)^{−a}
        let ln_t = ln_w - a * l1.ln_1p() + g.value.ln() - log_gamma(a)?;
        Ok((ln_t, g.rel_error_estimate()))
    })?;
    Ok(sum.scaled(ln_front))
}

/// Σ_k A D̃_k Γ(ε) = Σ_k A δ_k (1+λ₁)^{−(Lm+k)}, the k-sum shared by the
/// asymptotic MGF and the asymptotic BER.
pub(crate) fn asymptotic_weight(series: &PdfSeries) -> Result<KSum> {
    let c = &series.coeffs;
    let ln1p_l1 = c.lambda1().ln_1p();
    sum_k_series(c, &series.policy, "asymptotic_weight", |k, ln_w| Ok((ln_w - c.shape(k) * ln1p_l1, 0.0)))
}

/// High-SNR asymptote A (η/γ̄)^ε Σ_k D̃_k Γ(ε) s^{−ε}.
pub fn mgf_asymptotic(series: &PdfSeries, s: f64) -> Result<EvalResult> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain("mgf_asymptotic", format!("s = {s} must be positive")));
    }
    let w = asymptotic_weight(series)?;
    Ok(w.scaled(series.coeffs.epsilon() * (series.rate() / s).ln()))
}

/// ε = Σ μ_l; independent of correlation and of m.
pub fn diversity_order(params: &ChannelParams) -> f64 {
    params.epsilon()
}
