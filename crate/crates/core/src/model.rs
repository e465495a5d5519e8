//! Channel parameters, the eigenvalues of **DC** and the δ_k recursion.
//!
//! The combined shadowing power Z = Σ ϑ̃²_l of L correlated Gamma variables
//! (shape m, scale μ_lκ_l/m) has the density
//!
//! f_Z(z) = A Σ_k δ_k z^{Lm+k−1} e^{−z/λ₁} / (λ₁^{Lm+k} Γ(Lm+k)),
//!
//! a Gamma mixture with weights A·δ_k that sum to one. Every series in the
//! crate is a sum over this mixture index k.

use std::sync::{Arc, RwLock};

use nalgebra::DMatrix;

use crate::specfun::log_gamma;
use crate::{Error, Result};

pub use crate::specfun::TruncationPolicy;

/// Full model input: per-branch κ_l, μ_l, shared m, average SNR γ̄ (linear)
/// and the shadowing correlation matrix ρ_ij.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    kappa: Vec<f64>,
    mu: Vec<f64>,
    m: f64,
    avg_snr: f64,
    corr: DMatrix<f64>,
}

impl ChannelParams {
    pub fn new(kappa: Vec<f64>, mu: Vec<f64>, m: f64, avg_snr: f64, corr: DMatrix<f64>) -> Result<Self> {
        let l = kappa.len();
        if l == 0 {
            return Err(Error::InvalidParams("at least one branch is required".into()));
        }
        if mu.len() != l || corr.nrows() != l || corr.ncols() != l {
            return Err(Error::InvalidParams(format!(
                "dimension mismatch: {} kappas, {} mus, {}x{} correlation",
                l,
                mu.len(),
                corr.nrows(),
                corr.ncols()
            )));
        }
        if let Some(k) = kappa.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return Err(Error::InvalidParams(format!("kappa must be positive, got {k}")));
        }
        if let Some(u) = mu.iter().find(|u| !(**u > 0.0 && u.is_finite())) {
            return Err(Error::InvalidParams(format!("mu must be positive, got {u}")));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParams(format!("m must be positive, got {m}")));
        }
        if !(avg_snr > 0.0 && avg_snr.is_finite()) {
            return Err(Error::InvalidParams(format!("average SNR must be positive, got {avg_snr}")));
        }
        for i in 0..l {
            if corr[(i, i)] != 1.0 {
                return Err(Error::InvalidParams(format!("corr[{i}][{i}] = {} must be 1", corr[(i, i)])));
            }
            for j in 0..l {
                let r = corr[(i, j)];
                if !(0.0..=1.0).contains(&r) {
                    return Err(Error::InvalidParams(format!("corr[{i}][{j}] = {r} outside [0, 1]")));
                }
                if (r - corr[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidParams(format!("corr is not symmetric at ({i}, {j})")));
                }
            }
        }
        let params = ChannelParams {
            kappa,
            mu,
            m,
            avg_snr,
            corr,
        };
        if params.sqrt_corr().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(params)
    }

    /// Identical branches with exponential correlation ρ_ij = ρ^{|i−j|}.
    pub fn exponential(branches: usize, kappa: f64, mu: f64, m: f64, avg_snr: f64, rho: f64) -> Result<Self> {
        Self::new(
            vec![kappa; branches],
            vec![mu; branches],
            m,
            avg_snr,
            exponential_correlation(branches, rho),
        )
    }

    pub fn branches(&self) -> usize {
        self.kappa.len()
    }
    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn avg_snr(&self) -> f64 {
        self.avg_snr
    }
    pub fn corr(&self) -> &DMatrix<f64> {
        &self.corr
    }

    /// Same channel at a different average SNR.
    pub fn with_avg_snr(&self, avg_snr: f64) -> Result<Self> {
        if !(avg_snr > 0.0 && avg_snr.is_finite()) {
            return Err(Error::InvalidParams(format!("average SNR must be positive, got {avg_snr}")));
        }
        Ok(ChannelParams {
            avg_snr,
            ..self.clone()
        })
    }

    /// ε = Σ μ_l.
    pub fn epsilon(&self) -> f64 {
        self.mu.iter().sum()
    }

    /// η = Σ μ_l (1 + κ_l), the mean of the unnormalised MRC power Y.
    pub fn eta(&self) -> f64 {
        self.mu.iter().zip(&self.kappa).map(|(u, k)| u * (1.0 + k)).sum()
    }

    /// Gamma scales μ_lκ_l/m of the shadowing powers (diagonal of **D**).
    pub fn shadow_scales(&self) -> Vec<f64> {
        self.kappa.iter().zip(&self.mu).map(|(k, u)| k * u / self.m).collect()
    }

    /// **C**: entrywise square root of the correlation matrix.
    pub fn sqrt_corr(&self) -> DMatrix<f64> {
        self.corr.map(f64::sqrt)
    }

    /// Stable 64-bit FNV-1a digest of every parameter bit pattern.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: f64| {
            for b in x.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.branches() as f64);
        self.kappa.iter().for_each(|&x| eat(x));
        self.mu.iter().for_each(|&x| eat(x));
        eat(self.m);
        eat(self.avg_snr);
        self.corr.iter().for_each(|&x| eat(x));
        h
    }
}

/// ρ_ij = ρ^{|i−j|}.
pub fn exponential_correlation(branches: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(branches, branches, |i, j| rho.powi(i.abs_diff(j) as i32))
}

/// Eigenvalues of **DC**, computed on the similar symmetric matrix
/// D^{1/2} C D^{1/2} and returned in ascending order.
pub fn eigenvalues_dc(params: &ChannelParams) -> Result<Vec<f64>> {
    let c = params.sqrt_corr();
    if c.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let d: Vec<f64> = params.shadow_scales().iter().map(|x| x.sqrt()).collect();
    let l = params.branches();
    let sym = DMatrix::from_fn(l, l, |i, j| d[i] * c[(i, j)] * d[j]);
    let mut lambdas: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    lambdas.sort_by(|a, b| a.total_cmp(b));
    if !(lambdas[0] > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(lambdas)
}

#[derive(Debug, Default)]
struct DeltaMemo {
    /// p_i = Σ_j (1 − λ₁/λ_j)^i for i ≥ 1 (index 0 unused).
    power_sums: Vec<f64>,
    delta: Vec<f64>,
}

/// Everything the power series need: λ_l, λ₁, A, ε, η and the δ_k sequence,
/// which is extended on demand and memoised behind a lock.
#[derive(Debug)]
pub struct SeriesCoefficients {
    lambdas: Vec<f64>,
    lambda1: f64,
    ln_a: f64,
    epsilon: f64,
    eta: f64,
    m: f64,
    branches: usize,
    avg_snr: f64,
    ratios: Vec<f64>,
    memo: RwLock<DeltaMemo>,
}

impl Clone for SeriesCoefficients {
    fn clone(&self) -> Self {
        let memo = self.memo.read().unwrap_or_else(|e| e.into_inner());
        SeriesCoefficients {
            lambdas: self.lambdas.clone(),
            lambda1: self.lambda1,
            ln_a: self.ln_a,
            epsilon: self.epsilon,
            eta: self.eta,
            m: self.m,
            branches: self.branches,
            avg_snr: self.avg_snr,
            ratios: self.ratios.clone(),
            memo: RwLock::new(DeltaMemo {
                power_sums: memo.power_sums.clone(),
                delta: memo.delta.clone(),
            }),
        }
    }
}

/// Populates [`SeriesCoefficients`] from validated parameters.
pub fn assemble(params: &ChannelParams) -> Result<SeriesCoefficients> {
    let lambdas = eigenvalues_dc(params)?;
    SeriesCoefficients::from_eigenvalues(
        lambdas,
        params.m(),
        params.epsilon(),
        params.eta(),
        params.avg_snr(),
    )
}

/// δ₀ … δ_{upto_k}.
pub fn delta_coefficients(coeffs: &SeriesCoefficients, upto_k: usize) -> Vec<f64> {
    coeffs.deltas(upto_k + 1).to_vec()
}

impl SeriesCoefficients {
    /// Builds the coefficients from a spectrum directly; used by
    /// [`assemble`] and by tests that need a hand-picked spectrum.
    pub fn from_eigenvalues(mut lambdas: Vec<f64>, m: f64, epsilon: f64, eta: f64, avg_snr: f64) -> Result<Self> {
        if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidParams("eigenvalues must be positive and finite".into()));
        }
        if !(m > 0.0 && epsilon > 0.0 && eta > 0.0 && avg_snr > 0.0) {
            return Err(Error::InvalidParams("m, epsilon, eta and avg_snr must be positive".into()));
        }
        lambdas.sort_by(|a, b| a.total_cmp(b));
        let lambda1 = lambdas[0];
        let ratios: Vec<f64> = lambdas.iter().map(|l| 1.0 - lambda1 / l).collect();
        let ln_a = m * lambdas.iter().map(|l| (lambda1 / l).ln()).sum::<f64>();
        Ok(SeriesCoefficients {
            branches: lambdas.len(),
            lambdas,
            lambda1,
            ln_a,
            epsilon,
            eta,
            m,
            avg_snr,
            ratios,
            memo: RwLock::new(DeltaMemo {
                power_sums: vec![0.0],
                delta: vec![1.0],
            }),
        })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }
    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }
    /// A = Π (λ₁/λ_l)^m.
    pub fn a(&self) -> f64 {
        self.ln_a.exp()
    }
    pub fn ln_a(&self) -> f64 {
        self.ln_a
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn branches(&self) -> usize {
        self.branches
    }
    pub fn avg_snr(&self) -> f64 {
        self.avg_snr
    }

    /// Same spectrum at another average SNR, sharing the δ_k computed so far.
    pub fn with_avg_snr(&self, avg_snr: f64) -> Result<Self> {
        if !(avg_snr > 0.0 && avg_snr.is_finite()) {
            return Err(Error::InvalidParams(format!("average SNR must be positive, got {avg_snr}")));
        }
        let mut c = self.clone();
        c.avg_snr = avg_snr;
        Ok(c)
    }

    /// Gamma shape of mixture component k: Lm + k.
    pub fn shape(&self, k: usize) -> f64 {
        self.branches as f64 * self.m + k as f64
    }

    /// Largest 1 − λ₁/λ_j; the δ_k decay roughly like this ratio to the k.
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }

    /// First `count` δ_k (extending the memo if needed).
    pub fn deltas(&self, count: usize) -> Arc<[f64]> {
        {
            let memo = self.memo.read().unwrap_or_else(|e| e.into_inner());
            if memo.delta.len() >= count {
                return Arc::from(&memo.delta[..count]);
            }
        }
        let mut memo = self.memo.write().unwrap_or_else(|e| e.into_inner());
        while memo.power_sums.len() < count {
            let i = memo.power_sums.len() as i32;
            let p = self.ratios.iter().map(|x| x.powi(i)).sum();
            memo.power_sums.push(p);
        }
        while memo.delta.len() < count {
            let next = memo.delta.len();
            let acc: f64 = (1..=next)
                .map(|i| memo.power_sums[i] * memo.delta[next - i])
                .sum();
            let v = self.m / next as f64 * acc;
            memo.delta.push(v);
        }
        Arc::from(&memo.delta[..count])
    }

    pub fn delta(&self, k: usize) -> f64 {
        self.deltas(k + 1)[k]
    }

    /// ln of the mixture weight A·δ_k (−∞ when δ_k = 0).
    pub fn ln_weight(&self, k: usize) -> f64 {
        self.ln_a + self.delta(k).ln()
    }

    /// ln D̃_k = ln δ_k − ln Γ(ε) − (Lm + k) ln(1 + λ₁).
    pub fn ln_d_tilde(&self, k: usize) -> f64 {
        let lg = log_gamma(self.epsilon).unwrap_or(f64::NAN);
        self.delta(k).ln() - lg - self.shape(k) * self.lambda1.ln_1p()
    }

    /// Density of the combined shadowing power Z, summed until the
    /// remaining mixture weight is below `policy.rel_tol`.
    pub fn shadowing_pdf(&self, z: f64, policy: &TruncationPolicy) -> Result<f64> {
        if z < 0.0 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        let mut mass = 0.0;
        let deltas = self.deltas(policy.max_k);
        for (k, &d) in deltas.iter().enumerate() {
            let w = self.a() * d;
            mass += w;
            if w > 0.0 {
                let a = self.shape(k);
                let ln = w.ln() + (a - 1.0) * z.ln() - z / self.lambda1 - a * self.lambda1.ln() - log_gamma(a)?;
                total += if z == 0.0 {
                    if a < 1.0 {
                        f64::INFINITY
                    } else if a == 1.0 {
                        w / self.lambda1
                    } else {
                        0.0
                    }
                } else {
                    ln.exp()
                };
            }
            if 1.0 - mass < policy.rel_tol {
                return Ok(total);
            }
        }
        Err(Error::NoConvergence {
            what: "shadowing_pdf",
            terms: policy.max_k,
            estimate: 1.0 - mass,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1_pair() -> ChannelParams {
        ChannelParams::exponential(2, 2.0, 2.0, 2.0, 1.0, 0.7).unwrap()
    }

    #[test]
    fn two_branch_eigenvalues_and_first_delta() {
        let c = assemble(&fig1_pair()).unwrap();
        let s = 0.7f64.sqrt();
        let (lo, hi) = (2.0 * (1.0 - s), 2.0 * (1.0 + s));
        assert!((c.lambdas()[0] - lo).abs() < 1e-12);
        assert!((c.lambdas()[1] - hi).abs() < 1e-12);
        let d1 = 2.0 * (1.0 - lo / hi);
        assert!((c.delta(1) - d1).abs() < 1e-12);
        assert!((c.delta(1) - 1.8221).abs() < 1e-4);
        assert!((c.a() - (lo / hi).powi(2)).abs() < 1e-15);
        assert!((c.a() - 0.00791).abs() < 1e-5);
        assert_eq!(c.delta(0), 1.0);
    }

    #[test]
    fn equal_eigenvalues_give_single_term() {
        let p = ChannelParams::exponential(3, 2.0, 2.0, 2.0, 1.0, 0.0).unwrap();
        let c = assemble(&p).unwrap();
        assert!(c.lambdas().iter().all(|l| (l - 2.0).abs() < 1e-14));
        assert_eq!(c.a(), 1.0);
        assert!(delta_coefficients(&c, 50)[1..].iter().all(|&d| d == 0.0));
        assert_eq!(c.epsilon(), 6.0);
        assert_eq!(c.eta(), 18.0);
    }

    #[test]
    fn determinant_identity_and_permutation_invariance() {
        let corr = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.1, 0.3, 1.0, 0.6, 0.1, 0.6, 1.0]);
        let p = ChannelParams::new(vec![1.0, 2.0, 5.0], vec![1.0, 2.0, 3.0], 1.7, 1.0, corr.clone()).unwrap();
        let lam = eigenvalues_dc(&p).unwrap();
        let det_d: f64 = p.shadow_scales().iter().product();
        let det_c = p.sqrt_corr().determinant();
        let prod: f64 = lam.iter().product();
        assert!((prod / (det_d * det_c) - 1.0).abs() < 1e-10);

        let perm = [2usize, 0, 1];
        let corr_p = DMatrix::from_fn(3, 3, |i, j| corr[(perm[i], perm[j])]);
        let q = ChannelParams::new(vec![5.0, 1.0, 2.0], vec![3.0, 1.0, 2.0], 1.7, 1.0, corr_p).unwrap();
        let lam_q = eigenvalues_dc(&q).unwrap();
        for (a, b) in lam.iter().zip(&lam_q) {
            assert!((a - b).abs() < 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn deltas_are_prefix_stable_and_nonnegative() {
        let c = assemble(&ChannelParams::exponential(4, 5.0, 2.0, 2.5, 1.0, 0.8).unwrap()).unwrap();
        let short = delta_coefficients(&c, 10);
        let long = delta_coefficients(&c, 300);
        assert_eq!(&short[..], &long[..11]);
        assert!(long.iter().all(|&d| d >= 0.0));
        let fresh = assemble(&ChannelParams::exponential(4, 5.0, 2.0, 2.5, 1.0, 0.8).unwrap()).unwrap();
        assert_eq!(delta_coefficients(&fresh, 300), long);
    }

    #[test]
    fn mixture_weights_sum_to_one() {
        let c = assemble(&ChannelParams::exponential(3, 2.0, 2.0, 1.2, 1.0, 0.5).unwrap()).unwrap();
        let total: f64 = delta_coefficients(&c, 2000).iter().map(|d| c.a() * d).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(c.a() > 0.0 && c.a() < 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ChannelParams::exponential(2, 2.0, 2.0, 2.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::exponential(2, -1.0, 2.0, 2.0, 1.0, 0.5).is_err());
        assert!(ChannelParams::exponential(2, 1.0, 2.0, 0.0, 1.0, 0.5).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.3, 1.0]);
        assert!(ChannelParams::new(vec![1.0; 2], vec![1.0; 2], 1.0, 1.0, asym).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, -0.2, -0.2, 1.0]);
        assert!(ChannelParams::new(vec![1.0; 2], vec![1.0; 2], 1.0, 1.0, neg).is_err());
        // pairwise valid but jointly indefinite square-root matrix
        let bad = DMatrix::from_row_slice(3, 3, &[1.0, 0.99, 0.0, 0.99, 1.0, 0.99, 0.0, 0.99, 1.0]);
        assert!(matches!(
            ChannelParams::new(vec![1.0; 3], vec![1.0; 3], 1.0, 1.0, bad),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn fingerprint_tracks_every_field() {
        let a = fig1_pair();
        assert_eq!(a.fingerprint(), fig1_pair().fingerprint());
        assert_ne!(a.fingerprint(), a.with_avg_snr(2.0).unwrap().fingerprint());
    }
}
