//! Monte Carlo oracle built from the physical channel model.
//!
//! Each branch l carries μ_l clusters. Cluster i contributes
//! (W + ϑ_l a_i)² + (V + ϑ_l b_i)² with W, V ~ N(0, ½), a_i = √κ_l, b_i = 0,
//! so Σ_i a_i² = κ_l μ_l. The shadowing powers ϑ̃²_l = μ_lκ_l ϑ_l² are
//! correlated Gamma(m, μ_lκ_l/m) variables. With σ² = ½ the mean of
//! Y = Σ_l Σ_i (·) is η = Σ μ_l(1+κ_l), and γ = γ̄ Y / η.
//!
//! Randomness comes from ChaCha8 streams: trial chunk c of size
//! [`CHUNK`] uses stream c of the seeded generator, so batches are
//! bit-identical for every thread count.

use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::model::{eigenvalues_dc, ChannelParams};
use crate::par;
use crate::performance::{ConstellationFamily, ConstellationSpec};
use crate::specfun::q_function;
use crate::specfun::quad::gauss_legendre;
use crate::{Error, Result};

/// Trials per RNG stream.
pub const CHUNK: usize = 4096;

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn chunk_count(trials: usize) -> usize {
    trials.div_ceil(CHUNK)
}

fn chunk_len(trials: usize, chunk: usize) -> usize {
    CHUNK.min(trials - chunk * CHUNK)
}

fn degrees_of_freedom(m: f64) -> Result<usize> {
    let twice = 2.0 * m;
    if !(m > 0.0) || (twice - twice.round()).abs() > 1e-12 {
        return Err(Error::UnsupportedShape(m));
    }
    Ok(twice.round() as usize)
}

/// Symmetric square root of the matrix with entries √ρ_ij.
fn gaussian_mixing(corr: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let c = corr.map(f64::sqrt);
    let eig = c.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let root = eig.eigenvalues.map(f64::sqrt);
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&root) * q.transpose())
}

/// Draws one vector of correlated Gamma(m, scale_l) variables into `out`.
fn draw_shadowing(rng: &mut ChaCha8Rng, dof: usize, mixing: &DMatrix<f64>, scales: &[f64], z: &mut [f64], out: &mut [f64]) {
    let l = scales.len();
    out.iter_mut().for_each(|v| *v = 0.0);
    for _ in 0..dof {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        for (i, o) in out.iter_mut().enumerate() {
            let mut g = 0.0;
            for (j, zj) in z.iter().enumerate() {
                g += mixing[(i, j)] * zj;
            }
            *o += g * g;
        }
    }
    for i in 0..l {
        out[i] *= 0.5 * scales[i];
    }
}

/// Correlated Gamma draws with shape m (2m an integer) and the given scales,
/// returned as an L × trials matrix.
///
/// Each column is ϑ̃²_l = (scale_l / 2) Σ_{n=1}^{2m} G_{n,l}², where the
/// Gaussian vectors G_n have unit variances and correlations √ρ_ij; the
/// resulting Gamma variables have correlation ρ_ij.
pub fn sample_correlated_gamma(
    m: f64,
    scales: &[f64],
    corr: &DMatrix<f64>,
    trials: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let dof = degrees_of_freedom(m)?;
    let l = scales.len();
    if l == 0 || corr.nrows() != l || corr.ncols() != l {
        return Err(Error::InvalidParams("scales and correlation dimensions differ".into()));
    }
    if scales.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidParams("Gamma scales must be positive".into()));
    }
    let mixing = gaussian_mixing(corr)?;
    let chunks = par::map_indexed(chunk_count(trials), |c| {
        let mut rng = chunk_rng(seed, c);
        let n = chunk_len(trials, c);
        let mut z = vec![0.0; l];
        let mut col = vec![0.0; l];
        let mut data = Vec::with_capacity(n * l);
        for _ in 0..n {
            draw_shadowing(&mut rng, dof, &mixing, scales, &mut z, &mut col);
            data.extend_from_slice(&col);
        }
        data
    });
    Ok(DMatrix::from_vec(l, trials, chunks.concat()))
}

/// Monte Carlo draws of the MRC output SNR with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub snr_draws: Vec<f64>,
    pub seed: u64,
    pub params_fingerprint: u64,
    pub trials: usize,
    pub avg_snr: f64,
}

/// How the shadowing was drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// Branch-level correlated Gamma powers (2m integer).
    Physical,
    /// Z = Σ λ_l G_l with independent G_l ~ Gamma(m, 1); the law of the total
    /// shadowing power for any m > 0, used when 2m is not an integer.
    Spectral,
}

pub fn sampler_for(params: &ChannelParams) -> Sampler {
    if degrees_of_freedom(params.m()).is_ok() {
        Sampler::Physical
    } else {
        Sampler::Spectral
    }
}

fn cluster_counts(params: &ChannelParams) -> Result<Vec<usize>> {
    params
        .mu()
        .iter()
        .map(|&u| {
            if u >= 1.0 && u == u.round() {
                Ok(u as usize)
            } else {
                Err(Error::NonIntegerMu(u))
            }
        })
        .collect()
}

/// Draws `trials` MRC output SNRs from the physical model.
///
/// Requires integer μ_l. When 2m is an integer the shadowing powers are drawn
/// per branch; otherwise the total shadowing power is drawn from its spectral
/// form and all line-of-sight power is carried by one cluster, which leaves
/// the law of the combined SNR unchanged.
pub fn sample_mrc_snr(params: &ChannelParams, trials: usize, seed: u64) -> Result<SampleBatch> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be >= 1".into()));
    }
    let clusters = cluster_counts(params)?;
    let eta = params.eta();
    let scale = params.avg_snr() / eta;
    let kappa = params.kappa().to_vec();
    let mu = params.mu().to_vec();
    let draws = match sampler_for(params) {
        Sampler::Physical => {
            let dof = degrees_of_freedom(params.m())?;
            let mixing = gaussian_mixing(params.corr())?;
            let scales = params.shadow_scales();
            let l = params.branches();
            par::map_indexed(chunk_count(trials), |c| {
                let mut rng = chunk_rng(seed, c);
                let n = chunk_len(trials, c);
                let mut z = vec![0.0; l];
                let mut shadow = vec![0.0; l];
                let mut out = Vec::with_capacity(n);
                for _ in 0..n {
                    draw_shadowing(&mut rng, dof, &mixing, &scales, &mut z, &mut shadow);
                    let mut y = 0.0;
                    for b in 0..l {
                        let amp = (shadow[b] / (mu[b] * kappa[b])).sqrt() * kappa[b].sqrt();
                        for _ in 0..clusters[b] {
                            let w: f64 = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
                            let v: f64 = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
                            y += (w + amp).powi(2) + v * v;
                        }
                    }
                    out.push(y * scale);
                }
                out
            })
        }
        Sampler::Spectral => {
            let lambdas = eigenvalues_dc(params)?;
            let gamma = Gamma::new(params.m(), 1.0).map_err(|e| Error::InvalidParams(e.to_string()))?;
            let total_clusters: usize = clusters.iter().sum();
            par::map_indexed(chunk_count(trials), |c| {
                let mut rng = chunk_rng(seed, c);
                let n = chunk_len(trials, c);
                let mut out = Vec::with_capacity(n);
                for _ in 0..n {
                    let z: f64 = lambdas.iter().map(|l| l * gamma.sample(&mut rng)).sum();
                    let mut y = 0.0;
                    for i in 0..total_clusters {
                        let w: f64 = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
                        let v: f64 = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
                        let los = if i == 0 { z.sqrt() } else { 0.0 };
                        y += (w + los).powi(2) + v * v;
                    }
                    out.push(y * scale);
                }
                out
            })
        }
    };
    Ok(SampleBatch {
        snr_draws: draws.concat(),
        seed,
        params_fingerprint: params.fingerprint(),
        trials,
        avg_snr: params.avg_snr(),
    })
}

impl SampleBatch {
    /// The same realisations at another average SNR (γ scales linearly in γ̄).
    /// `params` must describe the batch's channel at the new SNR.
    pub fn rescaled(&self, params: &ChannelParams) -> Result<SampleBatch> {
        let original = params.with_avg_snr(self.avg_snr)?;
        if original.fingerprint() != self.params_fingerprint {
            return Err(Error::InvalidParams("batch was drawn for a different channel".into()));
        }
        let f = params.avg_snr() / self.avg_snr;
        Ok(SampleBatch {
            snr_draws: self.snr_draws.iter().map(|g| g * f).collect(),
            seed: self.seed,
            params_fingerprint: params.fingerprint(),
            trials: self.trials,
            avg_snr: params.avg_snr(),
        })
    }

    pub fn mean(&self) -> f64 {
        self.snr_draws.iter().sum::<f64>() / self.trials as f64
    }

    /// CSV export: provenance in `#` header lines, then one draw per row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# seed={}", self.seed)?;
        writeln!(w, "# params_fingerprint={:016x}", self.params_fingerprint)?;
        writeln!(w, "# trials={}", self.trials)?;
        writeln!(w, "# avg_snr={:e}", self.avg_snr)?;
        writeln!(w, "gamma")?;
        for g in &self.snr_draws {
            writeln!(w, "{g:e}")?;
        }
        Ok(())
    }
}

/// Error-rate estimate with a 95% normal-approximation confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub half_width: f64,
    pub errors: u64,
    pub trials: usize,
    /// Smallest nonzero rate the batch can resolve, 1/trials. A zero estimate
    /// means the true rate is likely below a few times this floor.
    pub resolution: f64,
}

impl McEstimate {
    fn from_counts(errors: u64, trials: usize) -> Self {
        let n = trials as f64;
        let p = errors as f64 / n;
        McEstimate {
            value: p,
            half_width: 1.96 * (p * (1.0 - p) / n).sqrt(),
            errors,
            trials,
            resolution: 1.0 / n,
        }
    }
}

/// Exact conditional symbol error probability of coherent detection at SNR γ.
pub fn conditional_ser(constellation: &ConstellationSpec, gamma: f64) -> f64 {
    let m = constellation.order as f64;
    match constellation.family {
        ConstellationFamily::Mpsk => match constellation.order {
            2 => q_function((2.0 * gamma).sqrt()),
            4 => {
                let q = q_function(gamma.sqrt());
                2.0 * q - q * q
            }
            _ => psk_craig(m, gamma),
        },
        ConstellationFamily::Mqam => {
            let q = 2.0 * (1.0 - 1.0 / m.sqrt()) * q_function((3.0 * gamma / (m - 1.0)).sqrt());
            2.0 * q - q * q
        }
    }
}

/// (1/π) ∫_0^{(M−1)π/M} exp(−γ sin²(π/M)/sin²θ) dθ by 64-point Gauss–Legendre.
fn psk_craig(m: f64, gamma: f64) -> f64 {
    thread_local! {
        static RULE: (Vec<f64>, Vec<f64>) = gauss_legendre(64);
    }
    let upper = (m - 1.0) * std::f64::consts::PI / m;
    let g = (std::f64::consts::PI / m).sin().powi(2);
    RULE.with(|(x, w)| {
        let half = 0.5 * upper;
        let s: f64 = x
            .iter()
            .zip(w)
            .map(|(x, w)| {
                let t = half * (1.0 + x);
                w * (-gamma * g / t.sin().powi(2)).exp()
            })
            .sum();
        s * half / std::f64::consts::PI
    })
}

fn bernoulli_count<P>(batch: &SampleBatch, seed: u64, prob: P) -> Result<McEstimate>
where
    P: Fn(f64) -> f64 + Sync + Send,
{
    if batch.snr_draws.is_empty() {
        return Err(Error::InvalidParams("empty sample batch".into()));
    }
    let trials = batch.snr_draws.len();
    let counts = par::map_indexed(chunk_count(trials), |c| {
        let mut rng = chunk_rng(seed, c);
        let start = c * CHUNK;
        let n = chunk_len(trials, c);
        batch.snr_draws[start..start + n]
            .iter()
            .filter(|&&g| rng.random::<f64>() < prob(g))
            .count() as u64
    });
    Ok(McEstimate::from_counts(counts.iter().sum(), trials))
}

/// Symbol error rate: each trial is an error with its exact conditional
/// probability at that trial's SNR (Bernoulli thinning, no waveform).
pub fn estimate_ser(batch: &SampleBatch, constellation: &ConstellationSpec, seed: u64) -> Result<McEstimate> {
    bernoulli_count(batch, seed, |g| conditional_ser(constellation, g))
}

/// Bit error rate under the same Gray-mapped approximation
/// ζ Σ_p Q(a_p √γ) the analytic BER uses, by Bernoulli thinning.
pub fn estimate_ber(batch: &SampleBatch, constellation: &ConstellationSpec, seed: u64) -> Result<McEstimate> {
    bernoulli_count(batch, seed, |g| constellation.conditional_error(g).min(1.0))
}

/// Density histogram with binomial standard errors per bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub stderr: Vec<f64>,
    pub counts: Vec<u64>,
    pub trials: usize,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    /// Σ density · width; at most 1, equal to the fraction of draws in range.
    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width()
    }
}

/// Density-normalised histogram of the batch over `range` (half-open bins,
/// the last bin closed).
pub fn estimate_pdf(batch: &SampleBatch, bins: usize, range: (f64, f64)) -> Result<Histogram> {
    estimate_density(&batch.snr_draws, bins, range)
}

/// [`estimate_pdf`] on raw draws.
pub fn estimate_density(draws: &[f64], bins: usize, range: (f64, f64)) -> Result<Histogram> {
    let (lo, hi) = range;
    if bins < 10 {
        return Err(Error::EmptyRange(format!("need at least 10 bins, got {bins}")));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::EmptyRange(format!("range ({lo}, {hi}) is empty or not finite")));
    }
    if draws.is_empty() {
        return Err(Error::EmptyRange("no draws".into()));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &g in draws {
        if g < lo || g > hi {
            continue;
        }
        let i = (((g - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let n = draws.len() as f64;
    let density = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    let stderr = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            (p * (1.0 - p) / n).sqrt() / width
        })
        .collect();
    Ok(Histogram {
        edges: (0..=bins).map(|i| lo + width * i as f64).collect(),
        density,
        stderr,
        counts,
        trials: draws.len(),
    })
}
