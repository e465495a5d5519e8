#![allow(dead_code)]

use kmshadow_core::{ChannelParams, PdfSeries, TruncationPolicy};

/// (κ, μ, m, ρ, branch counts) of the six reference parameter sets.
pub const FIGURE_SETS: [(f64, f64, f64, f64, &[usize]); 6] = [
    (2.0, 2.0, 2.0, 0.7, &[2]),
    (5.0, 2.0, 2.0, 0.5, &[2, 3, 4, 5]),
    (10.0, 1.0, 3.0, 0.1, &[2, 3, 4]),
    (2.0, 2.0, 2.1, 0.2, &[2, 3, 4, 5, 6]),
    (5.0, 2.0, 2.5, 0.1, &[3]),
    (2.0, 2.0, 1.2, 0.5, &[2, 3]),
];

/// Every (κ, μ, m, ρ, L) curve of the reference sets, plus the m sweep of the first.
pub fn figure_curves() -> Vec<(f64, f64, f64, f64, usize)> {
    let mut out = Vec::new();
    for (k, u, m, rho, ls) in FIGURE_SETS {
        for &l in ls {
            out.push((k, u, m, rho, l));
        }
    }
    out.push((2.0, 2.0, 4.0, 0.7, 2));
    out.push((2.0, 2.0, 6.0, 0.7, 2));
    out
}

pub fn params(l: usize, kappa: f64, mu: f64, m: f64, snr: f64, rho: f64) -> ChannelParams {
    ChannelParams::exponential(l, kappa, mu, m, snr, rho).unwrap()
}

pub fn series(l: usize, kappa: f64, mu: f64, m: f64, snr: f64, rho: f64) -> PdfSeries {
    PdfSeries::new(&params(l, kappa, mu, m, snr, rho), TruncationPolicy::default()).unwrap()
}

pub fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}
