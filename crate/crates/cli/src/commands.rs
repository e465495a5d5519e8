//! The table-producing commands behind each subcommand.

use kmshadow_core::analytic::{iid_pdf, mgf, pdf, pdf_quadrature};
use kmshadow_core::montecarlo::{estimate_ber, estimate_density, estimate_ser, sample_mrc_snr, McEstimate};
use kmshadow_core::performance::{
    ber, ber_asymptotic, capacity, capacity_quadrature, hyp1f1_kummer_finite, ser_mpsk, ser_mpsk_asymptotic,
};
use kmshadow_core::specfun::quad::gauss_legendre;
use kmshadow_core::specfun::{capacity_kernel, exp_e1, hyp1f1};
use kmshadow_core::{par, ChannelParams, ConstellationSpec, PdfSeries, SampleBatch, TruncationPolicy};

use crate::config::{constellation_label, db_to_linear, RunConfig};
use crate::table::{Cell, Table};
use crate::{CliError, Command};

/// Gauss–Legendre points per histogram bin for the bin-averaged density.
const BIN_QUADRATURE_POINTS: usize = 8;

pub fn run(config: &RunConfig) -> Result<Table, CliError> {
    match config.command {
        Command::Pdf => cmd_pdf(config),
        Command::Ser => cmd_ser(config),
        Command::Ber => cmd_ber(config),
        Command::Capacity => cmd_capacity(config),
    }
}

fn describe(config: &RunConfig, table: &mut Table) {
    let p = &config.params;
    table.comment(format!("kmshadow {}", config.command.name()));
    table.comment(format!(
        "kappa={} mu={} m={} L={} rho={} correlation=exponential",
        p.kappa()[0],
        p.mu()[0],
        p.m(),
        p.branches(),
        config.rho
    ));
    if let Some(c) = &config.constellation {
        table.comment(format!("constellation={}", constellation_label(c)));
    }
    if let Some(preset) = config.preset {
        let values: Vec<String> = preset.sweep.values.iter().map(|v| v.to_string()).collect();
        table.comment(format!(
            "preset={} curves: {} in [{}]",
            preset.name,
            preset.sweep.parameter,
            values.join(", ")
        ));
        let g = preset.snr_db;
        table.comment(format!(
            "preset snr grid {}:{}:{} dB is a reconstruction; the figure does not state its grid",
            g.start, g.stop, g.step
        ));
    }
    table.comment(format!(
        "rel_tol={:e} max_k={} max_j={}",
        config.policy.rel_tol, config.policy.max_k, config.policy.max_j
    ));
}

fn describe_mc(config: &RunConfig, table: &mut Table) {
    table.comment(format!("trials={} seed={}", config.trials, config.seed));
}

/// Per-point seed for the Bernoulli stage, distinct from the sampling seed.
fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Quantile of sorted data by nearest rank.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let i = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[i]
}

/// Mean of `f` over [lo, hi] by Gauss–Legendre.
fn bin_average<F>(lo: f64, hi: f64, rule: &(Vec<f64>, Vec<f64>), f: F) -> Result<f64, CliError>
where
    F: Fn(f64) -> Result<f64, CliError>,
{
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let mut acc = 0.0;
    for (x, w) in rule.0.iter().zip(&rule.1) {
        acc += w * f(mid + half * x)?;
    }
    Ok(0.5 * acc)
}

/// Histogram of the MRC output SNR over its central 99% against the
/// analytic density averaged over each bin.
pub fn cmd_pdf(config: &RunConfig) -> Result<Table, CliError> {
    let params = &config.params;
    let series = PdfSeries::new(params, config.policy)?;
    let batch = sample_mrc_snr(params, config.trials, config.seed)?;
    let mut sorted = batch.snr_draws.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    let range = (quantile(&sorted, 0.005), quantile(&sorted, 0.995));
    drop(sorted);
    let hist = estimate_density(&batch.snr_draws, config.bins, range)?;

    let rule = gauss_legendre(BIN_QUADRATURE_POINTS);
    let edges = &hist.edges;
    let analytic: Vec<f64> = par::map_indexed(config.bins, |i| {
        bin_average(edges[i], edges[i + 1], &rule, |g| Ok(pdf(&series, g)?.value))
    })
    .into_iter()
    .collect::<Result<_, _>>()?;
    let iid: Option<Vec<f64>> = if config.iid {
        let (k, u, m, l, snr) = (params.kappa()[0], params.mu()[0], params.m(), params.branches(), params.avg_snr());
        let v = par::map_indexed(config.bins, |i| {
            bin_average(edges[i], edges[i + 1], &rule, |g| Ok(iid_pdf(k, u, m, l, snr, g)?.value))
        });
        Some(v.into_iter().collect::<Result<_, _>>()?)
    } else {
        None
    };

    let mut columns = vec!["gamma", "analytic_pdf", "mc_density", "mc_stderr"];
    if iid.is_some() {
        columns.push("iid_pdf");
    }
    let mut table = Table::new(&columns);
    describe(config, &mut table);
    describe_mc(config, &mut table);
    table.comment(format!(
        "avg_snr={} dB bins={} range=[{:.6e}, {:.6e}] (central 99% of draws); analytic columns are bin averages",
        config.snr_grid_db[0], config.bins, range.0, range.1
    ));
    let centers = hist.centers();
    for i in 0..config.bins {
        let mut row = vec![centers[i], analytic[i], hist.density[i], hist.stderr[i]];
        if let Some(iid) = &iid {
            row.push(iid[i]);
        }
        table.push_numbers(&row);
    }
    Ok(table)
}

struct ErrorRateRow {
    analytic: f64,
    asymptotic: f64,
}

/// Evaluates the analytic columns per grid point in parallel and the Monte
/// Carlo column sequentially on one batch rescaled to each SNR.
fn error_rate_table<A, M>(config: &RunConfig, columns: &[&str], analytic: A, simulate: M) -> Result<Table, CliError>
where
    A: Fn(&PdfSeries) -> Result<ErrorRateRow, CliError> + Sync + Send,
    M: Fn(&SampleBatch, u64) -> Result<McEstimate, CliError>,
{
    let base = PdfSeries::new(&config.params, config.policy)?;
    let rows: Vec<Result<ErrorRateRow, CliError>> = par::map_slice(&config.snr_grid_db, |&db| {
        let series = base.with_avg_snr(db_to_linear(db))?;
        analytic(&series)
    });
    let batch = sample_mrc_snr(&config.params, config.trials, config.seed)?;

    let mut table = Table::new(columns);
    describe(config, &mut table);
    describe_mc(config, &mut table);
    for (i, (&db, row)) in config.snr_grid_db.iter().zip(rows).enumerate() {
        let row = row?;
        let at: ChannelParams = config.params.with_avg_snr(db_to_linear(db))?;
        let mc = simulate(&batch.rescaled(&at)?, point_seed(config.seed, i))?;
        table.push_numbers(&[db, row.analytic, row.asymptotic, mc.value, mc.half_width]);
    }
    Ok(table)
}

fn constellation(config: &RunConfig) -> Result<&ConstellationSpec, CliError> {
    config
        .constellation
        .as_ref()
        .ok_or_else(|| CliError::Validation("this command needs a constellation".into()))
}

/// M-PSK symbol error rate: MGF approximation, its high-SNR asymptote, and
/// a Monte Carlo estimate with the exact conditional error probability.
pub fn cmd_ser(config: &RunConfig) -> Result<Table, CliError> {
    let c = constellation(config)?;
    if c.family != kmshadow_core::ConstellationFamily::Mpsk {
        return Err(CliError::Validation("ser needs an M-PSK constellation".into()));
    }
    let order = c.order;
    error_rate_table(
        config,
        &["snr_db", "analytic_ser", "asymptotic_ser", "mc_ser", "mc_halfwidth"],
        |s| {
            Ok(ErrorRateRow {
                analytic: ser_mpsk(s, order)?.value,
                asymptotic: ser_mpsk_asymptotic(s, order)?.value,
            })
        },
        |batch, seed| Ok(estimate_ser(batch, c, seed)?),
    )
}

pub fn cmd_ber(config: &RunConfig) -> Result<Table, CliError> {
    let c = constellation(config)?;
    error_rate_table(
        config,
        &["snr_db", "analytic_ber", "asymptotic_ber", "mc_ber", "mc_halfwidth"],
        |s| {
            Ok(ErrorRateRow {
                analytic: ber(s, c)?.value,
                asymptotic: ber_asymptotic(s, c)?.value,
            })
        },
        |batch, seed| Ok(estimate_ber(batch, c, seed)?),
    )
}

/// Ergodic capacity in bit/s/Hz by the double series and by quadrature.
pub fn cmd_capacity(config: &RunConfig) -> Result<Table, CliError> {
    let base = PdfSeries::new(&config.params, config.policy)?;
    let rows: Vec<Result<(f64, f64), CliError>> = par::map_slice(&config.snr_grid_db, |&db| {
        let s = base.with_avg_snr(db_to_linear(db))?;
        Ok((capacity(&s)?.value, capacity_quadrature(&s)?.value))
    });
    let mut table = Table::new(&["snr_db", "capacity_series", "capacity_quadrature"]);
    describe(config, &mut table);
    for (&db, row) in config.snr_grid_db.iter().zip(rows) {
        let (series, quad) = row?;
        table.push_numbers(&[db, series, quad]);
    }
    Ok(table)
}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

/// Fast internal consistency checks. Returns the report and whether all passed.
pub fn cmd_selftest(policy: TruncationPolicy) -> Result<(Table, bool), CliError> {
    let mut checks = Vec::new();

    let fig1 = PdfSeries::new(&ChannelParams::exponential(2, 2.0, 2.0, 2.0, 1.0, 0.7)?, policy)?;
    let mass = pdf_quadrature(&fig1, |_| 1.0, 1e-10)?.value;
    checks.push(Check { name: "pdf integrates to one", value: (mass - 1.0).abs(), tolerance: 1e-6 });
    checks.push(Check { name: "mgf at zero is one", value: (mgf(&fig1, 0.0)?.value - 1.0).abs(), tolerance: 1e-8 });

    let iid = PdfSeries::new(&ChannelParams::exponential(3, 2.0, 2.0, 4.0, 1.0, 0.0)?, policy)?;
    let worst = [0.05, 0.5, 1.0, 3.0]
        .iter()
        .map(|&g| {
            let a = pdf(&iid, g)?.value;
            let b = iid_pdf(2.0, 2.0, 4.0, 3, 1.0, g)?.value;
            Ok((a / b - 1.0).abs())
        })
        .collect::<Result<Vec<f64>, CliError>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check { name: "independent branches match closed form", value: worst, tolerance: 1e-9 });

    let fig6 = PdfSeries::new(&ChannelParams::exponential(2, 2.0, 2.0, 1.2, 10.0, 0.5)?, policy)?;
    let (c1, c2) = (capacity(&fig6)?.value, capacity_quadrature(&fig6)?.value);
    checks.push(Check { name: "capacity series matches quadrature", value: (c1 / c2 - 1.0).abs(), tolerance: 1e-4 });

    let kernel = capacity_kernel(1.0, 1.0)?.value;
    let expected = std::f64::consts::E * exp_e1(1.0)?;
    checks.push(Check { name: "capacity kernel at (1, 1)", value: (kernel / expected - 1.0).abs(), tolerance: 1e-10 });

    let finite = hyp1f1_kummer_finite(5.5, 2.5, 3.0)?.value;
    let series = hyp1f1(5.5, 2.5, 3.0, &policy)?.value;
    checks.push(Check { name: "finite Kummer series matches 1F1", value: (finite / series - 1.0).abs(), tolerance: 1e-10 });

    let mut table = Table::new(&["check", "value", "tolerance", "status"]);
    table.comment("kmshadow selftest");
    let mut all = true;
    for c in checks {
        let ok = c.value <= c.tolerance;
        all &= ok;
        table.push(vec![
            Cell::Text(c.name.into()),
            Cell::Num(c.value),
            Cell::Num(c.tolerance),
            Cell::Text(if ok { "PASS" } else { "FAIL" }.into()),
        ]);
    }
    Ok((table, all))
}
