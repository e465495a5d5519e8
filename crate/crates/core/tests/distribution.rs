mod common;

use common::{figure_curves, series};
use kmshadow_core::analytic::{diversity_order, iid_pdf, mgf, mgf_asymptotic, pdf, pdf_quadrature};
use kmshadow_core::model::eigenvalues_dc;
use kmshadow_core::specfun::quad::{integrate_positive_axis, QuadTol};
use kmshadow_core::{ChannelParams, PdfSeries, TruncationPolicy};
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn mean_snr_equals_average_snr_on_every_curve() {
    for (k, u, m, rho, l) in figure_curves() {
        for snr in [1.0, 10.0] {
            let s = series(l, k, u, m, snr, rho);
            let mean = pdf_quadrature(&s, |g| g, 1e-11).unwrap().value;
            assert!((mean / snr - 1.0).abs() < 1e-5, "κ={k} μ={u} m={m} ρ={rho} L={l}: mean {mean}");
        }
    }
}

fn peak_density(s: &PdfSeries) -> f64 {
    (1..4000).map(|i| pdf(s, i as f64 * 1e-3).unwrap().value).fold(0.0, f64::max)
}

#[test]
fn density_peaks_higher_as_shadowing_lightens() {
    let peaks: Vec<f64> = [2.0, 4.0, 6.0].iter().map(|&m| peak_density(&series(2, 2.0, 2.0, m, 1.0, 0.7))).collect();
    assert!(peaks.windows(2).all(|w| w[1] >= w[0]), "{peaks:?}");
}

fn unequal_params(order: [usize; 3]) -> ChannelParams {
    let kappa = [0.8, 2.0, 5.0];
    let mu = [1.0, 2.0, 3.0];
    let corr = [[1.0, 0.3, 0.6], [0.3, 1.0, 0.2], [0.6, 0.2, 1.0]];
    let c = DMatrix::from_fn(3, 3, |i, j| corr[order[i]][order[j]]);
    ChannelParams::new(order.map(|i| kappa[i]).to_vec(), order.map(|i| mu[i]).to_vec(), 2.5, 4.0, c).unwrap()
}

#[test]
fn branch_relabelling_leaves_density_and_mgf_unchanged() {
    let base = PdfSeries::new(&unequal_params([0, 1, 2]), TruncationPolicy::default()).unwrap();
    for order in [[2, 0, 1], [1, 2, 0], [2, 1, 0]] {
        let perm = PdfSeries::new(&unequal_params(order), TruncationPolicy::default()).unwrap();
        for g in [0.3, 2.0, 4.0, 11.0] {
            let (a, b) = (pdf(&base, g).unwrap().value, pdf(&perm, g).unwrap().value);
            assert!((a / b - 1.0).abs() < 1e-12, "pdf {order:?} γ={g}: {a} vs {b}");
        }
        for s in [0.05, 1.0, 7.0] {
            let (a, b) = (mgf(&base, s).unwrap().value, mgf(&perm, s).unwrap().value);
            assert!((a / b - 1.0).abs() < 1e-12, "mgf {order:?} s={s}: {a} vs {b}");
        }
    }
}

#[test]
fn iid_closed_form_integrates_to_one() {
    for (k, u, m, l) in [(2.0, 2.0, 2.0, 2), (5.0, 1.0, 0.7, 3), (10.0, 3.0, 4.5, 1), (0.5, 1.0, 1.2, 4)] {
        let f = |g: f64| iid_pdf(k, u, m, l, 3.0, g).unwrap().value;
        let total = integrate_positive_axis(f, 3.0, QuadTol::rel(1e-11)).unwrap().value;
        assert!((total - 1.0).abs() < 1e-8, "κ={k} μ={u} m={m} L={l}: {total}");
    }
}

#[test]
fn mgf_reaches_its_asymptote_at_high_snr() {
    for (k, u, m, rho, l) in figure_curves() {
        let s = series(l, k, u, m, 1e6, rho);
        let exact = mgf(&s, 1.0).unwrap().value;
        let asym = mgf_asymptotic(&s, 1.0).unwrap().value;
        assert!((exact / asym - 1.0).abs() < 0.01, "κ={k} μ={u} m={m} L={l}: {exact} vs {asym}");
    }
}

#[test]
fn mgf_is_laplace_transform_of_density() {
    let s = series(3, 5.0, 2.0, 2.5, 2.0, 0.5);
    for x in [0.1, 1.0, 4.0] {
        let direct = mgf(&s, x).unwrap().value;
        let numeric = pdf_quadrature(&s, |g| (-x * g).exp(), 1e-12).unwrap().value;
        assert!((direct / numeric - 1.0).abs() < 1e-8, "s={x}: {direct} vs {numeric}");
    }
}

#[test]
fn diversity_order_is_total_cluster_count() {
    assert_eq!(diversity_order(&common::params(2, 2.0, 2.0, 2.0, 1.0, 0.7)), 4.0);
    assert_eq!(diversity_order(&common::params(4, 10.0, 1.0, 3.0, 1.0, 0.1)), 4.0);
    assert_eq!(diversity_order(&unequal_params([0, 1, 2])), 6.0);
}

#[test]
fn eigenvalues_are_positive_for_figure_sets() {
    for (k, u, m, rho, l) in figure_curves() {
        let p = common::params(l, k, u, m, 1.0, rho);
        let lambdas = eigenvalues_dc(&p).unwrap();
        assert_eq!(lambdas.len(), l);
        assert!(lambdas.iter().all(|&x| x > 0.0), "{lambdas:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mgf_is_a_decreasing_map_into_the_unit_interval(
        l in 1usize..5,
        kappa in 0.2f64..12.0,
        mu in 1u32..4,
        m in 0.6f64..6.0,
        rho in 0.0f64..0.85,
        snr_db in -10.0f64..30.0,
        s in 0.0f64..5.0,
    ) {
        let p = ChannelParams::exponential(l, kappa, mu as f64, m, common::db(snr_db), rho).unwrap();
        let series = PdfSeries::new(&p, TruncationPolicy::default()).unwrap();
        let a = mgf(&series, s).unwrap().value;
        let b = mgf(&series, s + 0.1).unwrap().value;
        prop_assert!(a > 0.0 && a <= 1.0 + 1e-12);
        prop_assert!(b < a);
    }

    #[test]
    fn density_is_finite_and_nonnegative(
        l in 1usize..5,
        kappa in 0.2f64..12.0,
        mu in 1u32..4,
        m in 0.6f64..6.0,
        rho in 0.0f64..0.85,
        x in 0.01f64..6.0,
    ) {
        let p = ChannelParams::exponential(l, kappa, mu as f64, m, 1.0, rho).unwrap();
        let series = PdfSeries::new(&p, TruncationPolicy::default()).unwrap();
        let v = pdf(&series, x).unwrap().value;
        prop_assert!(v.is_finite() && v >= 0.0, "pdf({x}) = {v}");
    }
}
