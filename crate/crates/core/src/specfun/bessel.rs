use super::gamma::lgamma_pos;
use super::series::hypergeometric_series;
use crate::{Error, Result};

/// Modified Bessel function of the first kind I_ν(x), ν ≥ 0, x ≥ 0.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    check(nu, x)?;
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(ln_bessel_i(nu, x)?.exp())
}

/// ln I_ν(x); finite for arguments where I_ν itself overflows.
pub fn ln_bessel_i(nu: f64, x: f64) -> Result<f64> {
    check(nu, x)?;
    if x == 0.0 {
        return Ok(if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    }
    if x > 40.0 && x > nu * nu {
        if let Some(v) = hankel(nu, x) {
            return Ok(v);
        }
    }
    // (x/2)^ν / Γ(ν+1) · ₀F₁(; ν+1; x²/4)
    let cap = (4.0 * x) as usize + 200;
    let s = hypergeometric_series(&[], &[nu + 1.0], 0.25 * x * x, cap, "bessel_i")?;
    Ok(nu * (0.5 * x).ln() - lgamma_pos(nu + 1.0) + s.mantissa.ln() + s.ln_scale)
}

fn check(nu: f64, x: f64) -> Result<()> {
    if !(nu >= 0.0) || !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain("bessel_i", format!("need nu >= 0 and x >= 0, got ({nu}, {x})")));
    }
    Ok(())
}

/// Large-argument expansion e^x/√(2πx) Σ (−1)^k a_k(ν)/x^k; `None` if the
/// asymptotic series stops shrinking before reaching machine precision.
fn hankel(nu: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() > term.abs() {
            return None;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            return Some(x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1.0, 0.0).unwrap(), 0.0);
        // 30-term power series evaluated independently
        let series: f64 = (0..30)
            .map(|k| {
                let k = k as f64;
                (2.0 * k + 1.0) * 1f64.ln() - libm::lgamma(k + 1.0) - libm::lgamma(k + 2.0)
            })
            .map(f64::exp)
            .sum();
        let got = bessel_i(1.0, 2.0).unwrap();
        assert!((got - series).abs() < 1e-14);
        assert!((got - 1.590636855).abs() < 1e-9);
    }

    #[test]
    fn asymptotic_and_series_meet() {
        // x = 41 just above the switch; compare with the series directly
        let nu = 2.5;
        let x = 41.0;
        let via_hankel = hankel(nu, x).unwrap();
        let s = hypergeometric_series(&[], &[nu + 1.0], 0.25 * x * x, 1000, "t").unwrap();
        let via_series = nu * (0.5f64 * x).ln() - lgamma_pos(nu + 1.0) + s.mantissa.ln() + s.ln_scale;
        assert!((via_hankel - via_series).abs() < 1e-13 * via_series);
    }

    #[test]
    fn half_order_closed_form() {
        // I_{1/2}(x) = sqrt(2/(pi x)) sinh x
        for &x in &[0.3f64, 5.0, 60.0] {
            let exact = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sinh();
            let got = bessel_i(0.5, x).unwrap();
            assert!((got / exact - 1.0).abs() < 1e-13, "x = {x}");
        }
        assert!(ln_bessel_i(0.0, 2000.0).unwrap() > 1990.0);
    }

    #[test]
    fn rejects_negative() {
        assert!(bessel_i(-1.0, 1.0).is_err());
        assert!(bessel_i(1.0, -1.0).is_err());
    }
}
