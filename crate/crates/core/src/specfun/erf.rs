/// Complementary error function (musl-derived `libm::erfc`, relative
/// accuracy kept in the far tail).
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Gaussian tail probability Q(x) = ½ erfc(x/√2).
pub fn q_function(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}
