use statrs::function::erf::erfc;

/// Standard normal CDF, `0.5 erfc(-x / sqrt 2)`.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}
