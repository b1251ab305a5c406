use std::f64::consts::PI;

use super::NumericsError;

/// `∫₀^∞ rⁿ exp(-a r²) dr`.
///
/// Even `n = 2m`: `(2m-1)!! sqrt(pi/a) / (2^(m+1) a^m)`.
/// Odd `n = 2m+1`: `m! / (2 a^(m+1))`.
pub fn gauss_integral(n: u32, a: f64) -> Result<f64, NumericsError> {
    if !(a.is_finite() && a > 0.0) {
        return Err(NumericsError::InvalidArgument(format!(
            "Gaussian exponent must be positive and finite, got {a}"
        )));
    }
    let m = n / 2;
    let value = if n.is_multiple_of(2) {
        // accumulate (2m-1)!! / (2a)^m term by term to stay in range
        let mut acc = 0.5 * (PI / a).sqrt();
        for k in 1..=m {
            acc *= (2 * k - 1) as f64 / (2.0 * a);
        }
        acc
    } else {
        let mut acc = 0.5 / a;
        for k in 1..=m {
            acc *= k as f64 / a;
        }
        acc
    };
    if !value.is_finite() {
        return Err(NumericsError::Overflow(format!(
            "gauss_integral({n}, {a}) is not representable"
        )));
    }
    Ok(value)
}
