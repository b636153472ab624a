//! Thin wrappers over `rustfft` with the sign and scaling conventions used
//! throughout the crate.
//!
//! Forward: `X_k = Σ x_n e^{-2πi kn/N}`. Inverse carries the `1/N`, so a
//! round trip is the identity. A field `x(t)` carrying `e^{+2πi f t}` lands in
//! the bin of positive frequency `f`.

use num_complex::Complex64;
use rustfft::FftPlanner;

pub fn forward(data: &mut [Complex64]) {
    if data.is_empty() {
        return;
    }
    FftPlanner::new().plan_fft_forward(data.len()).process(data);
}

pub fn inverse(data: &mut [Complex64]) {
    if data.is_empty() {
        return;
    }
    FftPlanner::new().plan_fft_inverse(data.len()).process(data);
    let scale = 1.0 / data.len() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
}

/// Frequency of bin `k` for `n` samples spaced `dt`, in the reciprocal unit
/// of `dt`, wrapped to `[-1/(2dt), 1/(2dt))`.
pub fn bin_frequency(k: usize, n: usize, dt: f64) -> f64 {
    let k = k as i64;
    let n_i = n as i64;
    let signed = if k < (n_i + 1) / 2 { k } else { k - n_i };
    signed as f64 / (n as f64 * dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let orig: Vec<Complex64> = (0..37)
            .map(|i| Complex64::new((i as f64).sin(), (0.3 * i as f64).cos()))
            .collect();
        let mut buf = orig.clone();
        forward(&mut buf);
        inverse(&mut buf);
        for (a, b) in orig.iter().zip(&buf) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn positive_tone_lands_in_positive_bin() {
        let n = 64;
        let mut buf: Vec<Complex64> = (0..n)
            .map(|i| {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 5.0 * i as f64 / n as f64)
            })
            .collect();
        forward(&mut buf);
        let k = (0..n)
            .max_by(|a, b| buf[*a].norm().total_cmp(&buf[*b].norm()))
            .unwrap();
        assert_eq!(k, 5);
        assert!((bin_frequency(k, n, 1.0) - 5.0 / 64.0).abs() < 1e-15);
        assert!((bin_frequency(60, n, 1.0) + 4.0 / 64.0).abs() < 1e-15);
    }
}
