//! Gaussian-plus-offset fits to count histograms.

use std::f64::consts::{LN_2, PI};

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::counts::CountHistogram;
use crate::error::{Error, Result};

pub const MIN_FIT_BINS: usize = 8;
pub const MAX_ITERATIONS: usize = 500;

/// `amplitude·exp(−4ln2·(t−center)²/fwhm²) + offset`, evaluated at bin
/// centers, in counts per bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub amplitude: f64,
    pub center_ns: f64,
    pub fwhm_ns: f64,
    pub offset: f64,
    /// `sqrt(Σ w_i r_i²)` with Poisson weights `1/max(y_i, 1)`.
    pub residual_norm: f64,
    /// Parameter covariance in the order amplitude, center, fwhm, offset.
    pub covariance: [[f64; 4]; 4],
    pub stderr: [f64; 4],
    pub iterations: usize,
}

impl FitResult {
    /// Area under the Gaussian part in counts, for bins of width `bin_ns`.
    pub fn area(&self, bin_ns: f64) -> f64 {
        gaussian_area(self.amplitude, self.fwhm_ns) / bin_ns
    }

    pub fn area_stderr(&self, bin_ns: f64) -> f64 {
        // d(area)/d(amplitude), d(area)/d(fwhm)
        let k = gaussian_area(1.0, 1.0) / bin_ns;
        let g = [k * self.fwhm_ns, 0.0, k * self.amplitude, 0.0];
        let mut var = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                var += g[i] * self.covariance[i][j] * g[j];
            }
        }
        var.max(0.0).sqrt()
    }

    pub fn model(&self, t: f64) -> f64 {
        gaussian(t, self.amplitude, self.center_ns, self.fwhm_ns) + self.offset
    }
}

pub(crate) fn gaussian(t: f64, amplitude: f64, center: f64, fwhm: f64) -> f64 {
    let x = (t - center) / fwhm;
    amplitude * (-4.0 * LN_2 * x * x).exp()
}

pub(crate) fn gaussian_area(amplitude: f64, fwhm: f64) -> f64 {
    amplitude * fwhm * 0.5 * (PI / LN_2).sqrt()
}

/// Levenberg–Marquardt fit of a Gaussian plus constant offset to the bins
/// whose centers lie in `window` (all bins when `None`). Starts from the
/// moments of the offset-subtracted counts.
pub fn fit_gaussian(hist: &CountHistogram, window: Option<(f64, f64)>) -> Result<FitResult> {
    let idx = hist.bins_in(window);
    if idx.len() < MIN_FIT_BINS {
        return Err(Error::analysis(format!(
            "fit window holds {} bins, at least {MIN_FIT_BINS} are needed",
            idx.len()
        )));
    }
    let centers = hist.bin_centers();
    let t: Vec<f64> = idx.iter().map(|&i| centers[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| hist.counts[i] as f64).collect();
    fit_gaussian_points(&t, &y)
}

pub(crate) fn fit_gaussian_points(t: &[f64], y: &[f64]) -> Result<FitResult> {
    let w: Vec<f64> = y.iter().map(|v| 1.0 / v.max(1.0)).collect();
    let start = initial_guess(t, y);
    let chi2 = |p: &Vector4<f64>| -> f64 {
        t.iter()
            .zip(y)
            .zip(&w)
            .map(|((ti, yi), wi)| {
                let r = yi - gaussian(*ti, p[0], p[1], p[2]) - p[3];
                wi * r * r
            })
            .sum()
    };
    let make_result = |p: &Vector4<f64>, iterations: usize| -> FitResult {
        let (jtj, _) = normal_equations(t, y, &w, p);
        let cov = jtj
            .try_inverse()
            .unwrap_or_else(|| Matrix4::from_element(f64::NAN));
        let mut covariance = [[0.0; 4]; 4];
        let mut stderr = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                covariance[i][j] = cov[(i, j)];
            }
            stderr[i] = cov[(i, i)].max(0.0).sqrt();
        }
        FitResult {
            amplitude: p[0],
            center_ns: p[1],
            fwhm_ns: p[2].abs(),
            offset: p[3],
            residual_norm: chi2(p).sqrt(),
            covariance,
            stderr,
            iterations,
        }
    };

    let Some(mut p) = start else {
        return Err(Error::Fit {
            message: "histogram has no signal above its floor".into(),
            best: Box::new(make_result(
                &Vector4::new(0.0, t[t.len() / 2], t[t.len() - 1] - t[0], 0.0),
                0,
            )),
        });
    };
    let mut cost = chi2(&p);
    let mut lambda = 1e-3;
    for iter in 1..=MAX_ITERATIONS {
        let (jtj, jtr) = normal_equations(t, y, &w, &p);
        let mut damped = jtj;
        for i in 0..4 {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
        }
        let Some(step) = damped.lu().solve(&jtr) else {
            lambda *= 10.0;
            continue;
        };
        let trial = p + step;
        let trial_cost = chi2(&trial);
        if trial_cost.is_finite() && trial_cost <= cost {
            let converged = (cost - trial_cost) <= 1e-14 * cost.max(1e-300)
                && step
                    .iter()
                    .zip(trial.iter())
                    .all(|(s, v)| s.abs() <= 1e-10 * v.abs().max(1e-6));
            p = trial;
            cost = trial_cost;
            lambda = (lambda * 0.3).max(1e-12);
            if converged || cost == 0.0 {
                return finish(make_result(&p, iter));
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e16 {
                return finish(make_result(&p, iter));
            }
        }
    }
    Err(Error::Fit {
        message: format!("no convergence after {MAX_ITERATIONS} iterations"),
        best: Box::new(make_result(&p, MAX_ITERATIONS)),
    })
}

fn finish(r: FitResult) -> Result<FitResult> {
    if !(r.amplitude >= 0.0) || !(r.fwhm_ns > 0.0) || !r.residual_norm.is_finite() {
        return Err(Error::Fit {
            message: format!(
                "fit settled on a non-physical peak (amplitude {}, fwhm {})",
                r.amplitude, r.fwhm_ns
            ),
            best: Box::new(r),
        });
    }
    Ok(r)
}

fn initial_guess(t: &[f64], y: &[f64]) -> Option<Vector4<f64>> {
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let offset = sorted[sorted.len() / 4];
    let excess: Vec<f64> = y.iter().map(|v| (v - offset).max(0.0)).collect();
    let mass: f64 = excess.iter().sum();
    if !(mass > 0.0) {
        return None;
    }
    let mean = t.iter().zip(&excess).map(|(a, b)| a * b).sum::<f64>() / mass;
    let var = t
        .iter()
        .zip(&excess)
        .map(|(a, b)| (a - mean).powi(2) * b)
        .sum::<f64>()
        / mass;
    let spacing = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    let fwhm = (8.0 * LN_2 * var).sqrt().max(spacing);
    let peak = excess.iter().copied().fold(0.0, f64::max);
    Some(Vector4::new(peak, mean, fwhm, offset))
}

/// `JᵀWJ` and `JᵀW r` for the current parameters.
fn normal_equations(
    t: &[f64],
    y: &[f64],
    w: &[f64],
    p: &Vector4<f64>,
) -> (Matrix4<f64>, Vector4<f64>) {
    let (a, c, f) = (p[0], p[1], p[2]);
    let mut jtj = Matrix4::zeros();
    let mut jtr = Vector4::zeros();
    for ((ti, yi), wi) in t.iter().zip(y).zip(w) {
        let x = (ti - c) / f;
        let e = (-4.0 * LN_2 * x * x).exp();
        let g = Vector4::new(
            e,
            a * e * 8.0 * LN_2 * x / f,
            a * e * 8.0 * LN_2 * x * x / f,
            1.0,
        );
        let r = yi - a * e - p[3];
        jtj += g * g.transpose() * *wi;
        jtr += g * (*wi * r);
    }
    (jtj, jtr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::counts::DetectorParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Poisson};

    fn synthetic(a: f64, c: f64, f: f64, off: f64) -> CountHistogram {
        let p = DetectorParams::default();
        let edges = p.bin_edges();
        let centers: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut h = CountHistogram::new(edges, vec![0; centers.len()], p).unwrap();
        h.counts = centers
            .iter()
            .map(|t| (gaussian(*t, a, c, f) + off).round() as u64)
            .collect();
        h
    }

    #[test]
    fn noiseless_recovery() {
        // Exact model values as real-valued counts.
        let p = DetectorParams::default();
        let edges = p.bin_edges();
        let t: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let y: Vec<f64> = t
            .iter()
            .map(|x| gaussian(*x, 100.0, 833.0, 200.0) + 2.0)
            .collect();
        let r = fit_gaussian_points(&t, &y).unwrap();
        for (got, want) in [
            (r.amplitude, 100.0),
            (r.center_ns, 833.0),
            (r.fwhm_ns, 200.0),
            (r.offset, 2.0),
        ] {
            assert!((got / want - 1.0).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn rounded_counts_fit_close() {
        let h = synthetic(100.0, 833.0, 200.0, 2.0);
        let r = fit_gaussian(&h, Some((0.0, 1800.0))).unwrap();
        assert!((r.center_ns - 833.0).abs() < 1.0);
        assert!((r.fwhm_ns - 200.0).abs() < 2.0);
    }

    #[test]
    fn poisson_center_within_counting_scale() {
        let base = synthetic(100.0, 833.0, 200.0, 2.0);
        let centers = base.bin_centers();
        let lambda: Vec<f64> = centers
            .iter()
            .map(|t| gaussian(*t, 100.0, 833.0, 200.0) + 2.0)
            .collect();
        let signal: f64 = centers
            .iter()
            .map(|t| gaussian(*t, 100.0, 833.0, 200.0))
            .sum();
        let scale = 200.0 / signal.sqrt();
        let mut inside = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut h = base.clone();
            h.counts = lambda
                .iter()
                .map(|l| Poisson::new(*l).unwrap().sample(&mut rng) as u64)
                .collect();
            let r = fit_gaussian(&h, None).unwrap();
            if (r.center_ns - 833.0).abs() < scale {
                inside += 1;
            }
        }
        assert!(inside >= 90, "{inside}/100 within {scale:.2} ns");
    }

    #[test]
    fn empty_histogram_is_a_fit_error() {
        let h = synthetic(0.0, 833.0, 200.0, 0.0);
        assert!(matches!(fit_gaussian(&h, None), Err(Error::Fit { .. })));
    }

    #[test]
    fn narrow_window_rejected() {
        let h = synthetic(100.0, 833.0, 200.0, 2.0);
        assert!(matches!(
            fit_gaussian(&h, Some((800.0, 900.0))),
            Err(Error::Analysis(_))
        ));
    }
}
