//! Echo-to-reference area ratio from two count histograms.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};
use statrs::function::erf::erf;

use super::counts::CountHistogram;
use super::fit::{fit_gaussian, gaussian, FitResult};
use crate::error::{Error, Result};

/// Peak position and width held fixed while only the height and noise floor
/// are estimated. Typically taken from a bright calibration run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeTemplate {
    pub center_ns: f64,
    pub fwhm_ns: f64,
}

impl From<&FitResult> for ShapeTemplate {
    fn from(f: &FitResult) -> Self {
        Self {
            center_ns: f.center_ns,
            fwhm_ns: f.fwhm_ns,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AreaRatioOptions {
    pub reference_window: Option<(f64, f64)>,
    pub echo_window: Option<(f64, f64)>,
    pub reference_shape: Option<ShapeTemplate>,
    pub echo_shape: Option<ShapeTemplate>,
}

/// Fitted peak area of one histogram, in counts, with its noise floor removed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaFit {
    pub area: f64,
    pub area_stderr: f64,
    /// Noise floor per bin.
    pub offset: f64,
    pub window_counts: u64,
    /// Expected noise counts in the window.
    pub background: f64,
    /// Fraction of the fitted peak that falls inside the window.
    pub captured: f64,
    pub fit: FitResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyEstimate {
    pub eta: f64,
    /// First-order Poisson error propagation.
    pub stderr: f64,
    /// Two-sigma-equivalent (95.45%) interval from the binomial split of the
    /// window counts, exact for small counts.
    pub ci_low: f64,
    pub ci_high: f64,
    pub reference: AreaFit,
    pub echo: AreaFit,
}

impl EfficiencyEstimate {
    pub fn covers(&self, eta: f64) -> bool {
        eta >= self.ci_low && eta <= self.ci_high
    }
}

/// Confidence level of a ±2σ normal interval.
pub fn two_sigma_level() -> f64 {
    erf(2.0 / std::f64::consts::SQRT_2)
}

/// Ratio of fitted echo area to fitted reference area, noise floor removed.
pub fn efficiency_from_histograms(
    reference: &CountHistogram,
    echo: &CountHistogram,
    options: &AreaRatioOptions,
) -> Result<EfficiencyEstimate> {
    if reference.bin_edges.len() != echo.bin_edges.len()
        || reference
            .bin_edges
            .iter()
            .zip(&echo.bin_edges)
            .any(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0))
    {
        return Err(Error::config(
            "reference and echo histograms use different binning",
        ));
    }
    let r = area_fit(reference, options.reference_window, options.reference_shape)?;
    if !(r.area > 0.0) || (r.window_counts as f64) <= r.background {
        return Err(Error::analysis(format!(
            "reference area is consistent with zero ({} counts over a background of {:.3})",
            r.window_counts, r.background
        )));
    }
    let e = area_fit(echo, options.echo_window, options.echo_shape)?;
    let eta = e.area / r.area;
    let rel_r = r.area_stderr / r.area;
    let stderr = if e.area > 0.0 {
        eta * ((e.area_stderr / e.area).powi(2) + rel_r * rel_r).sqrt()
    } else {
        e.area_stderr / r.area
    };
    let (ci_low, ci_high) = binomial_interval(&r, &e, two_sigma_level());
    Ok(EfficiencyEstimate {
        eta,
        stderr,
        ci_low: ci_low.min(eta),
        ci_high: ci_high.max(eta),
        reference: r,
        echo: e,
    })
}

/// Conditional on the total, the echo window holds a binomial share
/// `p = μ_e/(μ_e + μ_r)` of the counts. Clopper–Pearson bounds on `p` are
/// mapped back to the signal ratio after removing the expected background
/// and correcting for the part of each peak outside its window.
fn binomial_interval(r: &AreaFit, e: &AreaFit, level: f64) -> (f64, f64) {
    let k = e.window_counts;
    let n = k + r.window_counts;
    let alpha = 1.0 - level;
    let p_lo = if k == 0 {
        0.0
    } else {
        beta_quantile(k as f64, (n - k + 1) as f64, 0.5 * alpha)
    };
    let p_hi = if k == n {
        1.0
    } else {
        beta_quantile((k + 1) as f64, (n - k) as f64, 1.0 - 0.5 * alpha)
    };
    let nf = n as f64;
    let to_eta = |p: f64| {
        let se = (p * nf - e.background).max(0.0) / e.captured;
        let sr = ((1.0 - p) * nf - r.background) / r.captured;
        if sr <= 0.0 {
            f64::INFINITY
        } else {
            se / sr
        }
    };
    (to_eta(p_lo), to_eta(p_hi))
}

fn beta_quantile(a: f64, b: f64, q: f64) -> f64 {
    Beta::new(a, b)
        .map(|d| d.inverse_cdf(q))
        .unwrap_or(f64::NAN)
}

fn area_fit(
    hist: &CountHistogram,
    window: Option<(f64, f64)>,
    shape: Option<ShapeTemplate>,
) -> Result<AreaFit> {
    let idx = hist.bins_in(window);
    if idx.is_empty() {
        return Err(Error::analysis("area window holds no bins"));
    }
    let bin_ns = hist.bin_width(idx[0]);
    let window_counts: u64 = idx.iter().map(|&i| hist.counts[i]).sum();
    let fit = match shape {
        Some(s) => fixed_shape_fit(hist, &idx, s),
        None => fit_gaussian(hist, window)?,
    };
    let centers = hist.bin_centers();
    let area = fit.area(bin_ns);
    let inside: f64 = idx
        .iter()
        .map(|&i| gaussian(centers[i], fit.amplitude, fit.center_ns, fit.fwhm_ns))
        .sum();
    let captured = if area > 0.0 {
        (inside / area).clamp(1e-6, 1.0)
    } else {
        1.0
    };
    Ok(AreaFit {
        area,
        area_stderr: fit.area_stderr(bin_ns),
        offset: fit.offset,
        window_counts,
        background: fit.offset * idx.len() as f64,
        captured,
        fit,
    })
}

/// Poisson maximum likelihood for `A·g_i + b` with `g` fixed, by EM. Both
/// parameters stay non-negative, which a least-squares fit cannot promise
/// at a handful of counts.
fn fixed_shape_fit(hist: &CountHistogram, idx: &[usize], shape: ShapeTemplate) -> FitResult {
    let centers = hist.bin_centers();
    let g: Vec<f64> = idx
        .iter()
        .map(|&i| gaussian(centers[i], 1.0, shape.center_ns, shape.fwhm_ns))
        .collect();
    let y: Vec<f64> = idx.iter().map(|&i| hist.counts[i] as f64).collect();
    let (sg, m) = (g.iter().sum::<f64>(), g.len() as f64);
    let total: f64 = y.iter().sum();
    let (mut a, mut b) = (0.5 * total / sg.max(1e-300), 0.5 * total / m);
    let mut iterations = 0;
    if total > 0.0 {
        for it in 1..=20_000 {
            let (mut na, mut nb) = (0.0, 0.0);
            for (yi, gi) in y.iter().zip(&g) {
                let mu = a * gi + b;
                if mu > 0.0 && *yi > 0.0 {
                    na += yi * a * gi / mu;
                    nb += yi * b / mu;
                }
            }
            let (na, nb) = (na / sg, nb / m);
            let done =
                (na - a).abs() <= 1e-12 * na.max(1e-12) && (nb - b).abs() <= 1e-12 * nb.max(1e-12);
            a = na;
            b = nb;
            iterations = it;
            if done {
                break;
            }
        }
    } else {
        a = 0.0;
        b = 0.0;
    }
    // Fisher information of (A, b) with μ floored at a tenth of a count.
    let (mut iaa, mut iab, mut ibb) = (0.0, 0.0, 0.0);
    let mut chi2 = 0.0;
    for (yi, gi) in y.iter().zip(&g) {
        let mu = (a * gi + b).max(0.1);
        iaa += gi * gi / mu;
        iab += gi / mu;
        ibb += 1.0 / mu;
        chi2 += (yi - a * gi - b).powi(2) / yi.max(1.0);
    }
    let det = iaa * ibb - iab * iab;
    let (vaa, vab, vbb) = if det > 0.0 {
        (ibb / det, -iab / det, iaa / det)
    } else {
        (f64::INFINITY, 0.0, f64::INFINITY)
    };
    let mut covariance = [[0.0; 4]; 4];
    covariance[0][0] = vaa;
    covariance[0][3] = vab;
    covariance[3][0] = vab;
    covariance[3][3] = vbb;
    FitResult {
        amplitude: a,
        center_ns: shape.center_ns,
        fwhm_ns: shape.fwhm_ns,
        offset: b,
        residual_norm: chi2.sqrt(),
        covariance,
        stderr: [vaa.sqrt(), 0.0, 0.0, vbb.sqrt()],
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::counts::DetectorParams;

    fn hist(a: f64, c: f64) -> CountHistogram {
        let p = DetectorParams::default();
        let edges = p.bin_edges();
        let counts = edges
            .windows(2)
            .map(|w| (gaussian(0.5 * (w[0] + w[1]), a, c, 200.0) + 1.0).round() as u64)
            .collect();
        CountHistogram::new(edges, counts, p).unwrap()
    }

    #[test]
    fn identical_histograms_give_unity() {
        let h = hist(80.0, 0.0);
        let e = efficiency_from_histograms(&h, &h, &AreaRatioOptions::default()).unwrap();
        assert!((e.eta - 1.0).abs() < 1e-12);
        assert!(e.covers(1.0));
    }

    #[test]
    fn quarter_echo_recovered() {
        let r = hist(400.0, 0.0);
        let e = hist(100.0, 833.0);
        let opts = AreaRatioOptions {
            reference_window: Some((-500.0, 500.0)),
            echo_window: Some((333.0, 1333.0)),
            ..Default::default()
        };
        let est = efficiency_from_histograms(&r, &e, &opts).unwrap();
        assert!((est.eta - 0.25).abs() < 0.01, "{}", est.eta);
        assert!(est.stderr > 0.0 && est.ci_low < 0.25 && est.ci_high > 0.25);
    }

    #[test]
    fn empty_reference_rejected() {
        let p = DetectorParams::default();
        let edges = p.bin_edges();
        let n = edges.len() - 1;
        let r = CountHistogram::new(edges.clone(), vec![0; n], p).unwrap();
        let e = hist(10.0, 833.0);
        let opts = AreaRatioOptions {
            reference_shape: Some(ShapeTemplate {
                center_ns: 0.0,
                fwhm_ns: 200.0,
            }),
            ..Default::default()
        };
        assert!(matches!(
            efficiency_from_histograms(&r, &e, &opts),
            Err(Error::Analysis(_))
        ));
    }

    #[test]
    fn fixed_shape_fit_matches_expectation() {
        let h = hist(40.0, 0.0);
        let idx = h.bins_in(None);
        let f = fixed_shape_fit(
            &h,
            &idx,
            ShapeTemplate {
                center_ns: 0.0,
                fwhm_ns: 200.0,
            },
        );
        assert!((f.amplitude - 40.0).abs() < 0.5, "{}", f.amplitude);
        assert!((f.offset - 1.0).abs() < 0.1, "{}", f.offset);
    }
}
