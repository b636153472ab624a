//! Fringe visibility from a beat pattern.
//!
//! Two models, both linear for a fixed beat frequency `ω`, so only `ω` is
//! searched (periodogram scan, then golden section):
//!
//! - Without intensity profiles the trace is
//!   `a(u) + (1 + e·u²)·(b·cos(ωτ) + c·sin(ωτ))`, linearized as
//!   `a(u) + b·cos + c·sin + b₂u²·cos + c₂u²·sin`, with `τ` measured from the
//!   window center, `u = τ/half-width` and `a` quadratic. The envelope has no
//!   odd terms: `u·cos` and `u·sin` would mimic a shift of `ω`.
//! - With the separately known intensities `I_e(t)` and `I_p(t)` of the two
//!   fields it is `s·(I_e + I_p) + √(I_e·I_p)·(b·cos(ωτ) + c·sin(ωτ))`: the
//!   profiles carry the relative intensities, `s` only the overall scale.
//!
//! Several traces can be fitted jointly: they share `ω` and the background,
//! and each has its own beat coefficients.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::counts::CountHistogram;
use crate::error::{Error, Result};
use crate::propagation::golden_max;

/// Samples per trace in the window.
const MIN_SAMPLES: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeatFit {
    /// `(I_max − I_min)/(I_max + I_min)` at the window center.
    pub visibility: f64,
    pub stderr: f64,
    pub period_ns: f64,
    /// Phase of the beat at the window center, radians in `(−π, π]`.
    pub phase: f64,
    pub phase_stderr: f64,
    /// Mean level and beat amplitude at the window center.
    pub mean: f64,
    pub amplitude: f64,
    pub window: (f64, f64),
}

/// Intensities of the two beating fields alone, sampled like the trace.
#[derive(Debug, Clone, Copy)]
pub struct Profiles<'a> {
    pub echo: &'a [f64],
    pub probe: &'a [f64],
}

/// One sampled trace for [`fit_beats`].
#[derive(Debug, Clone, Copy)]
pub struct Series<'a> {
    pub times: &'a [f64],
    pub values: &'a [f64],
    pub variances: Option<&'a [f64]>,
    pub profiles: Option<Profiles<'a>>,
}

/// Beat fit on count histogram bins inside `window`, after subtracting
/// `noise_floor` counts per bin (default: the detector's dark counts).
pub fn visibility(
    hist: &CountHistogram,
    window: (f64, f64),
    noise_floor: Option<f64>,
) -> Result<BeatFit> {
    let mut fits = visibility_joint(&[hist], None, window, noise_floor)?;
    Ok(fits.remove(0))
}

/// Joint beat fit of histograms that differ only in the probe phase.
/// `profiles` are the expected signal counts per bin of each field alone.
pub fn visibility_joint(
    hists: &[&CountHistogram],
    profiles: Option<Profiles>,
    window: (f64, f64),
    noise_floor: Option<f64>,
) -> Result<Vec<BeatFit>> {
    if let Some(p) = profiles {
        if hists
            .iter()
            .any(|h| h.len() != p.echo.len() || h.len() != p.probe.len())
        {
            return Err(Error::config(
                "beat profiles and histograms have different bins",
            ));
        }
    }
    let data: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = hists
        .iter()
        .map(|hist| {
            let floor = noise_floor.unwrap_or_else(|| hist.params.dark_counts_per_bin());
            let t = hist.bin_centers();
            let y = hist.counts.iter().map(|&c| c as f64 - floor).collect();
            let var = hist.counts.iter().map(|&c| (c as f64).max(1.0)).collect();
            (t, y, var)
        })
        .collect();
    let series: Vec<Series> = data
        .iter()
        .map(|(t, y, v)| Series {
            times: t,
            values: y,
            variances: Some(v),
            profiles,
        })
        .collect();
    fit_beats(&series, window)
}

/// Beat fit on arbitrary samples. With `variances` the weights are their
/// inverses and the covariance is absolute; without, samples are equally
/// weighted and the covariance is scaled by the residual variance.
pub fn fit_beat(
    times: &[f64],
    values: &[f64],
    variances: Option<&[f64]>,
    window: (f64, f64),
) -> Result<BeatFit> {
    let series = Series {
        times,
        values,
        variances,
        profiles: None,
    };
    Ok(fit_beats(&[series], window)?.remove(0))
}

/// Joint fit of traces sharing the beat frequency and the background.
/// Either every series has variances or none has, and likewise profiles.
/// The window must hold two beat periods without profiles, one with them.
pub fn fit_beats(series: &[Series], window: (f64, f64)) -> Result<Vec<BeatFit>> {
    let first = series
        .first()
        .ok_or_else(|| Error::config("beat fit needs at least one trace"))?;
    let weighted = first.variances.is_some();
    let model = if first.profiles.is_some() {
        Model::Profiles
    } else {
        Model::Polynomial
    };
    for s in series {
        if s.variances.is_some() != weighted || s.profiles.is_some() != first.profiles.is_some() {
            return Err(Error::config(
                "beat traces mix weighted and unweighted samples",
            ));
        }
        let lengths = [
            Some(s.values.len()),
            s.variances.map(<[f64]>::len),
            s.profiles.map(|p| p.echo.len()),
            s.profiles.map(|p| p.probe.len()),
        ];
        if lengths.into_iter().flatten().any(|n| n != s.times.len()) {
            return Err(Error::config("beat trace columns have different lengths"));
        }
    }
    let (lo, hi) = window;
    let span = hi - lo;
    let center = 0.5 * (lo + hi);
    let half = 0.5 * span;
    let samples: Vec<Vec<Sample>> = series
        .iter()
        .map(|s| {
            (0..s.times.len())
                .filter(|&i| s.times[i] >= lo && s.times[i] <= hi)
                .map(|i| {
                    let tau = s.times[i] - center;
                    let v = s.variances.map_or(1.0, |v| v[i]);
                    let (e, p) = s.profiles.map_or((0.0, 0.0), |q| (q.echo[i], q.probe[i]));
                    Sample {
                        tau,
                        u: tau / half,
                        y: s.values[i],
                        sqrt_w: 1.0 / v.max(1e-300).sqrt(),
                        echo: e.max(0.0),
                        probe: p.max(0.0),
                    }
                })
                .collect()
        })
        .collect();
    let fewest = samples.iter().map(Vec::len).min().unwrap_or(0);
    if fewest < MIN_SAMPLES {
        return Err(Error::analysis(format!(
            "beat window holds {fewest} samples, at least {MIN_SAMPLES} are needed"
        )));
    }
    let spacing = samples
        .iter()
        .map(|p| span / (p.len() - 1) as f64)
        .fold(0.0, f64::max);
    let periods = model.min_periods();
    let f_min = periods / span;
    // At least four samples per period.
    let f_max = 0.25 / spacing;
    if f_max <= f_min {
        return Err(Error::analysis("beat window is too coarsely sampled"));
    }
    let design = Design { model, samples };
    // The scan starts below the limit so that a window too short for the
    // beat it holds is refused instead of fitted with some other frequency.
    let f_lo = 0.5 * f_min;
    let n_scan = ((f_max - f_lo) * span * 4.0).ceil() as usize + 1;
    let freqs: Vec<f64> = (0..n_scan)
        .map(|i| f_lo + (f_max - f_lo) * i as f64 / (n_scan - 1) as f64)
        .collect();
    let rss: Vec<f64> = freqs
        .iter()
        .map(|f| design.solve(*f).map_or(f64::INFINITY, |s| s.rss))
        .collect();
    let k = (0..n_scan)
        .min_by(|a, b| rss[*a].total_cmp(&rss[*b]))
        .unwrap_or(0);
    if freqs[k] < f_min {
        return Err(Error::analysis(format!(
            "no beat with {periods} or more periods inside the {span:.0} ns window"
        )));
    }
    let step = freqs[1] - freqs[0];
    let f_best = golden_max(
        |f| -design.solve(f).map_or(f64::INFINITY, |s| s.rss),
        (freqs[k] - step).max(f_lo),
        (freqs[k] + step).min(f_max),
        1e-12 * f_max,
    );
    if f_best < f_min {
        return Err(Error::analysis(format!(
            "no beat with {periods} or more periods inside the {span:.0} ns window"
        )));
    }
    let sol = design
        .solve(f_best)
        .ok_or_else(|| Error::analysis("beat fit is singular"))?;
    let n_total: usize = design.samples.iter().map(Vec::len).sum();
    let scale = if weighted {
        1.0
    } else {
        sol.rss / (n_total - design.n_params()) as f64
    };
    let cov = |i: usize, j: usize| sol.cov[(i, j)] * scale;

    // Background basis and beat envelope at the window center.
    let (bg_center, envelope) = match model {
        Model::Polynomial => (vec![1.0, 0.0, 0.0], 1.0),
        Model::Profiles => {
            let s = design.samples[0]
                .iter()
                .min_by(|a, b| a.tau.abs().total_cmp(&b.tau.abs()))
                .expect("window holds samples");
            (vec![s.echo + s.probe], (s.echo * s.probe).sqrt())
        }
    };
    let nb = model.n_background();
    let mean: f64 = (0..nb).map(|k| sol.coef[k] * bg_center[k]).sum();
    if !(mean > 0.0) {
        return Err(Error::analysis("mean level of the beat is not positive"));
    }
    Ok((0..series.len())
        .map(|j| {
            let (ib, ic) = (nb + model.n_beat() * j, nb + model.n_beat() * j + 1);
            let (b, c) = (sol.coef[ib], sol.coef[ic]);
            let r = b.hypot(c);
            let amplitude = envelope * r;
            let v = amplitude / mean;
            // Gradient of V = envelope·|(b, c)|/mean.
            let mut g: Vec<(usize, f64)> = (0..nb).map(|k| (k, -v * bg_center[k] / mean)).collect();
            if r > 0.0 {
                g.push((ib, envelope * b / (r * mean)));
                g.push((ic, envelope * c / (r * mean)));
            } else {
                g.push((ib, envelope / mean));
            }
            let var_v: f64 = g
                .iter()
                .flat_map(|(i, gi)| g.iter().map(move |(k, gk)| gi * gk * cov(*i, *k)))
                .sum();
            // b cos(ωτ) + c sin(ωτ) = r cos(ωτ + φ) with φ = atan2(−c, b).
            let var_phase = if r > 0.0 {
                (c * c * cov(ib, ib) + b * b * cov(ic, ic) - 2.0 * b * c * cov(ib, ic)) / r.powi(4)
            } else {
                f64::INFINITY
            };
            BeatFit {
                visibility: v,
                stderr: var_v.max(0.0).sqrt(),
                period_ns: 1.0 / f_best,
                phase: (-c).atan2(b),
                phase_stderr: var_phase.max(0.0).sqrt(),
                mean,
                amplitude,
                window,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Model {
    Polynomial,
    Profiles,
}

impl Model {
    fn n_background(self) -> usize {
        match self {
            Self::Polynomial => 3,
            Self::Profiles => 1,
        }
    }

    fn n_beat(self) -> usize {
        match self {
            Self::Polynomial => 4,
            Self::Profiles => 2,
        }
    }

    fn min_periods(self) -> f64 {
        match self {
            Self::Polynomial => 2.0,
            Self::Profiles => 1.0,
        }
    }
}

struct Sample {
    tau: f64,
    u: f64,
    y: f64,
    sqrt_w: f64,
    echo: f64,
    probe: f64,
}

struct Design {
    model: Model,
    samples: Vec<Vec<Sample>>,
}

struct Solution {
    coef: DVector<f64>,
    cov: DMatrix<f64>,
    rss: f64,
}

impl Design {
    fn n_params(&self) -> usize {
        self.model.n_background() + self.model.n_beat() * self.samples.len()
    }

    /// Weighted least squares at beat frequency `f` (1/ns).
    fn solve(&self, f: f64) -> Option<Solution> {
        let n: usize = self.samples.iter().map(Vec::len).sum();
        let m = self.n_params();
        let nb = self.model.n_background();
        let w = 2.0 * PI * f;
        let mut x = DMatrix::zeros(n, m);
        let mut rhs = DVector::zeros(n);
        let mut i = 0;
        for (j, trace) in self.samples.iter().enumerate() {
            let off = nb + self.model.n_beat() * j;
            for p in trace {
                let (s, c) = (w * p.tau).sin_cos();
                let sw = p.sqrt_w;
                match self.model {
                    Model::Polynomial => {
                        let u2 = p.u * p.u;
                        x[(i, 0)] = sw;
                        x[(i, 1)] = p.u * sw;
                        x[(i, 2)] = u2 * sw;
                        for (k, v) in [c, s, u2 * c, u2 * s].into_iter().enumerate() {
                            x[(i, off + k)] = v * sw;
                        }
                    }
                    Model::Profiles => {
                        let g = (p.echo * p.probe).sqrt();
                        x[(i, 0)] = (p.echo + p.probe) * sw;
                        x[(i, off)] = g * c * sw;
                        x[(i, off + 1)] = g * s * sw;
                    }
                }
                rhs[i] = p.y * sw;
                i += 1;
            }
        }
        let cov = (x.transpose() * &x).try_inverse()?;
        let coef = &cov * (x.transpose() * &rhs);
        let resid = &rhs - &x * &coef;
        Some(Solution {
            coef,
            cov,
            rss: resid.norm_squared(),
        })
    }
}

/// Visibility of two interfering waves of intensities `i1` and `i2`.
pub fn two_wave_visibility(i1: f64, i2: f64) -> f64 {
    2.0 * (i1 * i2).sqrt() / (i1 + i2)
}
