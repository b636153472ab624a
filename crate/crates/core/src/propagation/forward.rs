//! Forward-retrieval ceiling: scan the optical depth, refine the maximum.

use rayon::prelude::*;
use serde::Serialize;

use super::analytic::golden_max;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardMaximum {
    pub eta_max: f64,
    pub alpha_l_at_max: f64,
    /// `(alphaL, efficiency)` of the coarse scan.
    pub scan: Vec<(f64, f64)>,
}

/// Largest forward efficiency over `alpha_range`. `efficiency` maps a peak
/// depth to the numeric echo efficiency, typically by building a comb and
/// propagating through it. The scan runs in parallel; the best interior scan
/// point is then refined by golden section to `tol` in αL.
pub fn max_forward_efficiency<F>(
    efficiency: F,
    alpha_range: (f64, f64),
    n_scan: usize,
    tol: f64,
) -> Result<ForwardMaximum>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let (lo, hi) = alpha_range;
    if !(hi > lo) || lo < 0.0 || n_scan < 3 {
        return Err(Error::config(format!(
            "alphaL range [{lo}, {hi}] with {n_scan} points cannot bracket a maximum"
        )));
    }
    let (xs, ys) = scan(&efficiency, lo, hi, n_scan)?;
    refine_scan(&efficiency, xs, ys, tol)
}

/// Golden-section refinement around the best interior point of an existing
/// scan. `xs` must be increasing.
pub fn refine_scan<F>(
    efficiency: &F,
    xs: Vec<f64>,
    ys: Vec<f64>,
    tol: f64,
) -> Result<ForwardMaximum>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if xs.len() < 3 || xs.len() != ys.len() {
        return Err(Error::config(
            "a maximum needs a scan of at least three points",
        ));
    }
    let k = argmax(&ys);
    if k == 0 || k == xs.len() - 1 {
        return Err(Error::analysis(format!(
            "efficiency peaks at the edge alphaL = {} of the sweep [{}, {}]",
            xs[k],
            xs[0],
            xs[xs.len() - 1]
        )));
    }
    let mut err = None;
    let best = golden_max(
        |a| match efficiency(a) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        xs[k - 1],
        xs[k + 1],
        tol,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let eta_best = efficiency(best)?;
    let (alpha_l_at_max, eta_max) = if eta_best >= ys[k] {
        (best, eta_best)
    } else {
        (xs[k], ys[k])
    };
    Ok(ForwardMaximum {
        eta_max,
        alpha_l_at_max,
        scan: xs.into_iter().zip(ys).collect(),
    })
}

pub(crate) fn scan<F>(f: &F, lo: f64, hi: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let xs: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let ys = xs.par_iter().map(|x| f(*x)).collect::<Result<Vec<_>>>()?;
    Ok((xs, ys))
}

pub(crate) fn argmax(ys: &[f64]) -> usize {
    (0..ys.len())
        .max_by(|a, b| ys[*a].total_cmp(&ys[*b]))
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_forward_formula_peak() {
        let model = |d: f64| Ok(d * d * (-d).exp());
        let m = max_forward_efficiency(model, (0.2, 6.0), 15, 1e-8).unwrap();
        assert!((m.alpha_l_at_max - 2.0).abs() < 1e-6);
        assert!((m.eta_max - 4.0 * (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn narrow_range_is_an_analysis_error() {
        let model = |d: f64| Ok(d * d * (-d).exp());
        let r = max_forward_efficiency(model, (0.2, 1.5), 8, 1e-6);
        assert!(matches!(r, Err(Error::Analysis(_))));
    }
}
