//! Closed-form efficiency model and the finesse optimum.

use serde::Serialize;

use crate::error::{Error, Result};

pub const FINESSE_RANGE: (f64, f64) = (1.0, 100.0);

/// `η = (1 − e^{−αL/F})² · e^{−7/F²}`. Infinite `alpha_l` gives the limit
/// `e^{−7/F²}`.
pub fn analytic_efficiency(alpha_l: f64, finesse: f64) -> Result<f64> {
    if !(alpha_l >= 0.0) {
        return Err(Error::domain(format!(
            "alphaL must be non-negative, got {alpha_l}"
        )));
    }
    if !(finesse >= 1.0) || !finesse.is_finite() {
        return Err(Error::domain(format!(
            "finesse must be at least 1, got {finesse}"
        )));
    }
    let absorbed = -(-alpha_l / finesse).exp_m1();
    Ok(absorbed * absorbed * (-7.0 / (finesse * finesse)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinesseOptimum {
    pub finesse: f64,
    pub efficiency: f64,
}

/// Finesse in `[1, 100]` maximizing the closed-form efficiency at `alpha_l`.
pub fn optimal_finesse(alpha_l: f64) -> Result<FinesseOptimum> {
    if !(alpha_l > 0.0) || !alpha_l.is_finite() {
        return Err(Error::domain(format!(
            "alphaL must be positive, got {alpha_l}"
        )));
    }
    let eval = |f: f64| analytic_efficiency(alpha_l, f).unwrap_or(0.0);
    let finesse = golden_max(eval, FINESSE_RANGE.0, FINESSE_RANGE.1, 1e-10);
    Ok(FinesseOptimum {
        finesse,
        efficiency: eval(finesse),
    })
}

/// Finesse maximizing a user-supplied efficiency model, e.g. numeric
/// propagation through combs built at each trial finesse. The model is
/// scanned on `n_scan` points first so a non-unimodal curve still locates the
/// global bracket, then refined by golden section to `tol`.
pub fn optimal_finesse_with<F>(
    model: F,
    range: (f64, f64),
    n_scan: usize,
    tol: f64,
) -> Result<FinesseOptimum>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let (lo, hi) = range;
    if !(hi > lo) || lo < 1.0 || n_scan < 3 {
        return Err(Error::config(format!(
            "finesse range [{lo}, {hi}] with {n_scan} scan points is unusable"
        )));
    }
    let (xs, ys) = super::forward::scan(&model, lo, hi, n_scan)?;
    let k = super::forward::argmax(&ys);
    let a = xs[k.saturating_sub(1)];
    let b = xs[(k + 1).min(xs.len() - 1)];
    let mut err = None;
    let finesse = golden_max(
        |f| match model(f) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        a,
        b,
        tol,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(FinesseOptimum {
        finesse,
        efficiency: model(finesse)?,
    })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let by_hand = |a: f64, f: f64| (1.0 - (-a / f).exp()).powi(2) * (-7.0 / (f * f)).exp();
        assert!((analytic_efficiency(6.0, 4.0).unwrap() - by_hand(6.0, 4.0)).abs() < 1e-15);
        assert!((analytic_efficiency(6.0, 4.0).unwrap() - 0.3897).abs() < 5e-5);
        assert!((analytic_efficiency(6.0, 6.0).unwrap() - 0.3290).abs() < 5e-5);
        assert_eq!(analytic_efficiency(0.0, 3.0).unwrap(), 0.0);
        let lim = analytic_efficiency(f64::INFINITY, 5.0).unwrap();
        assert!((lim - (-7.0f64 / 25.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            analytic_efficiency(-1.0, 3.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            analytic_efficiency(1.0, 0.5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(optimal_finesse(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn optimum_is_stationary() {
        let opt = optimal_finesse(6.0).unwrap();
        let h = 1e-4;
        let d = (analytic_efficiency(6.0, opt.finesse + h).unwrap()
            - analytic_efficiency(6.0, opt.finesse - h).unwrap())
            / (2.0 * h);
        assert!(d.abs() < 1e-6, "{d}");
    }

    #[test]
    fn supplied_model_optimum() {
        let opt = optimal_finesse_with(|f| Ok(-(f - 7.25).powi(2)), (2.0, 20.0), 10, 1e-8).unwrap();
        assert!((opt.finesse - 7.25).abs() < 1e-6);
    }
}
