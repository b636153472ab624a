//! One- and two-dimensional parameter sweeps over the comb.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::runs::run_arm;
use super::{RunDir, Scenario};
use crate::error::{Error, Result};
use crate::io;
use crate::propagation::{analytic_efficiency, refine_scan, ForwardMaximum};

/// Tolerance in αL of the refined forward maximum.
const FORWARD_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AxisName {
    #[serde(rename = "alphaL")]
    AlphaL,
    #[serde(rename = "F")]
    Finesse,
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "gamma")]
    Gamma,
}

impl FromStr for AxisName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alphaL" | "alpha_l" => Ok(Self::AlphaL),
            "F" | "finesse" => Ok(Self::Finesse),
            "delta" => Ok(Self::Delta),
            "gamma" => Ok(Self::Gamma),
            _ => Err(Error::config(format!(
                "unknown sweep axis {s:?}; use alphaL, F, delta or gamma"
            ))),
        }
    }
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::AlphaL => "alphaL",
            Self::Finesse => "F",
            Self::Delta => "delta",
            Self::Gamma => "gamma",
        })
    }
}

/// Sweep axis written `name=start:stop:count` or `name=v1,v2,...`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: AxisName,
    pub values: Vec<f64>,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, spec) = s
            .split_once('=')
            .ok_or_else(|| Error::config(format!("sweep axis {s:?} is not name=values")))?;
        let name: AxisName = name.trim().parse()?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("axis {name}: {t:?} is not a number")))
        };
        let values = if spec.contains(':') {
            let parts: Vec<&str> = spec.split(':').collect();
            let [a, b, n] = parts[..] else {
                return Err(Error::config(format!(
                    "axis {name}: expected start:stop:count"
                )));
            };
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("axis {name}: bad count {n:?}")))?;
            match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n)
                    .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                    .collect(),
            }
        } else if spec.trim().is_empty() {
            Vec::new()
        } else {
            spec.split(',').map(num).collect::<Result<Vec<_>>>()?
        };
        Ok(Self { name, values })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "alphaL")]
    pub alpha_l: f64,
    #[serde(rename = "F")]
    pub finesse: f64,
    pub delta: f64,
    pub gamma: f64,
    pub eta_numeric: f64,
    pub eta_analytic: f64,
    /// Set when the point could not be evaluated; `message` says why.
    pub flagged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub scenario: Scenario,
    pub axes: Vec<Axis>,
    pub best: Option<SweepRow>,
    /// Refined maximum of a single αL axis.
    pub forward_maximum: Option<ForwardMaximum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forward_message: Option<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// `report.toml` and `sweep.csv` with columns
    /// `alphaL,F,delta_MHz,gamma_MHz,eta_numeric,eta_analytic,flag`.
    /// Flagged rows carry `NaN` efficiencies and flag 1.
    pub fn write(&self, dir: &mut RunDir) -> Result<()> {
        dir.write_toml("report.toml", self)?;
        let rows = self.rows.iter().map(|r| {
            [
                r.alpha_l,
                r.finesse,
                r.delta,
                r.gamma,
                r.eta_numeric,
                r.eta_analytic,
                if r.flagged { 1.0 } else { 0.0 },
            ]
        });
        io::write_csv(
            &dir.file("sweep.csv"),
            &[
                "alphaL",
                "F",
                "delta_MHz",
                "gamma_MHz",
                "eta_numeric",
                "eta_analytic",
                "flag",
            ],
            rows,
        )
    }
}

fn apply(base: &Scenario, point: &[(AxisName, f64)]) -> Scenario {
    let mut s = base.clone();
    let finesse = base.comb.delta / base.comb.gamma_fwhm;
    let mut new_finesse = None;
    for &(name, v) in point {
        match name {
            AxisName::AlphaL => s.comb.alpha_l = v,
            AxisName::Delta => s.comb.delta = v,
            AxisName::Gamma => s.comb.gamma_fwhm = v,
            AxisName::Finesse => new_finesse = Some(v),
        }
    }
    // A finesse axis ties γ to the (possibly swept) spacing.
    if let Some(f) = new_finesse {
        s.comb.gamma_fwhm = s.comb.delta / f;
    } else if point.iter().all(|(n, _)| *n != AxisName::Gamma)
        && point.iter().any(|(n, _)| *n == AxisName::Delta)
    {
        s.comb.gamma_fwhm = s.comb.delta / finesse;
    }
    s
}

fn evaluate(s: &Scenario) -> SweepRow {
    let c = &s.comb;
    let finesse = c.delta / c.gamma_fwhm;
    let eta_analytic = analytic_efficiency(c.alpha_l, finesse).unwrap_or(f64::NAN);
    let (eta_numeric, message) = match run_arm(s, false) {
        Ok(arm) => (arm.echo.efficiency, None),
        Err(e) => (f64::NAN, Some(e.to_string())),
    };
    SweepRow {
        alpha_l: c.alpha_l,
        finesse,
        delta: c.delta,
        gamma: c.gamma_fwhm,
        eta_numeric,
        eta_analytic,
        flagged: message.is_some(),
        message,
    }
}

fn key(row: &SweepRow, name: AxisName) -> f64 {
    match name {
        AxisName::AlphaL => row.alpha_l,
        AxisName::Finesse => row.finesse,
        AxisName::Delta => row.delta,
        AxisName::Gamma => row.gamma,
    }
}

/// Evaluates every point of the axis product in parallel. Points that fail
/// are kept as flagged rows. Rows are sorted by the axis values in the order
/// the axes were given.
pub fn run_sweep(s: &Scenario, axes: &[Axis]) -> Result<SweepReport> {
    s.validate()?;
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::config(format!(
            "a sweep takes one or two axes, got {}",
            axes.len()
        )));
    }
    if let Some(a) = axes.iter().find(|a| a.values.is_empty()) {
        return Err(Error::config(format!("sweep axis {} is empty", a.name)));
    }
    if axes.len() == 2 {
        let (a, b) = (axes[0].name, axes[1].name);
        let both = |x, y| (a == x && b == y) || (a == y && b == x);
        if a == b || both(AxisName::Finesse, AxisName::Gamma) {
            return Err(Error::config(format!(
                "sweep axes {a} and {b} are not independent"
            )));
        }
    }
    let points: Vec<Vec<(AxisName, f64)>> = match axes {
        [a] => a.values.iter().map(|v| vec![(a.name, *v)]).collect(),
        [a, b] => a
            .values
            .iter()
            .flat_map(|x| {
                b.values
                    .iter()
                    .map(move |y| vec![(a.name, *x), (b.name, *y)])
            })
            .collect(),
        _ => unreachable!(),
    };
    let mut rows: Vec<SweepRow> = points.par_iter().map(|p| evaluate(&apply(s, p))).collect();
    rows.sort_by(|x, y| {
        axes.iter()
            .map(|a| key(x, a.name).total_cmp(&key(y, a.name)))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    let best = rows
        .iter()
        .filter(|r| !r.flagged)
        .max_by(|a, b| a.eta_numeric.total_cmp(&b.eta_numeric))
        .cloned();

    let (forward_maximum, forward_message) = match axes {
        [a] if a.name == AxisName::AlphaL => {
            let xs: Vec<f64> = rows.iter().map(|r| r.alpha_l).collect();
            let ys: Vec<f64> = rows
                .iter()
                .map(|r| {
                    if r.flagged {
                        f64::NEG_INFINITY
                    } else {
                        r.eta_numeric
                    }
                })
                .collect();
            let f = |alpha: f64| -> Result<f64> {
                Ok(run_arm(&apply(s, &[(AxisName::AlphaL, alpha)]), false)?
                    .echo
                    .efficiency)
            };
            match refine_scan(&f, xs, ys, FORWARD_TOL) {
                Ok(m) => (Some(m), None),
                Err(e) => (None, Some(e.to_string())),
            }
        }
        _ => (None, None),
    };
    Ok(SweepReport {
        scenario: s.clone(),
        axes: axes.to_vec(),
        best,
        forward_maximum,
        forward_message,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_syntax() {
        let a: Axis = "alphaL=2:10:5".parse().unwrap();
        assert_eq!(a.name, AxisName::AlphaL);
        assert_eq!(a.values, vec![2.0, 4.0, 6.0, 8.0, 10.0]);
        let b: Axis = "F=2,4, 8".parse().unwrap();
        assert_eq!(b.values, vec![2.0, 4.0, 8.0]);
        assert!("width=1,2".parse::<Axis>().is_err());
        assert!("F".parse::<Axis>().is_err());
        assert!("F=1:2".parse::<Axis>().is_err());
    }

    #[test]
    fn empty_axis_is_a_config_error() {
        let s = Scenario::preset("fig3").unwrap();
        let a: Axis = "F=".parse().unwrap();
        let e = run_sweep(&s, &[a]).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(run_sweep(&s, &[]).is_err());
    }

    #[test]
    fn finesse_axis_has_an_interior_analytic_maximum() {
        let s = Scenario::preset("fig3").unwrap();
        let a: Axis = "F=2,3,4,5,6".parse().unwrap();
        let r = run_sweep(&s, &[a]).unwrap();
        let eta: Vec<f64> = r.rows.iter().map(|r| r.eta_analytic).collect();
        let k = (0..eta.len())
            .max_by(|a, b| eta[*a].total_cmp(&eta[*b]))
            .unwrap();
        assert!(k > 0 && k < eta.len() - 1, "{eta:?}");
        assert!(r.rows.windows(2).all(|w| w[0].finesse < w[1].finesse));
    }

    #[test]
    fn invalid_points_are_flagged_not_dropped() {
        let s = Scenario::preset("fig3").unwrap();
        // A finesse below 1 has overlapping peaks.
        let a: Axis = "F=4,0.5".parse().unwrap();
        let r = run_sweep(&s, &[a]).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.rows[0].flagged && r.rows[0].eta_numeric.is_nan());
        assert!(r.rows[0].message.is_some());
        assert!(!r.rows[1].flagged);
    }
}
