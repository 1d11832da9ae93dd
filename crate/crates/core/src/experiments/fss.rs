//! Finite-size scaling of `f_analytic(+...+) - f_n` in `1/L`.
//!
//! Imaginary-time-like ordering of levels means `f_n` overshoots the
//! thermodynamic `f(+...+)` at small `L` and undershoots at large `L`. A line
//! fitted in `1/L` crosses zero at `L* = slope / (-intercept)`.

use serde::Serialize;

use super::evolve_to;
use crate::analytic::rate_fn_thermo;
use crate::cancel;
use crate::ensemble::{born_distribution, free_energy, moment_free_energy, MomentIndex, Normalization};
use crate::error::{Error, Result};
use crate::evolution::{ComplexTime, EvolutionMode};
use crate::model::{Bitstring, ModelParams};
use crate::stats::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FssQuantity {
    Moment(MomentIndex),
    /// `f(+...+)` itself.
    PostSelected,
}

impl FssQuantity {
    pub fn label(&self) -> String {
        match self {
            FssQuantity::Moment(n) => n.to_string(),
            FssQuantity::PostSelected => "post".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FssPoint {
    #[serde(rename = "L")]
    pub l: usize,
    pub f_n: f64,
    pub f_analytic: f64,
    pub deviation: f64,
    pub mode: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FssSeries {
    pub n: String,
    pub t_c: f64,
    pub points: Vec<FssPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub n: String,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Zero crossing, present only for a negative intercept.
    pub l_star: Option<f64>,
}

/// Fit restricted to a contiguous window of the sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowFit {
    pub n: String,
    pub sizes: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
    pub l_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FssReport {
    pub series: Vec<FssSeries>,
    pub fits: Vec<FitResult>,
    /// Every contiguous window of at least three sizes.
    pub sensitivity: Vec<WindowFit>,
    pub truncated: bool,
}

/// Nearest multiple of `dt`, so Trotter and exact runs sample the same time.
pub fn snap_to_step(t: f64, dt: f64) -> f64 {
    (t / dt).round() * dt
}

fn fit_line(points: &[FssPoint]) -> Result<(f64, f64, f64, Option<f64>)> {
    let xs: Vec<f64> = points.iter().map(|p| 1.0 / p.l as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.deviation).collect();
    let fit = linear_fit(&xs, &ys)?;
    let l_star = (fit.intercept < 0.0).then(|| fit.slope / -fit.intercept);
    Ok((fit.slope, fit.intercept, fit.r_squared, l_star))
}

/// Evaluates each quantity at `t_c` for every size, exact for `L <= 14` and
/// Trotterized above, and fits the deviation from the thermodynamic
/// `f(+...+)` against `1/L`.
pub fn finite_size_study(params: &ModelParams, sizes: &[usize], quantities: &[FssQuantity], t_c: f64) -> Result<FssReport> {
    if sizes.len() < 3 {
        return Err(Error::Input("finite-size study needs at least 3 sizes".into()));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("sizes must be strictly increasing".into()));
    }
    if let Some(l) = sizes.iter().find(|l| *l % 2 != 0) {
        return Err(Error::Input(format!("sizes must be even, got {l}")));
    }
    let f_analytic = rate_fn_thermo(ComplexTime::real(t_c), params.j, params.h)?.value;
    let mut values: Vec<Vec<FssPoint>> = vec![Vec::new(); quantities.len()];
    let mut truncated = false;
    for &l in sizes {
        if cancel::is_requested() {
            truncated = true;
            break;
        }
        let p = ModelParams { l, ..*params };
        let mode = EvolutionMode::best_for(l);
        let dist = born_distribution(evolve_to(&p, ComplexTime::real(t_c), mode)?, Normalization::Normalized)?;
        for (q, out) in quantities.iter().zip(values.iter_mut()) {
            let f_n = match q {
                FssQuantity::Moment(n) => moment_free_energy(&dist, *n)?,
                FssQuantity::PostSelected => free_energy(&dist, Bitstring::all_plus(l)),
            };
            out.push(FssPoint {
                l,
                f_n,
                f_analytic,
                deviation: f_analytic - f_n,
                mode: mode.as_str(),
            });
        }
    }
    let mut series = Vec::new();
    let mut fits = Vec::new();
    let mut sensitivity = Vec::new();
    for (q, points) in quantities.iter().zip(values) {
        let n = q.label();
        if points.len() >= 2 {
            let (slope, intercept, r_squared, l_star) = fit_line(&points)?;
            fits.push(FitResult {
                n: n.clone(),
                slope,
                intercept,
                r_squared,
                l_star,
            });
            for len in 3..=points.len() {
                for start in 0..=points.len() - len {
                    let w = &points[start..start + len];
                    let (slope, intercept, _, l_star) = fit_line(w)?;
                    sensitivity.push(WindowFit {
                        n: n.clone(),
                        sizes: w.iter().map(|p| p.l).collect(),
                        slope,
                        intercept,
                        l_star,
                    });
                }
            }
        }
        series.push(FssSeries { n, t_c, points });
    }
    Ok(FssReport {
        series,
        fits,
        sensitivity,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Boundary;
    use std::f64::consts::PI;

    #[test]
    fn h0_post_selected_line_is_ln4_over_l() {
        // L = 2 mod 4 chains have an exact real-time zero at pi/4
        let p = ModelParams::with(8, 0.0, Boundary::Pbc);
        let r = finite_size_study(&p, &[8, 12, 16, 20], &[FssQuantity::PostSelected], PI / 4.0).unwrap();
        let fit = &r.fits[0];
        assert!((fit.slope - 4f64.ln()).abs() < 1e-6, "{fit:?}");
        assert!(fit.intercept.abs() < 1e-6);
        let modes: Vec<&str> = r.series[0].points.iter().map(|p| p.mode).collect();
        assert_eq!(modes, ["exact_spectral", "exact_spectral", "trotter", "trotter"]);
        assert_eq!(r.sensitivity.len(), 3);
    }

    #[test]
    fn rejects_bad_sizes() {
        let p = ModelParams::default();
        let q = [FssQuantity::PostSelected];
        assert!(finite_size_study(&p, &[8, 10], &q, 0.8).is_err());
        assert!(finite_size_study(&p, &[8, 9, 10], &q, 0.8).is_err());
        assert!(finite_size_study(&p, &[10, 8, 12], &q, 0.8).is_err());
    }

    #[test]
    fn snapping() {
        let dt = PI / 160.0;
        let tc = crate::analytic::critical_times(0.2, 0).unwrap();
        assert!((snap_to_step(tc, dt) - 41.0 * dt).abs() < 1e-12);
    }
}
