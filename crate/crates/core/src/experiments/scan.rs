//! Complex-time heatmaps of `e^{-f}` and detection of their zeros.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cancel;
use crate::ensemble::{born_distribution, moment_free_energy, MomentIndex, Normalization};
use crate::error::{Error, Result};
use crate::evolution::spectral::SpectralPropagator;
use crate::evolution::ComplexTime;
use crate::model::ModelParams;

/// Default grid-value threshold of [`detect_zeros`].
pub const DEFAULT_ZERO_THRESHOLD: f64 = 0.2;

/// Rectangular grid over `(t, tau)`; both axes include their end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    pub ntau: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            t_min: 0.0,
            t_max: 3.0 * PI,
            nt: 161,
            tau_min: -PI / 4.0,
            tau_max: PI / 4.0,
            ntau: 81,
        }
    }
}

impl ScanGrid {
    pub fn validate(&self) -> Result<()> {
        if self.nt < 2 || self.ntau < 2 {
            return Err(Error::Input("scan grid needs at least 2 points per axis".into()));
        }
        if !(self.t_max > self.t_min && self.tau_max > self.tau_min) {
            return Err(Error::Input("scan grid ranges must be increasing".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / (self.nt - 1) as f64
    }

    pub fn dtau(&self) -> f64 {
        (self.tau_max - self.tau_min) / (self.ntau - 1) as f64
    }

    pub fn t_at(&self, i: usize) -> f64 {
        self.t_min + i as f64 * self.dt()
    }

    pub fn tau_at(&self, j: usize) -> f64 {
        self.tau_min + j as f64 * self.dtau()
    }
}

/// What a heatmap shows; every quantity is reported as `e^{-f}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanQuantity {
    /// `P(+...+)^{1/L}` of the normalized state.
    PostSelected,
    /// `|<+...+|e^{-iHz}|+...+>|^{2/L}` without normalization.
    PostSelectedRaw,
    /// `e^{-f_n}` of the normalized distribution.
    Moment(MomentIndex),
}

impl fmt::Display for ScanQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScanQuantity::PostSelected => f.write_str("post"),
            ScanQuantity::PostSelectedRaw => f.write_str("post_raw"),
            ScanQuantity::Moment(n) => write!(f, "f{n}"),
        }
    }
}

impl FromStr for ScanQuantity {
    type Err = Error;

    /// `post`, `post_raw`, or `f<n>` such as `f1`, `f0.5`, `finf`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "post" => Ok(ScanQuantity::PostSelected),
            "post_raw" | "raw" => Ok(ScanQuantity::PostSelectedRaw),
            _ => match s.strip_prefix('f') {
                Some(n) => Ok(ScanQuantity::Moment(n.trim_start_matches('_').parse()?)),
                None => Err(Error::Input(format!("unknown scan quantity {s:?} (post|post_raw|f<n>)"))),
            },
        }
    }
}

/// Evaluates scan quantities at arbitrary complex times from one eigendecomposition.
pub struct ScanEvaluator {
    prop: SpectralPropagator,
}

impl ScanEvaluator {
    pub fn new(params: &ModelParams) -> Result<Self> {
        Ok(ScanEvaluator {
            prop: SpectralPropagator::new(params)?,
        })
    }

    pub fn values(&self, z: ComplexTime, quantities: &[ScanQuantity]) -> Result<Vec<f64>> {
        let inv_l = 1.0 / self.prop.params().l as f64;
        let amp = self.prop.return_amplitude(z);
        let needs_state = quantities.iter().any(|q| matches!(q, ScanQuantity::Moment(_)));
        let dist = if needs_state {
            Some(born_distribution(self.prop.evolve(z), Normalization::Normalized)?)
        } else {
            None
        };
        quantities
            .iter()
            .map(|q| match q {
                ScanQuantity::PostSelectedRaw => Ok(amp.norm_sqr().powf(inv_l)),
                ScanQuantity::PostSelected => Ok((amp.norm_sqr() / self.prop.evolved_norm_sqr(z)).powf(inv_l)),
                ScanQuantity::Moment(n) => {
                    let f = moment_free_energy(dist.as_ref().expect("state built"), *n)?;
                    Ok((-f).exp())
                }
            })
            .collect()
    }

    pub fn value(&self, z: ComplexTime, q: ScanQuantity) -> Result<f64> {
        Ok(self.values(z, &[q])?[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapFrame {
    pub quantity: ScanQuantity,
    pub grid: ScanGrid,
    pub params: ModelParams,
    /// Row-major in `tau`: index `j * nt + i` holds `(t_i, tau_j)`.
    pub values: Vec<f64>,
    /// Cells left unevaluated after an interrupt hold NaN.
    pub truncated: bool,
}

impl HeatmapFrame {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nt + i]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluates every quantity on every grid cell (exact mode only, `L <= 14`).
pub fn complex_scan(params: &ModelParams, grid: &ScanGrid, quantities: &[ScanQuantity]) -> Result<Vec<HeatmapFrame>> {
    grid.validate()?;
    let eval = ScanEvaluator::new(params)?;
    let cells: Vec<Option<Vec<f64>>> = (0..grid.nt * grid.ntau)
        .into_par_iter()
        .map(|c| {
            if cancel::is_requested() {
                return Ok(None);
            }
            let z = ComplexTime::new(grid.t_at(c % grid.nt), grid.tau_at(c / grid.nt));
            eval.values(z, quantities).map(Some)
        })
        .collect::<Result<_>>()?;
    let truncated = cells.iter().any(Option::is_none);
    Ok(quantities
        .iter()
        .enumerate()
        .map(|(k, q)| HeatmapFrame {
            quantity: *q,
            grid: *grid,
            params: *params,
            values: cells.iter().map(|c| c.as_ref().map_or(f64::NAN, |v| v[k])).collect(),
            truncated,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCandidate {
    pub t: f64,
    pub tau: f64,
    pub value: f64,
    pub refined: ComplexTime,
    pub refined_value: f64,
}

const GOLDEN_ITERS: usize = 40;
const DESCENT_ROUNDS: usize = 8;

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Strict 3x3 interior minima with grid value below `threshold`, each refined
/// by golden-section coordinate descent inside its neighbouring cells.
pub fn detect_zeros(frame: &HeatmapFrame, threshold: f64) -> Result<Vec<ZeroCandidate>> {
    let g = frame.grid;
    let mut seeds = Vec::new();
    for j in 1..g.ntau - 1 {
        for i in 1..g.nt - 1 {
            let v = frame.get(i, j);
            if !(v < threshold) {
                continue;
            }
            let strict = (-1i64..=1)
                .flat_map(|dj| (-1i64..=1).map(move |di| (di, dj)))
                .filter(|&d| d != (0, 0))
                .all(|(di, dj)| v < frame.get((i as i64 + di) as usize, (j as i64 + dj) as usize));
            if strict {
                seeds.push((i, j, v));
            }
        }
    }
    if seeds.is_empty() {
        return Ok(Vec::new());
    }
    let eval = ScanEvaluator::new(&frame.params)?;
    let q = frame.quantity;
    let f = |t: f64, tau: f64| eval.value(ComplexTime::new(t, tau), q).unwrap_or(f64::INFINITY);
    Ok(seeds
        .into_par_iter()
        .map(|(i, j, v)| {
            let (t0, tau0) = (g.t_at(i), g.tau_at(j));
            let (mut t, mut tau) = (t0, tau0);
            for _ in 0..DESCENT_ROUNDS {
                t = golden_min(|x| f(x, tau), t0 - g.dt(), t0 + g.dt());
                tau = golden_min(|y| f(t, y), tau0 - g.dtau(), tau0 + g.dtau());
            }
            let refined_value = f(t, tau);
            let (refined, refined_value) = if refined_value <= v {
                (ComplexTime::new(t, tau), refined_value)
            } else {
                (ComplexTime::new(t0, tau0), v)
            };
            ZeroCandidate {
                t: t0,
                tau: tau0,
                value: v,
                refined,
                refined_value,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceAxis {
    FixedT,
    FixedTau,
}

impl FromStr for SliceAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed_t" | "t" => Ok(SliceAxis::FixedT),
            "fixed_tau" | "tau" => Ok(SliceAxis::FixedTau),
            _ => Err(Error::Input(format!("unknown slice axis {s:?} (fixed_t|fixed_tau)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub axis: SliceAxis,
    /// Requested coordinate.
    pub value: f64,
    /// Coordinate actually used (the nearest grid line unless interpolated).
    pub line: f64,
    pub interpolated: bool,
    /// Coordinates along the free axis.
    pub coords: Vec<f64>,
    pub values: Vec<f64>,
}

/// One line of a frame at fixed `t` or fixed `tau`.
pub fn slice(frame: &HeatmapFrame, axis: SliceAxis, value: f64, interpolate: bool) -> Result<Slice> {
    let g = frame.grid;
    let (lo, hi, step, n) = match axis {
        SliceAxis::FixedT => (g.t_min, g.t_max, g.dt(), g.nt),
        SliceAxis::FixedTau => (g.tau_min, g.tau_max, g.dtau(), g.ntau),
    };
    let slack = 1e-12 * step;
    if !(value >= lo - slack && value <= hi + slack) {
        return Err(Error::Domain(format!("slice value {value} outside [{lo}, {hi}]")));
    }
    let x = ((value - lo) / step).clamp(0.0, (n - 1) as f64);
    let at = |k: usize, m: usize| match axis {
        SliceAxis::FixedT => frame.get(k, m),
        SliceAxis::FixedTau => frame.get(m, k),
    };
    let (free_n, coord): (usize, Box<dyn Fn(usize) -> f64>) = match axis {
        SliceAxis::FixedT => (g.ntau, Box::new(move |m| g.tau_at(m))),
        SliceAxis::FixedTau => (g.nt, Box::new(move |m| g.t_at(m))),
    };
    let (line, values) = if interpolate {
        let k0 = (x.floor() as usize).min(n - 2);
        let w = x - k0 as f64;
        (
            value,
            (0..free_n).map(|m| (1.0 - w) * at(k0, m) + w * at(k0 + 1, m)).collect(),
        )
    } else {
        let k = x.round() as usize;
        (lo + k as f64 * step, (0..free_n).map(|m| at(k, m)).collect())
    };
    Ok(Slice {
        axis,
        value,
        line,
        interpolated: interpolate,
        coords: (0..free_n).map(coord).collect(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{time_series, SeriesRequest};
    use crate::model::{Boundary, TimeGrid};
    use crate::EvolutionMode;

    fn small_grid() -> ScanGrid {
        ScanGrid {
            t_min: 0.0,
            t_max: PI,
            nt: 33,
            tau_min: -PI / 4.0,
            tau_max: PI / 4.0,
            ntau: 17,
        }
    }

    #[test]
    fn quantity_labels_round_trip() {
        for s in ["post", "post_raw", "f1", "finf", "f0.5"] {
            let q: ScanQuantity = s.parse().unwrap();
            assert_eq!(q.to_string(), s);
        }
        assert!("zz".parse::<ScanQuantity>().is_err());
    }

    #[test]
    fn real_axis_row_matches_time_series() {
        let p = ModelParams::with(8, 0.2, Boundary::Pbc);
        let g = small_grid();
        let frames = complex_scan(&p, &g, &[ScanQuantity::PostSelected, ScanQuantity::Moment(MomentIndex::Finite(1.0))]).unwrap();
        let req = SeriesRequest {
            plus: true,
            moments: vec![MomentIndex::Finite(1.0)],
            ..Default::default()
        };
        let ts = time_series(&p, &TimeGrid::new(0.0, PI, 32).unwrap(), &req, EvolutionMode::ExactSpectral).unwrap();
        let row = slice(&frames[0], SliceAxis::FixedTau, 0.0, false).unwrap();
        let row1 = slice(&frames[1], SliceAxis::FixedTau, 0.0, false).unwrap();
        for (k, r) in ts.rows.iter().enumerate() {
            assert!((row.values[k] - (-r.plus.unwrap()).exp()).abs() < 1e-10);
            assert!((row1.values[k] - (-r.moments[0]).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn normalized_values_are_bounded() {
        let p = ModelParams::with(8, 0.2, Boundary::Pbc);
        let frames = complex_scan(&p, &small_grid(), &[ScanQuantity::PostSelected, ScanQuantity::Moment(MomentIndex::Finite(1.0))]).unwrap();
        for fr in &frames {
            assert!(fr.max() <= 1.0 + 1e-9 && fr.min() >= 0.0);
        }
        assert!(frames[1].min() >= 0.5 - 1e-6);
    }

    #[test]
    fn raw_h0_symmetry() {
        let p = ModelParams::with(8, 0.0, Boundary::Pbc);
        let g = ScanGrid {
            t_min: 0.0,
            t_max: PI / 2.0,
            nt: 21,
            tau_min: -0.5,
            tau_max: 0.5,
            ntau: 11,
        };
        let fr = &complex_scan(&p, &g, &[ScanQuantity::PostSelectedRaw]).unwrap()[0];
        for j in 0..g.ntau {
            for i in 0..g.nt {
                let a = fr.get(i, j);
                let b = fr.get(g.nt - 1 - i, g.ntau - 1 - j);
                assert!((a - b).abs() < 1e-9 * a.max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn constant_frame_has_no_zeros() {
        let p = ModelParams::with(4, 0.2, Boundary::Pbc);
        let frame = HeatmapFrame {
            quantity: ScanQuantity::PostSelected,
            grid: small_grid(),
            params: p,
            values: vec![0.1; 33 * 17],
            truncated: false,
        };
        assert!(detect_zeros(&frame, 0.5).unwrap().is_empty());
    }

    #[test]
    fn refinement_lands_on_analytic_zero() {
        // h = 0, L = 4: cos^4 z + sin^4 z = 0 at tan z = e^{i pi/4}, i.e. t = pi/4, tanh tau = tan(pi/8)
        let p = ModelParams::with(4, 0.0, Boundary::Pbc);
        let g = ScanGrid {
            t_min: 0.0,
            t_max: PI / 2.0,
            nt: 41,
            tau_min: -PI / 4.0,
            tau_max: PI / 4.0,
            ntau: 41,
        };
        let fr = &complex_scan(&p, &g, &[ScanQuantity::PostSelectedRaw]).unwrap()[0];
        let zs = detect_zeros(fr, 0.6).unwrap();
        let tau_root = (PI / 8.0).tan().atanh();
        assert_eq!(zs.len(), 2, "{zs:?}");
        for z in &zs {
            assert!((z.refined.t - PI / 4.0).abs() < 1e-4, "{z:?}");
            assert!((z.refined.tau.abs() - tau_root).abs() < 1e-4, "{z:?}");
            assert!(z.refined_value < 0.05);
        }
    }

    #[test]
    fn slices() {
        let p = ModelParams::with(6, 0.2, Boundary::Pbc);
        let fr = &complex_scan(&p, &small_grid(), &[ScanQuantity::Moment(MomentIndex::Infinity)]).unwrap()[0];
        let s = slice(fr, SliceAxis::FixedT, PI / 4.0, false).unwrap();
        assert_eq!(s.values.len(), 17);
        assert!((s.line - PI / 4.0).abs() < 1e-12);
        assert!(!s.interpolated);
        let si = slice(fr, SliceAxis::FixedT, 0.3, true).unwrap();
        assert!(si.interpolated && si.line == 0.3);
        assert!(slice(fr, SliceAxis::FixedTau, 2.0, false).is_err());
    }
}
