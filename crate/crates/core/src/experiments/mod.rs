//! Pipelines that turn evolution and ensemble primitives into data sets:
//! time series, complex-time scans, finite-size scaling and sampling studies.

mod fss;
mod sampling;
mod scan;

pub use fss::{finite_size_study, snap_to_step, FitResult, FssQuantity, FssReport, FssSeries, FssPoint, WindowFit};
pub use sampling::{sampling_study, SamplingRow};
pub use scan::{
    complex_scan, detect_zeros, slice, HeatmapFrame, ScanEvaluator, ScanGrid, ScanQuantity, Slice, SliceAxis,
    ZeroCandidate, DEFAULT_ZERO_THRESHOLD,
};

use serde::Serialize;

use crate::cancel;
use crate::ensemble::{
    born_distribution, free_energy, ground_bitstring, moment_free_energy, participation_entropy, spectrum_frame,
    BornDistribution, MomentIndex, Normalization, SpectrumFrame,
};
use crate::error::{Error, Result};
use crate::evolution::{initial_plus_state, trotter_evolve, trotter_steps_for, ComplexTime, EvolutionMode, StateVector};
use crate::evolution::spectral::SpectralPropagator;
use crate::model::{Bitstring, ModelParams, TimeGrid};

/// Quantities evaluated at every time point of a series.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeriesRequest {
    /// `f(+...+)`.
    pub plus: bool,
    pub moments: Vec<MomentIndex>,
    /// Orders `q` of `S_q`.
    pub entropies: Vec<f64>,
    /// Number of lowest and highest levels kept per spectrum frame.
    pub spectrum_k: Option<usize>,
    pub ground: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub tau: f64,
    pub plus: Option<f64>,
    pub moments: Vec<f64>,
    pub entropies: Vec<f64>,
    pub spectrum: Option<SpectrumFrame>,
    pub ground: Option<Bitstring>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub mode: EvolutionMode,
    pub request: SeriesRequest,
    pub rows: Vec<SeriesRow>,
    /// Set when the run was interrupted before the last time point.
    pub truncated: bool,
}

fn measure(p: &BornDistribution, t: f64, tau: f64, req: &SeriesRequest) -> Result<SeriesRow> {
    Ok(SeriesRow {
        t,
        tau,
        plus: req.plus.then(|| free_energy(p, Bitstring::all_plus(p.len()))),
        moments: req
            .moments
            .iter()
            .map(|n| moment_free_energy(p, *n))
            .collect::<Result<_>>()?,
        entropies: req
            .entropies
            .iter()
            .map(|q| participation_entropy(p, *q).map(|r| r.s_q))
            .collect::<Result<_>>()?,
        spectrum: req.spectrum_k.map(|k| spectrum_frame(p, t, k)).transpose()?,
        ground: if req.ground { Some(ground_bitstring(p)?) } else { None },
    })
}

/// Real-time Trotter evolution to arbitrary `t >= 0`: `floor(t/dt)` full steps
/// followed by one shortened step for the remainder.
pub struct TrotterClock {
    params: ModelParams,
    state: StateVector,
    steps: usize,
}

impl TrotterClock {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(TrotterClock {
            params: *params,
            state: initial_plus_state(params.l)?,
            steps: 0,
        })
    }

    /// Number of full steps whose end lies at or before `t`.
    fn full_steps(&self, t: f64) -> usize {
        (t / self.params.dt + 1e-9).floor() as usize
    }

    /// State at time `t`; times must be visited in non-decreasing order.
    pub fn advance_to(&mut self, t: f64) -> Result<StateVector> {
        if t < 0.0 {
            return Err(Error::Input(format!("trotter series needs t >= 0, got {t}")));
        }
        let n = self.full_steps(t);
        if n < self.steps {
            return Err(Error::Input("trotter series times must be non-decreasing".into()));
        }
        let step = ComplexTime::real(self.params.dt);
        while self.steps < n {
            self.state.trotter_step_in_place(&self.params, step);
            self.steps += 1;
        }
        let rem = t - n as f64 * self.params.dt;
        if rem.abs() <= 1e-12 * t.max(1.0) {
            return Ok(self.state.clone());
        }
        let mut s = self.state.clone();
        s.trotter_step_in_place(&self.params, ComplexTime::real(rem));
        Ok(s)
    }
}

/// `e^{-iHz}|+...+>` in the requested mode. Trotter mode uses full steps of
/// `dt` plus one shortened step at real times, and `ceil(|z|/dt)` equal steps
/// at complex times.
pub fn evolve_to(params: &ModelParams, z: ComplexTime, mode: EvolutionMode) -> Result<StateVector> {
    match mode {
        EvolutionMode::ExactSpectral => Ok(SpectralPropagator::new(params)?.evolve(z)),
        EvolutionMode::Trotter if z.is_real() && z.t >= 0.0 => TrotterClock::new(params)?.advance_to(z.t),
        EvolutionMode::Trotter => {
            let n = trotter_steps_for(z, params.dt).max(1);
            trotter_evolve(params, n, z * (1.0 / n as f64))
        }
    }
}

/// Evaluates `req` on every point of `grid`.
///
/// Exact mode shares one eigendecomposition across points. Trotter mode
/// evolves incrementally along real time; complex points are evolved from
/// scratch.
pub fn time_series(params: &ModelParams, grid: &TimeGrid, req: &SeriesRequest, mode: EvolutionMode) -> Result<TimeSeries> {
    grid.validate()?;
    params.validate()?;
    let mut rows = Vec::with_capacity(grid.len());
    let mut truncated = false;
    let has_tau = grid.tau.as_ref().is_some_and(|t| t.iter().any(|x| *x != 0.0));

    let prop = match mode {
        EvolutionMode::ExactSpectral => Some(SpectralPropagator::new(params)?),
        EvolutionMode::Trotter => None,
    };
    let mut clock = match (mode, has_tau) {
        (EvolutionMode::Trotter, false) => Some(TrotterClock::new(params)?),
        _ => None,
    };
    for k in 0..grid.len() {
        if cancel::is_requested() {
            truncated = true;
            break;
        }
        let z = ComplexTime::new(grid.point(k), grid.tau_at(k));
        let state = match (&prop, &mut clock) {
            (Some(p), _) => p.evolve(z),
            (None, Some(c)) => c.advance_to(z.t)?,
            (None, None) => evolve_to(params, z, mode)?,
        };
        let dist = born_distribution(state, Normalization::Normalized)?;
        rows.push(measure(&dist, z.t, z.tau, req)?);
    }
    Ok(TimeSeries {
        mode,
        request: req.clone(),
        rows,
        truncated,
    })
}

/// Flat record for JSON reports.
#[derive(Debug, Clone, Serialize)]
pub struct GroundTrajectory {
    pub times: Vec<f64>,
    pub ground: Vec<String>,
}

impl TimeSeries {
    pub fn ground_trajectory(&self) -> GroundTrajectory {
        GroundTrajectory {
            times: self.rows.iter().map(|r| r.t).collect(),
            ground: self
                .rows
                .iter()
                .map(|r| r.ground.map(|g| g.to_string()).unwrap_or_default())
                .collect(),
        }
    }

    /// Column of `f_n` for the `i`-th requested moment.
    pub fn moment_column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.moments[i]).collect()
    }

    pub fn plus_column(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.plus.unwrap_or(f64::NAN)).collect()
    }
}

/// Indices of strict interior local maxima of a sampled curve.
pub fn local_maxima(ys: &[f64]) -> Vec<usize> {
    (1..ys.len().saturating_sub(1))
        .filter(|&i| ys[i] > ys[i - 1] && ys[i] >= ys[i + 1])
        .collect()
}
