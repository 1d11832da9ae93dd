//! Finite-shot estimates of `f_0` and `f_1` against the exact ensemble.

use serde::Serialize;

use super::evolve_to;
use crate::cancel;
use crate::ensemble::{bootstrap, born_distribution, moment_free_energy, sample, MomentIndex, Normalization, BOOTSTRAP_RESAMPLES};
use crate::error::{Error, Result};
use crate::evolution::{ComplexTime, EvolutionMode};
use crate::model::ModelParams;

/// Largest shot count accepted by [`sampling_study`].
pub const MAX_SHOTS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingRow {
    pub t: f64,
    /// `None` marks the exact (infinite-shot) row.
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub f0: f64,
    pub f0_err: f64,
    pub f1: f64,
    pub f1_err: f64,
    pub f0_exact: f64,
    pub f1_exact: f64,
}

/// For every time: one exact row, then one row per `(N, seed)` with plug-in
/// estimates and bootstrap errors.
pub fn sampling_study(params: &ModelParams, times: &[f64], shots: &[u64], seeds: &[u64], mode: EvolutionMode) -> Result<(Vec<SamplingRow>, bool)> {
    if let Some(n) = shots.iter().find(|n| **n == 0 || **n > MAX_SHOTS) {
        return Err(Error::Input(format!("shot counts must lie in 1..={MAX_SHOTS}, got {n}")));
    }
    let ns = [MomentIndex::Finite(0.0), MomentIndex::Finite(1.0)];
    let mut rows = Vec::new();
    for &t in times {
        if cancel::is_requested() {
            return Ok((rows, true));
        }
        let dist = born_distribution(evolve_to(params, ComplexTime::real(t), mode)?, Normalization::Normalized)?;
        let f0_exact = moment_free_energy(&dist, ns[0])?;
        let f1_exact = moment_free_energy(&dist, ns[1])?;
        rows.push(SamplingRow {
            t,
            shots: None,
            seed: None,
            f0: f0_exact,
            f0_err: 0.0,
            f1: f1_exact,
            f1_err: 0.0,
            f0_exact,
            f1_exact,
        });
        for &n in shots {
            for &seed in seeds {
                let rec = sample(&dist, n, seed)?;
                let est = bootstrap(&rec, &ns, BOOTSTRAP_RESAMPLES, seed ^ 0x5eed_b007)?;
                rows.push(SamplingRow {
                    t,
                    shots: Some(n),
                    seed: Some(seed),
                    f0: est[0].estimate,
                    f0_err: est[0].std_error,
                    f1: est[1].estimate,
                    f1_err: est[1].std_error,
                    f0_exact,
                    f1_exact,
                });
            }
        }
    }
    Ok((rows, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Boundary;

    #[test]
    fn exact_rows_and_support_bound() {
        let p = ModelParams::with(8, 0.2, Boundary::Pbc);
        let (rows, truncated) = sampling_study(&p, &[0.4, 0.8], &[500, 2000], &[1, 2], EvolutionMode::ExactSpectral).unwrap();
        assert!(!truncated);
        assert_eq!(rows.len(), 2 * (1 + 4));
        for r in &rows {
            assert!(r.f0 <= r.f0_exact + 1e-12);
            if r.shots.is_none() {
                assert_eq!((r.f0, r.f1), (r.f0_exact, r.f1_exact));
            } else {
                assert!(r.f1_err > 0.0);
            }
        }
        assert!(sampling_study(&p, &[0.4], &[0], &[1], EvolutionMode::ExactSpectral).is_err());
    }
}
