//! Born-rule ensemble over X-basis outcomes and its dynamical free energies.
//!
//! `P(sigma) = |<sigma|psi>|^2`, `f(sigma) = -ln P(sigma) / L`. Moment averages
//! `f_n` weight each level by `P^n`, so `n` plays the role of an inverse
//! temperature: `f_0` is the flat average over the support, `f_1` the Shannon
//! entropy per site and `f_inf` the lowest level.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{x_basis_transform, StateVector};
use crate::model::{Bitstring, Parity};
use crate::reduce::fixed_sum;
use crate::stats::linear_fit;

/// Probabilities at or below this count as zero for `f_0`, `f_inf` and `S_0`.
pub const SUPPORT_EPSILON: f64 = 1e-12;
/// Bootstrap resamples used by [`bootstrap`] callers by default.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Divided by `||psi||^2` so that the weights sum to one.
    Normalized,
    /// `|<sigma|psi>|^2` as-is; differs from normalized only at complex time.
    Raw,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::Normalized => "normalized",
            Normalization::Raw => "raw",
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normalized" => Ok(Normalization::Normalized),
            "raw" => Ok(Normalization::Raw),
            _ => Err(Error::Input(format!("unknown normalization {s:?} (normalized|raw)"))),
        }
    }
}

/// Dense distribution indexed by the integer encoding of each bitstring.
#[derive(Debug, Clone, PartialEq)]
pub struct BornDistribution {
    probs: Vec<f64>,
    l: usize,
    normalization: Normalization,
    support_epsilon: f64,
}

impl BornDistribution {
    /// Builds a distribution from explicit weights (length `2^l`).
    pub fn from_weights(l: usize, mut weights: Vec<f64>, normalization: Normalization) -> Result<Self> {
        if l == 0 || l > crate::model::ENUMERATION_CAP {
            return Err(Error::capacity("chain length for enumeration", l, crate::model::ENUMERATION_CAP));
        }
        if weights.len() != 1 << l {
            return Err(Error::Input(format!("expected {} weights, got {}", 1u64 << l, weights.len())));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::Input(format!("weights must be finite and non-negative, found {w}")));
        }
        if normalization == Normalization::Normalized {
            let total = fixed_sum(&weights, |w| *w);
            if total <= 0.0 {
                return Err(Error::Domain("cannot normalize an all-zero distribution".into()));
            }
            weights.par_iter_mut().for_each(|w| *w /= total);
        }
        Ok(BornDistribution {
            probs: weights,
            l,
            normalization,
            support_epsilon: SUPPORT_EPSILON,
        })
    }

    pub fn with_support_epsilon(mut self, eps: f64) -> Self {
        self.support_epsilon = eps;
        self
    }

    pub fn len(&self) -> usize {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn support_epsilon(&self) -> f64 {
        self.support_epsilon
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, sigma: Bitstring) -> f64 {
        assert_eq!(sigma.len(), self.l, "bitstring length mismatch");
        self.probs[sigma.index() as usize]
    }

    pub fn total_weight(&self) -> f64 {
        fixed_sum(&self.probs, |p| *p)
    }

    pub fn in_support(&self, sigma: Bitstring) -> bool {
        self.prob(sigma) > self.support_epsilon
    }

    pub fn support_size(&self) -> usize {
        self.probs.par_iter().filter(|p| **p > self.support_epsilon).count()
    }

    /// Support members in ascending integer order.
    pub fn support(&self) -> impl Iterator<Item = (Bitstring, f64)> + '_ {
        let (l, eps) = (self.l, self.support_epsilon);
        self.probs
            .iter()
            .enumerate()
            .filter(move |(_, p)| **p > eps)
            .map(move |(i, p)| (Bitstring::new(i as u64, l), *p))
    }

    /// Total probability on odd-parity strings.
    pub fn odd_parity_weight(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(i, _)| i.count_ones() % 2 == 1)
            .map(|(_, p)| p)
            .sum()
    }
}

/// `P(sigma) = |<sigma|psi>|^2` over all X-basis strings.
pub fn born_distribution(state: StateVector, normalization: Normalization) -> Result<BornDistribution> {
    let l = state.len();
    let amps = x_basis_transform(state).into_inner();
    let weights: Vec<f64> = amps.par_iter().map(|a| a.norm_sqr()).collect();
    BornDistribution::from_weights(l, weights, normalization)
}

/// `-ln P(sigma) / L`, or `+inf` when `P(sigma)` is at or below the support threshold.
pub fn free_energy(p: &BornDistribution, sigma: Bitstring) -> f64 {
    let w = p.prob(sigma);
    if w <= p.support_epsilon {
        f64::INFINITY
    } else {
        -w.ln() / p.l as f64
    }
}

/// Moment order `n >= 0` (real) or `infinity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentIndex {
    Finite(f64),
    Infinity,
}

impl MomentIndex {
    pub fn finite(n: f64) -> Result<Self> {
        if n.is_finite() && n >= 0.0 {
            Ok(MomentIndex::Finite(n))
        } else if n == f64::INFINITY {
            Ok(MomentIndex::Infinity)
        } else {
            Err(Error::Domain(format!("moment order must be >= 0, got {n}")))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            MomentIndex::Finite(n) => n,
            MomentIndex::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for MomentIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentIndex::Finite(n) => write!(f, "{n}"),
            MomentIndex::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for MomentIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "\u{221e}" => Ok(MomentIndex::Infinity),
            other => {
                let n: f64 = other
                    .parse()
                    .map_err(|_| Error::Input(format!("invalid moment order {s:?}")))?;
                MomentIndex::finite(n)
            }
        }
    }
}

/// `f_n` over the weights `ws` exceeding `eps`, evaluated in the log domain.
fn moment_over(ws: &[f64], eps: f64, l: usize, n: MomentIndex) -> Result<f64> {
    let max = ws.iter().copied().filter(|w| *w > eps).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::Domain("empty support".into()));
    }
    let lf = l as f64;
    let n = match n {
        MomentIndex::Infinity => return Ok(-max.ln() / lf),
        MomentIndex::Finite(n) => n,
    };
    let shift = n * max.ln();
    let weight = |w: f64| (n * w.ln() - shift).exp();
    let den = fixed_sum(ws, |w| if *w > eps { weight(*w) } else { 0.0 });
    let num = fixed_sum(ws, |w| if *w > eps { weight(*w) * (-w.ln() / lf) } else { 0.0 });
    Ok(num / den)
}

/// `f_n = sum P^n f / sum P^n` over the support; `f_inf = min f`.
pub fn moment_free_energy(p: &BornDistribution, n: MomentIndex) -> Result<f64> {
    moment_over(&p.probs, p.support_epsilon, p.l, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeResult {
    pub q: f64,
    pub s_q: f64,
    #[serde(rename = "L")]
    pub l: usize,
}

fn entropy_over(ws: &[f64], eps: f64, q: f64) -> f64 {
    if q == 0.0 {
        let k = ws.iter().filter(|w| **w > eps).count();
        return (k as f64).ln();
    }
    if q == 1.0 {
        return fixed_sum(ws, |w| if *w > eps { -w * w.ln() } else { 0.0 });
    }
    let max = ws.iter().copied().filter(|w| *w > eps).fold(f64::NEG_INFINITY, f64::max);
    let shift = q * max.ln();
    let s = fixed_sum(ws, |w| if *w > eps { (q * w.ln() - shift).exp() } else { 0.0 });
    (shift + s.ln()) / (1.0 - q)
}

/// Renyi participation entropy `S_q = ln(sum P^q) / (1 - q)` over the support.
///
/// `q = 1` is the Shannon entropy and `q = 0` the log of the support size.
pub fn participation_entropy(p: &BornDistribution, q: f64) -> Result<PeResult> {
    if !(q.is_finite() && q >= 0.0) {
        return Err(Error::Domain(format!("participation entropy needs q >= 0, got {q}")));
    }
    Ok(PeResult {
        q,
        s_q: entropy_over(&p.probs, p.support_epsilon, q),
        l: p.l,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultifractalFit {
    pub q: f64,
    pub d_q: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub sizes: Vec<usize>,
}

/// Least squares of `S_q` against `L` with a free intercept; `D_q = slope / ln 2`.
pub fn multifractal_fit(q: f64, points: &[(usize, f64)]) -> Result<MultifractalFit> {
    let mut sizes: Vec<usize> = points.iter().map(|p| p.0).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::Input(format!(
            "multifractal fit needs at least 3 distinct sizes, got {}",
            sizes.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(MultifractalFit {
        q,
        d_q: fit.slope / std::f64::consts::LN_2,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        sizes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub sigma: Bitstring,
    pub f: f64,
}

/// The extreme finite levels of `f(sigma)` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFrame {
    pub time: f64,
    /// Ascending in `f`; ties by integer encoding.
    pub levels: Vec<Level>,
    /// `f(+...+)`, possibly infinite.
    pub plus_f: f64,
}

impl SpectrumFrame {
    pub fn plus_rank(&self) -> Option<usize> {
        let plus = Bitstring::all_plus(self.levels.first()?.sigma.len());
        self.levels.iter().position(|lv| lv.sigma == plus)
    }
}

/// The `k` lowest and `k` highest finite levels (all of them when the support
/// has at most `2k` members).
pub fn spectrum_frame(p: &BornDistribution, time: f64, k: usize) -> Result<SpectrumFrame> {
    if k == 0 {
        return Err(Error::Input("spectrum frame needs k >= 1".into()));
    }
    let lf = p.l as f64;
    let mut all: Vec<(f64, u64)> = p
        .probs
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > p.support_epsilon)
        .map(|(i, w)| (-w.ln() / lf, i as u64))
        .collect();
    let cmp = |a: &(f64, u64), b: &(f64, u64)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if all.len() > 2 * k {
        all.select_nth_unstable_by(k, cmp);
        let tail_len = all.len() - k;
        all[k..].select_nth_unstable_by(tail_len - k, cmp);
        all.drain(k..all.len() - k);
    }
    all.sort_unstable_by(cmp);
    Ok(SpectrumFrame {
        time,
        levels: all
            .into_iter()
            .map(|(f, i)| Level {
                sigma: Bitstring::new(i, p.l),
                f,
            })
            .collect(),
        plus_f: free_energy(p, Bitstring::all_plus(p.l)),
    })
}

/// Relative tolerance under which two probabilities count as degenerate.
const TIE_TOL: f64 = 1e-12;

/// The most probable outcome; near-degenerate maxima resolve to the smallest encoding.
pub fn ground_bitstring(p: &BornDistribution) -> Result<Bitstring> {
    let max = p.probs.iter().copied().fold(0.0, f64::max);
    if max <= p.support_epsilon {
        return Err(Error::Domain("empty support".into()));
    }
    let i = p
        .probs
        .iter()
        .position(|w| *w >= max * (1.0 - TIE_TOL))
        .expect("maximum exists");
    Ok(Bitstring::new(i as u64, p.l))
}

/// Counts of `n` Born-rule draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub seed: u64,
    pub n: u64,
    pub l: usize,
    /// Keyed by integer encoding.
    pub counts: BTreeMap<u64, u64>,
}

impl SampleRecord {
    pub fn iter(&self) -> impl Iterator<Item = (Bitstring, u64)> + '_ {
        self.counts.iter().map(|(i, c)| (Bitstring::new(*i, self.l), *c))
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    fn frequencies(&self) -> Vec<f64> {
        self.counts.values().map(|c| *c as f64 / self.n as f64).collect()
    }
}

/// Cumulative table for inverse-CDF sampling.
struct Cdf {
    cum: Vec<f64>,
    keys: Vec<u64>,
}

impl Cdf {
    fn new(items: impl Iterator<Item = (u64, f64)>) -> Self {
        let mut acc = 0.0;
        let (mut cum, mut keys) = (Vec::new(), Vec::new());
        for (k, w) in items {
            acc += w;
            cum.push(acc);
            keys.push(k);
        }
        Cdf { cum, keys }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> u64 {
        let total = *self.cum.last().expect("non-empty table");
        let u = rng.gen::<f64>() * total;
        let i = self.cum.partition_point(|c| *c <= u).min(self.keys.len() - 1);
        self.keys[i]
    }
}

/// `n` independent draws from the support of `p`, reproducible from `seed`.
pub fn sample(p: &BornDistribution, n: u64, seed: u64) -> Result<SampleRecord> {
    if n == 0 {
        return Err(Error::Input("sample count must be >= 1".into()));
    }
    let eps = p.support_epsilon;
    let cdf = Cdf::new(
        p.probs
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > eps)
            .map(|(i, w)| (i as u64, *w)),
    );
    if cdf.keys.is_empty() {
        return Err(Error::Domain("empty support".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..n {
        *counts.entry(cdf.draw(&mut rng)).or_insert(0) += 1;
    }
    Ok(SampleRecord { seed, n, l: p.l, counts })
}

/// Plug-in estimate of `f_n` from empirical frequencies `count / N`.
pub fn estimate_from_samples(record: &SampleRecord, n: MomentIndex) -> Result<f64> {
    moment_over(&record.frequencies(), 0.0, record.l, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub resamples: usize,
}

/// Plug-in estimates of several moments with bootstrap standard errors.
///
/// Each of the `resamples` replicates redraws `N` outcomes from the observed
/// frequencies (a multinomial built from conditional binomials) and re-evaluates
/// every requested moment on the same replicate.
pub fn bootstrap(record: &SampleRecord, ns: &[MomentIndex], resamples: usize, seed: u64) -> Result<Vec<BootstrapEstimate>> {
    let estimates: Vec<f64> = ns.iter().map(|n| estimate_from_samples(record, *n)).collect::<Result<_>>()?;
    if resamples < 2 {
        return Ok(estimates
            .into_iter()
            .map(|estimate| BootstrapEstimate {
                estimate,
                std_error: f64::NAN,
                resamples,
            })
            .collect());
    }
    let keys: Vec<u64> = record.counts.keys().copied().collect();
    let freqs = record.frequencies();
    let replicates: Vec<Vec<f64>> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64 + 1);
            let mut counts = BTreeMap::new();
            let (mut left, mut mass) = (record.n, 1.0);
            for (k, p) in keys.iter().zip(&freqs) {
                if left == 0 {
                    break;
                }
                let c = if mass <= *p {
                    left
                } else {
                    Binomial::new(left, (p / mass).min(1.0)).expect("valid binomial").sample(&mut rng)
                };
                if c > 0 {
                    counts.insert(*k, c);
                }
                left -= c;
                mass -= p;
            }
            let rec = SampleRecord {
                seed,
                n: record.n,
                l: record.l,
                counts,
            };
            ns.iter().map(|n| estimate_from_samples(&rec, *n)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(estimates
        .into_iter()
        .enumerate()
        .map(|(i, estimate)| {
            let vals: Vec<f64> = replicates.iter().map(|r| r[i]).collect();
            let mean = vals.iter().sum::<f64>() / resamples as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;
            BootstrapEstimate {
                estimate,
                std_error: var.sqrt(),
                resamples,
            }
        })
        .collect())
}

/// True when every sampled bitstring has even parity.
pub fn samples_even(record: &SampleRecord) -> bool {
    record.iter().all(|(s, _)| s.parity() == Parity::Even)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{evolve, initial_plus_state, EvolutionMode};
    use crate::model::{enumerate_even, Boundary, ModelParams};
    use crate::ComplexTime;
    use proptest::prelude::*;
    use std::f64::consts::{LN_2, PI};

    fn uniform_over(l: usize, members: &[u64]) -> BornDistribution {
        let mut w = vec![0.0; 1 << l];
        for &m in members {
            w[m as usize] = 1.0;
        }
        BornDistribution::from_weights(l, w, Normalization::Normalized).unwrap()
    }

    fn evolved(l: usize, h: f64, b: Boundary, t: f64) -> BornDistribution {
        let p = ModelParams::with(l, h, b);
        let s = evolve(&p, ComplexTime::real(t), EvolutionMode::ExactSpectral).unwrap();
        born_distribution(s, Normalization::Normalized).unwrap()
    }

    const ALL_N: [MomentIndex; 6] = [
        MomentIndex::Finite(0.0),
        MomentIndex::Finite(0.5),
        MomentIndex::Finite(1.0),
        MomentIndex::Finite(2.0),
        MomentIndex::Finite(5.0),
        MomentIndex::Infinity,
    ];

    #[test]
    fn initial_state_is_a_delta() {
        let p = born_distribution(initial_plus_state(6).unwrap(), Normalization::Normalized).unwrap();
        assert!((p.prob(Bitstring::all_plus(6)) - 1.0).abs() < 1e-14);
        assert_eq!(p.support_size(), 1);
        for n in ALL_N {
            assert!(moment_free_energy(&p, n).unwrap().abs() < 1e-14);
        }
        assert_eq!(ground_bitstring(&p).unwrap(), Bitstring::all_plus(6));
        let frame = spectrum_frame(&p, 0.0, 5).unwrap();
        assert_eq!(frame.levels.len(), 1);
        assert!(frame.plus_f.abs() < 1e-14);
    }

    #[test]
    fn h0_closed_form_probability() {
        let p = evolved(4, 0.0, Boundary::Pbc, PI / 4.0);
        assert!((p.prob(Bitstring::all_plus(4)) - 0.25).abs() < 1e-12);
        let p = evolved(12, 0.0, Boundary::Pbc, PI / 4.0);
        let f = free_energy(&p, Bitstring::all_plus(12));
        assert!((f - 5.0 / 6.0 * LN_2).abs() < 1e-10);
    }

    #[test]
    fn odd_parity_weight_vanishes() {
        for t in [0.3, 1.1, 2.9] {
            let p = evolved(10, 0.2, Boundary::Pbc, t);
            assert!(p.odd_parity_weight() <= 1e-24);
            let p = evolved(9, 0.6, Boundary::Obc, t);
            assert!(p.odd_parity_weight() <= 1e-24);
        }
    }

    #[test]
    fn free_energy_values() {
        let mut w = vec![0.0; 1 << 12];
        w[0] = 1.0;
        let delta = BornDistribution::from_weights(12, w, Normalization::Normalized).unwrap();
        assert_eq!(free_energy(&delta, Bitstring::all_plus(12)), 0.0);
        assert!(free_energy(&delta, Bitstring::new(3, 12)).is_infinite());
        let flat = BornDistribution::from_weights(12, vec![1.0; 1 << 12], Normalization::Normalized).unwrap();
        assert!((free_energy(&flat, Bitstring::new(7, 12)) - LN_2).abs() < 1e-12);
    }

    #[test]
    fn uniform_distributions() {
        let members: Vec<u64> = [0u64, 3, 5, 6].to_vec();
        let p = uniform_over(3, &members);
        for n in ALL_N {
            assert!((moment_free_energy(&p, n).unwrap() - 4f64.ln() / 3.0).abs() < 1e-14);
        }
        let l = 8;
        let even: Vec<u64> = enumerate_even(l).unwrap().iter().map(|b| b.index()).collect();
        let p = uniform_over(l, &even);
        for q in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let s = participation_entropy(&p, q).unwrap().s_q;
            assert!((s - 7.0 * LN_2).abs() < 1e-12, "q = {q}");
        }
    }

    #[test]
    fn moment_ordering_and_identities() {
        let p = evolved(12, 0.2, Boundary::Pbc, 0.5);
        let f: Vec<f64> = ALL_N.iter().map(|n| moment_free_energy(&p, *n).unwrap()).collect();
        assert!(f.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{f:?}");
        let s1 = participation_entropy(&p, 1.0).unwrap().s_q;
        assert!((s1 - 12.0 * f[2]).abs() < 1e-10);
        assert!(f[2] <= 11.0 * LN_2 / 12.0);
        let s0 = participation_entropy(&p, 0.0).unwrap().s_q;
        assert_eq!(s0, (p.support_size() as f64).ln());
        let f64_ = moment_free_energy(&p, MomentIndex::Finite(64.0)).unwrap();
        assert!((f64_ - f[5]).abs() < 1e-3);
        assert!(moment_free_energy(&p, MomentIndex::Finite(1.5)).is_ok());
    }

    #[test]
    fn moment_index_parsing() {
        assert_eq!("inf".parse::<MomentIndex>().unwrap(), MomentIndex::Infinity);
        assert_eq!("\u{221e}".parse::<MomentIndex>().unwrap(), MomentIndex::Infinity);
        assert_eq!("2.5".parse::<MomentIndex>().unwrap(), MomentIndex::Finite(2.5));
        assert!("-1".parse::<MomentIndex>().is_err());
        assert!("x".parse::<MomentIndex>().is_err());
    }

    #[test]
    fn empty_support_is_a_domain_error() {
        let p = BornDistribution::from_weights(2, vec![1e-14, 0.0, 0.0, 0.0], Normalization::Raw).unwrap();
        assert!(matches!(moment_free_energy(&p, MomentIndex::Finite(1.0)), Err(Error::Domain(_))));
        assert!(ground_bitstring(&p).is_err());
    }

    #[test]
    fn multifractal_fits() {
        let pts: Vec<(usize, f64)> = [8, 10, 12, 14].iter().map(|&l| (l, 0.8 * l as f64 * LN_2)).collect();
        let fit = multifractal_fit(1.0, &pts).unwrap();
        assert!((fit.d_q - 0.8).abs() < 1e-12 && fit.intercept.abs() < 1e-12);
        let pts: Vec<(usize, f64)> = [6, 8, 10].iter().map(|&l| (l, (l as f64 - 1.0) * LN_2)).collect();
        let fit = multifractal_fit(2.0, &pts).unwrap();
        assert!((fit.d_q - 1.0).abs() < 1e-12 && (fit.intercept + LN_2).abs() < 1e-12);
        assert!(multifractal_fit(1.0, &[(8, 1.0), (10, 2.0), (10, 2.1)]).is_err());
    }

    #[test]
    fn spectrum_frames() {
        let p = evolved(12, 0.2, Boundary::Pbc, PI / 10.0);
        let frame = spectrum_frame(&p, PI / 10.0, 20).unwrap();
        assert_eq!(frame.levels.len(), 40);
        assert!(frame.levels.windows(2).all(|w| w[0].f <= w[1].f));
        assert_eq!(frame.levels[0].sigma, Bitstring::all_plus(12));
        assert_eq!(frame.plus_rank(), Some(0));
        let full = spectrum_frame(&p, PI / 10.0, 5000).unwrap();
        assert_eq!(full.levels.len(), p.support_size());
        assert_eq!(&full.levels[..20], &frame.levels[..20]);
        assert_eq!(&full.levels[full.levels.len() - 20..], &frame.levels[20..]);

        let p = evolved(12, 0.2, Boundary::Pbc, PI / 2.0);
        let frame = spectrum_frame(&p, PI / 2.0, 20).unwrap();
        assert!(frame.levels[1].f - frame.levels[0].f > 1e-3);
    }

    #[test]
    fn ground_bitstrings() {
        let p = evolved(12, 0.2, Boundary::Pbc, PI / 10.0);
        assert_eq!(ground_bitstring(&p).unwrap(), Bitstring::all_plus(12));
        let p = uniform_over(3, &[3, 5]);
        assert_eq!(ground_bitstring(&p).unwrap().index(), 3);
    }

    #[test]
    fn sampling_basics() {
        let mut w = vec![0.0; 16];
        w[5] = 1.0;
        let delta = BornDistribution::from_weights(4, w, Normalization::Normalized).unwrap();
        let rec = sample(&delta, 1000, 7).unwrap();
        assert_eq!(rec.counts.get(&5), Some(&1000));
        for n in ALL_N {
            assert_eq!(estimate_from_samples(&rec, n).unwrap(), 0.0);
        }

        let p = uniform_over(3, &[0, 3, 5, 6]);
        let rec = sample(&p, 40_000, 11).unwrap();
        assert_eq!(rec.counts.values().sum::<u64>(), 40_000);
        for c in rec.counts.values() {
            assert!((*c as f64 / 40_000.0 - 0.25).abs() < 0.01);
        }
        assert_eq!(rec, sample(&p, 40_000, 11).unwrap());
        assert_ne!(rec, sample(&p, 40_000, 12).unwrap());

        let p = evolved(10, 0.2, Boundary::Pbc, 0.8);
        let rec = sample(&p, 5000, 3).unwrap();
        assert!(samples_even(&rec));
        assert!(rec.iter().all(|(s, _)| p.in_support(s)));
    }

    #[test]
    fn sampled_estimates_converge() {
        let p = evolved(10, 0.2, Boundary::Pbc, 0.8);
        let exact = moment_free_energy(&p, MomentIndex::Finite(1.0)).unwrap();
        let err = |n: u64| -> f64 {
            (0..5)
                .map(|s| (estimate_from_samples(&sample(&p, n, s).unwrap(), MomentIndex::Finite(1.0)).unwrap() - exact).abs())
                .sum::<f64>()
                / 5.0
        };
        let errs: Vec<f64> = [2000, 4000, 8000, 16000, 32000].iter().map(|n| err(*n)).collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
        let f0 = moment_free_energy(&p, MomentIndex::Finite(0.0)).unwrap();
        for s in 0..5 {
            let est = estimate_from_samples(&sample(&p, 2000, s).unwrap(), MomentIndex::Finite(0.0)).unwrap();
            assert!(est <= f0);
        }
    }

    #[test]
    fn bootstrap_is_reproducible_and_positive() {
        let p = evolved(8, 0.2, Boundary::Pbc, 0.8);
        let rec = sample(&p, 4000, 1).unwrap();
        let ns = [MomentIndex::Finite(0.0), MomentIndex::Finite(1.0)];
        let a = bootstrap(&rec, &ns, 50, 9).unwrap();
        assert_eq!(a, bootstrap(&rec, &ns, 50, 9).unwrap());
        for (est, n) in a.iter().zip(ns) {
            assert!(est.std_error > 0.0 && est.std_error < 0.05, "{est:?}");
            assert_eq!(est.estimate, estimate_from_samples(&rec, n).unwrap());
        }
    }

    fn arb_distribution() -> impl Strategy<Value = BornDistribution> {
        prop::collection::vec(0.0f64..1.0, 32).prop_map(|mut w| {
            w[0] += 1e-3;
            BornDistribution::from_weights(5, w, Normalization::Normalized).unwrap()
        })
    }

    proptest! {
        #[test]
        fn moments_non_increasing(p in arb_distribution()) {
            let f: Vec<f64> = (0..=5).map(|n| moment_free_energy(&p, MomentIndex::Finite(n as f64)).unwrap()).collect();
            for w in f.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
            prop_assert!(moment_free_energy(&p, MomentIndex::Infinity).unwrap() <= f[5] + 1e-12);
        }

        #[test]
        fn entropies_non_increasing(p in arb_distribution()) {
            let s: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 5.0].iter().map(|q| participation_entropy(&p, *q).unwrap().s_q).collect();
            for w in s.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
            prop_assert!(s[4] >= 0.0);
        }

        #[test]
        fn normalized_sums_to_one(p in arb_distribution()) {
            prop_assert!((p.total_weight() - 1.0).abs() < 1e-10);
        }
    }
}
