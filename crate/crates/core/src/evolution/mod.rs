//! Real- and complex-time evolution of the quench state `|+...+>`.
//!
//! Two backends are provided: first-order Trotterization with the step
//! ordering `U(dt) = e^{i h X dt} e^{i J ZZ dt}` (ZZ phase first), and an
//! exact spectral propagator restricted to the symmetry sector of the initial
//! state (see [`spectral`]). Both accept complex times `z = t + i tau`, in
//! which case the state is no longer normalized.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bitstring, Boundary, ModelParams, ENUMERATION_CAP};
use crate::reduce::fixed_sum;

pub mod spectral;

pub use spectral::{exact_evolve, SpectralPropagator, EXACT_CAP};

const PAR_THRESHOLD: usize = 1 << 15;

/// Complex time `z = t + i tau`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexTime {
    pub t: f64,
    pub tau: f64,
}

impl ComplexTime {
    pub fn new(t: f64, tau: f64) -> Self {
        debug_assert!(t.is_finite() && tau.is_finite());
        ComplexTime { t, tau }
    }

    pub fn real(t: f64) -> Self {
        ComplexTime { t, tau: 0.0 }
    }

    pub fn as_complex(self) -> Complex64 {
        Complex64::new(self.t, self.tau)
    }

    pub fn from_complex(z: Complex64) -> Self {
        ComplexTime { t: z.re, tau: z.im }
    }

    pub fn abs(self) -> f64 {
        self.t.hypot(self.tau)
    }

    pub fn is_real(self) -> bool {
        self.tau == 0.0
    }
}

impl Add for ComplexTime {
    type Output = ComplexTime;
    fn add(self, o: ComplexTime) -> ComplexTime {
        ComplexTime::new(self.t + o.t, self.tau + o.tau)
    }
}

impl Mul<f64> for ComplexTime {
    type Output = ComplexTime;
    fn mul(self, s: f64) -> ComplexTime {
        ComplexTime::new(self.t * s, self.tau * s)
    }
}

impl fmt::Display for ComplexTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i", self.t, self.tau)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMode {
    Trotter,
    /// Full eigendecomposition; only for `L <= 14`.
    ExactSpectral,
}

impl EvolutionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EvolutionMode::Trotter => "trotter",
            EvolutionMode::ExactSpectral => "exact_spectral",
        }
    }

    /// Exact for chains the dense propagator supports, Trotter beyond.
    pub fn best_for(l: usize) -> Self {
        if l <= EXACT_CAP {
            EvolutionMode::ExactSpectral
        } else {
            EvolutionMode::Trotter
        }
    }
}

impl FromStr for EvolutionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trotter" => Ok(EvolutionMode::Trotter),
            "exact" | "exact_spectral" | "exact-spectral" => Ok(EvolutionMode::ExactSpectral),
            other => Err(Error::Input(format!("unknown evolution mode {other:?}"))),
        }
    }
}

/// `2^L` amplitudes in the Z basis (bit `j = 1` is spin down at site `j`).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    l: usize,
    norm_sqr: f64,
}

impl StateVector {
    pub fn from_amplitudes(l: usize, amps: Vec<Complex64>) -> Result<Self> {
        if l > ENUMERATION_CAP {
            return Err(Error::capacity("state vector length", l, ENUMERATION_CAP));
        }
        if amps.len() != 1usize << l {
            return Err(Error::Input(format!(
                "expected {} amplitudes for L = {l}, got {}",
                1usize << l,
                amps.len()
            )));
        }
        let mut s = StateVector { amps, l, norm_sqr: 0.0 };
        s.refresh_norm();
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    /// Cached squared norm.
    pub fn norm_sqr(&self) -> f64 {
        self.norm_sqr
    }

    pub fn refresh_norm(&mut self) {
        self.norm_sqr = fixed_sum(&self.amps, |a| a.norm_sqr());
    }

    /// Mutable access; the cached norm is refreshed when the guard closure returns.
    pub fn modify<F: FnOnce(&mut [Complex64])>(&mut self, f: F) {
        f(&mut self.amps);
        self.refresh_norm();
    }

    pub fn normalized(mut self) -> Self {
        let s = 1.0 / self.norm_sqr.sqrt();
        self.amps.par_iter_mut().for_each(|a| *a *= s);
        self.norm_sqr = 1.0;
        self
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.l, other.l);
        let re = fixed_sum_pairs(&self.amps, &other.amps, |a, b| (a.conj() * b).re);
        let im = fixed_sum_pairs(&self.amps, &other.amps, |a, b| (a.conj() * b).im);
        Complex64::new(re, im)
    }

    /// `|<a|b>|^2 / (<a|a><b|b>)`, insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr() / (self.norm_sqr * other.norm_sqr)
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        assert_eq!(self.l, other.l);
        fixed_sum_pairs(&self.amps, &other.amps, |a, b| (a - b).norm_sqr()).sqrt()
    }

    pub fn zz_phase_in_place(&mut self, params: &ModelParams, z: ComplexTime) {
        assert_eq!(self.l, params.l, "state length does not match the model");
        let l = self.l;
        let nb = params.bonds().len() as i64;
        let pbc = params.boundary == Boundary::Pbc;
        let open_mask = (1u64 << (l - 1)) - 1;
        // phase(B) for B = nb - 2 * walls, walls = 0..=nb
        let iz = Complex64::i() * params.j * z.as_complex();
        let table: Vec<Complex64> = (0..=nb).map(|w| (iz * (nb - 2 * w) as f64).exp()).collect();
        let walls = move |s: u64| -> usize {
            let mut w = ((s ^ (s >> 1)) & open_mask).count_ones();
            if pbc {
                w += (((s >> (l - 1)) ^ s) & 1) as u32;
            }
            w as usize
        };
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps
                .par_iter_mut()
                .enumerate()
                .for_each(|(s, a)| *a *= table[walls(s as u64)]);
        } else {
            for (s, a) in self.amps.iter_mut().enumerate() {
                *a *= table[walls(s as u64)];
            }
        }
        if !z.is_real() {
            self.refresh_norm();
        }
    }

    pub fn x_rotation_in_place(&mut self, h: f64, z: ComplexTime) {
        let hz = z.as_complex() * h;
        let c = hz.cos();
        let is = Complex64::i() * hz.sin();
        for j in 0..self.l {
            butterfly(&mut self.amps, 1 << j, |a, b| (c * a + is * b, is * a + c * b));
        }
        if !z.is_real() {
            self.refresh_norm();
        }
    }

    /// One step `e^{i h X z} e^{i J ZZ z}`.
    pub fn trotter_step_in_place(&mut self, params: &ModelParams, z: ComplexTime) {
        self.zz_phase_in_place(params, z);
        self.x_rotation_in_place(params.h, z);
    }
}

fn fixed_sum_pairs<F>(a: &[Complex64], b: &[Complex64], f: F) -> f64
where
    F: Fn(Complex64, Complex64) -> f64 + Sync,
{
    assert_eq!(a.len(), b.len());
    crate::reduce::fixed_sum_indexed(a, |i, x| f(*x, b[i]))
}

/// Applies a two-point kernel to every amplitude pair differing in the bit of
/// weight `stride`.
pub(crate) fn butterfly<F>(amps: &mut [Complex64], stride: usize, f: F)
where
    F: Fn(Complex64, Complex64) -> (Complex64, Complex64) + Sync,
{
    let kernel = |chunk: &mut [Complex64]| {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = f(*a, *b);
            *a = x;
            *b = y;
        }
    };
    if amps.len() < PAR_THRESHOLD {
        amps.chunks_mut(2 * stride).for_each(kernel);
    } else if amps.len() / (2 * stride) >= 64 {
        amps.par_chunks_mut(2 * stride).for_each(kernel);
    } else {
        for chunk in amps.chunks_mut(2 * stride) {
            let (lo, hi) = chunk.split_at_mut(stride);
            lo.par_iter_mut().zip(hi.par_iter_mut()).for_each(|(a, b)| {
                let (x, y) = f(*a, *b);
                *a = x;
                *b = y;
            });
        }
    }
}

/// In-place `H^{(x) L}`: the L-stage `(a+b)/sqrt2, (a-b)/sqrt2` butterfly.
pub(crate) fn hadamard_all(amps: &mut [Complex64], l: usize) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..l {
        butterfly(amps, 1 << j, |a, b| ((a + b) * r, (a - b) * r));
    }
}

/// `|+...+>`: every amplitude `2^{-L/2}`.
pub fn initial_plus_state(l: usize) -> Result<StateVector> {
    if !(2..=ENUMERATION_CAP).contains(&l) {
        return Err(if l > ENUMERATION_CAP {
            Error::capacity("chain length", l, ENUMERATION_CAP)
        } else {
            Error::Input(format!("chain length must be at least 2, got {l}"))
        });
    }
    let a = Complex64::new((-(l as f64) / 2.0 * std::f64::consts::LN_2).exp(), 0.0);
    StateVector::from_amplitudes(l, vec![a; 1 << l])
}

/// Multiplies each Z-basis amplitude by `exp(i J z B(s))`, `B(s) = sum_bonds s_j s_{j+1}`.
pub fn apply_zz_phase(mut state: StateVector, params: &ModelParams, z: ComplexTime) -> StateVector {
    state.zz_phase_in_place(params, z);
    state
}

/// Applies `e^{i h z X}` on every site.
pub fn apply_x_rotation(mut state: StateVector, h: f64, z: ComplexTime) -> StateVector {
    state.x_rotation_in_place(h, z);
    state
}

/// `U(z_step)^n_steps |+...+>`.
pub fn trotter_evolve(params: &ModelParams, n_steps: usize, z_step: ComplexTime) -> Result<StateVector> {
    params.validate()?;
    let mut psi = initial_plus_state(params.l)?;
    for _ in 0..n_steps {
        psi.trotter_step_in_place(params, z_step);
    }
    Ok(psi)
}

/// Number of Trotter steps used to reach `z` with steps no longer than `dt`.
pub fn trotter_steps_for(z: ComplexTime, dt: f64) -> usize {
    let r = z.abs() / dt;
    if r == 0.0 {
        0
    } else {
        ((r - 1e-9).ceil() as usize).max(1)
    }
}

/// Evolves `|+...+>` to complex time `z` with the chosen backend.
///
/// In Trotter mode `z` is split into `ceil(|z| / dt)` equal steps.
pub fn evolve(params: &ModelParams, z: ComplexTime, mode: EvolutionMode) -> Result<StateVector> {
    match mode {
        EvolutionMode::Trotter => {
            let n = trotter_steps_for(z, params.dt);
            let step = if n == 0 { z } else { z * (1.0 / n as f64) };
            trotter_evolve(params, n, step)
        }
        EvolutionMode::ExactSpectral => exact_evolve(params, z),
    }
}

/// Overlaps `<sigma|psi>` for every X-basis bitstring `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct XAmplitudes {
    amps: Vec<Complex64>,
    l: usize,
}

impl XAmplitudes {
    pub fn len(&self) -> usize {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn get(&self, sigma: Bitstring) -> Complex64 {
        assert_eq!(sigma.len(), self.l);
        self.amps[sigma.index() as usize]
    }

    /// Applies the butterfly again, which maps back to Z-basis amplitudes.
    pub fn to_z_basis(mut self) -> StateVector {
        hadamard_all(&mut self.amps, self.l);
        StateVector::from_amplitudes(self.l, self.amps).expect("length preserved")
    }

    pub(crate) fn into_inner(self) -> Vec<Complex64> {
        self.amps
    }
}

/// Z-to-X basis change in `O(L 2^L)`.
pub fn x_basis_transform(state: StateVector) -> XAmplitudes {
    let l = state.l;
    let mut amps = state.amps;
    hadamard_all(&mut amps, l);
    XAmplitudes { amps, l }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn random_state(l: usize, seed: u64) -> StateVector {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..1 << l)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        StateVector::from_amplitudes(l, amps).unwrap().normalized()
    }

    #[test]
    fn plus_state_amplitudes() {
        for (l, a) in [(2, 0.5), (4, 0.25)] {
            let s = initial_plus_state(l).unwrap();
            assert_eq!(s.dim(), 1 << l);
            assert!(s.amplitudes().iter().all(|x| (x.re - a).abs() < 1e-15 && x.im == 0.0));
            assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        }
        assert!(initial_plus_state(1).is_err());
        assert!(matches!(initial_plus_state(27), Err(Error::Capacity { .. })));
    }

    #[test]
    fn plus_state_is_delta_in_x_basis() {
        let x = x_basis_transform(initial_plus_state(6).unwrap());
        assert!((x.get(Bitstring::all_plus(6)) - 1.0).norm() < 1e-14);
        let rest: f64 = x.amplitudes()[1..].iter().map(|a| a.norm()).sum();
        assert!(rest < 1e-13);
    }

    #[test]
    fn transform_is_an_involution() {
        let s = random_state(7, 3);
        let back = x_basis_transform(s.clone()).to_z_basis();
        assert!(s.distance(&back) < 1e-12);
    }

    #[test]
    fn zero_time_is_identity() {
        let p = ModelParams::with(5, 0.3, Boundary::Pbc);
        let s = random_state(5, 1);
        let a = apply_zz_phase(s.clone(), &p, ComplexTime::default());
        let b = apply_x_rotation(s.clone(), 0.3, ComplexTime::default());
        assert!(a.distance(&s) < 1e-15 && b.distance(&s) < 1e-15);
        let c = apply_x_rotation(s.clone(), 0.0, ComplexTime::new(0.7, 0.2));
        assert!(c.distance(&s) < 1e-15);
    }

    #[test]
    fn single_bond_phase() {
        let p = ModelParams::with(2, 0.0, Boundary::Obc);
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[0] = Complex64::new(1.0, 0.0);
        let s = StateVector::from_amplitudes(2, amps).unwrap();
        let t = 0.37;
        let out = apply_zz_phase(s, &p, ComplexTime::real(t));
        assert!((out.amplitudes()[0] - Complex64::new(0.0, t).exp()).norm() < 1e-15);
    }

    #[test]
    fn quarter_turn_rotation_is_i_times_x() {
        let mut amps = vec![Complex64::new(0.6, 0.1), Complex64::new(-0.2, 0.7)];
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= n);
        let s = StateVector {
            amps: amps.clone(),
            l: 1,
            norm_sqr: 1.0,
        };
        let out = apply_x_rotation(s, 1.0, ComplexTime::real(PI / 2.0));
        let i = Complex64::i();
        assert!((out.amplitudes()[0] - i * amps[1]).norm() < 1e-15);
        assert!((out.amplitudes()[1] - i * amps[0]).norm() < 1e-15);
    }

    #[test]
    fn real_time_steps_preserve_norm() {
        let p = ModelParams::with(8, 0.2, Boundary::Pbc);
        let mut s = random_state(8, 9);
        for _ in 0..50 {
            s.trotter_step_in_place(&p, ComplexTime::real(0.1));
        }
        s.refresh_norm();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_step_changes_norm() {
        let p = ModelParams::with(4, 0.2, Boundary::Pbc);
        let s = trotter_evolve(&p, 4, ComplexTime::new(0.1, 0.05)).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() > 1e-6);
        let fresh = fixed_sum(s.amplitudes(), |a| a.norm_sqr());
        assert!((fresh - s.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn zero_steps_return_the_initial_state() {
        let p = ModelParams::with(5, 0.2, Boundary::Pbc);
        let s = trotter_evolve(&p, 0, ComplexTime::real(0.1)).unwrap();
        assert_eq!(s, initial_plus_state(5).unwrap());
    }

    #[test]
    fn step_counts() {
        let dt = PI / 160.0;
        assert_eq!(trotter_steps_for(ComplexTime::real(40.0 * dt), dt), 40);
        assert_eq!(trotter_steps_for(ComplexTime::real(40.5 * dt), dt), 41);
        assert_eq!(trotter_steps_for(ComplexTime::default(), dt), 0);
    }
}
