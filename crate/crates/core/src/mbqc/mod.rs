//! Measurement-based realization of one Trotter step `e^{ihX dt} e^{iJ ZZ dt}`.
//!
//! Each step attaches one plaquette row of a Lieb-type cluster to the logical
//! register and measures it away:
//!
//! * a **bond-edge** ancilla per bond `(j, j+1)`, CZ-coupled to both sites and
//!   measured at `(theta, phi) = (-2J dt, pi/2)`, applies `e^{iJ dt Z_j Z_{j+1}}`
//!   (outcome 1 adds `Z_j Z_{j+1}`);
//! * the logical qubit itself, the **vertex**, is CZ-coupled to a fresh qubit
//!   and measured in X, teleporting `H` (outcome 1 adds `Z_j` before it);
//! * that fresh **upper-edge** qubit is CZ-coupled to another fresh qubit and
//!   measured at `(pi/2, 2h dt)`, teleporting `H e^{-i h dt Z}`, so the pair
//!   yields `e^{ih dt X_j}` (outcome 1 adds `X_j` after it).
//!
//! The simulation is streaming: at most `L + 1` qubits are alive at any time.
//! Bulk outcomes are exactly equiprobable, so without feedback the protocol is
//! a random circuit; [`ProtocolMode::Corrected`] tracks a Pauli frame and
//! adapts later angles so that the logical map is deterministic.

mod register;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{initial_plus_state, x_basis_transform, ComplexTime, StateVector};
use crate::model::{Bitstring, Boundary, ModelParams};
use register::{Choice, Register};

/// Largest logical width accepted by [`build_layout`].
pub const MBQC_WIDTH_CAP: usize = 10;
/// Largest logical width accepted by [`verify_equivalence`].
pub const VERIFY_CAP: usize = 6;

/// Outcome 0 projects onto `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasBasis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasBasis {
    pub fn new(theta: f64, phi: f64) -> Self {
        MeasBasis { theta, phi }
    }

    /// Outcome-0 and outcome-1 basis vectors.
    pub fn vectors(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        let e = Complex64::from_polar(1.0, self.phi);
        [[Complex64::new(c, 0.0), e * s], [Complex64::new(s, 0.0), -e * c]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Current logical qubit, measured in X.
    Vertex,
    BondEdge,
    UpperEdge,
    /// Unmeasured qubit that carries the register into the next step.
    Logical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutQubit {
    pub id: usize,
    pub role: Role,
    /// Site index, or bond index for bond edges.
    pub index: usize,
    pub basis: Option<MeasBasis>,
}

/// One plaquette row: qubit roles, CZ wiring and measurement bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLayout {
    #[serde(rename = "L")]
    pub l: usize,
    pub boundary: Boundary,
    pub bonds: Vec<(usize, usize)>,
    pub bond_basis: MeasBasis,
    pub vertex_basis: MeasBasis,
    pub upper_basis: MeasBasis,
    pub qubits: Vec<LayoutQubit>,
    pub cz: Vec<(usize, usize)>,
}

impl ClusterLayout {
    /// Bulk measurements per step.
    pub fn measured_per_step(&self) -> usize {
        self.bonds.len() + 2 * self.l
    }

    fn with_bases(mut self) -> Self {
        for q in &mut self.qubits {
            q.basis = match q.role {
                Role::Vertex => Some(self.vertex_basis),
                Role::BondEdge => Some(self.bond_basis),
                Role::UpperEdge => Some(self.upper_basis),
                Role::Logical => None,
            };
        }
        self
    }

    /// Replaces the bond-edge basis, e.g. to inject a calibration error.
    pub fn with_bond_basis(mut self, basis: MeasBasis) -> Self {
        self.bond_basis = basis;
        self.with_bases()
    }
}

/// Qubit ids: inputs `0..L`, bond edges `L..L+B`, upper edges, then outputs.
pub fn build_layout(params: &ModelParams) -> Result<ClusterLayout> {
    params.validate()?;
    let l = params.l;
    if l > MBQC_WIDTH_CAP {
        return Err(Error::capacity("logical width for the cluster layout", l, MBQC_WIDTH_CAP));
    }
    let bonds = params.bonds();
    let nb = bonds.len();
    let mut qubits = Vec::new();
    let mut cz = Vec::new();
    for j in 0..l {
        qubits.push(LayoutQubit { id: j, role: Role::Vertex, index: j, basis: None });
    }
    for (k, &(a, b)) in bonds.iter().enumerate() {
        qubits.push(LayoutQubit { id: l + k, role: Role::BondEdge, index: k, basis: None });
        cz.push((l + k, a));
        cz.push((l + k, b));
    }
    for j in 0..l {
        let (up, out) = (l + nb + j, 2 * l + nb + j);
        qubits.push(LayoutQubit { id: up, role: Role::UpperEdge, index: j, basis: None });
        cz.push((j, up));
        cz.push((up, out));
    }
    for j in 0..l {
        qubits.push(LayoutQubit { id: 2 * l + nb + j, role: Role::Logical, index: j, basis: None });
    }
    qubits.sort_by_key(|q| q.id);
    Ok(ClusterLayout {
        l,
        boundary: params.boundary,
        bonds,
        bond_basis: MeasBasis::new(-2.0 * params.j * params.dt, FRAC_PI_2),
        vertex_basis: MeasBasis::new(FRAC_PI_2, 0.0),
        upper_basis: MeasBasis::new(FRAC_PI_2, 2.0 * params.h * params.dt),
        qubits,
        cz,
    }
    .with_bases())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolMode {
    PostselectZero,
    Corrected,
    RandomCircuit,
}

impl ProtocolMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolMode::PostselectZero => "postselect_zero",
            ProtocolMode::Corrected => "corrected",
            ProtocolMode::RandomCircuit => "random_circuit",
        }
    }
}

impl FromStr for ProtocolMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "postselect_zero" | "postselect" => Ok(ProtocolMode::PostselectZero),
            "corrected" => Ok(ProtocolMode::Corrected),
            "random_circuit" | "random" => Ok(ProtocolMode::RandomCircuit),
            _ => Err(Error::Input(format!(
                "unknown protocol mode {s:?} (postselect_zero|corrected|random_circuit)"
            ))),
        }
    }
}

/// `i^phase * prod_j X_j^{x_j} Z_j^{z_j}` with X to the left of Z on each site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliString {
    pub l: usize,
    pub x: u64,
    pub z: u64,
    pub phase: u8,
}

impl PauliString {
    pub fn identity(l: usize) -> Self {
        PauliString { l, x: 0, z: 0, phase: 0 }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// `self * other`.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        // Z^a X^c = (-1)^{a.c} X^c Z^a
        let swaps = (self.z & other.x).count_ones() as u8;
        PauliString {
            l: self.l,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: (self.phase + other.phase + 2 * swaps) % 4,
        }
    }

    /// Applies the operator to Z-basis amplitudes.
    pub fn apply(&self, amps: &mut [Complex64]) {
        let ph = Complex64::i().powu(self.phase as u32);
        for (i, a) in amps.iter_mut().enumerate() {
            if ((i as u64) & self.z).count_ones() % 2 == 1 {
                *a = -*a;
            }
            *a *= ph;
        }
        if self.x != 0 {
            let x = self.x as usize;
            for i in 0..amps.len() {
                if i < i ^ x {
                    amps.swap(i, i ^ x);
                }
            }
        }
    }
}

impl fmt::Display for PauliString {
    /// Site 0 first; `Y` here denotes the product `XZ`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["+", "+i", "-", "-i"][self.phase as usize])?;
        for j in 0..self.l {
            let c = match ((self.x >> j) & 1, (self.z >> j) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'Y',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Outcomes of one step's bulk measurements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepOutcomes {
    pub bond: Vec<u8>,
    pub vertex: Vec<u8>,
    pub upper: Vec<u8>,
}

impl StepOutcomes {
    pub fn zeros(layout: &ClusterLayout) -> Self {
        StepOutcomes {
            bond: vec![0; layout.bonds.len()],
            vertex: vec![0; layout.l],
            upper: vec![0; layout.l],
        }
    }

    /// All patterns with exactly one outcome equal to 1.
    pub fn single_ones(layout: &ClusterLayout) -> Vec<StepOutcomes> {
        let mut out = Vec::new();
        for k in 0..layout.measured_per_step() {
            let mut o = StepOutcomes::zeros(layout);
            *o.slot_mut(k, layout.bonds.len()) = 1;
            out.push(o);
        }
        out
    }

    /// Outcome in measurement order: bonds, then vertex and upper edge per site.
    fn slot(&self, k: usize, nb: usize) -> u8 {
        if k < nb {
            self.bond[k]
        } else if (k - nb) % 2 == 0 {
            self.vertex[(k - nb) / 2]
        } else {
            self.upper[(k - nb) / 2]
        }
    }

    fn slot_mut(&mut self, k: usize, nb: usize) -> &mut u8 {
        if k < nb {
            &mut self.bond[k]
        } else if (k - nb) % 2 == 0 {
            &mut self.vertex[(k - nb) / 2]
        } else {
            &mut self.upper[(k - nb) / 2]
        }
    }

    /// Bits in measurement order packed into an integer (bit `k` = measurement `k`).
    pub fn pack(&self) -> u64 {
        let nb = self.bond.len();
        (0..nb + 2 * self.vertex.len()).fold(0, |acc, k| acc | (u64::from(self.slot(k, nb)) << k))
    }
}

/// Byproduct inserted by uncorrected outcomes:
/// the step acts as `e^{ihX dt} * P * e^{iJ ZZ dt}` up to a global phase.
pub fn byproduct(layout: &ClusterLayout, outcomes: &StepOutcomes) -> PauliString {
    let mut p = PauliString::identity(layout.l);
    for (&(a, b), &m) in layout.bonds.iter().zip(&outcomes.bond) {
        if m == 1 {
            p.z ^= (1 << a) ^ (1 << b);
        }
    }
    for j in 0..layout.l {
        if outcomes.vertex[j] == 1 {
            p.z ^= 1 << j;
        }
        if outcomes.upper[j] == 1 {
            p.x ^= 1 << j;
        }
    }
    p
}

/// Per-shot record of every bulk outcome and the final Pauli frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub seed: u64,
    pub shot: u64,
    pub steps: Vec<StepOutcomes>,
    /// Accumulated frame (identity outside corrected mode).
    pub frame: PauliString,
}

/// Counter-based outcome randomness: the uniform for measurement `k` of
/// step `s` in shot `n` depends only on `(seed, n, s, k)`.
struct OutcomeSource {
    rng: ChaCha8Rng,
    per_step: u128,
}

impl OutcomeSource {
    fn new(seed: u64, shot: u64, per_step: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot);
        OutcomeSource {
            rng,
            per_step: per_step as u128 + 1,
        }
    }

    fn uniform(&mut self, step: usize, k: usize) -> f64 {
        self.rng.set_word_pos((step as u128 * self.per_step + k as u128) * 2);
        self.rng.gen()
    }
}

fn shift_down(pos: &mut [usize], removed: usize) {
    for p in pos.iter_mut() {
        if *p > removed {
            *p -= 1;
        }
    }
}

/// One row of the cluster applied to `reg` (logical site `j` on qubit `j`).
fn run_step(
    reg: &mut Register,
    layout: &ClusterLayout,
    adapt: bool,
    frame: &mut PauliString,
    mut choose: impl FnMut(usize) -> Choice,
) -> StepOutcomes {
    let l = layout.l;
    let nb = layout.bonds.len();
    let mut out = StepOutcomes::zeros(layout);
    for (k, &(a, b)) in layout.bonds.iter().enumerate() {
        let anc = reg.add_plus();
        reg.cz(anc, a);
        reg.cz(anc, b);
        let mut basis = layout.bond_basis;
        if adapt && ((frame.x >> a) ^ (frame.x >> b)) & 1 == 1 {
            basis.theta = -basis.theta;
        }
        let (m, _) = reg.measure(anc, basis, choose(k));
        out.bond[k] = m;
        if adapt && m == 1 {
            frame.z ^= (1 << a) ^ (1 << b);
        }
    }
    let mut pos: Vec<usize> = (0..l).collect();
    for j in 0..l {
        let q = pos[j];
        let up = reg.add_plus();
        reg.cz(q, up);
        let (mv, _) = reg.measure(q, layout.vertex_basis, choose(nb + 2 * j));
        shift_down(&mut pos, q);
        let up = up - 1;
        let next = reg.add_plus();
        reg.cz(up, next);
        let mut basis = layout.upper_basis;
        if adapt && (((frame.z >> j) & 1) as u8 ^ mv) == 1 {
            basis.phi = -basis.phi;
        }
        let (mu, _) = reg.measure(up, basis, choose(nb + 2 * j + 1));
        shift_down(&mut pos, up);
        pos[j] = next - 1;
        out.vertex[j] = mv;
        out.upper[j] = mu;
        if adapt {
            frame.x ^= u64::from(mu) << j;
            frame.z ^= u64::from(mv) << j;
        }
    }
    reg.permute(&pos);
    out
}

fn to_register(state: &StateVector) -> Register {
    Register::from_amplitudes(state.len(), state.amplitudes().to_vec())
}

fn to_state(reg: Register) -> StateVector {
    StateVector::from_amplitudes(reg.n, reg.amps).expect("register width within cap")
}

fn check_width(state: &StateVector, layout: &ClusterLayout) -> Result<()> {
    if state.len() != layout.l {
        return Err(Error::Input(format!(
            "state has {} qubits but the layout expects {}",
            state.len(),
            layout.l
        )));
    }
    if layout.l > MBQC_WIDTH_CAP {
        return Err(Error::capacity("logical width for the cluster layout", layout.l, MBQC_WIDTH_CAP));
    }
    Ok(())
}

/// One step with Born-random (or forced-zero) outcomes drawn from `seed`.
///
/// In corrected mode the returned state is `frame * U(dt) * state`, where the
/// frame is part of the outcomes' byproduct bookkeeping and is returned too.
pub fn simulate_step(
    state: &StateVector,
    layout: &ClusterLayout,
    mode: ProtocolMode,
    seed: u64,
) -> Result<(StateVector, StepOutcomes, PauliString)> {
    check_width(state, layout)?;
    let mut reg = to_register(state);
    let mut frame = PauliString::identity(layout.l);
    let mut src = OutcomeSource::new(seed, 0, layout.measured_per_step());
    let out = run_step(&mut reg, layout, mode == ProtocolMode::Corrected, &mut frame, |k| match mode {
        ProtocolMode::PostselectZero => Choice::Forced(0),
        _ => Choice::Born(src.uniform(0, k)),
    });
    Ok((to_state(reg), out, frame))
}

/// One uncorrected step with every outcome post-selected to `outcomes`.
pub fn simulate_step_forced(state: &StateVector, layout: &ClusterLayout, outcomes: &StepOutcomes) -> Result<StateVector> {
    check_width(state, layout)?;
    let mut reg = to_register(state);
    let mut frame = PauliString::identity(layout.l);
    let nb = layout.bonds.len();
    run_step(&mut reg, layout, false, &mut frame, |k| Choice::Forced(outcomes.slot(k, nb)));
    Ok(to_state(reg))
}

/// Result of one shot.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    /// Boundary outcome after frame correction (equal to `raw_boundary` unless corrected).
    pub boundary: Bitstring,
    pub raw_boundary: Bitstring,
    pub record: OutcomeRecord,
}

fn sample_boundary(state: StateVector, u: f64) -> Bitstring {
    let l = state.len();
    let x = x_basis_transform(state);
    let probs: Vec<f64> = x.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    let total: f64 = probs.iter().sum();
    let mut acc = 0.0;
    let target = u * total;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if target < acc {
            return Bitstring::new(i as u64, l);
        }
    }
    Bitstring::new(probs.iter().rposition(|p| *p > 0.0).unwrap_or(0) as u64, l)
}

/// Shot `shot` of the seeded protocol on a prebuilt layout.
pub fn run_shot(layout: &ClusterLayout, steps: usize, mode: ProtocolMode, seed: u64, shot: u64) -> Result<ProtocolRun> {
    let mut reg = to_register(&initial_plus_state(layout.l)?);
    let mut frame = PauliString::identity(layout.l);
    let mut src = OutcomeSource::new(seed, shot, layout.measured_per_step());
    let mut record = Vec::with_capacity(steps);
    for s in 0..steps {
        let out = run_step(&mut reg, layout, mode == ProtocolMode::Corrected, &mut frame, |k| match mode {
            ProtocolMode::PostselectZero => Choice::Forced(0),
            _ => Choice::Born(src.uniform(s, k)),
        });
        record.push(out);
    }
    let u = src.uniform(steps, 0);
    let raw = sample_boundary(to_state(reg), u);
    let boundary = Bitstring::new(raw.index() ^ frame.z, layout.l);
    Ok(ProtocolRun {
        boundary,
        raw_boundary: raw,
        record: OutcomeRecord {
            seed,
            shot,
            steps: record,
            frame,
        },
    })
}

/// One shot of `steps` Trotter steps from `|+...+>` followed by an X-basis
/// readout of the logical register.
pub fn run_protocol(params: &ModelParams, steps: usize, mode: ProtocolMode, seed: u64) -> Result<ProtocolRun> {
    if steps == 0 {
        return Err(Error::Input("protocol needs at least one step".into()));
    }
    run_shot(&build_layout(params)?, steps, mode, seed, 0)
}

/// Boundary statistics over many shots.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotSummary {
    pub l: usize,
    pub shots: u64,
    pub mode: ProtocolMode,
    /// Counts keyed by bitstring encoding.
    pub counts: BTreeMap<u64, u64>,
    /// Packed first-step bulk outcomes per shot (see [`StepOutcomes::pack`]); random modes only.
    pub first_step_bulk: Vec<u64>,
}

impl ShotSummary {
    pub fn frequencies(&self) -> Vec<f64> {
        let mut f = vec![0.0; 1 << self.l];
        for (k, c) in &self.counts {
            f[*k as usize] = *c as f64 / self.shots as f64;
        }
        f
    }
}

/// `shots` independent shots; shot `n` uses stream `n` of the seeded generator.
///
/// Post-selected runs are deterministic, so the logical state is simulated once
/// and only the readout is repeated.
pub fn run_shots(params: &ModelParams, steps: usize, mode: ProtocolMode, shots: u64, seed: u64) -> Result<ShotSummary> {
    if steps == 0 || shots == 0 {
        return Err(Error::Input("protocol needs at least one step and one shot".into()));
    }
    let layout = build_layout(params)?;
    let per_shot: Vec<(u64, u64)> = if mode == ProtocolMode::PostselectZero {
        let state = to_state({
            let mut reg = to_register(&initial_plus_state(layout.l)?);
            let mut frame = PauliString::identity(layout.l);
            for _ in 0..steps {
                run_step(&mut reg, &layout, false, &mut frame, |_| Choice::Forced(0));
            }
            reg
        });
        (0..shots)
            .into_par_iter()
            .map(|n| {
                let mut src = OutcomeSource::new(seed, n, layout.measured_per_step());
                (sample_boundary(state.clone(), src.uniform(steps, 0)).index(), 0)
            })
            .collect()
    } else {
        (0..shots)
            .into_par_iter()
            .map(|n| run_shot(&layout, steps, mode, seed, n).map(|r| (r.boundary.index(), r.record.steps[0].pack())))
            .collect::<Result<_>>()?
    };
    let mut counts = BTreeMap::new();
    for (b, _) in &per_shot {
        *counts.entry(*b).or_insert(0) += 1;
    }
    Ok(ShotSummary {
        l: layout.l,
        shots,
        mode,
        counts,
        first_step_bulk: if mode == ProtocolMode::PostselectZero {
            Vec::new()
        } else {
            per_shot.into_iter().map(|(_, p)| p).collect()
        },
    })
}

/// Worst `1 - fidelity` found by [`verify_layout`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub trials: usize,
    /// All-zero outcomes against `U(dt)`.
    pub postselect_deficit: f64,
    /// Single-"1" outcomes against `e^{ihX dt} P e^{iJ ZZ dt}`.
    pub byproduct_deficit: f64,
    pub max_deficit: f64,
    pub patterns: usize,
}

fn random_state(l: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..1 << l)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    StateVector::from_amplitudes(l, amps).expect("width checked").normalized()
}

/// `e^{ihX dt} * P * e^{iJ ZZ dt}` applied directly.
fn target_map(params: &ModelParams, p: &PauliString, psi: &StateVector) -> StateVector {
    let dt = ComplexTime::real(params.dt);
    let mut s = psi.clone();
    s.zz_phase_in_place(params, dt);
    s.modify(|a| p.apply(a));
    s.x_rotation_in_place(params.h, dt);
    s
}

/// Compares `layout` against the direct unitary of `params` on random inputs.
pub fn verify_layout(layout: &ClusterLayout, params: &ModelParams, trials: usize, seed: u64) -> Result<VerifyReport> {
    if layout.l > VERIFY_CAP {
        return Err(Error::capacity("logical width for dense verification", layout.l, VERIFY_CAP));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let patterns = StepOutcomes::single_ones(layout);
    let (mut post, mut byp) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let psi = random_state(layout.l, &mut rng);
        let got = simulate_step_forced(&psi, layout, &StepOutcomes::zeros(layout))?;
        let want = target_map(params, &PauliString::identity(layout.l), &psi);
        post = post.max(1.0 - got.fidelity(&want));
        for pat in &patterns {
            let got = simulate_step_forced(&psi, layout, pat)?;
            let want = target_map(params, &byproduct(layout, pat), &psi);
            byp = byp.max(1.0 - got.fidelity(&want));
        }
    }
    Ok(VerifyReport {
        trials,
        postselect_deficit: post,
        byproduct_deficit: byp,
        max_deficit: post.max(byp),
        patterns: patterns.len(),
    })
}

/// [`verify_layout`] on the layout built from `params` (`L <= 6`).
pub fn verify_equivalence(params: &ModelParams, trials: usize, seed: u64) -> Result<VerifyReport> {
    if params.l > VERIFY_CAP {
        return Err(Error::capacity("logical width for dense verification", params.l, VERIFY_CAP));
    }
    verify_layout(&build_layout(params)?, params, trials, seed)
}
