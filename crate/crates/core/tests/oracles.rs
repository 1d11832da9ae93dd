//! Independent dense-matrix oracles for the evolution backends.
//!
//! The reference propagator is a scaling-and-squaring Taylor series of the full
//! `2^L x 2^L` Hamiltonian, sharing no code with the crate.

use approx::assert_abs_diff_eq;
use born_dqpt::analytic::{rate_fn_finite, rate_fn_h0_obc};
use born_dqpt::ensemble::{born_distribution, free_energy, Normalization};
use born_dqpt::evolution::{evolve, initial_plus_state, trotter_evolve, x_basis_transform};
use born_dqpt::{Bitstring, Boundary, ComplexTime, EvolutionMode, ModelParams, StateVector};
use num_complex::Complex64;

type Mat = Vec<Vec<Complex64>>;

fn zero(d: usize) -> Mat {
    vec![vec![Complex64::new(0.0, 0.0); d]; d]
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    let mut c = zero(d);
    for i in 0..d {
        for k in 0..d {
            let aik = a[i][k];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

fn matvec(a: &Mat, v: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn expm(a: &Mat) -> Mat {
    let d = a.len();
    let norm = a.iter().map(|r| r.iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max);
    let s = (norm.max(1e-300).log2().ceil() as i32 + 1).max(0);
    let scale = 0.5f64.powi(s);
    let a: Mat = a.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect();
    let mut result = zero(d);
    let mut term = zero(d);
    for i in 0..d {
        result[i][i] = Complex64::new(1.0, 0.0);
        term[i][i] = Complex64::new(1.0, 0.0);
    }
    for k in 1..=30 {
        term = matmul(&term, &a);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= k as f64;
            }
        }
        for i in 0..d {
            for j in 0..d {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        result = matmul(&result, &result);
    }
    result
}

fn bonds(p: &ModelParams) -> Vec<(usize, usize)> {
    let l = p.l;
    let n = if p.boundary == Boundary::Pbc { l } else { l - 1 };
    (0..n).map(|j| (j, (j + 1) % l)).collect()
}

/// Ising part and field part of `H` as dense matrices.
fn hamiltonian_parts(p: &ModelParams) -> (Mat, Mat) {
    let d = 1 << p.l;
    let mut zz = zero(d);
    let mut x = zero(d);
    for s in 0..d {
        for (a, b) in bonds(p) {
            let sign = if ((s >> a) ^ (s >> b)) & 1 == 0 { 1.0 } else { -1.0 };
            zz[s][s] += -p.j * sign;
        }
        for j in 0..p.l {
            x[s ^ (1 << j)][s] += -p.h;
        }
    }
    (zz, x)
}

/// `e^{-i A z}` for a dense Hermitian `A`.
fn propagator(a: &Mat, z: ComplexTime) -> Mat {
    let f = -Complex64::i() * z.as_complex();
    expm(&a.iter().map(|r| r.iter().map(|x| x * f).collect()).collect())
}

fn dense_state(p: &ModelParams, z: ComplexTime) -> StateVector {
    let (zz, x) = hamiltonian_parts(p);
    let h: Mat = zz.iter().zip(&x).map(|(a, b)| a.iter().zip(b).map(|(u, v)| u + v).collect()).collect();
    let psi0 = initial_plus_state(p.l).unwrap();
    StateVector::from_amplitudes(p.l, matvec(&propagator(&h, z), psi0.amplitudes())).unwrap()
}

fn born(s: StateVector) -> Vec<f64> {
    born_distribution(s, Normalization::Normalized).unwrap().probabilities().to_vec()
}

#[test]
fn exact_backend_matches_dense_propagator() {
    for (l, boundary) in [(4, Boundary::Pbc), (5, Boundary::Obc), (6, Boundary::Pbc), (7, Boundary::Obc)] {
        for h in [0.2, 0.7, 1.3] {
            let p = ModelParams::with(l, h, boundary);
            for z in [ComplexTime::real(0.37), ComplexTime::real(2.9), ComplexTime::new(1.1, 0.3), ComplexTime::new(0.6, -0.45)] {
                let want = dense_state(&p, z);
                let got = evolve(&p, z, EvolutionMode::ExactSpectral).unwrap();
                assert!(1.0 - got.fidelity(&want) <= 1e-10, "L={l} h={h} z={z}");
                for (a, b) in born(got).iter().zip(born(want)) {
                    assert_abs_diff_eq!(*a, b, epsilon = 1e-10);
                }
            }
        }
    }
}

#[test]
fn trotter_step_is_the_ordered_product() {
    let p = ModelParams::new(5, 1.0, 0.45, Boundary::Pbc, 0.05).unwrap();
    let (zz, x) = hamiltonian_parts(&p);
    let z = ComplexTime::real(p.dt);
    let step = matmul(&propagator(&x, z), &propagator(&zz, z));
    let psi0 = initial_plus_state(5).unwrap();
    let mut want = psi0.amplitudes().to_vec();
    for _ in 0..3 {
        want = matvec(&step, &want);
    }
    let got = trotter_evolve(&p, 3, z).unwrap();
    for (a, b) in got.amplitudes().iter().zip(&want) {
        assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
        assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
    }
}

#[test]
fn trotter_error_is_first_order() {
    let t = 1.2;
    let base = ModelParams::with(6, 0.6, Boundary::Pbc);
    let exact = dense_state(&base, ComplexTime::real(t));
    let err = |dt: f64| {
        let p = ModelParams { dt, ..base };
        evolve(&p, ComplexTime::real(t), EvolutionMode::Trotter).unwrap().distance(&exact)
    };
    let (e1, e2, e3) = (err(0.04), err(0.02), err(0.01));
    for ratio in [e1 / e2, e2 / e3] {
        assert!((1.8..2.2).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn butterfly_matches_dense_hadamards() {
    let l = 4;
    let p = ModelParams::with(l, 0.3, Boundary::Obc);
    let psi = dense_state(&p, ComplexTime::real(0.8));
    let d = 1 << l;
    let scale = (d as f64).sqrt().recip();
    let x = x_basis_transform(psi.clone());
    for sigma in 0..d {
        let want: Complex64 = (0..d)
            .map(|s| {
                let sign = if (s & sigma as usize).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                psi.amplitudes()[s] * sign * scale
            })
            .sum();
        let got = x.get(Bitstring::new(sigma as u64, l));
        assert_abs_diff_eq!(got.re, want.re, epsilon = 1e-13);
        assert_abs_diff_eq!(got.im, want.im, epsilon = 1e-13);
    }
}

#[test]
fn closed_forms_match_dense_evolution() {
    for h in [0.0, 0.35, 1.4] {
        let p = ModelParams::with(6, h, Boundary::Pbc);
        for t in [0.3, 0.9, 2.2] {
            let z = ComplexTime::real(t);
            let d = born_distribution(dense_state(&p, z), Normalization::Normalized).unwrap();
            let f = free_energy(&d, Bitstring::all_plus(6));
            assert_abs_diff_eq!(f, rate_fn_finite(z, 1.0, h, 6).unwrap(), epsilon = 1e-9);
        }
    }
    let p = ModelParams::with(6, 0.0, Boundary::Obc);
    for t in [0.4, 1.0, 2.5] {
        let d = born_distribution(dense_state(&p, ComplexTime::real(t)), Normalization::Normalized).unwrap();
        assert_abs_diff_eq!(free_energy(&d, Bitstring::all_plus(6)), rate_fn_h0_obc(t, 6), epsilon = 1e-10);
    }
}

#[test]
fn odd_parity_is_never_populated() {
    let p = ModelParams::with(7, 0.8, Boundary::Obc);
    let d = born_distribution(evolve(&p, ComplexTime::real(1.7), EvolutionMode::Trotter).unwrap(), Normalization::Normalized).unwrap();
    assert!(d.odd_parity_weight() < 1e-24);
}
