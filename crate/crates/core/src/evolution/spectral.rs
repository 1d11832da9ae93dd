//! Exact propagation by eigendecomposition of H in the symmetry sector of `|+...+>`.
//!
//! `|+...+>` is invariant under the global spin flip, the mirror `j -> L-1-j`
//! and, under PBC, all translations. Since H commutes with this group the
//! evolved state never leaves the trivial-representation sector spanned by
//! normalized orbit sums `|r> = N_r^{-1/2} sum_{s in orbit(r)} |s>`. That sector
//! has dimension about `2^L / |G|`, so a dense real symmetric eigensolve is
//! cheap for every `L <= 14`.

use faer::{Col, Mat, Side};
use num_complex::Complex64;

use super::{ComplexTime, StateVector};
use crate::error::{Error, Result};
use crate::model::{Boundary, ModelParams};

/// Largest chain length accepted by the exact backend.
pub const EXACT_CAP: usize = 14;

/// Largest accepted eigenpair residual `||H v - lambda v||`.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

/// Cached eigendecomposition of H restricted to the symmetric sector.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    params: ModelParams,
    /// Sector index of every Z configuration.
    sector_of: Vec<u32>,
    /// Orbit size of every sector basis state.
    orbit: Vec<f64>,
    energies: Vec<f64>,
    vectors: Mat<f64>,
    /// Eigenbasis coefficients of `|+...+>`, all real.
    initial: Vec<f64>,
    hamiltonian: Mat<f64>,
}

impl SpectralPropagator {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let l = params.l;
        if l > EXACT_CAP {
            return Err(Error::Capacity {
                what: "chain length for exact_spectral mode",
                value: l,
                cap: EXACT_CAP,
                hint: "; use trotter mode for larger chains",
            });
        }
        let dim = 1usize << l;
        let group = symmetry_images(l, params.boundary);

        let mut sector_of = vec![u32::MAX; dim];
        let mut reps: Vec<u64> = Vec::new();
        let mut orbit: Vec<f64> = Vec::new();
        for s in 0..dim as u64 {
            if sector_of[s as usize] != u32::MAX {
                continue;
            }
            let idx = reps.len() as u32;
            let mut members: Vec<u64> = group.iter().map(|g| g(s)).collect();
            members.sort_unstable();
            members.dedup();
            for &m in &members {
                sector_of[m as usize] = idx;
            }
            reps.push(s);
            orbit.push(members.len() as f64);
        }
        let d = reps.len();

        let bonds = params.bonds();
        let mut hm = Mat::<f64>::zeros(d, d);
        for (r, &s) in reps.iter().enumerate() {
            let b: i64 = bonds
                .iter()
                .map(|&(i, j)| if ((s >> i) ^ (s >> j)) & 1 == 0 { 1 } else { -1 })
                .sum();
            hm.write(r, r, hm.read(r, r) - params.j * b as f64);
            for site in 0..l {
                let r2 = sector_of[(s ^ (1 << site)) as usize] as usize;
                hm.write(r2, r, hm.read(r2, r) - params.h * (orbit[r] / orbit[r2]).sqrt());
            }
        }
        let asym = (&hm - hm.transpose()).norm_max();
        if asym > 1e-12 {
            return Err(Error::Verification(format!(
                "sector Hamiltonian is not symmetric (max asymmetry {asym:e})"
            )));
        }
        let eig = hm.selfadjoint_eigendecomposition(Side::Lower);
        let vectors = eig.u().to_owned();
        let energies: Vec<f64> = (0..d).map(|n| eig.s().column_vector().read(n)).collect();
        let scale = (-(l as f64) / 2.0 * std::f64::consts::LN_2).exp();
        let psi0 = Col::<f64>::from_fn(d, |r| orbit[r].sqrt() * scale);
        let init = vectors.transpose() * &psi0;
        Ok(SpectralPropagator {
            params: *params,
            sector_of,
            orbit,
            energies,
            initial: (0..d).map(|n| init.read(n)).collect(),
            vectors,
            hamiltonian: hm,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn sector_dim(&self) -> usize {
        self.orbit.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Largest `||H v - lambda v||` over all eigenpairs.
    pub fn max_residual(&self) -> f64 {
        let hv = &self.hamiltonian * &self.vectors;
        (0..self.sector_dim())
            .map(|n| {
                let e = self.energies[n];
                (0..self.sector_dim())
                    .map(|r| (hv.read(r, n) - self.vectors.read(r, n) * e).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Multiplies eigenbasis coefficients by `e^{-i E_n z}`.
    fn phased(&self, coeffs: &[Complex64], z: ComplexTime) -> (Col<f64>, Col<f64>) {
        let zc = z.as_complex();
        let phased: Vec<Complex64> = coeffs
            .iter()
            .zip(&self.energies)
            .map(|(c, e)| c * (-Complex64::i() * e * zc).exp())
            .collect();
        (
            Col::from_fn(phased.len(), |n| phased[n].re),
            Col::from_fn(phased.len(), |n| phased[n].im),
        )
    }

    fn expand(&self, eig_re: &Col<f64>, eig_im: &Col<f64>) -> StateVector {
        let sec_re = &self.vectors * eig_re;
        let sec_im = &self.vectors * eig_im;
        let inv: Vec<f64> = self.orbit.iter().map(|n| 1.0 / n.sqrt()).collect();
        let amps = self
            .sector_of
            .iter()
            .map(|&r| {
                let r = r as usize;
                Complex64::new(sec_re.read(r), sec_im.read(r)) * inv[r]
            })
            .collect();
        StateVector::from_amplitudes(self.params.l, amps).expect("dimension matches")
    }

    /// `e^{-iHz} |+...+>`.
    pub fn evolve(&self, z: ComplexTime) -> StateVector {
        let coeffs: Vec<Complex64> = self.initial.iter().map(|c| Complex64::new(*c, 0.0)).collect();
        let (re, im) = self.phased(&coeffs, z);
        self.expand(&re, &im)
    }

    /// `<+...+| e^{-iHz} |+...+>` without building the state.
    pub fn return_amplitude(&self, z: ComplexTime) -> Complex64 {
        let zc = z.as_complex();
        self.initial
            .iter()
            .zip(&self.energies)
            .map(|(c, e)| c * c * (-Complex64::i() * e * zc).exp())
            .sum()
    }

    /// `||e^{-iHz} |+...+>||^2` without building the state.
    pub fn evolved_norm_sqr(&self, z: ComplexTime) -> f64 {
        self.initial
            .iter()
            .zip(&self.energies)
            .map(|(c, e)| c * c * (2.0 * e * z.tau).exp())
            .sum()
    }

    /// Applies `e^{-iHz}` to a state inside the symmetric sector.
    pub fn propagate(&self, state: &StateVector, z: ComplexTime) -> Result<StateVector> {
        if state.len() != self.params.l {
            return Err(Error::Input("state length does not match the propagator".into()));
        }
        let d = self.sector_dim();
        let mut sec = vec![Complex64::new(0.0, 0.0); d];
        for (s, a) in state.amplitudes().iter().enumerate() {
            sec[self.sector_of[s] as usize] += a;
        }
        for (c, n) in sec.iter_mut().zip(&self.orbit) {
            *c /= n.sqrt();
        }
        let kept: f64 = sec.iter().map(|c| c.norm_sqr()).sum();
        if (state.norm_sqr() - kept).abs() > 1e-10 * state.norm_sqr().max(1.0) {
            return Err(Error::Input(
                "state has weight outside the symmetry sector of |+...+>".into(),
            ));
        }
        let vt = self.vectors.transpose();
        let re = vt * Col::<f64>::from_fn(d, |r| sec[r].re);
        let im = vt * Col::<f64>::from_fn(d, |r| sec[r].im);
        let coeffs: Vec<Complex64> = (0..d).map(|n| Complex64::new(re.read(n), im.read(n))).collect();
        let (re, im) = self.phased(&coeffs, z);
        Ok(self.expand(&re, &im))
    }
}

type Image = Box<dyn Fn(u64) -> u64>;

/// Images of a configuration under every element of the symmetry group.
fn symmetry_images(l: usize, boundary: Boundary) -> Vec<Image> {
    let mask = (1u64 << l) - 1;
    let shifts: Vec<usize> = match boundary {
        Boundary::Pbc => (0..l).collect(),
        Boundary::Obc => vec![0],
    };
    let mut out: Vec<Image> = Vec::new();
    for &k in &shifts {
        for mirror in [false, true] {
            for flip in [false, true] {
                out.push(Box::new(move |s: u64| {
                    let mut x = if k == 0 { s } else { ((s << k) | (s >> (l - k))) & mask };
                    if mirror {
                        x = x.reverse_bits() >> (64 - l);
                    }
                    if flip {
                        x ^= mask;
                    }
                    x
                }));
            }
        }
    }
    out
}

/// `e^{-iH(t + i tau)} |+...+>` from a fresh eigendecomposition.
pub fn exact_evolve(params: &ModelParams, z: ComplexTime) -> Result<StateVector> {
    Ok(SpectralPropagator::new(params)?.evolve(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::initial_plus_state;

    #[test]
    fn zero_time_returns_the_initial_state() {
        let p = ModelParams::with(8, 0.2, Boundary::Pbc);
        let s = exact_evolve(&p, ComplexTime::default()).unwrap();
        assert!(s.distance(&initial_plus_state(8).unwrap()) < 1e-12);
    }

    #[test]
    fn unitarity_and_residuals() {
        for (l, b) in [(6, Boundary::Pbc), (7, Boundary::Obc), (10, Boundary::Pbc), (9, Boundary::Obc)] {
            let p = ModelParams::with(l, 0.35, b);
            let prop = SpectralPropagator::new(&p).unwrap();
            assert!(prop.max_residual() < EIGEN_RESIDUAL_TOL);
            for t in [0.3, 1.7, 5.0] {
                let s = prop.evolve(ComplexTime::real(t));
                assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sector_is_much_smaller_than_the_full_space() {
        let p = ModelParams::with(12, 0.2, Boundary::Pbc);
        let prop = SpectralPropagator::new(&p).unwrap();
        assert!(prop.sector_dim() < 200, "{}", prop.sector_dim());
    }

    #[test]
    fn reversibility() {
        let p = ModelParams::with(8, 0.2, Boundary::Obc);
        let prop = SpectralPropagator::new(&p).unwrap();
        let fwd = prop.evolve(ComplexTime::real(1.3));
        let back = prop.propagate(&fwd, ComplexTime::real(-1.3)).unwrap();
        assert!(back.fidelity(&initial_plus_state(8).unwrap()) >= 1.0 - 1e-10);
    }

    #[test]
    fn shortcut_amplitude_and_norm_agree_with_full_state() {
        let p = ModelParams::with(8, 0.2, Boundary::Pbc);
        let prop = SpectralPropagator::new(&p).unwrap();
        let z = ComplexTime::new(0.9, 0.3);
        let s = prop.evolve(z);
        let plus = initial_plus_state(8).unwrap();
        assert!((plus.inner(&s) - prop.return_amplitude(z)).norm() < 1e-12);
        assert!((s.norm_sqr() - prop.evolved_norm_sqr(z)).abs() < 1e-10 * s.norm_sqr());
    }

    #[test]
    fn rejects_states_outside_the_sector() {
        let p = ModelParams::with(4, 0.2, Boundary::Pbc);
        let prop = SpectralPropagator::new(&p).unwrap();
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        amps[1] = Complex64::new(1.0, 0.0);
        let s = StateVector::from_amplitudes(4, amps).unwrap();
        assert!(prop.propagate(&s, ComplexTime::real(0.1)).is_err());
    }

    #[test]
    fn capacity_error_suggests_trotter() {
        let p = ModelParams::with(15, 0.2, Boundary::Pbc);
        let err = SpectralPropagator::new(&p).unwrap_err();
        assert!(err.to_string().contains("trotter"));
    }
}
