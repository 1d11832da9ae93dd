//! Free-fermion closed forms for the quench `|+...+> -> e^{-iHz}|+...+>`.
//!
//! Under Jordan-Wigner the even-parity sector of the PBC chain is a free
//! fermion chain with antiperiodic momenta `k_m = (2m+1) pi / L`. Each pair
//! `(k, -k)` contributes a factor `cos^2 phi_k + sin^2 phi_k e^{-2i eps_k z}`
//! to the return amplitude. Fields are measured in units of `|J|`: the
//! dispersion is `eps(k) = 2|J| sqrt((g - cos k)^2 + sin^2 k)` with `g = h/|J|`.
//! The sign of `J` does not change X-basis statistics of `|+...+>`.

use std::f64::consts::PI;

use num_complex::Complex64;
use crate::error::{Error, Result};
use crate::evolution::ComplexTime;
use crate::quadrature::{integrate, Quadrature};

/// Absolute tolerance of the thermodynamic-limit quadrature.
pub const QUAD_TOL: f64 = 1e-8;
/// Evaluation cap of the thermodynamic-limit quadrature.
pub const QUAD_MAX_EVALS: usize = 1 << 20;
/// Magnitudes below this are clamped before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-300;
/// Default bound on `|tau|` accepted by [`rate_fn_thermo`].
pub const TAU_MAX: f64 = PI;
/// Safety factor `c` in `n_min = c / (L df)`.
pub const MOMENT_SAFETY: f64 = 10.0;

/// Quasiparticle energy `eps_h(k)`.
pub fn dispersion(k: f64, j: f64, h: f64) -> f64 {
    let g = h / j.abs();
    2.0 * j.abs() * ((g - k.cos()).powi(2) + k.sin().powi(2)).sqrt()
}

/// Bogoliubov angle `theta_h(k)` and `phi_k = -theta_h(k)`.
///
/// `theta = atan2(sin k, h - cos k) / 2` is continuous on `(0, pi)` and lies in
/// `[0, pi/2]`; it equals `pi/4` where `h = cos k`. For `h < 1` it tends to
/// `pi/2` as `k -> 0` and to `0` as `k -> pi`.
pub fn bogoliubov_angle(k: f64, h: f64) -> (f64, f64) {
    let theta = 0.5 * k.sin().atan2(h - k.cos());
    (theta, -theta)
}

fn pair_factor(k: f64, j: f64, h: f64, z: Complex64) -> Complex64 {
    let (_, phi) = bogoliubov_angle(k, h / j.abs());
    let (c2, s2) = (phi.cos().powi(2), phi.sin().powi(2));
    let eps = dispersion(k, j, h);
    c2 + s2 * (-2.0 * Complex64::i() * eps * z).exp()
}

fn log_abs(w: Complex64) -> f64 {
    w.norm().max(LOG_FLOOR).ln()
}

/// Antiperiodic momenta `(2m+1) pi / L`, `m = 0 .. L/2 - 1`.
pub fn antiperiodic_momenta(l: usize) -> Vec<f64> {
    (0..l / 2).map(|m| (2 * m + 1) as f64 * PI / l as f64).collect()
}

/// Thermodynamic-limit rate function with its quadrature diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoRate {
    pub value: f64,
    pub quadrature: Quadrature,
}

impl ThermoRate {
    /// False when the quadrature hit its evaluation cap (typically on a zero line).
    pub fn converged(&self) -> bool {
        self.quadrature.converged
    }
}

/// `f = -2 Re int_0^pi dk/(2 pi) ln[cos^2 phi + sin^2 phi e^{-2i eps z}]`.
pub fn rate_fn_thermo(z: ComplexTime, j: f64, h: f64) -> Result<ThermoRate> {
    if z.tau.abs() > TAU_MAX {
        return Err(Error::Domain(format!("|tau| = {} exceeds {TAU_MAX}", z.tau.abs())));
    }
    let zc = z.as_complex();
    let q = integrate(|k| log_abs(pair_factor(k, j, h, zc)), 0.0, PI, QUAD_TOL * PI, QUAD_MAX_EVALS);
    Ok(ThermoRate {
        value: -q.value / PI,
        quadrature: q,
    })
}

/// Finite-L rate function from the antiperiodic momentum sum,
/// `-(2/L) Re sum_m ln[...]`.
///
/// For real times this is `-(1/L) ln P(+...+)` of the PBC chain. For complex
/// times it omits the ground-state factor `|e^{-i E_0 z}|^2`; see
/// [`rate_fn_finite_raw`].
pub fn rate_fn_finite(z: ComplexTime, j: f64, h: f64, l: usize) -> Result<f64> {
    if l == 0 || l % 2 != 0 {
        return Err(Error::Input(format!("finite-size rate function needs even L, got {l}")));
    }
    let zc = z.as_complex();
    let s: f64 = antiperiodic_momenta(l)
        .into_iter()
        .map(|k| log_abs(pair_factor(k, j, h, zc)))
        .sum();
    Ok(-2.0 * s / l as f64)
}

/// `-(1/L) ln |<+...+|e^{-iHz}|+...+>|^2` including the ground-state
/// energy `E_0 = -sum_{k>0} eps_k`, which matters only off the real axis.
pub fn rate_fn_finite_raw(z: ComplexTime, j: f64, h: f64, l: usize) -> Result<f64> {
    let base = rate_fn_finite(z, j, h, l)?;
    let e0: f64 = -antiperiodic_momenta(l).into_iter().map(|k| dispersion(k, j, h)).sum::<f64>();
    Ok(base - 2.0 * e0 * z.tau / l as f64)
}

/// `<+...+|e^{-iHz}|+...+>` at `h = 0` under PBC: `cos^L(Jz) + (i sin(Jz))^L`.
pub fn loschmidt_amplitude_h0_pbc(z: ComplexTime, j: f64, l: usize) -> Complex64 {
    let jz = z.as_complex() * j;
    let n = l as i32;
    jz.cos().powi(n) + (Complex64::i() * jz.sin()).powi(n)
}

/// `h = 0` PBC closed form `-(2/L) ln|cos^L t + i^L sin^L t|` (with `J = 1`).
///
/// For `L` divisible by four this is `-(2/L) ln|cos^L t + sin^L t|`, with
/// maxima `ln 2 - ln 4 / L` at `t = pi/4 + m pi/2`. For `L = 2 mod 4` the
/// bracket is `cos^L t - sin^L t` and vanishes on the real axis at those times,
/// giving an infinite value.
pub fn rate_fn_h0_pbc(t: f64, l: usize) -> f64 {
    let a = loschmidt_amplitude_h0_pbc(ComplexTime::real(t), 1.0, l).norm();
    if a == 0.0 {
        f64::INFINITY
    } else {
        -2.0 * a.ln() / l as f64
    }
}

/// `h = 0` OBC closed form `-(2(L-1)/L) ln|cos t|`; infinite at `t = pi/2 + m pi`.
pub fn rate_fn_h0_obc(t: f64, l: usize) -> f64 {
    let c = t.cos().abs();
    if c < 1e-15 {
        f64::INFINITY
    } else {
        -2.0 * (l as f64 - 1.0) / l as f64 * c.ln()
    }
}

/// A Yang-Lee-Fisher zero of the pair factor at momentum `k`.
///
/// `z` is `[ln tan^2 phi + i pi (2m+1)] / (2 eps)` in the variable where the
/// amplitude reads `e^{-zH}`, i.e. `z = i (t + i tau)`. Use
/// [`ZeroLine::complex_time`] for the corresponding point of the `(t, tau)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroLine {
    pub m: i64,
    pub k: f64,
    pub z: Complex64,
}

impl ZeroLine {
    /// `t = Im z`, `tau = -Re z`.
    pub fn complex_time(&self) -> ComplexTime {
        ComplexTime::new(self.z.im, -self.z.re)
    }
}

pub fn ylf_zero(m: i64, k: f64, j: f64, h: f64) -> Result<ZeroLine> {
    let (_, phi) = bogoliubov_angle(k, h / j.abs());
    let tan2 = phi.tan().powi(2);
    if !(1e-24..=1e24).contains(&tan2) {
        return Err(Error::Pole(format!("tan phi_k is zero or singular at k = {k}")));
    }
    let eps = dispersion(k, j, h);
    let z = Complex64::new(tan2.ln(), PI * (2 * m + 1) as f64) / (2.0 * eps);
    Ok(ZeroLine { m, k, z })
}

/// Exact zeros of the finite-L PBC return amplitude: one per antiperiodic
/// momentum and branch index `m` in `ms`.
pub fn finite_size_zeros(l: usize, j: f64, h: f64, ms: std::ops::RangeInclusive<i64>) -> Vec<ZeroLine> {
    let mut out = Vec::new();
    for k in antiperiodic_momenta(l) {
        for m in ms.clone() {
            if let Ok(z) = ylf_zero(m, k, j, h) {
                out.push(z);
            }
        }
    }
    out
}

/// The `m`-th DQPT time `(2m+1) t*/2`, `t* = pi / (2 sqrt(1 - h^2))` (units `J = 1`).
pub fn critical_times(h: f64, m: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&h) {
        return Err(Error::Domain(format!("critical times need 0 <= h < 1, got {h}")));
    }
    let period = PI / (2.0 * (1.0 - h * h).sqrt());
    Ok((2 * m + 1) as f64 * period / 2.0)
}

/// Smallest moment `n` with `e^{-n L df} = e^{-10}`.
pub fn critical_moment_bound(l: usize, delta_f: f64) -> Result<f64> {
    critical_moment_bound_with(l, delta_f, MOMENT_SAFETY)
}

pub fn critical_moment_bound_with(l: usize, delta_f: f64, safety: f64) -> Result<f64> {
    if !(delta_f > 0.0) {
        return Err(Error::Domain(format!("free-energy gap must be positive, got {delta_f}")));
    }
    if l == 0 {
        return Err(Error::Input("chain length must be positive".into()));
    }
    Ok(safety / (l as f64 * delta_f))
}
