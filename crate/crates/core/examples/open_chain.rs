//! Open boundaries at zero field: kinks every pi and an edge-flipped most likely outcome.
use std::f64::consts::PI;

use born_dqpt::ensemble::{born_distribution, ground_bitstring, Normalization};
use born_dqpt::evolution::spectral::SpectralPropagator;
use born_dqpt::{Bitstring, Boundary, ComplexTime, ModelParams};

fn main() -> born_dqpt::Result<()> {
    let p = ModelParams::with(12, 0.0, Boundary::Obc);
    let prop = SpectralPropagator::new(&p)?;
    for k in 0..=12 {
        let t = k as f64 * PI / 4.0;
        let d = born_distribution(prop.evolve(ComplexTime::real(t)), Normalization::Normalized)?;
        println!("t = {:>4.2} pi: P(+...+) = {:.3e}, most likely {}", t / PI, d.prob(Bitstring::all_plus(12)), ground_bitstring(&d)?);
    }
    Ok(())
}
