//! Lowest rate-function levels and the most likely outcome around the first DQPT.
use born_dqpt::ensemble::{born_distribution, ground_bitstring, spectrum_frame, Normalization};
use born_dqpt::evolution::spectral::SpectralPropagator;
use born_dqpt::{ComplexTime, ModelParams};

fn main() -> born_dqpt::Result<()> {
    let p = ModelParams::default();
    let prop = SpectralPropagator::new(&p)?;
    for t in [0.4, 0.7, 0.8, 0.9, 1.2] {
        let d = born_distribution(prop.evolve(ComplexTime::real(t)), Normalization::Normalized)?;
        let frame = spectrum_frame(&d, t, 4)?;
        let low: Vec<String> = frame.levels.iter().take(4).map(|l| format!("{} {:.3}", l.sigma, l.f)).collect();
        println!("t = {t}: ground {} | rank of +...+ {:?} | {}", ground_bitstring(&d)?, frame.plus_rank(), low.join(", "));
    }
    Ok(())
}
