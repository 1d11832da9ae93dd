//! Estimating `f_0` and `f_1` from finite Born samples, with bootstrap errors.
use born_dqpt::ensemble::{born_distribution, bootstrap, moment_free_energy, sample, MomentIndex, Normalization};
use born_dqpt::experiments::evolve_to;
use born_dqpt::{ComplexTime, EvolutionMode, ModelParams};

fn main() -> born_dqpt::Result<()> {
    let p = ModelParams::default();
    let d = born_distribution(evolve_to(&p, ComplexTime::real(1.3), EvolutionMode::ExactSpectral)?, Normalization::Normalized)?;
    let ns = [MomentIndex::Finite(0.0), MomentIndex::Finite(1.0)];
    println!("exact: f_0 = {:.4}, f_1 = {:.4}", moment_free_energy(&d, ns[0])?, moment_free_energy(&d, ns[1])?);
    for shots in [2_000, 8_000, 32_000] {
        let rec = sample(&d, shots, 7)?;
        let est = bootstrap(&rec, &ns, 200, 11)?;
        println!(
            "N = {shots:>6}: {} distinct, f_0 = {:.4} +- {:.4}, f_1 = {:.4} +- {:.4}",
            rec.distinct(),
            est[0].estimate,
            est[0].std_error,
            est[1].estimate,
            est[1].std_error
        );
    }
    Ok(())
}
