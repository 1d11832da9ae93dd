//! Measurement-based Trotter steps: gadget verification and boundary
//! statistics with post-selection, feed-forward correction and no correction.
use born_dqpt::mbqc::{run_shots, verify_equivalence, ProtocolMode};
use born_dqpt::stats::total_variation;
use born_dqpt::{Boundary, ModelParams};

fn main() -> born_dqpt::Result<()> {
    let p = ModelParams::with(4, 0.2, Boundary::Pbc);
    let rep = verify_equivalence(&p, 20, 1)?;
    println!("gadget deficit: {:.1e} over {} outcome patterns", rep.max_deficit, rep.patterns);
    let steps = 41;
    let post = run_shots(&p, steps, ProtocolMode::PostselectZero, 20_000, 1)?;
    for mode in [ProtocolMode::Corrected, ProtocolMode::RandomCircuit] {
        let s = run_shots(&p, steps, mode, 20_000, 2)?;
        let plus = s.frequencies()[0];
        println!(
            "{:>15}: P(+...+) = {plus:.4}, TV to post-selected = {:.4}",
            mode.as_str(),
            total_variation(&s.frequencies(), &post.frequencies())
        );
    }
    for steps in [10, 40, 80, 160] {
        let s = run_shots(&p, steps, ProtocolMode::RandomCircuit, 20_000, 3)?;
        println!("random circuit after {steps:>3} steps: f(+...+) = {:.4}", -s.frequencies()[0].ln() / 4.0);
    }
    Ok(())
}
