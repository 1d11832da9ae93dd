//! Participation entropies and fitted dimensions `D_q` at a critical and a generic time.
use std::f64::consts::PI;

use born_dqpt::analytic::critical_times;
use born_dqpt::ensemble::{born_distribution, multifractal_fit, participation_entropy, Normalization};
use born_dqpt::experiments::{evolve_to, snap_to_step};
use born_dqpt::{ComplexTime, EvolutionMode, ModelParams};

fn main() -> born_dqpt::Result<()> {
    let base = ModelParams::default();
    let tc = snap_to_step(critical_times(base.h, 0)?, base.dt);
    let qs = [0.0, 1.0, 2.0, 5.0];
    for (label, t) in [("t_c", tc), ("pi/10", PI / 10.0)] {
        let mut points = vec![Vec::new(); qs.len()];
        for l in (8..=16).step_by(2) {
            let p = ModelParams { l, ..base };
            let d = born_distribution(evolve_to(&p, ComplexTime::real(t), EvolutionMode::best_for(l))?, Normalization::Normalized)?;
            for (i, q) in qs.iter().enumerate() {
                points[i].push((l, participation_entropy(&d, *q)?.s_q));
            }
        }
        for (q, pts) in qs.iter().zip(&points) {
            let fit = multifractal_fit(*q, pts)?;
            println!("{label:>6}: D_{q} = {:.3} (r^2 = {:.5})", fit.d_q, fit.r_squared);
        }
    }
    Ok(())
}
