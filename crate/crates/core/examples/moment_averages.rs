//! Moment-averaged free energies `f_n` and their ordering in `n`.
use std::f64::consts::PI;

use born_dqpt::ensemble::MomentIndex;
use born_dqpt::experiments::{time_series, SeriesRequest};
use born_dqpt::{EvolutionMode, ModelParams, TimeGrid};

fn main() -> born_dqpt::Result<()> {
    let p = ModelParams::default();
    let moments = vec![
        MomentIndex::Finite(0.0),
        MomentIndex::Finite(1.0),
        MomentIndex::Finite(5.0),
        MomentIndex::Infinity,
    ];
    let req = SeriesRequest { plus: true, moments: moments.clone(), ..Default::default() };
    let series = time_series(&p, &TimeGrid::new(0.0, PI, 8)?, &req, EvolutionMode::ExactSpectral)?;
    println!("t        f(+...+)  {}", moments.iter().map(|n| format!("f_{:<6}", n.to_string())).collect::<String>());
    for r in &series.rows {
        let cols: String = r.moments.iter().map(|f| format!("{f:<8.4}")).collect();
        println!("{:<8.4} {:<9.4} {cols}", r.t, r.plus.unwrap_or(f64::NAN));
    }
    Ok(())
}
