//! Zero-field quench: the rate function of `|+...+>` against its closed form.
use std::f64::consts::PI;

use born_dqpt::analytic::rate_fn_h0_pbc;
use born_dqpt::experiments::{local_maxima, time_series, SeriesRequest};
use born_dqpt::{Boundary, EvolutionMode, ModelParams, TimeGrid};

fn main() -> born_dqpt::Result<()> {
    let p = ModelParams::with(12, 0.0, Boundary::Pbc);
    let grid = TimeGrid::new(0.0, 3.0 * PI, 480)?;
    let req = SeriesRequest { plus: true, ..Default::default() };
    let series = time_series(&p, &grid, &req, EvolutionMode::ExactSpectral)?;
    let f = series.plus_column();
    for i in local_maxima(&f) {
        let t = series.rows[i].t;
        println!("peak at t = {:.4} pi: f = {:.6} (closed form {:.6})", t / PI, f[i], rate_fn_h0_pbc(t, 12));
    }
    Ok(())
}
