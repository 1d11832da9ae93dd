//! Complex-time heatmaps: zeros of the post-selected amplitude survive,
//! while the averaged `e^{-f_1}` stays above 1/2.
use born_dqpt::ensemble::MomentIndex;
use born_dqpt::experiments::{complex_scan, detect_zeros, slice, ScanGrid, ScanQuantity, SliceAxis};
use born_dqpt::{Boundary, ModelParams};

fn main() -> born_dqpt::Result<()> {
    let p = ModelParams::with(12, 0.0, Boundary::Pbc);
    let grid = ScanGrid::default();
    let frames = complex_scan(&p, &grid, &[ScanQuantity::PostSelectedRaw, ScanQuantity::Moment(MomentIndex::Finite(1.0))])?;
    for z in detect_zeros(&frames[0], 0.5)? {
        println!("zero near t = {:.4}, tau = {:+.4} (refined value {:.2e})", z.refined.t, z.refined.tau, z.refined_value);
    }
    println!("min e^(-f_1) over the grid: {:.4}", frames[1].min());
    let line = slice(&frames[1], SliceAxis::FixedT, std::f64::consts::FRAC_PI_2, false)?;
    let lo = line.values.iter().copied().fold(f64::INFINITY, f64::min);
    println!("along t = {:.4}: min e^(-f_1) = {lo:.4}", line.line);
    Ok(())
}
