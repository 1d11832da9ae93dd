//! Finite-size scaling of `f_n` at the critical time and the level-inversion size `L*`.
use born_dqpt::analytic::critical_times;
use born_dqpt::ensemble::MomentIndex;
use born_dqpt::experiments::{finite_size_study, snap_to_step, FssQuantity};
use born_dqpt::ModelParams;

fn main() -> born_dqpt::Result<()> {
    let p = ModelParams::default();
    let tc = snap_to_step(critical_times(p.h, 0)?, p.dt);
    let qs = [FssQuantity::Moment(MomentIndex::Finite(1.0)), FssQuantity::Moment(MomentIndex::Finite(5.0))];
    let report = finite_size_study(&p, &[8, 10, 12, 14, 16], &qs, tc)?;
    for fit in &report.fits {
        println!(
            "n = {}: deviation = {:.4}/L + ({:.4}), L* = {:.1}",
            fit.n,
            fit.slope,
            fit.intercept,
            fit.l_star.unwrap_or(f64::NAN)
        );
    }
    for w in &report.sensitivity {
        println!("  window {:?}: n = {} L* = {:.1}", w.sizes, w.n, w.l_star.unwrap_or(f64::NAN));
    }
    Ok(())
}
