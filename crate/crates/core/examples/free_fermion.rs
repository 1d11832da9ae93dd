//! Closed-form rate functions, critical times and Yang-Lee-Fisher zero lines.
use born_dqpt::analytic::{critical_times, dispersion, finite_size_zeros, rate_fn_finite, rate_fn_thermo};
use born_dqpt::ComplexTime;

fn main() -> born_dqpt::Result<()> {
    let h = 0.2;
    println!("gap at k = 0: {:.3}; first critical times: {:.4}, {:.4}", dispersion(0.0, 1.0, h), critical_times(h, 0)?, critical_times(h, 1)?);
    for t in [0.4, 0.8, 0.8016, 1.2] {
        let z = ComplexTime::real(t);
        println!(
            "t = {t}: thermodynamic {:.5}, L = 12 {:.5}, L = 40 {:.5}",
            rate_fn_thermo(z, 1.0, h)?.value,
            rate_fn_finite(z, 1.0, h, 12)?,
            rate_fn_finite(z, 1.0, h, 40)?
        );
    }
    for z in finite_size_zeros(8, 1.0, h, 0..=0) {
        let c = z.complex_time();
        println!("zero m = {}, k = {:.3}: t = {:.4}, tau = {:.4}", z.m, z.k, c.t, c.tau);
    }
    Ok(())
}
