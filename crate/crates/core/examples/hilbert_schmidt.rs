//! Monte Carlo Hilbert–Schmidt norm of the averaged operator against the two-term bound.
use qelab::hgeom::UHPoint;
use qelab::qvar::{hs_norm_estimate, mean_zero_reduce, HsSpec, Observable};

fn main() -> qelab::Result<()> {
    let a = mean_zero_reduce(&Observable::bump(UHPoint::new(0.0, 1.3)?, 0.5, 1.0)?, 3.0)?;
    let spec = HsSpec { samples: 64, seed: 11, ..Default::default() };
    for horizon in [0.5, 1.0, 1.5] {
        let r = hs_norm_estimate(&a, horizon, &spec)?;
        println!(
            "T = {horizon}: HS² ≈ {:.4e} ± {:.1e}   bound {:.3e}   ratio {:.3e}",
            r.estimate, r.std_error, r.bound, r.fitted_constant
        );
    }
    Ok(())
}
