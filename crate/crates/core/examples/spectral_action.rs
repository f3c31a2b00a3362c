//! Time-averaged |S(k_t)(r)|² over an eigenvalue window.
use qelab::quad::Tolerance;
use qelab::transforms::{spectral_action_average, SpectralInterval};

fn main() -> qelab::Result<()> {
    let iv = SpectralInterval::from_eigenvalues(0.5, 1.0)?;
    let tol = Tolerance::new(1e-9, 1e-9);
    for horizon in [10.0, 20.0, 40.0] {
        let mut min = f64::INFINITY;
        for i in 0..10 {
            let r = iv.alpha + (iv.beta - iv.alpha) * i as f64 / 9.0;
            min = min.min(spectral_action_average(horizon, r, tol)?.value);
        }
        println!("T = {horizon:>4}: min over window {min:.6}");
    }
    Ok(())
}
