//! Smoothed spectral windows: ∫(H_t − 1_I) r tanh(πr) dr against √b/t.
use qelab::quad::Tolerance;
use qelab::transforms::{window_error, SpectralInterval};

fn main() -> qelab::Result<()> {
    let tol = Tolerance::new(1e-12, 1e-12);
    for b in [1.0, 2.0, 5.0] {
        let iv = SpectralInterval::from_eigenvalues(0.5, b)?;
        for t in [5.0, 10.0, 20.0] {
            let e = window_error(iv, t, tol)?.value;
            println!("b = {b}  t = {t:>4}  error {e:>12.4e}  t|e|/sqrt(b) = {:.5}", t * e.abs() / b.sqrt());
        }
    }
    Ok(())
}
