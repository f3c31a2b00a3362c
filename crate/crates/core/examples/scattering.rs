//! Unitarity and the functional equation of the modular scattering determinant.
use num_complex::Complex64;
use qelab::modsurf::{scattering_det, scattering_det_at, scattering_log_deriv, R_MIN};

fn main() -> qelab::Result<()> {
    for r in [0.1, 1.0, 10.0, 50.0] {
        let phi = scattering_det(r)?;
        let s = Complex64::new(0.7, r);
        let fe = scattering_det_at(s)? * scattering_det_at(Complex64::new(1.0, 0.0) - s)?;
        println!(
            "r = {r:>5}: |phi| - 1 = {:>9.2e}   |phi(s)phi(1-s) - 1| = {:.2e}   -phi'/phi = {:.6}",
            phi.norm() - 1.0,
            (fe - 1.0).norm(),
            scattering_log_deriv(r, R_MIN)?
        );
    }
    Ok(())
}
