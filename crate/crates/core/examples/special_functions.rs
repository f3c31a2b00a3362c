//! Zeta, gamma and Bessel K_{ir} at a few points.
use num_complex::Complex64;
use qelab::specfun::{bessel_k_ir, gamma, zeta, zeta_log_deriv};

fn main() -> qelab::Result<()> {
    let s = Complex64::new(0.5, 14.134725141734693);
    println!("zeta(1/2 + 14.1347i) = {:.3e}", zeta(s)?.norm());
    println!("zeta(2) = {:.15}", zeta(Complex64::new(2.0, 0.0))?.re);
    println!("gamma(5) = {}", gamma(Complex64::new(5.0, 0.0))?.re);
    println!("zeta'/zeta(2) = {:.12}", zeta_log_deriv(Complex64::new(2.0, 0.0))?.re);
    for (r, x) in [(0.0, 1.0), (5.0, 2.0), (20.0, 10.0)] {
        println!("K_(i{r})({x}) = {:?}", bessel_k_ir(r, x)?);
    }
    Ok(())
}
