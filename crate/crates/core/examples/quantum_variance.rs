//! Eisenstein contribution to the quantum mean absolute deviation of 1_{X(3)}.
use qelab::modsurf::EigenvalueTable;
use qelab::quad::Tolerance;
use qelab::qvar::{domain_integral, mean_zero_reduce, quantum_mean_abs_dev, Observable, VarMode};
use qelab::transforms::SpectralInterval;

fn main() -> qelab::Result<()> {
    let a = Observable::cusp_indicator(3.0)?;
    let iv = SpectralInterval::from_eigenvalues(0.5, 1.0)?;
    let rep = quantum_mean_abs_dev(&a, &iv, VarMode::EisensteinOnly, &EigenvalueTable::modular(), &[], Tolerance::new(1e-8, 1e-8))?;
    println!("mean {:.6}  continuous {:.6}  N + M {:.6}", rep.mean_value, rep.continuous, rep.n_plus_m);
    println!("Var = {:.6} ± {:.2e}", rep.total, rep.error_budget);
    let b = mean_zero_reduce(&a, 3.0)?;
    println!("integral of reduced observable: {:.2e}", domain_integral(&b, |v| v, Tolerance::new(1e-12, 1e-12))?.value);
    Ok(())
}
