//! N(X, I) + M(X, I) against the Weyl main term.
use qelab::modsurf::EigenvalueTable;
use qelab::quad::Tolerance;
use qelab::traceform::weyl_count;
use qelab::transforms::SpectralInterval;

fn main() -> qelab::Result<()> {
    let table = EigenvalueTable::modular();
    for (a, b) in [(0.5, 1.0), (81.25, 100.25), (100.0, 400.0)] {
        let w = weyl_count(&SpectralInterval::from_eigenvalues(a, b)?, &table, Tolerance::new(1e-12, 1e-12))?;
        println!("[{a}, {b}]  N = {}  M = {:.6}  main {:.6}  remainder {:.6}", w.discrete, w.continuous, w.main_term, w.remainder);
    }
    Ok(())
}
