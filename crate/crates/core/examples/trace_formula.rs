//! Spectral minus geometric side of the trace formula for the heat multiplier.
use qelab::fuchsian::FuchsianGroup;
use qelab::modsurf::EigenvalueTable;
use qelab::traceform::{trace_residual, TraceOptions};
use qelab::transforms::heat_triple;

fn main() -> qelab::Result<()> {
    let h = heat_triple(1.0)?;
    let table = EigenvalueTable::modular();
    let spectrum = FuchsianGroup::modular().length_spectrum(10.0, 10)?;
    for (n, lmax) in [(10, 8.0), (25, 10.0)] {
        let opts = TraceOptions { lmax, ..Default::default() };
        let rep = trace_residual(&h, &table.truncated(n), &spectrum.truncated(lmax), opts)?;
        println!("{n:>3} eigenvalues, Lmax {lmax:>4}: residual {:.3e}, budget {:.3e}", rep.residual, rep.budget.total);
    }
    Ok(())
}
