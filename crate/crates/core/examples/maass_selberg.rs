//! Truncated L² mass of the modular Eisenstein series against the
//! Maass–Selberg closed form.
use qelab::modsurf::maass_selberg_check;
use qelab::quad::Tolerance;

fn main() -> qelab::Result<()> {
    let tol = Tolerance::new(1e-10, 1e-11);
    println!("{:>4} {:>4} {:>16} {:>16} {:>10}", "r", "Y", "lhs", "rhs", "residual");
    for r in [1.0, 2.0, 5.0] {
        for cut in [3.0, 5.0] {
            let rep = maass_selberg_check(r, cut, 16, tol)?;
            println!("{r:>4} {cut:>4} {:>16.10} {:>16.10} {:>10.2e}", rep.lhs, rep.rhs, rep.residual);
        }
    }
    Ok(())
}
