//! Monte Carlo volume fraction of the thin part of two surfaces.
use qelab::fuchsian::FuchsianGroup;

fn main() -> qelab::Result<()> {
    for name in ["modular", "punctured_torus"] {
        let g = FuchsianGroup::builtin(name)?;
        for r in [0.1, 0.3, 0.5] {
            match g.thin_part_fraction(r, 2048, 3) {
                Ok(e) => println!("{name:>16}  R = {r}  fraction {:.4} ± {:.4}", e.mean, e.std_error),
                Err(e) => println!("{name:>16}  R = {r}  {e}"),
            }
        }
    }
    Ok(())
}
