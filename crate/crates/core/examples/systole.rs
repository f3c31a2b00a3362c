//! Systole and the shortest lengths of the modular surface.
use qelab::fuchsian::FuchsianGroup;

fn main() -> qelab::Result<()> {
    let g = FuchsianGroup::modular();
    let s = g.systole(10)?;
    println!("systole {:.12} (trace {}, word {})", s.length, s.trace, s.word);
    println!("2 acosh(3/2) = {:.12}", 2.0 * 1.5f64.acosh());
    let spec = g.length_spectrum(6.0, 10)?;
    for e in spec.entries.iter().take(8) {
        println!("  length {:.6}  trace {:>3}  classes {}", e.length, e.trace, e.multiplicity);
    }
    Ok(())
}
