//! Orbit counts #{γ : d(z, γw) ≤ R} against the packing bound.
use qelab::fuchsian::{stream_rng, FuchsianGroup};

fn main() -> qelab::Result<()> {
    let g = FuchsianGroup::modular();
    let mut rng = stream_rng(7, 0);
    for _ in 0..5 {
        let z = g.sample_point(&mut rng)?;
        let w = g.sample_point(&mut rng)?;
        let i0 = g.injectivity_radius_at(w)?.value.max(1e-3);
        for r in [1.0, 2.0, 4.0] {
            let n = g.lattice_count(z, w, r)?;
            let bound = ((r + i0).cosh() - 1.0) / (i0.cosh() - 1.0);
            println!("z = ({:.3}, {:.3})  R = {r}  count {n:>4}  bound {bound:.1}", z.x, z.y);
        }
    }
    Ok(())
}
