//! Lens areas B(z₁,t) ∩ B(z₂,t) against the enclosing-ball bound and C e^{t − r/2}.
use qelab::hgeom::{ball_intersection_radius, lens_area, Intersection};
use qelab::quad::Tolerance;
use std::f64::consts::PI;

fn main() -> qelab::Result<()> {
    let tol = Tolerance::new(1e-12, 1e-12);
    println!("{:>4} {:>4} {:>14} {:>14} {:>10}", "t", "r", "lens", "ball bound", "C fit");
    for t in [1.0, 2.0, 4.0, 8.0] {
        for r in [0.5, 1.0, 2.0] {
            let area = lens_area(t, r, tol)?.value;
            let bound = match ball_intersection_radius(t, r)? {
                Intersection::Radius(rho) => 4.0 * PI * (0.5 * rho).sinh().powi(2),
                Intersection::Empty => 0.0,
            };
            println!("{t:>4} {r:>4} {area:>14.6} {bound:>14.6} {:>10.4}", area / (t - 0.5 * r).exp());
        }
    }
    Ok(())
}
