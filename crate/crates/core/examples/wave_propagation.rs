//! P_t on observables: ball averages of a disc, a cusp cut-off and an Eisenstein series.
use qelab::fuchsian::FuchsianGroup;
use qelab::hgeom::UHPoint;
use qelab::modsurf::EisensteinEvaluator;
use qelab::quad::Tolerance;
use qelab::qvar::{pt_apply, pt_apply_fn, Observable};
use qelab::transforms::ball_kernel_transform;

fn main() -> qelab::Result<()> {
    let z = UHPoint::new(0.1, 1.4)?;
    let tol = Tolerance::new(1e-10, 1e-10);
    let disc = Observable::disc(UHPoint::new(0.0, 1.2)?, 0.4, 1.0)?;
    let cusp = Observable::cusp_indicator(2.0)?;
    for t in [0.5, 1.0, 2.0, 4.0] {
        println!("t = {t}: P_t disc = {:.6}   P_t 1_X(2) = {:.6}", pt_apply(&disc, t, z, tol)?.value, pt_apply(&cusp, t, z, tol)?.value);
    }
    // Eisenstein series are eigenfunctions: P_t E = S(k_t)(r) E.
    let (r, t) = (1.3, 1.0);
    let g = FuchsianGroup::modular();
    let e = EisensteinEvaluator::with_tolerance(r, 3f64.sqrt() / 2.0, 1e-13)?;
    let u = |p: UHPoint| -> qelab::Result<f64> { Ok(e.eval(g.reduce(p)?.0)?.re) };
    let lhs = pt_apply_fn(u, t, z, Tolerance::new(1e-8, 1e-8))?.value;
    let rhs = ball_kernel_transform(t, r, tol)?.value * u(z)?;
    println!("P_t Re E = {lhs:.8}, S(k_t)(r) Re E = {rhs:.8}");
    Ok(())
}
