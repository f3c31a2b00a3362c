//! Checks that tie several modules together.

use qelab::fuchsian::FuchsianGroup;
use qelab::hgeom::{ball_volume, UHPoint};
use qelab::modsurf::{continuous_mass, EigenvalueTable, EisensteinEvaluator};
use qelab::quad::Tolerance;
use qelab::qvar::{pt_apply, pt_apply_fn, Observable};
use qelab::traceform::weyl_count;
use qelab::transforms::{ball_kernel_transform, SpectralInterval};

fn tol() -> Tolerance {
    Tolerance::new(1e-10, 1e-10)
}

#[test]
fn eisenstein_series_is_an_eigenfunction_of_ball_averaging() {
    let g = FuchsianGroup::modular();
    let z = UHPoint::new(0.1, 1.4).unwrap();
    for (r, t) in [(1.3, 1.0), (4.0, 0.7)] {
        let e = EisensteinEvaluator::with_tolerance(r, 3f64.sqrt() / 2.0, 1e-13).unwrap();
        let u = |p: UHPoint| -> qelab::Result<f64> { Ok(e.eval(g.reduce(p)?.0)?.re) };
        let lhs = pt_apply_fn(u, t, z, Tolerance::new(1e-8, 1e-8)).unwrap().value;
        let rhs = ball_kernel_transform(t, r, tol()).unwrap().value * u(z).unwrap();
        assert!((lhs - rhs).abs() < 1e-5 * rhs.abs().max(1.0), "r = {r}: {lhs} vs {rhs}");
    }
}

#[test]
fn ball_averaging_fixes_constants() {
    let one = Observable::constant(1.0).unwrap();
    let z = UHPoint::new(0.3, 2.0).unwrap();
    for t in [0.5, 2.0] {
        let v = pt_apply(&one, t, z, tol()).unwrap().value;
        let want = (-0.5 * t).exp() * ball_volume(t).unwrap();
        assert!((v - want).abs() < 1e-8, "t = {t}: {v}");
    }
}

#[test]
fn weyl_splits_over_adjacent_intervals() {
    let table = EigenvalueTable::modular();
    let w = |a, b| weyl_count(&SpectralInterval::from_eigenvalues(a, b).unwrap(), &table, tol()).unwrap();
    let (left, right, whole) = (w(50.0, 120.0), w(120.0, 200.0), w(50.0, 200.0));
    assert_eq!(left.discrete + right.discrete, whole.discrete);
    assert!((left.continuous + right.continuous - whole.continuous).abs() < 1e-8);
    let m = continuous_mass(&SpectralInterval::from_eigenvalues(50.0, 200.0).unwrap(), tol()).unwrap();
    assert!((m.value - whole.continuous).abs() < 1e-8);
}

#[test]
fn displacement_spectrum_contains_the_systole() {
    let g = FuchsianGroup::modular();
    let s = g.systole(8).unwrap().length;
    // The axis of [[2,1],[1,1]] passes through points displaced exactly by the systole.
    let (a, c, d): (f64, f64, f64) = (2.0, 1.0, 1.0);
    let disc = ((a + d).powi(2) - 4.0).sqrt();
    let (p, q) = ((a - d - disc) / (2.0 * c), (a - d + disc) / (2.0 * c));
    let on_axis = UHPoint::new(0.5 * (p + q), 0.5 * (q - p)).unwrap();
    let list = g.enumerate_displacers(on_axis, s + 1e-9).unwrap();
    assert!(list.iter().any(|(_, dist)| (dist - s).abs() < 1e-9));
}
