//! Pairs of points vs. midpoint frames: both sides of dμ(z₁)dμ(z₂) = sinh r dr dθ dμ(m)
//! for a test function built from the weight-12 cusp form.
use qelab::qvar::{change_of_variable_check, cusp_form_lift, CovSpec};

fn main() -> qelab::Result<()> {
    let horizon = 1.0;
    let psi = |r: f64| {
        let s = r / (2.0 * horizon);
        s * s * (1.0 - s) * (1.0 - s)
    };
    let kappa = 300.0;
    let f = |p, r| -> qelab::Result<f64> {
        let d = cusp_form_lift(p)?;
        Ok(psi(r) * (1.0 + kappa * d.re + kappa * kappa * d.norm_sqr()))
    };
    let spec = CovSpec { nodes_x: 10, nodes_y: 12, nodes_r: 16, nodes_angle: 64, ..Default::default() };
    let rep = change_of_variable_check(f, horizon, &spec)?;
    println!("pair side {:.10}  frame side {:.10}  relative {:.2e}", rep.pair_integral, rep.frame_integral, rep.relative);
    Ok(())
}
