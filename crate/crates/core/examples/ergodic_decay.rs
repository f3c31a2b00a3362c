//! Decay of lens averages of a mean-zero observable as the lens grows.
use qelab::hgeom::UHPoint;
use qelab::qvar::{ergodic_decay, mean_zero_reduce, ErgodicSpec, Observable};

fn main() -> qelab::Result<()> {
    let a = mean_zero_reduce(&Observable::bump(UHPoint::new(0.0, 1.3)?, 0.5, 1.0)?, 3.0)?;
    let spec = ErgodicSpec { times: vec![1.5, 2.5, 3.5], samples: 64, ..Default::default() };
    let rep = ergodic_decay(&a, &spec)?;
    println!("||a||_2 = {:.4}", rep.l2_norm);
    for p in &rep.points {
        println!("t = {}  |A| = {:>9.2}  deviation {:.5} ± {:.5}", p.t, p.set_measure, p.deviation, p.std_error);
    }
    println!("fitted exponent {:?}", rep.exponent);
    Ok(())
}
