//! Small-systole probability bound from Weil–Petersson volumes, and its ε² scaling.
use qelab::wpbound::{epsilon_scaling_curve, volume_exp_bound_check, VolumeTable};

fn main() -> qelab::Result<()> {
    let table = VolumeTable::shipped();
    println!("convention: {}", table.convention);
    let grid: Vec<f64> = (0..=8).map(|i| 0.5 * i as f64).collect();
    let v = volume_exp_bound_check(&table, 1, 1, &grid)?;
    println!("V11(L) <= e^L V11 on [0, 4]: {} (worst ratio {:.4})", v.holds, v.worst_ratio);
    let c = epsilon_scaling_curve(2, 1, &[0.01, 0.02, 0.03, 0.04, 0.05], &table)?;
    for (e, b) in &c.points {
        println!("eps {e:.2}: bound {b:.4e}");
    }
    println!("fitted exponent {:.4}", c.exponent.unwrap_or(f64::NAN));
    Ok(())
}
