//! h → g → k → h′ for the heat and Gaussian multipliers.
use qelab::transforms::{gaussian_triple, heat_triple, round_trip, RoundTripConfig};

fn main() -> qelab::Result<()> {
    let grid: Vec<f64> = (0..=100).map(|i| 0.2 * i as f64).collect();
    for triple in [heat_triple(1.0)?, gaussian_triple()] {
        let h = triple.h.clone();
        let rep = round_trip(move |r| h(r), &grid, RoundTripConfig::default())?;
        println!("{:<12} sup |h - h'| = {:.2e}   k(0) = {:.6}", triple.name, rep.max_error, rep.kernel_samples[0].1);
    }
    Ok(())
}
