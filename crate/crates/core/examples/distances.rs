//! Histogram density estimates and the four distances to a reference density.

use nelson_relax::sde::InverseCdf;
use nelson_relax::stats::{distance, estimate_density, DistanceKind, GridSpec};

fn normal(x: f64, mean: f64) -> f64 {
    (-(x - mean).powi(2) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = GridSpec::new(-5.0, 5.0, 200)?;
    let xs = grid.fine_points(4);
    let reference: Vec<f64> = xs.iter().map(|&x| normal(x, 0.0)).collect();
    for n in [2_000, 10_000, 100_000, 1_000_000] {
        let sample = InverseCdf::new(|x| normal(x, 0.0), -8.0, 8.0)?.sample(n, 3);
        let est = estimate_density(&sample, grid)?;
        let f = est.eval_many(&xs);
        let row: Vec<String> =
            DistanceKind::ALL.iter().map(|&k| format!("{k} {:.5}", distance(k, &xs, &f, &reference).unwrap_or(f64::NAN))).collect();
        println!("N = {n:>7}: {}", row.join("  "));
    }
    let shifted: Vec<f64> = xs.iter().map(|&x| normal(x, 1.0)).collect();
    println!("N(0,1) vs N(1,1): L1 = {:.6}", distance(DistanceKind::L1, &xs, &reference, &shifted)?);
    Ok(())
}
