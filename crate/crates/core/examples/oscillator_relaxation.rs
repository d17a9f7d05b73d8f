//! Gaussian packets in the harmonic trap: relaxation time from the ratio of
//! ensemble and Born precisions, against the initial width.

use std::f64::consts::FRAC_PI_4;

use nelson_relax::experiments::validation::oscillator_tau_curve;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let widths = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0];
    for theta in [5e-4, 1e-3, 1e-2] {
        let tau = oscillator_tau_curve(&widths, theta, 10, 1e-4, 5.0)?;
        println!("theta = {theta}:");
        for (s, t) in widths.iter().zip(&tau) {
            println!("  sigma0 = {s:<4}  tau_q = {t:.4}  ({:.0}% of pi/4)", 100.0 * t / FRAC_PI_4);
        }
    }
    Ok(())
}
