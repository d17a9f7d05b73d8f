//! Airy zeros, the Gaussian–Airy integral, and the eigen-expansion of a packet
//! dropped above a mirror.

use nelson_relax::models::airy::{airy_pair, airy_zeros, gaussian_airy_integral};
use nelson_relax::models::gravity::neutron_units;
use nelson_relax::models::GravityModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("first Airy zeros -a_n:");
    for (n, e) in airy_zeros(8)?.iter().enumerate() {
        let (_, slope) = airy_pair(-e)?;
        println!("  n = {:>2}  E_n = {e:.12}  Ai'(-E_n) = {slope:+.12}", n + 1);
    }

    println!("\n∫exp(-u²)Ai(2au+b)du in closed form:");
    for (a, b) in [(0.1, -1.0), (0.3, 2.0)] {
        println!("  a = {a}, b = {b:+}: {:.15}", gaussian_airy_integral(a, b)?);
    }

    let units = neutron_units();
    println!("\nneutron units: x0 = {:.3} µm, t0 = {:.3} ms", units.length_m * 1e6, units.time_s * 1e3);
    for h in [1.5, 2.5, 3.5, 5.0] {
        let m = GravityModel::auto(h, 0.09)?;
        println!("  h = {h}: {} states capture {:.6} of the norm", m.n_max(), m.raw_norm());
    }
    Ok(())
}
