//! A packet released above a mirror: when fringes first appear in |psi|² for
//! several prominence thresholds.

use nelson_relax::experiments::gravity::{gravity_field, gravity_interference_time};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ps = [0.0025, 0.0152, 0.05, 0.152];
    for h in [1.5, 2.5, 3.5, 5.0] {
        let field = gravity_field(h, 0.09, 0.2, 0.01)?;
        let t = gravity_interference_time(&field, &ps, 0.2, 2e-3);
        println!("h = {h}: {t:?}");
    }
    Ok(())
}
