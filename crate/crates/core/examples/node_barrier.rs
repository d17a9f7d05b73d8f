//! The node of the first excited state repels trajectories; only a coarse time
//! step lets them jump across.

use nelson_relax::experiments::oscillator::{crossing_fraction, DIFFUSION};
use nelson_relax::models::OscillatorEigenModel;
use nelson_relax::sde::{simulate, Ensemble, IntegratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = OscillatorEigenModel::first_excited();
    for dt in [0.1, 1e-2, 1e-3] {
        let mut ens = Ensemble::delta(1.0, 5_000, 11)?;
        let log = simulate(&mut ens, &model, &IntegratorConfig::new(dt, DIFFUSION), 10.0, 10.0, |_| Ok(()))?;
        println!(
            "dt = {dt:<6} crossed: {:.4}  sign changes: {}",
            crossing_fraction(ens.positions(), 1.0),
            log.counters.sign_changes
        );
    }
    Ok(())
}
