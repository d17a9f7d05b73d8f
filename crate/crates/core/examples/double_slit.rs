//! Two slits: a delta-pair ensemble relaxes to |psi|² before the central
//! interference peak appears.

use nelson_relax::experiments::double_slit::{interference_time, DIFFUSION, HALF_SEPARATION};
use nelson_relax::experiments::tracking::DistanceTracker;
use nelson_relax::models::{DoubleSlitModel, WavefunctionModel};
use nelson_relax::sde::{simulate, Ensemble, IntegratorConfig};
use nelson_relax::stats::{fit_relaxation, DistanceKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sigma = 0.3;
    let model = DoubleSlitModel::with_separation(sigma, HALF_SEPARATION)?;
    let tau_int = interference_time(&model, 5.0, 1e-4)?;
    println!("sigma = {sigma}: third peak appears at t = {tau_int:.4}");

    let mut ens = Ensemble::delta_pair(HALF_SEPARATION, 20_000, 7)?;
    let cfg = IntegratorConfig::new(1e-4, DIFFUSION);
    let mut tracker = DistanceTracker::new(200);
    simulate(&mut ens, &model, &cfg, 0.3, 2e-3, |snap| {
        tracker
            .observe(snap.t, snap.positions, model.support(snap.t), |x| Ok(model.density_at(x, snap.t)))
            .map_err(|e| e.to_string())
    })?;
    for kind in DistanceKind::ALL {
        let series = tracker.series(kind).after(0.0);
        match fit_relaxation(&series) {
            Ok(fit) => println!("  {kind:>4}: tau_q = {:.4}", fit.tau_q.unwrap_or(f64::NAN)),
            Err(e) => println!("  {kind:>4}: {e}"),
        }
    }
    Ok(())
}
