//! A first excited state with a small ground-state admixture: the entropy
//! distance against an equilibrium-start control.

use nelson_relax::experiments::oscillator::track_superposition;
use nelson_relax::experiments::{Scenario, StudySpec};
use nelson_relax::models::OscillatorEigenModel;
use nelson_relax::stats::DistanceKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut spec = StudySpec::defaults(Scenario::Superposition);
    (spec.n, spec.t_end, spec.observe_every) = (20_000, 2.0, 0.1);
    for deg in [0.1, 10.0] {
        let model = OscillatorEigenModel::ground_first_degrees(deg)?;
        let (run, _) = track_superposition(&model, &spec, Some(1.0))?;
        let (control, _) = track_superposition(&model, &spec, None)?;
        let (h, c) = (run.series(DistanceKind::H), control.series(DistanceKind::H));
        println!("mix {deg}°:");
        for i in (0..h.len()).step_by(4) {
            println!("  t = {:.1}  L_H = {:.4}  control = {:.4}", h.times[i], h.values[i], c.values[i]);
        }
    }
    Ok(())
}
