//! Writes an SVG overlaying an ensemble histogram on |psi|², in the style of the
//! command-line plots.

use nelson_relax::cli::plot::{emit_plot, Curve, PlotStyle};
use nelson_relax::models::{DoubleSlitModel, WavefunctionModel};
use nelson_relax::sde::{simulate, Ensemble, IntegratorConfig};
use nelson_relax::stats::{estimate_density, GridSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = DoubleSlitModel::new(0.3)?;
    let t = 0.1;
    let mut ens = Ensemble::delta_pair(1.0, 50_000, 5)?;
    simulate(&mut ens, &model, &IntegratorConfig::new(1e-4, 0.5), t, t, |_| Ok(()))?;
    let (lo, hi) = model.support(t);
    let grid = GridSpec::new(lo, hi, 200)?;
    let xs = grid.fine_points(2);
    let p = estimate_density(ens.positions(), grid)?.eval_many(&xs);
    let born: Vec<f64> = xs.iter().map(|&x| model.density_at(x, t)).collect();
    let style = PlotStyle { title: format!("t = {t}"), x_label: "x".into(), y_label: "density".into(), ..Default::default() };
    let svg = emit_plot(&[Curve { label: "P", x: &xs, y: &p }, Curve { label: "|psi|²", x: &xs, y: &born }], &style)?;
    let path = std::env::temp_dir().join("double_slit_snapshot.svg");
    std::fs::write(&path, svg)?;
    println!("wrote {}", path.display());
    Ok(())
}
