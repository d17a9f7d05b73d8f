//! Atomic artifact writing and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::plot::{emit_plot, Curve, PlotError, PlotStyle};
use super::CliError;
use crate::experiments::{StudyOutput, ValidationCheck};
use crate::stats::series_csv;

const CONTROL_PREFIX: &str = "control_";

#[derive(Debug, Serialize)]
struct ManifestEntry {
    sha256: String,
    bytes: usize,
}

/// An output root that remembers what it wrote.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Mutex<BTreeMap<String, ManifestEntry>>,
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

impl OutputDir {
    pub fn new(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| io_err(root, e))?;
        Ok(Self { root: root.to_path_buf(), written: Mutex::new(BTreeMap::new()) })
    }

    /// Writes `bytes` to `rel` via a temporary sibling and a rename.
    pub fn write(&self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(rel);
        let parent = path.parent().unwrap_or(&self.root);
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
        let tmp = parent.join(format!(".{name}.tmp"));
        {
            let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
            f.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
            f.sync_all().map_err(|e| io_err(&tmp, e))?;
        }
        fs::rename(&tmp, &path).map_err(|e| io_err(&path, e))?;
        let entry = ManifestEntry { sha256: hex::encode(Sha256::digest(bytes)), bytes: bytes.len() };
        self.written.lock().expect("manifest lock").insert(rel.to_string(), entry);
        Ok(())
    }

    /// Writes `manifest.json` listing every file written so far; returns the count.
    pub fn finish(&self) -> Result<usize, CliError> {
        let written = self.written.lock().expect("manifest lock");
        let json = serde_json::to_string_pretty(&serde_json::json!({ "files": &*written })).expect("manifest serializes");
        let n = written.len();
        drop(written);
        self.write("manifest.json", format!("{json}\n").as_bytes())?;
        Ok(n + 1)
    }
}

fn join(dir: &str, file: &str) -> String {
    if dir.is_empty() {
        file.to_string()
    } else {
        format!("{dir}/{file}")
    }
}

/// Writes the report, every series as CSV, one SVG per series (overlaid with
/// its equilibrium control when present) and the manifest.
pub fn write_study(out: &OutputDir, study: &StudyOutput) -> Result<usize, CliError> {
    let report = serde_json::to_string_pretty(&study.report).map_err(|e| CliError::Output(e.to_string()))?;
    out.write("report.json", format!("{report}\n").as_bytes())?;
    for s in &study.series {
        out.write(&join(&s.dir, &format!("series_{}.csv", s.name)), series_csv(&s.times, &s.values).as_bytes())?;
    }
    for s in study.series.iter().filter(|s| !s.name.starts_with(CONTROL_PREFIX)) {
        let control = study.series.iter().find(|c| c.dir == s.dir && c.name == format!("{CONTROL_PREFIX}{}", s.name));
        let mut curves = vec![Curve { label: &s.name, x: &s.times, y: &s.values }];
        if let Some(c) = control {
            curves.push(Curve { label: &c.name, x: &c.times, y: &c.values });
        }
        let style = PlotStyle {
            title: s.dir.clone(),
            x_label: "t".into(),
            y_label: s.name.clone(),
            log_y: s.log_y,
            provenance: Some(study.report.provenance.clone()),
        };
        match emit_plot(&curves, &style) {
            Ok(svg) => out.write(&join(&s.dir, &format!("{}.svg", s.name)), svg.as_bytes())?,
            Err(e @ PlotError::EmptySeries(_)) => eprintln!("skipping plot {}/{}: {e}", s.dir, s.name),
            Err(e) => return Err(CliError::Output(e.to_string())),
        }
    }
    out.finish()
}

/// Writes the validation table as JSON plus the manifest.
pub fn write_validation(out: &OutputDir, checks: &[ValidationCheck]) -> Result<usize, CliError> {
    let json = serde_json::to_string_pretty(checks).map_err(|e| CliError::Output(e.to_string()))?;
    out.write("validation.json", format!("{json}\n").as_bytes())?;
    out.finish()
}
