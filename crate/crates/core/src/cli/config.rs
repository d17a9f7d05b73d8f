//! Study configuration: defaults, a JSON file with one object per scenario, and
//! `--set` overrides.

use std::path::Path;

use serde_json::{Map, Value};

use super::CliError;
use crate::experiments::{Scenario, StudySpec};

/// Recursively overlays `patch` onto `base`; objects merge key by key.
fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}

/// Reads the per-scenario object from a config document, if any.
pub fn scenario_section(path: &Path, scenario: Scenario) -> Result<Option<Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {} is not valid JSON: {e}", path.display())))?;
    let Value::Object(map) = doc else {
        return Err(CliError::Config(format!("config {} must be a JSON object keyed by scenario", path.display())));
    };
    if let Some(k) = map.keys().find(|k| Scenario::from_name(k).is_none()) {
        return Err(CliError::Config(format!("config {}: unknown scenario `{k}`", path.display())));
    }
    Ok(map.get(scenario.name()).cloned())
}

/// Parses an override value: JSON if it parses, otherwise a string.
fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Applies `key=value`. Keys are dotted paths into the spec; a bare name that
/// is not a spec field addresses the parameter grid. Scalars assigned to grid
/// entries become one-element lists.
pub fn apply_override(spec: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not of the form KEY=VALUE")))?;
    let mut path: Vec<&str> = key.split('.').collect();
    let root = spec.as_object().ok_or_else(|| CliError::Config("spec is not an object".into()))?;
    if path.len() == 1 && !root.contains_key(path[0]) {
        path.insert(0, "grid");
    }
    let mut slot = &mut *spec;
    for (i, part) in path.iter().enumerate() {
        let obj = slot.as_object_mut().ok_or_else(|| CliError::Config(format!("override `{key}`: `{part}` is not a section")))?;
        // grid entries may be introduced only if the scenario already reads them
        slot = obj.get_mut(*part).ok_or_else(|| {
            CliError::Config(format!("override `{key}`: unknown key `{}`", path[..=i].join(".")))
        })?;
    }
    let mut value = parse_value(raw);
    if path[0] == "grid" && path.len() == 2 && !value.is_array() {
        value = Value::Array(vec![value]);
    }
    *slot = value;
    Ok(())
}

/// Defaults, then the config section, then overrides, then the seed.
pub fn resolve_spec(
    scenario: Scenario,
    config: Option<&Path>,
    overrides: &[String],
    seed: Option<u64>,
) -> Result<StudySpec, CliError> {
    let mut value = serde_json::to_value(StudySpec::defaults(scenario)).expect("spec serializes");
    if let Some(path) = config {
        if let Some(section) = scenario_section(path, scenario)? {
            if !section.is_object() {
                return Err(CliError::Config(format!("config section `{scenario}` must be an object")));
            }
            if let Some(s) = section.get("scenario") {
                if s != &Value::String(scenario.name().into()) {
                    return Err(CliError::Config(format!("config section `{scenario}` names scenario {s}")));
                }
            }
            merge(&mut value, &section);
        }
    }
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    if let Some(seed) = seed {
        value["master_seed"] = Value::from(seed);
    }
    let spec: StudySpec = serde_json::from_value(value).map_err(|e| CliError::Config(format!("invalid {scenario} spec: {e}")))?;
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(spec)
}

/// Empty config document with every scenario's defaults, for `--config` templates.
pub fn default_document() -> Value {
    let mut map = Map::new();
    for s in Scenario::ALL {
        map.insert(s.name().into(), serde_json::to_value(StudySpec::defaults(s)).expect("spec serializes"));
    }
    Value::Object(map)
}
