use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hqs_core::{fixtures, parse_system, Attack, ProcessId, ProcessSet, SystemDoc};
use serde_json::Value;

/// Loads `fixture:NAME` or a JSON file path.
pub fn system(spec: &str) -> Result<SystemDoc> {
    if let Some(name) = spec.strip_prefix("fixture:") {
        return fixtures::by_name(name).with_context(|| {
            let known: Vec<&str> = fixtures::library().iter().map(|(n, _)| *n).collect();
            format!("unknown fixture {name:?}; known: {}", known.join(", "))
        });
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    parse_system(&text).with_context(|| format!("parsing {spec}"))
}

/// Like [`system`], but relative paths resolve against `base`.
pub fn system_relative(spec: &str, base: &Path) -> Result<SystemDoc> {
    if spec.starts_with("fixture:") || Path::new(spec).is_absolute() {
        return system(spec);
    }
    let p: PathBuf = base.join(spec);
    system(p.to_str().context("non-utf8 path")?)
}

pub fn set(doc: &SystemDoc, list: &str) -> Result<ProcessSet> {
    Ok(doc.labels.resolve_list(list)?)
}

/// Replaces the Byzantine set of `doc`.
pub fn override_attack(doc: &mut SystemDoc, list: &str) -> Result<()> {
    let byz = set(doc, list)?;
    let attack = Attack::new(doc.system.universe(), byz)?;
    if let Err(e) = doc.system.validate_attack(&attack) {
        bail!("attack {list}: {e}");
    }
    doc.attack = attack;
    Ok(())
}

pub fn name(doc: &SystemDoc, p: ProcessId) -> Value {
    if doc.labels.is_numeric() {
        Value::from(p.0)
    } else {
        Value::String(doc.labels.name(p))
    }
}

pub fn names(doc: &SystemDoc, s: ProcessSet) -> Value {
    Value::Array(s.iter().map(|p| name(doc, p)).collect())
}

pub fn show(doc: &SystemDoc, s: ProcessSet) -> String {
    let parts: Vec<String> = s.iter().map(|p| doc.labels.name(p)).collect();
    format!("{{{}}}", parts.join(","))
}
