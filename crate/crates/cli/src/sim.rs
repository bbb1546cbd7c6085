//! `simulate`.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hqs_sim::scenario::{Outcome, Scenario};
use hqs_sim::RunStatus;
use serde_json::{json, Value};

use crate::{load, Format};

pub struct SimArgs {
    pub scenario: PathBuf,
    pub system: Option<String>,
    pub seed: Option<u64>,
    pub seeds: u64,
    pub trace: Option<PathBuf>,
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Scenario::from_json(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn verdict(o: &Outcome) -> Value {
    json!({
        "seed": Value::Null,
        "verdict": if o.pass() { "PASS" } else { "FAIL" },
        "status": o.status,
        "steps": o.steps,
        "outlived": o.outlived,
        "violations": o.violations,
        "violation_counts": o.violation_counts,
        "responses": o.responses,
        "result": o.result,
    })
}

/// Runs the scenario for `seeds` consecutive seeds. Returns whether
/// every run passed.
pub fn simulate(args: &SimArgs, format: Format) -> Result<bool> {
    let mut sc = load_scenario(&args.scenario)?;
    let base = args.scenario.parent().unwrap_or(Path::new("."));
    let doc = match &args.system {
        Some(s) => load::system(s)?,
        None => load::system_relative(&sc.system, base)?,
    };
    if let Some(s) = args.seed {
        sc.seed = s;
    }
    let first = sc.seed;
    let mut all_ok = true;
    let mut runs = Vec::new();
    for seed in first..first + args.seeds.max(1) {
        sc.seed = seed;
        let o = sc.run(&doc);
        all_ok &= o.pass();
        if let Some(t) = &args.trace {
            let path = if args.seeds > 1 {
                t.with_extension(format!("{seed}.jsonl"))
            } else {
                t.clone()
            };
            std::fs::write(&path, &o.trace).with_context(|| format!("writing {}", path.display()))?;
        }
        match format {
            Format::Text => {
                let status = match o.status {
                    RunStatus::Quiescent => "quiescent",
                    RunStatus::StepCapExceeded => "step cap exceeded",
                };
                println!(
                    "seed {seed}: {} ({status} after {} steps)",
                    if o.pass() { "PASS" } else { "FAIL" },
                    o.steps
                );
                for v in &o.violations {
                    println!("  step {}: {} {}", v.step, v.probe, v.detail);
                }
                for (node, r) in hqs_sim::scenario::response_names(&o) {
                    println!("  {node} -> {r}");
                }
            }
            _ => {
                let mut v = verdict(&o);
                v["seed"] = Value::from(seed);
                runs.push(v);
            }
        }
    }
    if !matches!(format, Format::Text) {
        let out = if runs.len() == 1 {
            runs.pop().unwrap()
        } else {
            json!({ "verdict": if all_ok { "PASS" } else { "FAIL" }, "runs": runs })
        };
        println!("{}", serde_json::to_string_pretty(&out)?);
    }
    Ok(all_ok)
}
