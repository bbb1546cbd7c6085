//! `check`, `graph` and `enumerate`.

use anyhow::Result;
use hqs_core::graph::{build_graph, condense, sink_components, to_dot, well_behaved_sink_members};
use hqs_core::props::{
    check_availability, check_available_inside, check_consistency, check_outlived, check_quorum_inclusion,
    check_quorum_sharing, maximal_outlived_sets,
};
use hqs_core::{ProcessId, ProcessSet, PropertyReport, SystemDoc};
use serde_json::{json, Value};

use crate::load::{name, names, show};
use crate::Format;

#[derive(Debug, Default)]
pub struct Wanted {
    pub consistency: bool,
    pub inclusion: bool,
    pub sharing: bool,
    pub availability: Option<ProcessSet>,
    pub inside: Option<ProcessSet>,
    pub outlived: Option<ProcessSet>,
    pub at: Option<ProcessSet>,
}

impl Wanted {
    fn none_selected(&self) -> bool {
        !self.consistency
            && !self.inclusion
            && !self.sharing
            && self.availability.is_none()
            && self.inside.is_none()
            && self.outlived.is_none()
    }
}

struct Row {
    label: String,
    report: PropertyReport,
}

/// Runs the requested checks. Returns whether all hold.
pub fn check(doc: &SystemDoc, mut want: Wanted, format: Format) -> Result<bool> {
    if want.none_selected() {
        want.consistency = true;
        want.inclusion = true;
        want.sharing = true;
    }
    let qs = &doc.system;
    let a = &doc.attack;
    let at = want.at.unwrap_or_else(|| a.well_behaved());
    let mut rows = Vec::new();
    if want.consistency {
        rows.push(Row {
            label: format!("consistency at {}", show(doc, at)),
            report: check_consistency(qs, a, at)?,
        });
    }
    if want.inclusion {
        rows.push(Row {
            label: format!("inclusion for {}", show(doc, at)),
            report: check_quorum_inclusion(qs, a, at)?,
        });
    }
    if want.sharing {
        rows.push(Row {
            label: "sharing".into(),
            report: check_quorum_sharing(qs),
        });
    }
    if let Some(p) = want.availability {
        rows.push(Row {
            label: format!("availability of {} at {}", show(doc, p), show(doc, at)),
            report: check_availability(qs, p, at)?,
        });
    }
    if let Some(s) = want.inside {
        rows.push(Row {
            label: format!("available inside {}", show(doc, s)),
            report: check_available_inside(qs, s)?,
        });
    }
    if let Some(o) = want.outlived {
        rows.push(Row {
            label: format!("outlived {}", show(doc, o)),
            report: check_outlived(qs, a, o)?,
        });
    }
    let ok = rows.iter().all(|r| r.report.holds);
    match format {
        Format::Json | Format::Dot => {
            let reports: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "check": r.label,
                        "property": r.report.property,
                        "holds": r.report.holds,
                        "witness": r.report.witness,
                    })
                })
                .collect();
            let mut out = json!({ "holds": ok, "reports": reports });
            if !doc.labels.is_numeric() {
                out["labels"] = labels(doc);
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Format::Text => {
            for r in &rows {
                match &r.report.witness {
                    None => println!("{}: holds", r.label),
                    Some(w) => println!("{}: FAILS, witness {w}", r.label),
                }
            }
        }
    }
    Ok(ok)
}

fn labels(doc: &SystemDoc) -> Value {
    let u = doc.system.universe() | doc.system.domain();
    Value::Object(u.iter().map(|p| (p.0.to_string(), Value::String(doc.labels.name(p)))).collect())
}

pub fn graph(doc: &SystemDoc, format: Format) -> Result<()> {
    let g = build_graph(&doc.system);
    let c = condense(&g);
    let sinks = sink_components(&c);
    let wb = well_behaved_sink_members(&doc.system, &doc.attack);
    match format {
        Format::Dot => print!("{}", to_dot(&doc.system, &doc.attack, |p| doc.labels.name(p))),
        Format::Json => {
            let edges: Vec<Value> = g.edges.iter().map(|(a, b)| json!([name(doc, *a), name(doc, *b)])).collect();
            let out = json!({
                "vertices": names(doc, g.vertices),
                "edges": edges,
                "components": c.components.iter().map(|s| names(doc, *s)).collect::<Vec<_>>(),
                "sinks": sinks.iter().map(|s| names(doc, *s)).collect::<Vec<_>>(),
                "well_behaved_sink": names(doc, wb),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Format::Text => {
            for (i, s) in c.components.iter().enumerate() {
                let mark = if sinks.contains(s) { " (sink)" } else { "" };
                println!("component {i}: {}{mark}", show(doc, *s));
            }
            if sinks.len() > 1 {
                println!("{} sink components: the system lacks quorum intersection", sinks.len());
            }
            println!("well-behaved sink: {}", show(doc, wb));
        }
    }
    Ok(())
}

/// Every `k`-subset of `from`, in lexicographic order.
fn combinations(from: &[ProcessId], k: usize) -> Vec<ProcessSet> {
    let n = from.len();
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| from[i]).collect());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Minimal `p`-blocking sets of size at most `k`.
pub fn blocking_sets(doc: &SystemDoc, p: ProcessId, k: usize) -> Result<Vec<ProcessSet>> {
    let procs = doc.system.universe().to_vec();
    let mut found: Vec<ProcessSet> = Vec::new();
    for size in 1..=k.min(procs.len()) {
        for s in combinations(&procs, size) {
            if found.iter().any(|f| f.is_subset(&s)) {
                continue;
            }
            if doc.system.is_blocking(p, s)? {
                found.push(s);
            }
        }
    }
    Ok(found)
}

pub fn enumerate(doc: &SystemDoc, k: usize, bound: usize, format: Format) -> Result<()> {
    let mq = doc.system.minimal_quorums(&doc.attack);
    let outlived = maximal_outlived_sets(&doc.system, &doc.attack, bound)?;
    let mut blocking = Vec::new();
    for p in doc.system.declarations().keys() {
        if !doc.attack.is_byzantine(*p) {
            blocking.push((*p, blocking_sets(doc, *p, k)?));
        }
    }
    match format {
        Format::Json | Format::Dot => {
            let b: serde_json::Map<String, Value> = blocking
                .iter()
                .map(|(p, v)| (doc.labels.name(*p), Value::Array(v.iter().map(|s| names(doc, *s)).collect())))
                .collect();
            let out = json!({
                "minimal_quorums": mq.iter().map(|q| names(doc, *q)).collect::<Vec<_>>(),
                "blocking": b,
                "maximal_outlived": outlived.iter().map(|o| names(doc, *o)).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Format::Text => {
            let list = |v: &mut dyn Iterator<Item = ProcessSet>| v.map(|s| show(doc, s)).collect::<Vec<_>>().join(" ");
            println!("minimal quorums: {}", list(&mut mq.iter().copied()));
            for (p, v) in &blocking {
                println!("blocking {} (size <= {k}): {}", doc.labels.name(*p), list(&mut v.iter().copied()));
            }
            println!("maximal outlived: {}", list(&mut outlived.iter().copied()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_count() {
        let from: Vec<ProcessId> = (1..=5).map(ProcessId).collect();
        assert_eq!(combinations(&from, 2).len(), 10);
        assert_eq!(combinations(&from, 5).len(), 1);
        assert!(combinations(&from, 0).is_empty());
        assert!(combinations(&from, 6).is_empty());
        let three = combinations(&from, 3);
        let uniq: std::collections::BTreeSet<_> = three.iter().collect();
        assert_eq!(uniq.len(), 10);
        assert!(three.iter().all(|s| s.len() == 3));
    }

    #[test]
    fn blocking_on_running_example() {
        let doc = hqs_core::fixtures::fig1();
        // 2's quorums {1,2},{2,3},{2,5} all contain 2
        assert_eq!(blocking_sets(&doc, ProcessId(2), 1).unwrap(), vec![hqs_core::pset![2]]);
        assert_eq!(
            blocking_sets(&doc, ProcessId(3), 2).unwrap(),
            vec![hqs_core::pset![2], hqs_core::pset![3]]
        );
        assert!(blocking_sets(&doc, ProcessId(3), 0).unwrap().is_empty());
    }
}
