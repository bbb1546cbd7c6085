//! Reading and writing the quorum-system JSON format.
//!
//! ```json
//! {"universe":[1,2,3],"byzantine":[3],"active":[1,2,3],
//!  "quorums":{"1":[[1,2]],"2":[[1,2]]}}
//! ```
//!
//! Ids may be integers or strings. When every id is an integer below
//! [`MAX_PROCESSES`] it is used directly; otherwise ids are mapped to dense
//! indices and the original labels are kept for output.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::ids::{ProcessId, ProcessSet, MAX_PROCESSES};
use crate::system::{Attack, QuorumSet, QuorumSystem};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(untagged)]
enum RawId {
    Num(u64),
    Str(String),
}

impl RawId {
    fn label(&self) -> String {
        match self {
            RawId::Num(n) => n.to_string(),
            RawId::Str(s) => s.clone(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    universe: Option<Vec<RawId>>,
    #[serde(default)]
    byzantine: Vec<RawId>,
    active: Option<Vec<RawId>>,
    quorums: BTreeMap<String, Vec<Vec<RawId>>>,
}

/// Maps dense ids back to the labels found in the input. Empty when ids
/// were plain integers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Labels(BTreeMap<ProcessId, String>);

impl Labels {
    pub fn is_numeric(&self) -> bool {
        self.0.is_empty()
    }

    pub fn name(&self, p: ProcessId) -> String {
        self.0.get(&p).cloned().unwrap_or_else(|| p.to_string())
    }

    /// Resolves a user-supplied id (label or number).
    pub fn resolve(&self, s: &str) -> Result<ProcessId> {
        if self.0.is_empty() {
            let n: u32 = s
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("bad process id {s:?}")))?;
            if n >= MAX_PROCESSES {
                return Err(Error::Input(format!("process id {n} out of range")));
            }
            return Ok(ProcessId(n));
        }
        self.0
            .iter()
            .find(|(_, l)| l.as_str() == s.trim())
            .map(|(p, _)| *p)
            .ok_or_else(|| Error::Input(format!("unknown process label {s:?}")))
    }

    pub fn resolve_list(&self, s: &str) -> Result<ProcessSet> {
        let mut out = ProcessSet::new();
        for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            out.insert(self.resolve(part)?);
        }
        Ok(out)
    }

    fn id_value(&self, p: ProcessId) -> Value {
        match self.0.get(&p) {
            Some(l) => Value::String(l.clone()),
            None => Value::from(p.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemDoc {
    pub system: QuorumSystem,
    pub attack: Attack,
    pub labels: Labels,
}

impl SystemDoc {
    pub fn new(system: QuorumSystem, attack: Attack) -> Self {
        SystemDoc {
            system,
            attack,
            labels: Labels::default(),
        }
    }
}

fn build_labels(raw: &RawSystem) -> Result<(Labels, BTreeMap<String, ProcessId>)> {
    let mut all: BTreeSet<RawId> = BTreeSet::new();
    let lists = raw
        .universe
        .iter()
        .chain(std::iter::once(&raw.byzantine))
        .chain(raw.active.iter());
    for l in lists {
        all.extend(l.iter().cloned());
    }
    for (k, qs) in &raw.quorums {
        all.insert(match k.parse::<u64>() {
            Ok(n) => RawId::Num(n),
            Err(_) => RawId::Str(k.clone()),
        });
        for q in qs {
            all.extend(q.iter().cloned());
        }
    }
    let numeric = all
        .iter()
        .all(|r| matches!(r, RawId::Num(n) if *n < MAX_PROCESSES as u64));
    let mut map = BTreeMap::new();
    let mut labels = BTreeMap::new();
    if numeric {
        for r in &all {
            if let RawId::Num(n) = r {
                map.insert(n.to_string(), ProcessId(*n as u32));
            }
        }
    } else {
        if all.len() > MAX_PROCESSES as usize {
            return Err(Error::Input(format!(
                "{} processes exceed the supported maximum {MAX_PROCESSES}",
                all.len()
            )));
        }
        for (i, r) in all.iter().enumerate() {
            let label = r.label();
            if map.contains_key(&label) {
                return Err(Error::Input(format!("ambiguous process id {label:?}")));
            }
            map.insert(label.clone(), ProcessId(i as u32));
            labels.insert(ProcessId(i as u32), label);
        }
    }
    Ok((Labels(labels), map))
}

pub fn parse_system(text: &str) -> Result<SystemDoc> {
    let raw: RawSystem = serde_json::from_str(text)
        .map_err(|e| Error::Input(format!("line {} column {}: {e}", e.line(), e.column())))?;
    let (labels, map) = build_labels(&raw)?;
    let id = |r: &RawId| map[&r.label()];
    let set = |v: &Vec<RawId>| v.iter().map(id).collect::<ProcessSet>();

    let mut decls = BTreeMap::new();
    for (k, qs) in &raw.quorums {
        let p = map[k];
        let set_of: QuorumSet = qs.iter().map(set).collect();
        decls.insert(p, set_of);
    }
    let mut derived = ProcessSet::new();
    for (p, qs) in &decls {
        derived.insert(*p);
        for q in qs {
            derived = derived | *q;
        }
    }
    let byz = set(&raw.byzantine);
    let universe = match &raw.universe {
        Some(u) => set(u),
        None => derived | byz,
    };
    let active = match &raw.active {
        Some(a) => set(a),
        None => universe,
    };
    let system = QuorumSystem::new(universe, active, decls).map_err(|e| match e {
        Error::UnknownProcess(p) => Error::Input(format!(
            "field \"quorums\": process {} is not in \"active\"/\"universe\"",
            labels.name(p)
        )),
        other => other,
    })?;
    let attack = Attack::new(universe, byz)?;
    system.validate_attack(&attack)?;
    Ok(SystemDoc {
        system,
        attack,
        labels,
    })
}

#[derive(Serialize)]
struct OutSystem {
    universe: Vec<Value>,
    byzantine: Vec<Value>,
    active: Vec<Value>,
    quorums: serde_json::Map<String, Value>,
}

pub fn system_to_value(doc: &SystemDoc) -> Value {
    let l = &doc.labels;
    let list = |s: ProcessSet| s.iter().map(|p| l.id_value(p)).collect::<Vec<_>>();
    let mut quorums = serde_json::Map::new();
    for (p, qs) in doc.system.declarations() {
        let arr: Vec<Value> = qs.iter().map(|q| Value::Array(list(*q))).collect();
        quorums.insert(l.name(*p), Value::Array(arr));
    }
    serde_json::to_value(OutSystem {
        universe: list(doc.system.universe()),
        byzantine: list(doc.attack.byzantine()),
        active: list(doc.system.active()),
        quorums,
    })
    .expect("system serializes")
}

/// Canonical pretty JSON. Object keys are emitted in process order.
pub fn write_system(doc: &SystemDoc) -> String {
    let l = &doc.labels;
    let list = |s: ProcessSet| {
        let parts: Vec<String> = s
            .iter()
            .map(|p| serde_json::to_string(&l.id_value(p)).unwrap())
            .collect();
        format!("[{}]", parts.join(","))
    };
    let mut out = String::from("{\n");
    out += &format!("  \"universe\": {},\n", list(doc.system.universe()));
    out += &format!("  \"byzantine\": {},\n", list(doc.attack.byzantine()));
    out += &format!("  \"active\": {},\n", list(doc.system.active()));
    out += "  \"quorums\": {";
    let entries: Vec<String> = doc
        .system
        .declarations()
        .iter()
        .map(|(p, qs)| {
            let qs: Vec<String> = qs.iter().map(|q| list(*q)).collect();
            format!(
                "\n    {}: [{}]",
                serde_json::to_string(&l.name(*p)).unwrap(),
                qs.join(", ")
            )
        })
        .collect();
    out += &entries.join(",");
    if !entries.is_empty() {
        out += "\n  ";
    }
    out += "}\n}\n";
    out
}
