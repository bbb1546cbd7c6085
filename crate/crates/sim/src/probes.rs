//! Invariant probes over reconfiguration runs. Each probe rebuilds the
//! current quorum system from node states and runs a checker on it.

use std::collections::{BTreeMap, BTreeSet};

use hqs_core::props::{
    check_active_availability, check_active_inclusion, check_consistency_raw, check_quorum_inclusion,
    check_tentative_inclusion,
};
use hqs_core::{Attack, ProcessId, ProcessSet, PropertyReport, QuorumSet, QuorumSystem, TentativeMap};
use serde::{Deserialize, Serialize};

use crate::kernel::{Probe, View};
use crate::reconfig::{RcResponse, ReconfigNode};

/// What a reconfiguration scenario checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    /// Consistency at `𝓞 ∖ 𝓛` every step.
    LeaveConsistency,
    /// Active inclusion every step, full inclusion for `𝓞 ∖ 𝓛` at the end.
    LeaveInclusion,
    /// Active availability every step, availability inside `𝓞 ∖ 𝓛` at the end.
    LeaveAvailability,
    /// Consistency at `𝓞` every step.
    AddConsistency,
    /// Tentative inclusion every step, inclusion for `𝓞` at the end.
    AddInclusion,
    /// Consistency at `𝓦` every step.
    WellBehavedConsistency,
    /// Every quorum held by a well-behaved node was chosen by it.
    Policy,
    /// Each listed process keeps a quorum inside `𝓞 ∖ 𝓛`.
    Availability(ProcessSet),
    /// No pair both succeeded somewhere and completed Fail somewhere.
    SuccessFailExclusive,
    /// No single node both succeeded and completed Fail for one pair.
    SuccessFailLocal,
}

impl ProbeKind {
    pub fn name(&self) -> String {
        match self {
            ProbeKind::LeaveConsistency => "leave_consistency".into(),
            ProbeKind::LeaveInclusion => "leave_inclusion".into(),
            ProbeKind::LeaveAvailability => "leave_availability".into(),
            ProbeKind::AddConsistency => "add_consistency".into(),
            ProbeKind::AddInclusion => "add_inclusion".into(),
            ProbeKind::WellBehavedConsistency => "consistency_w".into(),
            ProbeKind::Policy => "policy".into(),
            ProbeKind::Availability(s) => format!("availability{s}"),
            ProbeKind::SuccessFailExclusive => "success_fail_exclusive".into(),
            ProbeKind::SuccessFailLocal => "success_fail_local".into(),
        }
    }
}

/// Static facts a probe needs beside node states.
#[derive(Debug, Clone)]
pub struct Env {
    pub universe: ProcessSet,
    pub attack: Attack,
    pub outlived: ProcessSet,
    pub byzantine_decls: BTreeMap<ProcessId, QuorumSet>,
}

impl Env {
    pub fn new(qs: &QuorumSystem, attack: &Attack, outlived: ProcessSet) -> Env {
        Env {
            universe: qs.universe(),
            attack: attack.clone(),
            outlived,
            byzantine_decls: qs
                .declarations()
                .iter()
                .filter(|(p, _)| attack.is_byzantine(**p))
                .map(|(p, q)| (*p, q.clone()))
                .collect(),
        }
    }
}

/// Processes whose leave completed.
pub fn departed(nodes: &BTreeMap<ProcessId, ReconfigNode>) -> ProcessSet {
    nodes.iter().filter(|(_, n)| n.left).map(|(p, _)| *p).collect()
}

/// The system formed by current node states plus static Byzantine
/// declarations.
pub fn snapshot(env: &Env, nodes: &BTreeMap<ProcessId, ReconfigNode>) -> QuorumSystem {
    let mut decls = env.byzantine_decls.clone();
    let mut universe = env.universe;
    let mut active = env.universe - departed(nodes);
    for (p, n) in nodes {
        universe.insert(*p);
        if n.active && !n.left {
            active.insert(*p);
            decls.insert(*p, n.quorums.clone());
        } else {
            active.remove(*p);
        }
    }
    QuorumSystem::from_parts(universe, active, decls)
}

pub fn tentative_map(nodes: &BTreeMap<ProcessId, ReconfigNode>) -> TentativeMap {
    nodes
        .iter()
        .filter(|(_, n)| !n.tentative.is_empty())
        .map(|(p, n)| (*p, n.tentative.iter().copied().collect::<BTreeSet<_>>()))
        .collect()
}

fn fails(r: PropertyReport) -> Option<String> {
    if r.holds {
        None
    } else {
        Some(serde_json::to_string(&r.witness).unwrap_or_default())
    }
}

pub struct ReconfigProbe {
    pub kind: ProbeKind,
    pub env: Env,
}

impl ReconfigProbe {
    pub fn new(kind: ProbeKind, env: Env) -> Self {
        ReconfigProbe { kind, env }
    }

    fn eval(&self, view: &View<'_, ReconfigNode>, end: bool) -> Option<String> {
        let env = &self.env;
        let sys = snapshot(env, view.nodes);
        let left = departed(view.nodes);
        let o = env.outlived;
        let a = &env.attack;
        match &self.kind {
            ProbeKind::LeaveConsistency => fails(check_consistency_raw(&sys, a, o - left)),
            ProbeKind::LeaveInclusion if end => fails(check_quorum_inclusion(&sys, a, o - left).ok()?),
            ProbeKind::LeaveInclusion => fails(check_active_inclusion(&sys, a, o, left).ok()?),
            ProbeKind::LeaveAvailability if end => fails(check_active_availability(&sys, o - left, ProcessSet::new())),
            ProbeKind::LeaveAvailability => fails(check_active_availability(&sys, o, left)),
            ProbeKind::AddConsistency => fails(check_consistency_raw(&sys, a, o)),
            ProbeKind::AddInclusion if end => fails(check_quorum_inclusion(&sys, a, o).ok()?),
            ProbeKind::AddInclusion => {
                fails(check_tentative_inclusion(&sys, a, o, &tentative_map(view.nodes)).ok()?)
            }
            ProbeKind::WellBehavedConsistency => {
                fails(check_consistency_raw(&sys, a, a.well_behaved() - left))
            }
            ProbeKind::Policy => {
                for (p, n) in view.nodes {
                    if let Some(q) = n.quorums.iter().find(|q| !n.declared.contains(q)) {
                        return Some(format!("process {p} holds undeclared quorum {q}"));
                    }
                }
                None
            }
            ProbeKind::Availability(set) => {
                let inside = o - left;
                (*set - left)
                    .iter()
                    .find(|p| {
                        !sys.quorums_of(*p)
                            .is_some_and(|qs| qs.iter().any(|q| (*q - left).is_subset(&inside)))
                    })
                    .map(|p| format!("process {p} has no quorum inside {inside}"))
            }
            ProbeKind::SuccessFailExclusive => {
                let done: BTreeSet<_> = view.nodes.values().flat_map(|n| n.succeeded.iter()).collect();
                view.nodes
                    .values()
                    .flat_map(|n| n.fail_completed.iter())
                    .find(|k| done.contains(k))
                    .map(|(p, q)| format!("({p}, {q}) both succeeded and failed"))
            }
            ProbeKind::SuccessFailLocal => view.nodes.iter().find_map(|(p, n)| {
                n.fail_completed
                    .intersection(&n.succeeded)
                    .next()
                    .map(|(r, q)| format!("process {p} both succeeded and failed ({r}, {q})"))
            }),
        }
    }
}

impl Probe<ReconfigNode> for ReconfigProbe {
    fn name(&self) -> String {
        self.kind.name()
    }

    fn after_step(&mut self, view: &View<'_, ReconfigNode>) -> Option<String> {
        self.eval(view, false)
    }

    fn at_quiescence(&mut self, view: &View<'_, ReconfigNode>) -> Option<String> {
        self.eval(view, true)
    }
}

/// Responses of one node, in order.
pub fn responses_of(view_responses: &[crate::kernel::ResponseRecord<RcResponse>], p: ProcessId) -> Vec<RcResponse> {
    view_responses
        .iter()
        .filter(|r| r.node == p)
        .map(|r| r.response)
        .collect()
}
