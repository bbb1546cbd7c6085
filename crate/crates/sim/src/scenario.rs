//! JSON scenario files: which protocol runs on which system, the client
//! requests, the adversary, the schedule and the probes.

use std::collections::BTreeMap;

use hqs_core::props::maximal_outlived_sets;
use hqs_core::{ProcessId, ProcessSet, QuorumSet, SystemDoc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::adversary::{Chaos, Responder, SplitRequester};
use crate::broadcast::{brb_nodes, BrbNode, BrbRequest, Equivocate};
use crate::discovery::{self, DeceiveExtend, DiscoveryRequest, RandomDiscoveryAdversary, ValidQ};
use crate::kernel::{FnProbe, Protocol, RunStatus, ScheduleMode, SchedulePolicy, Silent, TobLiveness, Violation, World};
use crate::probes::{snapshot, Env, ProbeKind, ReconfigProbe};
use crate::reconfig::{LeaveMode, RcRequest, ReconfigNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Reconfig,
    Discovery,
    Brb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SinkInfo {
    /// Always coordinate.
    #[default]
    Unknown,
    /// Use the true sink membership.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Leave,
    Remove,
    Add,
    Join,
    Discover,
    Broadcast,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestSpec {
    pub node: u32,
    pub op: Op,
    #[serde(default)]
    pub quorum: Vec<u32>,
    #[serde(default)]
    pub value: u64,
    #[serde(default)]
    pub at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversarySpec {
    Silent,
    /// Answer like an honest process; the map gives quorums to report.
    Responder {
        #[serde(default)]
        quorums: BTreeMap<u32, Vec<Vec<u32>>>,
        #[serde(default = "yes")]
        ack_inclusion: bool,
    },
    Chaos {
        #[serde(default)]
        fake_checks: bool,
    },
    SplitRequester {
        requester: u32,
        qc: Vec<u32>,
        success_to: Vec<u32>,
        #[serde(default)]
        fail_first: bool,
    },
    DeceiveExtend,
    RandomDiscovery,
    Equivocate {
        #[serde(default)]
        senders: Vec<u32>,
    },
}

fn yes() -> bool {
    true
}

fn default_fairness() -> u64 {
    64
}

fn default_cap() -> u64 {
    crate::kernel::DEFAULT_STEP_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleSpec {
    RandomFair,
    AdversarialReorder,
    Scripted(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedProbe {
    Reconfig(ProbeKind),
    /// Every minimal quorum's well-behaved part is flagged at the end.
    Completeness,
    /// Flagged nodes lie in the sink.
    Accuracy,
    /// The listed processes never flag.
    NeverInSink(Vec<u32>),
    /// No two members of `𝓞` deliver different values for one origin.
    BrbConsistency,
    BrbValidity,
    BrbTotality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub protocol: ProtocolKind,
    /// Path to the system file, relative to the scenario file; or a fixture
    /// name prefixed with `fixture:`.
    pub system: String,
    pub seed: u64,
    #[serde(default)]
    pub outlived: Option<Vec<u32>>,
    #[serde(default = "default_schedule")]
    pub schedule: ScheduleSpec,
    #[serde(default = "default_fairness")]
    pub fairness_bound: u64,
    #[serde(default = "default_cap")]
    pub step_cap: u64,
    #[serde(default = "default_adversary")]
    pub adversary: AdversarySpec,
    #[serde(default = "default_mode")]
    pub mode: LeaveMode,
    #[serde(default)]
    pub sink: SinkInfo,
    #[serde(default = "yes")]
    pub combined: bool,
    #[serde(default)]
    pub harden_fail: bool,
    /// Processes outside the system that may join.
    #[serde(default)]
    pub joiners: Vec<u32>,
    #[serde(default)]
    pub join_timeout: Option<u64>,
    /// Restrict tob liveness to these processes.
    #[serde(default)]
    pub tob_live: Option<Vec<u32>>,
    #[serde(default)]
    pub validq: Option<ValidQ>,
    #[serde(default)]
    pub requests: Vec<RequestSpec>,
    #[serde(default)]
    pub probes: Vec<NamedProbe>,
}

fn default_schedule() -> ScheduleSpec {
    ScheduleSpec::RandomFair
}

fn default_adversary() -> AdversarySpec {
    AdversarySpec::Silent
}

fn default_mode() -> LeaveMode {
    LeaveMode::Ac
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub status: RunStatus,
    pub steps: u64,
    pub outlived: ProcessSet,
    pub violations: Vec<Violation>,
    pub violation_counts: BTreeMap<String, u64>,
    pub responses: Vec<Value>,
    /// Protocol-specific end state.
    pub result: Value,
    #[serde(skip)]
    pub trace: String,
    /// Eligible-event counts per step, for [`crate::explore`].
    #[serde(skip)]
    pub branching: Vec<usize>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.violations.is_empty() && self.status == RunStatus::Quiescent
    }
}

fn set(v: &[u32]) -> ProcessSet {
    ProcessSet::of(v)
}

fn quorum_set(v: &[Vec<u32>]) -> QuorumSet {
    v.iter().map(|q| set(q)).collect()
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, String> {
        serde_json::from_str(text).map_err(|e| format!("scenario: {e} at line {} column {}", e.line(), e.column()))
    }

    fn policy(&self) -> SchedulePolicy {
        let mut p = match &self.schedule {
            ScheduleSpec::RandomFair => SchedulePolicy::random(self.seed),
            ScheduleSpec::AdversarialReorder => SchedulePolicy::adversarial(self.seed),
            ScheduleSpec::Scripted(s) => SchedulePolicy::scripted(s.clone()),
        };
        if p.mode != ScheduleMode::ScriptedInterleaving {
            p.fairness_bound = self.fairness_bound;
        }
        p
    }

    fn outlived_set(&self, doc: &SystemDoc) -> ProcessSet {
        match &self.outlived {
            Some(v) => set(v),
            None => maximal_outlived_sets(&doc.system, &doc.attack, 16)
                .ok()
                .and_then(|v| v.first().copied())
                .unwrap_or_default(),
        }
    }

    pub fn run(&self, doc: &SystemDoc) -> Outcome {
        match self.protocol {
            ProtocolKind::Reconfig => self.run_reconfig(doc),
            ProtocolKind::Discovery => self.run_discovery(doc),
            ProtocolKind::Brb => self.run_brb(doc),
        }
    }

    fn configure<P: Protocol>(&self, world: World<P>) -> World<P> {
        let w = world.with_step_cap(self.step_cap);
        match &self.tob_live {
            Some(v) => w.with_tob_liveness(TobLiveness::Only(set(v))),
            None => w,
        }
    }

    fn run_reconfig(&self, doc: &SystemDoc) -> Outcome {
        let qs = &doc.system;
        let attack = &doc.attack;
        let outlived = self.outlived_set(doc);
        let mut nodes = BTreeMap::new();
        for (p, q) in qs.declarations() {
            if attack.is_byzantine(*p) {
                continue;
            }
            let mut n = ReconfigNode::new(q.clone(), qs.followers(*p), self.mode);
            n.combined = self.combined;
            n.harden_fail = self.harden_fail;
            if self.sink == SinkInfo::Oracle {
                n.in_sink = hqs_core::graph::in_sink(qs, *p).ok();
            }
            nodes.insert(*p, n);
        }
        for j in &self.joiners {
            let mut n = ReconfigNode::joiner(self.mode);
            if let Some(t) = self.join_timeout {
                n.join_timeout = t;
            }
            nodes.insert(ProcessId(*j), n);
        }
        let mut world = self.configure(World::new(nodes, attack.byzantine(), self.policy()));
        world = match &self.adversary {
            AdversarySpec::Responder { quorums, ack_inclusion } => {
                let mut r = Responder::new(quorums.iter().map(|(p, q)| (ProcessId(*p), quorum_set(q))).collect());
                r.ack_inclusion = *ack_inclusion;
                world.with_adversary(r)
            }
            AdversarySpec::Chaos { fake_checks } => world.with_adversary(Chaos {
                universe: qs.universe(),
                fake_checks: *fake_checks,
            }),
            AdversarySpec::SplitRequester {
                requester,
                qc,
                success_to,
                fail_first,
            } => {
                let mut a = SplitRequester::new(ProcessId(*requester), set(qc), set(success_to));
                a.fail_first = *fail_first;
                world.with_adversary(a)
            }
            _ => world.with_adversary(Silent),
        };
        let env = Env::new(qs, attack, outlived);
        for p in &self.probes {
            if let NamedProbe::Reconfig(k) = p {
                world.add_probe(ReconfigProbe::new(k.clone(), env.clone()));
            }
        }
        for r in &self.requests {
            let req = match r.op {
                Op::Leave => RcRequest::Leave,
                Op::Remove => RcRequest::Remove(set(&r.quorum)),
                Op::Add => RcRequest::Add(set(&r.quorum)),
                Op::Join => RcRequest::Join(set(&r.quorum)),
                _ => continue,
            };
            world.request(ProcessId(r.node), req, r.at);
        }
        let status = world.run();
        let sys = snapshot(&env, world.nodes());
        let final_doc = SystemDoc {
            system: sys,
            attack: attack.clone(),
            labels: doc.labels.clone(),
        };
        let result = json!({
            "system": hqs_core::json::system_to_value(&final_doc),
            "left": crate::probes::departed(world.nodes()),
        });
        outcome(&world, status, outlived, result)
    }

    fn run_discovery(&self, doc: &SystemDoc) -> Outcome {
        let qs = &doc.system;
        let attack = &doc.attack;
        let validq = self.validq.clone().unwrap_or_else(|| ValidQ::oracle(qs, attack));
        let nodes = discovery::discovery_nodes(qs, attack, &validq);
        let ids: Vec<ProcessId> = nodes.keys().copied().collect();
        let mut world = self.configure(World::new(nodes, attack.byzantine(), self.policy()));
        world = match &self.adversary {
            AdversarySpec::DeceiveExtend => world.with_adversary(DeceiveExtend::five_deceives_four()),
            AdversarySpec::RandomDiscovery => world.with_adversary(RandomDiscoveryAdversary {
                universe: qs.universe(),
            }),
            _ => world.with_adversary(Silent),
        };
        let sink = hqs_core::graph::sink_members(qs);
        let mq = qs.minimal_quorums(attack);
        let w = attack.well_behaved();
        for p in &self.probes {
            match p {
                NamedProbe::Accuracy => world.add_probe(FnProbe::every_step("accuracy", move |v| {
                    let s = discovery::proto_sink(v.nodes);
                    (!s.is_subset(&sink)).then(|| format!("{} not in sink {}", s - sink, sink))
                })),
                NamedProbe::Completeness => {
                    let mq = mq.clone();
                    world.add_probe(FnProbe::at_end("completeness", move |v| {
                        let s = discovery::proto_sink(v.nodes);
                        mq.iter()
                            .find(|q| !(**q & w).is_subset(&s))
                            .map(|q| format!("{} missing from {}", (*q & w) - s, s))
                    }))
                }
                NamedProbe::NeverInSink(ps) => {
                    let ps = set(ps);
                    world.add_probe(FnProbe::every_step("never_in_sink", move |v| {
                        let s = discovery::proto_sink(v.nodes) & ps;
                        (!s.is_empty()).then(|| format!("{s} flagged"))
                    }))
                }
                _ => {}
            }
        }
        let explicit: Vec<&RequestSpec> = self.requests.iter().filter(|r| r.op == Op::Discover).collect();
        if explicit.is_empty() {
            for p in ids {
                world.request(p, DiscoveryRequest::Discover, 0);
            }
        } else {
            for r in explicit {
                world.request(ProcessId(r.node), DiscoveryRequest::Discover, r.at);
            }
        }
        let status = world.run();
        let result = discovery::export(world.nodes());
        outcome(&world, status, self.outlived_set(doc), result)
    }

    fn run_brb(&self, doc: &SystemDoc) -> Outcome {
        let qs = &doc.system;
        let attack = &doc.attack;
        let outlived = self.outlived_set(doc);
        let nodes = brb_nodes(qs, attack);
        let mut world = self.configure(World::new(nodes, attack.byzantine(), self.policy()));
        world = match &self.adversary {
            AdversarySpec::Equivocate { senders } => {
                world.with_adversary(Equivocate::new(set(senders), qs.active()))
            }
            _ => world.with_adversary(Silent),
        };
        let honest: Vec<(ProcessId, u64)> = self
            .requests
            .iter()
            .filter(|r| r.op == Op::Broadcast)
            .map(|r| (ProcessId(r.node), r.value))
            .collect();
        for p in &self.probes {
            add_brb_probe(&mut world, p, &honest, outlived);
        }
        for r in self.requests.iter().filter(|r| r.op == Op::Broadcast) {
            world.request(ProcessId(r.node), BrbRequest::Broadcast(r.value), r.at);
        }
        let status = world.run();
        let delivered: BTreeMap<String, BTreeMap<String, u64>> = world
            .nodes()
            .iter()
            .map(|(p, n)| {
                let d = n
                    .instances
                    .iter()
                    .filter_map(|(o, i)| i.delivered.map(|v| (o.to_string(), v)))
                    .collect();
                (p.to_string(), d)
            })
            .collect();
        outcome(&world, status, outlived, json!({ "delivered": delivered }))
    }
}

/// Registers a broadcast probe. `honest` lists well-behaved senders with
/// the value they broadcast.
pub fn add_brb_probe(world: &mut World<BrbNode>, p: &NamedProbe, honest: &[(ProcessId, u64)], outlived: ProcessSet) {
    match p {
        NamedProbe::BrbConsistency => world.add_probe(FnProbe::every_step("brb_consistency", move |v: &crate::kernel::View<'_, BrbNode>| {
            let mut seen: BTreeMap<ProcessId, (ProcessId, u64)> = BTreeMap::new();
            for (p, n) in v.nodes.iter().filter(|(p, _)| outlived.contains(**p)) {
                for (o, i) in &n.instances {
                    if let Some(val) = i.delivered {
                        if let Some((p0, v0)) = seen.insert(*o, (*p, val)) {
                            if v0 != val {
                                return Some(format!("origin {o}: {p0} delivered {v0}, {p} delivered {val}"));
                            }
                        }
                    }
                }
            }
            None
        })),
        NamedProbe::BrbValidity => {
            let honest = honest.to_vec();
            world.add_probe(FnProbe::at_end("brb_validity", move |v: &crate::kernel::View<'_, BrbNode>| {
                for (s, val) in &honest {
                    for p in outlived {
                        let got = v.nodes.get(&p).and_then(|n| n.delivered(*s));
                        if got != Some(*val) {
                            return Some(format!("{p} delivered {got:?} from {s}, expected {val}"));
                        }
                    }
                }
                None
            }))
        }
        NamedProbe::BrbTotality => world.add_probe(FnProbe::at_end("brb_totality", move |v: &crate::kernel::View<'_, BrbNode>| {
            let origins: ProcessSet = v
                .nodes
                .values()
                .flat_map(|n| n.instances.iter().filter(|(_, i)| i.delivered.is_some()).map(|(o, _)| *o))
                .collect();
            for o in origins {
                for p in outlived {
                    if v.nodes.get(&p).and_then(|n| n.delivered(o)).is_none() {
                        return Some(format!("{p} did not deliver from {o}"));
                    }
                }
            }
            None
        })),
        _ => {}
    }
}

fn outcome<P: Protocol>(world: &World<P>, status: RunStatus, outlived: ProcessSet, result: Value) -> Outcome {
    Outcome {
        status,
        steps: world.steps(),
        outlived,
        violations: world.violations().to_vec(),
        violation_counts: world.violation_counts().clone(),
        responses: world
            .responses()
            .iter()
            .map(|r| json!({"step": r.step, "node": r.node, "response": r.response}))
            .collect(),
        result,
        trace: world.trace().to_jsonl(),
        branching: world.branching().to_vec(),
    }
}

/// Responses as (node, debug name) pairs, for quick assertions.
pub fn response_names(o: &Outcome) -> Vec<(u32, String)> {
    o.responses
        .iter()
        .map(|r| {
            let n = r["node"].as_u64().unwrap_or(0) as u32;
            let s = match &r["response"] {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            (n, s)
        })
        .collect()
}
