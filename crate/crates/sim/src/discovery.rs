//! Two-phase sink discovery.
//!
//! Phase 1 exchanges quorum declarations and flags a node once some own
//! quorum is declared by each of its members. Phase 2 spreads the flag
//! through `Extend(q)` messages, accepted only when every process of
//! some `q ∩ q′` has sent it.

use std::collections::{BTreeMap, BTreeSet};

use hqs_core::{ProcessId, ProcessSet, QuorumSet, QuorumSystem};
use serde::{Deserialize, Serialize};

use crate::kernel::{Adversary, AdvCtx, Ctx, Protocol};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscoveryMsg {
    Exchange(QuorumSet),
    Extend(ProcessSet),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscoveryRequest {
    Discover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinkPhase {
    Exchange,
    Extend,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscoveryResponse {
    InSink(SinkPhase),
}

/// Acceptance filter for quorums carried by `Extend`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidQ {
    /// `q` must be one of the given minimal quorums.
    Oracle(BTreeSet<ProcessSet>),
    /// `|q| ≥ k`.
    Threshold(usize),
    AcceptAll,
}

impl ValidQ {
    pub fn oracle(qs: &QuorumSystem, attack: &hqs_core::Attack) -> ValidQ {
        ValidQ::Oracle(qs.minimal_quorums(attack))
    }

    pub fn accepts(&self, q: ProcessSet) -> bool {
        if q.is_empty() {
            return false;
        }
        match self {
            ValidQ::Oracle(mq) => mq.contains(&q),
            ValidQ::Threshold(k) => q.len() >= *k,
            ValidQ::AcceptAll => true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscoveryNode {
    pub quorums: QuorumSet,
    pub qmap: BTreeMap<ProcessId, QuorumSet>,
    pub in_sink: bool,
    /// Phase that first set `in_sink`.
    pub phase: Option<SinkPhase>,
    pub followers: ProcessSet,
    pub sent_extend: bool,
    pub extends: BTreeMap<ProcessSet, ProcessSet>,
    #[serde(skip)]
    pub validq: ValidQ,
}

impl DiscoveryNode {
    pub fn new(quorums: QuorumSet, validq: ValidQ) -> Self {
        DiscoveryNode {
            quorums,
            qmap: BTreeMap::new(),
            in_sink: false,
            phase: None,
            followers: ProcessSet::new(),
            sent_extend: false,
            extends: BTreeMap::new(),
            validq,
        }
    }

    fn members(&self) -> ProcessSet {
        self.quorums.iter().fold(ProcessSet::new(), |a, q| a | *q)
    }

    fn flag(&mut self, ctx: &mut Ctx<'_, Self>, phase: SinkPhase) {
        if !self.in_sink {
            self.in_sink = true;
            self.phase = Some(phase);
            ctx.respond(DiscoveryResponse::InSink(phase));
        }
    }

    /// Some own quorum every member of which reported it.
    pub fn phase1_quorum(&self) -> Option<ProcessSet> {
        self.quorums
            .iter()
            .find(|q| q.iter().all(|p| self.qmap.get(&p).is_some_and(|s| s.contains(*q))))
            .copied()
    }

    fn check_phase1(&mut self, ctx: &mut Ctx<'_, Self>) {
        if self.sent_extend {
            return;
        }
        if let Some(q) = self.phase1_quorum() {
            self.sent_extend = true;
            self.flag(ctx, SinkPhase::Exchange);
            ctx.send_all(self.members(), DiscoveryMsg::Extend(q));
        }
    }

    /// Whether the collected `Extend(q)` senders cover some `q ∩ q′`.
    pub fn extend_accepted(&self, q: ProcessSet) -> bool {
        let Some(senders) = self.extends.get(&q) else {
            return false;
        };
        self.validq.accepts(q)
            && self.quorums.iter().any(|q2| {
                let i = q & *q2;
                !i.is_empty() && i.is_subset(senders)
            })
    }
}

impl Protocol for DiscoveryNode {
    type Msg = DiscoveryMsg;
    type Request = DiscoveryRequest;
    type Response = DiscoveryResponse;

    fn on_request(&mut self, ctx: &mut Ctx<'_, Self>, req: DiscoveryRequest) {
        match req {
            DiscoveryRequest::Discover => {
                ctx.send_all(self.members(), DiscoveryMsg::Exchange(self.quorums.clone()));
            }
        }
    }

    fn on_message(&mut self, ctx: &mut Ctx<'_, Self>, from: ProcessId, msg: DiscoveryMsg) {
        match msg {
            DiscoveryMsg::Exchange(qs) => {
                self.followers.insert(from);
                self.qmap.insert(from, qs);
                self.check_phase1(ctx);
            }
            DiscoveryMsg::Extend(q) => {
                self.extends.entry(q).or_default().insert(from);
                if !self.in_sink && self.extend_accepted(q) {
                    self.flag(ctx, SinkPhase::Extend);
                }
            }
        }
    }
}

/// Builds one discovery node per declared well-behaved process.
pub fn discovery_nodes(
    qs: &QuorumSystem,
    attack: &hqs_core::Attack,
    validq: &ValidQ,
) -> BTreeMap<ProcessId, DiscoveryNode> {
    qs.declarations()
        .iter()
        .filter(|(p, _)| !attack.is_byzantine(**p))
        .map(|(p, q)| (*p, DiscoveryNode::new(q.clone(), validq.clone())))
        .collect()
}

/// Byzantine `liar` sends `Extend(q)` to `target` at start, and answers
/// every Exchange with `fake` quorums.
pub struct DeceiveExtend {
    pub liar: ProcessId,
    pub target: ProcessId,
    pub quorum: ProcessSet,
    pub fake: QuorumSet,
}

impl DeceiveExtend {
    /// Byzantine 5 in the graph example tries to pull 4 into the sink.
    pub fn five_deceives_four() -> Self {
        DeceiveExtend {
            liar: ProcessId(5),
            target: ProcessId(4),
            quorum: ProcessSet::of(&[1, 3, 5]),
            fake: [ProcessSet::of(&[1, 2, 4, 5])].into_iter().collect(),
        }
    }
}

impl Adversary<DiscoveryNode> for DeceiveExtend {
    fn on_start(&mut self, ctx: &mut AdvCtx<'_, DiscoveryNode>) {
        let _ = ctx.send(self.liar, self.target, DiscoveryMsg::Extend(self.quorum));
        let _ = ctx.send(self.liar, self.target, DiscoveryMsg::Exchange(self.fake.clone()));
    }

    fn on_message(&mut self, ctx: &mut AdvCtx<'_, DiscoveryNode>, to: ProcessId, from: ProcessId, msg: &DiscoveryMsg) {
        if to != self.liar {
            return;
        }
        if let DiscoveryMsg::Exchange(_) = msg {
            let _ = ctx.send(self.liar, from, DiscoveryMsg::Exchange(self.fake.clone()));
            let _ = ctx.send(self.liar, from, DiscoveryMsg::Extend(self.quorum));
        }
    }
}

/// Byzantine processes answer with random quorums and random Extends.
pub struct RandomDiscoveryAdversary {
    pub universe: ProcessSet,
}

impl Adversary<DiscoveryNode> for RandomDiscoveryAdversary {
    fn on_message(&mut self, ctx: &mut AdvCtx<'_, DiscoveryNode>, to: ProcessId, from: ProcessId, _msg: &DiscoveryMsg) {
        use rand::Rng;
        let all = self.universe.to_vec();
        let pick = |ctx: &mut AdvCtx<'_, DiscoveryNode>| -> ProcessSet {
            all.iter().copied().filter(|_| ctx.rng().gen_bool(0.5)).collect()
        };
        let q = pick(ctx).with(to);
        let _ = ctx.send(to, from, DiscoveryMsg::Exchange([q].into_iter().collect()));
        let e = pick(ctx);
        let _ = ctx.send(to, from, DiscoveryMsg::Extend(e));
    }
}

/// `{"in_sink": {id: bool}, "followers": {id: [ids]}}`.
pub fn export(nodes: &BTreeMap<ProcessId, DiscoveryNode>) -> serde_json::Value {
    let in_sink: serde_json::Map<String, serde_json::Value> = nodes
        .iter()
        .map(|(p, n)| (p.to_string(), serde_json::Value::Bool(n.in_sink)))
        .collect();
    let followers: serde_json::Map<String, serde_json::Value> = nodes
        .iter()
        .map(|(p, n)| (p.to_string(), serde_json::to_value(n.followers).unwrap()))
        .collect();
    serde_json::json!({"in_sink": in_sink, "followers": followers})
}

/// Well-behaved nodes currently flagged.
pub fn proto_sink(nodes: &BTreeMap<ProcessId, DiscoveryNode>) -> ProcessSet {
    nodes.iter().filter(|(_, n)| n.in_sink).map(|(p, _)| *p).collect()
}
