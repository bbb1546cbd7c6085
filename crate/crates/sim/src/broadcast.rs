//! Bracha-style reliable broadcast over heterogeneous quorums. Echoes and
//! readies go to followers; a node readies on an echo quorum or a
//! blocking set of readies and delivers on a ready quorum.

use std::collections::BTreeMap;

use hqs_core::{Attack, ProcessId, ProcessSet, QuorumSet, QuorumSystem};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::kernel::{AdvCtx, Adversary, Ctx, Protocol};

pub type Value = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BrbMsg {
    Send { origin: ProcessId, value: Value },
    Echo { origin: ProcessId, value: Value },
    Ready { origin: ProcessId, value: Value },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BrbRequest {
    Broadcast(Value),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BrbResponse {
    Deliver { origin: ProcessId, value: Value },
    DuplicateInstance,
}

/// Per-origin instance state.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Instance {
    pub echoed: Option<Value>,
    pub readied: Option<Value>,
    pub delivered: Option<Value>,
    pub echoes: BTreeMap<Value, ProcessSet>,
    pub readies: BTreeMap<Value, ProcessSet>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BrbNode {
    pub quorums: QuorumSet,
    pub followers: ProcessSet,
    /// Recipients of the initial Send.
    pub everyone: ProcessSet,
    pub broadcast: bool,
    pub instances: BTreeMap<ProcessId, Instance>,
}

impl BrbNode {
    pub fn new(quorums: QuorumSet, followers: ProcessSet, everyone: ProcessSet) -> Self {
        BrbNode {
            quorums,
            followers,
            everyone,
            broadcast: false,
            instances: BTreeMap::new(),
        }
    }

    pub fn delivered(&self, origin: ProcessId) -> Option<Value> {
        self.instances.get(&origin).and_then(|i| i.delivered)
    }

    fn has_quorum(&self, set: ProcessSet) -> bool {
        self.quorums.iter().any(|q| q.is_subset(&set))
    }

    fn blocked_by(&self, set: ProcessSet) -> bool {
        !self.quorums.is_empty() && self.quorums.iter().all(|q| q.intersects(&set))
    }

    fn advance(&mut self, ctx: &mut Ctx<'_, Self>, origin: ProcessId) {
        let inst = self.instances.entry(origin).or_default().clone();
        if inst.readied.is_none() {
            let by_echo = inst.echoes.iter().find(|(_, s)| self.has_quorum(**s));
            let by_ready = inst.readies.iter().find(|(_, s)| self.blocked_by(**s));
            if let Some((v, _)) = by_echo.or(by_ready) {
                let v = *v;
                self.instances.get_mut(&origin).unwrap().readied = Some(v);
                ctx.send_all(self.followers, BrbMsg::Ready { origin, value: v });
            }
        }
        let inst = &self.instances[&origin];
        if inst.delivered.is_none() {
            if let Some((v, _)) = inst.readies.iter().find(|(_, s)| self.has_quorum(**s)) {
                let v = *v;
                self.instances.get_mut(&origin).unwrap().delivered = Some(v);
                ctx.respond(BrbResponse::Deliver { origin, value: v });
            }
        }
    }
}

impl Protocol for BrbNode {
    type Msg = BrbMsg;
    type Request = BrbRequest;
    type Response = BrbResponse;

    fn on_request(&mut self, ctx: &mut Ctx<'_, Self>, req: BrbRequest) {
        let BrbRequest::Broadcast(value) = req;
        if self.broadcast {
            ctx.respond(BrbResponse::DuplicateInstance);
            return;
        }
        self.broadcast = true;
        let me = ctx.me();
        ctx.send_all(self.everyone, BrbMsg::Send { origin: me, value });
    }

    fn on_message(&mut self, ctx: &mut Ctx<'_, Self>, from: ProcessId, msg: BrbMsg) {
        match msg {
            BrbMsg::Send { origin, value } => {
                if origin != from {
                    return;
                }
                let inst = self.instances.entry(origin).or_default();
                if inst.echoed.is_none() {
                    inst.echoed = Some(value);
                    ctx.send_all(self.followers, BrbMsg::Echo { origin, value });
                }
            }
            BrbMsg::Echo { origin, value } => {
                self.instances
                    .entry(origin)
                    .or_default()
                    .echoes
                    .entry(value)
                    .or_default()
                    .insert(from);
                self.advance(ctx, origin);
            }
            BrbMsg::Ready { origin, value } => {
                self.instances
                    .entry(origin)
                    .or_default()
                    .readies
                    .entry(value)
                    .or_default()
                    .insert(from);
                self.advance(ctx, origin);
            }
        }
    }
}

/// One node per well-behaved declared process, followers taken from the
/// system's follower relation.
pub fn brb_nodes(qs: &QuorumSystem, attack: &Attack) -> BTreeMap<ProcessId, BrbNode> {
    let everyone = qs.active();
    qs.declarations()
        .iter()
        .filter(|(p, _)| !attack.is_byzantine(**p))
        .map(|(p, q)| (*p, BrbNode::new(q.clone(), qs.followers(*p), everyone)))
        .collect()
}

/// Byzantine processes equivocate: a Byzantine sender sends two values to
/// a random split of the system, and Byzantine members echo and ready a
/// random one of two values to each recipient.
pub struct Equivocate {
    pub senders: ProcessSet,
    pub everyone: ProcessSet,
    pub values: [Value; 2],
    pub replied: BTreeMap<(ProcessId, ProcessId), u8>,
}

impl Equivocate {
    pub fn new(senders: ProcessSet, everyone: ProcessSet) -> Self {
        Equivocate {
            senders,
            everyone,
            values: [7, 8],
            replied: BTreeMap::new(),
        }
    }
}

impl Adversary<BrbNode> for Equivocate {
    fn on_start(&mut self, ctx: &mut AdvCtx<'_, BrbNode>) {
        for s in self.senders {
            for p in self.everyone {
                let value = self.values[ctx.rng().gen_range(0..2)];
                let _ = ctx.send(s, p, BrbMsg::Send { origin: s, value });
            }
        }
    }

    fn on_message(&mut self, ctx: &mut AdvCtx<'_, BrbNode>, to: ProcessId, _from: ProcessId, msg: &BrbMsg) {
        let origin = match msg {
            BrbMsg::Send { origin, .. } | BrbMsg::Echo { origin, .. } | BrbMsg::Ready { origin, .. } => *origin,
        };
        let n = self.replied.entry((to, origin)).or_insert(0);
        if *n >= 2 {
            return;
        }
        *n += 1;
        for p in self.everyone {
            let v = self.values[ctx.rng().gen_range(0..2)];
            let _ = ctx.send(to, p, BrbMsg::Echo { origin, value: v });
            let v = self.values[ctx.rng().gen_range(0..2)];
            let _ = ctx.send(to, p, BrbMsg::Ready { origin, value: v });
        }
    }
}
