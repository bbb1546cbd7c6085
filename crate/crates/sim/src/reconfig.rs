//! Reconfiguration node: Join, Leave/Remove (AC and PC flavours) and the
//! three-phase Add, sharing one state record per process.

use std::collections::{BTreeMap, BTreeSet};

use hqs_core::{normalize, ProcessId, ProcessSet, QuorumSet};
use serde::{Deserialize, Serialize};

use crate::crypto::Signature;
use crate::kernel::{Ctx, Protocol};

pub const JOIN_TIMER: u64 = 1;
pub const DEFAULT_JOIN_TIMEOUT: u64 = 2_000;

/// Leave/Remove flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaveMode {
    /// Availability-conserving: tob-ordered intersection checks.
    Ac,
    /// Policy-conserving: followers drop every quorum holding the leaver.
    Pc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RcRequest {
    Leave,
    Remove(ProcessSet),
    Add(ProcessSet),
    Join(ProcessSet),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RcResponse {
    LeaveComplete,
    LeaveFail,
    RemoveComplete,
    RemoveFail,
    AddComplete,
    AddFail,
    JoinComplete,
    JoinTimeout,
    Busy,
}

impl RcResponse {
    pub fn is_complete(self) -> bool {
        matches!(
            self,
            RcResponse::LeaveComplete | RcResponse::RemoveComplete | RcResponse::AddComplete | RcResponse::JoinComplete
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RcMsg {
    /// tob: leave check carrying the leaver's quorums.
    CheckLeave { who: ProcessId, quorums: QuorumSet },
    /// tob: remove check carrying the dropped quorum and the rest.
    CheckRemove { who: ProcessId, removed: ProcessSet, remaining: QuorumSet },
    Left(ProcessId),
    Prob,
    Quorums(QuorumSet),
    Inclusion(ProcessSet),
    AckInclusion(ProcessSet),
    NackInclusion(ProcessSet),
    CheckAdd(ProcessSet),
    /// Intersection probe sent by `prober` on behalf of `requester`.
    Check { requester: ProcessId, prober: ProcessId, qc: ProcessSet },
    CheckAck { requester: ProcessId, qc: ProcessSet },
    CheckNack { requester: ProcessId, qc: ProcessSet },
    Commit { requester: ProcessId, qc: ProcessSet, sig: Signature },
    Abort(ProcessSet),
    Success { requester: ProcessId, qc: ProcessSet, sigs: Vec<Signature> },
    Fail { requester: ProcessId, qc: ProcessSet, sig: Signature },
}

/// Signed payload of a Commit.
pub fn commit_payload(requester: ProcessId, qc: ProcessSet) -> (&'static str, ProcessId, ProcessSet) {
    ("commit", requester, qc)
}

/// Signed payload of a Fail.
pub fn fail_payload(requester: ProcessId, qc: ProcessSet) -> (&'static str, ProcessId, ProcessSet) {
    ("fail", requester, qc)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Pending {
    Leave,
    Remove(ProcessSet),
    Add(ProcessSet),
    Join,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AddRun {
    pub qn: ProcessSet,
    pub ack: ProcessSet,
    pub nack: ProcessSet,
    pub qc: Option<ProcessSet>,
    pub commits: BTreeMap<ProcessId, Signature>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct JoinRun {
    pub s: BTreeSet<ProcessSet>,
    pub qmap: BTreeMap<ProcessId, QuorumSet>,
    pub probed: ProcessSet,
}

/// Per-(requester, q_c) tallies at a member of q_c.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Votes {
    pub acks: ProcessSet,
    pub nacks: ProcessSet,
    pub decided: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconfigNode {
    pub mode: LeaveMode,
    /// Concurrent Add with Leave/Remove: each check also considers the
    /// other protocol's set.
    pub combined: bool,
    /// Ignore Success for a pair whose Fail already completed locally.
    pub harden_fail: bool,
    /// `None` means unknown: always coordinate.
    pub in_sink: Option<bool>,
    pub quorums: QuorumSet,
    /// Quorums this process chose itself (initial, added, joined).
    pub declared: BTreeSet<ProcessSet>,
    pub tomb: ProcessSet,
    pub followers: ProcessSet,
    pub tentative: BTreeSet<(ProcessId, ProcessSet)>,
    pub failed: BTreeMap<(ProcessId, ProcessSet), ProcessSet>,
    pub fail_completed: BTreeSet<(ProcessId, ProcessSet)>,
    pub succeeded: BTreeSet<(ProcessId, ProcessSet)>,
    pub votes: BTreeMap<(ProcessId, ProcessSet), Votes>,
    pub add: Option<AddRun>,
    pub join: Option<JoinRun>,
    pub pending: Option<Pending>,
    pub active: bool,
    pub left: bool,
    pub join_timeout: u64,
}

fn blocks(set: ProcessSet, quorums: &QuorumSet) -> bool {
    quorums.iter().all(|q| q.intersects(&set))
}

fn shrink(quorums: &QuorumSet, p: ProcessId) -> QuorumSet {
    let s: QuorumSet = quorums.iter().map(|q| q.without(p)).filter(|q| !q.is_empty()).collect();
    normalize(&s)
}

impl ReconfigNode {
    pub fn new(quorums: QuorumSet, followers: ProcessSet, mode: LeaveMode) -> Self {
        ReconfigNode {
            mode,
            combined: true,
            harden_fail: false,
            in_sink: None,
            declared: quorums.iter().copied().collect(),
            quorums,
            tomb: ProcessSet::new(),
            followers,
            tentative: BTreeSet::new(),
            failed: BTreeMap::new(),
            fail_completed: BTreeSet::new(),
            succeeded: BTreeSet::new(),
            votes: BTreeMap::new(),
            add: None,
            join: None,
            pending: None,
            active: true,
            left: false,
            join_timeout: DEFAULT_JOIN_TIMEOUT,
        }
    }

    /// A process outside the system, waiting to join.
    pub fn joiner(mode: LeaveMode) -> Self {
        ReconfigNode {
            active: false,
            declared: BTreeSet::new(),
            ..Self::new(QuorumSet::new(), ProcessSet::new(), mode)
        }
    }

    fn members(&self) -> ProcessSet {
        self.quorums.iter().fold(ProcessSet::new(), |a, q| a | *q)
    }

    fn pending_quorums(&self) -> impl Iterator<Item = ProcessSet> + '_ {
        self.tentative.iter().map(|(_, q)| *q)
    }

    fn finish(&mut self, ctx: &mut Ctx<'_, Self>, r: RcResponse) {
        self.pending = None;
        ctx.respond(r);
    }

    fn depart(&mut self, ctx: &mut Ctx<'_, Self>) {
        let me = ctx.me();
        ctx.send_all(self.followers.without(me), RcMsg::Left(me));
        self.finish(ctx, RcResponse::LeaveComplete);
        self.left = true;
        self.active = false;
    }

    /// `∀ q₁, q₂ ∈ qs. (q₁ ∩ q₂) ∖ {self}` is blocking for `qs`.
    fn local_check(qs: &QuorumSet, me: ProcessId) -> bool {
        qs.iter()
            .all(|a| qs.iter().all(|b| blocks((*a & *b).without(me), qs)))
    }

    /// The tob condition: true when some pair's intersection, minus the
    /// requester and the tomb, no longer blocks the requester.
    fn violating_pair(&self, who: ProcessId, qs: &QuorumSet) -> bool {
        let mut pairs: Vec<ProcessSet> = qs.iter().copied().collect();
        if self.combined {
            pairs.extend(self.pending_quorums());
        }
        let gone = self.tomb.with(who);
        pairs
            .iter()
            .any(|a| pairs.iter().any(|b| !blocks((*a & *b) - gone, qs)))
    }

    fn request_leave(&mut self, ctx: &mut Ctx<'_, Self>) {
        let me = ctx.me();
        match self.mode {
            LeaveMode::Pc => {
                self.pending = Some(Pending::Leave);
                self.depart(ctx);
            }
            LeaveMode::Ac => {
                if self.in_sink == Some(false) {
                    self.pending = Some(Pending::Leave);
                    self.depart(ctx);
                } else if Self::local_check(&self.quorums, me) {
                    self.pending = Some(Pending::Leave);
                    ctx.tob_broadcast(RcMsg::CheckLeave {
                        who: me,
                        quorums: self.quorums.clone(),
                    });
                } else {
                    ctx.respond(RcResponse::LeaveFail);
                }
            }
        }
    }

    fn request_remove(&mut self, ctx: &mut Ctx<'_, Self>, q: ProcessSet) {
        let me = ctx.me();
        if !self.quorums.contains(&q) {
            ctx.respond(RcResponse::RemoveFail);
            return;
        }
        let mut remaining = self.quorums.clone();
        remaining.remove(&q);
        match self.mode {
            LeaveMode::Pc => {
                self.quorums = remaining;
                ctx.respond(RcResponse::RemoveComplete);
            }
            LeaveMode::Ac => {
                if self.in_sink == Some(false) {
                    self.quorums = remaining;
                    ctx.respond(RcResponse::RemoveComplete);
                } else if !remaining.is_empty() && Self::local_check(&remaining, me) {
                    self.pending = Some(Pending::Remove(q));
                    ctx.tob_broadcast(RcMsg::CheckRemove {
                        who: me,
                        removed: q,
                        remaining,
                    });
                } else {
                    ctx.respond(RcResponse::RemoveFail);
                }
            }
        }
    }

    fn on_check_leave(&mut self, ctx: &mut Ctx<'_, Self>, who: ProcessId, qs: QuorumSet) {
        let me = ctx.me();
        if self.violating_pair(who, &qs) {
            if who == me && self.pending == Some(Pending::Leave) {
                self.finish(ctx, RcResponse::LeaveFail);
            }
            return;
        }
        self.tomb.insert(who);
        if who == me && self.pending == Some(Pending::Leave) {
            self.depart(ctx);
        }
    }

    fn on_check_remove(&mut self, ctx: &mut Ctx<'_, Self>, who: ProcessId, removed: ProcessSet, remaining: QuorumSet) {
        let me = ctx.me();
        let mine = who == me && self.pending == Some(Pending::Remove(removed));
        if remaining.is_empty() || self.violating_pair(who, &remaining) {
            if mine {
                self.finish(ctx, RcResponse::RemoveFail);
            }
            return;
        }
        self.tomb.insert(who);
        if mine {
            self.quorums.remove(&removed);
            self.finish(ctx, RcResponse::RemoveComplete);
        }
    }

    fn on_left(&mut self, from: ProcessId, p: ProcessId) {
        if from != p {
            return;
        }
        self.quorums = match self.mode {
            LeaveMode::Ac => shrink(&self.quorums, p),
            LeaveMode::Pc => self.quorums.iter().filter(|q| !q.contains(p)).copied().collect(),
        };
        self.followers.remove(p);
    }

    // Join

    fn probe_unknown(&mut self, ctx: &mut Ctx<'_, Self>) {
        let Some(j) = self.join.as_mut() else { return };
        let all = j.s.iter().fold(ProcessSet::new(), |a, q| a | *q);
        let todo = all - j.probed;
        j.probed = j.probed | todo;
        ctx.send_all(todo, RcMsg::Prob);
    }

    fn join_fixpoint(j: &JoinRun) -> bool {
        j.s.iter().all(|q| {
            q.iter()
                .all(|p| j.qmap.get(&p).is_some_and(|qs| qs.iter().any(|q2| q2.is_subset(q))))
        })
    }

    fn on_quorums(&mut self, ctx: &mut Ctx<'_, Self>, from: ProcessId, qs: QuorumSet) {
        let Some(j) = self.join.as_mut() else { return };
        j.qmap.insert(from, qs.clone());
        if qs.is_empty() {
            return;
        }
        let mut next = BTreeSet::new();
        for q in &j.s {
            if q.contains(from) {
                for q2 in &qs {
                    next.insert(*q | *q2);
                }
            } else {
                next.insert(*q);
            }
        }
        j.s = next;
        if Self::join_fixpoint(j) {
            let s: QuorumSet = j.s.iter().copied().collect();
            self.quorums = s.clone();
            self.declared = s.into_iter().collect();
            self.active = true;
            self.join = None;
            self.finish(ctx, RcResponse::JoinComplete);
        } else {
            self.probe_unknown(ctx);
        }
    }

    // Add, phase 1

    fn request_add(&mut self, ctx: &mut Ctx<'_, Self>, qn: ProcessSet) {
        if qn.is_empty() {
            ctx.respond(RcResponse::AddFail);
            return;
        }
        self.pending = Some(Pending::Add(qn));
        self.add = Some(AddRun {
            qn,
            ..AddRun::default()
        });
        ctx.send_all(qn, RcMsg::Inclusion(qn));
    }

    fn on_inclusion_reply(&mut self, ctx: &mut Ctx<'_, Self>, from: ProcessId, qn: ProcessSet, ok: bool) {
        let Some(run) = self.add.as_mut() else { return };
        if run.qn != qn || run.qc.is_some() || !qn.contains(from) {
            return;
        }
        if ok {
            run.ack.insert(from);
        } else {
            run.nack.insert(from);
        }
        if run.ack | run.nack != qn {
            return;
        }
        if run.nack.is_empty() {
            self.quorums.insert(qn);
            self.quorums = normalize(&self.quorums);
            self.declared.insert(qn);
            self.add = None;
            self.finish(ctx, RcResponse::AddComplete);
        } else {
            let qc = run.nack;
            run.qc = Some(qc);
            ctx.send_all(qc, RcMsg::CheckAdd(qc));
        }
    }

    // Add, phase 2

    fn on_check_add(&mut self, ctx: &mut Ctx<'_, Self>, requester: ProcessId, qc: ProcessSet) {
        let me = ctx.me();
        if !qc.contains(me) {
            return;
        }
        self.tentative.insert((requester, qc));
        ctx.send_all(
            self.members(),
            RcMsg::Check {
                requester,
                prober: me,
                qc,
            },
        );
    }

    /// `∀ q ∈ tentative ∪ Q. q_c ∩ q` blocks this process.
    pub fn intersection_check(&self, qc: ProcessSet) -> bool {
        let tomb = if self.combined { self.tomb } else { ProcessSet::new() };
        self.pending_quorums()
            .chain(self.quorums.iter().copied())
            .all(|q| blocks(qc & (q - tomb), &self.quorums))
    }

    fn on_check(&mut self, ctx: &mut Ctx<'_, Self>, from: ProcessId, requester: ProcessId, prober: ProcessId, qc: ProcessSet) {
        if from != prober {
            return;
        }
        let reply = if self.intersection_check(qc) {
            RcMsg::CheckAck { requester, qc }
        } else {
            RcMsg::CheckNack { requester, qc }
        };
        ctx.send(prober, reply);
    }

    // Add, phase 3

    fn on_vote(&mut self, ctx: &mut Ctx<'_, Self>, from: ProcessId, requester: ProcessId, qc: ProcessSet, ack: bool) {
        if !self.tentative.contains(&(requester, qc)) && !self.votes.contains_key(&(requester, qc)) {
            return;
        }
        let quorums = self.quorums.clone();
        let v = self.votes.entry((requester, qc)).or_default();
        if v.decided {
            return;
        }
        if ack {
            v.acks.insert(from);
        } else {
            v.nacks.insert(from);
        }
        if quorums.iter().any(|q| q.is_subset(&v.acks)) {
            v.decided = true;
            let sig = ctx.sign(&commit_payload(requester, qc));
            ctx.send(requester, RcMsg::Commit { requester, qc, sig });
        } else if blocks(v.nacks, &quorums) {
            v.decided = true;
            ctx.send(requester, RcMsg::Abort(qc));
        }
    }

    fn on_commit(&mut self, ctx: &mut Ctx<'_, Self>, from: ProcessId, requester: ProcessId, qc: ProcessSet, sig: Signature) {
        let me = ctx.me();
        let Some(run) = self.add.as_mut() else { return };
        if requester != me || run.qc != Some(qc) || !qc.contains(from) {
            return;
        }
        if !ctx.verify(&sig, from, &commit_payload(requester, qc)) {
            return;
        }
        run.commits.insert(from, sig);
        if qc.iter().all(|p| run.commits.contains_key(&p)) {
            let qn = run.qn;
            let sigs: Vec<Signature> = run.commits.values().cloned().collect();
            self.quorums.insert(qn);
            self.quorums = normalize(&self.quorums);
            self.declared.insert(qn);
            self.add = None;
            ctx.send_all(qc, RcMsg::Success { requester, qc, sigs });
            self.finish(ctx, RcResponse::AddComplete);
        }
    }

    fn on_abort(&mut self, ctx: &mut Ctx<'_, Self>, from: ProcessId, qc: ProcessSet) {
        let me = ctx.me();
        let Some(run) = self.add.as_ref() else { return };
        if run.qc != Some(qc) || !qc.contains(from) {
            return;
        }
        self.add = None;
        let sig = ctx.sign(&fail_payload(me, qc));
        ctx.send_all(qc, RcMsg::Fail { requester: me, qc, sig });
        self.finish(ctx, RcResponse::AddFail);
    }

    fn sigs_cover(ctx: &Ctx<'_, Self>, requester: ProcessId, qc: ProcessSet, sigs: &[Signature]) -> bool {
        let payload = commit_payload(requester, qc);
        qc.iter()
            .all(|m| sigs.iter().any(|s| ctx.verify(s, m, &payload)))
    }

    fn on_success(&mut self, ctx: &mut Ctx<'_, Self>, requester: ProcessId, qc: ProcessSet, sigs: Vec<Signature>) {
        let key = (requester, qc);
        if self.succeeded.contains(&key) || !Self::sigs_cover(ctx, requester, qc, &sigs) {
            return;
        }
        if self.harden_fail && self.fail_completed.contains(&key) {
            return;
        }
        self.succeeded.insert(key);
        ctx.send_all(qc, RcMsg::Success { requester, qc, sigs });
        self.quorums.insert(qc);
        self.quorums = normalize(&self.quorums);
        self.tentative.remove(&key);
    }

    fn on_fail(&mut self, ctx: &mut Ctx<'_, Self>, from: ProcessId, requester: ProcessId, qc: ProcessSet, sig: Signature) {
        let key = (requester, qc);
        if self.succeeded.contains(&key) || !ctx.verify(&sig, requester, &fail_payload(requester, qc)) {
            return;
        }
        let f = self.failed.entry(key).or_default();
        let first = from == requester && !f.contains(requester);
        f.insert(from);
        if first && ctx.me() != requester {
            ctx.send_all(qc, RcMsg::Fail { requester, qc, sig });
        }
        let f = &self.failed[&key];
        if qc.is_subset(f) {
            self.tentative.remove(&key);
            self.fail_completed.insert(key);
        }
    }
}

impl Protocol for ReconfigNode {
    type Msg = RcMsg;
    type Request = RcRequest;
    type Response = RcResponse;

    fn on_request(&mut self, ctx: &mut Ctx<'_, Self>, req: RcRequest) {
        if self.pending.is_some() {
            ctx.respond(RcResponse::Busy);
            return;
        }
        match req {
            RcRequest::Join(ps) => {
                if self.active {
                    ctx.respond(RcResponse::Busy);
                    return;
                }
                self.pending = Some(Pending::Join);
                self.join = Some(JoinRun {
                    s: [ps].into_iter().collect(),
                    ..JoinRun::default()
                });
                ctx.set_timer(self.join_timeout, JOIN_TIMER);
                self.probe_unknown(ctx);
            }
            _ if !self.active => ctx.respond(RcResponse::Busy),
            RcRequest::Leave => self.request_leave(ctx),
            RcRequest::Remove(q) => self.request_remove(ctx, q),
            RcRequest::Add(qn) => self.request_add(ctx, qn),
        }
    }

    fn on_message(&mut self, ctx: &mut Ctx<'_, Self>, from: ProcessId, msg: RcMsg) {
        match msg {
            RcMsg::Left(p) => self.on_left(from, p),
            RcMsg::Prob => {
                self.followers.insert(from);
                ctx.send(from, RcMsg::Quorums(self.quorums.clone()));
            }
            RcMsg::Quorums(qs) => self.on_quorums(ctx, from, qs),
            RcMsg::Inclusion(qn) => {
                let ok = self.quorums.iter().any(|q| q.is_subset(&qn));
                let reply = if ok {
                    RcMsg::AckInclusion(qn)
                } else {
                    RcMsg::NackInclusion(qn)
                };
                ctx.send(from, reply);
            }
            RcMsg::AckInclusion(qn) => self.on_inclusion_reply(ctx, from, qn, true),
            RcMsg::NackInclusion(qn) => self.on_inclusion_reply(ctx, from, qn, false),
            RcMsg::CheckAdd(qc) => self.on_check_add(ctx, from, qc),
            RcMsg::Check { requester, prober, qc } => self.on_check(ctx, from, requester, prober, qc),
            RcMsg::CheckAck { requester, qc } => self.on_vote(ctx, from, requester, qc, true),
            RcMsg::CheckNack { requester, qc } => self.on_vote(ctx, from, requester, qc, false),
            RcMsg::Commit { requester, qc, sig } => self.on_commit(ctx, from, requester, qc, sig),
            RcMsg::Abort(qc) => self.on_abort(ctx, from, qc),
            RcMsg::Success { requester, qc, sigs } => self.on_success(ctx, requester, qc, sigs),
            RcMsg::Fail { requester, qc, sig } => self.on_fail(ctx, from, requester, qc, sig),
            // tob-only messages are ignored on point-to-point links
            RcMsg::CheckLeave { .. } | RcMsg::CheckRemove { .. } => {}
        }
    }

    fn on_tob(&mut self, ctx: &mut Ctx<'_, Self>, from: ProcessId, msg: RcMsg) {
        if self.mode != LeaveMode::Ac {
            return;
        }
        match msg {
            RcMsg::CheckLeave { who, quorums } if who == from => self.on_check_leave(ctx, who, quorums),
            RcMsg::CheckRemove { who, removed, remaining } if who == from => {
                self.on_check_remove(ctx, who, removed, remaining)
            }
            _ => {}
        }
    }

    fn on_timer(&mut self, ctx: &mut Ctx<'_, Self>, tag: u64) {
        if tag == JOIN_TIMER && self.pending == Some(Pending::Join) {
            self.join = None;
            self.finish(ctx, RcResponse::JoinTimeout);
        }
    }

    fn halted(&self) -> bool {
        self.left
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hqs_core::pset;

    fn qs(v: &[&[u32]]) -> QuorumSet {
        v.iter().map(|q| ProcessSet::of(q)).collect()
    }

    #[test]
    fn left_shrinks_and_normalizes() {
        let mut n = ReconfigNode::new(qs(&[&[1, 2], &[2, 3], &[2, 5]]), pset![], LeaveMode::Ac);
        n.on_left(ProcessId(5), ProcessId(5));
        assert_eq!(n.quorums, qs(&[&[2]]));
        n.on_left(ProcessId(5), ProcessId(5));
        assert_eq!(n.quorums, qs(&[&[2]]));
    }

    #[test]
    fn left_requires_authentic_sender() {
        let mut n = ReconfigNode::new(qs(&[&[1, 2]]), pset![], LeaveMode::Ac);
        n.on_left(ProcessId(3), ProcessId(1));
        assert_eq!(n.quorums, qs(&[&[1, 2]]));
    }

    #[test]
    fn pc_left_drops_quorums() {
        let mut n = ReconfigNode::new(qs(&[&[2, 3], &[1, 3, 4]]), pset![], LeaveMode::Pc);
        n.on_left(ProcessId(2), ProcessId(2));
        assert_eq!(n.quorums, qs(&[&[1, 3, 4]]));
    }

    #[test]
    fn local_check_fails_on_private_intersection() {
        assert!(!ReconfigNode::local_check(&qs(&[&[1]]), ProcessId(1)));
        assert!(ReconfigNode::local_check(&qs(&[&[1, 2]]), ProcessId(1)));
    }

    #[test]
    fn inclusion_scan_on_running_example() {
        let qn = pset![1, 2, 3];
        let q1 = qs(&[&[1, 2, 4]]);
        let q2 = qs(&[&[1, 2], &[2, 3], &[2, 5]]);
        let q3 = qs(&[&[2, 3]]);
        let nack: Vec<bool> = [q1, q2, q3]
            .iter()
            .map(|s| !s.iter().any(|q| q.is_subset(&qn)))
            .collect();
        assert_eq!(nack, vec![true, false, false]);
    }
}
