//! Adversary scripts for reconfiguration runs.

use std::collections::BTreeMap;

use hqs_core::{ProcessId, ProcessSet, QuorumSet};
use rand::Rng;

use crate::crypto::Signature;
use crate::kernel::{AdvCtx, Adversary};
use crate::reconfig::{fail_payload, RcMsg, ReconfigNode};

type Actx<'a> = AdvCtx<'a, ReconfigNode>;

/// Byzantine processes answer requests the way an honest process with the
/// given quorums would, acking every intersection probe.
pub struct Responder {
    pub quorums: BTreeMap<ProcessId, QuorumSet>,
    pub ack_inclusion: bool,
}

impl Responder {
    pub fn new(quorums: BTreeMap<ProcessId, QuorumSet>) -> Self {
        Responder {
            quorums,
            ack_inclusion: true,
        }
    }
}

impl Adversary<ReconfigNode> for Responder {
    fn on_message(&mut self, ctx: &mut Actx<'_>, to: ProcessId, from: ProcessId, msg: &RcMsg) {
        let reply = match msg {
            RcMsg::Prob => {
                let q = self
                    .quorums
                    .get(&to)
                    .cloned()
                    .unwrap_or_else(|| [ProcessSet::singleton(to)].into_iter().collect());
                RcMsg::Quorums(q)
            }
            RcMsg::Inclusion(qn) if self.ack_inclusion => RcMsg::AckInclusion(*qn),
            RcMsg::Inclusion(qn) => RcMsg::NackInclusion(*qn),
            RcMsg::Check { requester, qc, .. } => RcMsg::CheckAck {
                requester: *requester,
                qc: *qc,
            },
            _ => return,
        };
        let _ = ctx.send(to, from, reply);
    }
}

/// Random answers to every probe, plus an unsolicited fake leave check
/// from each Byzantine process.
pub struct Chaos {
    pub universe: ProcessSet,
    pub fake_checks: bool,
}

impl Chaos {
    fn random_set(&self, ctx: &mut Actx<'_>) -> ProcessSet {
        let all = self.universe.to_vec();
        all.into_iter().filter(|_| ctx.rng().gen_bool(0.5)).collect()
    }
}

impl Adversary<ReconfigNode> for Chaos {
    fn on_start(&mut self, ctx: &mut Actx<'_>) {
        if !self.fake_checks {
            return;
        }
        for b in ctx.byzantine() {
            let q = self.random_set(ctx).with(b);
            let _ = ctx.tob_broadcast(
                b,
                RcMsg::CheckLeave {
                    who: b,
                    quorums: [q].into_iter().collect(),
                },
            );
        }
    }

    fn on_message(&mut self, ctx: &mut Actx<'_>, to: ProcessId, from: ProcessId, msg: &RcMsg) {
        let yes = ctx.rng().gen_bool(0.5);
        let reply = match msg {
            RcMsg::Prob => {
                let q = self.random_set(ctx).with(to);
                RcMsg::Quorums([q].into_iter().collect())
            }
            RcMsg::Inclusion(qn) if yes => RcMsg::AckInclusion(*qn),
            RcMsg::Inclusion(qn) => RcMsg::NackInclusion(*qn),
            RcMsg::Check { requester, qc, .. } if yes => RcMsg::CheckAck {
                requester: *requester,
                qc: *qc,
            },
            RcMsg::Check { requester, qc, .. } => RcMsg::CheckNack {
                requester: *requester,
                qc: *qc,
            },
            _ => return,
        };
        let _ = ctx.send(to, from, reply);
    }
}

/// A Byzantine requester drives phase 2 for `qc`, collects every Commit,
/// then sends Success to `success_to` and a signed Fail to the rest of
/// `qc`. With `fail_first` it sends Fail to all of `qc` before Success.
pub struct SplitRequester {
    pub requester: ProcessId,
    pub qc: ProcessSet,
    pub success_to: ProcessSet,
    pub fail_first: bool,
    pub commits: BTreeMap<ProcessId, Signature>,
    pub done: bool,
}

impl SplitRequester {
    pub fn new(requester: ProcessId, qc: ProcessSet, success_to: ProcessSet) -> Self {
        SplitRequester {
            requester,
            qc,
            success_to,
            fail_first: false,
            commits: BTreeMap::new(),
            done: false,
        }
    }
}

impl Adversary<ReconfigNode> for SplitRequester {
    fn on_start(&mut self, ctx: &mut Actx<'_>) {
        for m in self.qc {
            let _ = ctx.send(self.requester, m, RcMsg::CheckAdd(self.qc));
        }
    }

    fn on_message(&mut self, ctx: &mut Actx<'_>, to: ProcessId, from: ProcessId, msg: &RcMsg) {
        match msg {
            RcMsg::Check { requester, qc, .. } => {
                let reply = RcMsg::CheckAck {
                    requester: *requester,
                    qc: *qc,
                };
                let _ = ctx.send(to, from, reply);
            }
            RcMsg::Commit { requester, qc, sig } if to == self.requester && *requester == to && *qc == self.qc => {
                if sig.signer() == from {
                    self.commits.insert(from, sig.clone());
                }
                if self.done || !self.qc.iter().all(|m| self.commits.contains_key(&m)) {
                    return;
                }
                self.done = true;
                let sigs: Vec<Signature> = self.commits.values().cloned().collect();
                let Ok(fsig) = ctx.sign(self.requester, &fail_payload(self.requester, self.qc)) else {
                    return;
                };
                let success = RcMsg::Success {
                    requester: self.requester,
                    qc: self.qc,
                    sigs,
                };
                let fail = RcMsg::Fail {
                    requester: self.requester,
                    qc: self.qc,
                    sig: fsig,
                };
                if self.fail_first {
                    for m in self.qc {
                        let _ = ctx.send(self.requester, m, fail.clone());
                    }
                    for m in self.qc {
                        let _ = ctx.send(self.requester, m, success.clone());
                    }
                } else {
                    for m in self.qc {
                        let msg = if self.success_to.contains(m) { &success } else { &fail };
                        let _ = ctx.send(self.requester, m, msg.clone());
                    }
                }
            }
            _ => {}
        }
    }
}
