//! Deterministic discrete-event world.
//!
//! One event is processed per step. Pending events are APL deliveries,
//! TOB orderings, per-node TOB deliveries, client requests and timers. The
//! schedule policy picks the next event among the eligible ones, except
//! that any obligated event older than the fairness bound goes first.

use std::collections::BTreeMap;
use std::fmt::Debug;

use hqs_core::{ProcessId, ProcessSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::crypto::{Signature, SignatureRegistry};
use crate::trace::{Trace, TraceEvent};

pub const DEFAULT_STEP_CAP: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("adversary tried to send as well-behaved process {0}")]
    ForgedSender(ProcessId),
    #[error("adversary tried to sign as well-behaved process {0}")]
    ForgedSigner(ProcessId),
    #[error("step cap of {0} exceeded")]
    StepCapExceeded(u64),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Apl,
    Tob,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Envelope<M> {
    pub src: ProcessId,
    pub dst: ProcessId,
    pub channel: Channel,
    pub payload: M,
    pub seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    RandomFair,
    AdversarialReorder,
    ScriptedInterleaving,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulePolicy {
    pub seed: u64,
    pub mode: ScheduleMode,
    pub fairness_bound: u64,
    /// Choice indices for scripted mode; past the end the oldest event runs.
    #[serde(default)]
    pub script: Vec<usize>,
}

impl SchedulePolicy {
    pub fn random(seed: u64) -> Self {
        SchedulePolicy {
            seed,
            mode: ScheduleMode::RandomFair,
            fairness_bound: 64,
            script: Vec::new(),
        }
    }

    pub fn adversarial(seed: u64) -> Self {
        SchedulePolicy {
            mode: ScheduleMode::AdversarialReorder,
            ..Self::random(seed)
        }
    }

    pub fn scripted(script: Vec<usize>) -> Self {
        SchedulePolicy {
            seed: 0,
            mode: ScheduleMode::ScriptedInterleaving,
            fairness_bound: u64::MAX,
            script,
        }
    }
}

/// Which well-behaved nodes the TOB oracle guarantees delivery to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TobLiveness {
    AllWellBehaved,
    Only(ProcessSet),
}

pub trait Protocol {
    type Msg: Clone + Debug + Serialize;
    type Request: Clone + Debug + Serialize;
    type Response: Clone + Debug + Serialize + PartialEq;

    fn on_start(&mut self, _ctx: &mut Ctx<'_, Self>) {}
    fn on_request(&mut self, ctx: &mut Ctx<'_, Self>, req: Self::Request);
    fn on_message(&mut self, ctx: &mut Ctx<'_, Self>, from: ProcessId, msg: Self::Msg);
    fn on_tob(&mut self, _ctx: &mut Ctx<'_, Self>, _from: ProcessId, _msg: Self::Msg) {}
    fn on_timer(&mut self, _ctx: &mut Ctx<'_, Self>, _tag: u64) {}
    /// Halted nodes drop every incoming event.
    fn halted(&self) -> bool {
        false
    }
}

enum Action<P: Protocol + ?Sized> {
    Send(ProcessId, P::Msg),
    Tob(P::Msg),
    Respond(P::Response),
    Timer(u64, u64),
}

pub struct Ctx<'a, P: Protocol + ?Sized> {
    me: ProcessId,
    now: u64,
    sigs: &'a mut SignatureRegistry,
    actions: Vec<Action<P>>,
}

impl<P: Protocol + ?Sized> Ctx<'_, P> {
    pub fn me(&self) -> ProcessId {
        self.me
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn send(&mut self, dst: ProcessId, msg: P::Msg) {
        self.actions.push(Action::Send(dst, msg));
    }

    pub fn send_all(&mut self, dsts: ProcessSet, msg: P::Msg) {
        for d in dsts {
            self.send(d, msg.clone());
        }
    }

    pub fn tob_broadcast(&mut self, msg: P::Msg) {
        self.actions.push(Action::Tob(msg));
    }

    pub fn respond(&mut self, r: P::Response) {
        self.actions.push(Action::Respond(r));
    }

    pub fn set_timer(&mut self, delay: u64, tag: u64) {
        self.actions.push(Action::Timer(delay, tag));
    }

    pub fn sign<T: Serialize + ?Sized>(&mut self, payload: &T) -> Signature {
        self.sigs.sign(self.me, payload)
    }

    pub fn verify<T: Serialize + ?Sized>(&self, sig: &Signature, signer: ProcessId, payload: &T) -> bool {
        self.sigs.verify(sig, signer, payload)
    }
}

pub struct AdvCtx<'a, P: Protocol + ?Sized> {
    byzantine: ProcessSet,
    now: u64,
    sigs: &'a mut SignatureRegistry,
    rng: &'a mut ChaCha8Rng,
    actions: Vec<(ProcessId, Action<P>)>,
    rejected: Vec<SimError>,
}

impl<P: Protocol + ?Sized> AdvCtx<'_, P> {
    pub fn byzantine(&self) -> ProcessSet {
        self.byzantine
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        self.rng
    }

    fn check_src(&mut self, src: ProcessId) -> Result<(), SimError> {
        if self.byzantine.contains(src) {
            Ok(())
        } else {
            let e = SimError::ForgedSender(src);
            self.rejected.push(e.clone());
            Err(e)
        }
    }

    pub fn send(&mut self, src: ProcessId, dst: ProcessId, msg: P::Msg) -> Result<(), SimError> {
        self.check_src(src)?;
        self.actions.push((src, Action::Send(dst, msg)));
        Ok(())
    }

    pub fn tob_broadcast(&mut self, src: ProcessId, msg: P::Msg) -> Result<(), SimError> {
        self.check_src(src)?;
        self.actions.push((src, Action::Tob(msg)));
        Ok(())
    }

    pub fn sign<T: Serialize + ?Sized>(&mut self, signer: ProcessId, payload: &T) -> Result<Signature, SimError> {
        if !self.byzantine.contains(signer) {
            let e = SimError::ForgedSigner(signer);
            self.rejected.push(e.clone());
            return Err(e);
        }
        Ok(self.sigs.sign(signer, payload))
    }

    pub fn verify<T: Serialize + ?Sized>(&self, sig: &Signature, signer: ProcessId, payload: &T) -> bool {
        self.sigs.verify(sig, signer, payload)
    }
}

/// Scripted behaviour of all Byzantine processes.
pub trait Adversary<P: Protocol> {
    fn on_start(&mut self, _ctx: &mut AdvCtx<'_, P>) {}
    /// A message addressed to Byzantine process `to` was delivered.
    fn on_message(&mut self, _ctx: &mut AdvCtx<'_, P>, _to: ProcessId, _from: ProcessId, _msg: &P::Msg) {}
    /// A TOB message was ordered; the adversary sees it immediately.
    fn on_tob(&mut self, _ctx: &mut AdvCtx<'_, P>, _from: ProcessId, _msg: &P::Msg) {}
}

/// Byzantine processes that never send anything.
pub struct Silent;

impl<P: Protocol> Adversary<P> for Silent {}

pub struct View<'a, P: Protocol> {
    pub nodes: &'a BTreeMap<ProcessId, P>,
    pub responses: &'a [ResponseRecord<P::Response>],
    pub step: u64,
    pub quiescent: bool,
}

pub trait Probe<P: Protocol> {
    fn name(&self) -> String;
    fn after_step(&mut self, _view: &View<'_, P>) -> Option<String> {
        None
    }
    fn at_quiescence(&mut self, _view: &View<'_, P>) -> Option<String> {
        None
    }
}

/// Probe from closures.
pub struct FnProbe<P: Protocol> {
    pub name: String,
    pub step: Option<Box<dyn FnMut(&View<'_, P>) -> Option<String>>>,
    pub end: Option<Box<dyn FnMut(&View<'_, P>) -> Option<String>>>,
}

impl<P: Protocol> FnProbe<P> {
    pub fn every_step(name: &str, f: impl FnMut(&View<'_, P>) -> Option<String> + 'static) -> Self {
        FnProbe {
            name: name.to_string(),
            step: Some(Box::new(f)),
            end: None,
        }
    }

    pub fn at_end(name: &str, f: impl FnMut(&View<'_, P>) -> Option<String> + 'static) -> Self {
        FnProbe {
            name: name.to_string(),
            step: None,
            end: Some(Box::new(f)),
        }
    }
}

impl<P: Protocol> Probe<P> for FnProbe<P> {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn after_step(&mut self, view: &View<'_, P>) -> Option<String> {
        self.step.as_mut().and_then(|f| f(view))
    }
    fn at_quiescence(&mut self, view: &View<'_, P>) -> Option<String> {
        self.end.as_mut().and_then(|f| f(view))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseRecord<R> {
    pub step: u64,
    pub node: ProcessId,
    pub response: R,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub step: u64,
    pub probe: String,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Quiescent,
    StepCapExceeded,
}

enum Event<P: Protocol> {
    Apl(Envelope<P::Msg>),
    TobOrder { src: ProcessId, msg: P::Msg },
    TobDeliver { dst: ProcessId, index: usize },
    Request { node: ProcessId, req: P::Request, due: u64 },
    Timer { node: ProcessId, tag: u64, due: u64 },
}

struct Pending<P: Protocol> {
    id: u64,
    enqueued: u64,
    event: Event<P>,
}

pub struct World<P: Protocol> {
    nodes: BTreeMap<ProcessId, P>,
    byzantine: ProcessSet,
    adversary: Box<dyn Adversary<P>>,
    policy: SchedulePolicy,
    rng: ChaCha8Rng,
    adv_rng: ChaCha8Rng,
    tob_liveness: TobLiveness,
    step_cap: u64,
    pending: Vec<Pending<P>>,
    next_id: u64,
    now: u64,
    steps: u64,
    link_seq: BTreeMap<(ProcessId, ProcessId), u64>,
    tob_log: Vec<(ProcessId, P::Msg)>,
    tob_cursor: BTreeMap<ProcessId, usize>,
    sigs: SignatureRegistry,
    trace: Trace,
    probes: Vec<Box<dyn Probe<P>>>,
    responses: Vec<ResponseRecord<P::Response>>,
    violations: Vec<Violation>,
    violation_counts: BTreeMap<String, u64>,
    rejected: Vec<SimError>,
    branching: Vec<usize>,
    started: bool,
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).unwrap_or(Value::Null)
}

impl<P: Protocol> World<P> {
    pub fn new(nodes: BTreeMap<ProcessId, P>, byzantine: ProcessSet, policy: SchedulePolicy) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(policy.seed);
        let adv_rng = ChaCha8Rng::seed_from_u64(policy.seed ^ 0x5eed_ad5e_u64);
        World {
            nodes,
            byzantine,
            adversary: Box::new(Silent),
            policy,
            rng,
            adv_rng,
            tob_liveness: TobLiveness::AllWellBehaved,
            step_cap: DEFAULT_STEP_CAP,
            pending: Vec::new(),
            next_id: 0,
            now: 0,
            steps: 0,
            link_seq: BTreeMap::new(),
            tob_log: Vec::new(),
            tob_cursor: BTreeMap::new(),
            sigs: SignatureRegistry::default(),
            trace: Trace::default(),
            probes: Vec::new(),
            responses: Vec::new(),
            violations: Vec::new(),
            violation_counts: BTreeMap::new(),
            rejected: Vec::new(),
            branching: Vec::new(),
            started: false,
        }
    }

    pub fn with_adversary(mut self, adv: impl Adversary<P> + 'static) -> Self {
        self.adversary = Box::new(adv);
        self
    }

    pub fn with_tob_liveness(mut self, l: TobLiveness) -> Self {
        self.tob_liveness = l;
        self
    }

    pub fn with_step_cap(mut self, cap: u64) -> Self {
        self.step_cap = cap;
        self
    }

    pub fn add_probe(&mut self, p: impl Probe<P> + 'static) {
        self.probes.push(Box::new(p));
    }

    /// Queue a client request, eligible from time `at`.
    pub fn request(&mut self, node: ProcessId, req: P::Request, at: u64) {
        self.push(Event::Request { node, req, due: at });
    }

    pub fn nodes(&self) -> &BTreeMap<ProcessId, P> {
        &self.nodes
    }

    pub fn byzantine(&self) -> ProcessSet {
        self.byzantine
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn responses(&self) -> &[ResponseRecord<P::Response>] {
        &self.responses
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn violation_counts(&self) -> &BTreeMap<String, u64> {
        &self.violation_counts
    }

    pub fn rejected(&self) -> &[SimError] {
        &self.rejected
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn signatures(&self) -> &SignatureRegistry {
        &self.sigs
    }

    /// Number of eligible events at each step, for interleaving search.
    pub fn branching(&self) -> &[usize] {
        &self.branching
    }

    pub fn tob_log(&self) -> &[(ProcessId, P::Msg)] {
        &self.tob_log
    }

    pub fn tob_delivered(&self, p: ProcessId) -> usize {
        self.tob_cursor.get(&p).copied().unwrap_or(0)
    }

    fn push(&mut self, event: Event<P>) {
        self.pending.push(Pending {
            id: self.next_id,
            enqueued: self.now,
            event,
        });
        self.next_id += 1;
    }

    fn record(&mut self, kind: &str, src: Option<ProcessId>, dst: Option<ProcessId>, msg: Value) {
        self.trace.push(TraceEvent {
            step: self.steps,
            kind: kind.to_string(),
            src,
            dst,
            msg,
        });
    }

    fn apply_actions(&mut self, src: ProcessId, actions: Vec<Action<P>>) {
        for a in actions {
            match a {
                Action::Send(dst, msg) => {
                    let seq = self.link_seq.entry((src, dst)).or_insert(0);
                    *seq += 1;
                    let seq = *seq;
                    let v = to_value(&msg);
                    self.record("send", Some(src), Some(dst), serde_json::json!({"seq": seq, "payload": v}));
                    self.push(Event::Apl(Envelope {
                        src,
                        dst,
                        channel: Channel::Apl,
                        payload: msg,
                        seq,
                    }));
                }
                Action::Tob(msg) => {
                    let v = to_value(&msg);
                    self.record("tob_submit", Some(src), None, v);
                    self.push(Event::TobOrder { src, msg });
                }
                Action::Respond(r) => {
                    let v = to_value(&r);
                    self.record("respond", Some(src), None, v);
                    self.responses.push(ResponseRecord {
                        step: self.steps,
                        node: src,
                        response: r,
                    });
                }
                Action::Timer(delay, tag) => {
                    let due = self.now + delay.max(1);
                    self.push(Event::Timer { node: src, tag, due });
                }
            }
        }
    }

    fn drain_signs(&mut self) {
        for (signer, digest) in self.sigs.drain_log() {
            self.record("sign", Some(signer), None, Value::String(digest));
        }
    }

    fn with_node(&mut self, id: ProcessId, f: impl FnOnce(&mut P, &mut Ctx<'_, P>)) -> bool {
        let Some(node) = self.nodes.get_mut(&id) else {
            return false;
        };
        if node.halted() {
            return false;
        }
        let mut ctx = Ctx {
            me: id,
            now: self.now,
            sigs: &mut self.sigs,
            actions: Vec::new(),
        };
        f(node, &mut ctx);
        let actions = ctx.actions;
        self.apply_actions(id, actions);
        true
    }

    fn with_adversary_ctx(&mut self, f: impl FnOnce(&mut dyn Adversary<P>, &mut AdvCtx<'_, P>)) {
        let mut ctx = AdvCtx {
            byzantine: self.byzantine,
            now: self.now,
            sigs: &mut self.sigs,
            rng: &mut self.adv_rng,
            actions: Vec::new(),
            rejected: Vec::new(),
        };
        f(self.adversary.as_mut(), &mut ctx);
        let AdvCtx { actions, rejected, .. } = ctx;
        for e in rejected {
            self.record("forgery_rejected", None, None, Value::String(e.to_string()));
            self.rejected.push(e);
        }
        for (src, a) in actions {
            self.apply_actions(src, vec![a]);
        }
    }

    fn start(&mut self) {
        if self.started {
            return;
        }
        self.started = true;
        let ids: Vec<ProcessId> = self.nodes.keys().copied().collect();
        for id in ids {
            self.with_node(id, |n, ctx| n.on_start(ctx));
        }
        if !self.byzantine.is_empty() {
            self.with_adversary_ctx(|a, ctx| a.on_start(ctx));
        }
        self.drain_signs();
    }

    fn eligible(&self, i: usize) -> bool {
        match &self.pending[i].event {
            Event::TobDeliver { dst, index } => self.tob_cursor.get(dst).copied().unwrap_or(0) == *index,
            Event::Request { due, .. } | Event::Timer { due, .. } => *due <= self.now,
            _ => true,
        }
    }

    fn obligated(&self, i: usize) -> bool {
        match &self.pending[i].event {
            Event::Apl(e) => !self.byzantine.contains(e.src) && !self.byzantine.contains(e.dst),
            Event::TobOrder { src, .. } => !self.byzantine.contains(*src),
            _ => true,
        }
    }

    fn from_byzantine(&self, i: usize) -> bool {
        match &self.pending[i].event {
            Event::Apl(e) => self.byzantine.contains(e.src),
            Event::TobOrder { src, .. } => self.byzantine.contains(*src),
            _ => false,
        }
    }

    fn choose(&mut self, elig: &[usize]) -> usize {
        let overdue = elig
            .iter()
            .copied()
            .filter(|&i| self.obligated(i) && self.now - self.pending[i].enqueued >= self.policy.fairness_bound)
            .min_by_key(|&i| self.pending[i].id);
        if let Some(i) = overdue {
            return i;
        }
        match self.policy.mode {
            ScheduleMode::RandomFair => elig[self.rng.gen_range(0..elig.len())],
            ScheduleMode::AdversarialReorder => {
                let rush: Vec<usize> = elig.iter().copied().filter(|&i| self.from_byzantine(i)).collect();
                if !rush.is_empty() && self.rng.gen_bool(0.5) {
                    return rush[self.rng.gen_range(0..rush.len())];
                }
                if self.rng.gen_bool(0.6) {
                    *elig.iter().max_by_key(|&&i| self.pending[i].id).unwrap()
                } else {
                    elig[self.rng.gen_range(0..elig.len())]
                }
            }
            ScheduleMode::ScriptedInterleaving => {
                let k = self.branching.len() - 1;
                let c = self.policy.script.get(k).copied().unwrap_or(0);
                elig[c % elig.len()]
            }
        }
    }

    fn tob_live(&self, p: ProcessId) -> bool {
        match &self.tob_liveness {
            TobLiveness::AllWellBehaved => true,
            TobLiveness::Only(s) => s.contains(p),
        }
    }

    fn process(&mut self, ev: Event<P>) {
        match ev {
            Event::Apl(env) => {
                let v = to_value(&env.payload);
                let msg = serde_json::json!({"seq": env.seq, "payload": v});
                if self.byzantine.contains(env.dst) {
                    self.record("deliver", Some(env.src), Some(env.dst), msg);
                    let (to, from, payload) = (env.dst, env.src, env.payload);
                    self.with_adversary_ctx(|a, ctx| a.on_message(ctx, to, from, &payload));
                } else {
                    let (src, dst) = (env.src, env.dst);
                    let payload = env.payload;
                    if self.with_node(dst, |n, ctx| n.on_message(ctx, src, payload)) {
                        self.record("deliver", Some(src), Some(dst), msg);
                    } else {
                        self.record("drop", Some(src), Some(dst), msg);
                    }
                }
            }
            Event::TobOrder { src, msg } => {
                let index = self.tob_log.len();
                let v = to_value(&msg);
                self.record("tob_order", Some(src), None, serde_json::json!({"index": index, "payload": v}));
                self.tob_log.push((src, msg.clone()));
                let targets: Vec<ProcessId> = self
                    .nodes
                    .keys()
                    .copied()
                    .filter(|p| !self.byzantine.contains(*p) && self.tob_live(*p))
                    .collect();
                for dst in targets {
                    self.push(Event::TobDeliver { dst, index });
                }
                if !self.byzantine.is_empty() {
                    self.with_adversary_ctx(|a, ctx| a.on_tob(ctx, src, &msg));
                }
            }
            Event::TobDeliver { dst, index } => {
                *self.tob_cursor.entry(dst).or_insert(0) += 1;
                let (src, msg) = self.tob_log[index].clone();
                let v = serde_json::json!({"index": index, "payload": to_value(&msg)});
                if self.with_node(dst, |n, ctx| n.on_tob(ctx, src, msg)) {
                    self.record("tob_deliver", Some(src), Some(dst), v);
                } else {
                    self.record("drop", Some(src), Some(dst), v);
                }
            }
            Event::Request { node, req, .. } => {
                let v = to_value(&req);
                self.record("request", None, Some(node), v);
                self.with_node(node, |n, ctx| n.on_request(ctx, req));
            }
            Event::Timer { node, tag, .. } => {
                self.record("timer", None, Some(node), Value::from(tag));
                self.with_node(node, |n, ctx| n.on_timer(ctx, tag));
            }
        }
        self.drain_signs();
    }

    fn run_probes(&mut self, quiescent: bool) {
        let view = View {
            nodes: &self.nodes,
            responses: &self.responses,
            step: self.steps,
            quiescent,
        };
        let mut found = Vec::new();
        for p in self.probes.iter_mut() {
            let r = if quiescent {
                p.at_quiescence(&view)
            } else {
                p.after_step(&view)
            };
            if let Some(detail) = r {
                found.push((p.name(), detail));
            }
        }
        for (probe, detail) in found {
            let c = self.violation_counts.entry(probe.clone()).or_insert(0);
            *c += 1;
            if *c == 1 {
                self.record("violation", None, None, serde_json::json!({"probe": probe, "detail": detail}));
                self.violations.push(Violation {
                    step: self.steps,
                    probe,
                    detail,
                });
            }
        }
    }

    /// Executes one step. Returns false when nothing is pending.
    pub fn step(&mut self) -> bool {
        self.start();
        loop {
            if self.pending.is_empty() {
                return false;
            }
            let elig: Vec<usize> = (0..self.pending.len()).filter(|&i| self.eligible(i)).collect();
            if elig.is_empty() {
                let next_due = self
                    .pending
                    .iter()
                    .filter_map(|p| match &p.event {
                        Event::Request { due, .. } | Event::Timer { due, .. } => Some(*due),
                        _ => None,
                    })
                    .min();
                match next_due {
                    Some(d) if d > self.now => {
                        self.now = d;
                        continue;
                    }
                    _ => return false,
                }
            }
            self.branching.push(elig.len());
            let i = self.choose(&elig);
            let ev = self.pending.remove(i).event;
            self.steps += 1;
            self.process(ev);
            self.now += 1;
            self.run_probes(false);
            return true;
        }
    }

    /// Runs until quiescence or the step cap.
    pub fn run(&mut self) -> RunStatus {
        self.start();
        while self.steps < self.step_cap {
            if !self.step() {
                self.record("quiescent", None, None, Value::Null);
                self.run_probes(true);
                return RunStatus::Quiescent;
            }
        }
        if self.pending.is_empty() {
            self.record("quiescent", None, None, Value::Null);
            self.run_probes(true);
            return RunStatus::Quiescent;
        }
        self.record("step_cap_exceeded", None, None, Value::from(self.step_cap));
        RunStatus::StepCapExceeded
    }

    pub fn run_to_quiescence(&mut self) -> Result<(), SimError> {
        match self.run() {
            RunStatus::Quiescent => Ok(()),
            RunStatus::StepCapExceeded => Err(SimError::StepCapExceeded(self.step_cap)),
        }
    }
}

/// Result of [`explore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exploration {
    pub runs: usize,
    /// False when `max_runs` stopped the search early.
    pub complete: bool,
}

/// Depth-first enumeration of every scheduling choice within the first
/// `depth` steps. `run` executes one scripted world and returns its
/// branching record.
pub fn explore(depth: usize, max_runs: usize, mut run: impl FnMut(&[usize]) -> Vec<usize>) -> Exploration {
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    let mut runs = 0;
    while let Some(prefix) = stack.pop() {
        if runs >= max_runs {
            return Exploration { runs, complete: false };
        }
        let branching = run(&prefix);
        runs += 1;
        let limit = depth.min(branching.len());
        for i in (prefix.len()..limit).rev() {
            for c in (1..branching[i]).rev() {
                let mut child = prefix.clone();
                child.resize(i, 0);
                child.push(c);
                stack.push(child);
            }
        }
    }
    Exploration { runs, complete: true }
}
