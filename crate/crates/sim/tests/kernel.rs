use std::collections::{BTreeMap, BTreeSet};

use hqs_core::{pset, ProcessId, ProcessSet};
use hqs_sim::crypto::Signature;
use hqs_sim::kernel::{AdvCtx, Adversary, Ctx, FnProbe, Protocol, RunStatus, SchedulePolicy, SimError, View, World};
use hqs_sim::{explore, Trace};
use proptest::prelude::*;

#[derive(Default)]
struct Gossip {
    peers: ProcessSet,
    got: Vec<(ProcessId, u64)>,
    tob: Vec<(ProcessId, u64)>,
}

impl Protocol for Gossip {
    type Msg = u64;
    type Request = u64;
    type Response = u64;

    fn on_request(&mut self, ctx: &mut Ctx<'_, Self>, v: u64) {
        ctx.send_all(self.peers, v);
        ctx.tob_broadcast(v);
    }

    fn on_message(&mut self, ctx: &mut Ctx<'_, Self>, from: ProcessId, v: u64) {
        self.got.push((from, v));
        ctx.respond(v);
    }

    fn on_tob(&mut self, _ctx: &mut Ctx<'_, Self>, from: ProcessId, v: u64) {
        self.tob.push((from, v));
    }
}

fn gossip_world(n: u32, byz: ProcessSet, policy: SchedulePolicy) -> World<Gossip> {
    let all: ProcessSet = (1..=n).map(ProcessId).collect();
    let nodes: BTreeMap<_, _> = all
        .iter()
        .filter(|p| !byz.contains(*p))
        .map(|p| {
            (
                p,
                Gossip {
                    peers: all,
                    ..Gossip::default()
                },
            )
        })
        .collect();
    World::new(nodes, byz, policy)
}

fn load(w: &mut World<Gossip>, n: u32) {
    for p in 1..=n {
        if w.nodes().contains_key(&ProcessId(p)) {
            w.request(ProcessId(p), u64::from(p) * 10, u64::from(p % 3));
        }
    }
}

struct Flood;

impl Adversary<Gossip> for Flood {
    fn on_start(&mut self, ctx: &mut AdvCtx<'_, Gossip>) {
        let _ = ctx.send(ProcessId(3), ProcessId(1), 0);
    }

    fn on_message(&mut self, ctx: &mut AdvCtx<'_, Gossip>, to: ProcessId, from: ProcessId, v: &u64) {
        let _ = ctx.send(to, from, v + 1);
    }
}

/// Keeps bouncing between honest 1 and Byzantine 3.
struct Echoer;

impl Protocol for Echoer {
    type Msg = u64;
    type Request = ();
    type Response = ();

    fn on_request(&mut self, _ctx: &mut Ctx<'_, Self>, _r: ()) {}

    fn on_message(&mut self, ctx: &mut Ctx<'_, Self>, from: ProcessId, v: u64) {
        ctx.send(from, v + 1);
    }
}

struct Bounce;

impl Adversary<Echoer> for Bounce {
    fn on_start(&mut self, ctx: &mut AdvCtx<'_, Echoer>) {
        let _ = ctx.send(ProcessId(3), ProcessId(1), 0);
    }

    fn on_message(&mut self, ctx: &mut AdvCtx<'_, Echoer>, to: ProcessId, from: ProcessId, v: &u64) {
        let _ = ctx.send(to, from, v + 1);
    }
}

struct Forger {
    results: Vec<Result<(), SimError>>,
    sig_ok: Option<bool>,
}

impl Adversary<Gossip> for Forger {
    fn on_start(&mut self, ctx: &mut AdvCtx<'_, Gossip>) {
        self.results.push(ctx.send(ProcessId(1), ProcessId(2), 99));
        self.results.push(ctx.tob_broadcast(ProcessId(2), 99));
        self.results.push(ctx.sign(ProcessId(1), "x").map(|_| ()));
        let own = ctx.sign(ProcessId(3), "x");
        self.sig_ok = own.ok().map(|s| ctx.verify(&s, ProcessId(3), "x"));
    }
}

#[test]
fn empty_world_is_quiescent_at_step_zero() {
    let mut w: World<Gossip> = World::new(BTreeMap::new(), ProcessSet::new(), SchedulePolicy::random(0));
    assert_eq!(w.run(), RunStatus::Quiescent);
    assert_eq!(w.steps(), 0);
    assert_eq!(w.trace().of_kind("quiescent").count(), 1);
}

#[test]
fn endless_ping_pong_hits_the_step_cap() {
    let nodes: BTreeMap<_, _> = [(ProcessId(1), Echoer)].into_iter().collect();
    let mut w = World::new(nodes, pset![3], SchedulePolicy::random(1))
        .with_adversary(Bounce)
        .with_step_cap(100);
    assert_eq!(w.run(), RunStatus::StepCapExceeded);
    assert_eq!(w.steps(), 100);
    assert_eq!(w.trace().of_kind("step_cap_exceeded").count(), 1);
    let mut w2 = gossip_world(3, pset![3], SchedulePolicy::random(1))
        .with_adversary(Flood)
        .with_step_cap(100);
    assert!(w2.run_to_quiescence().is_ok(), "honest gossip does not answer the flood");
}

#[test]
fn forged_sender_and_signer_are_rejected() {
    let mut w = gossip_world(3, pset![3], SchedulePolicy::random(0));
    let forger = std::rc::Rc::new(std::cell::RefCell::new(None));
    struct Wrap(std::rc::Rc<std::cell::RefCell<Option<Forger>>>);
    impl Adversary<Gossip> for Wrap {
        fn on_start(&mut self, ctx: &mut AdvCtx<'_, Gossip>) {
            let mut f = Forger {
                results: vec![],
                sig_ok: None,
            };
            f.on_start(ctx);
            *self.0.borrow_mut() = Some(f);
        }
    }
    w = w.with_adversary(Wrap(forger.clone()));
    w.run_to_quiescence().unwrap();
    let f = forger.borrow_mut().take().unwrap();
    assert_eq!(f.results[0], Err(SimError::ForgedSender(ProcessId(1))));
    assert_eq!(f.results[1], Err(SimError::ForgedSender(ProcessId(2))));
    assert_eq!(f.results[2], Err(SimError::ForgedSigner(ProcessId(1))));
    assert_eq!(f.sig_ok, Some(true));
    assert_eq!(w.rejected().len(), 3);
    assert!(w.nodes()[&ProcessId(2)].got.is_empty());
    assert_eq!(w.trace().of_kind("forgery_rejected").count(), 3);
}

#[test]
fn bogus_signatures_never_verify() {
    let mut w = gossip_world(2, ProcessSet::new(), SchedulePolicy::random(0));
    w.run_to_quiescence().unwrap();
    let fake = Signature::bogus(ProcessId(1), &hqs_sim::crypto::digest_of("m"));
    assert!(!w.signatures().verify(&fake, ProcessId(1), "m"));
}

fn run_gossip(seed: u64, adversarial: bool) -> World<Gossip> {
    let policy = if adversarial {
        SchedulePolicy::adversarial(seed)
    } else {
        SchedulePolicy::random(seed)
    };
    let mut w = gossip_world(5, pset![5], policy);
    load(&mut w, 5);
    w.run_to_quiescence().unwrap();
    w
}

#[test]
fn same_seed_same_trace() {
    for seed in [0, 7, 42] {
        for adv in [false, true] {
            let a = run_gossip(seed, adv).trace().to_jsonl();
            let b = run_gossip(seed, adv).trace().to_jsonl();
            assert_eq!(a, b);
        }
    }
    assert_ne!(run_gossip(1, false).trace().to_jsonl(), run_gossip(2, false).trace().to_jsonl());
}

#[test]
fn trace_round_trips_through_jsonl() {
    let w = run_gossip(3, true);
    let text = w.trace().to_jsonl();
    let back = Trace::from_jsonl(&text).unwrap();
    assert_eq!(back.len(), w.trace().len());
    assert_eq!(back.to_jsonl(), text);
}

#[test]
fn probes_see_every_step_and_the_end() {
    let mut w = gossip_world(3, ProcessSet::new(), SchedulePolicy::random(5));
    load(&mut w, 3);
    w.add_probe(FnProbe::every_step("never_more_than_9", |v: &View<'_, Gossip>| {
        let got: usize = v.nodes.values().map(|n| n.got.len()).sum();
        (got > 9).then(|| format!("{got}"))
    }));
    w.add_probe(FnProbe::at_end("all_nine", |v: &View<'_, Gossip>| {
        let got: usize = v.nodes.values().map(|n| n.got.len()).sum();
        (got != 9).then(|| format!("{got}"))
    }));
    w.add_probe(FnProbe::at_end("always_fires", |_v: &View<'_, Gossip>| Some("x".into())));
    w.run_to_quiescence().unwrap();
    let names: BTreeSet<_> = w.violations().iter().map(|v| v.probe.as_str()).collect();
    assert_eq!(names, ["always_fires"].into_iter().collect());
    assert_eq!(w.violation_counts()["always_fires"], 1);
}

#[test]
fn explore_covers_all_orders_of_two_sends() {
    let mut finals = BTreeSet::new();
    let runs = explore(6, 100_000, |script| {
        let mut w = gossip_world(2, ProcessSet::new(), SchedulePolicy::scripted(script.to_vec()));
        w.request(ProcessId(1), 1, 0);
        w.request(ProcessId(2), 2, 0);
        w.run_to_quiescence().unwrap();
        finals.insert(w.nodes()[&ProcessId(1)].got.clone());
        w.branching().to_vec()
    });
    assert!(runs.complete && runs.runs > 1, "{runs:?}");
    // node 1 gets its own 1 and 2's 2 in either order
    assert_eq!(finals.len(), 2);
}

#[test]
fn timers_fire_after_their_delay() {
    struct T(Option<u64>);
    impl Protocol for T {
        type Msg = ();
        type Request = ();
        type Response = u64;
        fn on_request(&mut self, ctx: &mut Ctx<'_, Self>, _r: ()) {
            ctx.set_timer(50, 7);
        }
        fn on_message(&mut self, _ctx: &mut Ctx<'_, Self>, _f: ProcessId, _m: ()) {}
        fn on_timer(&mut self, ctx: &mut Ctx<'_, Self>, tag: u64) {
            self.0 = Some(ctx.now());
            ctx.respond(tag);
        }
    }
    let nodes: BTreeMap<_, _> = [(ProcessId(1), T(None))].into_iter().collect();
    let mut w = World::new(nodes, ProcessSet::new(), SchedulePolicy::random(0));
    w.request(ProcessId(1), (), 3);
    w.run_to_quiescence().unwrap();
    let fired = w.nodes()[&ProcessId(1)].0.unwrap();
    assert!(fired >= 53, "{fired}");
    assert_eq!(w.responses()[0].response, 7);
}

type Key = (u64, u64, u64);

fn keys(t: &Trace, kind: &str) -> Vec<Key> {
    let mut v: Vec<Key> = t
        .of_kind(kind)
        .map(|e| {
            (
                e.src.map_or(0, |p| u64::from(p.0)),
                e.dst.map_or(0, |p| u64::from(p.0)),
                e.msg["seq"].as_u64().unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tob_logs_are_prefixes_of_one_order(seed in any::<u64>(), adv in any::<bool>()) {
        let w = run_gossip(seed, adv);
        let order: Vec<(ProcessId, u64)> = w.tob_log().to_vec();
        for n in w.nodes().values() {
            prop_assert_eq!(&n.tob[..], &order[..n.tob.len()]);
            prop_assert_eq!(n.tob.len(), order.len());
        }
    }

    #[test]
    fn links_deliver_each_send_exactly_once(seed in any::<u64>(), adv in any::<bool>()) {
        let w = run_gossip(seed, adv);
        let sent = keys(w.trace(), "send");
        let delivered = keys(w.trace(), "deliver");
        prop_assert_eq!(&sent, &delivered);
        let unique: BTreeSet<_> = delivered.iter().collect();
        prop_assert_eq!(unique.len(), delivered.len());
        for (p, n) in w.nodes() {
            for (from, v) in &n.got {
                prop_assert_eq!(*v, u64::from(from.0) * 10, "{} got {} from {}", p, v, from);
            }
            prop_assert_eq!(n.got.len(), 4);
        }
    }
}
