use hqs_core::gen::outlived_system;
use hqs_core::{fixtures, ProcessSet};
use hqs_sim::scenario::{AdversarySpec, NamedProbe, Op, RequestSpec, Scenario, ScheduleSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn brb(seed: u64) -> Scenario {
    let mut s = Scenario::from_json(r#"{"protocol":"brb","system":"inline","seed":0}"#).unwrap();
    s.seed = seed;
    s.probes = vec![NamedProbe::BrbConsistency, NamedProbe::BrbValidity, NamedProbe::BrbTotality];
    s
}

fn bcast(node: u32, value: u64) -> RequestSpec {
    RequestSpec {
        node,
        op: Op::Broadcast,
        quorum: vec![],
        value,
        at: 0,
    }
}

#[test]
fn honest_broadcast_on_running_example() {
    let doc = fixtures::fig1();
    for seed in 0..30 {
        let mut s = brb(seed);
        s.outlived = Some(vec![2, 3, 5]);
        s.requests = vec![bcast(2, 41), bcast(3, 42)];
        let o = s.run(&doc);
        assert!(o.pass(), "seed {seed}: {:?}", o.violations);
        for p in ["2", "3", "5"] {
            assert_eq!(o.result["delivered"][p]["2"], 41);
            assert_eq!(o.result["delivered"][p]["3"], 42);
        }
    }
}

#[test]
fn second_broadcast_is_refused() {
    let mut s = brb(0);
    s.outlived = Some(vec![2, 3, 5]);
    s.requests = vec![bcast(2, 1), bcast(2, 2)];
    let o = s.run(&fixtures::fig1());
    let names = hqs_sim::scenario::response_names(&o);
    assert!(names.iter().any(|(n, r)| *n == 2 && r.contains("DuplicateInstance")));
}

#[test]
fn equivocation_never_splits_the_outlived_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut equivocations = 0;
    for i in 0..40u64 {
        let (doc, o) = outlived_system(&mut rng, 6, 1);
        let byz = doc.attack.byzantine();
        let mut s = brb(i);
        s.schedule = ScheduleSpec::AdversarialReorder;
        s.outlived = Some(o.iter().map(|p| p.0).collect());
        s.adversary = AdversarySpec::Equivocate {
            senders: byz.iter().map(|p| p.0).collect(),
        };
        let sender = o.iter().next().unwrap();
        s.requests = vec![bcast(sender.0, 5)];
        equivocations += usize::from(byz != ProcessSet::new());
        let out = s.run(&doc);
        assert!(out.pass(), "system {i}: {:?}", out.violations);
    }
    assert!(equivocations > 0);
}
