//! Named example systems.

use std::collections::BTreeMap;

use crate::ids::{ProcessId, ProcessSet};
use crate::json::SystemDoc;
use crate::system::{decls, Attack, QuorumSet, QuorumSystem};

fn build(universe: &[u32], byzantine: &[u32], entries: &[(u32, &[&[u32]])]) -> SystemDoc {
    let u = ProcessSet::of(universe);
    let system = QuorumSystem::new(u, u, decls(entries)).expect("fixture is well-formed");
    let attack = Attack::new(u, ProcessSet::of(byzantine)).expect("fixture attack");
    system.validate_attack(&attack).expect("fixture declarations");
    SystemDoc::new(system, attack)
}

/// Running example: 4 is Byzantine and undeclared.
pub fn fig1() -> SystemDoc {
    build(
        &[1, 2, 3, 4, 5],
        &[4],
        &[
            (1, &[&[1, 2, 4]]),
            (2, &[&[1, 2], &[2, 3], &[2, 5]]),
            (3, &[&[2, 3]]),
            (5, &[&[2, 5]]),
        ],
    )
}

/// Quorum-graph example: sink {1,2,3,5}, with 4 and 6 feeding into it.
pub fn fig2() -> SystemDoc {
    build(
        &[1, 2, 3, 4, 5, 6],
        &[5],
        &[
            (1, &[&[1, 2], &[1, 3, 5]]),
            (2, &[&[1, 2]]),
            (3, &[&[1, 3, 5]]),
            (4, &[&[1, 2, 4]]),
            (5, &[&[1, 3, 5]]),
            (6, &[&[1, 2, 6]]),
        ],
    )
}

/// Leave trade-off system; 1 is Byzantine and undeclared.
pub fn fig4_q1() -> SystemDoc {
    build(
        &[1, 2, 3, 4],
        &[1],
        &[(2, &[&[2, 3]]), (3, &[&[2, 3], &[1, 3, 4]]), (4, &[&[1, 3, 4]])],
    )
}

/// The remove variant: 2 additionally holds {1,2,4}.
pub fn fig4_q1_remove() -> SystemDoc {
    build(
        &[1, 2, 3, 4],
        &[1],
        &[
            (2, &[&[2, 3], &[1, 2, 4]]),
            (3, &[&[2, 3], &[1, 3, 4]]),
            (4, &[&[1, 3, 4]]),
        ],
    )
}

/// Add trade-off system (before 2 adds {1,2}).
pub fn fig4_q2() -> SystemDoc {
    build(
        &[1, 2, 3, 4],
        &[1],
        &[(2, &[&[2, 3]]), (3, &[&[2, 3], &[3, 4]]), (4, &[&[1, 3, 4]])],
    )
}

/// Reconfiguration attack: 2 wants {2,4}, 3 wants {1,3}, 4 is Byzantine.
pub fn s5_attack() -> SystemDoc {
    build(
        &[1, 2, 3, 4],
        &[4],
        &[(1, &[&[1, 2, 4]]), (2, &[&[1, 2], &[2, 3]]), (3, &[&[2, 3]])],
    )
}

/// State after both attack adds were applied naively.
pub fn s5_attack_post() -> SystemDoc {
    build(
        &[1, 2, 3, 4],
        &[4],
        &[
            (1, &[&[1, 2, 4]]),
            (2, &[&[1, 2], &[2, 3], &[2, 4]]),
            (3, &[&[2, 3], &[1, 3]]),
        ],
    )
}

/// Three processes whose quorums chain around a cycle; inclusion fails.
pub fn draft_cycle() -> SystemDoc {
    build(&[1, 2, 3], &[], &[(1, &[&[1, 3]]), (2, &[&[1, 2]]), (3, &[&[2, 3]])])
}

/// Small system for exercising add responsiveness.
pub fn add_responsive() -> SystemDoc {
    build(
        &[1, 2, 3],
        &[],
        &[(1, &[&[1, 3]]), (2, &[&[2, 3]]), (3, &[&[2, 3], &[1, 3]])],
    )
}

/// Two leavers whose pair {1,2} is the only intersection.
pub fn leave_pair() -> SystemDoc {
    build(
        &[1, 2, 3, 4],
        &[],
        &[
            (1, &[&[1, 2]]),
            (2, &[&[1, 2]]),
            (3, &[&[1, 2, 3]]),
            (4, &[&[1, 2, 4]]),
        ],
    )
}

/// Homogeneous threshold system: everyone holds every `n - f` subset.
pub fn dqs(n: u32, f: u32, byzantine: &[u32]) -> SystemDoc {
    let u: ProcessSet = (1..=n).map(ProcessId).collect();
    let quorums: QuorumSet = u.subsets().filter(|s| s.len() == (n - f) as usize).collect();
    let d: BTreeMap<ProcessId, QuorumSet> = u.iter().map(|p| (p, quorums.clone())).collect();
    let system = QuorumSystem::new(u, u, d).expect("dqs");
    let attack = Attack::new(u, ProcessSet::of(byzantine)).expect("dqs attack");
    SystemDoc::new(system, attack)
}

/// Every named fixture, keyed by file stem.
pub fn library() -> Vec<(&'static str, SystemDoc)> {
    vec![
        ("fig1", fig1()),
        ("fig2", fig2()),
        ("fig4-q1", fig4_q1()),
        ("fig4-q1-remove", fig4_q1_remove()),
        ("fig4-q2", fig4_q2()),
        ("s5-attack", s5_attack()),
        ("s5-attack-post", s5_attack_post()),
        ("draft-cycle", draft_cycle()),
        ("add-responsive", add_responsive()),
        ("leave-pair", leave_pair()),
        ("dqs-4", dqs(4, 1, &[4])),
        ("pbqs-sample", crate::gen::pbqs_sample()),
    ]
}

pub fn by_name(name: &str) -> Option<SystemDoc> {
    library().into_iter().find(|(n, _)| *n == name).map(|(_, d)| d)
}
