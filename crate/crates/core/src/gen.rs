//! Random system generators used by property tests and the acceptance suite.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::ids::{ProcessId, ProcessSet};
use crate::json::SystemDoc;
use crate::props::{check_consistency, check_quorum_sharing, maximal_outlived_sets};
use crate::system::{normalize, Attack, QuorumSet, QuorumSystem};

fn random_subset<R: Rng>(rng: &mut R, from: &[ProcessId], size: usize) -> ProcessSet {
    from.choose_multiple(rng, size).copied().collect()
}

/// Declarations drawn from a common family `C`: each process takes the
/// minimal members of `C` containing it, or `c ∪ {p}` for a random `c`.
/// Quorum sharing holds by construction.
pub fn family_system<R: Rng>(rng: &mut R, n: u32, byzantine: ProcessSet) -> SystemDoc {
    let procs: Vec<ProcessId> = (1..=n).map(ProcessId).collect();
    let k = rng.gen_range(1..=4);
    let lo = (n as usize).div_ceil(2).max(1);
    let family: Vec<ProcessSet> = (0..k)
        .map(|_| {
            let s = rng.gen_range(lo..=n as usize);
            random_subset(rng, &procs, s)
        })
        .collect();
    let mut decls = BTreeMap::new();
    for &p in &procs {
        let cands: QuorumSet = family.iter().filter(|c| c.contains(p)).copied().collect();
        let qs = if cands.is_empty() {
            let c = family[rng.gen_range(0..family.len())];
            [c.with(p)].into_iter().collect()
        } else {
            normalize(&cands)
        };
        decls.insert(p, qs);
    }
    let u: ProcessSet = procs.iter().copied().collect();
    let system = QuorumSystem::new(u, u, decls).expect("generated system");
    let attack = Attack::new(u, byzantine).expect("generated attack");
    SystemDoc::new(system, attack)
}

fn random_byzantine<R: Rng>(rng: &mut R, n: u32, max: u32) -> ProcessSet {
    let count = rng.gen_range(0..=max.min(n.saturating_sub(2)));
    let procs: Vec<ProcessId> = (1..=n).map(ProcessId).collect();
    random_subset(rng, &procs, count as usize)
}

/// A system with consistency at 𝓦 and quorum sharing, `3 ≤ n ≤ max_n`.
/// Byzantine processes are declared and each of their quorums contains a
/// well-behaved minimal quorum, which the graph lemmas rely on.
pub fn sharing_system<R: Rng>(rng: &mut R, max_n: u32) -> SystemDoc {
    loop {
        let n = rng.gen_range(3..=max_n);
        let byz = random_byzantine(rng, n, 2);
        let d = family_system(rng, n, byz);
        let w = d.attack.well_behaved();
        let byz_well_formed = d.system.declarations().iter().all(|(p, qs)| {
            !d.attack.is_byzantine(*p) || qs.iter().all(|q| d.system.is_system_quorum(&d.attack, *q))
        });
        if byz_well_formed
            && check_consistency(&d.system, &d.attack, w).unwrap().holds
            && check_quorum_sharing(&d.system).holds
        {
            return d;
        }
    }
}

/// A system together with a nonempty maximal outlived set of size at
/// least `min_outlived`. Byzantine members are sprinkled into some
/// well-behaved quorums so sharing usually fails while inclusion survives.
pub fn outlived_system<R: Rng>(rng: &mut R, max_n: u32, min_outlived: usize) -> (SystemDoc, ProcessSet) {
    loop {
        let n = rng.gen_range(3..=max_n);
        let byz = random_byzantine(rng, n, 2);
        let mut d = family_system(rng, n, byz);
        if !byz.is_empty() && rng.gen_bool(0.5) {
            let mut decls = d.system.declarations().clone();
            for (p, qs) in decls.iter_mut() {
                if byz.contains(*p) || !rng.gen_bool(0.4) {
                    continue;
                }
                let b = byz.to_vec()[rng.gen_range(0..byz.len())];
                let grown: QuorumSet = qs
                    .iter()
                    .map(|q| if rng.gen_bool(0.5) { q.with(b) } else { *q })
                    .collect();
                *qs = normalize(&grown);
            }
            let u = d.system.universe();
            d.system = QuorumSystem::new(u, u, decls).expect("perturbed system");
        }
        let found = maximal_outlived_sets(&d.system, &d.attack, 12).unwrap();
        if let Some(o) = found.first() {
            if o.len() >= min_outlived {
                let o = *o;
                return (d, o);
            }
        }
    }
}

/// Fixed personal-quorum sample (consistency plus sharing).
pub fn pbqs_sample() -> SystemDoc {
    let mut rng = StdRng::seed_from_u64(7);
    sharing_system(&mut rng, 6)
}
