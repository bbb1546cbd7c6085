use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{ProcessId, ProcessSet};

/// Per-process quorum set. Always kept as an antichain.
pub type QuorumSet = BTreeSet<ProcessSet>;

/// Drop every quorum that strictly contains a sibling.
pub fn normalize(qs: &QuorumSet) -> QuorumSet {
    qs.iter()
        .filter(|q| !qs.iter().any(|o| o.is_strict_subset(q)))
        .copied()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attack {
    universe: ProcessSet,
    byzantine: ProcessSet,
}

impl Attack {
    pub fn new(universe: ProcessSet, byzantine: ProcessSet) -> Result<Self> {
        if !byzantine.is_subset(&universe) {
            return Err(Error::ByzantineOutsideUniverse(byzantine));
        }
        Ok(Attack { universe, byzantine })
    }

    pub fn none(universe: ProcessSet) -> Self {
        Attack {
            universe,
            byzantine: ProcessSet::new(),
        }
    }

    pub fn universe(&self) -> ProcessSet {
        self.universe
    }

    pub fn byzantine(&self) -> ProcessSet {
        self.byzantine
    }

    pub fn well_behaved(&self) -> ProcessSet {
        self.universe - self.byzantine
    }

    pub fn is_byzantine(&self, p: ProcessId) -> bool {
        self.byzantine.contains(p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReconfigOp {
    Join(ProcessId, QuorumSet),
    Leave(ProcessId),
    Add(ProcessId, ProcessSet),
    Remove(ProcessId, ProcessSet),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuorumSystem {
    universe: ProcessSet,
    active: ProcessSet,
    quorums: BTreeMap<ProcessId, QuorumSet>,
}

impl QuorumSystem {
    /// Validating constructor. Declarations must be keyed by active
    /// processes; each per-process set is normalized to an antichain.
    pub fn new(
        universe: ProcessSet,
        active: ProcessSet,
        decls: BTreeMap<ProcessId, QuorumSet>,
    ) -> Result<Self> {
        if let Some(p) = (active - universe).first() {
            return Err(Error::UnknownProcess(p));
        }
        let mut quorums = BTreeMap::new();
        for (p, qs) in decls {
            if !active.contains(p) {
                return Err(Error::UnknownProcess(p));
            }
            if qs.is_empty() {
                return Err(Error::EmptyDeclaration(p));
            }
            for q in &qs {
                if q.is_empty() {
                    return Err(Error::EmptyQuorum(p));
                }
                if let Some(m) = (*q - universe).first() {
                    return Err(Error::UnknownMember {
                        owner: p,
                        quorum: *q,
                        member: m,
                    });
                }
            }
            quorums.insert(p, normalize(&qs));
        }
        Ok(QuorumSystem {
            universe,
            active,
            quorums,
        })
    }

    /// Universe and active set both derived from the declarations.
    pub fn from_decls(decls: BTreeMap<ProcessId, QuorumSet>) -> Result<Self> {
        let mut all: ProcessSet = decls.keys().copied().collect();
        for qs in decls.values() {
            for q in qs {
                all = all | *q;
            }
        }
        Self::new(all, all, decls)
    }

    /// Unchecked constructor for protocol snapshots, where quorums may
    /// have shrunk (possibly to empty) or a process may hold none.
    pub fn from_parts(
        universe: ProcessSet,
        active: ProcessSet,
        quorums: BTreeMap<ProcessId, QuorumSet>,
    ) -> Self {
        QuorumSystem {
            universe,
            active,
            quorums,
        }
    }

    pub fn universe(&self) -> ProcessSet {
        self.universe
    }

    pub fn active(&self) -> ProcessSet {
        self.active
    }

    pub fn domain(&self) -> ProcessSet {
        self.quorums.keys().copied().collect()
    }

    pub fn declarations(&self) -> &BTreeMap<ProcessId, QuorumSet> {
        &self.quorums
    }

    pub fn quorums_of(&self, p: ProcessId) -> Option<&QuorumSet> {
        self.quorums.get(&p)
    }

    /// Quorums of `p`, empty if `p` has no declaration.
    pub fn quorums(&self, p: ProcessId) -> impl Iterator<Item = &ProcessSet> {
        self.quorums.get(&p).into_iter().flatten()
    }

    /// Fails if a well-behaved active process has no declaration.
    pub fn validate_attack(&self, attack: &Attack) -> Result<()> {
        if !self.universe.is_subset(&attack.universe()) {
            return Err(Error::Input(format!(
                "system universe {} exceeds attack universe {}",
                self.universe,
                attack.universe()
            )));
        }
        for p in self.active - attack.byzantine() {
            if self.quorums.get(&p).is_none_or(|qs| qs.is_empty()) {
                return Err(Error::EmptyDeclaration(p));
            }
        }
        Ok(())
    }

    /// Human-readable warnings, currently only missing self-membership.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (p, qs) in &self.quorums {
            for q in qs {
                if !q.contains(*p) {
                    out.push(format!("process {p} is not a member of its quorum {q}"));
                }
            }
        }
        out
    }

    /// Well-behaved quorums that have no well-behaved quorum strictly inside.
    pub fn minimal_quorums(&self, attack: &Attack) -> BTreeSet<ProcessSet> {
        let all: BTreeSet<ProcessSet> = self
            .quorums
            .iter()
            .filter(|(p, _)| !attack.is_byzantine(**p))
            .flat_map(|(_, qs)| qs.iter().copied())
            .collect();
        all.iter()
            .filter(|q| !all.iter().any(|o| o.is_strict_subset(q)))
            .copied()
            .collect()
    }

    pub fn is_system_quorum(&self, attack: &Attack, s: ProcessSet) -> bool {
        self.minimal_quorums(attack).iter().any(|m| m.is_subset(&s))
    }

    pub fn is_blocking(&self, p: ProcessId, set: ProcessSet) -> Result<bool> {
        self.is_active_blocking(p, set, ProcessSet::new())
    }

    pub fn is_active_blocking(
        &self,
        p: ProcessId,
        set: ProcessSet,
        left: ProcessSet,
    ) -> Result<bool> {
        let qs = self.quorums.get(&p).ok_or(Error::UnknownProcess(p))?;
        Ok(qs.iter().all(|q| (*q - left).intersects(&set)))
    }

    pub fn followers(&self, p: ProcessId) -> ProcessSet {
        self.quorums
            .iter()
            .filter(|(o, qs)| self.active.contains(**o) && qs.iter().any(|q| q.contains(p)))
            .map(|(o, _)| *o)
            .collect()
    }

    pub fn apply_reconfig(&self, op: &ReconfigOp) -> Result<QuorumSystem> {
        let mut next = self.clone();
        match op {
            ReconfigOp::Join(p, qs) => {
                if self.quorums.contains_key(p) {
                    return Err(Error::PreconditionViolated(format!("{p} already in domain")));
                }
                if qs.is_empty() || qs.iter().any(|q| q.is_empty()) {
                    return Err(Error::PreconditionViolated(format!(
                        "join of {p} with empty quorums"
                    )));
                }
                next.universe.insert(*p);
                for q in qs {
                    next.universe = next.universe | *q;
                }
                next.active.insert(*p);
                next.quorums.insert(*p, normalize(qs));
            }
            ReconfigOp::Leave(p) => {
                if !self.active.contains(*p) {
                    return Err(Error::PreconditionViolated(format!("{p} is not active")));
                }
                next.active.remove(*p);
                next.quorums.remove(p);
            }
            ReconfigOp::Add(p, q) => {
                if q.is_empty() {
                    return Err(Error::PreconditionViolated("empty quorum".into()));
                }
                let Some(qs) = next.quorums.get_mut(p) else {
                    return Err(Error::PreconditionViolated(format!("{p} not in domain")));
                };
                qs.insert(*q);
                *qs = normalize(qs);
                next.universe = next.universe | *q;
            }
            ReconfigOp::Remove(p, q) => {
                let Some(qs) = next.quorums.get_mut(p) else {
                    return Err(Error::PreconditionViolated(format!("{p} not in domain")));
                };
                if !qs.remove(q) {
                    return Err(Error::PreconditionViolated(format!("{q} is not a quorum of {p}")));
                }
            }
        }
        Ok(next)
    }
}

/// Builds a declaration map from `(process, [[members]])` literals.
pub fn decls(entries: &[(u32, &[&[u32]])]) -> BTreeMap<ProcessId, QuorumSet> {
    entries
        .iter()
        .map(|(p, qs)| {
            (
                ProcessId(*p),
                qs.iter().map(|q| ProcessSet::of(q)).collect::<QuorumSet>(),
            )
        })
        .collect()
}
