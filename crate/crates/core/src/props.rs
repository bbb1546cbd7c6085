use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{ProcessId, ProcessSet};
use crate::system::{Attack, QuorumSystem};

pub const DEFAULT_SIZE_BOUND: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Property {
    Consistency,
    Availability,
    AvailableInside,
    Inclusion,
    Sharing,
    Outlived,
    ActiveInclusion,
    ActiveAvailability,
    TentativeInclusion,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Witness {
    /// Two quorums whose intersection misses the target set.
    QuorumPair {
        p: ProcessId,
        q: ProcessSet,
        p2: ProcessId,
        q2: ProcessSet,
    },
    /// A process without a suitable quorum.
    Process { p: ProcessId },
    /// A member of `quorum` (owned by `owner`) with no quorum inside it.
    Inclusion {
        owner: ProcessId,
        quorum: ProcessSet,
        member: ProcessId,
    },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::QuorumPair { p, q, p2, q2 } => {
                write!(f, "quorum {q} of {p} and quorum {q2} of {p2}")
            }
            Witness::Process { p } => write!(f, "process {p}"),
            Witness::Inclusion {
                owner,
                quorum,
                member,
            } => write!(f, "member {member} of quorum {quorum} of {owner}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl PropertyReport {
    fn from(property: Property, witness: Option<Witness>) -> Self {
        PropertyReport {
            property,
            holds: witness.is_none(),
            witness,
        }
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "{}: holds", self.property),
            Some(w) => write!(f, "{}: fails ({w})", self.property),
        }
    }
}

/// Tentative quorums per process: set of (requester, quorum).
pub type TentativeMap = BTreeMap<ProcessId, BTreeSet<(ProcessId, ProcessSet)>>;

fn require_well_behaved(attack: &Attack, set: ProcessSet) -> Result<()> {
    if set.is_subset(&attack.well_behaved()) {
        Ok(())
    } else {
        Err(Error::BadSubset(set))
    }
}

fn well_behaved_quorums<'a>(
    qs: &'a QuorumSystem,
    attack: &'a Attack,
) -> impl Iterator<Item = (ProcessId, ProcessSet)> + 'a {
    qs.declarations()
        .iter()
        .filter(|(p, _)| !attack.is_byzantine(**p))
        .flat_map(|(p, s)| s.iter().map(move |q| (*p, *q)))
}

pub fn check_consistency(qs: &QuorumSystem, attack: &Attack, at: ProcessSet) -> Result<PropertyReport> {
    require_well_behaved(attack, at)?;
    Ok(check_consistency_raw(qs, attack, at))
}

/// Consistency without the `at ⊆ 𝓦` precondition.
pub fn check_consistency_raw(qs: &QuorumSystem, attack: &Attack, at: ProcessSet) -> PropertyReport {
    let all: Vec<_> = well_behaved_quorums(qs, attack).collect();
    for (i, &(p, q)) in all.iter().enumerate() {
        for &(p2, q2) in &all[i..] {
            if !(q & q2).intersects(&at) {
                return PropertyReport::from(
                    Property::Consistency,
                    Some(Witness::QuorumPair { p, q, p2, q2 }),
                );
            }
        }
    }
    PropertyReport::from(Property::Consistency, None)
}

pub fn check_availability(qs: &QuorumSystem, for_p: ProcessSet, at: ProcessSet) -> Result<PropertyReport> {
    for p in for_p {
        if qs.quorums_of(p).is_none() {
            return Err(Error::UnknownProcess(p));
        }
    }
    Ok(availability(qs, Property::Availability, for_p, at, ProcessSet::new()))
}

fn availability(
    qs: &QuorumSystem,
    prop: Property,
    for_p: ProcessSet,
    at: ProcessSet,
    left: ProcessSet,
) -> PropertyReport {
    for p in for_p - left {
        if !qs.quorums(p).any(|q| (*q - left).is_subset(&at)) {
            return PropertyReport::from(prop, Some(Witness::Process { p }));
        }
    }
    PropertyReport::from(prop, None)
}

pub fn check_available_inside(qs: &QuorumSystem, set: ProcessSet) -> Result<PropertyReport> {
    let mut r = check_availability(qs, set, set)?;
    r.property = Property::AvailableInside;
    Ok(r)
}

/// Processes in `set ∖ left` without a quorum are reported as failing
/// rather than as an error.
pub fn check_active_availability(qs: &QuorumSystem, set: ProcessSet, left: ProcessSet) -> PropertyReport {
    availability(qs, Property::ActiveAvailability, set, set, left)
}

fn inclusion(
    qs: &QuorumSystem,
    attack: &Attack,
    prop: Property,
    set: ProcessSet,
    left: ProcessSet,
    tentative: Option<&TentativeMap>,
) -> PropertyReport {
    let w = attack.well_behaved();
    for (owner, quorum) in well_behaved_quorums(qs, attack) {
        for member in quorum & (set - left) {
            let declared = qs.quorums(member).copied();
            let extra = tentative
                .and_then(|t| t.get(&member))
                .into_iter()
                .flatten()
                .map(|(_, q)| *q);
            let ok = declared
                .chain(extra)
                .any(|q2| ((q2 & w) - left).is_subset(&quorum));
            if !ok {
                return PropertyReport::from(
                    prop,
                    Some(Witness::Inclusion {
                        owner,
                        quorum,
                        member,
                    }),
                );
            }
        }
    }
    PropertyReport::from(prop, None)
}

pub fn check_quorum_inclusion(qs: &QuorumSystem, attack: &Attack, set: ProcessSet) -> Result<PropertyReport> {
    require_well_behaved(attack, set)?;
    Ok(inclusion(qs, attack, Property::Inclusion, set, ProcessSet::new(), None))
}

/// Members in `left` carry no obligation, and the witness quorum only has
/// to cover `q′ ∩ 𝓦 ∖ left`.
pub fn check_active_inclusion(
    qs: &QuorumSystem,
    attack: &Attack,
    set: ProcessSet,
    left: ProcessSet,
) -> Result<PropertyReport> {
    require_well_behaved(attack, set)?;
    Ok(inclusion(qs, attack, Property::ActiveInclusion, set, left, None))
}

pub fn check_tentative_inclusion(
    qs: &QuorumSystem,
    attack: &Attack,
    set: ProcessSet,
    tentative: &TentativeMap,
) -> Result<PropertyReport> {
    require_well_behaved(attack, set)?;
    Ok(inclusion(
        qs,
        attack,
        Property::TentativeInclusion,
        set,
        ProcessSet::new(),
        Some(tentative),
    ))
}

/// Every member of every declared quorum, Byzantine owners included, has a
/// quorum inside it.
pub fn check_quorum_sharing(qs: &QuorumSystem) -> PropertyReport {
    for (owner, quorums) in qs.declarations() {
        for quorum in quorums {
            for member in *quorum {
                if !qs.quorums(member).any(|q| q.is_subset(quorum)) {
                    return PropertyReport::from(
                        Property::Sharing,
                        Some(Witness::Inclusion {
                            owner: *owner,
                            quorum: *quorum,
                            member,
                        }),
                    );
                }
            }
        }
    }
    PropertyReport::from(Property::Sharing, None)
}

pub fn check_outlived(qs: &QuorumSystem, attack: &Attack, o: ProcessSet) -> Result<PropertyReport> {
    require_well_behaved(attack, o)?;
    if o.is_empty() {
        // Vacuous: nothing is required to survive.
        return Ok(PropertyReport::from(Property::Outlived, None));
    }
    let parts = [
        check_consistency_raw(qs, attack, o),
        availability(qs, Property::AvailableInside, o, o, ProcessSet::new()),
        inclusion(qs, attack, Property::Inclusion, o, ProcessSet::new(), None),
    ];
    let witness = parts.into_iter().find_map(|r| r.witness);
    Ok(PropertyReport::from(Property::Outlived, witness))
}

/// Largest subset of `set` that is available inside itself. Availability
/// inside is closed under union, so every outlived set lies below it.
pub fn largest_available_inside(qs: &QuorumSystem, set: ProcessSet) -> ProcessSet {
    let mut cur = set;
    loop {
        let next: ProcessSet = cur
            .iter()
            .filter(|p| qs.quorums(*p).any(|q| q.is_subset(&cur)))
            .collect();
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// Inclusion-maximal nonempty outlived sets, in descending size order.
pub fn maximal_outlived_sets(
    qs: &QuorumSystem,
    attack: &Attack,
    size_bound: usize,
) -> Result<Vec<ProcessSet>> {
    let w = attack.well_behaved();
    if w.len() > size_bound {
        return Err(Error::TooLarge {
            size: w.len(),
            bound: size_bound,
        });
    }
    let base = largest_available_inside(qs, w);
    let mut candidates: Vec<ProcessSet> = base.subsets().filter(|s| !s.is_empty()).collect();
    candidates.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let mut found: Vec<ProcessSet> = Vec::new();
    for c in candidates {
        if found.iter().any(|f| c.is_subset(f)) {
            continue;
        }
        if check_outlived(qs, attack, c)?.holds {
            found.push(c);
        }
    }
    Ok(found)
}

/// Runs `check` under every attack and ANDs the outcomes. The first
/// failing report is returned.
pub fn for_all_attacks<F>(attacks: &[Attack], mut check: F) -> Result<PropertyReport>
where
    F: FnMut(&Attack) -> Result<PropertyReport>,
{
    let mut last = None;
    for a in attacks {
        let r = check(a)?;
        if !r.holds {
            return Ok(r);
        }
        last = Some(r);
    }
    last.ok_or_else(|| Error::Input("no attacks given".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pset;
    use crate::system::{decls, ReconfigOp};

    fn fig1() -> (QuorumSystem, Attack) {
        let d = decls(&[
            (1, &[&[1, 2, 4]]),
            (2, &[&[1, 2], &[2, 3], &[2, 5]]),
            (3, &[&[2, 3]]),
            (5, &[&[2, 5]]),
        ]);
        let u = pset![1, 2, 3, 4, 5];
        (QuorumSystem::new(u, u, d).unwrap(), Attack::new(u, pset![4]).unwrap())
    }

    #[test]
    fn consistency_examples() {
        let (qs, a) = fig1();
        assert!(check_consistency(&qs, &a, a.well_behaved()).unwrap().holds);
        assert_eq!(
            check_consistency(&qs, &a, pset![4]),
            Err(Error::BadSubset(pset![4]))
        );
        let solo = QuorumSystem::from_decls(decls(&[(1, &[&[1]])])).unwrap();
        let sa = Attack::none(pset![1]);
        assert!(check_consistency(&solo, &sa, pset![1]).unwrap().holds);
    }

    #[test]
    fn availability_examples() {
        let (qs, a) = fig1();
        assert!(check_availability(&qs, pset![2, 3, 5], pset![2, 3, 5]).unwrap().holds);
        let r = check_availability(&qs, pset![1], a.well_behaved()).unwrap();
        assert_eq!(r.witness, Some(Witness::Process { p: ProcessId(1) }));
        assert!(check_availability(&qs, pset![], pset![]).unwrap().holds);
        assert!(check_available_inside(&qs, pset![2, 3, 5]).unwrap().holds);
        assert!(!check_available_inside(&qs, pset![1, 2]).unwrap().holds);
        assert!(check_available_inside(&qs, pset![]).unwrap().holds);
        assert_eq!(
            check_availability(&qs, pset![4], pset![4]),
            Err(Error::UnknownProcess(ProcessId(4)))
        );
    }

    #[test]
    fn active_availability_examples() {
        let (qs, _) = fig1();
        assert!(check_active_availability(&qs, pset![2, 3, 5], pset![5]).holds);
        assert!(check_active_availability(&qs, pset![2, 5], pset![3]).holds);
        assert!(!check_active_availability(&qs, pset![1, 2], pset![]).holds);
    }

    #[test]
    fn inclusion_examples() {
        let (qs, a) = fig1();
        assert!(check_quorum_inclusion(&qs, &a, a.well_behaved()).unwrap().holds);
        assert!(check_quorum_inclusion(&qs, &a, pset![]).unwrap().holds);
        let added = qs
            .apply_reconfig(&ReconfigOp::Add(ProcessId(3), pset![3, 5]))
            .unwrap();
        let r = check_quorum_inclusion(&added, &a, pset![2, 3, 5]).unwrap();
        assert_eq!(
            r.witness,
            Some(Witness::Inclusion {
                owner: ProcessId(3),
                quorum: pset![3, 5],
                member: ProcessId(5)
            })
        );
        let mut t = TentativeMap::new();
        t.entry(ProcessId(5)).or_default().insert((ProcessId(3), pset![3, 5]));
        assert!(check_tentative_inclusion(&added, &a, pset![2, 3, 5], &t).unwrap().holds);
        let mut useless = TentativeMap::new();
        useless.entry(ProcessId(5)).or_default().insert((ProcessId(3), pset![1, 5]));
        assert!(!check_tentative_inclusion(&added, &a, pset![2, 3, 5], &useless).unwrap().holds);
    }

    #[test]
    fn active_inclusion_mid_leave() {
        // 5 is leaving; 1 already dropped it, 2 has not.
        let d = decls(&[(1, &[&[1, 2]]), (2, &[&[1, 2, 5]])]);
        let u = pset![1, 2, 5];
        let qs = QuorumSystem::new(u, pset![1, 2], d).unwrap();
        let a = Attack::none(u);
        assert!(!check_active_inclusion(&qs, &a, u, pset![]).unwrap().holds);
        assert!(check_active_inclusion(&qs, &a, u, pset![5]).unwrap().holds);
        assert!(check_active_inclusion(&qs, &a, u, u).unwrap().holds);
    }

    #[test]
    fn sharing_examples() {
        let dqs = QuorumSystem::from_decls(decls(&[
            (1, &[&[1, 2, 3]]),
            (2, &[&[1, 2, 3]]),
            (3, &[&[1, 2, 3]]),
        ]))
        .unwrap();
        assert!(check_quorum_sharing(&dqs).holds);
        let (qs, _) = fig1();
        let r = check_quorum_sharing(&qs);
        assert!(!r.holds);
        let solo = QuorumSystem::from_decls(decls(&[(1, &[&[1]])])).unwrap();
        assert!(check_quorum_sharing(&solo).holds);
    }

    #[test]
    fn outlived_examples() {
        let (qs, a) = fig1();
        assert!(check_outlived(&qs, &a, pset![2, 3, 5]).unwrap().holds);
        assert!(!check_outlived(&qs, &a, pset![1, 2, 3, 5]).unwrap().holds);
        assert!(check_outlived(&qs, &a, pset![]).unwrap().holds);
        assert_eq!(
            maximal_outlived_sets(&qs, &a, DEFAULT_SIZE_BOUND).unwrap(),
            vec![pset![2, 3, 5]]
        );
        assert!(matches!(
            maximal_outlived_sets(&qs, &a, 2),
            Err(Error::TooLarge { size: 4, bound: 2 })
        ));
    }

    #[test]
    fn no_outlived_set_gives_empty_list() {
        let qs = QuorumSystem::from_decls(decls(&[(1, &[&[1]]), (2, &[&[2]])])).unwrap();
        let a = Attack::none(pset![1, 2]);
        assert!(maximal_outlived_sets(&qs, &a, 12).unwrap().is_empty());
    }

    #[test]
    fn multi_attack_lifting() {
        let (qs, _) = fig1();
        let u = qs.universe();
        let attacks = [Attack::new(u, pset![4]).unwrap(), Attack::new(u, pset![2, 4]).unwrap()];
        let r = for_all_attacks(&attacks, |a| {
            check_consistency(&qs, a, a.well_behaved())
        })
        .unwrap();
        assert!(!r.holds);
    }

    #[test]
    fn report_json_shape() {
        let (qs, a) = fig1();
        let r = check_availability(&qs, pset![1], a.well_behaved()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["property"], "Availability");
        assert_eq!(v["holds"], false);
        assert_eq!(v["witness"]["p"], 1);
    }
}
