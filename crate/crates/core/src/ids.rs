use std::cmp::Ordering;
use std::fmt;
use std::ops::{BitAnd, BitOr, Sub};

use serde::de::{SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest number of distinct process ids a [`ProcessSet`] can hold.
pub const MAX_PROCESSES: u32 = 128;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProcessId(pub u32);

impl ProcessId {
    pub fn new(raw: u32) -> Self {
        ProcessId(raw)
    }

    pub fn raw(self) -> u32 {
        self.0
    }
}

impl fmt::Debug for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for ProcessId {
    fn from(v: u32) -> Self {
        ProcessId(v)
    }
}

/// Finite set of process ids backed by a 128-bit mask.
///
/// Ordering is lexicographic over the ascending member sequence, so
/// `{1,2} < {1,2,4} < {2,3}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ProcessSet(u128);

impl ProcessSet {
    pub const EMPTY: ProcessSet = ProcessSet(0);

    pub fn new() -> Self {
        ProcessSet(0)
    }

    pub fn singleton(p: ProcessId) -> Self {
        let mut s = ProcessSet(0);
        s.insert(p);
        s
    }

    /// Convenience constructor from raw ids.
    pub fn of(ids: &[u32]) -> Self {
        ids.iter().map(|&i| ProcessId(i)).collect()
    }

    /// Panics if `p` is not below [`MAX_PROCESSES`].
    pub fn insert(&mut self, p: ProcessId) -> bool {
        assert!(p.0 < MAX_PROCESSES, "process id {} out of range", p.0);
        let had = self.contains(p);
        self.0 |= 1u128 << p.0;
        !had
    }

    pub fn remove(&mut self, p: ProcessId) -> bool {
        if p.0 >= MAX_PROCESSES {
            return false;
        }
        let had = self.contains(p);
        self.0 &= !(1u128 << p.0);
        had
    }

    pub fn contains(&self, p: ProcessId) -> bool {
        p.0 < MAX_PROCESSES && self.0 & (1u128 << p.0) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn union(&self, o: &ProcessSet) -> ProcessSet {
        ProcessSet(self.0 | o.0)
    }

    pub fn intersection(&self, o: &ProcessSet) -> ProcessSet {
        ProcessSet(self.0 & o.0)
    }

    pub fn difference(&self, o: &ProcessSet) -> ProcessSet {
        ProcessSet(self.0 & !o.0)
    }

    pub fn intersects(&self, o: &ProcessSet) -> bool {
        self.0 & o.0 != 0
    }

    pub fn is_subset(&self, o: &ProcessSet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_strict_subset(&self, o: &ProcessSet) -> bool {
        self.is_subset(o) && self.0 != o.0
    }

    pub fn without(&self, p: ProcessId) -> ProcessSet {
        let mut s = *self;
        s.remove(p);
        s
    }

    pub fn with(&self, p: ProcessId) -> ProcessSet {
        let mut s = *self;
        s.insert(p);
        s
    }

    pub fn first(&self) -> Option<ProcessId> {
        if self.0 == 0 {
            None
        } else {
            Some(ProcessId(self.0.trailing_zeros()))
        }
    }

    pub fn iter(&self) -> Iter {
        Iter(self.0)
    }

    pub fn to_vec(&self) -> Vec<ProcessId> {
        self.iter().collect()
    }

    /// All subsets of `self`, including the empty set and `self`.
    pub fn subsets(&self) -> impl Iterator<Item = ProcessSet> {
        let members = self.to_vec();
        let n = members.len();
        assert!(n < 32, "subset enumeration over {n} elements");
        (0u64..(1u64 << n)).map(move |mask| {
            let mut s = ProcessSet::new();
            for (i, p) in members.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    s.insert(*p);
                }
            }
            s
        })
    }

    pub fn bits(&self) -> u128 {
        self.0
    }
}

pub struct Iter(u128);

impl Iterator for Iter {
    type Item = ProcessId;

    fn next(&mut self) -> Option<ProcessId> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(ProcessId(tz))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

impl IntoIterator for ProcessSet {
    type Item = ProcessId;
    type IntoIter = Iter;
    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl IntoIterator for &ProcessSet {
    type Item = ProcessId;
    type IntoIter = Iter;
    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl FromIterator<ProcessId> for ProcessSet {
    fn from_iter<I: IntoIterator<Item = ProcessId>>(iter: I) -> Self {
        let mut s = ProcessSet::new();
        for p in iter {
            s.insert(p);
        }
        s
    }
}

impl Extend<ProcessId> for ProcessSet {
    fn extend<I: IntoIterator<Item = ProcessId>>(&mut self, iter: I) {
        for p in iter {
            self.insert(p);
        }
    }
}

impl Ord for ProcessSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for ProcessSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl BitOr for ProcessSet {
    type Output = ProcessSet;
    fn bitor(self, o: ProcessSet) -> ProcessSet {
        self.union(&o)
    }
}

impl BitAnd for ProcessSet {
    type Output = ProcessSet;
    fn bitand(self, o: ProcessSet) -> ProcessSet {
        self.intersection(&o)
    }
}

impl Sub for ProcessSet {
    type Output = ProcessSet;
    fn sub(self, o: ProcessSet) -> ProcessSet {
        self.difference(&o)
    }
}

impl fmt::Debug for ProcessSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ProcessSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for ProcessSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ProcessSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = ProcessSet;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "an array of process ids below {MAX_PROCESSES}")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<ProcessSet, A::Error> {
                let mut s = ProcessSet::new();
                while let Some(id) = seq.next_element::<u32>()? {
                    if id >= MAX_PROCESSES {
                        return Err(serde::de::Error::custom(format!(
                            "process id {id} out of range"
                        )));
                    }
                    s.insert(ProcessId(id));
                }
                Ok(s)
            }
        }
        d.deserialize_seq(V)
    }
}

/// Shorthand for building a [`ProcessSet`] from integer literals.
#[macro_export]
macro_rules! pset {
    () => { $crate::ProcessSet::new() };
    ($($x:expr),+ $(,)?) => { $crate::ProcessSet::of(&[$($x),+]) };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_lexicographic() {
        let mut v = vec![pset![2, 3], pset![1, 2, 4], pset![1, 2], pset![2, 5]];
        v.sort();
        assert_eq!(v, vec![pset![1, 2], pset![1, 2, 4], pset![2, 3], pset![2, 5]]);
    }

    #[test]
    fn set_ops() {
        let a = pset![1, 2, 3];
        let b = pset![3, 4];
        assert_eq!(a & b, pset![3]);
        assert_eq!(a | b, pset![1, 2, 3, 4]);
        assert_eq!(a - b, pset![1, 2]);
        assert!(pset![1, 2].is_strict_subset(&a));
        assert!(!a.is_strict_subset(&a));
        assert_eq!(a.subsets().count(), 8);
        assert_eq!(format!("{a}"), "{1,2,3}");
    }

    #[test]
    fn serde_roundtrip() {
        let a = pset![0, 5, 127];
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[0,5,127]");
        let b: ProcessSet = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        assert!(serde_json::from_str::<ProcessSet>("[128]").is_err());
    }
}
