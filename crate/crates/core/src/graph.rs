use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ids::{ProcessId, ProcessSet};
use crate::props::{check_consistency, check_quorum_sharing};
use crate::system::{Attack, QuorumSystem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuorumGraph {
    pub vertices: ProcessSet,
    pub edges: BTreeSet<(ProcessId, ProcessId)>,
}

impl QuorumGraph {
    pub fn successors(&self, p: ProcessId) -> ProcessSet {
        self.edges
            .range((p, ProcessId(0))..=(p, ProcessId(u32::MAX)))
            .map(|(_, d)| *d)
            .collect()
    }

    pub fn has_edge(&self, a: ProcessId, b: ProcessId) -> bool {
        self.edges.contains(&(a, b))
    }
}

/// Edge `(p, p′)` iff `p′` is in some quorum of `p`. Every declaration is
/// used, Byzantine ones included.
pub fn build_graph(qs: &QuorumSystem) -> QuorumGraph {
    let mut vertices = qs.universe() | qs.domain();
    let mut edges = BTreeSet::new();
    for (p, quorums) in qs.declarations() {
        for q in quorums {
            vertices = vertices | *q;
            for m in *q {
                edges.insert((*p, m));
            }
        }
    }
    QuorumGraph { vertices, edges }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Condensation {
    /// Ordered by smallest member.
    pub components: Vec<ProcessSet>,
    pub dag_edges: BTreeSet<(usize, usize)>,
}

impl Condensation {
    pub fn component_of(&self, p: ProcessId) -> Option<usize> {
        self.components.iter().position(|c| c.contains(p))
    }
}

/// Tarjan's algorithm, iterative so deep graphs do not overflow the stack.
pub fn strongly_connected_components(g: &QuorumGraph) -> Vec<ProcessSet> {
    let verts = g.vertices.to_vec();
    let succ: BTreeMap<ProcessId, Vec<ProcessId>> =
        verts.iter().map(|v| (*v, g.successors(*v).to_vec())).collect();
    let mut index: BTreeMap<ProcessId, usize> = BTreeMap::new();
    let mut low: BTreeMap<ProcessId, usize> = BTreeMap::new();
    let mut on_stack = ProcessSet::new();
    let mut stack: Vec<ProcessId> = Vec::new();
    let mut next = 0usize;
    let mut out = Vec::new();

    for &root in &verts {
        if index.contains_key(&root) {
            continue;
        }
        let mut call: Vec<(ProcessId, usize)> = vec![(root, 0)];
        index.insert(root, next);
        low.insert(root, next);
        next += 1;
        stack.push(root);
        on_stack.insert(root);
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            let ws = &succ[&v];
            if *i < ws.len() {
                let w = ws[*i];
                *i += 1;
                if let std::collections::btree_map::Entry::Vacant(e) = index.entry(w) {
                    e.insert(next);
                    low.insert(w, next);
                    next += 1;
                    stack.push(w);
                    on_stack.insert(w);
                    call.push((w, 0));
                } else if on_stack.contains(w) {
                    let lw = index[&w].min(low[&v]);
                    low.insert(v, lw);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                let lp = low[&parent].min(low[&v]);
                low.insert(parent, lp);
            }
            if low[&v] == index[&v] {
                let mut comp = ProcessSet::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack.remove(w);
                    comp.insert(w);
                    if w == v {
                        break;
                    }
                }
                out.push(comp);
            }
        }
    }
    out.sort_by_key(|c| c.first());
    out
}

pub fn condense(g: &QuorumGraph) -> Condensation {
    let components = strongly_connected_components(g);
    let mut of = BTreeMap::new();
    for (i, c) in components.iter().enumerate() {
        for p in *c {
            of.insert(p, i);
        }
    }
    let dag_edges = g
        .edges
        .iter()
        .map(|(a, b)| (of[a], of[b]))
        .filter(|(a, b)| a != b)
        .collect();
    Condensation {
        components,
        dag_edges,
    }
}

pub fn sink_components(c: &Condensation) -> Vec<ProcessSet> {
    c.components
        .iter()
        .enumerate()
        .filter(|(i, _)| !c.dag_edges.iter().any(|(a, _)| a == i))
        .map(|(_, s)| *s)
        .collect()
}

fn sinks_of(qs: &QuorumSystem) -> Vec<ProcessSet> {
    sink_components(&condense(&build_graph(qs)))
}

pub fn in_sink(qs: &QuorumSystem, p: ProcessId) -> Result<bool> {
    let g = build_graph(qs);
    if !g.vertices.contains(p) {
        return Err(Error::UnknownProcess(p));
    }
    Ok(sink_components(&condense(&g)).iter().any(|s| s.contains(p)))
}

/// Union of all sink components, Byzantine members included.
pub fn sink_members(qs: &QuorumSystem) -> ProcessSet {
    sinks_of(qs).into_iter().fold(ProcessSet::new(), |a, s| a | s)
}

pub fn well_behaved_sink_members(qs: &QuorumSystem, attack: &Attack) -> ProcessSet {
    sink_members(qs) & attack.well_behaved()
}

fn verify_precondition(qs: &QuorumSystem, attack: &Attack) -> Result<()> {
    let c = check_consistency(qs, attack, attack.well_behaved())?;
    if !c.holds {
        return Err(Error::PreconditionNotVerified(format!("consistency at W: {c}")));
    }
    let s = check_quorum_sharing(qs);
    if !s.holds {
        return Err(Error::PreconditionNotVerified(format!("quorum sharing: {s}")));
    }
    Ok(())
}

/// True iff every well-behaved member of `q` declares exactly `q`.
pub fn is_min_quorum_by_agreement(qs: &QuorumSystem, attack: &Attack, q: ProcessSet) -> Result<bool> {
    verify_precondition(qs, attack)?;
    Ok((q & attack.well_behaved())
        .iter()
        .all(|p| qs.quorums(p).any(|d| *d == q)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Lemma {
    MinQuorumClique,
    EdgesToMinQuorum,
    StronglyConnected,
    UniqueSink,
    MinQuorumsInSink,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaViolation {
    pub lemma: Lemma,
    pub detail: String,
}

/// Checks the graph lemmas on `qs`. Requires consistency at 𝓦 and quorum
/// sharing, otherwise `PreconditionNotVerified`.
pub fn check_graph_lemmas(qs: &QuorumSystem, attack: &Attack) -> Result<Vec<LemmaViolation>> {
    verify_precondition(qs, attack)?;
    let w = attack.well_behaved();
    let g = build_graph(qs);
    let mq = qs.minimal_quorums(attack);
    let mut out = Vec::new();
    let mut bad = |lemma, detail: String| out.push(LemmaViolation { lemma, detail });

    for m in &mq {
        let wm = *m & w;
        for a in wm {
            for b in wm {
                if !g.has_edge(a, b) {
                    bad(Lemma::MinQuorumClique, format!("missing edge {a}->{b} in {m}"));
                }
            }
        }
    }

    for p in qs.domain() & w {
        let succ = g.successors(p);
        if !mq.iter().any(|m| m.is_subset(&succ)) {
            bad(Lemma::EdgesToMinQuorum, format!("{p} reaches no whole minimal quorum"));
        }
    }

    let core = mq.iter().fold(ProcessSet::new(), |a, m| a | *m) & w;
    let induced = QuorumGraph {
        vertices: core,
        edges: g
            .edges
            .iter()
            .filter(|(a, b)| core.contains(*a) && core.contains(*b))
            .copied()
            .collect(),
    };
    let comps = strongly_connected_components(&induced);
    if comps.len() > 1 {
        bad(Lemma::StronglyConnected, format!("components {comps:?}"));
    }

    let sinks = sink_components(&condense(&g));
    if sinks.len() != 1 {
        bad(Lemma::UniqueSink, format!("sinks {sinks:?}"));
    }
    let all_sinks = sinks.iter().fold(ProcessSet::new(), |a, s| a | *s);
    if !core.is_subset(&all_sinks) {
        bad(Lemma::MinQuorumsInSink, format!("{} outside sink {all_sinks}", core - all_sinks));
    }
    Ok(out)
}

/// DOT rendering: Byzantine vertices dashed, sink vertices filled.
pub fn to_dot(qs: &QuorumSystem, attack: &Attack, label: impl Fn(ProcessId) -> String) -> String {
    let g = build_graph(qs);
    let c = condense(&g);
    let sinks = sink_components(&c);
    let sink_all = sinks.iter().fold(ProcessSet::new(), |a, s| a | *s);
    let mut s = String::new();
    for (i, sink) in sinks.iter().enumerate() {
        let names: Vec<String> = sink.iter().map(&label).collect();
        let _ = writeln!(s, "// sink {i}: {{{}}}", names.join(","));
    }
    s.push_str("digraph quorums {\n");
    for v in g.vertices {
        let mut style = Vec::new();
        if attack.is_byzantine(v) {
            style.push("dashed");
        }
        if sink_all.contains(v) {
            style.push("filled");
        }
        let _ = write!(s, "  \"{}\"", label(v));
        if !style.is_empty() {
            let _ = write!(s, " [style=\"{}\"", style.join(","));
            if sink_all.contains(v) {
                s.push_str(", fillcolor=\"palegreen\"");
            }
            s.push(']');
        }
        s.push_str(";\n");
    }
    for (a, b) in &g.edges {
        let _ = writeln!(s, "  \"{}\" -> \"{}\";", label(*a), label(*b));
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pset;
    use crate::system::decls;

    fn fig2() -> (QuorumSystem, Attack) {
        let d = decls(&[
            (1, &[&[1, 2], &[1, 3, 5]]),
            (2, &[&[1, 2]]),
            (3, &[&[1, 3, 5]]),
            (4, &[&[1, 2, 4]]),
            (5, &[&[1, 3, 5]]),
            (6, &[&[1, 2, 6]]),
        ]);
        let u = pset![1, 2, 3, 4, 5, 6];
        (QuorumSystem::new(u, u, d).unwrap(), Attack::new(u, pset![5]).unwrap())
    }

    #[test]
    fn fig2_edges_and_sink() {
        let (qs, a) = fig2();
        let g = build_graph(&qs);
        for (x, y) in [(4, 1), (4, 2), (6, 1), (6, 2), (1, 2), (2, 1), (1, 3), (3, 5), (5, 1)] {
            assert!(g.has_edge(ProcessId(x), ProcessId(y)), "{x}->{y}");
        }
        let c = condense(&g);
        assert_eq!(c.components, vec![pset![1, 2, 3, 5], pset![4], pset![6]]);
        assert_eq!(c.dag_edges, [(1, 0), (2, 0)].into_iter().collect());
        assert_eq!(sink_components(&c), vec![pset![1, 2, 3, 5]]);
        assert!(in_sink(&qs, ProcessId(3)).unwrap());
        assert!(!in_sink(&qs, ProcessId(4)).unwrap());
        assert_eq!(well_behaved_sink_members(&qs, &a), pset![1, 2, 3]);
        assert_eq!(in_sink(&qs, ProcessId(9)), Err(Error::UnknownProcess(ProcessId(9))));
    }

    #[test]
    fn trivial_graphs() {
        let solo = QuorumSystem::from_decls(decls(&[(1, &[&[1]])])).unwrap();
        let g = build_graph(&solo);
        assert!(g.has_edge(ProcessId(1), ProcessId(1)));
        assert_eq!(sink_components(&condense(&g)), vec![pset![1]]);
        assert!(in_sink(&solo, ProcessId(1)).unwrap());

        let chain = QuorumSystem::from_decls(decls(&[(1, &[&[2]]), (2, &[&[3]]), (3, &[&[3]])])).unwrap();
        let c = condense(&build_graph(&chain));
        assert_eq!(c.components.len(), 3);

        let two = QuorumSystem::from_decls(decls(&[(1, &[&[1, 2]]), (2, &[&[1, 2]]), (3, &[&[3, 4]]), (4, &[&[3, 4]])]))
            .unwrap();
        assert_eq!(sink_components(&condense(&build_graph(&two))).len(), 2);
    }

    #[test]
    fn fig1_byzantine_vertex_has_no_out_edges() {
        let d = decls(&[
            (1, &[&[1, 2, 4]]),
            (2, &[&[1, 2], &[2, 3], &[2, 5]]),
            (3, &[&[2, 3]]),
            (5, &[&[2, 5]]),
        ]);
        let u = pset![1, 2, 3, 4, 5];
        let qs = QuorumSystem::new(u, u, d).unwrap();
        let g = build_graph(&qs);
        assert!(g.has_edge(ProcessId(1), ProcessId(4)));
        assert!(g.successors(ProcessId(4)).is_empty());
    }

    #[test]
    fn min_quorum_agreement() {
        let (qs, a) = fig2();
        assert!(is_min_quorum_by_agreement(&qs, &a, pset![1, 2]).unwrap());
        assert!(!is_min_quorum_by_agreement(&qs, &a, pset![1, 2, 4]).unwrap());
        assert!(check_graph_lemmas(&qs, &a).unwrap().is_empty());
        let solo = QuorumSystem::from_decls(decls(&[(1, &[&[1]]), (2, &[&[2]])])).unwrap();
        let sa = Attack::none(solo.universe());
        assert!(matches!(
            is_min_quorum_by_agreement(&solo, &sa, pset![1]),
            Err(Error::PreconditionNotVerified(_))
        ));
    }

    #[test]
    fn agreement_on_sharing_system() {
        let d = decls(&[(1, &[&[1, 2]]), (2, &[&[1, 2]]), (3, &[&[1, 2, 3]])]);
        let qs = QuorumSystem::from_decls(d).unwrap();
        let a = Attack::none(qs.universe());
        assert!(is_min_quorum_by_agreement(&qs, &a, pset![1, 2]).unwrap());
        assert!(!is_min_quorum_by_agreement(&qs, &a, pset![1, 2, 3]).unwrap());
        assert!(check_graph_lemmas(&qs, &a).unwrap().is_empty());
    }

    #[test]
    fn dot_marks_byzantine_and_sink() {
        let (qs, a) = fig2();
        let dot = to_dot(&qs, &a, |p| p.to_string());
        assert!(dot.contains("\"5\" [style=\"dashed,filled\""));
        assert!(dot.contains("\"4\";"));
        assert!(dot.starts_with("// sink 0: {1,2,3,5}"));
        assert_eq!(dot, to_dot(&qs, &a, |p| p.to_string()));
    }
}
