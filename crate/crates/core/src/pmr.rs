//! Graph databases and path multiset representations.
//!
//! A path `u0, …, un` is read as the word `γ(u0)…γ(un)` of graph nodes, so
//! a path with `n` edges is a word of length `n + 1`. Bounds are given in
//! edges.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::automata::{glushkov, rightlinear_from_acyclic_nfa, AutomataError, Nfa};
use crate::grammar::Regex;
use crate::limits::{Limits, ResourceLimit};
use crate::name::{fresh_name, Name};
use crate::ufr::Ufr;
use crate::value::{Value, Word};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PmrError {
    #[error("edge {0} -> {1} has its image {2} -> {3} missing from the graph")]
    NotHomomorphism(Name, Name, Value, Value),
    #[error("unknown reference {0}")]
    DanglingReference(String),
    #[error("edge {0} -> {1} already has label {2}")]
    ConflictingLabel(Value, Value, Value),
    #[error("the path set is infinite; give a bound")]
    BoundRequired,
    #[error("the path set is infinite")]
    InfinitePathSet,
    #[error("label {0} does not occur in the graph")]
    UnknownLabel(Value),
    #[error("node {0} does not occur in the graph")]
    UnknownNode(Value),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Limit(#[from] ResourceLimit),
}

/// Nodes and labeled edges; at most one label per ordered node pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphDb {
    nodes: BTreeSet<Value>,
    labels: BTreeMap<(Value, Value), Value>,
}

impl GraphDb {
    pub fn new() -> Self {
        GraphDb::default()
    }

    pub fn add_node(&mut self, v: Value) {
        self.nodes.insert(v);
    }

    pub fn add_edge(&mut self, src: Value, label: Value, dst: Value) -> Result<(), PmrError> {
        self.nodes.insert(src);
        self.nodes.insert(dst);
        match self.labels.get(&(src, dst)) {
            Some(&l) if l != label => Err(PmrError::ConflictingLabel(src, dst, l)),
            _ => {
                self.labels.insert((src, dst), label);
                Ok(())
            }
        }
    }

    pub fn nodes(&self) -> &BTreeSet<Value> {
        &self.nodes
    }

    /// `(src, label, dst)` triples.
    pub fn edges(&self) -> impl Iterator<Item = (Value, Value, Value)> + '_ {
        self.labels.iter().map(|(&(s, d), &l)| (s, l, d))
    }

    pub fn label(&self, src: Value, dst: Value) -> Option<Value> {
        self.labels.get(&(src, dst)).copied()
    }

    pub fn has_edge(&self, src: Value, dst: Value) -> bool {
        self.labels.contains_key(&(src, dst))
    }

    pub fn labels(&self) -> BTreeSet<Value> {
        self.labels.values().copied().collect()
    }

    /// Whether consecutive nodes of `path` are joined by edges.
    pub fn is_path(&self, path: &[Value]) -> bool {
        path.iter().all(|v| self.nodes.contains(v))
            && path.windows(2).all(|w| self.has_edge(w[0], w[1]))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawPmr {
    pub nodes: Vec<Name>,
    pub edges: Vec<(Name, Name)>,
    pub gamma: BTreeMap<Name, Value>,
    pub starts: Vec<Name>,
    pub targets: Vec<Name>,
}

/// A graph with a homomorphism into a graph database and start and target
/// node sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pmr {
    graph: GraphDb,
    names: Vec<Name>,
    gamma: Vec<Value>,
    succ: Vec<BTreeSet<usize>>,
    starts: BTreeSet<usize>,
    targets: BTreeSet<usize>,
}

impl Pmr {
    pub fn validate(raw: RawPmr, graph: &GraphDb) -> Result<Pmr, PmrError> {
        let mut index: BTreeMap<Name, usize> = BTreeMap::new();
        let mut names = Vec::new();
        for n in raw.nodes {
            if !index.contains_key(&n) {
                index.insert(n.clone(), names.len());
                names.push(n);
            }
        }
        let find = |n: &Name| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| PmrError::DanglingReference(String::from(n.as_str())))
        };
        let mut gamma = Vec::with_capacity(names.len());
        for n in &names {
            let g = *raw
                .gamma
                .get(n)
                .ok_or_else(|| PmrError::DanglingReference(alloc::format!("γ({n})")))?;
            if !graph.nodes.contains(&g) {
                return Err(PmrError::DanglingReference(String::from(g.text())));
            }
            gamma.push(g);
        }
        if let Some(n) = raw.gamma.keys().find(|n| !index.contains_key(*n)) {
            return Err(PmrError::DanglingReference(String::from(n.as_str())));
        }
        let mut succ = vec![BTreeSet::new(); names.len()];
        for (u, v) in &raw.edges {
            let (i, j) = (find(u)?, find(v)?);
            if !graph.has_edge(gamma[i], gamma[j]) {
                return Err(PmrError::NotHomomorphism(
                    u.clone(),
                    v.clone(),
                    gamma[i],
                    gamma[j],
                ));
            }
            succ[i].insert(j);
        }
        let starts = raw.starts.iter().map(find).collect::<Result<_, _>>()?;
        let targets = raw.targets.iter().map(find).collect::<Result<_, _>>()?;
        Ok(Pmr {
            graph: graph.clone(),
            names,
            gamma,
            succ,
            starts,
            targets,
        })
    }

    pub fn graph(&self) -> &GraphDb {
        &self.graph
    }

    pub fn num_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, u: usize) -> &Name {
        &self.names[u]
    }

    pub fn gamma(&self, u: usize) -> Value {
        self.gamma[u]
    }

    pub fn successors(&self, u: usize) -> &BTreeSet<usize> {
        &self.succ[u]
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(BTreeSet::len).sum()
    }

    pub fn starts(&self) -> &BTreeSet<usize> {
        &self.starts
    }

    pub fn targets(&self) -> &BTreeSet<usize> {
        &self.targets
    }

    /// Nodes on some start-to-target path.
    fn useful(&self) -> Vec<bool> {
        let n = self.num_nodes();
        let mut fwd = vec![false; n];
        let mut stack: Vec<usize> = self.starts.iter().copied().collect();
        for &s in &stack {
            fwd[s] = true;
        }
        while let Some(u) = stack.pop() {
            for &v in &self.succ[u] {
                if !fwd[v] {
                    fwd[v] = true;
                    stack.push(v);
                }
            }
        }
        let mut pred = vec![Vec::new(); n];
        for u in 0..n {
            for &v in &self.succ[u] {
                pred[v].push(u);
            }
        }
        let mut bwd = vec![false; n];
        let mut stack: Vec<usize> = self.targets.iter().copied().collect();
        for &t in &stack {
            bwd[t] = true;
        }
        while let Some(v) = stack.pop() {
            for &u in &pred[v] {
                if !bwd[u] {
                    bwd[u] = true;
                    stack.push(u);
                }
            }
        }
        (0..n).map(|u| fwd[u] && bwd[u]).collect()
    }

    /// Whether finitely many paths lead from a start to a target: no cycle
    /// of the PMR lies on such a path.
    pub fn is_finite(&self) -> bool {
        let useful = self.useful();
        let n = self.num_nodes();
        // 0 unvisited, 1 on stack, 2 done
        let mut state = vec![0u8; n];
        for root in (0..n).filter(|&u| useful[u]) {
            if state[root] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, Vec<usize>)> = Vec::new();
            state[root] = 1;
            let next: Vec<usize> = self.succ[root].iter().copied().filter(|&v| useful[v]).collect();
            stack.push((root, next));
            while let Some((u, rest)) = stack.last_mut() {
                match rest.pop() {
                    Some(v) => match state[v] {
                        1 => return false,
                        0 => {
                            state[v] = 1;
                            let next = self.succ[v].iter().copied().filter(|&w| useful[w]).collect();
                            stack.push((v, next));
                        }
                        _ => {}
                    },
                    None => {
                        state[*u] = 2;
                        stack.pop();
                    }
                }
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathMode {
    Set,
    Multiset,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSet {
    pub finite: bool,
    /// Path images with their multiplicities; all one in set mode.
    pub paths: BTreeMap<Word, BigUint>,
    pub bound_used: Option<usize>,
}

impl PathSet {
    pub fn words(&self) -> BTreeSet<Word> {
        self.paths.keys().cloned().collect()
    }
}

/// `SPaths` or `MPaths`, truncated to paths of at most `bound` edges when a
/// bound is given.
pub fn paths_of(
    r: &Pmr,
    mode: PathMode,
    bound: Option<usize>,
    limits: &Limits,
) -> Result<PathSet, PmrError> {
    let finite = r.is_finite();
    if !finite && bound.is_none() {
        return Err(PmrError::BoundRequired);
    }
    let useful = r.useful();
    let mut paths: BTreeMap<Word, BigUint> = BTreeMap::new();
    // paths grouped by image and end node
    let mut layer: BTreeMap<(Word, usize), BigUint> = BTreeMap::new();
    for &s in r.starts.iter().filter(|&&s| useful[s]) {
        layer.insert((vec![r.gamma[s]], s), BigUint::one());
    }
    let mut edges = 0usize;
    while !layer.is_empty() {
        for ((w, u), c) in &layer {
            if r.targets.contains(u) {
                *paths.entry(w.clone()).or_default() += c;
            }
        }
        limits.check_tuples(paths.len())?;
        if bound.is_some_and(|b| edges >= b) {
            break;
        }
        let mut next: BTreeMap<(Word, usize), BigUint> = BTreeMap::new();
        for ((w, u), c) in &layer {
            for &v in r.succ[*u].iter().filter(|&&v| useful[v]) {
                let mut w2 = w.clone();
                w2.push(r.gamma[v]);
                *next.entry((w2, v)).or_default() += c;
            }
        }
        limits.check_tuples(next.len())?;
        layer = next;
        edges += 1;
    }
    if mode == PathMode::Set {
        for c in paths.values_mut() {
            *c = BigUint::one();
        }
    }
    Ok(PathSet {
        finite,
        paths,
        bound_used: bound,
    })
}

/// The automaton whose words are the path images: states are the PMR nodes
/// plus a fresh initial state `s` that reads the first node.
pub fn pmr_to_nfa(r: &Pmr) -> Nfa {
    let mut a = Nfa::new();
    for v in r.graph.nodes() {
        a.add_symbol(*v);
    }
    for n in &r.names {
        a.add_state(n.clone());
    }
    let s = a.add_state(fresh_name("s", |x| r.names.iter().any(|n| n.as_str() == x)));
    a.set_initial(s);
    for u in 0..r.num_nodes() {
        for &v in &r.succ[u] {
            a.add_transition(u, r.gamma[v], v);
        }
    }
    for &u in &r.starts {
        a.add_transition(s, r.gamma[u], u);
    }
    for &t in &r.targets {
        a.set_accepting(t);
    }
    a
}

/// The PMR of the graph paths whose label sequence matches `e`: the useful
/// part of the product of the graph with the Glushkov automaton of `e`.
/// Missing endpoint sets mean all nodes.
pub fn rpq_to_pmr(
    g: &GraphDb,
    e: &Regex,
    sources: Option<&BTreeSet<Value>>,
    targets: Option<&BTreeSet<Value>>,
) -> Result<Pmr, PmrError> {
    let labels = g.labels();
    let mut unknown = None;
    e.for_each_terminal(&mut |l| {
        if unknown.is_none() && !labels.contains(&l) {
            unknown = Some(l);
        }
    });
    if let Some(l) = unknown {
        return Err(PmrError::UnknownLabel(l));
    }
    for set in [sources, targets].into_iter().flatten() {
        if let Some(v) = set.iter().find(|v| !g.nodes.contains(v)) {
            return Err(PmrError::UnknownNode(*v));
        }
    }
    let a = glushkov(e)?;
    let node_name = |u: Value, q: usize| Name::new(alloc::format!("{}.{}", u, a.name(q)));
    let mut raw = RawPmr::default();
    let mut seen: BTreeSet<(Value, usize)> = BTreeSet::new();
    let mut stack = Vec::new();
    for &u in g.nodes() {
        if sources.is_none_or(|s| s.contains(&u)) {
            for &q in a.initial() {
                if seen.insert((u, q)) {
                    stack.push((u, q));
                }
                raw.starts.push(node_name(u, q));
            }
        }
    }
    let mut edges = Vec::new();
    while let Some((u, q)) = stack.pop() {
        for (&(s, d), &l) in g.labels.range((u, Value::MIN)..) {
            if s != u {
                break;
            }
            for &(_, q2) in a.out(q).range((l, 0)..=(l, usize::MAX)) {
                edges.push(((u, q), (d, q2)));
                if seen.insert((d, q2)) {
                    stack.push((d, q2));
                }
            }
        }
    }
    for &(u, q) in &seen {
        if a.accepting().contains(&q) && targets.is_none_or(|t| t.contains(&u)) {
            raw.targets.push(node_name(u, q));
        }
        raw.nodes.push(node_name(u, q));
        raw.gamma.insert(node_name(u, q), u);
    }
    raw.edges = edges
        .into_iter()
        .map(|((u, q), (v, p))| (node_name(u, q), node_name(v, p)))
        .collect();
    let full = Pmr::validate(raw, g)?;
    Ok(restrict_to_useful(&full))
}

fn restrict_to_useful(r: &Pmr) -> Pmr {
    let useful = r.useful();
    let keep: Vec<usize> = (0..r.num_nodes()).filter(|&u| useful[u]).collect();
    let renum: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    Pmr {
        graph: r.graph.clone(),
        names: keep.iter().map(|&u| r.names[u].clone()).collect(),
        gamma: keep.iter().map(|&u| r.gamma[u]).collect(),
        succ: keep
            .iter()
            .map(|&u| r.succ[u].iter().filter_map(|v| renum.get(v).copied()).collect())
            .collect(),
        starts: r.starts.iter().filter_map(|u| renum.get(u).copied()).collect(),
        targets: r.targets.iter().filter_map(|u| renum.get(u).copied()).collect(),
    }
}

/// The variable-length relation of a PMR with finitely many paths.
pub fn pmr_to_vlfr(r: &Pmr) -> Result<Ufr, PmrError> {
    if !r.is_finite() {
        return Err(PmrError::InfinitePathSet);
    }
    Ok(rightlinear_from_acyclic_nfa(&pmr_to_nfa(r).trim())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{count_words, tzeng_multiset_equivalence};
    use crate::samples::{figure5_graph, figure5_pmr};
    use crate::ufr::evaluate;
    use crate::value::{tuples_of, Tuple};

    fn w(s: &str) -> Word {
        s.chars().map(|c| Value::new(&c.to_string())).collect()
    }
    use alloc::string::ToString;

    fn lim() -> Limits {
        Limits::default()
    }

    /// Brute-force enumeration of PMR node paths, independent of the
    /// layered computation.
    fn brute(r: &Pmr, max_edges: usize) -> BTreeMap<Word, BigUint> {
        let mut out: BTreeMap<Word, BigUint> = BTreeMap::new();
        fn go(r: &Pmr, path: &mut Vec<usize>, max: usize, out: &mut BTreeMap<Word, BigUint>) {
            let u = *path.last().unwrap();
            if r.targets.contains(&u) {
                let img = path.iter().map(|&x| r.gamma[x]).collect();
                *out.entry(img).or_default() += 1u32;
            }
            if path.len() > max {
                return;
            }
            for &v in &r.succ[u] {
                path.push(v);
                go(r, path, max, out);
                path.pop();
            }
        }
        for &s in &r.starts {
            go(r, &mut vec![s], max_edges, &mut out);
        }
        out
    }

    #[test]
    fn figure5_multiplicities() {
        let r = figure5_pmr();
        assert!(!r.is_finite());
        let ps = paths_of(&r, PathMode::Multiset, Some(2), &lim()).unwrap();
        assert_eq!(ps.paths.get(&w("ABD")), Some(&BigUint::from(2u32)));
        assert_eq!(ps.paths.len(), 1);
        assert!(!ps.finite);
        assert_eq!(paths_of(&r, PathMode::Set, None, &lim()), Err(PmrError::BoundRequired));
        let ps = paths_of(&r, PathMode::Multiset, Some(13), &lim()).unwrap();
        assert_eq!(ps.paths, brute(&r, 13));
        // every lap of the cycle returns to A1, which again branches to D
        // through B1 and through B3
        for (p, c) in &ps.paths {
            assert!(r.graph().is_path(p));
            assert_eq!(*c, BigUint::from(2u32), "{p:?}");
            assert_eq!(p.len() % 6, 3);
        }
        assert_eq!(ps.paths.len(), 2);
    }

    #[test]
    fn figure5_nfa() {
        let r = figure5_pmr();
        let a = pmr_to_nfa(&r);
        assert_eq!(a.num_states(), 9);
        assert_eq!(a.initial().len(), 1);
        let acc: Vec<&str> = a.accepting().iter().map(|&q| a.name(q).as_str()).collect();
        assert_eq!(acc, ["D"]);
        let ps = paths_of(&r, PathMode::Multiset, Some(13), &lim()).unwrap();
        for (p, c) in &ps.paths {
            assert_eq!(&a.runs(p), c);
        }
        for len in 1..=14 {
            let expected: BigUint = ps.paths.iter().filter(|(p, _)| p.len() == len).map(|(_, c)| c).sum();
            assert_eq!(count_words(&a, len), expected);
        }
    }

    #[test]
    fn homomorphism_checked() {
        let g = figure5_graph();
        let raw = RawPmr {
            nodes: vec!["A1".into(), "C1".into()],
            edges: vec![("A1".into(), "C1".into())],
            gamma: [("A1".into(), Value::new("A")), ("C1".into(), Value::new("C"))].into(),
            starts: vec!["A1".into()],
            targets: vec!["C1".into()],
        };
        assert!(matches!(Pmr::validate(raw, &g), Err(PmrError::NotHomomorphism(..))));
        let empty = Pmr::validate(RawPmr::default(), &g).unwrap();
        assert!(paths_of(&empty, PathMode::Set, None, &lim()).unwrap().paths.is_empty());
        let raw = RawPmr {
            nodes: vec!["u".into()],
            gamma: [("u".into(), Value::new("A"))].into(),
            starts: vec!["u".into()],
            targets: vec!["u".into()],
            ..RawPmr::default()
        };
        let single = Pmr::validate(raw, &g).unwrap();
        assert_eq!(paths_of(&single, PathMode::Set, None, &lim()).unwrap().words(), [w("A")].into());
        let a = pmr_to_nfa(&single);
        assert_eq!(a.num_states(), 2);
        assert!(a.accepts(&w("A")));
    }

    #[test]
    fn rpq_two_steps() {
        let g = figure5_graph();
        let aa = Regex::concat(vec![Regex::t("a"), Regex::t("a")]);
        let src = [Value::new("A")].into();
        let dst = [Value::new("D")].into();
        let r = rpq_to_pmr(&g, &aa, Some(&src), Some(&dst)).unwrap();
        let ps = paths_of(&r, PathMode::Set, None, &lim()).unwrap();
        assert_eq!(ps.words(), [w("ABD")].into());
        let f = pmr_to_vlfr(&r).unwrap();
        let rel = evaluate(&f, None, &lim()).unwrap();
        assert!(rel.same_tuples(&tuples_of(&[w("ABD")])));
        assert!(rel.contains(&Tuple::from_texts(&["A", "B", "D"])));

        let none = rpq_to_pmr(&g, &Regex::EmptySet, None, None).unwrap();
        assert_eq!(none.num_nodes(), 0);
        assert!(matches!(
            rpq_to_pmr(&g, &Regex::t("z"), None, None),
            Err(PmrError::UnknownLabel(_))
        ));
        assert!(matches!(
            rpq_to_pmr(&g, &aa, Some(&[Value::new("Q")].into()), None),
            Err(PmrError::UnknownNode(_))
        ));
    }

    #[test]
    fn rpq_even_paths() {
        let g = figure5_graph();
        let a = Regex::t("a");
        let aa = Regex::concat(vec![a.clone(), a]);
        let plus = Regex::concat(vec![aa.clone(), Regex::star(aa)]);
        let src = [Value::new("A")].into();
        let dst = [Value::new("D")].into();
        let r = rpq_to_pmr(&g, &plus, Some(&src), Some(&dst)).unwrap();
        let got = paths_of(&r, PathMode::Set, Some(14), &lim()).unwrap().words();
        // all graph paths from A to D with an even, positive number of edges
        let mut expected = BTreeSet::new();
        let mut layer = vec![w("A")];
        for edges in 1..=14 {
            let mut next = Vec::new();
            for p in &layer {
                let last = *p.last().unwrap();
                for (s, _, d) in g.edges() {
                    if s == last {
                        let mut q = p.clone();
                        q.push(d);
                        next.push(q);
                    }
                }
            }
            for p in &next {
                if edges % 2 == 0 && *p.last().unwrap() == Value::new("D") {
                    expected.insert(p.clone());
                }
            }
            layer = next;
        }
        assert_eq!(got, expected);
    }

    #[test]
    fn vlfr_of_single_path() {
        let g = figure5_graph();
        let raw = RawPmr {
            nodes: vec!["a".into(), "b".into(), "d".into()],
            edges: vec![("a".into(), "b".into()), ("b".into(), "d".into())],
            gamma: [
                ("a".into(), Value::new("A")),
                ("b".into(), Value::new("B")),
                ("d".into(), Value::new("D")),
            ]
            .into(),
            starts: vec!["a".into()],
            targets: vec!["d".into()],
        };
        let r = Pmr::validate(raw, &g).unwrap();
        let f = pmr_to_vlfr(&r).unwrap();
        // the fresh start followed by the three chained nodes
        let names: Vec<&str> = f.defs().iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, ["s", "a", "b", "d"]);
        assert_eq!(evaluate(&f, None, &lim()).unwrap().len(), 1);
        assert_eq!(pmr_to_vlfr(&figure5_pmr()), Err(PmrError::InfinitePathSet));
    }

    #[test]
    fn multiset_equivalence_of_pmrs() {
        let r = figure5_pmr();
        let a = pmr_to_nfa(&r);
        assert!(tzeng_multiset_equivalence(&a, &a.clone()));
        let g = figure5_graph();
        let single = |n: usize| {
            let mut raw = RawPmr::default();
            for i in 0..n {
                let (x, y) = (Name::new(alloc::format!("a{i}")), Name::new(alloc::format!("b{i}")));
                raw.nodes.extend([x.clone(), y.clone()]);
                raw.gamma.insert(x.clone(), Value::new("A"));
                raw.gamma.insert(y.clone(), Value::new("B"));
                raw.edges.push((x.clone(), y.clone()));
                raw.starts.push(x);
                raw.targets.push(y);
            }
            Pmr::validate(raw, &g).unwrap()
        };
        let (one, two) = (pmr_to_nfa(&single(1)), pmr_to_nfa(&single(2)));
        assert!(!tzeng_multiset_equivalence(&one, &two));
        assert!(tzeng_multiset_equivalence(&two, &pmr_to_nfa(&single(2))));
        assert_eq!(
            paths_of(&single(1), PathMode::Set, None, &lim()).unwrap().words(),
            paths_of(&single(2), PathMode::Set, None, &lim()).unwrap().words()
        );
    }
}
