//! Finite automata without ε-transitions, and their correspondence with
//! right-linear factorized relations.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::grammar::{Regex, Symbol};
use crate::limits::{Limits, ResourceLimit};
use crate::name::{fresh_name, Name};
use crate::ufr::{Definition, DisciplineMode, Expr, RawUfr, Ufr, UfrError};
use crate::value::{Value, Word};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AutomataError {
    #[error("definition of {0} is not right-linear")]
    NotRightLinear(Name),
    #[error("automaton has a cycle on an accepting path")]
    Cyclic,
    #[error("automaton is ambiguous")]
    Ambiguous,
    #[error("regular expression mentions nonterminal {0}")]
    Nonterminal(Name),
    #[error(transparent)]
    Ufr(#[from] UfrError),
    #[error(transparent)]
    Limit(#[from] ResourceLimit),
}

/// A nondeterministic automaton. States are indices; names are kept for
/// display and for the conversion to factorized relations.
#[derive(Clone, PartialEq, Eq)]
pub struct Nfa {
    names: Vec<Name>,
    alphabet: BTreeSet<Value>,
    delta: Vec<BTreeSet<(Value, usize)>>,
    initial: BTreeSet<usize>,
    accepting: BTreeSet<usize>,
}

impl fmt::Debug for Nfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |s: &BTreeSet<usize>| -> Vec<&str> { s.iter().map(|&q| self.names[q].as_str()).collect() };
        writeln!(f, "initial {:?} accept {:?}", names(&self.initial), names(&self.accepting))?;
        for (p, a, q) in self.transitions() {
            writeln!(f, "{} -{}-> {}", self.names[p], a, self.names[q])?;
        }
        Ok(())
    }
}

impl Default for Nfa {
    fn default() -> Self {
        Nfa::new()
    }
}

impl Nfa {
    pub fn new() -> Self {
        Nfa {
            names: Vec::new(),
            alphabet: BTreeSet::new(),
            delta: Vec::new(),
            initial: BTreeSet::new(),
            accepting: BTreeSet::new(),
        }
    }

    pub fn add_state(&mut self, name: impl Into<Name>) -> usize {
        self.names.push(name.into());
        self.delta.push(BTreeSet::new());
        self.names.len() - 1
    }

    /// Adds a state named `q<index>`.
    pub fn fresh_state(&mut self) -> usize {
        let name = Name::new(format!("q{}", self.names.len()));
        self.add_state(name)
    }

    pub fn add_symbol(&mut self, a: Value) {
        self.alphabet.insert(a);
    }

    pub fn add_transition(&mut self, p: usize, a: Value, q: usize) {
        self.alphabet.insert(a);
        self.delta[p].insert((a, q));
    }

    pub fn set_initial(&mut self, q: usize) {
        self.initial.insert(q);
    }

    pub fn set_accepting(&mut self, q: usize) {
        self.accepting.insert(q);
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, q: usize) -> &Name {
        &self.names[q]
    }

    pub fn state_named(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n.as_str() == name)
    }

    pub fn alphabet(&self) -> &BTreeSet<Value> {
        &self.alphabet
    }

    pub fn initial(&self) -> &BTreeSet<usize> {
        &self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<usize> {
        &self.accepting
    }

    pub fn out(&self, p: usize) -> &BTreeSet<(Value, usize)> {
        &self.delta[p]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, Value, usize)> + '_ {
        self.delta
            .iter()
            .enumerate()
            .flat_map(|(p, ts)| ts.iter().map(move |&(a, q)| (p, a, q)))
    }

    pub fn num_transitions(&self) -> usize {
        self.delta.iter().map(BTreeSet::len).sum()
    }

    pub fn is_deterministic(&self) -> bool {
        self.initial.len() <= 1
            && self.delta.iter().all(|ts| {
                let mut seen = BTreeSet::new();
                ts.iter().all(|(a, _)| seen.insert(*a))
            })
    }

    fn step(&self, from: &BTreeSet<usize>, a: Value) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &p in from {
            for &(b, q) in self.delta[p].range((a, 0)..=(a, usize::MAX)) {
                debug_assert_eq!(a, b);
                out.insert(q);
            }
        }
        out
    }

    pub fn accepts(&self, w: &[Value]) -> bool {
        let mut cur = self.initial.clone();
        for &a in w {
            cur = self.step(&cur, a);
            if cur.is_empty() {
                return false;
            }
        }
        cur.iter().any(|q| self.accepting.contains(q))
    }

    /// Number of accepting runs on `w`.
    pub fn runs(&self, w: &[Value]) -> BigUint {
        let mut cur: BTreeMap<usize, BigUint> =
            self.initial.iter().map(|&q| (q, BigUint::one())).collect();
        for &a in w {
            let mut next: BTreeMap<usize, BigUint> = BTreeMap::new();
            for (p, c) in &cur {
                for &(_, q) in self.delta[*p].range((a, 0)..=(a, usize::MAX)) {
                    *next.entry(q).or_insert_with(BigUint::zero) += c;
                }
            }
            cur = next;
        }
        cur.into_iter()
            .filter(|(q, _)| self.accepting.contains(q))
            .map(|(_, c)| c)
            .sum()
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<usize> = self.initial.iter().copied().collect();
        for &q in &stack {
            seen[q] = true;
        }
        while let Some(p) = stack.pop() {
            for &(_, q) in &self.delta[p] {
                if !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
        seen
    }

    fn coreachable(&self) -> Vec<bool> {
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); self.num_states()];
        for (p, _, q) in self.transitions() {
            pred[q].push(p);
        }
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<usize> = self.accepting.iter().copied().collect();
        for &q in &stack {
            seen[q] = true;
        }
        while let Some(q) = stack.pop() {
            for &p in &pred[q] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Keeps the states lying on some accepting run, in their original order.
    pub fn trim(&self) -> Nfa {
        let r = self.reachable();
        let c = self.coreachable();
        let keep: Vec<usize> = (0..self.num_states()).filter(|&q| r[q] && c[q]).collect();
        self.restrict(&keep)
    }

    fn restrict(&self, keep: &[usize]) -> Nfa {
        let renum: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let mut out = Nfa::new();
        out.alphabet = self.alphabet.clone();
        for &q in keep {
            out.add_state(self.names[q].clone());
        }
        for &q in keep {
            for &(a, r) in &self.delta[q] {
                if let Some(&r2) = renum.get(&r) {
                    out.add_transition(renum[&q], a, r2);
                }
            }
        }
        out.initial = self.initial.iter().filter_map(|q| renum.get(q).copied()).collect();
        out.accepting = self.accepting.iter().filter_map(|q| renum.get(q).copied()).collect();
        out
    }

    /// Topological order of all states, or `None` if there is a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.num_states();
        let mut indegree = vec![0usize; n];
        for (_, _, q) in self.transitions() {
            indegree[q] += 1;
        }
        let mut heap: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&q| indegree[q] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(p)) = heap.pop() {
            order.push(p);
            // several transitions p → q with different letters each count
            for &(_, q) in &self.delta[p] {
                indegree[q] -= 1;
                if indegree[q] == 0 {
                    heap.push(Reverse(q));
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Whether the accepted language is finite.
    pub fn is_acyclic(&self) -> bool {
        self.trim().topological_order().is_some()
    }

    /// Product automaton accepting `L(self) ∩ L(other)`, restricted to
    /// reachable pairs. Accepting runs of the product are pairs of runs.
    pub fn product(&self, other: &Nfa) -> Nfa {
        let mut out = Nfa::new();
        out.alphabet = self.alphabet.intersection(&other.alphabet).copied().collect();
        let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut queue = VecDeque::new();
        let mut intern = |p: usize, q: usize, out: &mut Nfa, queue: &mut VecDeque<(usize, usize)>| {
            *ids.entry((p, q)).or_insert_with(|| {
                queue.push_back((p, q));
                out.add_state(Name::new(format!("({},{})", self.names[p], other.names[q])))
            })
        };
        for &p in &self.initial {
            for &q in &other.initial {
                let s = intern(p, q, &mut out, &mut queue);
                out.set_initial(s);
            }
        }
        while let Some((p, q)) = queue.pop_front() {
            let s = intern(p, q, &mut out, &mut queue);
            if self.accepting.contains(&p) && other.accepting.contains(&q) {
                out.set_accepting(s);
            }
            for &(a, p2) in &self.delta[p] {
                for &(_, q2) in other.delta[q].range((a, 0)..=(a, usize::MAX)) {
                    let t = intern(p2, q2, &mut out, &mut queue);
                    out.add_transition(s, a, t);
                }
            }
        }
        out
    }
}

/// A deterministic automaton with a total transition function over its
/// alphabet.
#[derive(Clone, PartialEq, Eq)]
pub struct Dfa {
    names: Vec<Name>,
    alphabet: Vec<Value>,
    delta: Vec<Vec<usize>>,
    initial: usize,
    accepting: Vec<bool>,
}

impl fmt::Debug for Dfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "initial {}", self.names[self.initial])?;
        for (p, row) in self.delta.iter().enumerate() {
            for (k, &q) in row.iter().enumerate() {
                writeln!(f, "{} -{}-> {}", self.names[p], self.alphabet[k], self.names[q])?;
            }
        }
        Ok(())
    }
}

impl Dfa {
    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn alphabet(&self) -> &[Value] {
        &self.alphabet
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn next(&self, q: usize, a: Value) -> Option<usize> {
        let k = self.alphabet.binary_search(&a).ok()?;
        Some(self.delta[q][k])
    }

    pub fn accepts(&self, w: &[Value]) -> bool {
        let mut q = self.initial;
        for &a in w {
            match self.next(q, a) {
                Some(r) => q = r,
                None => return false,
            }
        }
        self.accepting[q]
    }

    fn live(&self) -> Vec<bool> {
        let mut live = self.accepting.clone();
        loop {
            let mut changed = false;
            for p in 0..self.num_states() {
                if !live[p] && self.delta[p].iter().any(|&q| live[q]) {
                    live[p] = true;
                    changed = true;
                }
            }
            if !changed {
                return live;
            }
        }
    }

    /// States from which some word is accepted.
    pub fn num_live_states(&self) -> usize {
        self.live().into_iter().filter(|&l| l).count()
    }

    pub fn to_nfa(&self) -> Nfa {
        let mut out = Nfa::new();
        for n in &self.names {
            out.add_state(n.clone());
        }
        for &a in &self.alphabet {
            out.add_symbol(a);
        }
        for (p, row) in self.delta.iter().enumerate() {
            for (k, &q) in row.iter().enumerate() {
                out.add_transition(p, self.alphabet[k], q);
            }
            if self.accepting[p] {
                out.set_accepting(p);
            }
        }
        out.set_initial(self.initial);
        out
    }
}

/// Glushkov automaton: one state per terminal occurrence plus an initial
/// state, no ε-transitions.
pub fn glushkov(e: &Regex) -> Result<Nfa, AutomataError> {
    struct Info {
        nullable: bool,
        first: BTreeSet<usize>,
        last: BTreeSet<usize>,
    }
    fn go(
        e: &Regex,
        pos: &mut Vec<Value>,
        follow: &mut Vec<BTreeSet<usize>>,
    ) -> Result<Info, AutomataError> {
        Ok(match e {
            Regex::EmptySet => Info {
                nullable: false,
                first: BTreeSet::new(),
                last: BTreeSet::new(),
            },
            Regex::Epsilon => Info {
                nullable: true,
                first: BTreeSet::new(),
                last: BTreeSet::new(),
            },
            Regex::Sym(Symbol::T(v)) => {
                pos.push(*v);
                follow.push(BTreeSet::new());
                let p = pos.len() - 1;
                Info {
                    nullable: false,
                    first: BTreeSet::from([p]),
                    last: BTreeSet::from([p]),
                }
            }
            Regex::Sym(Symbol::N(n)) => return Err(AutomataError::Nonterminal(n.clone())),
            Regex::Union(cs) => {
                let mut acc = Info {
                    nullable: false,
                    first: BTreeSet::new(),
                    last: BTreeSet::new(),
                };
                for c in cs {
                    let i = go(c, pos, follow)?;
                    acc.nullable |= i.nullable;
                    acc.first.extend(i.first);
                    acc.last.extend(i.last);
                }
                acc
            }
            Regex::Concat(cs) => {
                let mut acc = Info {
                    nullable: true,
                    first: BTreeSet::new(),
                    last: BTreeSet::new(),
                };
                for c in cs {
                    let i = go(c, pos, follow)?;
                    for &p in &acc.last {
                        follow[p].extend(i.first.iter().copied());
                    }
                    if acc.nullable {
                        acc.first.extend(i.first.iter().copied());
                    }
                    if i.nullable {
                        acc.last.extend(i.last);
                    } else {
                        acc.last = i.last;
                    }
                    acc.nullable &= i.nullable;
                }
                acc
            }
            Regex::Star(c) => {
                let i = go(c, pos, follow)?;
                for &p in &i.last {
                    follow[p].extend(i.first.iter().copied());
                }
                Info {
                    nullable: true,
                    first: i.first,
                    last: i.last,
                }
            }
        })
    }
    let mut pos = Vec::new();
    let mut follow = Vec::new();
    let info = go(e, &mut pos, &mut follow)?;
    let mut a = Nfa::new();
    let q0 = a.add_state("q0");
    for (i, &v) in pos.iter().enumerate() {
        a.add_state(Name::new(format!("p{}", i + 1)));
        a.add_symbol(v);
    }
    a.set_initial(q0);
    if info.nullable {
        a.set_accepting(q0);
    }
    for &p in &info.first {
        a.add_transition(q0, pos[p], p + 1);
    }
    for (p, fs) in follow.iter().enumerate() {
        for &q in fs {
            a.add_transition(p + 1, pos[q], q + 1);
        }
    }
    for &p in &info.last {
        a.set_accepting(p + 1);
    }
    Ok(a)
}

/// Determinizes over reachable subsets. The empty subset becomes the sink
/// when some transition is missing.
pub fn subset_construction(a: &Nfa, limits: &Limits) -> Result<Dfa, ResourceLimit> {
    let alphabet: Vec<Value> = a.alphabet.iter().copied().collect();
    let mut ids: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
    let mut subsets: Vec<BTreeSet<usize>> = Vec::new();
    let mut delta: Vec<Vec<usize>> = Vec::new();
    ids.insert(a.initial.clone(), 0);
    subsets.push(a.initial.clone());
    let mut i = 0;
    while i < subsets.len() {
        let mut row = Vec::with_capacity(alphabet.len());
        for &c in &alphabet {
            let next = a.step(&subsets[i], c);
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = subsets.len();
                    limits.check_states(id + 1)?;
                    ids.insert(next.clone(), id);
                    subsets.push(next);
                    id
                }
            };
            row.push(id);
        }
        delta.push(row);
        i += 1;
    }
    let names = subsets
        .iter()
        .map(|s| {
            if s.is_empty() {
                return Name::from("sink");
            }
            let parts: Vec<&str> = s.iter().map(|&q| a.names[q].as_str()).collect();
            Name::new(format!("{{{}}}", parts.join(",")))
        })
        .collect();
    let accepting = subsets
        .iter()
        .map(|s| s.iter().any(|q| a.accepting.contains(q)))
        .collect();
    Ok(Dfa {
        names,
        alphabet,
        delta,
        initial: 0,
        accepting,
    })
}

/// Minimal equivalent DFA, by Hopcroft's partition refinement on the
/// reachable part. States are numbered in breadth-first order.
pub fn minimize_dfa(d: &Dfa) -> Dfa {
    let k = d.alphabet.len();
    // reachable states
    let mut reach = vec![false; d.num_states()];
    let mut order = vec![d.initial];
    reach[d.initial] = true;
    let mut i = 0;
    while i < order.len() {
        for &q in &d.delta[order[i]] {
            if !reach[q] {
                reach[q] = true;
                order.push(q);
            }
        }
        i += 1;
    }
    let states = order;
    let local: BTreeMap<usize, usize> = states.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let n = states.len();
    let delta: Vec<Vec<usize>> = states
        .iter()
        .map(|&q| d.delta[q].iter().map(|r| local[r]).collect())
        .collect();
    let accepting: Vec<bool> = states.iter().map(|&q| d.accepting[q]).collect();
    let mut inverse: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; k];
    for (p, row) in delta.iter().enumerate() {
        for (c, &q) in row.iter().enumerate() {
            inverse[c][q].push(p);
        }
    }

    let mut block_of = vec![0usize; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let acc: Vec<usize> = (0..n).filter(|&q| accepting[q]).collect();
    let rej: Vec<usize> = (0..n).filter(|&q| !accepting[q]).collect();
    for b in [acc, rej] {
        if !b.is_empty() {
            for &q in &b {
                block_of[q] = blocks.len();
            }
            blocks.push(b);
        }
    }
    let mut pending: BTreeSet<(usize, usize)> = BTreeSet::new();
    let smallest = (0..blocks.len()).min_by_key(|&b| blocks[b].len()).unwrap_or(0);
    if !blocks.is_empty() {
        for c in 0..k {
            pending.insert((smallest, c));
        }
    }
    while let Some((splitter, c)) = pending.pop_first() {
        let mut hit: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &q in &blocks[splitter] {
            for &p in &inverse[c][q] {
                hit.entry(block_of[p]).or_default().push(p);
            }
        }
        for (b, mut inside) in hit {
            inside.sort_unstable();
            inside.dedup();
            if inside.len() == blocks[b].len() {
                continue;
            }
            let inside_set: BTreeSet<usize> = inside.iter().copied().collect();
            let outside: Vec<usize> = blocks[b].iter().copied().filter(|q| !inside_set.contains(q)).collect();
            let nb = blocks.len();
            let (keep, moved) = if inside.len() <= outside.len() {
                (outside, inside)
            } else {
                (inside, outside)
            };
            for &q in &moved {
                block_of[q] = nb;
            }
            blocks[b] = keep;
            blocks.push(moved);
            for c2 in 0..k {
                if pending.contains(&(b, c2)) {
                    pending.insert((nb, c2));
                } else {
                    let smaller = if blocks[nb].len() <= blocks[b].len() { nb } else { b };
                    pending.insert((smaller, c2));
                }
            }
        }
    }

    // renumber blocks in breadth-first order from the initial block
    let mut id: Vec<Option<usize>> = vec![None; blocks.len()];
    let mut queue = VecDeque::from([block_of[0]]);
    id[block_of[0]] = Some(0);
    let mut rep = vec![blocks[block_of[0]][0]];
    while let Some(b) = queue.pop_front() {
        let q = blocks[b][0];
        for c in 0..k {
            let nb = block_of[delta[q][c]];
            if id[nb].is_none() {
                id[nb] = Some(rep.len());
                rep.push(blocks[nb][0]);
                queue.push_back(nb);
            }
        }
    }
    let m = rep.len();
    Dfa {
        names: (0..m).map(|i| Name::new(format!("m{i}"))).collect(),
        alphabet: d.alphabet.clone(),
        delta: rep
            .iter()
            .map(|&q| (0..k).map(|c| id[block_of[delta[q][c]]].unwrap()).collect())
            .collect(),
        initial: 0,
        accepting: rep.iter().map(|&q| accepting[q]).collect(),
    }
}

/// `L(d1) ⊆ L(d2)`, by a search over reachable state pairs. Letters outside
/// an alphabet lead to rejection.
pub fn dfa_contained(d1: &Dfa, d2: &Dfa) -> bool {
    dfa_pairs(d1, d2, |a, b| !a || b)
}

pub fn dfa_equivalent(d1: &Dfa, d2: &Dfa) -> bool {
    dfa_pairs(d1, d2, |a, b| a == b)
}

fn dfa_pairs(d1: &Dfa, d2: &Dfa, ok: impl Fn(bool, bool) -> bool) -> bool {
    let letters: BTreeSet<Value> = d1.alphabet.iter().chain(&d2.alphabet).copied().collect();
    let mut seen = BTreeSet::from([(Some(d1.initial), Some(d2.initial))]);
    let mut stack = vec![(Some(d1.initial), Some(d2.initial))];
    while let Some((p, q)) = stack.pop() {
        let acc1 = p.is_some_and(|p| d1.accepting[p]);
        let acc2 = q.is_some_and(|q| d2.accepting[q]);
        if !ok(acc1, acc2) {
            return false;
        }
        for &a in &letters {
            let pair = (p.and_then(|p| d1.next(p, a)), q.and_then(|q| d2.next(q, a)));
            if pair != (None, None) && seen.insert(pair) {
                stack.push(pair);
            }
        }
    }
    true
}

/// Every accepted word has exactly one accepting run. Decided on the
/// self-product: two runs on one word must disagree at some reachable,
/// co-reachable pair of distinct states.
pub fn is_unambiguous_nfa(a: &Nfa) -> bool {
    let t = a.trim();
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut pred: Vec<Vec<usize>> = Vec::new();
    for &p in &t.initial {
        for &q in &t.initial {
            ids.insert((p, q), pairs.len());
            pairs.push((p, q));
            pred.push(Vec::new());
        }
    }
    let mut i = 0;
    while i < pairs.len() {
        let (p, q) = pairs[i];
        for &(c, p2) in &t.delta[p] {
            for &(_, q2) in t.delta[q].range((c, 0)..=(c, usize::MAX)) {
                let j = *ids.entry((p2, q2)).or_insert_with(|| {
                    pairs.push((p2, q2));
                    pred.push(Vec::new());
                    pairs.len() - 1
                });
                pred[j].push(i);
            }
        }
        i += 1;
    }
    let mut co = vec![false; pairs.len()];
    let mut stack: Vec<usize> = (0..pairs.len())
        .filter(|&j| t.accepting.contains(&pairs[j].0) && t.accepting.contains(&pairs[j].1))
        .collect();
    for &j in &stack {
        co[j] = true;
    }
    while let Some(j) = stack.pop() {
        for &k in &pred[j] {
            if !co[k] {
                co[k] = true;
                stack.push(k);
            }
        }
    }
    (0..pairs.len()).all(|j| !co[j] || pairs[j].0 == pairs[j].1)
}

/// Sum over words of length `length` of their accepting runs. For DFAs and
/// unambiguous automata this is the number of accepted words.
pub fn count_words(a: &Nfa, length: usize) -> BigUint {
    let mut v: Vec<BigUint> = vec![BigUint::zero(); a.num_states()];
    for &q in &a.initial {
        v[q] = BigUint::one();
    }
    for _ in 0..length {
        let mut next = vec![BigUint::zero(); a.num_states()];
        for (p, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for &(_, q) in &a.delta[p] {
                next[q] += c;
            }
        }
        v = next;
    }
    a.accepting.iter().map(|&q| v[q].clone()).sum()
}

/// Total number of accepting runs of an automaton whose useful part is
/// acyclic.
pub fn total_runs(a: &Nfa) -> Result<BigUint, AutomataError> {
    let t = a.trim();
    let order = t.topological_order().ok_or(AutomataError::Cyclic)?;
    let mut v = vec![BigUint::zero(); t.num_states()];
    for &q in &t.initial {
        v[q] = BigUint::one();
    }
    let mut total = BigUint::zero();
    for p in order {
        let c = v[p].clone();
        if t.accepting.contains(&p) {
            total += &c;
        }
        for &(_, q) in &t.delta[p] {
            v[q] += &c;
        }
    }
    Ok(total)
}

/// Multiset equivalence: every word has as many accepting runs in `a1` as in
/// `a2`. Explores the span of reachable state-weight vectors of the
/// difference automaton, which has dimension at most the number of states.
pub fn tzeng_multiset_equivalence(a1: &Nfa, a2: &Nfa) -> bool {
    let n1 = a1.num_states();
    let dim = n1 + a2.num_states();
    let alphabet: BTreeSet<Value> = a1.alphabet.union(&a2.alphabet).copied().collect();
    let mut eta = vec![BigInt::zero(); dim];
    for &q in &a1.accepting {
        eta[q] = BigInt::one();
    }
    for &q in &a2.accepting {
        eta[n1 + q] = -BigInt::one();
    }
    let step = |v: &[BigInt], a: Value| -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); dim];
        for (p, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (aut, off, local) = if p < n1 { (a1, 0, p) } else { (a2, n1, p - n1) };
            for &(_, q) in aut.delta[local].range((a, 0)..=(a, usize::MAX)) {
                out[off + q] += c;
            }
        }
        out
    };
    let mut u = vec![BigInt::zero(); dim];
    for &q in &a1.initial {
        u[q] = BigInt::one();
    }
    for &q in &a2.initial {
        u[n1 + q] = BigInt::one();
    }
    let mut basis = Basis::default();
    let mut queue = VecDeque::new();
    if let Some(b) = basis.insert(u) {
        queue.push_back(b);
    }
    while let Some(v) = queue.pop_front() {
        let weight: BigInt = v.iter().zip(&eta).map(|(x, y)| x * y).sum();
        if !weight.is_zero() {
            return false;
        }
        for &a in &alphabet {
            if let Some(b) = basis.insert(step(&v, a)) {
                queue.push_back(b);
            }
        }
    }
    true
}

/// Integer row-echelon basis. Vector `j` is zero at the pivots of all
/// earlier vectors.
#[derive(Default)]
struct Basis {
    rows: Vec<(usize, Vec<BigInt>)>,
}

impl Basis {
    /// Adds `v` if it is outside the span and returns the reduced vector.
    fn insert(&mut self, mut v: Vec<BigInt>) -> Option<Vec<BigInt>> {
        for (p, b) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let g = b[*p].gcd(&v[*p]);
            let fb = &b[*p] / &g;
            let fv = &v[*p] / &g;
            for (x, y) in v.iter_mut().zip(b) {
                *x = &*x * &fb - y * &fv;
            }
            normalize(&mut v);
        }
        let pivot = v.iter().position(|x| !x.is_zero())?;
        self.rows.push((pivot, v.clone()));
        Some(v)
    }
}

fn normalize(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x = &*x / &g;
        }
    }
    if v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        for x in v.iter_mut() {
            *x = -&*x;
        }
    }
}

fn check_ufa(a: &Nfa) -> Result<(), AutomataError> {
    if !a.is_acyclic() {
        return Err(AutomataError::Cyclic);
    }
    if !is_unambiguous_nfa(a) {
        return Err(AutomataError::Ambiguous);
    }
    Ok(())
}

/// `L(a1) = L(a2)` for unambiguous automata with finite languages, by
/// comparing `|L1|`, `|L2|` and `|L1 ∩ L2|`.
pub fn ufa_set_equivalence(a1: &Nfa, a2: &Nfa) -> Result<bool, AutomataError> {
    check_ufa(a1)?;
    check_ufa(a2)?;
    let c1 = total_runs(a1)?;
    let c2 = total_runs(a2)?;
    if c1 != c2 {
        return Ok(false);
    }
    Ok(total_runs(&a1.product(a2))? == c1)
}

/// `L(a1) ⊆ L(a2)` for unambiguous automata with finite languages.
pub fn ufa_set_containment(a1: &Nfa, a2: &Nfa) -> Result<bool, AutomataError> {
    check_ufa(a1)?;
    check_ufa(a2)?;
    Ok(total_runs(&a1.product(a2))? == total_runs(a1)?)
}

/// Reads a right-linear relation (bodies built from `⟨⟩` and `⟨b⟩ × C`) as an
/// automaton whose states are the names. Left-linear relations (`C × ⟨b⟩`)
/// are read in the mirrored way.
pub fn nfa_from_rightlinear(f: &Ufr) -> Result<Nfa, AutomataError> {
    let mut alts: Vec<Vec<Alt>> = Vec::with_capacity(f.defs().len());
    let mut right = true;
    let mut left = true;
    for d in f.defs() {
        let mut these = Vec::new();
        let top: Vec<&Expr> = match &d.body {
            Expr::Union(cs) => cs.iter().collect(),
            Expr::Empty => Vec::new(),
            other => vec![other],
        };
        for e in top {
            let alt = match e {
                Expr::Nullary => Alt::Final,
                Expr::Product(cs) if cs.len() == 2 => match (&cs[0], &cs[1]) {
                    (Expr::Singleton(b), Expr::Ref(c)) => {
                        left = false;
                        Alt::Step(*b, f.index_of(c).unwrap())
                    }
                    (Expr::Ref(c), Expr::Singleton(b)) => {
                        right = false;
                        Alt::Step(*b, f.index_of(c).unwrap())
                    }
                    _ => return Err(AutomataError::NotRightLinear(d.name.clone())),
                },
                _ => return Err(AutomataError::NotRightLinear(d.name.clone())),
            };
            these.push(alt);
        }
        if !right && !left {
            return Err(AutomataError::NotRightLinear(d.name.clone()));
        }
        alts.push(these);
    }
    let mut a = Nfa::new();
    for d in f.defs() {
        a.add_state(d.name.clone());
    }
    for v in f.values() {
        a.add_symbol(v);
    }
    for (i, these) in alts.iter().enumerate() {
        for alt in these {
            match (*alt, right) {
                (Alt::Final, true) => a.set_accepting(i),
                (Alt::Final, false) => a.set_initial(i),
                (Alt::Step(b, c), true) => a.add_transition(i, b, c),
                (Alt::Step(b, c), false) => a.add_transition(c, b, i),
            }
        }
    }
    if right {
        a.set_initial(0);
    } else {
        a.set_accepting(0);
    }
    Ok(a)
}

#[derive(Clone, Copy)]
enum Alt {
    Final,
    Step(Value, usize),
}

/// Right-linear relation for an automaton with a finite language. Several
/// initial states are merged into a fresh start name whose body unions
/// their alternatives.
pub fn rightlinear_from_acyclic_nfa(a: &Nfa) -> Result<Ufr, AutomataError> {
    let t = a.trim();
    if t.num_states() == 0 {
        let taken = |s: &str| a.names.iter().any(|n| n.as_str() == s);
        let s = fresh_name("S", taken);
        return Ok(Ufr::validate(
            RawUfr::new().def(s.as_str(), Expr::Empty),
            DisciplineMode::Auto,
        )?);
    }
    let order = t.topological_order().ok_or(AutomataError::Cyclic)?;
    let body = |q: usize| -> Vec<Expr> {
        let mut alts = Vec::new();
        if t.accepting.contains(&q) {
            alts.push(Expr::Nullary);
        }
        for &(b, r) in &t.delta[q] {
            alts.push(Expr::Product(vec![Expr::Singleton(b), Expr::Ref(t.names[r].clone())]));
        }
        alts
    };
    let mut defs = Vec::new();
    if t.initial.len() > 1 {
        let taken = |s: &str| t.names.iter().any(|n| n.as_str() == s);
        let s = fresh_name("S", taken);
        let alts: Vec<Expr> = t.initial.iter().flat_map(|&q| body(q)).collect();
        defs.push(Definition {
            name: s,
            body: Expr::union(alts),
        });
    } else {
        // the single initial state has no incoming transitions in an
        // acyclic trimmed automaton, so it can come first
        let q = *t.initial.first().unwrap();
        defs.push(Definition {
            name: t.names[q].clone(),
            body: Expr::union(body(q)),
        });
    }
    for q in order {
        if t.initial.len() == 1 && t.initial.contains(&q) {
            continue;
        }
        defs.push(Definition {
            name: t.names[q].clone(),
            body: Expr::union(body(q)),
        });
    }
    Ok(Ufr::validate(
        RawUfr { start: None, defs },
        DisciplineMode::Auto,
    )?)
}

#[derive(Clone, Debug)]
pub struct MarkedNfa {
    pub nfa: Nfa,
    /// Whether some state was reachable at several positions and had to be
    /// split by position.
    pub split: bool,
}

/// Replaces each transition `(p, b, q)` read at position `i` by
/// `(p, (b,i), q)`. States reachable at several positions are split first.
pub fn mark_automaton(a: &Nfa) -> Result<MarkedNfa, AutomataError> {
    let t = a.trim();
    let order = t.topological_order().ok_or(AutomataError::Cyclic)?;
    let mut levels: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); t.num_states()];
    for &q in &t.initial {
        levels[q].insert(0);
    }
    for &p in &order {
        let here: Vec<usize> = levels[p].iter().copied().collect();
        for &(_, q) in &t.delta[p] {
            levels[q].extend(here.iter().map(|l| l + 1));
        }
    }
    let split = levels.iter().any(|l| l.len() > 1);
    let mut out = Nfa::new();
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for q in 0..t.num_states() {
        for &l in &levels[q] {
            let name = if split {
                Name::new(format!("{}@{}", t.names[q], l))
            } else {
                t.names[q].clone()
            };
            ids.insert((q, l), out.add_state(name));
        }
    }
    for (&(q, l), &id) in &ids {
        if l == 0 && t.initial.contains(&q) {
            out.set_initial(id);
        }
        if t.accepting.contains(&q) {
            out.set_accepting(id);
        }
        for &(b, r) in &t.delta[q] {
            out.add_transition(id, b.marked(l), ids[&(r, l + 1)]);
        }
    }
    Ok(MarkedNfa { nfa: out, split })
}

/// Projects every marked letter `(b,i)` back to `b`.
pub fn unmark_word(w: &[Value]) -> Word {
    w.iter().map(|v| v.unmarked().map_or(*v, |(b, _)| b)).collect()
}

/// Renders a state set for messages.
pub fn render_states(a: &Nfa, s: &BTreeSet<usize>) -> String {
    let parts: Vec<&str> = s.iter().map(|&q| a.names[q].as_str()).collect();
    parts.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::grammar::{ecfg_to_regex, language_upto, regex_language_upto};
    use crate::ufr::evaluate;
    use crate::value::words_of;

    fn v(s: &str) -> Value {
        Value::new(s)
    }
    fn w(s: &str) -> Word {
        s.chars().map(|c| Value::new(&String::from(c))).collect()
    }
    fn t(s: &str) -> Regex {
        Regex::t(s)
    }
    fn lim() -> Limits {
        Limits::default()
    }
    /// Accepting-run counts of every word up to `max_len` over `sigma`.
    fn run_table(a: &Nfa, sigma: &[Value], max_len: usize) -> BTreeMap<Word, BigUint> {
        let mut out = BTreeMap::new();
        let mut layer: Vec<Word> = vec![Vec::new()];
        for _ in 0..=max_len {
            let mut next = Vec::new();
            for word in layer {
                let r = a.runs(&word);
                if !r.is_zero() {
                    out.insert(word.clone(), r);
                }
                for &c in sigma {
                    let mut x = word.clone();
                    x.push(c);
                    next.push(x);
                }
            }
            layer = next;
        }
        out
    }
    fn chain(word: &str) -> Nfa {
        let mut a = Nfa::new();
        let mut p = a.fresh_state();
        a.set_initial(p);
        for c in word.chars() {
            let q = a.fresh_state();
            a.add_transition(p, v(&String::from(c)), q);
            p = q;
        }
        a.set_accepting(p);
        a
    }

    #[test]
    fn glushkov_small() {
        let e = Regex::Concat(vec![t("a"), Regex::Union(vec![t("b"), t("c")])]);
        let a = glushkov(&e).unwrap();
        assert_eq!(a.num_states(), 4);
        assert_eq!(a.out(0).iter().collect::<Vec<_>>(), [&(v("a"), 1)]);
        assert_eq!(a.out(1).len(), 2);
        assert_eq!(a.accepting(), &BTreeSet::from([2, 3]));

        let empty = glushkov(&Regex::EmptySet).unwrap();
        assert_eq!(empty.num_states(), 1);
        assert_eq!(empty.num_transitions(), 0);
        assert!(empty.accepting().is_empty());
    }

    #[test]
    fn glushkov_star_and_palindromes() {
        let e = Regex::Concat(vec![t("a"), Regex::star(Regex::Concat(vec![t("b"), t("a")]))]);
        let a = glushkov(&e).unwrap();
        assert!(a.accepts(&w("a")) && a.accepts(&w("aba")) && !a.accepts(&w("ab")));
        let e3 = ecfg_to_regex(&families::g3(3)).unwrap();
        let a3 = glushkov(&e3).unwrap();
        let words = language_upto(&families::g3(3), 6, &lim()).unwrap();
        assert_eq!(words.len(), 8);
        for x in ["aaaaaa", "abbbba", "baaaab", "abaaba"] {
            assert_eq!(a3.accepts(&w(x)), words.contains(&w(x)));
        }
        let all = run_table(&a3, &[v("a"), v("b")], 6);
        assert_eq!(all.keys().cloned().collect::<BTreeSet<_>>(), words);
    }

    #[test]
    fn subset_and_minimize() {
        let mut a = Nfa::new();
        let p = a.add_state("p");
        let q = a.add_state("q");
        a.add_transition(p, v("a"), q);
        a.set_initial(p);
        a.set_accepting(q);
        let d = subset_construction(&a, &lim()).unwrap();
        assert_eq!(d.num_states(), 3);

        let ab = glushkov(&Regex::Union(vec![t("a"), t("b")])).unwrap();
        let m = minimize_dfa(&subset_construction(&ab, &lim()).unwrap());
        assert_eq!(m.num_states(), 3);
        assert_eq!(minimize_dfa(&m).num_states(), 3);
        let again = subset_construction(&m.to_nfa(), &lim()).unwrap();
        assert_eq!(again.num_states(), m.num_states());
        assert!(dfa_equivalent(&again, &m));
    }

    #[test]
    fn minimized_palindrome_dfa_is_large() {
        let e = ecfg_to_regex(&families::g3(3)).unwrap();
        let d = minimize_dfa(&subset_construction(&glushkov(&e).unwrap(), &lim()).unwrap());
        assert!(d.num_states() >= 8);
    }

    #[test]
    fn unambiguity() {
        let ab = glushkov(&Regex::Union(vec![t("a"), t("b")])).unwrap();
        let d = subset_construction(&ab, &lim()).unwrap();
        assert!(is_unambiguous_nfa(&d.to_nfa()));
        let mut two = Nfa::new();
        let s = two.add_state("s");
        let x = two.add_state("x");
        let y = two.add_state("y");
        two.add_transition(s, v("a"), x);
        two.add_transition(s, v("a"), y);
        two.set_initial(s);
        two.set_accepting(x);
        two.set_accepting(y);
        assert!(!is_unambiguous_nfa(&two));
        // a dead branch does not make an automaton ambiguous
        let mut dead = two.clone();
        dead.accepting.remove(&y);
        assert!(is_unambiguous_nfa(&dead));
    }

    #[test]
    fn counting() {
        let d = families::l6_dfa(3);
        assert_eq!(count_words(&d.to_nfa(), 3), BigUint::from(8u32));
        let a = chain("ab");
        assert_eq!(count_words(&a, 0), BigUint::zero());
        let eps = chain("");
        assert_eq!(count_words(&eps, 0), BigUint::one());
        let l4 = families::l4_nfa(2);
        let brute = run_table(&l4, &[v("a"), v("b")], 6)
            .keys()
            .filter(|x| x.len() == 6)
            .count();
        let u = subset_construction(&l4, &lim()).unwrap().to_nfa();
        assert_eq!(count_words(&u, 6), BigUint::from(brute));
    }

    #[test]
    fn tzeng_basics() {
        let a = chain("ab");
        assert!(tzeng_multiset_equivalence(&a, &a));
        let mut double = chain("ab");
        let extra = double.fresh_state();
        double.add_transition(0, v("a"), extra);
        double.add_transition(extra, v("b"), 2);
        assert!(!tzeng_multiset_equivalence(&a, &double));
        assert!(ufa_set_equivalence(&a, &a).unwrap());
        assert_eq!(ufa_set_equivalence(&a, &double), Err(AutomataError::Ambiguous));
    }

    #[test]
    fn ufa_equivalence_by_counting() {
        let mut one = Nfa::new();
        let s = one.add_state("s");
        let x = one.add_state("x");
        let y = one.add_state("y");
        let f = one.add_state("f");
        one.add_transition(s, v("a"), x);
        one.add_transition(s, v("b"), y);
        one.add_transition(x, v("b"), f);
        one.add_transition(y, v("a"), f);
        one.set_initial(s);
        one.set_accepting(f);
        let mut other = Nfa::new();
        let p = other.add_state("p");
        let q = other.add_state("q");
        let r = other.add_state("r");
        let z = other.add_state("z");
        other.add_transition(p, v("b"), r);
        other.add_transition(p, v("a"), q);
        other.add_transition(q, v("b"), z);
        other.add_transition(r, v("a"), z);
        other.set_initial(p);
        other.set_accepting(z);
        assert!(ufa_set_equivalence(&one, &other).unwrap());
        let ab = chain("ab");
        assert!(!ufa_set_equivalence(&ab, &one).unwrap());
        assert!(ufa_set_containment(&ab, &one).unwrap());
        assert!(!ufa_set_containment(&one, &ab).unwrap());
    }

    #[test]
    fn rightlinear_round_trip() {
        let f = Ufr::validate(
            RawUfr::new()
                .def("S", Expr::product(vec![Expr::singleton("a"), Expr::reference("T")]))
                .def("T", Expr::Nullary),
            DisciplineMode::Auto,
        )
        .unwrap();
        let a = nfa_from_rightlinear(&f).unwrap();
        assert_eq!(a.num_states(), 2);
        assert_eq!(a.initial(), &BTreeSet::from([0]));
        assert_eq!(a.accepting(), &BTreeSet::from([1]));
        assert_eq!(rightlinear_from_acyclic_nfa(&a).unwrap(), f);
        assert!(matches!(
            nfa_from_rightlinear(&crate::samples::example21()),
            Err(AutomataError::NotRightLinear(_))
        ));
    }

    #[test]
    fn rightlinear_square() {
        // S := a·M ∪ b·M, M := a·E ∪ b·E, E := ⟨⟩
        let step = |x: &str, to: &str| Expr::product(vec![Expr::singleton(x), Expr::reference(to)]);
        let f = Ufr::validate(
            RawUfr::new()
                .def("S", Expr::union(vec![step("a", "M"), step("b", "M")]))
                .def("M", Expr::union(vec![step("a", "E"), step("b", "E")]))
                .def("E", Expr::Nullary),
            DisciplineMode::Auto,
        )
        .unwrap();
        let a = nfa_from_rightlinear(&f).unwrap();
        assert_eq!(a.num_states(), 3);
        let words: BTreeSet<Word> = run_table(&a, &[v("a"), v("b")], 3).into_keys().collect();
        assert_eq!(words, words_of(&evaluate(&f, None, &lim()).unwrap()));
        assert_eq!(words.len(), 4);
    }

    #[test]
    fn left_linear_is_mirrored() {
        let f = Ufr::validate(
            RawUfr::new()
                .def("S", Expr::product(vec![Expr::reference("T"), Expr::singleton("b")]))
                .def("T", Expr::product(vec![Expr::reference("E"), Expr::singleton("a")]))
                .def("E", Expr::Nullary),
            DisciplineMode::Auto,
        )
        .unwrap();
        let a = nfa_from_rightlinear(&f).unwrap();
        assert!(a.accepts(&w("ab")) && !a.accepts(&w("ba")));
    }

    #[test]
    fn two_initials_get_a_fresh_start() {
        let mut a = Nfa::new();
        let p = a.add_state("p");
        let q = a.add_state("q");
        let f = a.add_state("f");
        a.add_transition(p, v("a"), f);
        a.add_transition(q, v("b"), f);
        a.set_initial(p);
        a.set_initial(q);
        a.set_accepting(f);
        let u = rightlinear_from_acyclic_nfa(&a).unwrap();
        assert_eq!(u.start().as_str(), "S");
        let back = nfa_from_rightlinear(&u).unwrap();
        assert!(back.accepts(&w("a")) && back.accepts(&w("b")) && !back.accepts(&w("ab")));
        let mut cyc = a.clone();
        cyc.add_transition(f, v("a"), p);
        assert_eq!(rightlinear_from_acyclic_nfa(&cyc).unwrap_err(), AutomataError::Cyclic);
    }

    #[test]
    fn marking() {
        let a = chain("a");
        let m = mark_automaton(&a).unwrap();
        assert!(!m.split);
        assert!(m.nfa.accepts(&[v("a").marked(0)]));

        let e = Regex::Concat(vec![Regex::Union(vec![t("a"), t("b")]), t("b")]);
        let g = glushkov(&e).unwrap();
        let m = mark_automaton(&g).unwrap();
        assert!(m.nfa.accepts(&[v("a").marked(0), v("b").marked(1)]));
        assert!(m.nfa.accepts(&[v("b").marked(0), v("b").marked(1)]));
        assert!(!m.nfa.accepts(&[v("b").marked(1), v("b").marked(0)]));
        assert_eq!(m.nfa.num_states(), g.num_states());

        let l5 = families::l5_ufa(3);
        let m5 = mark_automaton(&l5).unwrap();
        assert!(!m5.split);
        assert_eq!(m5.nfa.num_states(), l5.trim().num_states());
    }

    #[test]
    fn marking_splits_multi_level_states() {
        // p reaches f directly and through x, so f sits at positions 1 and 2
        let mut a = Nfa::new();
        let p = a.add_state("p");
        let x = a.add_state("x");
        let f = a.add_state("f");
        a.add_transition(p, v("a"), f);
        a.add_transition(p, v("a"), x);
        a.add_transition(x, v("b"), f);
        a.set_initial(p);
        a.set_accepting(f);
        let m = mark_automaton(&a).unwrap();
        assert!(m.split);
        assert_eq!(m.nfa.num_states(), 4);
        assert_eq!(unmark_word(&[v("a").marked(0), v("b").marked(1)]), w("ab"));
    }

    #[test]
    fn regex_oracle_agrees_with_glushkov() {
        let e = Regex::Union(vec![
            Regex::Concat(vec![t("a"), t("b")]),
            Regex::Concat(vec![Regex::Epsilon, t("c")]),
        ]);
        let a = glushkov(&e).unwrap();
        let lang = regex_language_upto(&e, 2, &lim()).unwrap();
        let accepted: BTreeSet<Word> = run_table(&a, &[v("a"), v("b"), v("c")], 2).into_keys().collect();
        assert_eq!(accepted, lang);
    }
}
