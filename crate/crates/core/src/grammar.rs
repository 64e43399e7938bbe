//! Extended context-free grammars for finite languages and their
//! correspondence with factorized relations.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use thiserror::Error;

use crate::limits::{Limits, ResourceLimit};
use crate::name::{fresh_name, Name};
use crate::ufr::{DisciplineMode, Expr, RawUfr, Ufr, UfrError};
use crate::value::{Value, Word};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    T(Value),
    N(Name),
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::T(v) => write!(f, "{v}"),
            Symbol::N(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Regex {
    EmptySet,
    Epsilon,
    Sym(Symbol),
    Concat(Vec<Regex>),
    Union(Vec<Regex>),
    Star(alloc::boxed::Box<Regex>),
}

impl Regex {
    pub fn t(text: &str) -> Regex {
        Regex::Sym(Symbol::T(Value::new(text)))
    }

    pub fn n(name: &str) -> Regex {
        Regex::Sym(Symbol::N(Name::from(name)))
    }

    /// No children give ε and a single child is returned as is.
    pub fn concat(mut children: Vec<Regex>) -> Regex {
        match children.len() {
            0 => Regex::Epsilon,
            1 => children.pop().unwrap(),
            _ => Regex::Concat(children),
        }
    }

    /// No children give ∅ and a single child is returned as is.
    pub fn union(mut children: Vec<Regex>) -> Regex {
        match children.len() {
            0 => Regex::EmptySet,
            1 => children.pop().unwrap(),
            _ => Regex::Union(children),
        }
    }

    pub fn star(child: Regex) -> Regex {
        Regex::Star(alloc::boxed::Box::new(child))
    }

    /// Symbol occurrences (including ε and ∅) plus operator occurrences.
    pub fn size(&self) -> usize {
        match self {
            Regex::EmptySet | Regex::Epsilon | Regex::Sym(_) => 1,
            Regex::Concat(cs) | Regex::Union(cs) => {
                cs.len().saturating_sub(1) + cs.iter().map(Regex::size).sum::<usize>()
            }
            Regex::Star(c) => 1 + c.size(),
        }
    }

    /// Number of terminal occurrences.
    pub fn terminal_occurrences(&self) -> usize {
        match self {
            Regex::Sym(Symbol::T(_)) => 1,
            Regex::Concat(cs) | Regex::Union(cs) => cs.iter().map(Regex::terminal_occurrences).sum(),
            Regex::Star(c) => c.terminal_occurrences(),
            _ => 0,
        }
    }

    pub fn has_star(&self) -> bool {
        match self {
            Regex::Star(_) => true,
            Regex::Concat(cs) | Regex::Union(cs) => cs.iter().any(Regex::has_star),
            _ => false,
        }
    }

    pub fn for_each_nonterminal<'a>(&'a self, f: &mut impl FnMut(&'a Name)) {
        match self {
            Regex::Sym(Symbol::N(n)) => f(n),
            Regex::Concat(cs) | Regex::Union(cs) => {
                cs.iter().for_each(|c| c.for_each_nonterminal(f))
            }
            Regex::Star(c) => c.for_each_nonterminal(f),
            _ => {}
        }
    }

    pub fn for_each_terminal(&self, f: &mut impl FnMut(Value)) {
        match self {
            Regex::Sym(Symbol::T(v)) => f(*v),
            Regex::Concat(cs) | Regex::Union(cs) => cs.iter().for_each(|c| c.for_each_terminal(f)),
            Regex::Star(c) => c.for_each_terminal(f),
            _ => {}
        }
    }

    fn has_empty_in_union(&self) -> bool {
        match self {
            Regex::Union(cs) => cs
                .iter()
                .any(|c| matches!(c, Regex::EmptySet) || c.has_empty_in_union()),
            Regex::Concat(cs) => cs.iter().any(Regex::has_empty_in_union),
            Regex::Star(c) => c.has_empty_in_union(),
            _ => false,
        }
    }

    fn map_nonterminals(&self, f: &impl Fn(&Name) -> Regex) -> Regex {
        match self {
            Regex::Sym(Symbol::N(n)) => f(n),
            Regex::Concat(cs) => Regex::Concat(cs.iter().map(|c| c.map_nonterminals(f)).collect()),
            Regex::Union(cs) => Regex::Union(cs.iter().map(|c| c.map_nonterminals(f)).collect()),
            Regex::Star(c) => Regex::star(c.map_nonterminals(f)),
            other => other.clone(),
        }
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, cs: &[Regex], op: &str) -> fmt::Result {
            f.write_str("(")?;
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    f.write_str(op)?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")
        }
        match self {
            Regex::EmptySet => f.write_str("∅"),
            Regex::Epsilon => f.write_str("ε"),
            Regex::Sym(s) => write!(f, "{s:?}"),
            Regex::Concat(cs) => join(f, cs, "·"),
            Regex::Union(cs) => join(f, cs, " ∪ "),
            Regex::Star(c) => write!(f, "{c}*"),
        }
    }
}

impl fmt::Debug for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("start symbol {0} has no rule")]
    UndefinedStart(Name),
    #[error("nonterminal {0} has no rule")]
    UnknownNonterminal(Name),
    #[error("empty set inside a union in the rule for {0}")]
    EmptyInUnion(Name),
    #[error("grammar is recursive through {0}")]
    Recursive(Name),
    #[error("rule for {0} uses a non-trivial Kleene star")]
    ContainsStar(Name),
    #[error("start symbol {0} occurs on a right-hand side")]
    StartReferenced(Name),
    #[error("grammar is not uniform-length")]
    NotUniformLength,
    #[error(transparent)]
    Ufr(#[from] UfrError),
    #[error(transparent)]
    Limit(#[from] ResourceLimit),
}

/// An extended context-free grammar: one regular expression per nonterminal.
/// Terminals are exactly the values used in rule bodies.
#[derive(Clone, PartialEq, Eq)]
pub struct Ecfg {
    start: Name,
    rules: Vec<(Name, Regex)>,
    index: BTreeMap<Name, usize>,
    terminals: BTreeSet<Value>,
}

impl fmt::Debug for Ecfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, e) in &self.rules {
            writeln!(f, "{n} → {e}")?;
        }
        Ok(())
    }
}

impl Ecfg {
    /// Builds a grammar. Several rules for one nonterminal are merged into a
    /// union, in order of appearance.
    pub fn new(start: Name, rules: Vec<(Name, Regex)>) -> Result<Ecfg, GrammarError> {
        let mut merged: Vec<(Name, Vec<Regex>)> = Vec::new();
        let mut index: BTreeMap<Name, usize> = BTreeMap::new();
        for (n, e) in rules {
            match index.get(&n) {
                Some(&i) => {
                    let alts = &mut merged[i].1;
                    match e {
                        Regex::Union(cs) => alts.extend(cs),
                        e => alts.push(e),
                    }
                }
                None => {
                    index.insert(n.clone(), merged.len());
                    merged.push((n, vec![e]));
                }
            }
        }
        let rules: Vec<(Name, Regex)> = merged
            .into_iter()
            .map(|(n, mut alts)| {
                let e = if alts.len() == 1 {
                    alts.pop().unwrap()
                } else {
                    Regex::Union(alts)
                };
                (n, e)
            })
            .collect();
        if !index.contains_key(&start) {
            return Err(GrammarError::UndefinedStart(start));
        }
        let mut terminals = BTreeSet::new();
        for (n, e) in &rules {
            if e.has_empty_in_union() {
                return Err(GrammarError::EmptyInUnion(n.clone()));
            }
            let mut missing = None;
            e.for_each_nonterminal(&mut |r| {
                if missing.is_none() && !index.contains_key(r) {
                    missing = Some(r.clone());
                }
            });
            if let Some(m) = missing {
                return Err(GrammarError::UnknownNonterminal(m));
            }
            e.for_each_terminal(&mut |v| {
                terminals.insert(v);
            });
        }
        Ok(Ecfg {
            start,
            rules,
            index,
            terminals,
        })
    }

    pub fn start(&self) -> &Name {
        &self.start
    }

    pub fn rules(&self) -> &[(Name, Regex)] {
        &self.rules
    }

    pub fn rule(&self, n: &Name) -> Option<&Regex> {
        self.index.get(n).map(|&i| &self.rules[i].1)
    }

    pub fn index_of(&self, n: &Name) -> Option<usize> {
        self.index.get(n).copied()
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = &Name> {
        self.rules.iter().map(|(n, _)| n)
    }

    pub fn terminals(&self) -> &BTreeSet<Value> {
        &self.terminals
    }

    pub fn size(&self) -> usize {
        self.rules.iter().map(|(_, e)| e.size()).sum()
    }

    fn refs(&self, i: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.rules[i].1.for_each_nonterminal(&mut |r| {
            out.insert(self.index[r]);
        });
        out
    }

    /// A nonterminal lying on a dependency cycle, if any.
    pub fn recursion_witness(&self) -> Option<Name> {
        // iterative three-colour DFS
        let n = self.rules.len();
        let succ: Vec<Vec<usize>> = (0..n).map(|i| self.refs(i).into_iter().collect()).collect();
        let mut colour = vec![0u8; n];
        for root in 0..n {
            if colour[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            colour[root] = 1;
            while let Some(&mut (v, ref mut k)) = stack.last_mut() {
                if *k < succ[v].len() {
                    let w = succ[v][*k];
                    *k += 1;
                    match colour[w] {
                        0 => {
                            colour[w] = 1;
                            stack.push((w, 0));
                        }
                        1 => return Some(self.rules[w].0.clone()),
                        _ => {}
                    }
                } else {
                    colour[v] = 2;
                    stack.pop();
                }
            }
        }
        None
    }

    pub fn is_recursive(&self) -> bool {
        self.recursion_witness().is_some()
    }

    /// Whether each rule denotes a non-empty language.
    pub fn productive(&self) -> Vec<bool> {
        let mut prod = vec![false; self.rules.len()];
        loop {
            let mut changed = false;
            for i in (0..self.rules.len()).rev() {
                if !prod[i] && self.nonempty(&self.rules[i].1, &prod) {
                    prod[i] = true;
                    changed = true;
                }
            }
            if !changed {
                return prod;
            }
        }
    }

    fn nonempty(&self, e: &Regex, prod: &[bool]) -> bool {
        match e {
            Regex::EmptySet => false,
            Regex::Epsilon | Regex::Sym(Symbol::T(_)) | Regex::Star(_) => true,
            Regex::Sym(Symbol::N(n)) => prod[self.index[n]],
            Regex::Concat(cs) => cs.iter().all(|c| self.nonempty(c, prod)),
            Regex::Union(cs) => cs.iter().any(|c| self.nonempty(c, prod)),
        }
    }

    /// Whether each rule can derive a non-empty word.
    fn nonempty_word(&self) -> Vec<bool> {
        let prod = self.productive();
        let mut ne = vec![false; self.rules.len()];
        loop {
            let mut changed = false;
            for i in (0..self.rules.len()).rev() {
                if !ne[i] && self.has_nonempty_word(&self.rules[i].1, &prod, &ne) {
                    ne[i] = true;
                    changed = true;
                }
            }
            if !changed {
                return ne;
            }
        }
    }

    fn has_nonempty_word(&self, e: &Regex, prod: &[bool], ne: &[bool]) -> bool {
        match e {
            Regex::EmptySet | Regex::Epsilon => false,
            Regex::Sym(Symbol::T(_)) => true,
            Regex::Sym(Symbol::N(n)) => ne[self.index[n]],
            Regex::Concat(cs) => {
                cs.iter().all(|c| self.nonempty(c, prod))
                    && cs.iter().any(|c| self.has_nonempty_word(c, prod, ne))
            }
            Regex::Union(cs) => cs.iter().any(|c| self.has_nonempty_word(c, prod, ne)),
            Regex::Star(c) => self.has_nonempty_word(c, prod, ne),
        }
    }

    /// Replaces stars whose operand only derives ε (or nothing) by ε.
    pub fn rewrite_trivial_stars(&self) -> Ecfg {
        let prod = self.productive();
        let ne = self.nonempty_word();
        let rules = self
            .rules
            .iter()
            .map(|(n, e)| (n.clone(), self.drop_trivial_stars(e, &prod, &ne)))
            .collect();
        Ecfg::new(self.start.clone(), rules).expect("rewriting keeps the grammar valid")
    }

    fn drop_trivial_stars(&self, e: &Regex, prod: &[bool], ne: &[bool]) -> Regex {
        match e {
            Regex::Star(c) if !self.has_nonempty_word(c, prod, ne) => Regex::Epsilon,
            Regex::Star(c) => Regex::star(self.drop_trivial_stars(c, prod, ne)),
            Regex::Concat(cs) => Regex::Concat(
                cs.iter().map(|c| self.drop_trivial_stars(c, prod, ne)).collect(),
            ),
            Regex::Union(cs) => Regex::Union(
                cs.iter().map(|c| self.drop_trivial_stars(c, prod, ne)).collect(),
            ),
            other => other.clone(),
        }
    }
}

/// A grammar whose rule bodies are flat unions of symbol sequences. An empty
/// alternative list denotes ∅, an empty sequence ε.
#[derive(Clone, PartialEq, Eq)]
pub struct Cfg {
    pub start: Name,
    pub rules: Vec<(Name, Vec<Vec<Symbol>>)>,
}

impl fmt::Debug for Cfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, alts) in &self.rules {
            write!(f, "{n} →")?;
            if alts.is_empty() {
                f.write_str(" ∅")?;
            }
            for (i, alt) in alts.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ∪")?;
                }
                if alt.is_empty() {
                    f.write_str(" ε")?;
                }
                for s in alt {
                    write!(f, " {s:?}")?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Cfg {
    pub fn to_ecfg(&self) -> Ecfg {
        let rules = self
            .rules
            .iter()
            .map(|(n, alts)| {
                let body = Regex::union(
                    alts.iter()
                        .map(|alt| Regex::concat(alt.iter().cloned().map(Regex::Sym).collect()))
                        .collect(),
                );
                (n.clone(), body)
            })
            .collect();
        Ecfg::new(self.start.clone(), rules).expect("flat grammars are valid")
    }

    pub fn size(&self) -> usize {
        self.to_ecfg().size()
    }
}

/// Grammar in Chomsky normal form over indexed nonterminals. `accepts_empty`
/// records whether ε belongs to the language, which the rules never derive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    pub nonterminals: Vec<Name>,
    pub start: usize,
    pub binary: Vec<(usize, usize, usize)>,
    pub terminal: Vec<(usize, Value)>,
    pub accepts_empty: bool,
}

impl Cnf {
    pub fn to_ecfg(&self) -> Ecfg {
        let mut rules: Vec<(Name, Regex)> = Vec::new();
        let name = |i: usize| Regex::Sym(Symbol::N(self.nonterminals[i].clone()));
        let start = if self.accepts_empty {
            let taken = |s: &str| self.nonterminals.iter().any(|n| n.as_str() == s);
            let s0 = fresh_name("S0", taken);
            rules.push((s0.clone(), Regex::Union(vec![Regex::Epsilon, name(self.start)])));
            s0
        } else {
            self.nonterminals[self.start].clone()
        };
        let mut bodies: Vec<Vec<Regex>> = vec![Vec::new(); self.nonterminals.len()];
        for &(a, b, c) in &self.binary {
            bodies[a].push(Regex::Concat(vec![name(b), name(c)]));
        }
        for &(a, v) in &self.terminal {
            bodies[a].push(Regex::Sym(Symbol::T(v)));
        }
        for (i, alts) in bodies.into_iter().enumerate() {
            rules.push((self.nonterminals[i].clone(), Regex::union(alts)));
        }
        Ecfg::new(start, rules).expect("normal form grammars are valid")
    }

    /// CYK recognition of `w`.
    pub fn accepts(&self, w: &[Value]) -> bool {
        let n = w.len();
        if n == 0 {
            return self.accepts_empty;
        }
        let m = self.nonterminals.len();
        let words = m.div_ceil(64);
        // table[len-1][i] is the set of nonterminals deriving w[i..i+len]
        let mut table: Vec<Vec<Vec<u64>>> = vec![vec![vec![0u64; words]; n]; n];
        for (i, &b) in w.iter().enumerate() {
            for &(a, v) in &self.terminal {
                if v == b {
                    table[0][i][a / 64] |= 1 << (a % 64);
                }
            }
        }
        let has = |cell: &Vec<u64>, x: usize| cell[x / 64] >> (x % 64) & 1 == 1;
        for len in 2..=n {
            for i in 0..=n - len {
                let mut cell = vec![0u64; words];
                for k in 1..len {
                    let left = &table[k - 1][i];
                    let right = &table[len - k - 1][i + k];
                    for &(a, b, c) in &self.binary {
                        if has(left, b) && has(right, c) {
                            cell[a / 64] |= 1 << (a % 64);
                        }
                    }
                }
                table[len - 1][i] = cell;
            }
        }
        has(&table[n - 1][0], self.start)
    }
}

/// `β`: reads a factorized relation as a grammar, symbol for symbol.
pub fn beta(f: &Ufr) -> Ecfg {
    fn h(e: &Expr) -> Regex {
        match e {
            Expr::Empty => Regex::EmptySet,
            Expr::Nullary => Regex::Epsilon,
            Expr::Singleton(v) => Regex::Sym(Symbol::T(*v)),
            Expr::Ref(n) => Regex::Sym(Symbol::N(n.clone())),
            Expr::Union(cs) => Regex::Union(cs.iter().map(h).collect()),
            Expr::Product(cs) => Regex::Concat(cs.iter().map(h).collect()),
        }
    }
    let rules = f.defs().iter().map(|d| (d.name.clone(), h(&d.body))).collect();
    Ecfg::new(f.start().clone(), rules).expect("validated relations map to valid grammars")
}

/// `β⁻¹`: orders nonterminals so that references point forward and reads the
/// rules back as definitions. Stars with a trivial operand become ε.
pub fn beta_inv(g: &Ecfg) -> Result<Ufr, GrammarError> {
    let g = g.rewrite_trivial_stars();
    for (n, e) in g.rules() {
        if e.has_star() {
            return Err(GrammarError::ContainsStar(n.clone()));
        }
    }
    if let Some(n) = g.recursion_witness() {
        return Err(GrammarError::Recursive(n));
    }
    let n = g.rules.len();
    let start = g.index[&g.start];
    let mut indegree = vec![0usize; n];
    let succ: Vec<BTreeSet<usize>> = (0..n).map(|i| g.refs(i)).collect();
    for s in &succ {
        for &j in s {
            indegree[j] += 1;
        }
    }
    if indegree[start] > 0 {
        return Err(GrammarError::StartReferenced(g.start.clone()));
    }
    let mut order = Vec::with_capacity(n);
    let mut heap: BinaryHeap<Reverse<usize>> = (0..n)
        .filter(|&i| i != start && indegree[i] == 0)
        .map(Reverse)
        .collect();
    let mut next = Some(start);
    while let Some(i) = next.take().or_else(|| heap.pop().map(|r| r.0)) {
        order.push(i);
        for &j in &succ[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                heap.push(Reverse(j));
            }
        }
    }
    debug_assert_eq!(order.len(), n);
    fn h_inv(e: &Regex) -> Expr {
        match e {
            Regex::EmptySet => Expr::Empty,
            Regex::Epsilon => Expr::Nullary,
            Regex::Sym(Symbol::T(v)) => Expr::Singleton(*v),
            Regex::Sym(Symbol::N(n)) => Expr::Ref(n.clone()),
            Regex::Concat(cs) => Expr::product(cs.iter().map(h_inv).collect()),
            Regex::Union(cs) => Expr::union(cs.iter().map(h_inv).collect()),
            Regex::Star(_) => unreachable!("stars are rejected above"),
        }
    }
    let mut raw = RawUfr::new();
    for i in order {
        raw.defs.push(crate::ufr::Definition {
            name: g.rules[i].0.clone(),
            body: h_inv(&g.rules[i].1),
        });
    }
    Ok(Ufr::validate(raw, DisciplineMode::Auto)?)
}

/// Finds the name bijection `h` under which `g` is the homomorphic image of
/// `f`, if there is one.
pub fn check_isomorphism(f: &Ufr, g: &Ecfg) -> Option<BTreeMap<Name, Name>> {
    if f.defs().len() != g.rules.len() || f.size() != g.size() {
        return None;
    }
    let mut m = Matching::default();
    if !m.bind(f.start(), g.start()) || !m.propagate(f, g) {
        return None;
    }
    m.complete(f, g)
}

#[derive(Clone, Default)]
struct Matching {
    fwd: BTreeMap<Name, Name>,
    rev: BTreeMap<Name, Name>,
    pending: Vec<Name>,
}

impl Matching {
    fn bind(&mut self, a: &Name, b: &Name) -> bool {
        match (self.fwd.get(a), self.rev.get(b)) {
            (Some(x), _) => x == b,
            (None, Some(_)) => false,
            (None, None) => {
                self.fwd.insert(a.clone(), b.clone());
                self.rev.insert(b.clone(), a.clone());
                self.pending.push(a.clone());
                true
            }
        }
    }

    fn propagate(&mut self, f: &Ufr, g: &Ecfg) -> bool {
        while let Some(a) = self.pending.pop() {
            let b = self.fwd[&a].clone();
            let (Some(e), Some(r)) = (f.body(&a), g.rule(&b)) else {
                return false;
            };
            if !self.unify(e, r) {
                return false;
            }
        }
        true
    }

    fn unify(&mut self, e: &Expr, r: &Regex) -> bool {
        match (e, r) {
            (Expr::Empty, Regex::EmptySet) | (Expr::Nullary, Regex::Epsilon) => true,
            (Expr::Singleton(v), Regex::Sym(Symbol::T(w))) => v == w,
            (Expr::Ref(a), Regex::Sym(Symbol::N(b))) => self.bind(a, b),
            (Expr::Union(xs), Regex::Union(ys)) | (Expr::Product(xs), Regex::Concat(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            _ => false,
        }
    }

    /// Names unreachable from the start are matched by backtracking.
    fn complete(self, f: &Ufr, g: &Ecfg) -> Option<BTreeMap<Name, Name>> {
        let Some(a) = f.defs().iter().map(|d| &d.name).find(|n| !self.fwd.contains_key(*n))
        else {
            return Some(self.fwd);
        };
        for b in g.nonterminals().filter(|b| !self.rev.contains_key(*b)) {
            let mut m = self.clone();
            if m.bind(a, b) && m.propagate(f, g) {
                if let Some(done) = m.complete(f, g) {
                    return Some(done);
                }
            }
        }
        None
    }
}

fn prune(g: &Ecfg, e: &Regex, prod: &[bool]) -> Regex {
    match e {
        Regex::Sym(Symbol::N(n)) if !prod[g.index[n]] => Regex::EmptySet,
        Regex::Concat(cs) => {
            let cs: Vec<Regex> = cs.iter().map(|c| prune(g, c, prod)).collect();
            if cs.iter().any(|c| matches!(c, Regex::EmptySet)) {
                Regex::EmptySet
            } else {
                Regex::Concat(cs)
            }
        }
        Regex::Union(cs) => {
            let kept: Vec<Regex> = cs
                .iter()
                .map(|c| prune(g, c, prod))
                .filter(|c| !matches!(c, Regex::EmptySet))
                .collect();
            if kept.len() == cs.len() {
                Regex::Union(kept)
            } else {
                Regex::union(kept)
            }
        }
        Regex::Star(c) => Regex::star(prune(g, c, prod)),
        other => other.clone(),
    }
}

/// Removes nonterminals that are unproductive or unreachable from the start.
/// An empty language trims to the single rule `S → ∅`.
pub fn trim(g: &Ecfg) -> Ecfg {
    let prod = g.productive();
    let pruned: Vec<Regex> = g.rules.iter().map(|(_, e)| prune(g, e, &prod)).collect();
    let mut reach = vec![false; g.rules.len()];
    let mut stack = vec![g.index[&g.start]];
    reach[stack[0]] = true;
    while let Some(i) = stack.pop() {
        pruned[i].for_each_nonterminal(&mut |r| {
            let j = g.index[r];
            if !reach[j] {
                reach[j] = true;
                stack.push(j);
            }
        });
    }
    let rules = g
        .rules
        .iter()
        .zip(pruned)
        .zip(&reach)
        .filter(|(_, &r)| r)
        .map(|(((n, _), e), _)| (n.clone(), e))
        .collect();
    Ecfg::new(g.start.clone(), rules).expect("trimming keeps references valid")
}

/// Length information for one nonterminal: an exact set while it stays below
/// the cap, an interval afterwards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LengthSet {
    Exact(BTreeSet<usize>),
    Interval { min: usize, max: usize },
}

impl LengthSet {
    fn normalize(set: BTreeSet<usize>, cap: usize) -> LengthSet {
        if set.len() > cap {
            LengthSet::Interval {
                min: *set.first().unwrap(),
                max: *set.last().unwrap(),
            }
        } else {
            LengthSet::Exact(set)
        }
    }

    fn bounds(&self) -> Option<(usize, usize)> {
        match self {
            LengthSet::Exact(s) => Some((*s.first()?, *s.last()?)),
            LengthSet::Interval { min, max } => Some((*min, *max)),
        }
    }

    /// Whether at most one length is possible.
    pub fn is_uniform(&self) -> bool {
        match self.bounds() {
            None => true,
            Some((lo, hi)) => lo == hi,
        }
    }

    pub fn single(&self) -> Option<usize> {
        match self {
            LengthSet::Exact(s) if s.len() == 1 => s.first().copied(),
            LengthSet::Interval { min, max } if min == max => Some(*min),
            _ => None,
        }
    }

    fn plus(&self, other: &LengthSet, cap: usize) -> LengthSet {
        match (self, other) {
            (LengthSet::Exact(a), LengthSet::Exact(b)) => {
                let mut out = BTreeSet::new();
                for x in a {
                    for y in b {
                        out.insert(x + y);
                    }
                }
                LengthSet::normalize(out, cap)
            }
            _ => match (self.bounds(), other.bounds()) {
                (Some((a, b)), Some((c, d))) => LengthSet::Interval {
                    min: a + c,
                    max: b + d,
                },
                _ => LengthSet::Exact(BTreeSet::new()),
            },
        }
    }

    fn join(&self, other: &LengthSet, cap: usize) -> LengthSet {
        match (self, other) {
            (LengthSet::Exact(a), LengthSet::Exact(b)) => {
                LengthSet::normalize(a.union(b).copied().collect(), cap)
            }
            _ => match (self.bounds(), other.bounds()) {
                (Some((a, b)), Some((c, d))) => LengthSet::Interval {
                    min: a.min(c),
                    max: b.max(d),
                },
                (Some(_), None) => self.clone(),
                _ => other.clone(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub recursive: bool,
    pub star_free: bool,
    pub uniform_length: bool,
    /// Present for non-recursive grammars, after rewriting trivial stars.
    pub lengths: Option<BTreeMap<Name, LengthSet>>,
}

pub const DEFAULT_LENGTH_CAP: usize = 64;

/// Classifies the trimmed grammar. Length sets are semantic: they describe
/// the words each nonterminal actually derives.
pub fn classify(g: &Ecfg, cap: usize) -> Classification {
    let t = trim(g);
    let recursive = t.is_recursive();
    let star_free = t.rules.iter().all(|(_, e)| !e.has_star());
    let rewritten = t.rewrite_trivial_stars();
    let has_real_star = rewritten.rules.iter().any(|(_, e)| e.has_star());
    if recursive || has_real_star {
        return Classification {
            recursive,
            star_free,
            uniform_length: false,
            lengths: None,
        };
    }
    let lengths = length_sets(&rewritten, cap);
    let uniform_length = lengths[&rewritten.start].is_uniform();
    Classification {
        recursive,
        star_free,
        uniform_length,
        lengths: Some(lengths),
    }
}

/// Per-nonterminal length sets of a non-recursive, star-free grammar.
pub fn length_sets(g: &Ecfg, cap: usize) -> BTreeMap<Name, LengthSet> {
    let order = topological_leaves_first(g);
    let mut memo: Vec<Option<LengthSet>> = vec![None; g.rules.len()];
    for i in order {
        memo[i] = Some(regex_lengths(g, &g.rules[i].1, &memo, cap));
    }
    g.rules
        .iter()
        .zip(memo)
        .map(|((n, _), l)| (n.clone(), l.unwrap()))
        .collect()
}

fn regex_lengths(g: &Ecfg, e: &Regex, memo: &[Option<LengthSet>], cap: usize) -> LengthSet {
    match e {
        Regex::EmptySet => LengthSet::Exact(BTreeSet::new()),
        Regex::Epsilon => LengthSet::Exact(BTreeSet::from([0])),
        Regex::Sym(Symbol::T(_)) => LengthSet::Exact(BTreeSet::from([1])),
        Regex::Sym(Symbol::N(n)) => memo[g.index[n]].clone().expect("leaves first"),
        Regex::Concat(cs) => cs.iter().fold(LengthSet::Exact(BTreeSet::from([0])), |acc, c| {
            acc.plus(&regex_lengths(g, c, memo, cap), cap)
        }),
        Regex::Union(cs) => cs.iter().fold(LengthSet::Exact(BTreeSet::new()), |acc, c| {
            acc.join(&regex_lengths(g, c, memo, cap), cap)
        }),
        Regex::Star(_) => panic!("length sets need a star-free grammar"),
    }
}

/// Rule indices ordered so that every nonterminal comes after the ones it
/// references. The grammar must be non-recursive.
fn topological_leaves_first(g: &Ecfg) -> Vec<usize> {
    let n = g.rules.len();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if done[root] {
            continue;
        }
        let mut stack = vec![(root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if done[v] {
                continue;
            }
            if expanded {
                done[v] = true;
                order.push(v);
            } else {
                stack.push((v, true));
                for w in g.refs(v) {
                    if !done[w] {
                        stack.push((w, false));
                    }
                }
            }
        }
    }
    order
}

/// Flattens every rule into a union of symbol sequences, introducing fresh
/// nonterminals for nested subexpressions.
pub fn to_plain_cfg(g: &Ecfg) -> Result<Cfg, GrammarError> {
    let g = g.rewrite_trivial_stars();
    let mut taken: BTreeSet<String> = g.nonterminals().map(|n| String::from(n.as_str())).collect();
    let mut out: Vec<(Name, Vec<Vec<Symbol>>)> = Vec::new();
    let mut queue: Vec<(Name, Regex)> = g.rules.iter().rev().cloned().collect();
    while let Some((n, e)) = queue.pop() {
        if e.has_star() {
            return Err(GrammarError::ContainsStar(n));
        }
        let mut alts = Vec::new();
        let top: Vec<&Regex> = match &e {
            Regex::Union(cs) => cs.iter().collect(),
            Regex::EmptySet => Vec::new(),
            other => vec![other],
        };
        let mut fresh = Vec::new();
        for alt in top {
            let parts: Vec<&Regex> = match alt {
                Regex::Concat(cs) => cs.iter().collect(),
                other => vec![other],
            };
            let mut seq = Vec::new();
            let mut dead = false;
            for p in parts {
                match p {
                    Regex::Epsilon => {}
                    Regex::EmptySet => dead = true,
                    Regex::Sym(s) => seq.push(s.clone()),
                    nested => {
                        let x = fresh_name("X", |s| taken.contains(s));
                        taken.insert(String::from(x.as_str()));
                        seq.push(Symbol::N(x.clone()));
                        fresh.push((x, nested.clone()));
                    }
                }
            }
            if !dead {
                alts.push(seq);
            }
        }
        out.push((n, alts));
        queue.extend(fresh.into_iter().rev());
    }
    Ok(Cfg {
        start: g.start.clone(),
        rules: out,
    })
}

/// Chomsky normal form of a finite-language grammar. Ambiguity is not
/// preserved.
pub fn to_cnf(g: &Cfg) -> Cnf {
    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    enum S {
        T(Value),
        N(usize),
    }
    let mut names: Vec<Name> = g.rules.iter().map(|(n, _)| n.clone()).collect();
    let idx: BTreeMap<Name, usize> = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
    let mut taken: BTreeSet<String> = names.iter().map(|n| String::from(n.as_str())).collect();
    let mut fresh = |base: &str, names: &mut Vec<Name>| -> usize {
        let x = fresh_name(base, |s| taken.contains(s));
        taken.insert(String::from(x.as_str()));
        names.push(x);
        names.len() - 1
    };
    let mut rules: BTreeSet<(usize, Vec<S>)> = BTreeSet::new();
    for (n, alts) in &g.rules {
        for alt in alts {
            let seq = alt
                .iter()
                .map(|s| match s {
                    Symbol::T(v) => S::T(*v),
                    Symbol::N(m) => S::N(idx[m]),
                })
                .collect();
            rules.insert((idx[n], seq));
        }
    }
    let start = idx[&g.start];

    // TERM: terminals inside long rules get their own nonterminal
    let mut lifted: BTreeMap<Value, usize> = BTreeMap::new();
    let mut next: BTreeSet<(usize, Vec<S>)> = BTreeSet::new();
    for (a, seq) in rules {
        if seq.len() < 2 {
            next.insert((a, seq));
            continue;
        }
        let seq = seq
            .into_iter()
            .map(|s| match s {
                S::T(v) => S::N(*lifted.entry(v).or_insert_with(|| {
                    let base = format!("T_{}", v.text());
                    fresh(&base, &mut names)
                })),
                n => n,
            })
            .collect();
        next.insert((a, seq));
    }
    for (&v, &a) in &lifted {
        next.insert((a, vec![S::T(v)]));
    }

    // BIN: split long rules into chains
    let mut rules: BTreeSet<(usize, Vec<S>)> = BTreeSet::new();
    for (a, seq) in next {
        if seq.len() <= 2 {
            rules.insert((a, seq));
            continue;
        }
        let base = format!("{}_", names[a]);
        let mut head = a;
        for k in 0..seq.len() - 2 {
            let tail = fresh(&base, &mut names);
            rules.insert((head, vec![seq[k], S::N(tail)]));
            head = tail;
        }
        rules.insert((head, seq[seq.len() - 2..].to_vec()));
    }

    // DEL: remove ε rules
    let n = names.len();
    let mut nullable = vec![false; n];
    loop {
        let mut changed = false;
        for (a, seq) in &rules {
            if !nullable[*a] && seq.iter().all(|s| matches!(s, S::N(b) if nullable[*b])) {
                nullable[*a] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut next: BTreeSet<(usize, Vec<S>)> = BTreeSet::new();
    for (a, seq) in rules {
        if seq.len() == 2 {
            for (keep, drop) in [(0, 1), (1, 0)] {
                if matches!(seq[drop], S::N(b) if nullable[b]) {
                    next.insert((a, vec![seq[keep]]));
                }
            }
        }
        if !seq.is_empty() {
            next.insert((a, seq));
        }
    }

    // UNIT: inline chains A → B
    let mut unit: Vec<BTreeSet<usize>> = (0..n).map(|a| BTreeSet::from([a])).collect();
    loop {
        let mut changed = false;
        for (a, seq) in &next {
            if let [S::N(b)] = seq.as_slice() {
                let add: Vec<usize> = unit[*b].iter().copied().collect();
                for c in add {
                    changed |= unit[*a].insert(c);
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut by_head: Vec<Vec<&Vec<S>>> = vec![Vec::new(); n];
    for (a, seq) in &next {
        if !matches!(seq.as_slice(), [S::N(_)]) {
            by_head[*a].push(seq);
        }
    }
    let mut binary = BTreeSet::new();
    let mut terminal = BTreeSet::new();
    for a in 0..n {
        for &b in &unit[a] {
            for seq in &by_head[b] {
                match seq.as_slice() {
                    [S::T(v)] => {
                        terminal.insert((a, *v));
                    }
                    [S::N(x), S::N(y)] => {
                        binary.insert((a, *x, *y));
                    }
                    _ => unreachable!("rule shapes are normalized above"),
                }
            }
        }
    }

    // trim and renumber
    let mut prod = vec![false; n];
    for &(a, _) in &terminal {
        prod[a] = true;
    }
    loop {
        let mut changed = false;
        for &(a, b, c) in &binary {
            if !prod[a] && prod[b] && prod[c] {
                prod[a] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut reach = vec![false; n];
    reach[start] = true;
    let mut stack = vec![start];
    while let Some(a) = stack.pop() {
        for &(x, b, c) in &binary {
            if x == a && prod[b] && prod[c] {
                for y in [b, c] {
                    if !reach[y] {
                        reach[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&a| a == start || (reach[a] && prod[a])).collect();
    let renum: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    Cnf {
        nonterminals: keep.iter().map(|&a| names[a].clone()).collect(),
        start: renum[&start],
        binary: binary
            .into_iter()
            .filter_map(|(a, b, c)| Some((*renum.get(&a)?, *renum.get(&b)?, *renum.get(&c)?)))
            .collect(),
        terminal: terminal
            .into_iter()
            .filter_map(|(a, v)| Some((*renum.get(&a)?, v)))
            .collect(),
        accepts_empty: nullable[start],
    }
}

/// Inlines every nonterminal into the start rule. The result can be
/// exponentially larger than the grammar.
pub fn ecfg_to_regex(g: &Ecfg) -> Result<Regex, GrammarError> {
    if let Some(n) = g.recursion_witness() {
        return Err(GrammarError::Recursive(n));
    }
    let mut memo: Vec<Option<Regex>> = vec![None; g.rules.len()];
    for i in topological_leaves_first(g) {
        let e = g.rules[i]
            .1
            .map_nonterminals(&|n| memo_get(&memo, g.index[n]));
        memo[i] = Some(e);
    }
    Ok(memo[g.index[&g.start]].take().unwrap())
}

fn memo_get(memo: &[Option<Regex>], i: usize) -> Regex {
    memo[i].clone().expect("leaves first")
}

/// All words of length at most `max_len` derived by each nonterminal,
/// computed as a least fixpoint of truncated word sets.
pub fn languages_upto(
    g: &Ecfg,
    max_len: usize,
    limits: &Limits,
) -> Result<BTreeMap<Name, BTreeSet<Word>>, GrammarError> {
    let mut sets: Vec<BTreeSet<Word>> = vec![BTreeSet::new(); g.rules.len()];
    loop {
        let mut changed = false;
        for i in (0..g.rules.len()).rev() {
            let new = words_upto(&g.rules[i].1, max_len, limits, &|n| &sets[g.index[n]])?;
            if new.len() != sets[i].len() {
                changed = true;
                sets[i] = new;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(g.rules.iter().map(|(n, _)| n.clone()).zip(sets).collect())
}

/// `L(g)` restricted to words of length at most `max_len`.
pub fn language_upto(
    g: &Ecfg,
    max_len: usize,
    limits: &Limits,
) -> Result<BTreeSet<Word>, GrammarError> {
    let mut all = languages_upto(g, max_len, limits)?;
    Ok(all.remove(&g.start).unwrap())
}

/// `L(e)` restricted to words of length at most `max_len`, for a regex over
/// terminals only.
pub fn regex_language_upto(
    e: &Regex,
    max_len: usize,
    limits: &Limits,
) -> Result<BTreeSet<Word>, ResourceLimit> {
    let none = BTreeSet::new();
    words_upto(e, max_len, limits, &|_| &none)
}

fn words_upto<'a>(
    e: &Regex,
    max_len: usize,
    limits: &Limits,
    env: &dyn Fn(&Name) -> &'a BTreeSet<Word>,
) -> Result<BTreeSet<Word>, ResourceLimit> {
    Ok(match e {
        Regex::EmptySet => BTreeSet::new(),
        Regex::Epsilon => BTreeSet::from([Vec::new()]),
        Regex::Sym(Symbol::T(v)) => {
            if max_len >= 1 {
                BTreeSet::from([vec![*v]])
            } else {
                BTreeSet::new()
            }
        }
        Regex::Sym(Symbol::N(n)) => env(n).clone(),
        Regex::Union(cs) => {
            let mut out = BTreeSet::new();
            for c in cs {
                out.extend(words_upto(c, max_len, limits, env)?);
                limits.check_tuples(out.len())?;
            }
            out
        }
        Regex::Concat(cs) => {
            let mut acc = BTreeSet::from([Vec::new()]);
            for c in cs {
                let r = words_upto(c, max_len, limits, env)?;
                acc = concat_upto(&acc, &r, max_len, limits)?;
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
        Regex::Star(c) => {
            let r = words_upto(c, max_len, limits, env)?;
            let mut acc: BTreeSet<Word> = BTreeSet::from([Vec::new()]);
            let mut frontier = acc.clone();
            while !frontier.is_empty() {
                let step = concat_upto(&frontier, &r, max_len, limits)?;
                frontier = step.into_iter().filter(|w| !acc.contains(w)).collect();
                acc.extend(frontier.iter().cloned());
                limits.check_tuples(acc.len())?;
            }
            acc
        }
    })
}

fn concat_upto(
    a: &BTreeSet<Word>,
    b: &BTreeSet<Word>,
    max_len: usize,
    limits: &Limits,
) -> Result<BTreeSet<Word>, ResourceLimit> {
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            if x.len() + y.len() <= max_len {
                let mut w = x.clone();
                w.extend_from_slice(y);
                out.insert(w);
            }
        }
        limits.check_tuples(out.len())?;
    }
    Ok(out)
}
