//! Unnamed factorized relations.
//!
//! A factorized relation is a start name plus an ordered list of definitions
//! `N_i := E_i`, where every body only references names defined *after* it.
//! Bodies are relational expressions over ∅, the nullary tuple `⟨⟩`,
//! singletons `⟨a⟩`, name references, n-ary union and n-ary product.
//!
//! When every name has a single arity the relation is *uniform*; otherwise it
//! is a variable-length relation whose tuples may differ in arity.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::limits::{Limits, ResourceLimit};
use crate::name::Name;
use crate::value::{Discipline, Relation, Tuple, Value};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Empty,
    Nullary,
    Singleton(Value),
    Ref(Name),
    Union(Vec<Expr>),
    Product(Vec<Expr>),
}

impl Expr {
    pub fn singleton(text: &str) -> Expr {
        Expr::Singleton(Value::new(text))
    }

    pub fn reference(name: &str) -> Expr {
        Expr::Ref(Name::from(name))
    }

    /// Union of `children`; a single child is returned as is.
    pub fn union(mut children: Vec<Expr>) -> Expr {
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            Expr::Union(children)
        }
    }

    /// Product of `children`; a single child is returned as is and no children
    /// give the nullary tuple.
    pub fn product(mut children: Vec<Expr>) -> Expr {
        match children.len() {
            0 => Expr::Nullary,
            1 => children.pop().unwrap(),
            _ => Expr::Product(children),
        }
    }

    /// Symbol occurrences plus operator occurrences. An n-ary node counts as
    /// n − 1 binary operators.
    pub fn size(&self) -> usize {
        match self {
            Expr::Empty | Expr::Nullary | Expr::Singleton(_) | Expr::Ref(_) => 1,
            Expr::Union(cs) | Expr::Product(cs) => {
                cs.len().saturating_sub(1) + cs.iter().map(Expr::size).sum::<usize>()
            }
        }
    }

    pub fn for_each_ref<'a>(&'a self, f: &mut impl FnMut(&'a Name)) {
        match self {
            Expr::Ref(n) => f(n),
            Expr::Union(cs) | Expr::Product(cs) => cs.iter().for_each(|c| c.for_each_ref(f)),
            _ => {}
        }
    }

    pub fn for_each_value(&self, f: &mut impl FnMut(Value)) {
        match self {
            Expr::Singleton(v) => f(*v),
            Expr::Union(cs) | Expr::Product(cs) => cs.iter().for_each(|c| c.for_each_value(f)),
            _ => {}
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, cs: &[Expr], op: &str) -> fmt::Result {
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
            Expr::Empty => f.write_str("∅"),
            Expr::Nullary => f.write_str("⟨⟩"),
            Expr::Singleton(v) => write!(f, "⟨{v}⟩"),
            Expr::Ref(n) => write!(f, "{n}"),
            Expr::Union(cs) => join(f, cs, " ∪ "),
            Expr::Product(cs) => join(f, cs, " × "),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: Name,
    pub body: Expr,
}

/// Unvalidated factorized relation, as produced by a parser or builder.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawUfr {
    pub start: Option<Name>,
    pub defs: Vec<Definition>,
}

impl RawUfr {
    pub fn new() -> Self {
        RawUfr::default()
    }

    pub fn def(mut self, name: &str, body: Expr) -> Self {
        self.defs.push(Definition {
            name: Name::from(name),
            body,
        });
        self
    }
}

/// Which arity discipline validation should enforce.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DisciplineMode {
    /// Uniform if all arities are consistent, variable otherwise.
    #[default]
    Auto,
    /// Reject arity-inconsistent unions.
    Uniform,
    /// Accept anything and treat the result as variable-length.
    Variable,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum UfrError {
    #[error("no definitions")]
    NoDefinitions,
    #[error("start symbol {0} must be the first definition")]
    StartNotFirst(Name),
    #[error("duplicate definition of {0}")]
    DuplicateName(Name),
    #[error("unknown name {0}")]
    UnknownName(Name),
    #[error("{from} references {to}, which is not defined after it")]
    BackwardReference { from: Name, to: Name },
    #[error("arity mismatch in union of {name}: {expected} vs {found}")]
    ArityMismatch {
        name: Name,
        expected: usize,
        found: usize,
    },
    #[error("empty set inside a union in {0}")]
    EmptyInUnion(Name),
    #[error("union or product with fewer than two children in {0}")]
    DegenerateOperator(Name),
    #[error("operation requires a uniform-length relation")]
    VariableLength,
    #[error(transparent)]
    Limit(#[from] ResourceLimit),
}

/// A validated factorized relation. Immutable.
#[derive(Clone, PartialEq, Eq)]
pub struct Ufr {
    defs: Vec<Definition>,
    index: BTreeMap<Name, usize>,
    arities: Vec<Option<usize>>,
    discipline: Discipline,
}

impl fmt::Debug for Ufr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.defs {
            writeln!(f, "{} := {}", d.name, d.body)?;
        }
        Ok(())
    }
}

impl Ufr {
    pub fn validate(raw: RawUfr, mode: DisciplineMode) -> Result<Ufr, UfrError> {
        let RawUfr { start, defs } = raw;
        if defs.is_empty() {
            return Err(UfrError::NoDefinitions);
        }
        if let Some(start) = start {
            if start != defs[0].name {
                return Err(UfrError::StartNotFirst(start));
            }
        }
        let mut index = BTreeMap::new();
        for (i, d) in defs.iter().enumerate() {
            if index.insert(d.name.clone(), i).is_some() {
                return Err(UfrError::DuplicateName(d.name.clone()));
            }
        }
        for (i, d) in defs.iter().enumerate() {
            check_shape(&d.name, &d.body)?;
            let mut err = None;
            d.body.for_each_ref(&mut |r| {
                if err.is_some() {
                    return;
                }
                match index.get(r) {
                    None => err = Some(UfrError::UnknownName(r.clone())),
                    Some(&j) if j <= i => {
                        err = Some(UfrError::BackwardReference {
                            from: d.name.clone(),
                            to: r.clone(),
                        })
                    }
                    _ => {}
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
        }

        let mut arities: Vec<Option<usize>> = vec![None; defs.len()];
        let mut consistent = true;
        for i in (0..defs.len()).rev() {
            match expr_arity(&defs[i].body, &index, &arities) {
                Ok(a) => arities[i] = a,
                Err((expected, found)) => {
                    if mode == DisciplineMode::Uniform {
                        return Err(UfrError::ArityMismatch {
                            name: defs[i].name.clone(),
                            expected,
                            found,
                        });
                    }
                    consistent = false;
                }
            }
        }
        let discipline = match mode {
            DisciplineMode::Variable => Discipline::Variable,
            _ if consistent => Discipline::Uniform,
            _ => Discipline::Variable,
        };
        Ok(Ufr {
            defs,
            index,
            arities,
            discipline,
        })
    }

    pub fn start(&self) -> &Name {
        &self.defs[0].name
    }

    pub fn defs(&self) -> &[Definition] {
        &self.defs
    }

    pub fn discipline(&self) -> Discipline {
        self.discipline
    }

    pub fn index_of(&self, name: &Name) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn body(&self, name: &Name) -> Option<&Expr> {
        self.index_of(name).map(|i| &self.defs[i].body)
    }

    /// The arity of `name` if it has a single one. Always `Some` for every
    /// name of a uniform relation.
    pub fn arity(&self, name: &Name) -> Option<usize> {
        self.index_of(name).and_then(|i| self.arities[i])
    }

    pub fn arity_of_index(&self, i: usize) -> Option<usize> {
        self.arities[i]
    }

    /// Arity of the represented relation, for uniform relations.
    pub fn start_arity(&self) -> Option<usize> {
        match self.discipline {
            Discipline::Uniform => self.arities[0],
            Discipline::Variable => None,
        }
    }

    pub fn size(&self) -> usize {
        self.defs.iter().map(|d| d.body.size()).sum()
    }

    pub fn values(&self) -> BTreeSet<Value> {
        let mut out = BTreeSet::new();
        for d in &self.defs {
            d.body.for_each_value(&mut |v| {
                out.insert(v);
            });
        }
        out
    }

    /// Values in order of first appearance (definitions in order, bodies left
    /// to right).
    pub fn values_in_order(&self) -> Vec<Value> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for d in &self.defs {
            d.body.for_each_value(&mut |v| {
                if seen.insert(v) {
                    out.push(v);
                }
            });
        }
        out
    }

    /// Indices of definitions reachable from definition `from`, ascending.
    pub fn reachable_from(&self, from: usize) -> Vec<usize> {
        let mut seen = vec![false; self.defs.len()];
        seen[from] = true;
        for i in from..self.defs.len() {
            if !seen[i] {
                continue;
            }
            self.defs[i].body.for_each_ref(&mut |r| seen[self.index[r]] = true);
        }
        (0..self.defs.len()).filter(|&i| seen[i]).collect()
    }

    /// Whether each definition denotes a non-empty relation.
    pub fn productive(&self) -> Vec<bool> {
        let mut productive = vec![false; self.defs.len()];
        for i in (0..self.defs.len()).rev() {
            productive[i] = self.nonempty(&self.defs[i].body, &productive);
        }
        productive
    }

    pub(crate) fn nonempty(&self, e: &Expr, productive: &[bool]) -> bool {
        match e {
            Expr::Empty => false,
            Expr::Nullary | Expr::Singleton(_) => true,
            Expr::Ref(n) => productive[self.index[n]],
            Expr::Union(cs) => cs.iter().any(|c| self.nonempty(c, productive)),
            Expr::Product(cs) => cs.iter().all(|c| self.nonempty(c, productive)),
        }
    }

    pub(crate) fn expr_arity(&self, e: &Expr) -> Option<usize> {
        expr_arity(e, &self.index, &self.arities).ok().flatten()
    }
}

fn check_shape(name: &Name, e: &Expr) -> Result<(), UfrError> {
    match e {
        Expr::Union(cs) => {
            if cs.len() < 2 {
                return Err(UfrError::DegenerateOperator(name.clone()));
            }
            if cs.iter().any(|c| matches!(c, Expr::Empty)) {
                return Err(UfrError::EmptyInUnion(name.clone()));
            }
            cs.iter().try_for_each(|c| check_shape(name, c))
        }
        Expr::Product(cs) => {
            if cs.len() < 2 {
                return Err(UfrError::DegenerateOperator(name.clone()));
            }
            cs.iter().try_for_each(|c| check_shape(name, c))
        }
        _ => Ok(()),
    }
}

/// `Ok(Some(k))` for a consistent arity, `Ok(None)` when a referenced name is
/// itself inconsistent, `Err((expected, found))` on a union mismatch.
fn expr_arity(
    e: &Expr,
    index: &BTreeMap<Name, usize>,
    arities: &[Option<usize>],
) -> Result<Option<usize>, (usize, usize)> {
    Ok(match e {
        Expr::Empty | Expr::Nullary => Some(0),
        Expr::Singleton(_) => Some(1),
        Expr::Ref(n) => arities[index[n]],
        Expr::Union(cs) => {
            let mut acc: Option<usize> = None;
            let mut unknown = false;
            for c in cs {
                match expr_arity(c, index, arities)? {
                    Some(k) => match acc {
                        Some(a) if a != k => return Err((a, k)),
                        _ => acc = Some(k),
                    },
                    None => unknown = true,
                }
            }
            if unknown {
                None
            } else {
                acc
            }
        }
        Expr::Product(cs) => {
            let mut sum = Some(0usize);
            for c in cs {
                let k = expr_arity(c, index, arities)?;
                sum = match (sum, k) {
                    (Some(s), Some(k)) => Some(s + k),
                    _ => None,
                };
            }
            sum
        }
    })
}

/// Evaluates `name` (default: the start symbol) bottom-up, materializing
/// every reachable intermediate relation once.
pub fn evaluate(f: &Ufr, name: Option<&Name>, limits: &Limits) -> Result<Relation, UfrError> {
    let root = match name {
        Some(n) => f.index_of(n).ok_or_else(|| UfrError::UnknownName(n.clone()))?,
        None => 0,
    };
    let mut memo: Vec<Option<BTreeSet<Tuple>>> = vec![None; f.defs.len()];
    for i in f.reachable_from(root).into_iter().rev() {
        let r = eval_expr(f, &f.defs[i].body, &memo, limits)?;
        memo[i] = Some(r);
    }
    Ok(wrap(f, root, memo[root].take().unwrap()))
}

/// Evaluates every definition; entry `i` is `⟦N_i⟧`.
pub fn evaluate_all(f: &Ufr, limits: &Limits) -> Result<Vec<Relation>, UfrError> {
    let mut memo: Vec<Option<BTreeSet<Tuple>>> = vec![None; f.defs.len()];
    for i in (0..f.defs.len()).rev() {
        memo[i] = Some(eval_expr(f, &f.defs[i].body, &memo, limits)?);
    }
    Ok(memo
        .into_iter()
        .enumerate()
        .map(|(i, r)| wrap(f, i, r.unwrap()))
        .collect())
}

fn wrap(f: &Ufr, i: usize, tuples: BTreeSet<Tuple>) -> Relation {
    match (f.discipline, f.arities[i]) {
        (Discipline::Uniform, Some(k)) => {
            let mut r = Relation::uniform(k);
            for t in tuples {
                r.insert(t);
            }
            r
        }
        _ => Relation::from_tuples(tuples),
    }
}

fn eval_expr(
    f: &Ufr,
    e: &Expr,
    memo: &[Option<BTreeSet<Tuple>>],
    limits: &Limits,
) -> Result<BTreeSet<Tuple>, UfrError> {
    Ok(match e {
        Expr::Empty => BTreeSet::new(),
        Expr::Nullary => BTreeSet::from([Tuple::empty()]),
        Expr::Singleton(v) => BTreeSet::from([Tuple::new(vec![*v])]),
        Expr::Ref(n) => memo[f.index[n]]
            .clone()
            .expect("referenced definitions are evaluated first"),
        Expr::Union(cs) => {
            let mut out = BTreeSet::new();
            for c in cs {
                out.extend(eval_expr(f, c, memo, limits)?);
                limits.check_tuples(out.len())?;
            }
            out
        }
        Expr::Product(cs) => {
            let mut acc = BTreeSet::from([Tuple::empty()]);
            for c in cs {
                let r = eval_expr(f, c, memo, limits)?;
                if r.is_empty() {
                    return Ok(BTreeSet::new());
                }
                limits.check_tuples(acc.len().saturating_mul(r.len()))?;
                let mut next = BTreeSet::new();
                for a in &acc {
                    for b in &r {
                        next.insert(a.concat(b));
                    }
                }
                acc = next;
            }
            acc
        }
    })
}

/// Bag semantics: each tuple with its number of derivation trees.
pub fn evaluate_bag(f: &Ufr, limits: &Limits) -> Result<BTreeMap<Tuple, BigUint>, UfrError> {
    let mut memo: Vec<Option<BTreeMap<Tuple, BigUint>>> = vec![None; f.defs.len()];
    for i in f.reachable_from(0).into_iter().rev() {
        memo[i] = Some(bag_expr(f, &f.defs[i].body, &memo, limits)?);
    }
    Ok(memo[0].take().unwrap())
}

fn bag_expr(
    f: &Ufr,
    e: &Expr,
    memo: &[Option<BTreeMap<Tuple, BigUint>>],
    limits: &Limits,
) -> Result<BTreeMap<Tuple, BigUint>, UfrError> {
    Ok(match e {
        Expr::Empty => BTreeMap::new(),
        Expr::Nullary => BTreeMap::from([(Tuple::empty(), BigUint::one())]),
        Expr::Singleton(v) => BTreeMap::from([(Tuple::new(vec![*v]), BigUint::one())]),
        Expr::Ref(n) => memo[f.index[n]].clone().unwrap(),
        Expr::Union(cs) => {
            let mut out: BTreeMap<Tuple, BigUint> = BTreeMap::new();
            for c in cs {
                for (t, m) in bag_expr(f, c, memo, limits)? {
                    *out.entry(t).or_insert_with(BigUint::zero) += m;
                }
                limits.check_tuples(out.len())?;
            }
            out
        }
        Expr::Product(cs) => {
            let mut acc = BTreeMap::from([(Tuple::empty(), BigUint::one())]);
            for c in cs {
                let r = bag_expr(f, c, memo, limits)?;
                limits.check_tuples(acc.len().saturating_mul(r.len()))?;
                let mut next: BTreeMap<Tuple, BigUint> = BTreeMap::new();
                for (a, ma) in &acc {
                    for (b, mb) in &r {
                        *next.entry(a.concat(b)).or_insert_with(BigUint::zero) += ma * mb;
                    }
                }
                acc = next;
            }
            acc
        }
    })
}

pub fn ufr_size(f: &Ufr) -> usize {
    f.size()
}

/// Column value sets of the represented relation, computed without
/// materializing it. Only productive occurrences contribute, so every value
/// in column `c` appears at position `c` of some represented tuple.
pub fn column_values(f: &Ufr) -> Result<BTreeMap<usize, BTreeSet<Value>>, UfrError> {
    if f.discipline != Discipline::Uniform {
        return Err(UfrError::VariableLength);
    }
    let productive = f.productive();
    let mut offsets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); f.defs.len()];
    let mut columns: BTreeMap<usize, BTreeSet<Value>> = BTreeMap::new();
    if productive[0] {
        offsets[0].insert(0);
    }
    for i in 0..f.defs.len() {
        if offsets[i].is_empty() {
            continue;
        }
        let here: Vec<usize> = offsets[i].iter().copied().collect();
        for o in here {
            place(f, &f.defs[i].body, o, &productive, &mut offsets, &mut columns);
        }
    }
    Ok(columns)
}

fn place(
    f: &Ufr,
    e: &Expr,
    at: usize,
    productive: &[bool],
    offsets: &mut [BTreeSet<usize>],
    columns: &mut BTreeMap<usize, BTreeSet<Value>>,
) {
    match e {
        Expr::Empty | Expr::Nullary => {}
        Expr::Singleton(v) => {
            columns.entry(at).or_default().insert(*v);
        }
        Expr::Ref(n) => {
            offsets[f.index[n]].insert(at);
        }
        Expr::Union(cs) => {
            for c in cs {
                if f.nonempty(c, productive) {
                    place(f, c, at, productive, offsets, columns);
                }
            }
        }
        Expr::Product(cs) => {
            if !cs.iter().all(|c| f.nonempty(c, productive)) {
                return;
            }
            let mut pos = at;
            for c in cs {
                place(f, c, pos, productive, offsets, columns);
                pos += f.expr_arity(c).expect("uniform relation");
            }
        }
    }
}

/// Whether no value occurs in two different columns of `⟦f⟧`.
pub fn has_disjoint_positions(f: &Ufr) -> Result<bool, UfrError> {
    let columns = column_values(f)?;
    let mut owner: BTreeMap<Value, usize> = BTreeMap::new();
    for (&c, values) in &columns {
        for &v in values {
            if let Some(&other) = owner.get(&v) {
                if other != c {
                    return Ok(false);
                }
            }
            owner.insert(v, c);
        }
    }
    Ok(true)
}

/// Number of derivation trees of each definition, in definition order.
pub fn derivation_tree_counts(f: &Ufr) -> Vec<BigUint> {
    let mut trees: Vec<BigUint> = vec![BigUint::zero(); f.defs.len()];
    for i in (0..f.defs.len()).rev() {
        trees[i] = tree_count(f, &f.defs[i].body, &trees);
    }
    trees
}

fn tree_count(f: &Ufr, e: &Expr, trees: &[BigUint]) -> BigUint {
    match e {
        Expr::Empty => BigUint::zero(),
        Expr::Nullary | Expr::Singleton(_) => BigUint::one(),
        Expr::Ref(n) => trees[f.index[n]].clone(),
        Expr::Union(cs) => cs.iter().map(|c| tree_count(f, c, trees)).sum(),
        Expr::Product(cs) => cs.iter().map(|c| tree_count(f, c, trees)).product(),
    }
}

pub fn count_derivation_trees(f: &Ufr) -> BigUint {
    derivation_tree_counts(f).swap_remove(0)
}

/// Every represented tuple has exactly one derivation tree. Needs the
/// relation to be materialized, so it is exponential in the worst case.
pub fn is_deterministic(f: &Ufr, limits: &Limits) -> Result<bool, UfrError> {
    let n = evaluate(f, None, limits)?.len();
    Ok(count_derivation_trees(f) == BigUint::from(n))
}
