//! Membership, counting, enumeration and equivalence for factorized
//! relations.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;
use core::cmp::Ordering;

use num_bigint::BigUint;
use thiserror::Error;

use crate::automata::{
    self, dfa_contained, dfa_equivalent, is_unambiguous_nfa, minimize_dfa, nfa_from_rightlinear,
    subset_construction, tzeng_multiset_equivalence, AutomataError, Nfa,
};
use crate::grammar::{beta, to_cnf, to_plain_cfg, Cnf};
use crate::limits::{Limits, ResourceLimit};
use crate::ufr::{self, Expr, Ufr, UfrError};
use crate::value::{Discipline, Tuple, Value};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AlgorithmError {
    #[error(transparent)]
    Ufr(#[from] UfrError),
    #[error(transparent)]
    Limit(#[from] ResourceLimit),
}

impl From<AutomataError> for AlgorithmError {
    fn from(e: AutomataError) -> Self {
        match e {
            AutomataError::Limit(l) => AlgorithmError::Limit(l),
            AutomataError::Ufr(u) => AlgorithmError::Ufr(u),
            other => unreachable!("dispatch only calls automata operations on valid inputs: {other}"),
        }
    }
}

/// The normal-form grammar of a relation, built once and reused for every
/// membership probe.
#[derive(Clone, Debug)]
pub struct MembershipIndex {
    arity: Option<usize>,
    cnf: Cnf,
}

impl MembershipIndex {
    pub fn new(f: &Ufr) -> Self {
        let cfg = to_plain_cfg(&beta(f)).expect("grammars of relations are star-free");
        MembershipIndex {
            arity: f.start_arity(),
            cnf: to_cnf(&cfg),
        }
    }

    pub fn contains(&self, t: &Tuple) -> bool {
        if self.arity.is_some_and(|k| k != t.arity()) {
            return false;
        }
        self.cnf.accepts(t.values())
    }

    pub fn cnf(&self) -> &Cnf {
        &self.cnf
    }
}

/// `t ∈ ⟦f⟧` by CYK on the normal form of `β(f)`. Build a [`MembershipIndex`]
/// to answer many probes against one relation.
pub fn membership_cyk(f: &Ufr, t: &Tuple) -> bool {
    if f.start_arity().is_some_and(|k| k != t.arity()) {
        return false;
    }
    MembershipIndex::new(f).contains(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMethod {
    /// Derivation trees (or runs of an unambiguous automaton), one per tuple.
    ExactDeterministic,
    /// Words of the minimal deterministic automaton.
    ExactDfa,
    /// Size of the materialized relation.
    BruteForce,
}

impl CountMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CountMethod::ExactDeterministic => "exact-deterministic",
            CountMethod::ExactDfa => "exact-dfa",
            CountMethod::BruteForce => "brute-force",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountReport {
    pub count: BigUint,
    pub method: CountMethod,
    pub deterministic_verified: bool,
}

/// `|⟦f⟧|`. Trusts `assume_deterministic`; otherwise right-linear relations
/// are counted on their automaton and the rest by comparing tree counts with
/// the materialized relation.
pub fn count_tuples(
    f: &Ufr,
    assume_deterministic: bool,
    limits: &Limits,
) -> Result<CountReport, AlgorithmError> {
    let trees = ufr::count_derivation_trees(f);
    if assume_deterministic {
        return Ok(CountReport {
            count: trees,
            method: CountMethod::ExactDeterministic,
            deterministic_verified: false,
        });
    }
    if let Some(a) = right_linear_nfa(f) {
        if is_unambiguous_nfa(&a) {
            let count = automata::total_runs(&a)?;
            debug_assert_eq!(count, trees);
            return Ok(CountReport {
                count,
                method: CountMethod::ExactDeterministic,
                deterministic_verified: true,
            });
        }
        let d = minimize_dfa(&subset_construction(&a, limits)?);
        let count = automata::total_runs(&d.to_nfa())?;
        return Ok(CountReport {
            count,
            method: CountMethod::ExactDfa,
            deterministic_verified: false,
        });
    }
    let n = BigUint::from(ufr::evaluate(f, None, limits)?.len());
    let deterministic = n == trees;
    Ok(CountReport {
        count: n,
        method: if deterministic {
            CountMethod::ExactDeterministic
        } else {
            CountMethod::BruteForce
        },
        deterministic_verified: deterministic,
    })
}

/// The automaton of a right-linear relation whose derivation trees are in
/// one-to-one correspondence with its runs: no body lists the same
/// alternative twice.
pub fn right_linear_nfa(f: &Ufr) -> Option<Nfa> {
    let a = nfa_from_rightlinear(f).ok()?;
    let initial_ok = a.initial().len() == 1 && a.initial().contains(&0);
    let mut distinct = true;
    for d in f.defs() {
        if let Expr::Union(cs) = &d.body {
            distinct &= cs.iter().enumerate().all(|(i, c)| !cs[..i].contains(c));
        }
    }
    (initial_ok && distinct).then_some(a)
}

/// Order in which enumeration compares values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ValueOrder {
    /// First appearance in the definitions, read left to right.
    #[default]
    FirstAppearance,
    /// Rendered text.
    Text,
}

#[derive(Clone, Debug)]
struct Ranks(BTreeMap<Value, usize>);

impl Ranks {
    fn new(f: &Ufr, order: ValueOrder) -> Self {
        let mut values = f.values_in_order();
        if order == ValueOrder::Text {
            values.sort_by_key(|v| v.text());
        }
        Ranks(values.into_iter().enumerate().map(|(i, v)| (v, i)).collect())
    }

    fn cmp(&self, a: &Tuple, b: &Tuple) -> Ordering {
        let key = |t: &Tuple| -> Vec<usize> { t.values().iter().map(|v| self.0[v]).collect() };
        key(a).cmp(&key(b))
    }

    fn cmp_shortlex(&self, a: &Tuple, b: &Tuple) -> Ordering {
        a.arity().cmp(&b.arity()).then_with(|| self.cmp(a, b))
    }
}

struct Ctx<'a> {
    f: &'a Ufr,
    productive: Vec<bool>,
    ranks: Ranks,
    steps: Rc<Cell<u64>>,
}

enum Stream<'a> {
    Done,
    Single(Option<Tuple>),
    Merge {
        children: Vec<Stream<'a>>,
        heads: Option<Vec<Option<Tuple>>>,
    },
    Product {
        rest: &'a [Expr],
        left: Box<Stream<'a>>,
        current: Option<Tuple>,
        right: Option<Box<Stream<'a>>>,
    },
}

impl<'a> Stream<'a> {
    fn open(ctx: &Ctx<'a>, e: &'a Expr) -> Stream<'a> {
        match e {
            Expr::Empty => Stream::Done,
            Expr::Nullary => Stream::Single(Some(Tuple::empty())),
            Expr::Singleton(v) => Stream::Single(Some(Tuple::new(vec![*v]))),
            Expr::Ref(n) => Stream::open(ctx, ctx.f.body(n).unwrap()),
            Expr::Union(cs) => Stream::Merge {
                children: cs
                    .iter()
                    .filter(|c| ctx.f.nonempty(c, &ctx.productive))
                    .map(|c| Stream::open(ctx, c))
                    .collect(),
                heads: None,
            },
            Expr::Product(cs) => Stream::product(ctx, cs),
        }
    }

    fn product(ctx: &Ctx<'a>, cs: &'a [Expr]) -> Stream<'a> {
        if cs.iter().any(|c| !ctx.f.nonempty(c, &ctx.productive)) {
            return Stream::Done;
        }
        match cs {
            [] => Stream::Single(Some(Tuple::empty())),
            [only] => Stream::open(ctx, only),
            [first, rest @ ..] => Stream::Product {
                rest,
                left: Box::new(Stream::open(ctx, first)),
                current: None,
                right: None,
            },
        }
    }

    fn next(&mut self, ctx: &Ctx<'a>) -> Option<Tuple> {
        ctx.steps.set(ctx.steps.get() + 1);
        match self {
            Stream::Done => None,
            Stream::Single(t) => t.take(),
            Stream::Merge { children, heads } => {
                let heads = heads.get_or_insert_with(|| children.iter_mut().map(|c| c.next(ctx)).collect());
                let mut best: Option<usize> = None;
                for (i, h) in heads.iter().enumerate() {
                    if let Some(t) = h {
                        match best {
                            Some(b) if ctx.ranks.cmp(t, heads[b].as_ref().unwrap()) != Ordering::Less => {}
                            _ => best = Some(i),
                        }
                    }
                }
                let b = best?;
                let out = heads[b].take().unwrap();
                // advance every child sitting on the same tuple
                for (i, h) in heads.iter_mut().enumerate() {
                    if i == b || h.as_ref() == Some(&out) {
                        *h = children[i].next(ctx);
                    }
                }
                Some(out)
            }
            Stream::Product {
                rest,
                left,
                current,
                right,
            } => loop {
                if current.is_none() {
                    *current = Some(left.next(ctx)?);
                    *right = Some(Box::new(Stream::product(ctx, rest)));
                }
                match right.as_mut().unwrap().next(ctx) {
                    Some(r) => return Some(current.as_ref().unwrap().concat(&r)),
                    None => *current = None,
                }
            },
        }
    }
}

/// Lazy enumeration of `⟦f⟧` in increasing word order, each tuple once.
/// Uniform relations stream without materialization; variable-length ones
/// are materialized and emitted by length, then lexicographically.
pub struct TupleStream<'a> {
    ctx: Ctx<'a>,
    inner: Inner<'a>,
    last_steps: u64,
    max_delay: u64,
    emitted: u64,
}

enum Inner<'a> {
    Lazy(Stream<'a>),
    Sorted(alloc::vec::IntoIter<Tuple>),
}

impl<'a> TupleStream<'a> {
    /// Largest number of internal stream steps between two emissions.
    pub fn max_delay(&self) -> u64 {
        self.max_delay
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }
}

impl Iterator for TupleStream<'_> {
    type Item = Tuple;

    fn next(&mut self) -> Option<Tuple> {
        let out = match &mut self.inner {
            Inner::Lazy(s) => s.next(&self.ctx),
            Inner::Sorted(it) => {
                self.ctx.steps.set(self.ctx.steps.get() + 1);
                it.next()
            }
        };
        let now = self.ctx.steps.get();
        self.max_delay = self.max_delay.max(now - self.last_steps);
        self.last_steps = now;
        if out.is_some() {
            self.emitted += 1;
        }
        out
    }
}

pub fn enumerate_tuples<'a>(
    f: &'a Ufr,
    order: ValueOrder,
    limits: &Limits,
) -> Result<TupleStream<'a>, UfrError> {
    let ctx = Ctx {
        f,
        productive: f.productive(),
        ranks: Ranks::new(f, order),
        steps: Rc::new(Cell::new(0)),
    };
    let inner = match f.discipline() {
        Discipline::Uniform => {
            let body = &f.defs()[0].body;
            if ctx.productive[0] {
                Inner::Lazy(Stream::open(&ctx, body))
            } else {
                Inner::Lazy(Stream::Done)
            }
        }
        Discipline::Variable => {
            let mut all: Vec<Tuple> = ufr::evaluate(f, None, limits)?.into_tuples().into_iter().collect();
            all.sort_by(|a, b| ctx.ranks.cmp_shortlex(a, b));
            Inner::Sorted(all.into_iter())
        }
    };
    Ok(TupleStream {
        ctx,
        inner,
        last_steps: 0,
        max_delay: 0,
        emitted: 0,
    })
}

/// Whether `a` precedes `b` in the enumeration order of `f`.
pub fn enumeration_less(f: &Ufr, order: ValueOrder, a: &Tuple, b: &Tuple) -> bool {
    let ranks = Ranks::new(f, order);
    let ord = match f.discipline() {
        Discipline::Uniform => ranks.cmp(a, b),
        Discipline::Variable => ranks.cmp_shortlex(a, b),
    };
    ord == Ordering::Less
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Semantics {
    Set,
    Multiset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquivalenceMethod {
    /// Run-count vectors of the two automata.
    Tzeng,
    /// Word counts of unambiguous automata and their product.
    UfaCounting,
    /// Minimal deterministic automata.
    MinimalDfa,
    /// Materialized relations (or bags).
    BruteForce,
}

impl EquivalenceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            EquivalenceMethod::Tzeng => "tzeng",
            EquivalenceMethod::UfaCounting => "ufa-counting",
            EquivalenceMethod::MinimalDfa => "minimal-dfa",
            EquivalenceMethod::BruteForce => "brute-force",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub holds: bool,
    pub method: EquivalenceMethod,
}

/// `⟦f1⟧ = ⟦f2⟧`, as sets or as bags of derivation trees.
pub fn equivalence(
    f1: &Ufr,
    f2: &Ufr,
    mode: Semantics,
    limits: &Limits,
) -> Result<EquivalenceReport, AlgorithmError> {
    compare(f1, f2, mode, false, limits)
}

/// `⟦f1⟧ ⊆ ⟦f2⟧`, as sets or as bags (pointwise multiplicities).
pub fn containment(
    f1: &Ufr,
    f2: &Ufr,
    mode: Semantics,
    limits: &Limits,
) -> Result<EquivalenceReport, AlgorithmError> {
    compare(f1, f2, mode, true, limits)
}

fn compare(
    f1: &Ufr,
    f2: &Ufr,
    mode: Semantics,
    contained: bool,
    limits: &Limits,
) -> Result<EquivalenceReport, AlgorithmError> {
    let report = |holds, method| Ok(EquivalenceReport { holds, method });
    if let (Some(a1), Some(a2)) = (right_linear_nfa(f1), right_linear_nfa(f2)) {
        match mode {
            Semantics::Multiset if !contained => {
                return report(tzeng_multiset_equivalence(&a1, &a2), EquivalenceMethod::Tzeng)
            }
            Semantics::Multiset => {}
            Semantics::Set => {
                if is_unambiguous_nfa(&a1) && is_unambiguous_nfa(&a2) {
                    let holds = if contained {
                        automata::ufa_set_containment(&a1, &a2)?
                    } else {
                        automata::ufa_set_equivalence(&a1, &a2)?
                    };
                    return report(holds, EquivalenceMethod::UfaCounting);
                }
                let d1 = minimize_dfa(&subset_construction(&a1, limits)?);
                let d2 = minimize_dfa(&subset_construction(&a2, limits)?);
                let holds = if contained {
                    dfa_contained(&d1, &d2)
                } else {
                    dfa_equivalent(&d1, &d2)
                };
                return report(holds, EquivalenceMethod::MinimalDfa);
            }
        }
    }
    let holds = match mode {
        Semantics::Set => {
            let r1 = ufr::evaluate(f1, None, limits)?;
            let r2 = ufr::evaluate(f2, None, limits)?;
            if contained {
                r1.tuples().is_subset(r2.tuples())
            } else {
                r1.same_tuples(&r2)
            }
        }
        Semantics::Multiset => {
            let b1 = ufr::evaluate_bag(f1, limits)?;
            let b2 = ufr::evaluate_bag(f2, limits)?;
            if contained {
                b1.iter().all(|(t, m)| b2.get(t).is_some_and(|m2| m <= m2))
            } else {
                b1 == b2
            }
        }
    };
    report(holds, EquivalenceMethod::BruteForce)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::samples;
    use crate::ufr::{DisciplineMode, RawUfr};

    fn lim() -> Limits {
        Limits::default()
    }
    fn tup(xs: &[&str]) -> Tuple {
        Tuple::from_texts(xs)
    }
    fn step(x: &str, to: &str) -> Expr {
        Expr::product(vec![Expr::singleton(x), Expr::reference(to)])
    }
    fn valid(raw: RawUfr) -> Ufr {
        Ufr::validate(raw, DisciplineMode::Auto).unwrap()
    }

    #[test]
    fn membership_examples() {
        let f = samples::example21();
        assert!(membership_cyk(&f, &tup(&["c1", "flute", "s1", "n1"])));
        assert!(!membership_cyk(&f, &tup(&["c1", "harp", "s1", "n1"])));
        assert!(!membership_cyk(&f, &tup(&["c1", "flute", "s1"])));
        let unit = valid(RawUfr::new().def("S", Expr::Nullary));
        assert!(membership_cyk(&unit, &Tuple::empty()));
        let one = valid(RawUfr::new().def("S", Expr::union(vec![Expr::singleton("a"), Expr::singleton("b")])));
        assert!(membership_cyk(&one, &tup(&["b"])));
        assert!(!membership_cyk(&one, &tup(&["c"])));
    }

    #[test]
    fn counting_examples() {
        let p3 = count_tuples(&families::power_tuples(3), true, &lim()).unwrap();
        assert_eq!(p3.count, BigUint::from(256u32));
        assert_eq!(p3.method, CountMethod::ExactDeterministic);

        let dup = valid(RawUfr::new().def("S", Expr::union(vec![Expr::singleton("a"), Expr::singleton("a")])));
        let r = count_tuples(&dup, false, &lim()).unwrap();
        assert_eq!(r.count, BigUint::from(1u32));
        assert_eq!(r.method, CountMethod::BruteForce);

        let ex = count_tuples(&samples::example21(), false, &lim()).unwrap();
        assert_eq!(ex.count, BigUint::from(9u32));
        assert_eq!(ex.method, CountMethod::ExactDeterministic);
        assert!(ex.deterministic_verified);
    }

    #[test]
    fn counting_right_linear_paths() {
        let det = valid(
            RawUfr::new()
                .def("S", Expr::union(vec![step("a", "E"), step("b", "E")]))
                .def("E", Expr::Nullary),
        );
        let r = count_tuples(&det, false, &lim()).unwrap();
        assert_eq!((r.count, r.method), (BigUint::from(2u32), CountMethod::ExactDeterministic));
        // S → a·X ∪ a·Y with X and Y both ⟨⟩: one tuple, two runs
        let amb = valid(
            RawUfr::new()
                .def("S", Expr::union(vec![step("a", "X"), step("a", "Y")]))
                .def("X", Expr::Nullary)
                .def("Y", Expr::Nullary),
        );
        let r = count_tuples(&amb, false, &lim()).unwrap();
        assert_eq!((r.count, r.method), (BigUint::from(1u32), CountMethod::ExactDfa));
    }

    #[test]
    fn enumeration_order() {
        let p1 = families::power_tuples(1);
        let got: Vec<Tuple> = enumerate_tuples(&p1, ValueOrder::FirstAppearance, &lim()).unwrap().collect();
        assert_eq!(got, vec![tup(&["0", "0"]), tup(&["0", "1"]), tup(&["1", "0"]), tup(&["1", "1"])]);

        let f = samples::example21();
        let got: Vec<Tuple> = enumerate_tuples(&f, ValueOrder::Text, &lim()).unwrap().collect();
        assert_eq!(got.len(), 9);
        let rel = ufr::evaluate(&f, None, &lim()).unwrap();
        assert_eq!(got, rel.sorted_by_text());

        let dup = valid(RawUfr::new().def("S", Expr::union(vec![Expr::singleton("a"), Expr::singleton("a")])));
        let got: Vec<Tuple> = enumerate_tuples(&dup, ValueOrder::FirstAppearance, &lim()).unwrap().collect();
        assert_eq!(got, vec![tup(&["a"])]);
    }

    #[test]
    fn enumeration_skips_dead_branches() {
        let f = valid(
            RawUfr::new()
                .def("S", Expr::union(vec![
                    Expr::product(vec![Expr::reference("B"), Expr::reference("Z")]),
                    Expr::product(vec![Expr::singleton("x"), Expr::singleton("y")]),
                ]))
                .def("B", Expr::product(vec![Expr::singleton("a")]))
                .def("Z", Expr::product(vec![Expr::singleton("z"), Expr::Empty])),
        );
        let got: Vec<Tuple> = enumerate_tuples(&f, ValueOrder::FirstAppearance, &lim()).unwrap().collect();
        assert_eq!(got, vec![tup(&["x", "y"])]);
    }

    #[test]
    fn variable_length_enumeration_is_shortlex() {
        let f = valid(RawUfr::new().def(
            "S",
            Expr::union(vec![
                Expr::product(vec![Expr::singleton("a"), Expr::singleton("a")]),
                Expr::singleton("b"),
                Expr::Nullary,
            ]),
        ));
        let got: Vec<Tuple> = enumerate_tuples(&f, ValueOrder::Text, &lim()).unwrap().collect();
        assert_eq!(got, vec![Tuple::empty(), tup(&["b"]), tup(&["a", "a"])]);
    }

    #[test]
    fn equivalence_dispatch() {
        let ab_ba = valid(
            RawUfr::new()
                .def("S", Expr::union(vec![step("a", "X"), step("b", "Y")]))
                .def("X", step("b", "E"))
                .def("Y", step("a", "E"))
                .def("E", Expr::Nullary),
        );
        let renamed = valid(
            RawUfr::new()
                .def("P", Expr::union(vec![step("b", "Q"), step("a", "R")]))
                .def("Q", step("a", "F"))
                .def("R", step("b", "F"))
                .def("F", Expr::Nullary),
        );
        let r = equivalence(&ab_ba, &renamed, Semantics::Set, &lim()).unwrap();
        assert_eq!(r, EquivalenceReport { holds: true, method: EquivalenceMethod::UfaCounting });

        let single = valid(RawUfr::new().def("S", step("a", "T")).def("T", step("b", "E")).def("E", Expr::Nullary));
        let double = valid(
            RawUfr::new()
                .def("S", Expr::union(vec![step("a", "T"), step("a", "U")]))
                .def("T", step("b", "E"))
                .def("U", step("b", "E"))
                .def("E", Expr::Nullary),
        );
        let set = equivalence(&single, &double, Semantics::Set, &lim()).unwrap();
        assert!(set.holds);
        assert_eq!(set.method, EquivalenceMethod::MinimalDfa);
        let bag = equivalence(&single, &double, Semantics::Multiset, &lim()).unwrap();
        assert_eq!(bag, EquivalenceReport { holds: false, method: EquivalenceMethod::Tzeng });

        let f = samples::example21();
        let flat = samples::example21_flat();
        let r = equivalence(&f, &flat, Semantics::Set, &lim()).unwrap();
        assert_eq!(r, EquivalenceReport { holds: true, method: EquivalenceMethod::BruteForce });
        assert!(equivalence(&f, &f, Semantics::Multiset, &lim()).unwrap().holds);
    }

    #[test]
    fn containment_dispatch() {
        let ab = valid(RawUfr::new().def("S", step("a", "T")).def("T", step("b", "E")).def("E", Expr::Nullary));
        let both = valid(
            RawUfr::new()
                .def("S", Expr::union(vec![step("a", "X"), step("b", "Y")]))
                .def("X", step("b", "E"))
                .def("Y", step("a", "E"))
                .def("E", Expr::Nullary),
        );
        assert!(containment(&ab, &both, Semantics::Set, &lim()).unwrap().holds);
        assert!(!containment(&both, &ab, Semantics::Set, &lim()).unwrap().holds);
        assert!(containment(&ab, &both, Semantics::Multiset, &lim()).unwrap().holds);
    }
}
