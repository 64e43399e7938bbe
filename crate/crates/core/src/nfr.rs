//! Named factorized relations (d-representations) and conversion between the
//! named and unnamed perspectives.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::limits::{Limits, ResourceLimit};
use crate::name::Name;
use crate::ufr::{self, Expr, Ufr, UfrError};
use crate::value::{Discipline, Relation, Tuple, Value};

/// An attribute name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Attr(String);

impl Attr {
    pub fn new(s: impl Into<String>) -> Self {
        Attr(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The attribute used for global column `c` in positional conversions.
    pub fn positional(c: usize) -> Attr {
        Attr(format!("P{c}"))
    }
}

impl From<&str> for Attr {
    fn from(s: &str) -> Self {
        Attr(String::from(s))
    }
}

impl fmt::Debug for Attr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Attr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A tuple in the named perspective: a finite map from attributes to values.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NamedTuple(BTreeMap<Attr, Value>);

impl NamedTuple {
    pub fn new() -> Self {
        NamedTuple::default()
    }

    pub fn from_pairs<'a, I: IntoIterator<Item = (&'a str, &'a str)>>(pairs: I) -> Self {
        NamedTuple(
            pairs
                .into_iter()
                .map(|(a, v)| (Attr::from(a), Value::new(v)))
                .collect(),
        )
    }

    pub fn get(&self, attr: &Attr) -> Option<Value> {
        self.0.get(attr).copied()
    }

    pub fn schema(&self) -> BTreeSet<Attr> {
        self.0.keys().cloned().collect()
    }

    pub fn bindings(&self) -> &BTreeMap<Attr, Value> {
        &self.0
    }

    /// Union of two tuples over disjoint attribute sets.
    fn merge(&self, other: &NamedTuple) -> NamedTuple {
        let mut m = self.0.clone();
        m.extend(other.0.iter().map(|(a, v)| (a.clone(), *v)));
        NamedTuple(m)
    }
}

impl fmt::Debug for NamedTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("⟨")?;
        for (i, (a, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}:{v}")?;
        }
        f.write_str("⟩")
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum NExpr {
    Empty,
    Nullary,
    Singleton(Attr, Value),
    Ref(Name),
    Union(Vec<NExpr>),
    Product(Vec<NExpr>),
}

impl NExpr {
    pub fn singleton(attr: &str, value: &str) -> NExpr {
        NExpr::Singleton(Attr::from(attr), Value::new(value))
    }

    pub fn union(mut children: Vec<NExpr>) -> NExpr {
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            NExpr::Union(children)
        }
    }

    pub fn product(mut children: Vec<NExpr>) -> NExpr {
        match children.len() {
            0 => NExpr::Nullary,
            1 => children.pop().unwrap(),
            _ => NExpr::Product(children),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            NExpr::Empty | NExpr::Nullary | NExpr::Singleton(..) | NExpr::Ref(_) => 1,
            NExpr::Union(cs) | NExpr::Product(cs) => {
                cs.len().saturating_sub(1) + cs.iter().map(NExpr::size).sum::<usize>()
            }
        }
    }

    fn for_each_ref<'a>(&'a self, f: &mut impl FnMut(&'a Name)) {
        match self {
            NExpr::Ref(n) => f(n),
            NExpr::Union(cs) | NExpr::Product(cs) => cs.iter().for_each(|c| c.for_each_ref(f)),
            _ => {}
        }
    }
}

impl fmt::Display for NExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, cs: &[NExpr], op: &str) -> fmt::Result {
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
            NExpr::Empty => f.write_str("∅"),
            NExpr::Nullary => f.write_str("⟨⟩"),
            NExpr::Singleton(a, v) => write!(f, "⟨{a}:{v}⟩"),
            NExpr::Ref(n) => write!(f, "{n}"),
            NExpr::Union(cs) => join(f, cs, " ∪ "),
            NExpr::Product(cs) => join(f, cs, " × "),
        }
    }
}

impl fmt::Debug for NExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NDefinition {
    pub name: Name,
    pub body: NExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NfrError {
    #[error("no definitions")]
    NoDefinitions,
    #[error("duplicate definition of {0}")]
    DuplicateName(Name),
    #[error("unknown name {0}")]
    UnknownName(Name),
    #[error("{from} references {to}, which is not defined after it")]
    BackwardReference { from: Name, to: Name },
    #[error("union children in {0} have different attribute sets")]
    SchemaMismatch(Name),
    #[error("product children in {0} share attributes")]
    OverlappingAttributes(Name),
    #[error("empty set inside a union in {0}")]
    EmptyInUnion(Name),
    #[error("tuples have different attribute sets")]
    HeterogeneousSchemas,
    #[error("attribute {0} is not in the attribute order")]
    UnorderedAttribute(Attr),
    #[error("relation does not have disjoint positions")]
    NotDisjoint,
    #[error("operation requires a uniform-length relation")]
    VariableLength,
    #[error(transparent)]
    Limit(#[from] ResourceLimit),
}

/// A validated named factorized relation.
#[derive(Clone, PartialEq, Eq)]
pub struct Nfr {
    defs: Vec<NDefinition>,
    index: BTreeMap<Name, usize>,
    schemas: Vec<BTreeSet<Attr>>,
}

impl fmt::Debug for Nfr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.defs {
            writeln!(f, "{} := {}", d.name, d.body)?;
        }
        Ok(())
    }
}

impl Nfr {
    /// Same forward-reference discipline as unnamed relations; unions need
    /// equal attribute sets and products disjoint ones.
    pub fn validate(defs: Vec<NDefinition>) -> Result<Nfr, NfrError> {
        if defs.is_empty() {
            return Err(NfrError::NoDefinitions);
        }
        let mut index = BTreeMap::new();
        for (i, d) in defs.iter().enumerate() {
            if index.insert(d.name.clone(), i).is_some() {
                return Err(NfrError::DuplicateName(d.name.clone()));
            }
        }
        for (i, d) in defs.iter().enumerate() {
            let mut err = None;
            d.body.for_each_ref(&mut |r| {
                if err.is_some() {
                    return;
                }
                match index.get(r) {
                    None => err = Some(NfrError::UnknownName(r.clone())),
                    Some(&j) if j <= i => {
                        err = Some(NfrError::BackwardReference {
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
        let mut schemas = vec![BTreeSet::new(); defs.len()];
        for i in (0..defs.len()).rev() {
            schemas[i] = schema_of(&defs[i].name, &defs[i].body, &index, &schemas)?;
        }
        Ok(Nfr {
            defs,
            index,
            schemas,
        })
    }

    pub fn defs(&self) -> &[NDefinition] {
        &self.defs
    }

    pub fn start(&self) -> &Name {
        &self.defs[0].name
    }

    pub fn schema(&self) -> &BTreeSet<Attr> {
        &self.schemas[0]
    }

    pub fn size(&self) -> usize {
        self.defs.iter().map(|d| d.body.size()).sum()
    }
}

fn schema_of(
    name: &Name,
    e: &NExpr,
    index: &BTreeMap<Name, usize>,
    schemas: &[BTreeSet<Attr>],
) -> Result<BTreeSet<Attr>, NfrError> {
    Ok(match e {
        NExpr::Empty | NExpr::Nullary => BTreeSet::new(),
        NExpr::Singleton(a, _) => BTreeSet::from([a.clone()]),
        NExpr::Ref(n) => schemas[index[n]].clone(),
        NExpr::Union(cs) => {
            if cs.iter().any(|c| matches!(c, NExpr::Empty)) {
                return Err(NfrError::EmptyInUnion(name.clone()));
            }
            let mut it = cs.iter();
            let first = schema_of(name, it.next().unwrap(), index, schemas)?;
            for c in it {
                if schema_of(name, c, index, schemas)? != first {
                    return Err(NfrError::SchemaMismatch(name.clone()));
                }
            }
            first
        }
        NExpr::Product(cs) => {
            let mut acc = BTreeSet::new();
            for c in cs {
                for a in schema_of(name, c, index, schemas)? {
                    if !acc.insert(a) {
                        return Err(NfrError::OverlappingAttributes(name.clone()));
                    }
                }
            }
            acc
        }
    })
}

pub fn evaluate_nfr(f: &Nfr, limits: &Limits) -> Result<BTreeSet<NamedTuple>, NfrError> {
    let mut memo: Vec<Option<BTreeSet<NamedTuple>>> = vec![None; f.defs.len()];
    for i in (0..f.defs.len()).rev() {
        memo[i] = Some(eval(f, &f.defs[i].body, &memo, limits)?);
    }
    Ok(memo[0].take().unwrap())
}

fn eval(
    f: &Nfr,
    e: &NExpr,
    memo: &[Option<BTreeSet<NamedTuple>>],
    limits: &Limits,
) -> Result<BTreeSet<NamedTuple>, NfrError> {
    Ok(match e {
        NExpr::Empty => BTreeSet::new(),
        NExpr::Nullary => BTreeSet::from([NamedTuple::new()]),
        NExpr::Singleton(a, v) => {
            BTreeSet::from([NamedTuple(BTreeMap::from([(a.clone(), *v)]))])
        }
        NExpr::Ref(n) => memo[f.index[n]].clone().unwrap(),
        NExpr::Union(cs) => {
            let mut out = BTreeSet::new();
            for c in cs {
                out.extend(eval(f, c, memo, limits)?);
                limits.check_tuples(out.len())?;
            }
            out
        }
        NExpr::Product(cs) => {
            let mut acc = BTreeSet::from([NamedTuple::new()]);
            for c in cs {
                let r = eval(f, c, memo, limits)?;
                limits.check_tuples(acc.len().saturating_mul(r.len()))?;
                acc = acc
                    .iter()
                    .flat_map(|a| r.iter().map(move |b| a.merge(b)))
                    .collect();
            }
            acc
        }
    })
}

/// A total order over attribute names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttributeOrder {
    order: Vec<Attr>,
    rank: BTreeMap<Attr, usize>,
}

impl AttributeOrder {
    pub fn new(order: Vec<Attr>) -> Self {
        let rank = order.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        AttributeOrder { order, rank }
    }

    /// Lexicographic order on the given attributes.
    pub fn lexicographic<'a>(attrs: impl IntoIterator<Item = &'a Attr>) -> Self {
        let set: BTreeSet<Attr> = attrs.into_iter().cloned().collect();
        AttributeOrder::new(set.into_iter().collect())
    }

    /// `P0 < P1 < … < P(k−1)`.
    pub fn positional(k: usize) -> Self {
        AttributeOrder::new((0..k).map(Attr::positional).collect())
    }

    pub fn attrs(&self) -> &[Attr] {
        &self.order
    }

    pub fn rank(&self, a: &Attr) -> Option<usize> {
        self.rank.get(a).copied()
    }
}

/// Converts named tuples to ordered tuples by sorting bindings along `ord`.
pub fn unnamed_of(
    tuples: &BTreeSet<NamedTuple>,
    ord: &AttributeOrder,
) -> Result<Relation, NfrError> {
    let mut it = tuples.iter();
    let Some(first) = it.next() else {
        return Ok(Relation::uniform(0));
    };
    let schema = first.schema();
    if it.any(|t| t.0.keys().ne(schema.iter())) {
        return Err(NfrError::HeterogeneousSchemas);
    }
    let mut attrs: Vec<(usize, &Attr)> = Vec::with_capacity(schema.len());
    for a in &schema {
        let r = ord
            .rank(a)
            .ok_or_else(|| NfrError::UnorderedAttribute(a.clone()))?;
        attrs.push((r, a));
    }
    attrs.sort();
    let mut rel = Relation::uniform(attrs.len());
    for t in tuples {
        rel.insert(Tuple::new(attrs.iter().map(|(_, a)| t.0[*a]).collect()));
    }
    Ok(rel)
}

/// Result of converting an unnamed relation with disjoint positions.
#[derive(Clone, Debug)]
pub struct NfrConversion {
    pub nfr: Nfr,
    /// Names that occur at several global offsets and were cloned per offset.
    pub cloned: Vec<Name>,
}

/// Assigns attribute `P_c` to every value in global column `c`. A name that
/// occurs at several global offsets is cloned once per offset, which grows
/// the output; the cloned names are reported.
pub fn nfr_from_disjoint_ufr(f: &Ufr) -> Result<NfrConversion, NfrError> {
    match ufr::has_disjoint_positions(f) {
        Ok(true) => {}
        Ok(false) => return Err(NfrError::NotDisjoint),
        Err(UfrError::VariableLength) => return Err(NfrError::VariableLength),
        Err(e) => unreachable!("{e}"),
    }
    if f.discipline() != Discipline::Uniform {
        return Err(NfrError::VariableLength);
    }
    let n = f.defs().len();
    // every syntactic occurrence counts here, productive or not, so that all
    // references in the output resolve
    let mut offsets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    offsets[0].insert(0);
    for i in 0..n {
        if offsets[i].is_empty() {
            // unreachable definitions are attributed from column 0
            offsets[i].insert(0);
        }
        let here: Vec<usize> = offsets[i].iter().copied().collect();
        for o in here {
            collect_offsets(f, &f.defs()[i].body, o, &mut offsets);
        }
    }
    let cloned: Vec<Name> = (0..n)
        .filter(|&i| offsets[i].len() > 1)
        .map(|i| f.defs()[i].name.clone())
        .collect();
    let name_at = |i: usize, o: usize| -> Name {
        if offsets[i].len() > 1 {
            Name::new(format!("{}@{}", f.defs()[i].name, o))
        } else {
            f.defs()[i].name.clone()
        }
    };
    let mut defs = Vec::new();
    for i in 0..n {
        for &o in &offsets[i] {
            defs.push(NDefinition {
                name: name_at(i, o),
                body: translate(f, &f.defs()[i].body, o, &name_at),
            });
        }
    }
    Ok(NfrConversion {
        nfr: Nfr::validate(defs)?,
        cloned,
    })
}

fn collect_offsets(f: &Ufr, e: &Expr, at: usize, offsets: &mut [BTreeSet<usize>]) {
    match e {
        Expr::Ref(n) => {
            offsets[f.index_of(n).unwrap()].insert(at);
        }
        Expr::Union(cs) => cs.iter().for_each(|c| collect_offsets(f, c, at, offsets)),
        Expr::Product(cs) => {
            let mut pos = at;
            for c in cs {
                collect_offsets(f, c, pos, offsets);
                pos += f.expr_arity(c).unwrap();
            }
        }
        _ => {}
    }
}

fn translate(f: &Ufr, e: &Expr, at: usize, name_at: &impl Fn(usize, usize) -> Name) -> NExpr {
    match e {
        Expr::Empty => NExpr::Empty,
        Expr::Nullary => NExpr::Nullary,
        Expr::Singleton(v) => NExpr::Singleton(Attr::positional(at), *v),
        Expr::Ref(n) => NExpr::Ref(name_at(f.index_of(n).unwrap(), at)),
        Expr::Union(cs) => NExpr::Union(cs.iter().map(|c| translate(f, c, at, name_at)).collect()),
        Expr::Product(cs) => {
            let mut pos = at;
            let mut out = Vec::with_capacity(cs.len());
            for c in cs {
                out.push(translate(f, c, pos, name_at));
                pos += f.expr_arity(c).unwrap();
            }
            NExpr::Product(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::samples;
    use crate::ufr::{DisciplineMode, RawUfr};

    fn def(name: &str, body: NExpr) -> NDefinition {
        NDefinition {
            name: Name::from(name),
            body,
        }
    }

    #[test]
    fn evaluate_small_nfr() {
        let f = Nfr::validate(vec![def(
            "S",
            NExpr::union(vec![
                NExpr::product(vec![NExpr::singleton("A", "0"), NExpr::singleton("B", "0")]),
                NExpr::product(vec![NExpr::singleton("A", "1"), NExpr::singleton("B", "1")]),
            ]),
        )])
        .unwrap();
        let r = evaluate_nfr(&f, &Limits::default()).unwrap();
        assert_eq!(
            r,
            BTreeSet::from([
                NamedTuple::from_pairs([("A", "0"), ("B", "0")]),
                NamedTuple::from_pairs([("A", "1"), ("B", "1")]),
            ])
        );
        let unit = Nfr::validate(vec![def("S", NExpr::Nullary)]).unwrap();
        assert_eq!(
            evaluate_nfr(&unit, &Limits::default()).unwrap(),
            BTreeSet::from([NamedTuple::new()])
        );
    }

    #[test]
    fn schema_errors() {
        let mismatch = Nfr::validate(vec![def(
            "S",
            NExpr::union(vec![NExpr::singleton("A", "0"), NExpr::singleton("B", "0")]),
        )]);
        assert!(matches!(mismatch, Err(NfrError::SchemaMismatch(_))));
        let overlap = Nfr::validate(vec![def(
            "S",
            NExpr::product(vec![NExpr::singleton("A", "0"), NExpr::singleton("A", "1")]),
        )]);
        assert!(matches!(overlap, Err(NfrError::OverlappingAttributes(_))));
    }

    #[test]
    fn unnamed_conversion() {
        let ord = AttributeOrder::new(vec![Attr::from("A"), Attr::from("B")]);
        let r = BTreeSet::from([NamedTuple::from_pairs([("B", "2"), ("A", "1")])]);
        let u = unnamed_of(&r, &ord).unwrap();
        assert!(u.same_tuples(&Relation::from_tuples([Tuple::from_texts(&["1", "2"])])));

        let bad = AttributeOrder::new(vec![Attr::from("A")]);
        assert_eq!(
            unnamed_of(&r, &bad).unwrap_err(),
            NfrError::UnorderedAttribute(Attr::from("B"))
        );
        let hetero = BTreeSet::from([
            NamedTuple::from_pairs([("A", "1")]),
            NamedTuple::from_pairs([("B", "1")]),
        ]);
        assert_eq!(
            unnamed_of(&hetero, &ord).unwrap_err(),
            NfrError::HeterogeneousSchemas
        );
    }

    #[test]
    fn equality_family_n2() {
        let (nfr, _) = families::equality_relation(2);
        let named = evaluate_nfr(&nfr, &Limits::default()).unwrap();
        assert_eq!(named.len(), 4);
        let ord = AttributeOrder::new(
            ["A1", "A2", "B1", "B2"].iter().map(|a| Attr::from(*a)).collect(),
        );
        let u = unnamed_of(&named, &ord).unwrap();
        let expected = Relation::from_tuples([
            Tuple::from_texts(&["0", "0", "0", "0"]),
            Tuple::from_texts(&["0", "1", "0", "1"]),
            Tuple::from_texts(&["1", "0", "1", "0"]),
            Tuple::from_texts(&["1", "1", "1", "1"]),
        ]);
        assert!(u.same_tuples(&expected));
    }

    #[test]
    fn positional_conversion() {
        let ab = Ufr::validate(
            RawUfr::new().def(
                "S",
                Expr::product(vec![Expr::singleton("a"), Expr::singleton("b")]),
            ),
            DisciplineMode::Uniform,
        )
        .unwrap();
        let conv = nfr_from_disjoint_ufr(&ab).unwrap();
        assert_eq!(
            conv.nfr.defs()[0].body,
            NExpr::product(vec![NExpr::singleton("P0", "a"), NExpr::singleton("P1", "b")])
        );
        assert!(conv.cloned.is_empty());

        let ex = samples::example21();
        let conv = nfr_from_disjoint_ufr(&ex).unwrap();
        let named = evaluate_nfr(&conv.nfr, &Limits::default()).unwrap();
        let back = unnamed_of(&named, &AttributeOrder::positional(4)).unwrap();
        let direct = ufr::evaluate(&ex, None, &Limits::default()).unwrap();
        assert!(back.same_tuples(&direct));
        assert_eq!(conv.nfr.size(), ex.size());

        assert_eq!(
            nfr_from_disjoint_ufr(&families::power_tuples(1)).unwrap_err(),
            NfrError::NotDisjoint
        );
    }

    #[test]
    fn multi_offset_names_are_cloned() {
        // X occurs at offsets 0 and 1, with distinct values per column
        let f = Ufr::validate(
            RawUfr::new()
                .def(
                    "S",
                    Expr::union(vec![
                        Expr::product(vec![Expr::reference("X"), Expr::singleton("b")]),
                        Expr::product(vec![Expr::singleton("c"), Expr::reference("Y")]),
                    ]),
                )
                .def("Y", Expr::reference("X"))
                .def("X", Expr::Nullary),
            DisciplineMode::Uniform,
        );
        // X has arity 0, so arities differ: 1 vs 1. Fine, but X never holds
        // values, so cloning only renames.
        let f = f.unwrap();
        let conv = nfr_from_disjoint_ufr(&f).unwrap();
        assert_eq!(conv.cloned, vec![Name::from("X")]);
        let named = evaluate_nfr(&conv.nfr, &Limits::default()).unwrap();
        let back = unnamed_of(&named, &AttributeOrder::positional(1)).unwrap();
        assert!(back.same_tuples(&ufr::evaluate(&f, None, &Limits::default()).unwrap()));
    }
}
