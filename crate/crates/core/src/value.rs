//! Interned values, ordered tuples and finite relations.
//!
//! Values are interned once per process into a global table, so equality and
//! hashing are integer operations. Rendering goes back through the table and
//! always yields the original text.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use spin::{Lazy, Mutex};

struct Interner {
    texts: Vec<&'static str>,
    ids: BTreeMap<&'static str, u32>,
}

static INTERNER: Lazy<Mutex<Interner>> = Lazy::new(|| {
    Mutex::new(Interner {
        texts: Vec::new(),
        ids: BTreeMap::new(),
    })
});

/// An atomic data value. Two values are equal iff their texts are equal.
///
/// The derived ordering follows interning order, which depends on the order in
/// which texts were first seen by the process. Use [`Value::text`] when an
/// order must be reproducible across runs.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(u32);

impl Value {
    /// Least value in the id order, for range queries.
    pub(crate) const MIN: Value = Value(0);

    pub fn new(text: &str) -> Self {
        let mut interner = INTERNER.lock();
        if let Some(&id) = interner.ids.get(text) {
            return Value(id);
        }
        let id = interner.texts.len() as u32;
        let leaked: &'static str = Box::leak(String::from(text).into_boxed_str());
        interner.texts.push(leaked);
        interner.ids.insert(leaked, id);
        Value(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn text(self) -> &'static str {
        INTERNER.lock().texts[self.0 as usize]
    }

    /// The position-annotated value `(b,i)` used by the marking constructions.
    pub fn marked(self, position: usize) -> Value {
        Value::new(&format!("({},{})", self.text(), position))
    }

    /// Inverse of [`Value::marked`]. Returns `None` for values that do not
    /// have the `(b,i)` shape.
    pub fn unmarked(self) -> Option<(Value, usize)> {
        let text = self.text();
        let inner = text.strip_prefix('(')?.strip_suffix(')')?;
        let (symbol, position) = inner.rsplit_once(',')?;
        let position = position.parse().ok()?;
        Some((Value::new(symbol), position))
    }
}

impl From<&str> for Value {
    fn from(text: &str) -> Self {
        Value::new(text)
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.text())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text())
    }
}

/// A word over the value alphabet. Tuples and words are the same sequence
/// read two ways.
pub type Word = Vec<Value>;

/// An ordered database tuple.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Tuple(Vec<Value>);

impl Tuple {
    pub fn new(values: Vec<Value>) -> Self {
        Tuple(values)
    }

    pub fn empty() -> Self {
        Tuple(Vec::new())
    }

    pub fn from_texts<S: AsRef<str>>(texts: &[S]) -> Self {
        Tuple(texts.iter().map(|t| Value::new(t.as_ref())).collect())
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Value> {
        self.0
    }

    pub fn concat(&self, other: &Tuple) -> Tuple {
        let mut values = Vec::with_capacity(self.0.len() + other.0.len());
        values.extend_from_slice(&self.0);
        values.extend_from_slice(&other.0);
        Tuple(values)
    }

    pub fn texts(&self) -> Vec<&'static str> {
        self.0.iter().map(|v| v.text()).collect()
    }
}

impl fmt::Debug for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(v.text())?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Discipline {
    /// All tuples share one arity.
    Uniform,
    /// Tuples may have different arities.
    Variable,
}

/// A finite set of tuples.
///
/// A uniform relation carries its arity even when empty; inserting a tuple of
/// another arity is a logic error and panics.
#[derive(Clone, PartialEq, Eq)]
pub struct Relation {
    tuples: BTreeSet<Tuple>,
    arity: Option<usize>,
}

impl Relation {
    pub fn uniform(arity: usize) -> Self {
        Relation {
            tuples: BTreeSet::new(),
            arity: Some(arity),
        }
    }

    pub fn variable() -> Self {
        Relation {
            tuples: BTreeSet::new(),
            arity: None,
        }
    }

    /// Builds a relation from tuples, uniform iff all tuples share an arity.
    /// An empty input yields an empty variable-length relation.
    pub fn from_tuples<I: IntoIterator<Item = Tuple>>(tuples: I) -> Self {
        let tuples: BTreeSet<Tuple> = tuples.into_iter().collect();
        let mut arities = tuples.iter().map(Tuple::arity);
        let arity = match arities.next() {
            Some(first) if arities.all(|a| a == first) => Some(first),
            _ => None,
        };
        Relation { tuples, arity }
    }

    pub fn insert(&mut self, tuple: Tuple) -> bool {
        if let Some(k) = self.arity {
            assert_eq!(k, tuple.arity(), "tuple arity does not match relation");
        }
        self.tuples.insert(tuple)
    }

    pub fn contains(&self, tuple: &Tuple) -> bool {
        self.tuples.contains(tuple)
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn arity(&self) -> Option<usize> {
        self.arity
    }

    pub fn discipline(&self) -> Discipline {
        if self.arity.is_some() {
            Discipline::Uniform
        } else {
            Discipline::Variable
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tuple> {
        self.tuples.iter()
    }

    pub fn tuples(&self) -> &BTreeSet<Tuple> {
        &self.tuples
    }

    pub fn into_tuples(self) -> BTreeSet<Tuple> {
        self.tuples
    }

    /// Same tuple set, ignoring the declared arity of empty relations.
    pub fn same_tuples(&self, other: &Relation) -> bool {
        self.tuples == other.tuples
    }

    /// Tuples sorted by their rendered text, column by column.
    pub fn sorted_by_text(&self) -> Vec<Tuple> {
        let mut rows: Vec<Tuple> = self.tuples.iter().cloned().collect();
        rows.sort_by(|a, b| a.texts().cmp(&b.texts()));
        rows
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.sorted_by_text()).finish()
    }
}

impl<'a> IntoIterator for &'a Relation {
    type Item = &'a Tuple;
    type IntoIter = alloc::collections::btree_set::Iter<'a, Tuple>;

    fn into_iter(self) -> Self::IntoIter {
        self.tuples.iter()
    }
}

/// `word(T)`: every tuple read as a word over the value alphabet.
pub fn words_of(relation: &Relation) -> BTreeSet<Word> {
    relation.iter().map(|t| t.values().to_vec()).collect()
}

/// Inverse of [`words_of`].
pub fn tuples_of<'a, I: IntoIterator<Item = &'a Word>>(words: I) -> Relation {
    Relation::from_tuples(words.into_iter().map(|w| Tuple::new(w.clone())))
}

/// Renders a word as `v1·v2·…`, or `ε` when empty.
pub fn render_word(word: &[Value]) -> String {
    if word.is_empty() {
        return String::from("ε");
    }
    let parts: Vec<&str> = word.iter().map(|v| v.text()).collect();
    parts.join("·")
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn interning_is_injective() {
        let a = Value::new("flute");
        let b = Value::new("flute");
        let c = Value::new("harp");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.text(), "flute");
    }

    #[test]
    fn marked_values_round_trip() {
        let a = Value::new("a");
        let m = a.marked(3);
        assert_eq!(m.text(), "(a,3)");
        assert_eq!(m.unmarked(), Some((a, 3)));
        assert_eq!(a.unmarked(), None);
    }

    #[test]
    fn words_and_tuples() {
        let r = Relation::from_tuples([Tuple::from_texts(&["c1", "flute"])]);
        let words = words_of(&r);
        assert_eq!(render_word(words.iter().next().unwrap()), "c1·flute");

        let unit = Relation::from_tuples([Tuple::empty()]);
        assert_eq!(words_of(&unit), BTreeSet::from([vec![]]));
        assert_eq!(render_word(&[]), "ε");
        assert!(tuples_of(&words_of(&r)).same_tuples(&r));
    }

    #[test]
    fn from_tuples_infers_discipline() {
        let u = Relation::from_tuples([Tuple::from_texts(&["a"]), Tuple::from_texts(&["b"])]);
        assert_eq!(u.arity(), Some(1));
        let v = Relation::from_tuples([Tuple::from_texts(&["a"]), Tuple::from_texts(&["b", "c"])]);
        assert_eq!(v.discipline(), Discipline::Variable);
    }

    #[test]
    #[should_panic]
    fn uniform_insert_checks_arity() {
        let mut r = Relation::uniform(2);
        r.insert(Tuple::from_texts(&["a"]));
    }
}
