//! Hard-instance families, the marking construction for grammars, and the
//! representation-size measurements built on them.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::RangeInclusive;

use num_bigint::BigUint;

use crate::algorithms::{count_tuples, AlgorithmError};
use crate::automata::{
    self, glushkov, mark_automaton, minimize_dfa, subset_construction, AutomataError, Dfa, Nfa,
};
use crate::grammar::{
    beta, beta_inv, ecfg_to_regex, length_sets, trim, Ecfg, GrammarError, Regex, Symbol,
};
use crate::limits::{Limits, ResourceLimit};
use crate::name::Name;
use crate::nfr::{Attr, NDefinition, NExpr, Nfr};
use crate::ufr::{self, Definition, DisciplineMode, Expr, RawUfr, Ufr};
use crate::value::{Value, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    PowerTuples,
    EqualityRelation,
    L1,
    L2,
    L3,
    L4,
    L5,
    L6,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::PowerTuples,
        Family::EqualityRelation,
        Family::L1,
        Family::L2,
        Family::L3,
        Family::L4,
        Family::L5,
        Family::L6,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::PowerTuples => "power",
            Family::EqualityRelation => "equality",
            Family::L1 => "L1",
            Family::L2 => "L2",
            Family::L3 => "L3",
            Family::L4 => "L4",
            Family::L5 => "L5",
            Family::L6 => "L6",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s))
    }

    /// The model in which the family is generated.
    pub fn model(self) -> Model {
        match self {
            Family::PowerTuples | Family::EqualityRelation | Family::L1 | Family::L2 => Model::Cfg,
            Family::L3 => Model::Ucfg,
            Family::L4 => Model::Nfa,
            Family::L5 => Model::Ufa,
            Family::L6 => Model::Dfa,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FamilyId {
    pub family: Family,
    pub marked: bool,
}

impl FamilyId {
    pub fn plain(family: Family) -> Self {
        FamilyId { family, marked: false }
    }

    pub fn marked(family: Family) -> Self {
        FamilyId { family, marked: true }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.marked {
            write!(f, "mark({})", self.family.as_str())
        } else {
            f.write_str(self.family.as_str())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Model {
    Cfg,
    Ucfg,
    Nfa,
    Ufa,
    Dfa,
    Set,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Cfg => "CFG",
            Model::Ucfg => "UCFG",
            Model::Nfa => "NFA",
            Model::Ufa => "UFA",
            Model::Dfa => "DFA",
            Model::Set => "Set",
        }
    }
}

/// A generated instance.
#[derive(Clone, Debug)]
pub enum Instance {
    Ufr(Ufr),
    Grammar(Ecfg),
    Automaton(Nfa),
    Deterministic(Dfa),
}

pub fn gen_family(id: FamilyId, n: usize) -> Result<Instance, GrammarError> {
    assert!(n >= 1, "family parameter must be at least 1");
    let plain = match id.family {
        Family::PowerTuples => Instance::Ufr(power_tuples(n)),
        Family::EqualityRelation => Instance::Ufr(equality_relation(n).1),
        Family::L1 => Instance::Grammar(g1(n)),
        Family::L2 => Instance::Grammar(g2(n)),
        Family::L3 => Instance::Grammar(g3(n)),
        Family::L4 => Instance::Automaton(l4_nfa(n)),
        Family::L5 => Instance::Automaton(l5_ufa(n)),
        Family::L6 => Instance::Deterministic(l6_dfa(n)),
    };
    if !id.marked {
        return Ok(plain);
    }
    Ok(match plain {
        Instance::Ufr(f) => Instance::Ufr(beta_inv(&mark_grammar(&beta(&f))?)?),
        Instance::Grammar(g) => Instance::Grammar(mark_grammar(&g)?),
        Instance::Automaton(a) => Instance::Automaton(mark_nfa(&a)),
        Instance::Deterministic(d) => Instance::Automaton(mark_nfa(&d.to_nfa())),
    })
}

fn mark_nfa(a: &Nfa) -> Nfa {
    mark_automaton(a).expect("family automata are acyclic").nfa
}

fn v(s: &str) -> Value {
    Value::new(s)
}

fn name(base: &str, i: usize) -> Name {
    Name::new(format!("{base}{i}"))
}

/// `N_i := N_{i+1} × N_{i+1}` for `i = 1..n`, `N_{n+1} := ⟨0⟩ ∪ ⟨1⟩`: all
/// `2^n`-ary tuples over `{0, 1}`.
pub fn power_tuples(n: usize) -> Ufr {
    let mut raw = RawUfr::new();
    for i in 1..=n {
        let next = name("N", i + 1);
        raw.defs.push(Definition {
            name: name("N", i),
            body: Expr::Product(vec![Expr::Ref(next.clone()), Expr::Ref(next)]),
        });
    }
    raw.defs.push(Definition {
        name: name("N", n + 1),
        body: Expr::Union(vec![Expr::singleton("0"), Expr::singleton("1")]),
    });
    Ufr::validate(raw, DisciplineMode::Uniform).expect("power family is valid")
}

/// The equality relation over `A1…An, B1…Bn` (`Ai = Bi` for all `i`, values
/// in `{0, 1}`): a chained named representation of size linear in `n`, and
/// the flat unnamed union of its `2^n` tuples.
pub fn equality_relation(n: usize) -> (Nfr, Ufr) {
    let mut defs = Vec::new();
    for i in 1..=n {
        let alt = |b: &str| {
            let mut parts = vec![
                NExpr::Singleton(Attr::new(format!("A{i}")), v(b)),
                NExpr::Singleton(Attr::new(format!("B{i}")), v(b)),
            ];
            if i < n {
                parts.push(NExpr::Ref(name("S", i + 1)));
            }
            NExpr::Product(parts)
        };
        defs.push(NDefinition {
            name: name("S", i),
            body: NExpr::Union(vec![alt("0"), alt("1")]),
        });
    }
    let nfr = Nfr::validate(defs).expect("equality family is valid");

    let mut alts = Vec::with_capacity(1 << n);
    for bits in 0..1usize << n {
        let half: Vec<Expr> = (0..n)
            .map(|i| Expr::singleton(if bits >> (n - 1 - i) & 1 == 1 { "1" } else { "0" }))
            .collect();
        let mut parts = half.clone();
        parts.extend(half);
        alts.push(Expr::Product(parts));
    }
    let ufr = Ufr::validate(
        RawUfr::new().def("S", Expr::union(alts)),
        DisciplineMode::Uniform,
    )
    .expect("equality family is valid");
    (nfr, ufr)
}

fn nt(base: &str, i: usize) -> Regex {
    Regex::Sym(Symbol::N(name(base, i)))
}

fn cat(parts: Vec<Regex>) -> Regex {
    Regex::Concat(parts)
}

fn b_rules(n: usize) -> Vec<(Name, Regex)> {
    let mut rules = Vec::new();
    for i in (1..=n).rev() {
        rules.push((name("B", i), cat(vec![nt("B", i - 1), nt("B", i - 1)])));
    }
    rules.push((name("B", 0), Regex::Union(vec![Regex::t("a"), Regex::t("b")])));
    rules
}

fn a_chain(n: usize, a0: Regex) -> Vec<(Name, Regex)> {
    let mut rules = Vec::new();
    for i in (1..=n).rev() {
        rules.push((
            name("A", i),
            Regex::Union(vec![
                cat(vec![nt("B", i - 1), nt("A", i - 1)]),
                cat(vec![nt("A", i - 1), nt("B", i - 1)]),
            ]),
        ));
    }
    rules.push((name("A", 0), a0));
    rules
}

/// Words of length `2^{n+1} + 2` over `{a, b}` with two `a`s at distance
/// `2^n + 1`.
pub fn g1(n: usize) -> Ecfg {
    let a = Regex::t("a");
    let a0 = Regex::Union(vec![
        cat(vec![nt("B", 0), a.clone(), nt("B", n), a.clone()]),
        cat(vec![a.clone(), nt("B", n), a, nt("B", 0)]),
    ]);
    let mut rules = a_chain(n, a0);
    rules.extend(b_rules(n));
    Ecfg::new(name("A", n), rules).expect("G1 is valid")
}

/// Words of length `2^{n+1} + 1` with a single `c` preceded, `2^n + 1`
/// positions earlier, by an `a`.
pub fn g2(n: usize) -> Ecfg {
    let a0 = cat(vec![Regex::t("a"), nt("B", n), Regex::t("c")]);
    let mut rules = a_chain(n, a0);
    rules.extend(b_rules(n));
    Ecfg::new(name("A", n), rules).expect("G2 is valid")
}

/// `{w·rev(w) : w ∈ {a,b}^n}`.
pub fn g3(n: usize) -> Ecfg {
    let (a, b) = (Regex::t("a"), Regex::t("b"));
    let mut rules = Vec::new();
    for i in (2..=n).rev() {
        rules.push((
            name("A", i),
            Regex::Union(vec![
                cat(vec![a.clone(), nt("A", i - 1), a.clone()]),
                cat(vec![b.clone(), nt("A", i - 1), b.clone()]),
            ]),
        ));
    }
    rules.push((
        name("A", 1),
        Regex::Union(vec![cat(vec![a.clone(), a]), cat(vec![b.clone(), b])]),
    ));
    Ecfg::new(name("A", n), rules).expect("G3 is valid")
}

/// Automaton shared by the L4 and L5 families: read `i` letters, guess an
/// `a` at position `i`, read `n` letters, read `second` at position
/// `i + n + 1`, then read the remaining `n − i` letters. The prefix and the
/// distance phase both have to be tracked, so the distance phase has
/// `(n + 1)²` states.
fn guess_automaton(n: usize, second: &str, filler: &[&str]) -> Nfa {
    let mut m = Nfa::new();
    let pre: Vec<usize> = (0..=n).map(|j| m.add_state(name("pre", j))).collect();
    let mid: Vec<Vec<usize>> = (0..=n)
        .map(|k| {
            (0..=n)
                .map(|d| m.add_state(Name::new(format!("mid{k}_{d}"))))
                .collect()
        })
        .collect();
    let post: Vec<usize> = (0..=n).map(|r| m.add_state(name("post", r))).collect();
    let fill: Vec<Value> = filler.iter().map(|s| v(s)).collect();
    m.set_initial(pre[0]);
    m.set_accepting(post[0]);
    for j in 0..n {
        for &c in &fill {
            m.add_transition(pre[j], c, pre[j + 1]);
        }
    }
    for k in 0..=n {
        m.add_transition(pre[k], v("a"), mid[k][0]);
        for d in 0..n {
            for &c in &fill {
                m.add_transition(mid[k][d], c, mid[k][d + 1]);
            }
        }
        m.add_transition(mid[k][n], v(second), post[n - k]);
    }
    for r in 1..=n {
        for &c in &fill {
            m.add_transition(post[r], c, post[r - 1]);
        }
    }
    m
}

/// `{uv : |u| = |v| = n + 1, u_k = v_k = a for some k}`.
pub fn l4_nfa(n: usize) -> Nfa {
    guess_automaton(n, "a", &["a", "b"])
}

/// `(a+b)^i a (a+b)^n c (a+b)^{n−i}` for `0 ≤ i ≤ n`. The single `c` fixes
/// the guess, so the automaton is unambiguous.
pub fn l5_ufa(n: usize) -> Nfa {
    guess_automaton(n, "c", &["a", "b"])
}

/// `(a+b)^n` as a total DFA.
pub fn l6_dfa(n: usize) -> Dfa {
    let mut m = Nfa::new();
    let states: Vec<usize> = (0..=n).map(|i| m.add_state(name("q", i))).collect();
    for i in 0..n {
        m.add_transition(states[i], v("a"), states[i + 1]);
        m.add_transition(states[i], v("b"), states[i + 1]);
    }
    m.set_initial(states[0]);
    m.set_accepting(states[n]);
    subset_construction(&m, &Limits::default()).expect("small automaton")
}

fn is_ab(w: &[Value]) -> bool {
    w.iter().all(|&c| c == v("a") || c == v("b"))
}

pub fn in_l1(n: usize, w: &[Value]) -> bool {
    let d = (1 << n) + 1;
    w.len() == (1 << (n + 1)) + 2
        && is_ab(w)
        && (0..w.len() - d).any(|p| w[p] == v("a") && w[p + d] == v("a"))
}

pub fn in_l2(n: usize, w: &[Value]) -> bool {
    let d = (1 << n) + 1;
    if w.len() != (1 << (n + 1)) + 1 {
        return false;
    }
    let cs: Vec<usize> = (0..w.len()).filter(|&p| w[p] == v("c")).collect();
    let rest_ab = w.iter().all(|&c| c == v("a") || c == v("b") || c == v("c"));
    matches!(cs.as_slice(), [p] if *p >= d && w[p - d] == v("a")) && rest_ab
}

pub fn in_l3(n: usize, w: &[Value]) -> bool {
    w.len() == 2 * n && is_ab(w) && (0..n).all(|i| w[i] == w[2 * n - 1 - i])
}

pub fn in_l4(n: usize, w: &[Value]) -> bool {
    w.len() == 2 * n + 2 && is_ab(w) && (0..=n).any(|k| w[k] == v("a") && w[k + n + 1] == v("a"))
}

pub fn in_l5(n: usize, w: &[Value]) -> bool {
    if w.len() != 2 * n + 2 {
        return false;
    }
    let cs: Vec<usize> = (0..w.len()).filter(|&p| w[p] == v("c")).collect();
    let others_ab = w.iter().all(|&c| c == v("a") || c == v("b") || c == v("c"));
    others_ab && matches!(cs.as_slice(), [p] if *p > n && *p <= 2 * n + 1 && w[p - n - 1] == v("a"))
}

pub fn in_l6(n: usize, w: &[Value]) -> bool {
    w.len() == n && is_ab(w)
}

/// Marks a uniform-length, non-recursive grammar: nonterminal `A` used at
/// offset `i` becomes `(A,i)` and terminal `b` at position `p` becomes
/// `(b,p)`. Only offsets reachable from `(S,0)` are generated.
pub fn mark_grammar(g: &Ecfg) -> Result<Ecfg, GrammarError> {
    if let Some(n) = g.recursion_witness() {
        return Err(GrammarError::Recursive(n));
    }
    let t = trim(&g.rewrite_trivial_stars());
    if let Some((n, _)) = t.rules().iter().find(|(_, e)| e.has_star()) {
        return Err(GrammarError::ContainsStar(n.clone()));
    }
    let lens = length_sets(&t, 2);
    let mut len: BTreeMap<Name, usize> = BTreeMap::new();
    for (n, l) in &lens {
        match l.single() {
            Some(k) => {
                len.insert(n.clone(), k);
            }
            None if t.rule(n) == Some(&Regex::EmptySet) => {
                len.insert(n.clone(), 0);
            }
            None => return Err(GrammarError::NotUniformLength),
        }
    }
    let key = |n: &Name, i: usize| Name::new(format!("({n},{i})"));
    let mut seen: BTreeSet<(Name, usize)> = BTreeSet::new();
    let mut queue = VecDeque::from([(t.start().clone(), 0usize)]);
    seen.insert((t.start().clone(), 0));
    let mut rules = Vec::new();
    while let Some((n, i)) = queue.pop_front() {
        let mut uses = Vec::new();
        let body = mark_regex(t.rule(&n).unwrap(), i, &len, &mut uses);
        for u in uses {
            if seen.insert(u.clone()) {
                queue.push_back(u);
            }
        }
        rules.push((key(&n, i), body));
    }
    Ecfg::new(key(t.start(), 0), rules)
}

fn regex_len(e: &Regex, len: &BTreeMap<Name, usize>) -> usize {
    match e {
        Regex::EmptySet | Regex::Epsilon => 0,
        Regex::Sym(Symbol::T(_)) => 1,
        Regex::Sym(Symbol::N(n)) => len[n],
        Regex::Concat(cs) => cs.iter().map(|c| regex_len(c, len)).sum(),
        Regex::Union(cs) => cs.first().map_or(0, |c| regex_len(c, len)),
        Regex::Star(_) => 0,
    }
}

fn mark_regex(
    e: &Regex,
    at: usize,
    len: &BTreeMap<Name, usize>,
    uses: &mut Vec<(Name, usize)>,
) -> Regex {
    match e {
        Regex::Sym(Symbol::T(b)) => Regex::Sym(Symbol::T(b.marked(at))),
        Regex::Sym(Symbol::N(n)) => {
            uses.push((n.clone(), at));
            Regex::Sym(Symbol::N(Name::new(format!("({n},{at})"))))
        }
        Regex::Concat(cs) => {
            let mut pos = at;
            let mut out = Vec::with_capacity(cs.len());
            for c in cs {
                out.push(mark_regex(c, pos, len, uses));
                pos += regex_len(c, len);
            }
            Regex::Concat(out)
        }
        Regex::Union(cs) => Regex::Union(cs.iter().map(|c| mark_regex(c, at, len, uses)).collect()),
        other => other.clone(),
    }
}

/// Marks every word of a set.
pub fn mark_words(words: &BTreeSet<Word>) -> BTreeSet<Word> {
    words
        .iter()
        .map(|w| w.iter().enumerate().map(|(i, b)| b.marked(i)).collect())
        .collect()
}

/// Uniform word length of the family at `n`, where it has one.
pub fn word_length(family: Family, n: usize) -> usize {
    match family {
        Family::PowerTuples => 1 << n,
        Family::EqualityRelation => 2 * n,
        Family::L1 => (1 << (n + 1)) + 2,
        Family::L2 => (1 << (n + 1)) + 1,
        Family::L3 => 2 * n,
        Family::L4 | Family::L5 => 2 * n + 2,
        Family::L6 => n,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Translation {
    /// Inline to a regular expression, then Glushkov.
    CfgToNfa,
    /// Glushkov (for grammars), subset construction, minimization.
    ToMinDfa,
    /// The represented set of words.
    ToSet,
    /// The marked version of the same model.
    Mark,
}

impl Translation {
    pub const ALL: [Translation; 4] = [
        Translation::CfgToNfa,
        Translation::ToMinDfa,
        Translation::ToSet,
        Translation::Mark,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Translation::CfgToNfa => "cfg-nfa",
            Translation::ToMinDfa => "min-dfa",
            Translation::ToSet => "set",
            Translation::Mark => "mark",
        }
    }

    pub fn parse(s: &str) -> Option<Translation> {
        Translation::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RowStatus {
    /// The asserted bound holds.
    Pass,
    /// The asserted bound fails.
    Fail,
    /// No bound is asserted for this row.
    Recorded,
    /// The row was not computed.
    Skipped(String),
}

impl RowStatus {
    pub fn as_str(&self) -> &str {
        match self {
            RowStatus::Pass => "pass",
            RowStatus::Fail => "fail",
            RowStatus::Recorded => "recorded",
            RowStatus::Skipped(_) => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlowupRow {
    pub family: FamilyId,
    pub n: usize,
    pub source_model: Model,
    pub source_size: BigUint,
    pub target_model: Model,
    pub target_size: Option<BigUint>,
    pub assertion: String,
    pub status: RowStatus,
}

/// Largest `n` for which the true `G1` grammar is generated.
pub const L1_MAX_N: usize = 3;

/// One row per applicable (family, n, translation). Rows whose computation
/// exceeds the limits are kept with status skipped.
pub fn blowup_report(
    families: &[Family],
    ns: RangeInclusive<usize>,
    translations: &[Translation],
    limits: &Limits,
) -> Vec<BlowupRow> {
    let mut rows = Vec::new();
    for &family in families {
        for n in ns.clone() {
            for &tr in translations {
                if let Some(row) = blowup_row(family, n, tr, limits) {
                    rows.push(row);
                }
            }
        }
    }
    rows
}

fn source_size(inst: &Instance) -> BigUint {
    BigUint::from(match inst {
        Instance::Ufr(f) => f.size(),
        Instance::Grammar(g) => g.size(),
        Instance::Automaton(a) => a.num_states(),
        Instance::Deterministic(d) => d.num_states(),
    })
}

fn as_grammar(inst: &Instance) -> Option<Ecfg> {
    match inst {
        Instance::Ufr(f) => Some(beta(f)),
        Instance::Grammar(g) => Some(g.clone()),
        _ => None,
    }
}

fn as_nfa(inst: &Instance) -> Result<Nfa, RowError> {
    Ok(match inst {
        Instance::Automaton(a) => a.clone(),
        Instance::Deterministic(d) => d.to_nfa(),
        other => glushkov(&ecfg_to_regex(&as_grammar(other).unwrap())?)?,
    })
}

enum RowError {
    Limit(ResourceLimit),
    Other(String),
}

impl From<GrammarError> for RowError {
    fn from(e: GrammarError) -> Self {
        match e {
            GrammarError::Limit(l) => RowError::Limit(l),
            other => RowError::Other(other.to_string()),
        }
    }
}

impl From<AutomataError> for RowError {
    fn from(e: AutomataError) -> Self {
        match e {
            AutomataError::Limit(l) => RowError::Limit(l),
            other => RowError::Other(other.to_string()),
        }
    }
}

impl From<ResourceLimit> for RowError {
    fn from(l: ResourceLimit) -> Self {
        RowError::Limit(l)
    }
}

impl From<AlgorithmError> for RowError {
    fn from(e: AlgorithmError) -> Self {
        match e {
            AlgorithmError::Limit(l) => RowError::Limit(l),
            AlgorithmError::Ufr(e) => e.into(),
        }
    }
}

impl From<ufr::UfrError> for RowError {
    fn from(e: ufr::UfrError) -> Self {
        match e {
            ufr::UfrError::Limit(l) => RowError::Limit(l),
            other => RowError::Other(other.to_string()),
        }
    }
}

pub fn blowup_row(family: Family, n: usize, tr: Translation, limits: &Limits) -> Option<BlowupRow> {
    let id = FamilyId::plain(family);
    let source_model = family.model();
    let automaton_family = matches!(family, Family::L4 | Family::L5 | Family::L6);
    let target_model = match tr {
        Translation::CfgToNfa if automaton_family => return None,
        Translation::CfgToNfa => Model::Nfa,
        Translation::ToMinDfa if family == Family::L6 => return None,
        Translation::ToMinDfa => Model::Dfa,
        Translation::ToSet => Model::Set,
        Translation::Mark => source_model,
    };
    let mut row = BlowupRow {
        family: if tr == Translation::Mark { FamilyId::marked(family) } else { id },
        n,
        source_model,
        source_size: BigUint::from(0u32),
        target_model,
        target_size: None,
        assertion: String::new(),
        status: RowStatus::Recorded,
    };
    if family == Family::L1 && n > L1_MAX_N {
        row.status = RowStatus::Skipped(format!(
            "G1 is generated for n ≤ {L1_MAX_N}; L4 is the scaled variant"
        ));
        return Some(row);
    }
    let inst = gen_family(id, n).expect("families are well formed");
    row.source_size = source_size(&inst);
    match measure(family, n, tr, &inst, limits, &mut row) {
        Ok(()) => {}
        Err(RowError::Limit(l)) => row.status = RowStatus::Skipped(l.to_string()),
        Err(RowError::Other(e)) => row.status = RowStatus::Skipped(e),
    }
    Some(row)
}

fn measure(
    family: Family,
    n: usize,
    tr: Translation,
    inst: &Instance,
    limits: &Limits,
    row: &mut BlowupRow,
) -> Result<(), RowError> {
    let check = |ok: bool| if ok { RowStatus::Pass } else { RowStatus::Fail };
    match tr {
        Translation::CfgToNfa => {
            let a = as_nfa(inst)?;
            limits.check_states(a.num_states())?;
            row.target_size = Some(BigUint::from(a.num_states()));
        }
        Translation::ToMinDfa => {
            let d = minimize_dfa(&subset_construction(&as_nfa(inst)?, limits)?);
            let bound = BigUint::from(1u32) << n;
            match family {
                Family::L3 => {
                    row.target_size = Some(BigUint::from(d.num_states()));
                    row.assertion = format!("states ≥ 2^{n}");
                    row.status = check(BigUint::from(d.num_states()) >= bound);
                }
                Family::L5 => {
                    let live = d.num_live_states();
                    row.target_size = Some(BigUint::from(live));
                    row.assertion = format!("non-sink states ≥ 2^{n}");
                    row.status = check(BigUint::from(live) >= bound);
                }
                _ => row.target_size = Some(BigUint::from(d.num_states())),
            }
        }
        Translation::ToSet => {
            // These grammars are unambiguous by construction.
            let unambiguous = matches!(
                family,
                Family::PowerTuples | Family::EqualityRelation | Family::L3
            );
            let count = match inst {
                Instance::Ufr(f) => count_tuples(f, unambiguous, limits)?.count,
                Instance::Grammar(g) => count_tuples(&beta_inv(g)?, unambiguous, limits)?.count,
                Instance::Automaton(a) => {
                    let d = minimize_dfa(&subset_construction(a, limits)?);
                    automata::total_runs(&d.to_nfa())?
                }
                Instance::Deterministic(d) => automata::total_runs(&d.to_nfa())?,
            };
            row.target_size = Some(count);
        }
        Translation::Mark => {
            let marked = gen_family(FamilyId::marked(family), n)?;
            let size = source_size(&marked);
            match inst {
                Instance::Automaton(_) | Instance::Deterministic(_) => {
                    let unmarked = as_nfa(inst)?.trim().num_states();
                    row.assertion = String::from("states unchanged");
                    row.status = check(size == BigUint::from(unmarked));
                }
                _ => {
                    let bound = row.source_size.clone() * BigUint::from(word_length(family, n));
                    row.assertion = String::from("size ≤ wordlen · size");
                    row.status = check(size <= bound);
                }
            }
            row.target_size = Some(size);
        }
    }
    Ok(())
}
