//! Random instances for tests and the command line.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::automata::{is_unambiguous_nfa, Nfa};
use crate::name::Name;
use crate::pmr::{GraphDb, Pmr, RawPmr};
use crate::ufr::{Definition, DisciplineMode, Expr, RawUfr, Ufr};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub max_defs: usize,
    pub max_arity: usize,
    pub max_alternatives: usize,
    /// Values are drawn from `0, 1, …, values − 1`.
    pub values: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_defs: 12,
            max_arity: 5,
            max_alternatives: 3,
            values: 3,
        }
    }
}

fn value<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> Expr {
    Expr::Singleton(Value::new(&format!("{}", rng.random_range(0..cfg.values.max(1)))))
}

/// A product of total arity `k` built from singletons and references to
/// later definitions (`arities[j]` for `j > i`).
fn product_of<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &GenConfig,
    i: usize,
    k: usize,
    arities: &[usize],
) -> Expr {
    if k == 0 {
        return Expr::Nullary;
    }
    let mut parts = Vec::new();
    let mut left = k;
    while left > 0 {
        let candidates: Vec<usize> = (i + 1..arities.len())
            .filter(|&j| arities[j] >= 1 && arities[j] <= left)
            .collect();
        if !candidates.is_empty() && rng.random_bool(0.6) {
            let j = candidates[rng.random_range(0..candidates.len())];
            parts.push(Expr::Ref(name(j)));
            left -= arities[j];
        } else {
            parts.push(value(rng, cfg));
            left -= 1;
        }
    }
    Expr::product(parts)
}

fn name(i: usize) -> Name {
    Name::new(format!("N{i}"))
}

/// A random uniform relation. Definitions only reference later ones, so every
/// name is productive.
pub fn random_ufr<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> Ufr {
    let n = rng.random_range(1..=cfg.max_defs.max(1));
    let arities: Vec<usize> = (0..n).map(|_| rng.random_range(1..=cfg.max_arity.max(1))).collect();
    let mut defs = Vec::with_capacity(n);
    for i in 0..n {
        let alts = rng.random_range(1..=cfg.max_alternatives.max(1));
        let body = Expr::union(
            (0..alts)
                .map(|_| product_of(rng, cfg, i, arities[i], &arities))
                .collect(),
        );
        defs.push(Definition { name: name(i), body });
    }
    Ufr::validate(RawUfr { start: None, defs }, DisciplineMode::Uniform)
        .expect("generated relations are valid")
}

/// A random relation whose alternatives may differ in arity.
pub fn random_vlfr<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> Ufr {
    let n = rng.random_range(1..=cfg.max_defs.max(1));
    // arities of later names must be fixed for the products to be well
    // defined, so variable alternatives appear only in the start definition
    let arities: Vec<usize> = (0..n).map(|_| rng.random_range(1..=cfg.max_arity.max(1))).collect();
    let mut defs = Vec::with_capacity(n);
    for i in 0..n {
        let alts = rng.random_range(1..=cfg.max_alternatives.max(1));
        let body = Expr::union(
            (0..alts)
                .map(|_| {
                    let k = if i == 0 {
                        rng.random_range(0..=cfg.max_arity)
                    } else {
                        arities[i]
                    };
                    product_of(rng, cfg, i, k, &arities)
                })
                .collect(),
        );
        defs.push(Definition { name: name(i), body });
    }
    Ufr::validate(RawUfr { start: None, defs }, DisciplineMode::Auto)
        .expect("generated relations are valid")
}

/// A random automaton whose transitions go from lower to higher states.
pub fn random_acyclic_nfa<R: Rng + ?Sized>(rng: &mut R, max_states: usize, max_letters: usize) -> Nfa {
    let n = rng.random_range(1..=max_states.max(1));
    let k = rng.random_range(1..=max_letters.max(1));
    let letters: Vec<Value> = (0..k).map(|i| Value::new(&format!("{}", (b'a' + i as u8) as char))).collect();
    let mut a = Nfa::new();
    for _ in 0..n {
        a.fresh_state();
    }
    for &c in &letters {
        a.add_symbol(c);
    }
    for p in 0..n {
        for q in p + 1..n {
            for &c in &letters {
                if rng.random_bool(0.35) {
                    a.add_transition(p, c, q);
                }
            }
        }
    }
    a.set_initial(0);
    if n > 1 && rng.random_bool(0.2) {
        a.set_initial(1);
    }
    for q in 0..n {
        if rng.random_bool(0.4) {
            a.set_accepting(q);
        }
    }
    a.set_accepting(n - 1);
    a
}

/// A random unambiguous acyclic automaton: a random one that happens to be
/// unambiguous, or else a deterministic thinning of one.
pub fn random_acyclic_ufa<R: Rng + ?Sized>(rng: &mut R, max_states: usize, max_letters: usize) -> Nfa {
    for _ in 0..20 {
        let a = random_acyclic_nfa(rng, max_states, max_letters);
        if is_unambiguous_nfa(&a) {
            return a;
        }
    }
    let a = random_acyclic_nfa(rng, max_states, max_letters);
    let mut d = Nfa::new();
    for q in 0..a.num_states() {
        d.add_state(a.name(q).clone());
    }
    for &c in a.alphabet() {
        d.add_symbol(c);
    }
    for p in 0..a.num_states() {
        let mut last = None;
        for &(c, q) in a.out(p) {
            if last != Some(c) {
                d.add_transition(p, c, q);
                last = Some(c);
            }
        }
    }
    d.set_initial(0);
    for &q in a.accepting() {
        d.set_accepting(q);
    }
    d
}

/// A random PMR over `g` with at most `max_nodes` nodes.
pub fn random_pmr<R: Rng + ?Sized>(rng: &mut R, g: &GraphDb, max_nodes: usize) -> Pmr {
    let graph_nodes: Vec<Value> = g.nodes().iter().copied().collect();
    let mut raw = RawPmr::default();
    if graph_nodes.is_empty() {
        return Pmr::validate(raw, g).expect("empty PMR is valid");
    }
    let n = rng.random_range(1..=max_nodes.max(1));
    let mut images = Vec::with_capacity(n);
    for i in 0..n {
        let u = Name::new(format!("u{i}"));
        let img = graph_nodes[rng.random_range(0..graph_nodes.len())];
        raw.nodes.push(u.clone());
        raw.gamma.insert(u, img);
        images.push(img);
    }
    for i in 0..n {
        for j in 0..n {
            if g.has_edge(images[i], images[j]) && rng.random_bool(0.5) {
                raw.edges.push((raw.nodes[i].clone(), raw.nodes[j].clone()));
            }
        }
        if rng.random_bool(0.3) {
            raw.starts.push(raw.nodes[i].clone());
        }
        if rng.random_bool(0.3) {
            raw.targets.push(raw.nodes[i].clone());
        }
    }
    Pmr::validate(raw, g).expect("edges follow the graph")
}
