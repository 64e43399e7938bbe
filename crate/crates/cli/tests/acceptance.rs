//! Acceptance suite: one line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are reported as failures but do not fail
//! the run; the reason is written next to the failing check.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use factrel::formats::{parse_graph, parse_pmr, parse_ufr};
use factrel::output::write_bench_csv;
use factrel_core::algorithms::{
    count_tuples, enumerate_tuples, enumeration_less, membership_cyk, CountMethod, ValueOrder,
};
use factrel_core::automata::{
    is_unambiguous_nfa, mark_automaton, tzeng_multiset_equivalence, ufa_set_equivalence, Nfa,
};
use factrel_core::families::{
    blowup_report, g1, g2, g3, l4_nfa, l5_ufa, l6_dfa, mark_grammar, power_tuples, Family,
    RowStatus, Translation,
};
use factrel_core::gen::{random_acyclic_nfa, random_acyclic_ufa, random_ufr, GenConfig};
use factrel_core::grammar::{beta, beta_inv, language_upto, languages_upto, Ecfg, Regex};
use factrel_core::nfr::{evaluate_nfr, nfr_from_disjoint_ufr, unnamed_of, AttributeOrder};
use factrel_core::pmr::{paths_of, pmr_to_nfa, pmr_to_vlfr, rpq_to_pmr, PathMode, Pmr};
use factrel_core::ufr::{
    count_derivation_trees, evaluate, has_disjoint_positions, is_deterministic, ufr_size, Expr, Ufr,
};
use factrel_core::value::words_of;
use factrel_core::{Limits, Relation, Tuple, Value, Word};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot hold as stated; see the check for the argument.
const KNOWN_RED: [usize; 1] = [5];

type Check = Result<String, String>;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixtures().join(name)).unwrap()
}

fn lim() -> Limits {
    Limits::default()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, budget: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t <= budget, || format!("took {t:.2?}, budget {budget:?}"))
}

/// The uFRs the suite quantifies over: seeded random ones plus the fixtures.
fn test_ufrs() -> Vec<Ufr> {
    let mut out: Vec<Ufr> = (0..200)
        .map(|s| random_ufr(&mut ChaCha8Rng::seed_from_u64(s), &GenConfig::default()))
        .collect();
    out.push(parse_ufr(&read("example21.ufr")).unwrap());
    out.push(parse_ufr(&read("power2.ufr")).unwrap());
    out
}

fn small(f: &Ufr, cap: usize) -> Option<Relation> {
    let l = Limits { max_tuples: cap, ..lim() };
    evaluate(f, None, &l).ok().filter(|r| r.len() <= cap)
}

// ------------------------------------------------------------------ oracles

fn csv_table(name: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(fixtures().join(name)).unwrap();
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

/// Nested-loop join of the three Figure 1 tables as `(cid, product, supplier, name)`.
fn join_oracle() -> BTreeSet<Vec<String>> {
    let mut out = BTreeSet::new();
    for c in csv_table("customer.csv") {
        for p in csv_table("purchase_history.csv") {
            for s in csv_table("supply.csv") {
                if c[0] == p[0] && p[1] == s[0] {
                    out.insert(vec![c[0].clone(), p[1].clone(), s[1].clone(), c[1].clone()]);
                }
            }
        }
    }
    out
}

/// Derivation trees per tuple, by expanding every tree.
fn trees_per_tuple(f: &Ufr) -> BTreeMap<Tuple, u64> {
    fn expand(f: &Ufr, e: &Expr) -> Vec<Tuple> {
        match e {
            Expr::Empty => vec![],
            Expr::Nullary => vec![Tuple::empty()],
            Expr::Singleton(v) => vec![Tuple::new(vec![*v])],
            Expr::Ref(n) => expand(f, f.body(n).unwrap()),
            Expr::Union(cs) => cs.iter().flat_map(|c| expand(f, c)).collect(),
            Expr::Product(cs) => cs.iter().fold(vec![Tuple::empty()], |acc, c| {
                let right = expand(f, c);
                acc.iter().flat_map(|a| right.iter().map(move |b| a.concat(b))).collect()
            }),
        }
    }
    let mut out = BTreeMap::new();
    for t in expand(f, &f.defs()[0].body) {
        *out.entry(t).or_insert(0) += 1;
    }
    out
}

/// Accepting runs per word, by following every path.
fn run_counts(a: &Nfa, max_len: usize) -> BTreeMap<Word, u64> {
    fn go(a: &Nfa, q: usize, w: &mut Word, max_len: usize, out: &mut BTreeMap<Word, u64>) {
        if a.accepting().contains(&q) {
            *out.entry(w.clone()).or_insert(0) += 1;
        }
        if w.len() == max_len {
            return;
        }
        for &(c, r) in a.out(q) {
            w.push(c);
            go(a, r, w, max_len, out);
            w.pop();
        }
    }
    let mut out = BTreeMap::new();
    for &q in a.initial() {
        go(a, q, &mut Vec::new(), max_len, &mut out);
    }
    out
}

/// Whether no value occurs in two columns of a materialized relation.
fn columns_disjoint(r: &Relation) -> bool {
    let mut owner: BTreeMap<Value, usize> = BTreeMap::new();
    for t in r.iter() {
        for (c, &v) in t.values().iter().enumerate() {
            if *owner.entry(v).or_insert(c) != c {
                return false;
            }
        }
    }
    true
}

fn marked_ufr(f: &Ufr) -> Option<Ufr> {
    mark_grammar(&beta(f)).ok().and_then(|g| beta_inv(&g).ok())
}

// ----------------------------------------------------------------- criteria

fn c1() -> Check {
    let start = Instant::now();
    let f = parse_ufr(&read("example21.ufr")).map_err(|e| e.to_string())?;
    let rel = evaluate(&f, None, &lim()).map_err(|e| e.to_string())?;
    let got: BTreeSet<Vec<String>> = rel
        .iter()
        .map(|t| t.texts().into_iter().map(String::from).collect())
        .collect();
    let oracle = join_oracle();
    ensure(got == oracle && got.len() == 9, || format!("{} tuples, oracle {}", got.len(), oracle.len()))?;
    for t in rel.iter() {
        ensure(membership_cyk(&f, t), || format!("positive {t} rejected"))?;
    }
    let domain: Vec<Value> = f.values().into_iter().collect();
    let positives: Vec<&Tuple> = rel.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut negatives = 0;
    while negatives < 20 {
        let mut vs = positives[rng.random_range(0..positives.len())].values().to_vec();
        let i = rng.random_range(0..vs.len());
        vs[i] = domain[rng.random_range(0..domain.len())];
        let t = Tuple::new(vs);
        let texts: Vec<String> = t.texts().into_iter().map(String::from).collect();
        if oracle.contains(&texts) {
            continue;
        }
        ensure(!membership_cyk(&f, &t), || format!("negative {t} accepted"))?;
        negatives += 1;
    }
    within(start, Duration::from_secs(1))?;
    Ok("9 tuples equal the join; 9 positives, 20 negatives".into())
}

fn c2() -> Check {
    let start = Instant::now();
    let fs = test_ufrs();
    let mut large = 0;
    for (i, f) in fs.iter().enumerate() {
        let g = beta(f);
        ensure(ufr_size(f) == g.size(), || format!("#{i}: size {} vs {}", ufr_size(f), g.size()))?;
        let back = beta_inv(&g).map_err(|e| format!("#{i}: {e}"))?;
        ensure(&back == f, || format!("#{i}: beta_inv(beta(f)) differs"))?;
        let Some(rel) = small(f, 20_000) else {
            large += 1;
            continue;
        };
        let arity = rel.arity().unwrap_or(0);
        let lang = language_upto(&g, arity, &lim()).map_err(|e| e.to_string())?;
        ensure(words_of(&rel) == lang, || format!("#{i}: language differs"))?;
        let longest = (0..f.defs().len()).filter_map(|j| f.arity_of_index(j)).max().unwrap_or(0);
        let per_name = languages_upto(&g, longest, &lim()).map_err(|e| e.to_string())?;
        for d in f.defs() {
            let r = evaluate(f, Some(&d.name), &lim()).map_err(|e| e.to_string())?;
            ensure(words_of(&r) == per_name[&d.name], || format!("#{i}: L({}) differs", d.name))?;
        }
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("{} relations, languages compared on {}", fs.len(), fs.len() - large))
}

fn c3() -> Check {
    let start = Instant::now();
    for n in 1..=4u32 {
        let f = power_tuples(n as usize);
        let r = count_tuples(&f, false, &lim()).map_err(|e| e.to_string())?;
        let expected = BigUint::from(2u32).pow(2u32.pow(n));
        ensure(r.count == expected, || format!("n={n}: {} != {expected}", r.count))?;
        ensure(r.method == CountMethod::ExactDeterministic, || {
            format!("n={n}: method {}", r.method.as_str())
        })?;
        if n <= 3 {
            let listed = enumerate_tuples(&f, ValueOrder::FirstAppearance, &lim())
                .map_err(|e| e.to_string())?
                .count();
            ensure(BigUint::from(listed) == expected, || format!("n={n}: enumerated {listed}"))?;
        }
    }
    within(start, Duration::from_secs(10))?;
    Ok("4, 16, 256, 65536".into())
}

fn c4() -> Check {
    let mut checked = 0;
    for (i, f) in test_ufrs().iter().enumerate() {
        let Some(rel) = small(f, 10_000) else { continue };
        let listed: Vec<Tuple> = enumerate_tuples(f, ValueOrder::FirstAppearance, &lim())
            .map_err(|e| e.to_string())?
            .collect();
        let count = count_tuples(f, false, &lim()).map_err(|e| e.to_string())?.count;
        ensure(listed.len() == rel.len() && count == BigUint::from(rel.len()), || {
            format!("#{i}: enumerated {}, counted {count}, evaluated {}", listed.len(), rel.len())
        })?;
        for w in listed.windows(2) {
            ensure(enumeration_less(f, ValueOrder::FirstAppearance, &w[0], &w[1]), || {
                format!("#{i}: {} before {}", w[0], w[1])
            })?;
        }
        checked += 1;
    }
    Ok(format!("{checked} relations"))
}

fn c5() -> Check {
    let start = Instant::now();
    let limits = lim();
    let mut rows = blowup_report(&[Family::L3], 3..=10, &[Translation::ToMinDfa], &limits);
    rows.extend(blowup_report(&[Family::L5], 3..=8, &[Translation::ToMinDfa], &limits));
    let csv_path = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance_bench.csv");
    write_bench_csv(std::fs::File::create(&csv_path).map_err(|e| e.to_string())?, &rows)
        .map_err(|e| e.to_string())?;
    for r in &rows {
        ensure(r.status == RowStatus::Pass, || {
            format!("{} n={}: {} ({:?})", r.family, r.n, r.status.as_str(), r.target_size)
        })?;
    }
    let g3_sizes: Vec<usize> = (3..=10).map(|n| g3(n).size()).collect();
    let steps: BTreeSet<usize> = g3_sizes.windows(2).map(|w| w[1] - w[0]).collect();
    ensure(steps.len() == 1, || format!("G3 sizes {g3_sizes:?} are not linear"))?;
    within(start, Duration::from_secs(120))?;
    // A linear a·n + b with b ≥ 0 satisfies s(2n) ≤ 2·s(n). Pairs
    // (b^i a b^d, b^(n−d) c b^(n−i)) for 0 ≤ i, d ≤ n form a fooling set
    // for L5, so no automaton for it has fewer than (n+1)² states.
    let states: Vec<usize> = (3..=8).map(|n| l5_ufa(n).num_states()).collect();
    let (s4, s8) = (l5_ufa(4).num_states(), l5_ufa(8).num_states());
    ensure(s8 <= 2 * s4, || {
        format!(
            "DFA bounds hold, G3 linear; UFA states {states:?} for n=3..8 are quadratic \
             (s(8)={s8} > 2·s(4)={}): fooling set of size (n+1)² rules out O(n)",
            2 * s4
        )
    })?;
    Ok(format!("bench CSV at {}", csv_path.display()))
}

fn c6() -> Check {
    let mut grammars: Vec<(String, Ecfg, usize)> = Vec::new();
    for n in 1..=3 {
        grammars.push((format!("G1({n})"), g1(n), (1 << (n + 1)) + 2));
    }
    for n in 1..=8 {
        grammars.push((format!("G2({n})"), g2(n), (1 << (n + 1)) + 1));
        grammars.push((format!("G3({n})"), g3(n), 2 * n));
    }
    for (name, g, wordlen) in &grammars {
        let m = mark_grammar(g).map_err(|e| format!("{name}: {e}"))?;
        ensure(m.size() <= wordlen * g.size(), || {
            format!("{name}: marked size {} > {wordlen}·{}", m.size(), g.size())
        })?;
        let f = beta_inv(&m).map_err(|e| format!("{name}: {e}"))?;
        ensure(has_disjoint_positions(&f).map_err(|e| e.to_string())?, || {
            format!("{name}: marked relation shares values across columns")
        })?;
    }
    let mut automata: Vec<(String, Nfa)> = Vec::new();
    for n in 1..=8 {
        automata.push((format!("L4({n})"), l4_nfa(n)));
        automata.push((format!("L5({n})"), l5_ufa(n)));
        automata.push((format!("L6({n})"), l6_dfa(n).to_nfa()));
    }
    for (name, a) in &automata {
        let m = mark_automaton(a).map_err(|e| format!("{name}: {e}"))?;
        let (before, after) = (a.trim().num_states(), m.nfa.trim().num_states());
        ensure(before == after, || format!("{name}: {before} states, {after} marked"))?;
    }
    Ok(format!("{} grammars, {} automata", grammars.len(), automata.len()))
}

fn c7() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut same, mut ufa_same) = (0, 0);
    for i in 0..100 {
        let a = random_acyclic_nfa(&mut rng, 8, 3);
        let fresh = random_acyclic_nfa(&mut rng, 8, 3);
        // every fourth pair compares an automaton with its trimmed copy
        let b = if i % 4 == 0 { a.trim() } else { fresh };
        let oracle = run_counts(&a, 8) == run_counts(&b, 8);
        ensure(tzeng_multiset_equivalence(&a, &b) == oracle, || format!("NFA pair {i}"))?;
        same += oracle as usize;
    }
    for i in 0..100 {
        let a = random_acyclic_ufa(&mut rng, 8, 3);
        let b = random_acyclic_ufa(&mut rng, 8, 3);
        ensure(is_unambiguous_nfa(&a) && is_unambiguous_nfa(&b), || format!("UFA pair {i} is ambiguous"))?;
        let la: BTreeSet<Word> = run_counts(&a, 8).into_keys().collect();
        let lb: BTreeSet<Word> = run_counts(&b, 8).into_keys().collect();
        let got = ufa_set_equivalence(&a, &b).map_err(|e| e.to_string())?;
        ensure(got == (la == lb), || format!("UFA pair {i}"))?;
        ufa_same += got as usize;
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("100 + 100 pairs ({same} and {ufa_same} equivalent)"))
}

/// Multiplicity of each path image with at most `max_nodes` nodes.
fn pmr_brute(r: &Pmr, max_nodes: usize) -> BTreeMap<Word, u64> {
    let mut out = BTreeMap::new();
    let mut layer: Vec<Vec<usize>> = r.starts().iter().map(|&s| vec![s]).collect();
    while !layer.is_empty() {
        let mut next = Vec::new();
        for p in layer {
            let last = *p.last().unwrap();
            if r.targets().contains(&last) {
                *out.entry(p.iter().map(|&u| r.gamma(u)).collect()).or_insert(0) += 1;
            }
            if p.len() < max_nodes {
                for &v in r.successors(last) {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
        }
        layer = next;
    }
    out
}

fn c8() -> Check {
    let start = Instant::now();
    let g = parse_graph(&read("figure5.tsv")).map_err(|e| e.to_string())?;
    let r = parse_pmr(&read("figure5.pmr"), &g).map_err(|e| e.to_string())?;
    let a = pmr_to_nfa(&r);
    let brute = pmr_brute(&r, 14);
    // every graph path of up to 14 nodes, matched or not
    let mut layer: Vec<Word> = g.nodes().iter().map(|&v| vec![v]).collect();
    let mut probes = 0;
    while !layer.is_empty() {
        let mut next = Vec::new();
        for w in layer {
            let expected = brute.get(&w).copied().unwrap_or(0);
            ensure(a.runs(&w) == BigUint::from(expected), || format!("runs on {w:?}"))?;
            probes += 1;
            if w.len() < 14 {
                for (s, _, d) in g.edges() {
                    if s == *w.last().unwrap() {
                        let mut x = w.clone();
                        x.push(d);
                        next.push(x);
                    }
                }
            }
        }
        layer = next;
    }
    let abd: Word = ["A", "B", "D"].map(Value::new).to_vec();
    ensure(brute.get(&abd) == Some(&2), || "A,B,D does not have multiplicity 2".into())?;
    ensure(!r.is_finite(), || "PMR reported finite".into())?;
    let from = BTreeSet::from([Value::new("A")]);
    let to = BTreeSet::from([Value::new("D")]);
    let aa = Regex::concat(vec![Regex::t("a"), Regex::t("a")]);
    let q = rpq_to_pmr(&g, &aa, Some(&from), Some(&to)).map_err(|e| e.to_string())?;
    let spaths = paths_of(&q, PathMode::Set, None, &lim()).map_err(|e| e.to_string())?;
    ensure(spaths.words() == BTreeSet::from([abd.clone()]), || format!("SPaths {:?}", spaths.words()))?;
    let f = pmr_to_vlfr(&q).map_err(|e| e.to_string())?;
    let rel = evaluate(&f, None, &lim()).map_err(|e| e.to_string())?;
    ensure(words_of(&rel) == BTreeSet::from([abd]), || "vlFR does not denote {(A,B,D)}".into())?;
    within(start, Duration::from_secs(5))?;
    Ok(format!("{probes} graph paths probed"))
}

fn c9() -> Check {
    let mut compared = 0;
    let mut converted = 0;
    let mut instances = test_ufrs();
    let marked: Vec<Ufr> = instances.iter().filter_map(marked_ufr).collect();
    instances.extend(marked);
    for (i, f) in instances.iter().enumerate() {
        let Some(rel) = small(f, 10_000) else { continue };
        let syntactic = has_disjoint_positions(f).map_err(|e| e.to_string())?;
        ensure(syntactic == columns_disjoint(&rel), || format!("#{i}: syntactic {syntactic}"))?;
        compared += 1;
        if !syntactic {
            continue;
        }
        let c = nfr_from_disjoint_ufr(f).map_err(|e| format!("#{i}: {e}"))?;
        let order = AttributeOrder::positional(rel.arity().unwrap_or(0));
        let named = evaluate_nfr(&c.nfr, &lim()).map_err(|e| e.to_string())?;
        let back = unnamed_of(&named, &order).map_err(|e| e.to_string())?;
        ensure(back.same_tuples(&rel), || format!("#{i}: round trip differs"))?;
        if c.cloned.is_empty() {
            ensure(c.nfr.size() == ufr_size(f), || {
                format!("#{i}: size {} vs {}", c.nfr.size(), ufr_size(f))
            })?;
            converted += 1;
        }
    }
    ensure(converted > 0, || "no single-offset instance".into())?;
    Ok(format!("{compared} compared, {converted} single-offset conversions"))
}

fn c10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut tested = 0;
    let mut deterministic = 0;
    let cfg = GenConfig { max_defs: 8, ..GenConfig::default() };
    while tested < 100 {
        let f = random_ufr(&mut rng, &cfg);
        let Some(rel) = small(&f, 500) else { continue };
        let trees = trees_per_tuple(&f);
        ensure(trees.len() == rel.len(), || "tree expansion disagrees with evaluation".into())?;
        let oracle = trees.values().all(|&c| c == 1);
        let got = is_deterministic(&f, &lim()).map_err(|e| e.to_string())?;
        ensure(got == oracle, || format!("instance {tested}: is_deterministic {got}"))?;
        let total = count_derivation_trees(&f);
        ensure(total == BigUint::from(trees.values().sum::<u64>()), || "tree count".into())?;
        ensure(total >= BigUint::from(rel.len()), || "fewer trees than tuples".into())?;
        deterministic += got as usize;
        tested += 1;
    }
    Ok(format!("100 relations ({deterministic} deterministic)"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("Example 2.1 pipeline", c1),
        ("grammar isomorphism", c2),
        ("power family counts", c3),
        ("count/enumeration coherence", c4),
        ("DFA lower bounds", c5),
        ("marking", c6),
        ("multiset and UFA equivalence", c7),
        ("path multisets", c8),
        ("disjoint positions", c9),
        ("determinism", c10),
    ];
    let mut unexpected = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let k = i + 1;
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        match result {
            Ok(detail) => println!("PASS {k:>2} {name}: {detail} [{t:.2?}]"),
            Err(why) => {
                let known = KNOWN_RED.contains(&k);
                let tag = if known { " (known)" } else { "" };
                println!("FAIL {k:>2} {name}{tag}: {why} [{t:.2?}]");
                if !known {
                    unexpected.push(k);
                }
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
