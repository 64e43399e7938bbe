//! Small worked instances: the customer/product/supplier database with its
//! factorized join, the matching grammar, and the path example.

use alloc::vec;
use alloc::vec::Vec;

use crate::grammar::{Ecfg, Regex};
use crate::name::Name;
use crate::pmr::{GraphDb, Pmr, RawPmr};
use crate::ufr::{DisciplineMode, Expr, RawUfr, Ufr};
use crate::value::{Relation, Tuple, Value};

fn s(x: &str) -> Expr {
    Expr::singleton(x)
}
fn r(x: &str) -> Expr {
    Expr::reference(x)
}

fn table(rows: &[[&str; 2]]) -> Relation {
    Relation::from_tuples(rows.iter().map(|row| Tuple::from_texts(row)))
}

/// `(cid, name)`
pub fn customer() -> Relation {
    table(&[["c1", "n1"], ["c2", "n2"], ["c3", "n3"]])
}

/// `(cid, product)`
pub fn purchase_history() -> Relation {
    table(&[
        ["c1", "flute"],
        ["c1", "wire"],
        ["c2", "harp"],
        ["c2", "wire"],
        ["c3", "flute"],
        ["c3", "phone"],
    ])
}

/// `(product, supplier)`
pub fn supply() -> Relation {
    table(&[
        ["flute", "s1"],
        ["flute", "s2"],
        ["wire", "s3"],
        ["harp", "s1"],
        ["harp", "s2"],
        ["phone", "s3"],
    ])
}

/// The join of the three tables as `(cid, product, supplier, name)`.
pub fn example21() -> Ufr {
    let raw = RawUfr::new()
        .def("N1", Expr::union(vec![r("A1"), r("A2"), r("A3")]))
        .def("A1", Expr::product(vec![r("B1"), s("n1")]))
        .def("A2", Expr::product(vec![r("B2"), s("n2")]))
        .def("A3", Expr::product(vec![r("B3"), s("n3")]))
        .def("B1", Expr::product(vec![s("c1"), r("C1")]))
        .def("B2", Expr::product(vec![s("c2"), r("C2")]))
        .def("B3", Expr::product(vec![s("c3"), r("C3")]))
        .def("C1", Expr::union(vec![r("P1"), r("P2")]))
        .def("C2", Expr::union(vec![r("P2"), r("P3")]))
        .def("C3", Expr::union(vec![r("P1"), r("P4")]))
        .def("P1", Expr::product(vec![s("flute"), r("D")]))
        .def("P2", Expr::product(vec![s("wire"), s("s3")]))
        .def("P3", Expr::product(vec![s("harp"), r("D")]))
        .def("P4", Expr::product(vec![s("phone"), s("s3")]))
        .def("D", Expr::union(vec![s("s1"), s("s2")]));
    Ufr::validate(raw, DisciplineMode::Uniform).expect("sample is valid")
}

/// The same nine tuples as a flat union of products.
pub fn example21_flat() -> Ufr {
    let rows: [[&str; 4]; 9] = [
        ["c1", "flute", "s1", "n1"],
        ["c1", "flute", "s2", "n1"],
        ["c1", "wire", "s3", "n1"],
        ["c2", "wire", "s3", "n2"],
        ["c2", "harp", "s1", "n2"],
        ["c2", "harp", "s2", "n2"],
        ["c3", "flute", "s1", "n3"],
        ["c3", "flute", "s2", "n3"],
        ["c3", "phone", "s3", "n3"],
    ];
    let alts = rows
        .iter()
        .map(|row| Expr::product(row.iter().map(|x| s(x)).collect()))
        .collect();
    Ufr::validate(RawUfr::new().def("F", Expr::union(alts)), DisciplineMode::Uniform)
        .expect("sample is valid")
}

/// The grammar read off [`example21`], rule for rule.
pub fn figure3b() -> Ecfg {
    figure3b_with_start("N1")
}

/// [`figure3b`] with the start nonterminal renamed.
pub fn figure3b_with_start(start: &str) -> Ecfg {
    let n = |x: &str| Regex::n(if x == "N1" { start } else { x });
    let t = Regex::t;
    let cat = |a: Regex, b: Regex| Regex::Concat(vec![a, b]);
    let alt = |xs: Vec<Regex>| Regex::Union(xs);
    let rules: Vec<(&str, Regex)> = vec![
        ("N1", alt(vec![n("A1"), n("A2"), n("A3")])),
        ("A1", cat(n("B1"), t("n1"))),
        ("A2", cat(n("B2"), t("n2"))),
        ("A3", cat(n("B3"), t("n3"))),
        ("B1", cat(t("c1"), n("C1"))),
        ("B2", cat(t("c2"), n("C2"))),
        ("B3", cat(t("c3"), n("C3"))),
        ("C1", alt(vec![n("P1"), n("P2")])),
        ("C2", alt(vec![n("P2"), n("P3")])),
        ("C3", alt(vec![n("P1"), n("P4")])),
        ("P1", cat(t("flute"), n("D"))),
        ("P2", cat(t("wire"), t("s3"))),
        ("P3", cat(t("harp"), n("D"))),
        ("P4", cat(t("phone"), t("s3"))),
        ("D", alt(vec![t("s1"), t("s2")])),
    ];
    let rename = |x: &str| Name::from(if x == "N1" { start } else { x });
    Ecfg::new(
        rename("N1"),
        rules.into_iter().map(|(x, e)| (rename(x), e)).collect(),
    )
    .expect("sample is valid")
}

/// Five nodes `A`–`E`, every edge labeled `a`.
pub fn figure5_graph() -> GraphDb {
    let mut g = GraphDb::new();
    let a = Value::new("a");
    for (x, y) in [("A", "B"), ("B", "C"), ("C", "A"), ("B", "D"), ("D", "E"), ("C", "E")] {
        g.add_edge(Value::new(x), a, Value::new(y)).expect("no label conflicts");
    }
    g
}

/// The even-length paths from `A` to `D` of [`figure5_graph`], the shortest
/// one represented twice.
pub fn figure5_pmr() -> Pmr {
    let nodes = ["A1", "B1", "C1", "A2", "B2", "C2", "B3", "D"];
    let edges = [
        ("A1", "B1"),
        ("B1", "C1"),
        ("C1", "A2"),
        ("A2", "B2"),
        ("B2", "C2"),
        ("C2", "A1"),
        ("A1", "B3"),
        ("B1", "D"),
        ("B3", "D"),
    ];
    let raw = RawPmr {
        nodes: nodes.iter().map(|&x| Name::from(x)).collect(),
        edges: edges.iter().map(|&(u, v)| (Name::from(u), Name::from(v))).collect(),
        gamma: nodes
            .iter()
            .map(|&x| (Name::from(x), Value::new(&x[..1])))
            .collect(),
        starts: vec![Name::from("A1")],
        targets: vec![Name::from("D")],
    };
    Pmr::validate(raw, &figure5_graph()).expect("sample is valid")
}
