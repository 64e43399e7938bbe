//! Text formats for relations, grammars, automata, graphs and PMRs.
//!
//! Every `render_*` output parses back to an equal object.

use std::collections::BTreeMap;
use std::fmt;

use factrel_core::automata::{Dfa, Nfa};
use factrel_core::grammar::{Ecfg, GrammarError, Regex, Symbol};
use factrel_core::nfr::{Attr, NDefinition, NExpr, Nfr, NfrError};
use factrel_core::pmr::{GraphDb, Pmr, PmrError, RawPmr};
use factrel_core::ufr::{Definition, DisciplineMode, Expr, RawUfr, Ufr, UfrError};
use factrel_core::{Name, Value};
use thiserror::Error;

use crate::syntax::{render_name, render_terminal, Cursor, SyntaxError, Tok};

/// A validation error with the line it is attributed to, when known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Located<E> {
    pub line: Option<usize>,
    pub err: E,
}

impl<E: fmt::Display> fmt::Display for Located<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.err),
            None => write!(f, "{}", self.err),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{0}")]
    Ufr(Located<UfrError>),
    #[error("{0}")]
    Nfr(Located<NfrError>),
    #[error("{0}")]
    Grammar(Located<GrammarError>),
    #[error("{0}")]
    Pmr(Located<PmrError>),
}

/// Definition lines and first reference lines per name.
#[derive(Default)]
struct Lines {
    defs: BTreeMap<String, Vec<usize>>,
    refs: BTreeMap<String, usize>,
    start: Option<usize>,
}

impl Lines {
    fn def(&self, n: &Name) -> Option<usize> {
        self.defs.get(n.as_str()).and_then(|v| v.first().copied())
    }
    fn second_def(&self, n: &Name) -> Option<usize> {
        self.defs.get(n.as_str()).and_then(|v| v.get(1).copied())
    }
    fn reference(&self, n: &Name) -> Option<usize> {
        self.refs.get(n.as_str()).copied()
    }
}

const UFR_KEYWORDS: [&str; 1] = ["start"];
const GRAMMAR_KEYWORDS: [&str; 3] = ["start", "eps", "empty"];

fn value_text(v: Value) -> String {
    render_name(v.text(), &[])
}

// ---------------------------------------------------------------- relations

fn ufr_expr(c: &mut Cursor, lines: &mut Lines) -> Result<Expr, SyntaxError> {
    let mut alts = vec![ufr_product(c, lines)?];
    while c.eat("|") {
        alts.push(ufr_product(c, lines)?);
    }
    Ok(if alts.len() == 1 { alts.pop().unwrap() } else { Expr::Union(alts) })
}

fn ufr_product(c: &mut Cursor, lines: &mut Lines) -> Result<Expr, SyntaxError> {
    let mut parts = vec![ufr_atom(c, lines)?];
    while c.eat("*") {
        parts.push(ufr_atom(c, lines)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Expr::Product(parts) })
}

fn ufr_atom(c: &mut Cursor, lines: &mut Lines) -> Result<Expr, SyntaxError> {
    let line = c.line();
    match c.peek().clone() {
        Tok::Punct("(") => {
            c.bump();
            let e = ufr_expr(c, lines)?;
            c.expect(")")?;
            Ok(e)
        }
        Tok::Punct("<") => {
            c.bump();
            if c.eat(">") {
                return Ok(Expr::Nullary);
            }
            let v = c.name()?;
            c.expect(">")?;
            Ok(Expr::Singleton(Value::new(&v)))
        }
        Tok::Punct("{") => {
            c.bump();
            c.expect("}")?;
            Ok(Expr::Empty)
        }
        Tok::Ident(s) | Tok::Quoted(s) => {
            c.bump();
            lines.refs.entry(s.clone()).or_insert(line);
            Ok(Expr::Ref(Name::new(s)))
        }
        _ => Err(c.unexpected("a name, `<v>`, `<>`, `{}` or `(`")),
    }
}

fn parse_definitions<B>(
    text: &str,
    mut body: impl FnMut(&mut Cursor, &mut Lines) -> Result<B, SyntaxError>,
) -> Result<(Option<Name>, Vec<(Name, B)>, Lines), SyntaxError> {
    let mut c = Cursor::new(text)?;
    let mut lines = Lines::default();
    let mut start = None;
    let mut defs = Vec::new();
    loop {
        c.skip_newlines();
        if c.at_eof() {
            break;
        }
        let line = c.line();
        if c.is_keyword("start") && *c.peek_at(1) != Tok::Punct(":=") {
            c.bump();
            if start.is_some() {
                return Err(c.error("second start line"));
            }
            start = Some(Name::new(c.name()?));
            lines.start = Some(line);
        } else {
            let n = c.name()?;
            c.expect(":=")?;
            let b = body(&mut c, &mut lines)?;
            lines.defs.entry(n.clone()).or_default().push(line);
            defs.push((Name::new(n), b));
        }
        c.end_line()?;
    }
    Ok((start, defs, lines))
}

fn locate_ufr(err: UfrError, lines: &Lines) -> FormatError {
    let line = match &err {
        UfrError::StartNotFirst(_) => lines.start,
        UfrError::DuplicateName(n) => lines.second_def(n),
        UfrError::UnknownName(n) => lines.reference(n).or(lines.start),
        UfrError::BackwardReference { from, .. } => lines.def(from),
        UfrError::ArityMismatch { name, .. }
        | UfrError::EmptyInUnion(name)
        | UfrError::DegenerateOperator(name) => lines.def(name),
        _ => None,
    };
    FormatError::Ufr(Located { line, err })
}

pub fn parse_ufr(text: &str) -> Result<Ufr, FormatError> {
    parse_ufr_with(text, DisciplineMode::Auto)
}

pub fn parse_ufr_with(text: &str, mode: DisciplineMode) -> Result<Ufr, FormatError> {
    let (start, defs, lines) = parse_definitions(text, ufr_expr)?;
    let raw = RawUfr {
        start,
        defs: defs.into_iter().map(|(name, body)| Definition { name, body }).collect(),
    };
    Ufr::validate(raw, mode).map_err(|e| locate_ufr(e, &lines))
}

fn render_expr(e: &Expr, out: &mut String, parent: u8) {
    // 0 top, 1 inside a union, 2 inside a product
    match e {
        Expr::Empty => out.push_str("{}"),
        Expr::Nullary => out.push_str("<>"),
        Expr::Singleton(v) => {
            out.push('<');
            out.push_str(&value_text(*v));
            out.push('>');
        }
        Expr::Ref(n) => out.push_str(&render_name(n.as_str(), &UFR_KEYWORDS)),
        Expr::Union(cs) => {
            let paren = parent != 0;
            if paren {
                out.push('(');
            }
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                render_expr(c, out, 1);
            }
            if paren {
                out.push(')');
            }
        }
        Expr::Product(cs) => {
            let paren = parent == 2;
            if paren {
                out.push('(');
            }
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" * ");
                }
                render_expr(c, out, 2);
            }
            if paren {
                out.push(')');
            }
        }
    }
}

pub fn render_ufr(f: &Ufr) -> String {
    let mut out = String::new();
    for d in f.defs() {
        out.push_str(&render_name(d.name.as_str(), &UFR_KEYWORDS));
        out.push_str(" := ");
        render_expr(&d.body, &mut out, 0);
        out.push('\n');
    }
    out
}

// ------------------------------------------------------- named relations

fn nfr_expr(c: &mut Cursor, lines: &mut Lines) -> Result<NExpr, SyntaxError> {
    let mut alts = vec![nfr_product(c, lines)?];
    while c.eat("|") {
        alts.push(nfr_product(c, lines)?);
    }
    Ok(if alts.len() == 1 { alts.pop().unwrap() } else { NExpr::Union(alts) })
}

fn nfr_product(c: &mut Cursor, lines: &mut Lines) -> Result<NExpr, SyntaxError> {
    let mut parts = vec![nfr_atom(c, lines)?];
    while c.eat("*") {
        parts.push(nfr_atom(c, lines)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { NExpr::Product(parts) })
}

fn nfr_atom(c: &mut Cursor, lines: &mut Lines) -> Result<NExpr, SyntaxError> {
    let line = c.line();
    match c.peek().clone() {
        Tok::Punct("(") => {
            c.bump();
            let e = nfr_expr(c, lines)?;
            c.expect(")")?;
            Ok(e)
        }
        Tok::Punct("<") => {
            c.bump();
            if c.eat(">") {
                return Ok(NExpr::Nullary);
            }
            let a = c.name()?;
            c.expect(":")?;
            let v = c.name()?;
            c.expect(">")?;
            Ok(NExpr::Singleton(Attr::new(a), Value::new(&v)))
        }
        Tok::Punct("{") => {
            c.bump();
            c.expect("}")?;
            Ok(NExpr::Empty)
        }
        Tok::Ident(s) | Tok::Quoted(s) => {
            c.bump();
            lines.refs.entry(s.clone()).or_insert(line);
            Ok(NExpr::Ref(Name::new(s)))
        }
        _ => Err(c.unexpected("a name, `<A:v>`, `<>`, `{}` or `(`")),
    }
}

pub fn parse_nfr(text: &str) -> Result<Nfr, FormatError> {
    let (start, defs, lines) = parse_definitions(text, nfr_expr)?;
    if let Some(s) = start {
        if defs.first().map(|d| &d.0) != Some(&s) {
            let err = NfrError::UnknownName(s);
            return Err(FormatError::Nfr(Located { line: lines.start, err }));
        }
    }
    let defs = defs.into_iter().map(|(name, body)| NDefinition { name, body }).collect();
    Nfr::validate(defs).map_err(|err| {
        let line = match &err {
            NfrError::DuplicateName(n) => lines.second_def(n),
            NfrError::UnknownName(n) => lines.reference(n),
            NfrError::BackwardReference { from, .. } => lines.def(from),
            NfrError::SchemaMismatch(n)
            | NfrError::OverlappingAttributes(n)
            | NfrError::EmptyInUnion(n) => lines.def(n),
            _ => None,
        };
        FormatError::Nfr(Located { line, err })
    })
}

fn render_nexpr(e: &NExpr, out: &mut String, parent: u8) {
    match e {
        NExpr::Empty => out.push_str("{}"),
        NExpr::Nullary => out.push_str("<>"),
        NExpr::Singleton(a, v) => {
            out.push('<');
            out.push_str(&render_name(a.as_str(), &[]));
            out.push(':');
            out.push_str(&value_text(*v));
            out.push('>');
        }
        NExpr::Ref(n) => out.push_str(&render_name(n.as_str(), &UFR_KEYWORDS)),
        NExpr::Union(cs) | NExpr::Product(cs) => {
            let union = matches!(e, NExpr::Union(_));
            let paren = if union { parent != 0 } else { parent == 2 };
            if paren {
                out.push('(');
            }
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(if union { " | " } else { " * " });
                }
                render_nexpr(c, out, if union { 1 } else { 2 });
            }
            if paren {
                out.push(')');
            }
        }
    }
}

pub fn render_nfr(f: &Nfr) -> String {
    let mut out = String::new();
    for d in f.defs() {
        out.push_str(&render_name(d.name.as_str(), &UFR_KEYWORDS));
        out.push_str(" := ");
        render_nexpr(&d.body, &mut out, 0);
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------- grammars

fn regex_union(c: &mut Cursor, lines: &mut Lines) -> Result<Regex, SyntaxError> {
    let mut alts = vec![regex_concat(c, lines)?];
    while c.eat("+") {
        alts.push(regex_concat(c, lines)?);
    }
    Ok(if alts.len() == 1 { alts.pop().unwrap() } else { Regex::Union(alts) })
}

fn regex_concat(c: &mut Cursor, lines: &mut Lines) -> Result<Regex, SyntaxError> {
    let mut parts = vec![regex_postfix(c, lines)?];
    while c.eat(".") {
        parts.push(regex_postfix(c, lines)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Regex::Concat(parts) })
}

fn regex_postfix(c: &mut Cursor, lines: &mut Lines) -> Result<Regex, SyntaxError> {
    let mut e = regex_atom(c, lines)?;
    while c.eat("*") {
        e = Regex::Star(Box::new(e));
    }
    Ok(e)
}

fn regex_atom(c: &mut Cursor, lines: &mut Lines) -> Result<Regex, SyntaxError> {
    let line = c.line();
    match c.peek().clone() {
        Tok::Punct("(") => {
            c.bump();
            let e = regex_union(c, lines)?;
            c.expect(")")?;
            Ok(e)
        }
        Tok::Terminal(s) => {
            c.bump();
            Ok(Regex::Sym(Symbol::T(Value::new(&s))))
        }
        Tok::Ident(s) if s == "eps" => {
            c.bump();
            Ok(Regex::Epsilon)
        }
        Tok::Ident(s) if s == "empty" => {
            c.bump();
            Ok(Regex::EmptySet)
        }
        Tok::Ident(s) | Tok::Quoted(s) => {
            c.bump();
            lines.refs.entry(s.clone()).or_insert(line);
            Ok(Regex::Sym(Symbol::N(Name::new(s))))
        }
        _ => Err(c.unexpected("a nonterminal, `'symbol'`, `eps`, `empty` or `(`")),
    }
}

pub fn parse_grammar(text: &str) -> Result<Ecfg, FormatError> {
    let mut c = Cursor::new(text)?;
    let mut lines = Lines::default();
    let mut start = None;
    let mut rules = Vec::new();
    loop {
        c.skip_newlines();
        if c.at_eof() {
            break;
        }
        let line = c.line();
        if c.is_keyword("start") && *c.peek_at(1) != Tok::Punct("->") {
            c.bump();
            if start.is_some() {
                return Err(c.error("second start line").into());
            }
            start = Some(Name::new(c.name()?));
            lines.start = Some(line);
        } else {
            let n = c.name()?;
            c.expect("->")?;
            let e = regex_union(&mut c, &mut lines)?;
            lines.defs.entry(n.clone()).or_default().push(line);
            rules.push((Name::new(n), e));
        }
        c.end_line()?;
    }
    let start = match start.or_else(|| rules.first().map(|r| r.0.clone())) {
        Some(s) => s,
        None => {
            let err = GrammarError::UndefinedStart(Name::from("S"));
            return Err(FormatError::Grammar(Located { line: None, err }));
        }
    };
    Ecfg::new(start, rules).map_err(|err| {
        let line = match &err {
            GrammarError::UndefinedStart(_) => lines.start,
            GrammarError::UnknownNonterminal(n) => lines.reference(n),
            GrammarError::EmptyInUnion(n) => lines.def(n),
            _ => None,
        };
        FormatError::Grammar(Located { line, err })
    })
}

/// A regular expression in grammar syntax. With `bare_terminals`,
/// unquoted identifiers are symbols rather than nonterminals.
pub fn parse_regex(text: &str, bare_terminals: bool) -> Result<Regex, FormatError> {
    let mut c = Cursor::new(text)?;
    let mut lines = Lines::default();
    c.skip_newlines();
    let e = regex_union(&mut c, &mut lines)?;
    c.skip_newlines();
    if !c.at_eof() {
        return Err(c.unexpected("end of input").into());
    }
    Ok(if bare_terminals { nonterminals_as_terminals(&e) } else { e })
}

fn nonterminals_as_terminals(e: &Regex) -> Regex {
    match e {
        Regex::Sym(Symbol::N(n)) => Regex::Sym(Symbol::T(Value::new(n.as_str()))),
        Regex::Concat(cs) => Regex::Concat(cs.iter().map(nonterminals_as_terminals).collect()),
        Regex::Union(cs) => Regex::Union(cs.iter().map(nonterminals_as_terminals).collect()),
        Regex::Star(c) => Regex::Star(Box::new(nonterminals_as_terminals(c))),
        other => other.clone(),
    }
}

fn render_regex_into(e: &Regex, out: &mut String, parent: u8) {
    // 0 top, 1 union, 2 concat, 3 star
    match e {
        Regex::EmptySet => out.push_str("empty"),
        Regex::Epsilon => out.push_str("eps"),
        Regex::Sym(Symbol::T(v)) => out.push_str(&render_terminal(v.text())),
        Regex::Sym(Symbol::N(n)) => out.push_str(&render_name(n.as_str(), &GRAMMAR_KEYWORDS)),
        Regex::Union(cs) | Regex::Concat(cs) => {
            let union = matches!(e, Regex::Union(_));
            let paren = if union { parent != 0 } else { parent >= 2 };
            if paren {
                out.push('(');
            }
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(if union { " + " } else { " . " });
                }
                render_regex_into(c, out, if union { 1 } else { 2 });
            }
            if paren {
                out.push(')');
            }
        }
        Regex::Star(c) => {
            render_regex_into(c, out, 3);
            out.push('*');
        }
    }
}

pub fn render_regex(e: &Regex) -> String {
    let mut out = String::new();
    render_regex_into(e, &mut out, 0);
    out
}

pub fn render_grammar(g: &Ecfg) -> String {
    let mut out = format!("start {}\n", render_name(g.start().as_str(), &GRAMMAR_KEYWORDS));
    for (n, e) in g.rules() {
        out.push_str(&render_name(n.as_str(), &GRAMMAR_KEYWORDS));
        out.push_str(" -> ");
        render_regex_into(e, &mut out, 0);
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------- automata

pub fn parse_automaton(text: &str) -> Result<Nfa, FormatError> {
    let mut c = Cursor::new(text)?;
    let mut a = Nfa::new();
    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    let state = |c: &mut Cursor, ids: &BTreeMap<String, usize>| -> Result<usize, SyntaxError> {
        let (l, col) = c.here();
        let n = c.name()?;
        ids.get(&n)
            .copied()
            .ok_or_else(|| SyntaxError::new(l, col, format!("undeclared state {n}")))
    };
    loop {
        c.skip_newlines();
        if c.at_eof() {
            break;
        }
        let kw = c.name()?;
        match kw.as_str() {
            "states" => {
                while matches!(c.peek(), Tok::Ident(_) | Tok::Quoted(_)) {
                    let (l, col) = c.here();
                    let n = c.name()?;
                    if ids.contains_key(&n) {
                        return Err(SyntaxError::new(l, col, format!("state {n} declared twice")).into());
                    }
                    ids.insert(n.clone(), a.add_state(Name::new(n)));
                }
            }
            "alphabet" => {
                while matches!(c.peek(), Tok::Terminal(_)) {
                    a.add_symbol(Value::new(&c.terminal()?));
                }
            }
            "initial" | "accept" => {
                while matches!(c.peek(), Tok::Ident(_) | Tok::Quoted(_)) {
                    let q = state(&mut c, &ids)?;
                    if kw == "initial" {
                        a.set_initial(q);
                    } else {
                        a.set_accepting(q);
                    }
                }
            }
            "trans" => {
                let p = state(&mut c, &ids)?;
                let s = c.terminal()?;
                let q = state(&mut c, &ids)?;
                a.add_transition(p, Value::new(&s), q);
            }
            other => return Err(c.error(format!("unknown directive {other}")).into()),
        }
        c.end_line()?;
    }
    Ok(a)
}

pub fn render_automaton(a: &Nfa) -> String {
    let name = |q: usize| render_name(a.name(q).as_str(), &[]);
    let mut out = String::from("states");
    for q in 0..a.num_states() {
        out.push(' ');
        out.push_str(&name(q));
    }
    out.push('\n');
    if !a.alphabet().is_empty() {
        out.push_str("alphabet");
        for v in a.alphabet() {
            out.push(' ');
            out.push_str(&render_terminal(v.text()));
        }
        out.push('\n');
    }
    for (kw, set) in [("initial", a.initial()), ("accept", a.accepting())] {
        if !set.is_empty() {
            out.push_str(kw);
            for &q in set {
                out.push(' ');
                out.push_str(&name(q));
            }
            out.push('\n');
        }
    }
    for (p, v, q) in a.transitions() {
        out.push_str(&format!("trans {} {} {}\n", name(p), render_terminal(v.text()), name(q)));
    }
    out
}

pub fn render_dfa(d: &Dfa) -> String {
    render_automaton(&d.to_nfa())
}

// ---------------------------------------------------------- graphs and PMRs

/// Tab-separated `src label dst` lines; a line with a single field declares
/// an isolated node.
pub fn parse_graph(text: &str) -> Result<GraphDb, FormatError> {
    let mut g = GraphDb::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        match fields.as_slice() {
            [n] => g.add_node(Value::new(n)),
            [s, l, d] if !s.is_empty() && !l.is_empty() && !d.is_empty() => {
                g.add_edge(Value::new(s), Value::new(l), Value::new(d))
                    .map_err(|err| FormatError::Pmr(Located { line: Some(i + 1), err }))?;
            }
            _ => {
                let msg = format!("expected `src<TAB>label<TAB>dst`, found {} fields", fields.len());
                return Err(SyntaxError::new(i + 1, 1, msg).into());
            }
        }
    }
    Ok(g)
}

pub fn render_graph(g: &GraphDb) -> String {
    let mut out = String::new();
    let mut touched = std::collections::BTreeSet::new();
    for (s, _, d) in g.edges() {
        touched.insert(s);
        touched.insert(d);
    }
    for v in g.nodes() {
        if !touched.contains(v) {
            out.push_str(v.text());
            out.push('\n');
        }
    }
    for (s, l, d) in g.edges() {
        out.push_str(&format!("{}\t{}\t{}\n", s.text(), l.text(), d.text()));
    }
    out
}

/// A parsed PMR file before it is checked against its graph.
#[derive(Clone, Debug, Default)]
pub struct PmrFile {
    /// The `graph` line, as written.
    pub graph: Option<String>,
    pub raw: RawPmr,
    node_lines: BTreeMap<String, usize>,
    edge_lines: Vec<usize>,
}

pub fn parse_pmr_file(text: &str) -> Result<PmrFile, FormatError> {
    let mut file = PmrFile::default();
    // the graph path is free text, so its line is taken out before tokenizing
    let mut rest = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim_start();
        if let Some(p) = t.strip_prefix("graph").filter(|p| p.starts_with(char::is_whitespace)) {
            if file.graph.is_some() {
                return Err(SyntaxError::new(i + 1, 1, "second graph line").into());
            }
            let p = p.trim();
            let p = p.strip_prefix('"').and_then(|p| p.strip_suffix('"')).unwrap_or(p);
            file.graph = Some(p.to_string());
            rest.push('\n');
        } else {
            rest.push_str(line);
            rest.push('\n');
        }
    }
    let mut c = Cursor::new(&rest)?;
    loop {
        c.skip_newlines();
        if c.at_eof() {
            break;
        }
        let line = c.line();
        let kw = c.name()?;
        match kw.as_str() {
            "node" => {
                let u = c.name()?;
                c.expect("->")?;
                let img = c.name()?;
                file.node_lines.entry(u.clone()).or_insert(line);
                file.raw.nodes.push(Name::new(u.clone()));
                file.raw.gamma.insert(Name::new(u), Value::new(&img));
            }
            "edge" => {
                let u = c.name()?;
                let v = c.name()?;
                file.edge_lines.push(line);
                file.raw.edges.push((Name::new(u), Name::new(v)));
            }
            "start" | "target" => {
                while matches!(c.peek(), Tok::Ident(_) | Tok::Quoted(_)) {
                    let u = Name::new(c.name()?);
                    if kw == "start" {
                        file.raw.starts.push(u);
                    } else {
                        file.raw.targets.push(u);
                    }
                }
            }
            other => return Err(c.error(format!("unknown directive {other}")).into()),
        }
        c.end_line()?;
    }
    Ok(file)
}

impl PmrFile {
    pub fn validate(self, g: &GraphDb) -> Result<Pmr, FormatError> {
        let edge_line = |u: &Name, v: &Name| {
            self.raw
                .edges
                .iter()
                .position(|(a, b)| a == u && b == v)
                .map(|i| self.edge_lines[i])
        };
        Pmr::validate(self.raw.clone(), g).map_err(|err| {
            let line = match &err {
                PmrError::NotHomomorphism(u, v, ..) => edge_line(u, v),
                PmrError::DanglingReference(n) => self.node_lines.get(n).copied(),
                _ => None,
            };
            FormatError::Pmr(Located { line, err })
        })
    }
}

pub fn parse_pmr(text: &str, g: &GraphDb) -> Result<Pmr, FormatError> {
    parse_pmr_file(text)?.validate(g)
}

pub fn render_pmr(r: &Pmr, graph_path: Option<&str>) -> String {
    let name = |u: usize| render_name(r.name(u).as_str(), &[]);
    let mut out = String::new();
    if let Some(p) = graph_path {
        out.push_str(&format!("graph {p}\n"));
    }
    for u in 0..r.num_nodes() {
        out.push_str(&format!("node {} -> {}\n", name(u), value_text(r.gamma(u))));
    }
    for u in 0..r.num_nodes() {
        for &v in r.successors(u) {
            out.push_str(&format!("edge {} {}\n", name(u), name(v)));
        }
    }
    for (kw, set) in [("start", r.starts()), ("target", r.targets())] {
        if !set.is_empty() {
            out.push_str(kw);
            for &u in set {
                out.push(' ');
                out.push_str(&name(u));
            }
            out.push('\n');
        }
    }
    out
}
