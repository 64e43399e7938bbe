//! The `factrel` command line.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use factrel_core::algorithms::{
    containment, count_tuples, enumerate_tuples, equivalence, membership_cyk, Semantics,
    ValueOrder,
};
use factrel_core::automata::{
    dfa_contained, dfa_equivalent, glushkov, is_unambiguous_nfa, mark_automaton, minimize_dfa,
    nfa_from_rightlinear, rightlinear_from_acyclic_nfa, subset_construction,
    tzeng_multiset_equivalence, Nfa,
};
use factrel_core::families::{
    blowup_report, gen_family, mark_grammar, BlowupRow, Family, FamilyId, Instance, Translation,
};
use factrel_core::gen::{random_acyclic_nfa, random_acyclic_ufa, random_ufr, random_vlfr, GenConfig};
use factrel_core::grammar::{
    beta, beta_inv, classify, ecfg_to_regex, to_cnf, to_plain_cfg, Ecfg, DEFAULT_LENGTH_CAP,
};
use factrel_core::nfr::{evaluate_nfr, nfr_from_disjoint_ufr, unnamed_of, Attr, AttributeOrder, Nfr};
use factrel_core::pmr::{paths_of, pmr_to_vlfr, rpq_to_pmr, GraphDb, PathMode, Pmr};
use factrel_core::ufr::{evaluate, has_disjoint_positions, is_deterministic, Ufr};
use factrel_core::{Limits, Tuple, Value};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::formats::{
    parse_automaton, parse_graph, parse_grammar, parse_nfr, parse_pmr_file, parse_regex, parse_ufr,
    render_automaton, render_dfa, render_grammar, render_nfr, render_pmr, render_regex, render_ufr,
};
use crate::output::{bench_table, csv_rows, write_bench_csv};

#[derive(Parser, Debug)]
#[command(name = "factrel", version, about = "Factorized relations, grammars and path representations")]
struct Cli {
    /// Largest relation or word set that may be materialized.
    #[arg(long, global = true, value_name = "N")]
    cap_tuples: Option<usize>,
    /// Largest automaton a construction may build.
    #[arg(long, global = true, value_name = "N")]
    cap_states: Option<usize>,
    /// Input format, when the file extension does not tell.
    #[arg(long = "as", global = true, value_name = "KIND")]
    kind: Option<Kind>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print the tuples of a relation as CSV, sorted by text.
    Eval {
        file: PathBuf,
        /// Attribute order for named relations, comma separated.
        #[arg(long, value_delimiter = ',')]
        attr_order: Option<Vec<String>>,
    },
    /// Test whether a tuple belongs to a relation.
    Member {
        file: PathBuf,
        values: Vec<String>,
    },
    /// Count the tuples of a relation.
    Count {
        file: PathBuf,
        /// Trust that every tuple has exactly one derivation tree.
        #[arg(long)]
        assume_deterministic: bool,
    },
    /// Stream the tuples of a relation as CSV.
    Enum {
        file: PathBuf,
        #[arg(long)]
        limit: Option<u64>,
        #[arg(long, value_enum, default_value = "first")]
        order: OrderArg,
    },
    /// Translate between representations.
    Convert {
        file: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
    },
    /// Decide equivalence (or containment) of two relations or automata.
    Equiv {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum, default_value = "set")]
        mode: ModeArg,
        /// Decide containment of the left input in the right one instead.
        #[arg(long)]
        contained: bool,
    },
    /// Measure representation sizes over the benchmark families.
    Bench {
        /// Families, comma separated: power, equality, L1 .. L6.
        #[arg(long, value_delimiter = ',')]
        families: Option<Vec<String>>,
        /// Parameter range such as `3..8`, or a single value.
        #[arg(long, default_value = "1..4")]
        n: String,
        /// Translations, comma separated: cfg-nfa, min-dfa, set, mark.
        #[arg(long, value_delimiter = ',')]
        translations: Option<Vec<String>>,
        /// Also write the rows as CSV to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Evaluate a regular path query into a path multiset representation.
    Rpq {
        graph: PathBuf,
        /// Expression over edge labels; bare identifiers are labels.
        #[arg(long)]
        regex: String,
        /// Source nodes, comma separated. All nodes when absent.
        #[arg(long, value_delimiter = ',')]
        from: Option<Vec<String>>,
        /// Target nodes, comma separated. All nodes when absent.
        #[arg(long, value_delimiter = ',')]
        to: Option<Vec<String>>,
        /// Print the relation of the (finite) path set instead.
        #[arg(long)]
        to_vlfr: bool,
    },
    /// Mark every symbol with its position.
    Mark { file: PathBuf },
    /// Report structural properties.
    Classify { file: PathBuf },
    /// List the paths of a PMR with their multiplicities.
    Paths {
        file: PathBuf,
        /// Largest number of edges per path.
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long, value_enum, default_value = "multiset")]
        mode: ModeArg,
        /// Graph file, overriding the `graph` line.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Generate a family instance or a random test instance.
    Gen {
        /// A family (power, equality, L1 .. L6) or random-ufr, random-vlfr,
        /// random-nfa, random-ufa.
        what: String,
        /// Family parameter or size bound.
        #[arg(default_value_t = 3)]
        n: usize,
        #[arg(long)]
        marked: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Ufr,
    Nfr,
    Grammar,
    Automaton,
    Graph,
    Pmr,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrderArg {
    First,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Set,
    Multiset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    Beta,
    BetaInv,
    PlainCfg,
    Cnf,
    Regex,
    Glushkov,
    Subset,
    Minimize,
    Mark,
    Nfr,
    RightLinear,
    Nfa,
}

#[derive(Debug)]
enum Fail {
    Usage(String),
    Domain(String),
}

fn dom(e: impl Display) -> Fail {
    Fail::Domain(e.to_string())
}

fn usage(msg: impl Into<String>) -> Fail {
    Fail::Usage(msg.into())
}

type Res<T> = Result<T, Fail>;

enum Input {
    Ufr(Ufr),
    Nfr(Nfr),
    Grammar(Ecfg),
    Automaton(Nfa),
    Graph(GraphDb),
    Pmr(Pmr),
}

impl Input {
    fn kind(&self) -> &'static str {
        match self {
            Input::Ufr(_) => "relation",
            Input::Nfr(_) => "named relation",
            Input::Grammar(_) => "grammar",
            Input::Automaton(_) => "automaton",
            Input::Graph(_) => "graph",
            Input::Pmr(_) => "PMR",
        }
    }
}

fn kind_of(path: &Path, forced: Option<Kind>) -> Res<Kind> {
    if let Some(k) = forced {
        return Ok(k);
    }
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    Ok(match ext {
        "ufr" | "vlfr" | "fr" => Kind::Ufr,
        "nfr" => Kind::Nfr,
        "cfg" | "ecfg" | "grammar" | "g" => Kind::Grammar,
        "nfa" | "ufa" | "dfa" | "fa" | "aut" => Kind::Automaton,
        "tsv" => Kind::Graph,
        "pmr" => Kind::Pmr,
        _ => {
            return Err(usage(format!(
                "cannot tell the format of {} from its extension; pass --as",
                path.display()
            )))
        }
    })
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| dom(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Res<GraphDb> {
    parse_graph(&read(path)?).map_err(|e| dom(format!("{}: {e}", path.display())))
}

fn load_pmr(path: &Path, graph: Option<&Path>) -> Res<Pmr> {
    let file = parse_pmr_file(&read(path)?).map_err(|e| dom(format!("{}: {e}", path.display())))?;
    let gpath = match (graph, &file.graph) {
        (Some(g), _) => g.to_path_buf(),
        (None, Some(g)) => path.parent().unwrap_or(Path::new(".")).join(g),
        (None, None) => return Err(usage("the PMR has no graph line; pass --graph")),
    };
    let g = load_graph(&gpath)?;
    file.validate(&g).map_err(|e| dom(format!("{}: {e}", path.display())))
}

fn load(path: &Path, forced: Option<Kind>) -> Res<Input> {
    let kind = kind_of(path, forced)?;
    if kind == Kind::Pmr {
        return Ok(Input::Pmr(load_pmr(path, None)?));
    }
    let text = read(path)?;
    let at = |e: crate::formats::FormatError| dom(format!("{}: {e}", path.display()));
    Ok(match kind {
        Kind::Ufr => Input::Ufr(parse_ufr(&text).map_err(at)?),
        Kind::Nfr => Input::Nfr(parse_nfr(&text).map_err(at)?),
        Kind::Grammar => Input::Grammar(parse_grammar(&text).map_err(at)?),
        Kind::Automaton => Input::Automaton(parse_automaton(&text).map_err(at)?),
        Kind::Graph => Input::Graph(parse_graph(&text).map_err(at)?),
        Kind::Pmr => unreachable!(),
    })
}

fn load_ufr(path: &Path, forced: Option<Kind>) -> Res<Ufr> {
    match load(path, forced)? {
        Input::Ufr(f) => Ok(f),
        Input::Grammar(g) => beta_inv(&g).map_err(dom),
        other => Err(usage(format!("expected a relation, got a {}", other.kind()))),
    }
}

fn as_grammar(input: Input) -> Res<Ecfg> {
    match input {
        Input::Grammar(g) => Ok(g),
        Input::Ufr(f) => Ok(beta(&f)),
        other => Err(usage(format!("expected a grammar or relation, got a {}", other.kind()))),
    }
}

fn as_automaton(input: Input) -> Res<Nfa> {
    match input {
        Input::Automaton(a) => Ok(a),
        Input::Ufr(f) => match nfa_from_rightlinear(&f) {
            Ok(a) => Ok(a),
            Err(_) => glushkov(&ecfg_to_regex(&beta(&f)).map_err(dom)?).map_err(dom),
        },
        Input::Grammar(g) => glushkov(&ecfg_to_regex(&g).map_err(dom)?).map_err(dom),
        other => Err(usage(format!("expected an automaton, got a {}", other.kind()))),
    }
}

/// Runs the command line `args` (program name first). Returns the exit
/// code: 0 on success, 1 on a domain error, 2 on a usage error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let mut limits = Limits::default();
    if let Some(c) = cli.cap_tuples {
        limits.max_tuples = c;
    }
    if let Some(c) = cli.cap_states {
        limits.max_states = c;
    }
    let result = dispatch(cli.cmd, cli.kind, &limits, out, err);
    let _ = out.flush();
    match result {
        Ok(()) => 0,
        Err(Fail::Domain(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Fail::Usage(m)) => {
            let _ = writeln!(err, "usage error: {m}");
            2
        }
    }
}

fn io(e: std::io::Error) -> Fail {
    dom(e)
}

fn dispatch(
    cmd: Cmd,
    kind: Option<Kind>,
    limits: &Limits,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Res<()> {
    match cmd {
        Cmd::Eval { file, attr_order } => match load(&file, kind)? {
            Input::Nfr(f) => {
                let order = match attr_order {
                    Some(a) => AttributeOrder::new(a.into_iter().map(Attr::new).collect()),
                    None => AttributeOrder::lexicographic(f.schema()),
                };
                let rel = unnamed_of(&evaluate_nfr(&f, limits).map_err(dom)?, &order).map_err(dom)?;
                let header: Vec<&str> = order.attrs().iter().map(|a| a.as_str()).collect();
                csv_rows(out, Some(&header), rel.sorted_by_text().iter()).map_err(dom)
            }
            other => {
                let f = match other {
                    Input::Ufr(f) => f,
                    Input::Grammar(g) => beta_inv(&g).map_err(dom)?,
                    Input::Pmr(r) => pmr_to_vlfr(&r).map_err(dom)?,
                    o => return Err(usage(format!("cannot evaluate a {}", o.kind()))),
                };
                let rel = evaluate(&f, None, limits).map_err(dom)?;
                csv_rows(out, None, rel.sorted_by_text().iter()).map_err(dom)
            }
        },
        Cmd::Member { file, values } => {
            let f = load_ufr(&file, kind)?;
            let t = Tuple::from_texts(&values);
            writeln!(out, "{}", membership_cyk(&f, &t)).map_err(io)
        }
        Cmd::Count { file, assume_deterministic } => {
            let f = load_ufr(&file, kind)?;
            let r = count_tuples(&f, assume_deterministic, limits).map_err(dom)?;
            writeln!(out, "{}", r.count).map_err(io)?;
            writeln!(out, "method: {}", r.method.as_str()).map_err(io)
        }
        Cmd::Enum { file, limit, order } => {
            let f = load_ufr(&file, kind)?;
            let order = match order {
                OrderArg::First => ValueOrder::FirstAppearance,
                OrderArg::Text => ValueOrder::Text,
            };
            let stream = enumerate_tuples(&f, order, limits).map_err(dom)?;
            let take = limit.map_or(usize::MAX, |l| l.try_into().unwrap_or(usize::MAX));
            csv_rows(out, None, stream.take(take)).map_err(dom)
        }
        Cmd::Convert { file, to } => convert(load(&file, kind)?, to, limits, out, err),
        Cmd::Mark { file } => convert(load(&file, kind)?, Target::Mark, limits, out, err),
        Cmd::Equiv { left, right, mode, contained } => {
            equiv(load(&left, kind)?, load(&right, kind)?, mode, contained, limits, out)
        }
        Cmd::Bench { families, n, translations, csv } => {
            let families = match families {
                None => Family::ALL.to_vec(),
                Some(fs) => fs
                    .iter()
                    .map(|s| Family::parse(s).ok_or_else(|| usage(format!("unknown family {s}"))))
                    .collect::<Res<_>>()?,
            };
            let translations = match translations {
                None => Translation::ALL.to_vec(),
                Some(ts) => ts
                    .iter()
                    .map(|s| Translation::parse(s).ok_or_else(|| usage(format!("unknown translation {s}"))))
                    .collect::<Res<_>>()?,
            };
            let range = parse_range(&n)?;
            let rows: Vec<BlowupRow> = blowup_report(&families, range, &translations, limits);
            write!(out, "{}", bench_table(&rows)).map_err(io)?;
            if let Some(path) = csv {
                let file = std::fs::File::create(&path).map_err(|e| dom(format!("{}: {e}", path.display())))?;
                write_bench_csv(file, &rows).map_err(dom)?;
            }
            Ok(())
        }
        Cmd::Rpq { graph, regex, from, to, to_vlfr } => {
            let g = load_graph(&graph)?;
            let e = parse_regex(&regex, true).map_err(|e| usage(format!("--regex: {e}")))?;
            let set = |v: Option<Vec<String>>| v.map(|v| v.iter().map(|s| Value::new(s)).collect());
            let (from, to) = (set(from), set(to));
            let r = rpq_to_pmr(&g, &e, from.as_ref(), to.as_ref()).map_err(dom)?;
            if to_vlfr {
                let f = pmr_to_vlfr(&r).map_err(dom)?;
                write!(out, "{}", render_ufr(&f)).map_err(io)
            } else {
                // absolute, so the output can be saved anywhere
                let abs = std::fs::canonicalize(&graph).unwrap_or(graph);
                let shown = abs.to_string_lossy().into_owned();
                write!(out, "{}", render_pmr(&r, Some(&shown))).map_err(io)
            }
        }
        Cmd::Classify { file } => classify_cmd(load(&file, kind)?, limits, out),
        Cmd::Paths { file, bound, mode, graph } => {
            if kind.is_some_and(|k| k != Kind::Pmr) {
                return Err(usage("paths reads a PMR"));
            }
            let r = load_pmr(&file, graph.as_deref())?;
            let mode = match mode {
                ModeArg::Set => PathMode::Set,
                ModeArg::Multiset => PathMode::Multiset,
            };
            let ps = paths_of(&r, mode, bound, limits).map_err(dom)?;
            writeln!(err, "finite: {}", ps.finite).map_err(io)?;
            let rows: Vec<Vec<String>> = ps
                .paths
                .iter()
                .map(|(w, m)| {
                    let mut row = vec![m.to_string()];
                    row.extend(w.iter().map(|v| v.text().to_string()));
                    row
                })
                .collect();
            crate::output::csv_records(out, &rows).map_err(dom)
        }
        Cmd::Gen { what, n, marked, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = GenConfig::default();
            let text = match what.as_str() {
                "random-ufr" => render_ufr(&random_ufr(&mut rng, &cfg)),
                "random-vlfr" => render_ufr(&random_vlfr(&mut rng, &cfg)),
                "random-nfa" => render_automaton(&random_acyclic_nfa(&mut rng, n.max(1), 3)),
                "random-ufa" => render_automaton(&random_acyclic_ufa(&mut rng, n.max(1), 3)),
                name => {
                    let family = Family::parse(name).ok_or_else(|| usage(format!("unknown family {name}")))?;
                    let id = if marked { FamilyId::marked(family) } else { FamilyId::plain(family) };
                    match gen_family(id, n).map_err(dom)? {
                        Instance::Ufr(f) => render_ufr(&f),
                        Instance::Grammar(g) => render_grammar(&g),
                        Instance::Automaton(a) => render_automaton(&a),
                        Instance::Deterministic(d) => render_dfa(&d),
                    }
                }
            };
            write!(out, "{text}").map_err(io)
        }
    }
}

fn parse_range(s: &str) -> Res<std::ops::RangeInclusive<usize>> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| usage(format!("bad range {s}")));
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        Ok(num(a)?..=num(b)?)
    } else {
        let a = num(s)?;
        Ok(a..=a)
    }
}

fn convert(input: Input, to: Target, limits: &Limits, out: &mut dyn Write, err: &mut dyn Write) -> Res<()> {
    let text = match to {
        Target::Beta => render_grammar(&as_grammar(input)?),
        Target::BetaInv => render_ufr(&beta_inv(&as_grammar(input)?).map_err(dom)?),
        Target::PlainCfg => render_grammar(&to_plain_cfg(&as_grammar(input)?).map_err(dom)?.to_ecfg()),
        Target::Cnf => {
            let cfg = to_plain_cfg(&as_grammar(input)?).map_err(dom)?;
            render_grammar(&to_cnf(&cfg).to_ecfg())
        }
        Target::Regex => format!("{}\n", render_regex(&ecfg_to_regex(&as_grammar(input)?).map_err(dom)?)),
        Target::Glushkov => {
            let e = ecfg_to_regex(&as_grammar(input)?).map_err(dom)?;
            render_automaton(&glushkov(&e).map_err(dom)?)
        }
        Target::Subset => render_dfa(&subset_construction(&as_automaton(input)?, limits).map_err(dom)?),
        Target::Minimize => {
            let d = subset_construction(&as_automaton(input)?, limits).map_err(dom)?;
            render_dfa(&minimize_dfa(&d))
        }
        Target::Nfa => render_automaton(&as_automaton(input)?),
        Target::RightLinear => {
            let a = as_automaton(input)?;
            render_ufr(&rightlinear_from_acyclic_nfa(&a).map_err(dom)?)
        }
        Target::Nfr => {
            let f = match input {
                Input::Ufr(f) => f,
                Input::Grammar(g) => beta_inv(&g).map_err(dom)?,
                o => return Err(usage(format!("cannot name the columns of a {}", o.kind()))),
            };
            let c = nfr_from_disjoint_ufr(&f).map_err(dom)?;
            if !c.cloned.is_empty() {
                let names: Vec<&str> = c.cloned.iter().map(|n| n.as_str()).collect();
                writeln!(err, "cloned per offset: {}", names.join(", ")).map_err(io)?;
            }
            render_nfr(&c.nfr)
        }
        Target::Mark => match input {
            Input::Automaton(a) => {
                let m = mark_automaton(&a).map_err(dom)?;
                if m.split {
                    writeln!(err, "states split by position").map_err(io)?;
                }
                render_automaton(&m.nfa)
            }
            Input::Grammar(g) => render_grammar(&mark_grammar(&g).map_err(dom)?),
            Input::Ufr(f) => {
                let g = mark_grammar(&beta(&f)).map_err(dom)?;
                render_ufr(&beta_inv(&g).map_err(dom)?)
            }
            o => return Err(usage(format!("cannot mark a {}", o.kind()))),
        },
    };
    write!(out, "{text}").map_err(io)
}

fn equiv(a: Input, b: Input, mode: ModeArg, contained: bool, limits: &Limits, out: &mut dyn Write) -> Res<()> {
    let (holds, method) = match (a, b) {
        (Input::Automaton(a), Input::Automaton(b)) => match mode {
            ModeArg::Multiset if contained => return Err(usage("multiset containment of automata is not supported")),
            ModeArg::Multiset => (tzeng_multiset_equivalence(&a, &b), "tzeng"),
            ModeArg::Set => {
                let da = minimize_dfa(&subset_construction(&a, limits).map_err(dom)?);
                let db = minimize_dfa(&subset_construction(&b, limits).map_err(dom)?);
                let h = if contained { dfa_contained(&da, &db) } else { dfa_equivalent(&da, &db) };
                (h, "minimal-dfa")
            }
        },
        (a, b) => {
            let to_ufr = |i: Input| match i {
                Input::Ufr(f) => Ok(f),
                Input::Grammar(g) => beta_inv(&g).map_err(dom),
                o => Err(usage(format!("cannot compare a {}", o.kind()))),
            };
            let (f, g) = (to_ufr(a)?, to_ufr(b)?);
            let sem = match mode {
                ModeArg::Set => Semantics::Set,
                ModeArg::Multiset => Semantics::Multiset,
            };
            let r = if contained {
                containment(&f, &g, sem, limits)
            } else {
                equivalence(&f, &g, sem, limits)
            }
            .map_err(dom)?;
            (r.holds, r.method.as_str())
        }
    };
    let verdict = match (contained, holds) {
        (false, true) => "equivalent",
        (false, false) => "not equivalent",
        (true, true) => "contained",
        (true, false) => "not contained",
    };
    writeln!(out, "{verdict}").map_err(io)?;
    writeln!(out, "method: {method}").map_err(io)
}

fn classify_cmd(input: Input, limits: &Limits, out: &mut dyn Write) -> Res<()> {
    let mut lines: Vec<(String, String)> = Vec::new();
    let grammar = |g: &Ecfg, lines: &mut Vec<(String, String)>| {
        let c = classify(g, DEFAULT_LENGTH_CAP);
        lines.push(("recursive".into(), c.recursive.to_string()));
        lines.push(("star-free".into(), c.star_free.to_string()));
        lines.push(("uniform-length".into(), c.uniform_length.to_string()));
        if let Some(len) = c.lengths.as_ref().and_then(|l| l.get(g.start())).and_then(|l| l.single()) {
            lines.push(("length".into(), len.to_string()));
        }
    };
    match input {
        Input::Ufr(f) => {
            lines.push(("definitions".into(), f.defs().len().to_string()));
            lines.push(("size".into(), f.size().to_string()));
            let arity = f.start_arity().map_or("variable".to_string(), |k| k.to_string());
            lines.push(("arity".into(), arity));
            grammar(&beta(&f), &mut lines);
            let det = is_deterministic(&f, limits).map_err(dom)?;
            lines.push(("deterministic".into(), det.to_string()));
            let disjoint = match has_disjoint_positions(&f) {
                Ok(d) => d.to_string(),
                Err(e) => format!("n/a ({e})"),
            };
            lines.push(("disjoint-positions".into(), disjoint));
        }
        Input::Grammar(g) => {
            lines.push(("nonterminals".into(), g.rules().len().to_string()));
            lines.push(("size".into(), g.size().to_string()));
            grammar(&g, &mut lines);
        }
        Input::Automaton(a) => {
            lines.push(("states".into(), a.num_states().to_string()));
            lines.push(("transitions".into(), a.num_transitions().to_string()));
            lines.push(("deterministic".into(), a.is_deterministic().to_string()));
            lines.push(("unambiguous".into(), is_unambiguous_nfa(&a).to_string()));
            lines.push(("acyclic".into(), a.is_acyclic().to_string()));
        }
        Input::Pmr(r) => {
            lines.push(("nodes".into(), r.num_nodes().to_string()));
            lines.push(("edges".into(), r.num_edges().to_string()));
            lines.push(("finite".into(), r.is_finite().to_string()));
        }
        Input::Graph(g) => {
            lines.push(("nodes".into(), g.nodes().len().to_string()));
            lines.push(("edges".into(), g.edges().count().to_string()));
            lines.push(("labels".into(), g.labels().len().to_string()));
        }
        Input::Nfr(f) => {
            lines.push(("definitions".into(), f.defs().len().to_string()));
            lines.push(("size".into(), f.size().to_string()));
            let attrs: Vec<&str> = f.schema().iter().map(|a| a.as_str()).collect();
            lines.push(("attributes".into(), attrs.join(",")));
        }
    }
    for (k, v) in lines {
        writeln!(out, "{k}: {v}").map_err(io)?;
    }
    Ok(())
}
