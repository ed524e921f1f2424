use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use flanders::equiv::DEFAULT_SEARCH_BUDGET;
use flanders::io::{format_space, parse_map, parse_space, space_to_json};
use flanders::verify::{
    census, check_names, check_statement, emit_check, emit_report, run_check, CensusSpec, CheckOptions, ReportFormat,
    SpaceKind,
};
use flanders::{
    are_equivalent, equiv_sub_compression, is_primitive, is_r_decomposable, named_space, primitive_reduction, Budget,
    CatalogName, Equivalence, Error, FieldSpec, MatSpace, Matrix, RcShape, Vector,
};

/// Exit codes.
const PASS: u8 = 0;
const FAIL: u8 = 1;
const USAGE: u8 = 2;
const BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "flanders", version, about = "Spaces of bounded-rank matrices over small prime fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Output {
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// List or emit named spaces.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Upper-rank of a space.
    Urank {
        file: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Search for an r-decomposition witness.
    Decomp {
        file: PathBuf,
        #[arg(short = 'r', long = "rank")]
        r: usize,
        /// Only try this split, given as s,t.
        #[arg(long, value_parser = parse_split)]
        split: Option<(usize, usize)>,
        #[command(flatten)]
        out: Output,
    },
    /// Primitivity test, optionally with the reduction to a primitive core.
    Primitive {
        file: PathBuf,
        #[arg(long)]
        reduce: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Decide whether two spaces are equivalent.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        /// Search-node budget.
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Range-compatible maps.
    Rc {
        #[command(subcommand)]
        action: RcAction,
    },
    /// Enumerate every space of a shape and classify those of bounded rank.
    Census {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value = "linear", value_parser = parse_kind)]
        kind: SpaceKind,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Lift the enumeration budget.
        #[arg(long)]
        huge: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Run a registered check, or `list` them.
    Verify {
        name: String,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, value_parser = parse_seed)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Also run instances beyond desk scale.
        #[arg(long)]
        huge: bool,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Emit {
        name: String,
        #[arg(long)]
        q: Option<u32>,
        /// Number of rows; sized entries are square.
        #[arg(long, alias = "size")]
        n: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum RcAction {
    /// Range-compatibility, quasi-range-compatibility and shape of a map.
    Check {
        file: PathBuf,
        #[command(flatten)]
        out: Output,
    },
}

fn parse_split(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected s,t")?;
    Ok((a.trim().parse().map_err(|_| "bad s")?, b.trim().parse().map_err(|_| "bad t")?))
}

fn parse_kind(s: &str) -> Result<SpaceKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_seed(s: &str) -> Result<u64, String> {
    match s.strip_prefix("0x") {
        Some(h) => u64::from_str_radix(h, 16),
        None => s.parse(),
    }
    .map_err(|e| e.to_string())
}

/// A failed command: exit code and message.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::BudgetExceeded { .. }) { BUDGET } else { USAGE };
        Failure(code, e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn read_space(path: &Path) -> Result<MatSpace, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(USAGE, format!("{}: {e}", path.display())))?;
    parse_space(&text).map_err(|e| Failure(USAGE, format!("{}: {e}", path.display())))
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn catalog(action: CatalogAction) -> Outcome {
    match action {
        CatalogAction::List => {
            for c in CatalogName::ALL {
                println!("{:<7} {}", c.to_string(), c.describe());
            }
            Ok(PASS)
        }
        CatalogAction::Emit { name, q, n, p, out } => {
            let c: CatalogName = name.parse()?;
            let size = match (n, p) {
                (Some(n), Some(p)) if n != p => return Err(Failure(USAGE, format!("{c} is square; got {n}x{p}"))),
                (n, p) => n.or(p),
            };
            let q = q.or(c.defining_field().map(u32::from)).ok_or_else(|| Failure(USAGE, format!("{c} needs --q")))?;
            let e = named_space(c, FieldSpec::new(q)?, size)?;
            if out.json {
                print!("{}", space_to_json(&e.space));
            } else {
                print!("# {}\n{}", c.describe(), format_space(&e.space));
            }
            Ok(PASS)
        }
    }
}

fn urank(file: &Path, out: Output) -> Outcome {
    let s = read_space(file)?;
    let r = s.upper_rank(Budget::for_field(s.field()))?;
    if out.json {
        print_json(&json!({ "upper_rank": r, "dim": s.dim(), "n": s.n(), "p": s.p(), "q": s.field().q() }));
    } else {
        println!("{r}");
    }
    Ok(PASS)
}

fn decomp(file: &Path, r: usize, split: Option<(usize, usize)>, out: Output) -> Outcome {
    let s = read_space(file)?;
    let w = match split {
        Some((a, b)) if a + b != r => return Err(Failure(USAGE, format!("split ({a},{b}) does not sum to r = {r}"))),
        Some((a, b)) => equiv_sub_compression(&s, a, b)?,
        None => is_r_decomposable(&s, r)?,
    };
    if out.json {
        print_json(&json!({ "r": r, "witness": w }));
    } else {
        match &w {
            Some(w) => {
                println!("witness: sub-R({},{})", w.s, w.t);
                print_basis("G", s.field(), s.p(), &w.g);
                print_basis("H", s.field(), s.n(), &w.h);
            }
            None => println!("no witness"),
        }
    }
    Ok(if w.is_some() { PASS } else { FAIL })
}

fn print_basis(name: &str, f: FieldSpec, width: usize, basis: &[Vector]) {
    if basis.is_empty() {
        println!("{name} = 0");
    } else {
        println!("{name}, basis as columns:");
        print!("{}", Matrix::from_columns(f, width, basis));
    }
}

fn primitive(file: &Path, reduce: bool, out: Output) -> Outcome {
    let s = read_space(file)?;
    let budget = Budget::for_field(s.field());
    let report = is_primitive(&s, budget)?;
    let reduction = if reduce { Some(primitive_reduction(&s, budget)?) } else { None };
    if out.json {
        print_json(&json!({ "report": report, "reduction": reduction }));
    } else {
        println!("upper-rank {}", report.upper_rank);
        match &report.failure {
            None => println!("primitive"),
            Some(f) => println!("not primitive: condition ({}) {:?}", f.condition(), f),
        }
        if let Some(red) = &reduction {
            println!("reduction: s={} t={} core {}x{} dim {}", red.s, red.t, red.s_prime, red.t_prime, red.core.dim());
            print!("{}", format_space(&red.core));
        }
    }
    Ok(if report.is_primitive() { PASS } else { FAIL })
}

fn equiv(a: &Path, b: &Path, budget: u64, out: Output) -> Outcome {
    let (sa, sb) = (read_space(a)?, read_space(b)?);
    let res = are_equivalent(&sa, &sb, budget)?;
    if out.json {
        print_json(&json!({ "result": res }));
    } else {
        match &res {
            Equivalence::Yes(w) => println!("equivalent\nP:\n{}Q:\n{}", w.pmat, w.qmat),
            Equivalence::No(d) => println!("not equivalent ({d:?})"),
            Equivalence::Inconclusive { explored } => println!("inconclusive after {explored} nodes"),
        }
    }
    Ok(match res {
        Equivalence::Yes(_) => PASS,
        Equivalence::No(_) => FAIL,
        Equivalence::Inconclusive { .. } => BUDGET,
    })
}

fn rc_check(file: &Path, out: Output) -> Outcome {
    let text = fs::read_to_string(file).map_err(|e| Failure(USAGE, format!("{}: {e}", file.display())))?;
    let map = parse_map(&text).map_err(|e| Failure(USAGE, format!("{}: {e}", file.display())))?;
    let budget = Budget::for_field(map.domain().field());
    let rc = map.is_range_compatible(budget)?;
    let line = map.find_qrc_line(budget)?;
    let qrc = rc || line.is_some();
    let shape = if qrc { Some(map.classify_rc_shape()?) } else { None };
    if out.json {
        print_json(&json!({
            "range_compatible": rc,
            "quasi_range_compatible": qrc,
            "line": line,
            "shape": shape,
        }));
    } else {
        println!("range-compatible: {rc}");
        println!("quasi-range-compatible: {qrc}");
        if let Some(d) = &line {
            println!("line D: {d:?}");
        }
        match &shape {
            Some(RcShape::Local(w)) => println!("local: F(M) = M x, x = {:?}", w.x),
            Some(RcShape::PlaneForm { x, x_prime, plane, phi }) => {
                println!("plane form: X = {x:?}, X' = {x_prime:?}, P = {plane:?}");
                print!("phi in the basis of P:\n{phi}");
            }
            Some(RcShape::Neither) => println!("neither local nor plane form"),
            None => {}
        }
    }
    Ok(if rc { PASS } else { FAIL })
}

#[allow(clippy::too_many_arguments)]
fn run_census(
    q: u32,
    n: usize,
    p: usize,
    r: usize,
    dim: usize,
    kind: SpaceKind,
    workers: usize,
    huge: bool,
    out: Output,
) -> Outcome {
    let mut spec = CensusSpec::new(FieldSpec::new(q)?, n, p, r, dim, kind).with_workers(workers);
    if huge {
        spec = spec.with_budget(Budget::UNLIMITED);
    }
    let rep = census(&spec)?;
    let fmt = if out.json { ReportFormat::Json } else { ReportFormat::Text };
    print!("{}", emit_report(&rep, fmt));
    Ok(if rep.passed() { PASS } else { FAIL })
}

fn verify(name: &str, opts: CheckOptions, out: Output) -> Outcome {
    if name == "list" {
        for n in check_names() {
            println!("{n:<20} {}", check_statement(n).unwrap_or(""));
        }
        return Ok(PASS);
    }
    let rep = run_check(name, &opts)?;
    let fmt = if out.json { ReportFormat::Json } else { ReportFormat::Text };
    print!("{}", emit_check(&rep, fmt));
    Ok(if rep.passed { PASS } else { FAIL })
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Catalog { action } => catalog(action),
        Command::Urank { file, out } => urank(&file, out),
        Command::Decomp { file, r, split, out } => decomp(&file, r, split, out),
        Command::Primitive { file, reduce, out } => primitive(&file, reduce, out),
        Command::Equiv { a, b, budget, out } => equiv(&a, &b, budget, out),
        Command::Rc { action: RcAction::Check { file, out } } => rc_check(&file, out),
        Command::Census { q, n, p, r, dim, kind, workers, huge, out } => {
            run_census(q, n, p, r, dim, kind, workers, huge, out)
        }
        Command::Verify { name, trials, seed, workers, huge, out } => {
            let mut opts = CheckOptions { trials, huge, workers, ..CheckOptions::default() };
            if let Some(s) = seed {
                opts.seed = s;
            }
            verify(&name, opts, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
