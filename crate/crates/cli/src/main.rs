//! `zorn`: JSON front end for the Zorn vector-matrix library.

use std::fs;
use std::io::{self, Read, Write};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use zorn_core::acceptance::run_all;
use zorn_core::factor::{decompose_congruence, factor_unital, split_gamma1_delta};
use zorn_core::floop::{
    closure, derived_subloop, gamma_ns_image_in, index_or_cosets, lagrange_check, normality_check, power_closure,
    LagrangeOutcome, NormalityOutcome, NormalityWitness,
};
use zorn_core::quotient::{enumerate_sll, index_gamma};
use zorn_core::wohl::wohlfahrt_split;
use zorn_core::{Error, ExprTree, FiniteLoop, SubloopSet, ZornMatrix};

#[derive(Parser)]
#[command(name = "zorn", version, about = "Zorn vector-matrix algebra, congruence subloops and finite loops")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Product A·B.
    Mul { a: String, b: String },
    /// Determinant ab − x·y.
    Det { a: String },
    /// Inverse of an invertible matrix.
    Inv { a: String },
    /// Reduction modulo m.
    Reduce {
        a: String,
        #[arg(long = "mod")]
        modulus: u64,
    },
    /// Factor a unital matrix of Γ(q) into level-q elementaries.
    Factor {
        a: String,
        #[arg(long)]
        level: u64,
    },
    /// Decompose an element of Γ(n) into level-n generators.
    Decompose {
        a: String,
        #[arg(long)]
        level: u64,
    },
    /// Split an element of Γ(n) into one Γ_(1)(n) factor and Δ(n) factors.
    Split {
        a: String,
        #[arg(long)]
        level: u64,
    },
    /// Write A ∈ Γ(n1) as B·C with B ∈ Δ(n1) and C ∈ Γ(n2).
    Wohlfahrt {
        a: String,
        #[arg(long)]
        n1: u64,
        #[arg(long)]
        n2: u64,
    },
    /// Enumerate SLL(2, Z/mZ), one canonical JSON matrix per line.
    Enumerate {
        #[arg(long = "mod")]
        modulus: u64,
        #[arg(long)]
        count_only: bool,
    },
    /// Index of Γ(n) in Γ.
    Index { n: u64 },
    /// Analyse the subloop generated by a seed inside SLL(2, Z/mZ).
    LoopAnalyze {
        #[arg(long = "mod")]
        modulus: u64,
        /// JSON array of matrices (inline or a file path).
        #[arg(long)]
        seed: Option<String>,
        /// closure | derived | power:s | lagrange | normal | gamma-ns:n,s
        #[arg(long)]
        op: String,
    },
    /// Run the acceptance suite.
    Selftest {
        #[arg(long)]
        slow: bool,
    },
}

enum Failure {
    Library(Error),
    Malformed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Malformed(msg) => Failure::Malformed(msg),
            other => Failure::Library(other),
        }
    }
}

type Outcome = std::result::Result<Value, Failure>;

/// Inline JSON when the argument starts with `{` or `[`, standard input for
/// `-`, a file path otherwise.
fn read_json(arg: &str) -> std::result::Result<Value, Failure> {
    let text = match arg.trim_start().chars().next() {
        Some('{') | Some('[') => arg.to_string(),
        _ if arg == "-" => {
            let mut buf = String::new();
            io::stdin().read_to_string(&mut buf).map_err(|e| Failure::Malformed(e.to_string()))?;
            buf
        }
        _ => fs::read_to_string(arg).map_err(|e| Failure::Malformed(format!("{arg}: {e}")))?,
    };
    serde_json::from_str(&text).map_err(|e| Failure::Malformed(e.to_string()))
}

fn read_matrix(arg: &str) -> std::result::Result<ZornMatrix, Failure> {
    Ok(ZornMatrix::from_json(&read_json(arg)?)?)
}

fn tree_report(tree: &ExprTree) -> Value {
    json!({ "tree": tree.to_json(), "leaves": tree.leaves().len() })
}

fn element(l: &FiniteLoop, i: u32) -> Value {
    l.element(i).to_json()
}

fn subloop_report(h: &SubloopSet, witnesses: Vec<Value>) -> Value {
    json!({ "order": h.len(), "status": h.status().to_string(), "witnesses": witnesses })
}

fn loop_analyze(modulus: u64, seed: Option<&str>, op: &str) -> Outcome {
    let l = Arc::new(enumerate_sll(modulus)?);
    let full = SubloopSet::full(&l);
    let seed_set = || -> std::result::Result<SubloopSet, Failure> {
        let Some(arg) = seed else {
            return Err(Failure::Malformed(format!("--op {op} needs --seed")));
        };
        let value = read_json(arg)?;
        let items = value.as_array().ok_or_else(|| Failure::Malformed("seed must be a JSON array".into()))?;
        let mut idx = Vec::new();
        for item in items {
            let mat = ZornMatrix::from_json(item)?;
            let i = l.index_of(&mat).ok_or_else(|| {
                Failure::Library(Error::PreconditionViolated(format!("{mat} is not in SLL(2, Z/{modulus})")))
            })?;
            idx.push(i);
        }
        Ok(closure(&l, &idx))
    };
    let parse_u64 = |s: &str| s.trim().parse::<u64>().map_err(|_| Failure::Malformed(format!("bad number in --op {op}")));

    if let Some(s) = op.strip_prefix("power:") {
        let h = seed_set()?;
        return Ok(subloop_report(&power_closure(&h, parse_u64(s)?), vec![]));
    }
    if let Some(rest) = op.strip_prefix("gamma-ns:") {
        let (n, s) = rest.split_once(',').ok_or_else(|| Failure::Malformed("expected gamma-ns:n,s".into()))?;
        return Ok(subloop_report(&gamma_ns_image_in(&l, parse_u64(n)?, parse_u64(s)?)?, vec![]));
    }
    match op {
        "closure" => Ok(subloop_report(&seed_set()?, vec![])),
        "derived" => Ok(subloop_report(&derived_subloop(&seed_set()?), vec![])),
        "lagrange" => {
            let h = seed_set()?;
            match lagrange_check(&full, &h)? {
                LagrangeOutcome::Ok => {
                    let mut report = subloop_report(&h, vec![]);
                    report["lagrange"] = json!("ok");
                    report["cosets"] = json!(index_or_cosets(&full, &h)?);
                    Ok(report)
                }
                LagrangeOutcome::Fails(w) => {
                    let witness = json!({
                        "h": element(&l, w.h),
                        "x": element(&l, w.x),
                        "coset_hx": w.coset_hx.iter().map(|&i| element(&l, i)).collect::<Vec<_>>(),
                        "coset_x": w.coset_x.iter().map(|&i| element(&l, i)).collect::<Vec<_>>(),
                    });
                    let mut report = subloop_report(&h, vec![witness]);
                    report["lagrange"] = json!("fails");
                    Ok(report)
                }
            }
        }
        "normal" => {
            let h = seed_set()?;
            match normality_check(&full, &h)? {
                NormalityOutcome::Ok => {
                    let mut report = subloop_report(&h, vec![]);
                    report["normal"] = json!("ok");
                    Ok(report)
                }
                NormalityOutcome::Fails(w) => {
                    let witness = match w {
                        NormalityWitness::LeftRight { x, h } => json!({
                            "condition": "xH = Hx", "x": element(&l, x), "h": element(&l, h)
                        }),
                        NormalityWitness::LeftAssoc { x, y, h } => json!({
                            "condition": "(xy)H = x(yH)", "x": element(&l, x), "y": element(&l, y), "h": element(&l, h)
                        }),
                        NormalityWitness::RightAssoc { x, y, h } => json!({
                            "condition": "H(xy) = (Hx)y", "x": element(&l, x), "y": element(&l, y), "h": element(&l, h)
                        }),
                    };
                    let mut report = subloop_report(&h, vec![witness]);
                    report["normal"] = json!("fails");
                    Ok(report)
                }
            }
        }
        _ => Err(Failure::Malformed(format!("unknown --op {op}"))),
    }
}

fn selftest(slow: bool) -> (Value, bool) {
    let reports = run_all(slow);
    let passed = reports.iter().all(|r| r.passed);
    let criteria: Vec<Value> = reports
        .iter()
        .map(|r| {
            eprintln!("{r}");
            json!({
                "id": r.id,
                "title": r.title,
                "passed": r.passed,
                "detail": r.detail,
                "seconds": r.elapsed.as_secs_f64(),
            })
        })
        .collect();
    (json!({ "passed": passed, "criteria": criteria }), passed)
}

fn run(cmd: Command, out: &mut impl Write) -> std::result::Result<(Value, bool), Failure> {
    let ok = |v: Value| Ok((v, true));
    match cmd {
        Command::Mul { a, b } => ok(json!({ "product": read_matrix(&a)?.mul(&read_matrix(&b)?)?.to_json() })),
        Command::Det { a } => ok(json!({ "det": read_matrix(&a)?.det().to_string() })),
        Command::Inv { a } => ok(json!({ "inverse": read_matrix(&a)?.inv()?.to_json() })),
        Command::Reduce { a, modulus } => ok(json!({ "reduced": read_matrix(&a)?.reduce_mod(modulus)?.to_json() })),
        Command::Factor { a, level } => ok(tree_report(&factor_unital(&read_matrix(&a)?, level)?)),
        Command::Decompose { a, level } => ok(tree_report(&decompose_congruence(&read_matrix(&a)?, level)?)),
        Command::Split { a, level } => ok(tree_report(&split_gamma1_delta(&read_matrix(&a)?, level)?)),
        Command::Wohlfahrt { a, n1, n2 } => {
            let split = wohlfahrt_split(&read_matrix(&a)?, n1, n2)?;
            ok(json!({ "b_tree": split.b_tree.to_json(), "c": split.c.to_json(), "case": split.case }))
        }
        Command::Enumerate { modulus, count_only } => {
            let l = enumerate_sll(modulus)?;
            if count_only {
                return ok(json!({ "order": l.order() }));
            }
            for m in l.elements() {
                writeln!(out, "{}", m.to_canonical_string()).map_err(|e| Failure::Malformed(e.to_string()))?;
            }
            Ok((Value::Null, true))
        }
        Command::Index { n } => ok(json!({ "index": index_gamma(n)?.to_string() })),
        Command::LoopAnalyze { modulus, seed, op } => ok(loop_analyze(modulus, seed.as_deref(), &op)?),
        Command::Selftest { slow } => Ok(selftest(slow)),
    }
}

fn witness(e: &Error) -> Value {
    match e {
        Error::NotInvertible(s)
        | Error::NotUnimodular(s)
        | Error::InvalidSL2(s)
        | Error::PreconditionViolated(s)
        | Error::NotInGamma(s)
        | Error::DegenerateV(s)
        | Error::LagrangeFails(s)
        | Error::Internal(s) => json!(s),
        Error::NotCoprime(a, b) => json!([a, b]),
        Error::ModulusMismatch(a, b) | Error::NotDivisor(a, b) => json!([a, b]),
        Error::TooLarge(m) => json!(m),
        Error::InvalidAxis(j) => json!(j),
        Error::ParentMismatch | Error::Malformed(_) => Value::Null,
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("ZORN_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second initialization only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli.command, &mut out) {
        Ok((Value::Null, _)) => ExitCode::SUCCESS,
        Ok((value, passed)) => {
            let _ = writeln!(out, "{value}");
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Library(e)) => {
            let _ = writeln!(out, "{}", json!({ "error": e.to_string(), "witness": witness(&e) }));
            ExitCode::from(1)
        }
        Err(Failure::Malformed(msg)) => {
            let _ = writeln!(out, "{}", json!({ "error": format!("malformed input: {msg}"), "witness": null }));
            ExitCode::from(2)
        }
    }
}
