//! `crnorm`: classification and normal forms of real hypersurface germs in C^3
//! from the command line.

mod commands;
mod expr;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crnorm_core::algebra::Scalar;
use crnorm_core::normalform::DEFAULT_ORDER;
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use commands::{CmdError, Failure, Outcome};
use input::{InputSpec, Weight};

#[derive(Parser, Debug)]
#[command(name = "crnorm", version, about = "Classify and normalize 2-nondegenerate hypersurface germs in C^3")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(clap::Args, Debug, Clone)]
struct Opts {
    /// Truncation order (weighted degree).
    #[arg(long, global = true, default_value_t = DEFAULT_ORDER)]
    order: u32,
    /// Weight of w: 2, 3 or auto (3 when the Levi form vanishes).
    #[arg(long = "weight-w", global = true, default_value = "auto")]
    weight_w: Weight,
    /// Emit one JSON object per input.
    #[arg(long, global = true)]
    json: bool,
    /// key=value file of normalization parameters (normalize only).
    #[arg(long, global = true)]
    normalization: Option<PathBuf>,
    /// Seed for the randomized retries of the classifier.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Process several inputs in parallel.
    #[arg(long, global = true)]
    parallel: bool,
    /// Base point `(a,b,c)` for expressions in Z or w.
    #[arg(long, global = true)]
    point: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Type, invariants and witness jet.
    Classify { inputs: Vec<String> },
    /// Normal form and normalizing transformation (types A.i.1-3).
    Normalize { inputs: Vec<String> },
    /// delta22 / eps22 of an A.i.2 germ.
    Invariants { inputs: Vec<String> },
    /// Levi signature, order of nondegeneracy and degeneracy conditions.
    Nondeg { inputs: Vec<String> },
    /// Equivalence certificate for two germs.
    Equiv { first: String, second: String },
    /// Built-in corpus keys.
    CorpusList,
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    Classify,
    Normalize,
    Invariants,
    Nondeg,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Classify => "classify",
            Kind::Normalize => "normalize",
            Kind::Invariants => "invariants",
            Kind::Nondeg => "nondeg",
        }
    }
}

/// An input argument, or the contents of a file when written `@path`.
fn read_input(arg: &str) -> Result<String, CmdError> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map(|s| s.trim().to_string())
            .map_err(|e| CmdError::new(Failure::Parse, format!("{path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn digest(texts: &[&str]) -> String {
    let mut h = Sha256::new();
    for (k, t) in texts.iter().enumerate() {
        if k > 0 {
            h.update(b"\n");
        }
        h.update(t.as_bytes());
    }
    format!("{:x}", h.finalize())
}

fn read_normalization(path: &PathBuf) -> Result<Vec<(String, Scalar)>, CmdError> {
    let text = std::fs::read_to_string(path).map_err(|e| CmdError::new(Failure::Parse, format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CmdError::new(Failure::Parse, format!("{}:{}: expected key=value", path.display(), n + 1)))?;
        let value = expr::parse_scalar(v)
            .map_err(|e| CmdError::new(Failure::Parse, format!("{}:{}: {e}", path.display(), n + 1)))?;
        out.push((k.trim().to_string(), value));
    }
    Ok(out)
}

struct Record {
    command: &'static str,
    digest: String,
    backend: &'static str,
    outcome: Result<Outcome, CmdError>,
}

fn spec_of(text: &str, opts: &Opts) -> Result<InputSpec, CmdError> {
    let point = opts.point.as_deref().map(input::parse_point3).transpose()?;
    Ok(InputSpec::parse(text, point, opts.weight_w, opts.order)?)
}

fn run_one(kind: Kind, arg: &str, opts: &Opts, entries: Option<&[(String, Scalar)]>) -> Record {
    let mut backend = "exact";
    let mut dig = digest(&[arg]);
    let outcome = (|| {
        let text = read_input(arg)?;
        dig = digest(&[&text]);
        let germ = spec_of(&text, opts)?.germ()?;
        if !germ.phi.is_exact() {
            backend = "float";
        }
        match kind {
            Kind::Classify => commands::classify(&germ, opts.seed),
            Kind::Normalize => commands::normalize(&germ, opts.order, opts.seed, entries),
            Kind::Invariants => commands::invariants(&germ, opts.order),
            Kind::Nondeg => commands::nondeg(&germ),
        }
    })();
    Record { command: kind.name(), digest: dig, backend, outcome }
}

fn run_equiv(first: &str, second: &str, opts: &Opts) -> Record {
    let mut backend = "exact";
    let mut dig = digest(&[first, second]);
    let outcome = (|| {
        let (a, b) = (read_input(first)?, read_input(second)?);
        dig = digest(&[&a, &b]);
        let g1 = spec_of(&a, opts)?.germ()?;
        let g2 = spec_of(&b, opts)?.germ()?;
        if !g1.phi.is_exact() || !g2.phi.is_exact() {
            backend = "float";
        }
        commands::equiv(&g1, &g2, opts.order)
    })();
    Record { command: "equiv", digest: dig, backend, outcome }
}

fn to_json(r: &Record) -> Value {
    match &r.outcome {
        Ok(o) => json!({
            "command": r.command,
            "input_digest": r.digest,
            "backend": r.backend,
            "result": o.result,
            "assertions_checked": o.checks,
        }),
        Err(e) => json!({
            "command": r.command,
            "input_digest": r.digest,
            "backend": r.backend,
            "error": { "kind": e.kind.label(), "message": e.message },
        }),
    }
}

/// `key: value` lines, nested objects flattened with dots.
fn text_lines(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                text_lines(&key, x, out);
            }
        }
        Value::String(s) => out.push(format!("{prefix}: {s}")),
        other => out.push(format!("{prefix}: {other}")),
    }
}

fn emit(records: &[Record], as_json: bool) -> ExitCode {
    let mut code = 0;
    for (k, r) in records.iter().enumerate() {
        if let Err(e) = &r.outcome {
            eprintln!("crnorm {}: {e}", r.command);
            code = code.max(e.kind.exit_code());
        }
        if as_json {
            let v = to_json(r);
            let s = if records.len() == 1 { serde_json::to_string_pretty(&v) } else { serde_json::to_string(&v) };
            println!("{}", s.expect("JSON values serialize"));
        } else if let Ok(o) = &r.outcome {
            if k > 0 {
                println!();
            }
            let mut lines = vec![format!("command: {}", r.command), format!("backend: {}", r.backend)];
            text_lines("", &o.result, &mut lines);
            println!("{}", lines.join("\n"));
        }
    }
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = cli.opts;
    let (kind, inputs) = match cli.command {
        Command::CorpusList => {
            let r = Record { command: "corpus-list", digest: digest(&[]), backend: "exact", outcome: Ok(commands::corpus_list()) };
            return emit(&[r], opts.json);
        }
        Command::Equiv { first, second } => return emit(&[run_equiv(&first, &second, &opts)], opts.json),
        Command::Classify { inputs } => (Kind::Classify, inputs),
        Command::Normalize { inputs } => (Kind::Normalize, inputs),
        Command::Invariants { inputs } => (Kind::Invariants, inputs),
        Command::Nondeg { inputs } => (Kind::Nondeg, inputs),
    };
    if inputs.is_empty() {
        eprintln!("crnorm: no input given");
        return ExitCode::from(2);
    }
    let entries = match (&opts.normalization, kind) {
        (Some(path), Kind::Normalize) => match read_normalization(path) {
            Ok(e) => Some(e),
            Err(e) => {
                eprintln!("crnorm: {e}");
                return ExitCode::from(e.kind.exit_code() as u8);
            }
        },
        (Some(_), _) => {
            eprintln!("crnorm: --normalization applies to normalize only");
            return ExitCode::from(2);
        }
        _ => None,
    };
    let run = |arg: &String| run_one(kind, arg, &opts, entries.as_deref());
    let records: Vec<Record> = if opts.parallel { inputs.par_iter().map(run).collect() } else { inputs.iter().map(run).collect() };
    emit(&records, opts.json)
}
