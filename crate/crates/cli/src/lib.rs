//! The `openworld` command line. [`run`] takes the argument list and returns the
//! exit status and everything that would be printed, so tests drive it directly.
//!
//! Exit status: 0 for proved, valid, entailed or all-pass; 1 for unknown,
//! falsified, unsatisfiable or a corpus mismatch; 2 for spec and usage errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use openworld::corpus::{self, Check};
use openworld::domain::{Ident, Literal};
use openworld::engine::{Reasoner, Verdict};
use openworld::fuzz::{soundness_sweep, FuzzConfig};
use openworld::oracle::{Completion, CompletionBounds, Entailment, Exploration};
use openworld::specdsl::{parse_literal, parse_spec_bytes, Diagnostic, ProblemSpec, ValidSpec};

#[derive(Debug, Parser)]
#[command(name = "openworld", version, about = "Open-world temporal reasoning over a container microworld")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, clap::Args)]
struct BoundsArgs {
    /// Comma-separated sorts of fresh objects, or `-` for none.
    #[arg(long, default_value = "-")]
    extra_objects: String,
    #[arg(long, default_value_t = 1)]
    extra_locations: usize,
    /// Unnamed events allowed per gap between named points.
    #[arg(long, default_value_t = 1)]
    max_events: usize,
}

impl BoundsArgs {
    fn bounds(&self) -> Result<CompletionBounds, String> {
        Ok(CompletionBounds::new(
            CompletionBounds::parse_sorts(&self.extra_objects)?,
            self.extra_locations,
            self.max_events,
        ))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a specification.
    Validate {
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Prove `holds(at, goal)` with the engine.
    Query {
        spec: PathBuf,
        #[arg(long)]
        at: String,
        /// A fluent, or `not(<fluent>)`.
        #[arg(long)]
        goal: String,
        /// Print the proof tree.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Check `holds(at, goal)` in every completion within bounds.
    Oracle {
        spec: PathBuf,
        #[arg(long)]
        at: String,
        #[arg(long)]
        goal: String,
        #[command(flatten)]
        bounds: BoundsArgs,
        /// Write a falsifying completion to this file as a closed specification.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Check every engine proof on random specs against the oracle.
    Fuzz {
        #[arg(long, default_value_t = 200)]
        specs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "openContainer,closedContainer")]
        extra_objects: String,
        #[arg(long, default_value_t = 1)]
        extra_locations: usize,
        #[arg(long, default_value_t = 1)]
        max_events: usize,
        #[arg(long, default_value_t = 4)]
        max_objects: usize,
        #[arg(long, default_value_t = 2)]
        max_locations: usize,
        #[arg(long, default_value_t = 4)]
        max_points: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Evaluate the expectation lines of the bundled examples, or of every `.ow`
    /// file under a directory.
    Corpus {
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

/// One structured document per invocation.
#[derive(Debug, Serialize)]
struct Report {
    command: &'static str,
    verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    proof: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<Value>,
    diagnostics: Vec<Diagnostic>,
    timing: Timing,
}

#[derive(Debug, Serialize)]
struct Timing {
    seconds: f64,
}

/// What a command produced before rendering.
struct Outcome {
    status: i32,
    verdict: String,
    text: String,
    proof: Option<Value>,
    witness: Option<Value>,
    details: Option<Value>,
    diagnostics: Vec<Diagnostic>,
}

impl Outcome {
    fn new(status: i32, verdict: impl Into<String>, text: String) -> Self {
        Outcome {
            status,
            verdict: verdict.into(),
            text,
            proof: None,
            witness: None,
            details: None,
            diagnostics: vec![],
        }
    }

    fn error(diagnostics: Vec<Diagnostic>) -> Self {
        let text = diagnostics.iter().map(|d| format!("{d}\n")).collect();
        Outcome { diagnostics, ..Outcome::new(2, "error", text) }
    }

    fn fail(message: impl Into<String>) -> Self {
        Outcome::error(vec![Diagnostic::error(None, message)])
    }
}

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { 2 } else { 0 };
            return (status, e.render().to_string());
        }
    };
    let start = Instant::now();
    let (name, format, outcome) = match cli.command {
        Command::Validate { spec, format } => ("validate", format, validate(&spec)),
        Command::Query { spec, at, goal, trace, format } => ("query", format, query(&spec, &at, &goal, trace)),
        Command::Oracle { spec, at, goal, bounds, witness, format } => {
            ("oracle", format, oracle(&spec, &at, &goal, &bounds, witness.as_deref()))
        }
        Command::Fuzz {
            specs,
            seed,
            extra_objects,
            extra_locations,
            max_events,
            max_objects,
            max_locations,
            max_points,
            format,
        } => {
            let bounds = BoundsArgs { extra_objects, extra_locations, max_events };
            let config = FuzzConfig { max_objects, max_locations, min_points: 2, max_points: max_points.max(2) };
            ("fuzz", format, fuzz(config, seed, specs, &bounds))
        }
        Command::Corpus { dir, format } => ("corpus", format, run_corpus(dir.as_deref())),
    };
    let seconds = start.elapsed().as_secs_f64();
    let rendered = match format {
        Format::Text => outcome.text,
        Format::Json => {
            let report = Report {
                command: name,
                verdict: outcome.verdict,
                proof: outcome.proof,
                witness: outcome.witness,
                details: outcome.details,
                diagnostics: outcome.diagnostics,
                timing: Timing { seconds },
            };
            serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
        }
    };
    (outcome.status, rendered)
}

fn load(path: &Path) -> Result<ValidSpec, Outcome> {
    let bytes = fs::read(path).map_err(|e| Outcome::fail(format!("cannot read {}: {e}", path.display())))?;
    let spec = parse_spec_bytes(&bytes).map_err(|e| Outcome::error(e.diagnostics))?;
    ValidSpec::new(spec).map_err(|r| Outcome::error(r.diagnostics))
}

fn literal(text: &str) -> Result<Literal, Outcome> {
    parse_literal(text).map_err(|e| Outcome::error(e.diagnostics))
}

fn validate(path: &Path) -> Outcome {
    match load(path) {
        Ok(spec) => {
            let notes = spec.spec().notes.clone();
            let mut text: String = notes.iter().map(|d| format!("{d}\n")).collect();
            text.push_str("valid\n");
            Outcome { diagnostics: notes, ..Outcome::new(0, "valid", text) }
        }
        Err(mut o) => {
            o.verdict = "invalid".into();
            o.text.push_str("invalid\n");
            o
        }
    }
}

fn query(path: &Path, at: &str, goal: &str, trace: bool) -> Outcome {
    let (spec, q) = match (load(path), literal(goal)) {
        (Ok(s), Ok(q)) => (s, q),
        (Err(o), _) | (_, Err(o)) => return o,
    };
    let mut reasoner = Reasoner::new(&spec);
    match reasoner.infer_literal(&Ident::new(at), &q) {
        Err(e) => Outcome::fail(e.to_string()),
        Ok(Verdict::Unknown) => Outcome::new(1, "unknown", "Unknown\n".into()),
        Ok(Verdict::Proved(p)) => {
            let mut text = String::from("Proved\n");
            if trace {
                text.push_str(&p.render());
            }
            let proof = serde_json::to_value(&p).expect("proof serializes");
            Outcome { proof: Some(proof), ..Outcome::new(0, "proved", text) }
        }
    }
}

fn witness_json(w: &Completion, original: &ProblemSpec) -> Value {
    let events: Vec<Value> = w
        .events
        .iter()
        .map(|e| serde_json::json!({ "start": e.start, "end": e.end, "action": e.action.to_string(), "asserted": e.asserted }))
        .collect();
    serde_json::json!({ "events": events, "spec": w.to_spec(original).to_string() })
}

fn oracle(path: &Path, at: &str, goal: &str, bounds: &BoundsArgs, witness: Option<&Path>) -> Outcome {
    let (spec, q) = match (load(path), literal(goal)) {
        (Ok(s), Ok(q)) => (s, q),
        (Err(o), _) | (_, Err(o)) => return o,
    };
    let bounds = match bounds.bounds() {
        Ok(b) => b,
        Err(e) => return Outcome::fail(e),
    };
    let result = match Exploration::new(&spec, &bounds).check(&Ident::new(at), &q) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(e.to_string()),
    };
    match result {
        Entailment::EntailedInBounds => Outcome::new(0, "entailed", format!("EntailedInBounds ({bounds})\n")),
        Entailment::Unsatisfiable => {
            Outcome::new(1, "unsatisfiable", format!("Unsatisfiable: no completion within {bounds}\n"))
        }
        Entailment::FalsifiedBy(w) => {
            let mut text = format!("FalsifiedBy ({bounds})\n");
            for e in &w.events {
                let tag = if e.asserted { "asserted" } else { "unnamed" };
                let _ = writeln!(text, "  {tag} event {} over [{}, {}]", e.action, e.start, e.end);
            }
            if let Some(file) = witness {
                if let Err(e) = fs::write(file, w.to_spec(spec.spec()).to_string()) {
                    return Outcome::fail(format!("cannot write {}: {e}", file.display()));
                }
                let _ = writeln!(text, "witness written to {}", file.display());
            }
            Outcome { witness: Some(witness_json(&w, spec.spec())), ..Outcome::new(1, "falsified", text) }
        }
    }
}

fn fuzz(config: FuzzConfig, seed: u64, specs: usize, bounds: &BoundsArgs) -> Outcome {
    let bounds = match bounds.bounds() {
        Ok(b) => b,
        Err(e) => return Outcome::fail(e),
    };
    let r = soundness_sweep(config, seed, specs, &bounds);
    let mut text = format!(
        "seed {seed}: {} specs, {} goals, {} proved, {} counterexamples at {bounds}\n",
        r.specs,
        r.goals,
        r.proved,
        r.counterexamples.len()
    );
    for c in &r.counterexamples {
        let _ = writeln!(text, "counterexample: {} at {} ({})\n{}", c.goal, c.time, c.reason, c.spec);
    }
    let details = serde_json::json!({
        "seed": seed,
        "specs": r.specs,
        "goals": r.goals,
        "proved": r.proved,
        "counterexamples": r.counterexamples.iter().map(|c| serde_json::json!({
            "time": c.time, "goal": c.goal, "reason": c.reason, "spec": c.spec,
        })).collect::<Vec<_>>(),
    });
    let (status, verdict) = if r.counterexamples.is_empty() { (0, "pass") } else { (1, "fail") };
    Outcome { details: Some(details), ..Outcome::new(status, verdict, text) }
}

fn collect_ow(dir: &Path, root: &Path, out: &mut Vec<(String, PathBuf)>) -> std::io::Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_ow(&p, root, out)?;
        } else if p.extension().is_some_and(|x| x == "ow") {
            let rel = p.strip_prefix(root).unwrap_or(&p).to_string_lossy().replace('\\', "/");
            out.push((rel, p));
        }
    }
    Ok(())
}

fn run_corpus(dir: Option<&Path>) -> Outcome {
    let checks: Vec<Check> = match dir {
        None => corpus::run_bundled(),
        Some(d) => {
            let mut files = Vec::new();
            if let Err(e) = collect_ow(d, d, &mut files) {
                return Outcome::fail(format!("cannot read {}: {e}", d.display()));
            }
            let mut checks = Vec::new();
            for (name, path) in files {
                match fs::read_to_string(&path) {
                    Ok(text) => checks.extend(corpus::run_file(&name, &text)),
                    Err(e) => return Outcome::fail(format!("cannot read {}: {e}", path.display())),
                }
            }
            checks
        }
    };
    let mut text: String = checks.iter().map(|c| format!("{c}\n")).collect();
    let passed = checks.iter().filter(|c| c.passed).count();
    let _ = writeln!(text, "{passed}/{} expectations met", checks.len());
    let details = serde_json::json!(checks
        .iter()
        .map(|c| serde_json::json!({
            "file": c.file, "line": c.line, "expectation": c.expectation, "passed": c.passed, "detail": c.detail,
        }))
        .collect::<Vec<_>>());
    let (status, verdict) = if passed == checks.len() { (0, "pass") } else { (1, "fail") };
    Outcome { details: Some(details), ..Outcome::new(status, verdict, text) }
}
