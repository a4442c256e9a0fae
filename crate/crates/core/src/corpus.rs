//! Bundled example specifications and the expectation lines they carry.
//!
//! An expectation is a comment line starting with `%!`:
//!
//! ```text
//! %! valid
//! %! invalid <message substring>
//! %! query <t> <literal> => proved|unknown
//! %! oracle <t> <literal> extra=<sorts|-> locations=<n> events=<k> => entailed|falsified|unsatisfiable
//! %! completions extra=<sorts|-> locations=<n> events=<k> => <count>
//! ```

use std::fmt;

use crate::domain::{Ident, Literal};
use crate::engine::Reasoner;
use crate::oracle::{enumerate_completions, CompletionBounds, Exploration};
use crate::specdsl::{parse_literal, parse_spec, ValidSpec};

pub const B1: &str = include_str!("../corpus/b1.ow");
pub const B2: &str = include_str!("../corpus/b2.ow");
pub const B3: &str = include_str!("../corpus/b3.ow");
pub const INCOMPLETENESS: &str = include_str!("../corpus/incompleteness.ow");
pub const INCOMPLETENESS_CONTROL: &str = include_str!("../corpus/incompleteness_control.ow");
pub const DUMP_NESTED: &str = include_str!("../corpus/dump_nested.ow");
pub const DUMP_TOOTHPASTE: &str = include_str!("../corpus/dump_toothpaste.ow");
pub const SEALED_CARRY: &str = include_str!("../corpus/sealed_carry.ow");

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../corpus/", $name)))),*]
    };
}

/// Every bundled file as `(relative path, text)`.
pub const FILES: &[(&str, &str)] = bundled![
    "b1.ow",
    "b2.ow",
    "b3.ow",
    "incompleteness.ow",
    "incompleteness_control.ow",
    "dump_nested.ow",
    "dump_toothpaste.ow",
    "sealed_carry.ow",
    "invalid/arity.ow",
    "invalid/bad_components.ow",
    "invalid/branching_time.ow",
    "invalid/contradicts_non_occurrence.ow",
    "invalid/dump_block.ow",
    "invalid/duplicate_sort.ow",
    "invalid/empty.ow",
    "invalid/holds_clash.ow",
    "invalid/overlap.ow",
    "invalid/unknown_head.ow",
    "invalid/unknown_time_point.ow",
    "invalid/unshielded_asserted.ow",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    Valid,
    Invalid { message: String },
    Query { time: Ident, goal: Literal, proved: bool },
    Oracle { time: Ident, goal: Literal, bounds: CompletionBounds, outcome: String },
    Completions { bounds: CompletionBounds, count: usize },
}

/// The outcome of one expectation line.
#[derive(Debug, Clone)]
pub struct Check {
    pub file: String,
    pub line: usize,
    pub expectation: String,
    pub passed: bool,
    /// What was observed when the check failed.
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "ok  " } else { "FAIL" };
        write!(f, "{mark} {}:{} {}", self.file, self.line, self.expectation)?;
        if !self.passed {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

fn parse_bounds(words: &[&str]) -> Result<CompletionBounds, String> {
    let mut bounds = CompletionBounds::default();
    for w in words {
        let (k, v) = w.split_once('=').ok_or_else(|| format!("expected key=value, found `{w}`"))?;
        let n = || v.parse::<usize>().map_err(|e| format!("{k}: {e}"));
        match k {
            "extra" => bounds.extra_objects = CompletionBounds::parse_sorts(v)?,
            "locations" => bounds.extra_locations = n()?,
            "events" => bounds.max_events_per_gap = n()?,
            _ => return Err(format!("unknown bound `{k}`")),
        }
    }
    Ok(bounds)
}

/// Parses one expectation body (the text after `%!`).
pub fn parse_expectation(body: &str) -> Result<Expectation, String> {
    let body = body.trim();
    let (head, rest) = body.split_once(' ').unwrap_or((body, ""));
    let (lhs, rhs) = match rest.rsplit_once("=>") {
        Some((l, r)) => (l.trim(), Some(r.trim())),
        None => (rest.trim(), None),
    };
    let goal = |text: &str| parse_literal(text).map_err(|e| e.to_string());
    match (head, rhs) {
        ("valid", None) if rest.is_empty() => Ok(Expectation::Valid),
        ("invalid", None) => Ok(Expectation::Invalid { message: rest.trim().to_string() }),
        ("query", Some(r)) => {
            let (t, g) = lhs.split_once(' ').ok_or("query needs a time point and a goal")?;
            let proved = match r {
                "proved" => true,
                "unknown" => false,
                _ => return Err(format!("unknown query outcome `{r}`")),
            };
            Ok(Expectation::Query { time: t.into(), goal: goal(g.trim())?, proved })
        }
        ("oracle", Some(r)) => {
            let words: Vec<&str> = lhs.split_whitespace().collect();
            let split = words.iter().position(|w| w.starts_with("extra=")).ok_or("oracle needs bounds")?;
            if split < 2 {
                return Err("oracle needs a time point and a goal".into());
            }
            if !["entailed", "falsified", "unsatisfiable"].contains(&r) {
                return Err(format!("unknown oracle outcome `{r}`"));
            }
            Ok(Expectation::Oracle {
                time: words[0].into(),
                goal: goal(&words[1..split].concat())?,
                bounds: parse_bounds(&words[split..])?,
                outcome: r.to_string(),
            })
        }
        ("completions", Some(r)) => {
            let words: Vec<&str> = lhs.split_whitespace().collect();
            let count = r.parse().map_err(|e| format!("completion count: {e}"))?;
            Ok(Expectation::Completions { bounds: parse_bounds(&words)?, count })
        }
        _ => Err(format!("malformed expectation `{body}`")),
    }
}

/// All expectations in `text` with their 1-based line numbers.
pub fn expectations(text: &str) -> Vec<(usize, Result<Expectation, String>)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, l)| l.trim_start().strip_prefix("%!").map(|b| (i + 1, parse_expectation(b))))
        .collect()
}

/// Evaluates every expectation in one file.
pub fn run_file(file: &str, text: &str) -> Vec<Check> {
    let parsed = parse_spec(text);
    let valid = parsed.as_ref().map_err(|e| e.to_string()).and_then(|s| {
        ValidSpec::new(s.clone()).map_err(|r| r.errors().map(ToString::to_string).collect::<Vec<_>>().join("; "))
    });
    let mut reasoner = valid.as_ref().ok().map(Reasoner::new);
    let mut out = Vec::new();
    for (line, e) in expectations(text) {
        let expectation = text.lines().nth(line - 1).unwrap_or("").trim().trim_start_matches("%!").trim().to_string();
        let result: Result<(), String> = match e {
            Err(msg) => Err(msg),
            Ok(e) => match (&e, &valid) {
                (Expectation::Invalid { message }, Ok(_)) => Err(format!("accepted; expected `{message}`")),
                (Expectation::Invalid { message }, Err(got)) if got.contains(message.as_str()) => Ok(()),
                (Expectation::Invalid { .. }, Err(got)) => Err(got.clone()),
                (_, Err(got)) => Err(format!("rejected: {got}")),
                (_, Ok(spec)) => check(spec, reasoner.as_mut().expect("valid spec has a reasoner"), &e),
            },
        };
        let (passed, detail) = match result {
            Ok(()) => (true, String::new()),
            Err(d) => (false, d),
        };
        out.push(Check { file: file.to_string(), line, expectation, passed, detail });
    }
    out
}

fn check(spec: &ValidSpec, reasoner: &mut Reasoner<'_>, e: &Expectation) -> Result<(), String> {
    match e {
        Expectation::Valid | Expectation::Invalid { .. } => Ok(()),
        Expectation::Query { time, goal, proved } => {
            let v = reasoner.infer_literal(time, goal).map_err(|e| e.to_string())?;
            if v.is_proved() == *proved {
                Ok(())
            } else {
                Err(format!("got {}", v.label()))
            }
        }
        Expectation::Oracle { time, goal, bounds, outcome } => {
            let got = Exploration::new(spec, bounds).check(time, goal).map_err(|e| e.to_string())?;
            if got.label() == outcome {
                Ok(())
            } else {
                Err(format!("got {}", got.label()))
            }
        }
        Expectation::Completions { bounds, count } => {
            let got = enumerate_completions(spec, bounds).take(count + 1).count();
            if got == *count {
                Ok(())
            } else {
                Err(format!("got {got}"))
            }
        }
    }
}

/// Runs every bundled file.
pub fn run_bundled() -> Vec<Check> {
    FILES.iter().flat_map(|(name, text)| run_file(name, text)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_file_has_expectations() {
        for (name, text) in FILES {
            let es = expectations(text);
            assert!(!es.is_empty(), "{name}");
            for (line, e) in es {
                assert!(e.is_ok(), "{name}:{line}: {e:?}");
            }
        }
    }

    #[test]
    fn bundled_expectations_hold() {
        let failed: Vec<String> = run_bundled().iter().filter(|c| !c.passed).map(ToString::to_string).collect();
        assert!(failed.is_empty(), "{}", failed.join("\n"));
    }

    #[test]
    fn expectation_syntax() {
        assert_eq!(parse_expectation(" valid"), Ok(Expectation::Valid));
        let e =
            parse_expectation("oracle t3 not(contained(o, oc)) extra=openContainer locations=1 events=2 => entailed");
        let Ok(Expectation::Oracle { time, bounds, .. }) = e else { panic!("{e:?}") };
        assert_eq!(time, Ident::from("t3"));
        assert_eq!(bounds.extra_locations, 1);
        assert_eq!(bounds.max_events_per_gap, 2);
        assert!(parse_expectation("query t0 contained(a,b) => maybe").is_err());
        assert!(parse_expectation("completions extra=- => lots").is_err());
    }
}
