//! The `.ow` problem-specification language: period-terminated facts in the
//! style of a Prolog fact base.
//!
//! ```text
//! block(oa). openContainer(oc). lid(ol). containerWithLid(ow).
//! components(oc,ol,ow). location(la).
//! earlier(t0,t1). earlier(t1,t2).
//! holds(t0,outsideAt(oa,la)).
//! occurs(t0,t1,load(oa,oc)).
//! notOccurs(t0,t2,unseal(ow,_,_)).   % `_` is a wildcard slot
//! ```

mod parse;
mod validate;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{
    ActionPattern, Fluent, HoldsFact, Ident, Literal, NonOccurrence, Occurrence, Signature, Sort, Timeline,
};
use crate::error::Error;

pub use parse::{parse_fluent, parse_literal, parse_pattern, parse_spec, parse_spec_bytes, ParseError};
pub use validate::validate_spec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Option<Span>,
    pub message: String,
}

impl Diagnostic {
    pub fn error(span: Option<Span>, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, span, message: message.into() }
    }

    pub fn warning(span: Option<Span>, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, span, message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match self.span {
            Some(span) => write!(f, "{sev} at {span}: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Valid,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn from_diagnostics(diagnostics: Vec<Diagnostic>) -> Self {
        let verdict = if diagnostics.iter().any(Diagnostic::is_error) { Verdict::Invalid } else { Verdict::Valid };
        ValidationReport { verdict, diagnostics }
    }

    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.diagnostics {
            writeln!(f, "{d}")?;
        }
        match self.verdict {
            Verdict::Valid => write!(f, "valid"),
            Verdict::Invalid => write!(f, "invalid"),
        }
    }
}

/// A parsed problem specification. Nothing here has been validated yet; see
/// [`validate_spec`] and [`ValidSpec`].
///
/// Equality ignores source positions and parse notes, so two specs are equal
/// when they contain the same facts in any order.
#[derive(Debug, Clone, Default)]
pub struct ProblemSpec {
    pub signature: Signature,
    /// Objects and locations marked `fresh(..)`: unnamed entities introduced by a
    /// closed-world completion.
    pub fresh: BTreeSet<Ident>,
    pub earlier: BTreeSet<(Ident, Ident)>,
    pub holds: BTreeSet<HoldsFact>,
    pub occurrences: BTreeSet<Occurrence>,
    pub non_occurrences: BTreeSet<NonOccurrence>,
    /// Warnings raised while parsing (merged duplicates).
    pub notes: Vec<Diagnostic>,
    /// Source position of each statement, keyed by its canonical text.
    pub origins: BTreeMap<String, Span>,
}

impl PartialEq for ProblemSpec {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature
            && self.fresh == other.fresh
            && self.earlier == other.earlier
            && self.holds == other.holds
            && self.occurrences == other.occurrences
            && self.non_occurrences == other.non_occurrences
    }
}

impl Eq for ProblemSpec {}

impl ProblemSpec {
    pub fn origin(&self, statement: &impl fmt::Display) -> Option<Span> {
        self.origins.get(&statement.to_string()).copied()
    }

    pub fn earlier_pairs(&self) -> Vec<(Ident, Ident)> {
        self.earlier.iter().cloned().collect()
    }

    pub fn timeline(&self) -> Result<Timeline, String> {
        Timeline::from_pairs(&self.earlier_pairs())
    }
}

impl fmt::Display for ProblemSpec {
    /// Canonical `.ow` text. Re-parsing the output yields an equal spec.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for sort in Sort::ALL {
            for (id, s) in &self.signature.objects {
                if *s == sort {
                    writeln!(f, "{}({id}).", sort.keyword())?;
                }
            }
        }
        for c in &self.signature.components {
            writeln!(f, "components({},{},{}).", c.open, c.lid, c.lidded)?;
        }
        for l in &self.signature.locations {
            writeln!(f, "location({l}).")?;
        }
        for id in &self.fresh {
            writeln!(f, "fresh({id}).")?;
        }
        let pairs = match self.timeline() {
            Ok(tl) => tl.earlier_pairs().map(|(a, b)| (a.clone(), b.clone())).collect(),
            Err(_) => self.earlier_pairs(),
        };
        for (a, b) in pairs {
            writeln!(f, "earlier({a},{b}).")?;
        }
        for h in &self.holds {
            writeln!(f, "{h}.")?;
        }
        for o in &self.occurrences {
            writeln!(f, "{o}.")?;
        }
        for n in &self.non_occurrences {
            writeln!(f, "{n}.")?;
        }
        Ok(())
    }
}

/// A specification that passed [`validate_spec`], indexed for reasoning.
#[derive(Debug, Clone)]
pub struct ValidSpec {
    spec: ProblemSpec,
    timeline: Timeline,
    holds_at: Vec<HashSet<Fluent>>,
    occurrences: Vec<(usize, usize, Occurrence)>,
    non_occurrences: Vec<(usize, usize, NonOccurrence)>,
}

impl ValidSpec {
    pub fn new(spec: ProblemSpec) -> Result<ValidSpec, ValidationReport> {
        let report = validate_spec(&spec);
        if !report.is_valid() {
            return Err(report);
        }
        let timeline = spec.timeline().expect("validated timeline");
        let idx = |t: &Ident| timeline.index_of(t).expect("validated time point");
        let mut holds_at = vec![HashSet::new(); timeline.len()];
        for h in &spec.holds {
            holds_at[idx(&h.time)].insert(h.fluent.clone());
        }
        let occurrences = spec.occurrences.iter().map(|o| (idx(&o.start), idx(&o.end), o.clone())).collect();
        let non_occurrences = spec.non_occurrences.iter().map(|n| (idx(&n.start), idx(&n.end), n.clone())).collect();
        Ok(ValidSpec { spec, timeline, holds_at, occurrences, non_occurrences })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn signature(&self) -> &Signature {
        &self.spec.signature
    }

    pub fn timeline(&self) -> &Timeline {
        &self.timeline
    }

    pub fn time_index(&self, t: &Ident) -> Result<usize, Error> {
        self.timeline.index_of(t)
    }

    pub fn point(&self, i: usize) -> &Ident {
        &self.timeline.points()[i]
    }

    pub fn is_given(&self, t: usize, q: &Fluent) -> bool {
        self.holds_at[t].contains(q)
    }

    pub fn holds_at(&self, t: usize) -> &HashSet<Fluent> {
        &self.holds_at[t]
    }

    /// Occurrences with their interval as time-point indices.
    pub fn occurrences(&self) -> &[(usize, usize, Occurrence)] {
        &self.occurrences
    }

    pub fn non_occurrences(&self) -> &[(usize, usize, NonOccurrence)] {
        &self.non_occurrences
    }

    /// Checks that `t` names a time point and `q` is well-sorted.
    pub fn check_goal(&self, t: &Ident, q: &Fluent) -> Result<usize, Error> {
        let i = self.time_index(t)?;
        self.signature().check_fluent(q)?;
        Ok(i)
    }

    pub fn check_literal(&self, t: &Ident, q: &Literal) -> Result<usize, Error> {
        self.check_goal(t, q.fluent())
    }

    /// True if some asserted non-occurrence covers `[ta, tb]` with a pattern that
    /// subsumes `p`.
    pub fn not_occurs_entails(&self, ta: usize, tb: usize, p: &ActionPattern) -> bool {
        self.covering_non_occurrence(ta, tb, p).is_some()
    }

    pub fn covering_non_occurrence(&self, ta: usize, tb: usize, p: &ActionPattern) -> Option<&NonOccurrence> {
        self.non_occurrences.iter().find(|(s, e, n)| *s <= ta && tb <= *e && n.pattern.subsumes(p)).map(|(_, _, n)| n)
    }

    /// True if some asserted occurrence matching `p` has an interval whose interior
    /// meets the interior of `[ta, tb]`. False only means "no known occurrence".
    pub fn occurs_within_known(&self, ta: usize, tb: usize, p: &ActionPattern) -> bool {
        self.occurrences.iter().any(|(s, e, o)| *s < tb && ta < *e && crate::domain::matches_pattern(&o.action, p))
    }
}
