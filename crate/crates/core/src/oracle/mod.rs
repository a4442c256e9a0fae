//! Closed-world ground truth. [`Universe`] and [`WorldState`] implement the full
//! operational semantics of the six actions; [`Exploration`] and
//! [`enumerate_completions`] cover every closed world compatible with an
//! open-world specification, within bounds on unnamed objects, locations and
//! events.

mod enumerate;
mod state;
mod witness;

use std::fmt;
use std::sync::Arc;

use crate::domain::{Action, Ident, Sort};

pub use enumerate::{entailed_by_all, enumerate_completions, Completions, Exploration};
pub use state::{IAction, IFluent, IPattern, Pos, PreconditionFailure, Universe, WorldState};

/// Limits on the closed worlds considered.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompletionBounds {
    /// One fresh object per entry.
    pub extra_objects: Vec<Sort>,
    pub extra_locations: usize,
    /// Unnamed events allowed in each gap not covered by an asserted occurrence.
    pub max_events_per_gap: usize,
}

impl CompletionBounds {
    pub fn new(extra_objects: Vec<Sort>, extra_locations: usize, max_events_per_gap: usize) -> Self {
        CompletionBounds { extra_objects, extra_locations, max_events_per_gap }
    }

    /// Parses a comma-separated list of sort keywords; `-` or the empty string is
    /// the empty list.
    pub fn parse_sorts(text: &str) -> Result<Vec<Sort>, String> {
        let text = text.trim();
        if text.is_empty() || text == "-" {
            return Ok(Vec::new());
        }
        text.split(',')
            .map(|s| Sort::from_keyword(s.trim()).ok_or_else(|| format!("unknown sort `{}`", s.trim())))
            .collect()
    }
}

impl fmt::Display for CompletionBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let extra: Vec<&str> = self.extra_objects.iter().map(|s| s.keyword()).collect();
        let extra = if extra.is_empty() { "-".to_string() } else { extra.join(",") };
        write!(f, "extra={extra} locations={} events={}", self.extra_locations, self.max_events_per_gap)
    }
}

#[derive(Debug, Clone)]
pub struct CompletionPoint {
    pub name: Ident,
    /// False for points inserted between named points to date unnamed events.
    pub named: bool,
    pub state: WorldState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatedEvent {
    pub start: Ident,
    pub end: Ident,
    pub action: Action,
    /// True for occurrences stated in the problem spec.
    pub asserted: bool,
}

/// One closed world: an extended universe and a trajectory over a refined chain
/// of time points.
#[derive(Debug, Clone)]
pub struct Completion {
    pub universe: Arc<Universe>,
    pub points: Vec<CompletionPoint>,
    pub events: Vec<DatedEvent>,
}

impl Completion {
    pub fn state_at(&self, t: &Ident) -> Option<&WorldState> {
        self.points.iter().find(|p| &p.name == t).map(|p| &p.state)
    }

    pub fn unnamed_events(&self) -> impl Iterator<Item = &DatedEvent> {
        self.events.iter().filter(|e| !e.asserted)
    }
}

#[derive(Debug, Clone)]
pub enum Entailment {
    EntailedInBounds,
    FalsifiedBy(Box<Completion>),
    /// No completion exists within the bounds; says nothing about consistency.
    Unsatisfiable,
}

impl Entailment {
    pub fn label(&self) -> &'static str {
        match self {
            Entailment::EntailedInBounds => "entailed",
            Entailment::FalsifiedBy(_) => "falsified",
            Entailment::Unsatisfiable => "unsatisfiable",
        }
    }
}
