use std::collections::HashMap;
use std::sync::Arc;

use crate::domain::{Ident, Literal};
use crate::error::Error;
use crate::specdsl::ValidSpec;

use super::state::{IAction, IFluent, IPattern, Universe, WorldState};
use super::{Completion, CompletionBounds, CompletionPoint, DatedEvent, Entailment};

/// What may happen between two consecutive named points.
#[derive(Debug, Clone)]
enum Gap {
    /// No asserted occurrence: up to the bound of unnamed events, none matching a
    /// forbidden pattern.
    Open { forbidden: Vec<IPattern> },
    /// Covered by an asserted occurrence spanning `[start, end]`. The event fires in
    /// exactly one gap of its span and nothing else happens inside the span.
    Covered { action: IAction, occurrence: usize, last: bool },
}

/// A state at a named point. `fired` records that the occurrence whose span
/// strictly contains this point has already happened.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Node {
    state: WorldState,
    fired: bool,
}

/// The compiled closed-world problem: universe, observations and gap rules.
#[derive(Debug, Clone)]
struct Problem {
    universe: Arc<Universe>,
    points: Vec<Ident>,
    holds: Vec<Vec<IFluent>>,
    gaps: Vec<Gap>,
    actions: Vec<IAction>,
    max_events: usize,
}

impl Problem {
    fn new(spec: &ValidSpec, bounds: &CompletionBounds) -> Problem {
        let universe = Arc::new(Universe::with_fresh(spec.signature(), &bounds.extra_objects, bounds.extra_locations));
        let points = spec.timeline().points().to_vec();
        let holds = (0..points.len())
            .map(|t| spec.holds_at(t).iter().map(|f| universe.compile_fluent(f).expect("validated fluent")).collect())
            .collect();
        let gaps = (0..points.len() - 1)
            .map(|g| {
                let covering = spec.occurrences().iter().enumerate().find(|(_, (s, e, _))| *s <= g && g < *e);
                match covering {
                    Some((i, (_, e, o))) => Gap::Covered {
                        action: universe.compile_action(&o.action).expect("validated action"),
                        occurrence: i,
                        last: g + 1 == *e,
                    },
                    None => Gap::Open {
                        forbidden: spec
                            .non_occurrences()
                            .iter()
                            .filter(|(s, e, _)| *s <= g && g < *e)
                            .map(|(_, _, n)| universe.compile_pattern(&n.pattern).expect("validated pattern"))
                            .collect(),
                    },
                }
            })
            .collect();
        let actions = universe.actions();
        Problem { universe, points, holds, gaps, actions, max_events: bounds.max_events_per_gap }
    }

    fn observed(&self, t: usize, s: &WorldState) -> bool {
        self.holds[t].iter().all(|f| self.universe.eval(s, *f))
    }

    fn initial_nodes(&self) -> Vec<Node> {
        self.universe
            .valid_states_matching(&self.holds[0])
            .into_iter()
            .map(|state| Node { state, fired: false })
            .collect()
    }

    /// Visits every way gap `g` can unfold from `node`, in enumeration order. The
    /// visitor gets the events, the state after each event and the end node, and
    /// returns false to stop.
    fn visit_options(&self, g: usize, node: &Node, visit: &mut dyn FnMut(&[IAction], &[WorldState], Node) -> bool) {
        match &self.gaps[g] {
            Gap::Covered { action, last, .. } => {
                if node.fired {
                    visit(&[], &[], Node { state: node.state.clone(), fired: !last });
                    return;
                }
                if let Ok(next) = self.universe.apply(&node.state, action) {
                    let end = Node { state: next.clone(), fired: !last };
                    if !visit(&[*action], &[next], end) {
                        return;
                    }
                }
                if !last {
                    visit(&[], &[], Node { state: node.state.clone(), fired: false });
                }
            }
            Gap::Open { forbidden } => {
                let mut events = Vec::with_capacity(self.max_events);
                let mut states = Vec::with_capacity(self.max_events);
                self.open_sequences(&node.state, forbidden, &mut events, &mut states, visit);
            }
        }
    }

    fn open_sequences(
        &self,
        current: &WorldState,
        forbidden: &[IPattern],
        events: &mut Vec<IAction>,
        states: &mut Vec<WorldState>,
        visit: &mut dyn FnMut(&[IAction], &[WorldState], Node) -> bool,
    ) -> bool {
        if !visit(events, states, Node { state: current.clone(), fired: false }) {
            return false;
        }
        if events.len() == self.max_events {
            return true;
        }
        for a in &self.actions {
            if forbidden.iter().any(|p| p.matches(a)) {
                continue;
            }
            let Ok(next) = self.universe.apply(current, a) else { continue };
            events.push(*a);
            states.push(next.clone());
            let go_on = self.open_sequences(&next, forbidden, events, states, visit);
            events.pop();
            states.pop();
            if !go_on {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Default)]
struct Layer {
    nodes: Vec<Node>,
    index: HashMap<Node, u32>,
    alive: Vec<bool>,
    /// Edges into the next layer.
    succ: Vec<Vec<u32>>,
}

impl Layer {
    fn insert(&mut self, node: Node) -> u32 {
        if let Some(&i) = self.index.get(&node) {
            return i;
        }
        let i = self.nodes.len() as u32;
        self.index.insert(node.clone(), i);
        self.nodes.push(node);
        i
    }
}

/// Every completion of a specification within bounds, summarized as the
/// deduplicated set of states each named point can be in. Many goals can be
/// checked against one exploration.
#[derive(Debug)]
pub struct Exploration {
    problem: Problem,
    layers: Vec<Layer>,
    occurrences: Vec<crate::domain::Occurrence>,
}

impl Exploration {
    pub fn new(spec: &ValidSpec, bounds: &CompletionBounds) -> Exploration {
        let problem = Problem::new(spec, bounds);
        let mut layers: Vec<Layer> = Vec::with_capacity(problem.points.len());
        let mut first = Layer::default();
        for n in problem.initial_nodes() {
            first.insert(n);
        }
        layers.push(first);
        for g in 0..problem.gaps.len() {
            let mut next = Layer::default();
            let current = &mut layers[g];
            current.succ = Vec::with_capacity(current.nodes.len());
            for node in &current.nodes {
                let mut edges = Vec::new();
                problem.visit_options(g, node, &mut |_, _, end| {
                    if problem.observed(g + 1, &end.state) {
                        edges.push(next.insert(end));
                    }
                    true
                });
                edges.sort_unstable();
                edges.dedup();
                current.succ.push(edges);
            }
            layers.push(next);
        }
        let last = layers.len() - 1;
        layers[last].alive = vec![true; layers[last].nodes.len()];
        for g in (0..last).rev() {
            let alive: Vec<bool> = {
                let after = &layers[g + 1].alive;
                layers[g].succ.iter().map(|es| es.iter().any(|&e| after[e as usize])).collect()
            };
            layers[g].alive = alive;
        }
        let occurrences = spec.occurrences().iter().map(|(_, _, o)| o.clone()).collect();
        Exploration { problem, layers, occurrences }
    }

    pub fn universe(&self) -> &Universe {
        &self.problem.universe
    }

    pub fn is_satisfiable(&self) -> bool {
        self.layers[0].alive.iter().any(|&a| a)
    }

    /// Distinct states a completion can be in at named point `t`.
    pub fn states_at(&self, t: usize) -> Vec<&WorldState> {
        let l = &self.layers[t];
        l.nodes.iter().zip(&l.alive).filter(|(_, a)| **a).map(|(n, _)| &n.state).collect()
    }

    fn literal_holds(&self, s: &WorldState, q: &(IFluent, bool)) -> bool {
        self.problem.universe.eval(s, q.0) == q.1
    }

    fn compile(&self, t: &Ident, q: &Literal) -> Result<(usize, (IFluent, bool)), Error> {
        let i = self.problem.points.iter().position(|p| p == t).ok_or_else(|| Error::UnknownTimePoint(t.clone()))?;
        let f = self.problem.universe.compile_fluent(q.fluent())?;
        Ok((i, (f, q.is_positive())))
    }

    /// Evaluates `q` at `t` in every completion.
    pub fn check(&self, t: &Ident, q: &Literal) -> Result<Entailment, Error> {
        let (ti, lit) = self.compile(t, q)?;
        if !self.is_satisfiable() {
            return Ok(Entailment::Unsatisfiable);
        }
        let layer = &self.layers[ti];
        let falsified = layer.nodes.iter().zip(&layer.alive).any(|(n, a)| *a && !self.literal_holds(&n.state, &lit));
        if !falsified {
            return Ok(Entailment::EntailedInBounds);
        }
        Ok(Entailment::FalsifiedBy(Box::new(self.witness(ti, &lit))))
    }

    /// The first falsifying completion in enumeration order.
    fn witness(&self, ti: usize, lit: &(IFluent, bool)) -> Completion {
        let n = self.layers.len();
        let mut target: Vec<Vec<bool>> = self.layers.iter().map(|l| l.alive.clone()).collect();
        for (k, node) in self.layers[ti].nodes.iter().enumerate() {
            target[ti][k] = target[ti][k] && !self.literal_holds(&node.state, lit);
        }
        for g in (0..ti).rev() {
            let marks: Vec<bool> = self.layers[g]
                .succ
                .iter()
                .enumerate()
                .map(|(k, es)| target[g][k] && es.iter().any(|&e| target[g + 1][e as usize]))
                .collect();
            target[g] = marks;
        }
        let start = target[0].iter().position(|&b| b).expect("a falsifying completion exists");
        let mut node = self.layers[0].nodes[start].clone();
        let mut path = Vec::with_capacity(n - 1);
        for g in 0..n - 1 {
            let mut chosen = None;
            self.problem.visit_options(g, &node, &mut |events, states, end| match self.layers[g + 1].index.get(&end) {
                Some(&k) if target[g + 1][k as usize] => {
                    chosen = Some((events.to_vec(), states.to_vec(), end));
                    false
                }
                _ => true,
            });
            let step = chosen.expect("target sets guarantee a continuation");
            node = step.2.clone();
            path.push(step);
        }
        build_completion(&self.problem, &self.occurrences, &self.layers[0].nodes[start].state, &path)
    }
}

type Step = (Vec<IAction>, Vec<WorldState>, Node);

fn build_completion(
    problem: &Problem,
    occurrences: &[crate::domain::Occurrence],
    initial: &WorldState,
    path: &[Step],
) -> Completion {
    let u = &problem.universe;
    let taken: std::collections::HashSet<&Ident> = problem.points.iter().collect();
    let mut points = vec![CompletionPoint { name: problem.points[0].clone(), named: true, state: initial.clone() }];
    let mut events = Vec::new();
    let mut current = initial.clone();
    for (g, (acts, states, end)) in path.iter().enumerate() {
        match &problem.gaps[g] {
            Gap::Covered { occurrence, .. } => {
                if !acts.is_empty() {
                    let o = &occurrences[*occurrence];
                    events.push(DatedEvent {
                        start: o.start.clone(),
                        end: o.end.clone(),
                        action: o.action.clone(),
                        asserted: true,
                    });
                }
            }
            Gap::Open { .. } if !acts.is_empty() => {
                let base = &problem.points[g];
                let mut serial = 0;
                let mut inner = || loop {
                    serial += 1;
                    let id = Ident::new(format!("{base}x{serial}"));
                    if !taken.contains(&id) {
                        return id;
                    }
                };
                let mut before = inner();
                points.push(CompletionPoint { name: before.clone(), named: false, state: current.clone() });
                for (a, s) in acts.iter().zip(states) {
                    let after = inner();
                    points.push(CompletionPoint { name: after.clone(), named: false, state: s.clone() });
                    events.push(DatedEvent { start: before, end: after.clone(), action: u.action(a), asserted: false });
                    before = after;
                }
            }
            Gap::Open { .. } => {}
        }
        current = end.state.clone();
        points.push(CompletionPoint { name: problem.points[g + 1].clone(), named: true, state: current.clone() });
    }
    Completion { universe: Arc::clone(u), points, events }
}

/// Depth-first stream of every completion within bounds: initial states in
/// canonical order, then gap options in temporal order.
pub struct Completions {
    problem: Problem,
    occurrences: Vec<crate::domain::Occurrence>,
    initial: std::vec::IntoIter<Node>,
    root: Option<WorldState>,
    /// One frame per gap on the current path: the options from the frame's node
    /// and how many have been tried.
    stack: Vec<(Vec<Step>, usize)>,
}

impl Completions {
    pub fn new(spec: &ValidSpec, bounds: &CompletionBounds) -> Completions {
        let problem = Problem::new(spec, bounds);
        let initial = problem.initial_nodes().into_iter();
        let occurrences = spec.occurrences().iter().map(|(_, _, o)| o.clone()).collect();
        Completions { problem, occurrences, initial, root: None, stack: Vec::new() }
    }

    fn options(&self, g: usize, node: &Node) -> Vec<Step> {
        let mut out = Vec::new();
        self.problem.visit_options(g, node, &mut |events, states, end| {
            if self.problem.observed(g + 1, &end.state) {
                out.push((events.to_vec(), states.to_vec(), end));
            }
            true
        });
        out
    }
}

impl Iterator for Completions {
    type Item = Completion;

    fn next(&mut self) -> Option<Completion> {
        let last_gap = self.problem.gaps.len() - 1;
        loop {
            if self.stack.is_empty() {
                let node = self.initial.next()?;
                let opts = self.options(0, &node);
                self.root = Some(node.state);
                self.stack.push((opts, 0));
                continue;
            }
            let depth = self.stack.len() - 1;
            let (opts, cursor) = self.stack.last_mut().expect("non-empty");
            if *cursor >= opts.len() {
                self.stack.pop();
                continue;
            }
            *cursor += 1;
            if depth == last_gap {
                let path: Vec<Step> = self.stack.iter().map(|(o, c)| o[c - 1].clone()).collect();
                let root = self.root.as_ref().expect("root set");
                return Some(build_completion(&self.problem, &self.occurrences, root, &path));
            }
            let end = opts[*cursor - 1].2.clone();
            let next = self.options(depth + 1, &end);
            self.stack.push((next, 0));
        }
    }
}

pub fn enumerate_completions(spec: &ValidSpec, bounds: &CompletionBounds) -> Completions {
    Completions::new(spec, bounds)
}

/// Evaluates `q` at `t` in every completion within bounds.
pub fn entailed_by_all(
    spec: &ValidSpec,
    bounds: &CompletionBounds,
    t: &Ident,
    q: &Literal,
) -> Result<Entailment, Error> {
    Exploration::new(spec, bounds).check(t, q)
}
