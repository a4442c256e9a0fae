//! Backward chaining through time. A goal `holds(t, q)` is proved, in this
//! order, by a given fact, by the effect of an occurrence ending at `t`, by
//! persistence from the immediately preceding point, or by the containment and
//! shielding closure rules at `t`.
//!
//! The search is exhaustive per goal. Results are tabled per `(t, q)`; a goal
//! already on the call stack fails the current path, and failures that relied on
//! such a cut are kept provisional until the goal that was cut completes.

mod proof;

use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::domain::{matches_pattern, Fluent, Ident, Literal, NonOccurrence, Sort};
use crate::error::Error;
use crate::specdsl::ValidSpec;
use crate::worldmodel::{effect_rules_for, threats_for};

pub use proof::{check_proof, Clearance, PersistenceCase, ProofTree, Rule};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "proof", rename_all = "lowercase")]
pub enum Verdict {
    Proved(ProofTree),
    /// Not proved. Never a claim that the goal is false.
    Unknown,
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved(_))
    }

    pub fn proof(&self) -> Option<&ProofTree> {
        match self {
            Verdict::Proved(p) => Some(p),
            Verdict::Unknown => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Proved(_) => "proved",
            Verdict::Unknown => "unknown",
        }
    }
}

type Goal = (usize, Fluent);

/// Low-link value of a result that depends on no in-progress goal.
const COMPLETE: usize = usize::MAX;

/// A reasoner over one specification. The memo table is shared by all queries
/// issued through it.
pub struct Reasoner<'a> {
    spec: &'a ValidSpec,
    objects: Vec<Ident>,
    /// Per time point: goal fluent to the effect instances of the occurrence ending
    /// there.
    effects: Vec<HashMap<Fluent, Vec<Vec<Fluent>>>>,
    memo: HashMap<Goal, Option<Rc<ProofTree>>>,
    on_stack: HashMap<Goal, usize>,
    pending: Vec<Goal>,
}

impl<'a> Reasoner<'a> {
    pub fn new(spec: &'a ValidSpec) -> Self {
        let sig = spec.signature();
        let mut effects = vec![HashMap::new(); spec.timeline().len()];
        for (_, end, occ) in spec.occurrences() {
            let table: &mut HashMap<Fluent, Vec<Vec<Fluent>>> = &mut effects[*end];
            for e in effect_rules_for(sig, &occ.action) {
                table.entry(e.goal).or_default().push(e.conditions);
            }
        }
        Reasoner {
            spec,
            objects: sig.objects().cloned().collect(),
            effects,
            memo: HashMap::new(),
            on_stack: HashMap::new(),
            pending: Vec::new(),
        }
    }

    /// Proves `holds(t, q)`.
    pub fn infer(&mut self, t: &Ident, q: &Fluent) -> Result<Verdict, Error> {
        let i = self.spec.check_goal(t, q)?;
        Ok(self.infer_at(i, q))
    }

    /// Negated goals are never proved: the engine only derives positive facts.
    pub fn infer_literal(&mut self, t: &Ident, q: &Literal) -> Result<Verdict, Error> {
        let i = self.spec.check_literal(t, q)?;
        Ok(match q {
            Literal::Holds(f) => self.infer_at(i, f),
            Literal::NotHolds(_) => Verdict::Unknown,
        })
    }

    pub fn infer_at(&mut self, t: usize, q: &Fluent) -> Verdict {
        debug_assert!(self.on_stack.is_empty());
        match self.solve(t, q).0 {
            Some(p) => Verdict::Proved((*p).clone()),
            None => Verdict::Unknown,
        }
    }

    /// The persistence justification for `q` over the step `ta -> tb`, if any.
    pub fn persists(&self, ta: &Ident, tb: &Ident, q: &Fluent) -> Result<Option<PersistenceCase>, Error> {
        let (a, b) = (self.spec.time_index(ta)?, self.spec.time_index(tb)?);
        if a + 1 != b {
            return Err(Error::NonConsecutive(ta.clone(), tb.clone()));
        }
        self.spec.signature().check_fluent(q)?;
        Ok(persistence_case(self.spec, a, b, q))
    }

    fn solve(&mut self, t: usize, q: &Fluent) -> (Option<Rc<ProofTree>>, usize) {
        let key = (t, q.clone());
        if let Some(r) = self.memo.get(&key) {
            return (r.clone(), COMPLETE);
        }
        if let Some(&d) = self.on_stack.get(&key) {
            return (None, d);
        }
        let depth = self.on_stack.len();
        self.on_stack.insert(key.clone(), depth);
        let mark = self.pending.len();
        let mut low = COMPLETE;
        let found = self.try_rules(t, q, &mut low);
        self.on_stack.remove(&key);
        match found {
            Some(p) => {
                // Provisional failures below may have relied on this goal failing.
                self.pending.truncate(mark);
                let p = Rc::new(p);
                self.memo.insert(key, Some(Rc::clone(&p)));
                (Some(p), COMPLETE)
            }
            None if low >= depth => {
                for g in self.pending.drain(mark..) {
                    self.memo.insert(g, None);
                }
                self.memo.insert(key, None);
                (None, COMPLETE)
            }
            None => {
                self.pending.push(key);
                (None, low)
            }
        }
    }

    /// Proves every premise in order, or records why not.
    fn all(&mut self, premises: &[(usize, Fluent)], low: &mut usize) -> Option<Vec<ProofTree>> {
        let mut out = Vec::with_capacity(premises.len());
        for (t, q) in premises {
            let (r, l) = self.solve(*t, q);
            *low = (*low).min(l);
            out.push((*r?).clone());
        }
        Some(out)
    }

    fn node(&self, t: usize, goal: &Fluent, rule: Rule, children: Vec<ProofTree>) -> ProofTree {
        ProofTree { time: self.spec.point(t).clone(), goal: goal.clone(), rule, children }
    }

    fn try_rules(&mut self, t: usize, q: &Fluent, low: &mut usize) -> Option<ProofTree> {
        if self.spec.is_given(t, q) {
            return Some(self.node(t, q, Rule::Given, vec![]));
        }
        if let Some(p) = self.by_effect(t, q, low) {
            return Some(p);
        }
        if let Some(p) = self.by_persistence(t, q, low) {
            return Some(p);
        }
        match q {
            Fluent::Contained(x, z) => self.by_closure(t, q, x, z, low),
            Fluent::Unshielded(x, o) => self.by_shielding(t, q, x, o, low),
            _ => None,
        }
    }

    fn by_effect(&mut self, t: usize, q: &Fluent, low: &mut usize) -> Option<ProofTree> {
        let instances = self.effects[t].get(q)?.clone();
        let (start, _, occ) = self.spec.occurrences().iter().find(|(_, e, _)| *e == t)?.clone();
        for conditions in instances {
            let premises: Vec<Goal> = conditions.iter().map(|c| (start, c.clone())).collect();
            if let Some(kids) = self.all(&premises, low) {
                let rule = Rule::Effect { occurrence: occ, conditions };
                return Some(self.node(t, q, rule, kids));
            }
        }
        None
    }

    fn by_persistence(&mut self, t: usize, q: &Fluent, low: &mut usize) -> Option<ProofTree> {
        if t == 0 || matches!(q, Fluent::Unshielded(..)) {
            return None;
        }
        let case = persistence_case(self.spec, t - 1, t, q)?;
        let kids = self.all(&[(t - 1, q.clone())], low)?;
        let rule = Rule::Persistence { from: self.spec.point(t - 1).clone(), case };
        Some(self.node(t, q, rule, kids))
    }

    fn by_closure(&mut self, t: usize, q: &Fluent, x: &Ident, z: &Ident, low: &mut usize) -> Option<ProofTree> {
        let sig = self.spec.signature();
        if x == z {
            return None;
        }
        if let Some(kids) = self.all(&[(t, Fluent::DirectContained(x.clone(), z.clone()))], low) {
            return Some(self.node(t, q, Rule::ClosureDirect, kids));
        }
        let hosts: Vec<Ident> = self
            .objects
            .iter()
            .filter(|y| *y != x && *y != z)
            .filter(|y| matches!(sig.sort_of(y), Some(Sort::OpenContainer | Sort::ClosedContainer)))
            .cloned()
            .collect();
        for y in hosts {
            let premises =
                [(t, Fluent::DirectContained(x.clone(), y.clone())), (t, Fluent::Contained(y.clone(), z.clone()))];
            if let Some(kids) = self.all(&premises, low) {
                return Some(self.node(t, q, Rule::ClosureStep { via: y }, kids));
            }
        }
        if let Some(c) = sig.triple_of_lidded(z).map(|c| c.open.clone()) {
            if &c != x {
                let premises = [(t, Fluent::Contained(x.clone(), c.clone())), (t, Fluent::Effective(z.clone()))];
                if let Some(kids) = self.all(&premises, low) {
                    return Some(self.node(t, q, Rule::ClosureLift { open: c }, kids));
                }
            }
        }
        let lidded: Vec<Ident> = self
            .objects
            .iter()
            .filter(|w| *w != x && *w != z && sig.sort_of(w) == Some(Sort::ContainerWithLid))
            .cloned()
            .collect();
        for w in lidded {
            let premises = [(t, Fluent::Contained(x.clone(), w.clone())), (t, Fluent::Contained(w.clone(), z.clone()))];
            if let Some(kids) = self.all(&premises, low) {
                return Some(self.node(t, q, Rule::ClosureThroughLidded { via: w }, kids));
            }
        }
        None
    }

    /// Proves that open container `y` is not a barrier at `t`.
    fn clearance(&mut self, t: usize, y: &Ident, low: &mut usize) -> Option<(Clearance, Option<ProofTree>)> {
        let sig = self.spec.signature();
        if sig.sort_of(y) != Some(Sort::OpenContainer) {
            return None;
        }
        let Some(w) = sig.triple_of_open(y).map(|c| c.lidded.clone()) else {
            return Some((Clearance::Static, None));
        };
        if let Some(mut kids) = self.all(&[(t, Fluent::Effective(y.clone()))], low) {
            return Some((Clearance::Effective, kids.pop()));
        }
        let mut kids = self.all(&[(t, Fluent::Ineffective(w))], low)?;
        Some((Clearance::ComponentUnsealed, kids.pop()))
    }

    fn by_shielding(&mut self, t: usize, q: &Fluent, x: &Ident, o: &Ident, low: &mut usize) -> Option<ProofTree> {
        if x == o {
            return None;
        }
        if let Some(mut kids) = self.all(&[(t, Fluent::DirectContained(x.clone(), o.clone()))], low) {
            if let Some((clearance, proof)) = self.clearance(t, o, low) {
                kids.extend(proof);
                return Some(self.node(t, q, Rule::UnshieldedDirect { clearance }, kids));
            }
        }
        let sig = self.spec.signature();
        let opens: Vec<Ident> = self
            .objects
            .iter()
            .filter(|y| *y != x && *y != o && sig.sort_of(y) == Some(Sort::OpenContainer))
            .cloned()
            .collect();
        for y in opens {
            let Some(mut kids) = self.all(&[(t, Fluent::DirectContained(x.clone(), y.clone()))], low) else {
                continue;
            };
            let Some((clearance, proof)) = self.clearance(t, &y, low) else { continue };
            kids.extend(proof);
            let Some(rest) = self.all(&[(t, Fluent::Unshielded(y.clone(), o.clone()))], low) else { continue };
            kids.extend(rest);
            return Some(self.node(t, q, Rule::UnshieldedStep { via: y, clearance }, kids));
        }
        None
    }
}

/// Case (a): an asserted occurrence spans exactly `[ta, tb]` and threatens
/// nothing. Case (b): every threat is excluded by an asserted non-occurrence.
fn persistence_case(spec: &ValidSpec, ta: usize, tb: usize, q: &Fluent) -> Option<PersistenceCase> {
    let threats = threats_for(spec.signature(), q).ok()?;
    if let Some((_, _, occ)) = spec.occurrences().iter().find(|(s, e, _)| *s == ta && *e == tb) {
        if threats.iter().all(|p| !matches_pattern(&occ.action, p)) {
            return Some(PersistenceCase::KnownOccurrence { occurrence: occ.clone() });
        }
    }
    let mut covering: Vec<NonOccurrence> = Vec::new();
    for p in &threats {
        let n = spec.covering_non_occurrence(ta, tb, p)?;
        if !covering.contains(n) {
            covering.push(n.clone());
        }
    }
    Some(PersistenceCase::NonOccurrence { covering })
}

/// One-shot query with a private memo table.
pub fn infer(spec: &ValidSpec, t: &Ident, q: &Fluent) -> Result<Verdict, Error> {
    Reasoner::new(spec).infer(t, q)
}

pub fn infer_literal(spec: &ValidSpec, t: &Ident, q: &Literal) -> Result<Verdict, Error> {
    Reasoner::new(spec).infer_literal(t, q)
}

/// Every ground fluent over the declared objects and locations, in a fixed order.
pub fn ground_fluents(spec: &ValidSpec) -> Vec<Fluent> {
    let sig = spec.signature();
    let objs: Vec<&Ident> = sig.objects().collect();
    let mut out = Vec::new();
    for &a in &objs {
        for l in &sig.locations {
            out.push(Fluent::OutsideAt(a.clone(), l.clone()));
        }
        out.push(Fluent::Effective(a.clone()));
        out.push(Fluent::Ineffective(a.clone()));
        for &b in &objs {
            if a != b {
                out.push(Fluent::DirectContained(a.clone(), b.clone()));
                out.push(Fluent::Contained(a.clone(), b.clone()));
                out.push(Fluent::Unshielded(a.clone(), b.clone()));
            }
        }
    }
    out
}
