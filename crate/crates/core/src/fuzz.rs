//! Random specifications that are true of a hidden closed-world trajectory, and
//! the soundness sweep that checks every engine proof on them against the oracle.
//!
//! A generated spec reveals part of one simulated trajectory: some state facts,
//! some of the events, and non-occurrence assertions that the trajectory
//! satisfies. It is therefore always valid and always satisfiable.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{
    ActionKind, ActionPattern, Components, HoldsFact, Ident, Literal, NonOccurrence, Occurrence, Signature, Slot, Sort,
};
use crate::engine::{check_proof, ground_fluents, Reasoner, Verdict};
use crate::oracle::{CompletionBounds, Entailment, Exploration, IAction, Universe, WorldState};
use crate::specdsl::{ProblemSpec, ValidSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzConfig {
    pub max_objects: usize,
    pub max_locations: usize,
    pub min_points: usize,
    pub max_points: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig { max_objects: 4, max_locations: 2, min_points: 2, max_points: 4 }
    }
}

/// A generated spec together with the trajectory it was drawn from.
#[derive(Debug, Clone)]
pub struct Generated {
    pub spec: ProblemSpec,
    pub universe: Universe,
    pub states: Vec<WorldState>,
    /// The event in each gap, if one happened.
    pub events: Vec<Option<IAction>>,
}

/// Everything the trajectory makes available for revealing.
struct Truth {
    signature: Signature,
    points: Vec<Ident>,
    universe: Universe,
    states: Vec<WorldState>,
    events: Vec<Option<IAction>>,
    holds: Vec<HoldsFact>,
    occurrences: Vec<Occurrence>,
    non_occurrences: Vec<NonOccurrence>,
}

pub struct SpecGenerator {
    config: FuzzConfig,
    rng: ChaCha8Rng,
}

impl SpecGenerator {
    pub fn new(config: FuzzConfig, seed: u64) -> Self {
        SpecGenerator { config, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn next_spec(&mut self) -> Generated {
        let truth = self.truth();
        self.reveal(&truth)
    }

    /// Two specs over the same trajectory where the first states a subset of the
    /// facts of the second.
    pub fn next_pair(&mut self) -> (Generated, Generated) {
        let truth = self.truth();
        let larger = self.reveal(&truth);
        let mut smaller = larger.clone();
        let rng = &mut self.rng;
        smaller.spec.holds.retain(|_| rng.gen_bool(0.6));
        smaller.spec.occurrences.retain(|_| rng.gen_bool(0.6));
        smaller.spec.non_occurrences.retain(|_| rng.gen_bool(0.6));
        (smaller, larger)
    }

    fn signature(&mut self) -> Signature {
        let rng = &mut self.rng;
        let n = rng.gen_range(1..=self.config.max_objects.max(1));
        let mut sig = Signature::default();
        let add = |sig: &mut Signature, prefix: &str, sort: Sort| {
            let k = sig.objects.values().filter(|s| **s == sort).count() + 1;
            let id = Ident::new(format!("{prefix}{k}"));
            sig.objects.insert(id.clone(), sort);
            id
        };
        if n >= 3 && rng.gen_bool(0.4) {
            let open = add(&mut sig, "oc", Sort::OpenContainer);
            let lid = add(&mut sig, "ol", Sort::Lid);
            let lidded = add(&mut sig, "ow", Sort::ContainerWithLid);
            sig.components.insert(Components { open, lid, lidded });
        }
        while sig.objects.len() < n {
            match rng.gen_range(0..3) {
                0 => add(&mut sig, "b", Sort::Block),
                1 => add(&mut sig, "oc", Sort::OpenContainer),
                _ => add(&mut sig, "cc", Sort::ClosedContainer),
            };
        }
        let m = rng.gen_range(1..=self.config.max_locations.max(1));
        for name in ["la", "lb", "lc", "ld"].iter().chain(std::iter::repeat(&"lz")).take(m) {
            sig.locations.insert(Ident::new(*name));
        }
        sig
    }

    fn truth(&mut self) -> Truth {
        let signature = self.signature();
        let universe = Universe::new(&signature);
        let rng = &mut self.rng;
        let n_points = rng.gen_range(self.config.min_points.max(1)..=self.config.max_points.max(1));
        let points: Vec<Ident> = (0..n_points).map(|i| Ident::new(format!("t{i}"))).collect();
        let initial = universe.valid_states().choose(rng).expect("some valid state exists").clone();
        let actions = universe.actions();
        let mut states = vec![initial];
        let mut events = Vec::new();
        for _ in 1..n_points {
            let s = states.last().unwrap().clone();
            let applicable: Vec<(IAction, WorldState)> =
                actions.iter().filter_map(|a| universe.apply(&s, a).ok().map(|n| (*a, n))).collect();
            match applicable.choose(rng) {
                Some((a, next)) if rng.gen_bool(0.75) => {
                    events.push(Some(*a));
                    states.push(next.clone());
                }
                _ => {
                    events.push(None);
                    states.push(s);
                }
            }
        }
        let mut holds = Vec::new();
        for (p, s) in points.iter().zip(&states) {
            for fluent in universe.state_facts(s) {
                holds.push(HoldsFact { time: p.clone(), fluent });
            }
        }
        let occurrences = events
            .iter()
            .enumerate()
            .filter_map(|(i, e)| {
                e.map(|a| Occurrence {
                    start: points[i].clone(),
                    end: points[i + 1].clone(),
                    action: universe.action(&a),
                })
            })
            .collect();
        let non_occurrences = self.true_non_occurrences(&signature, &universe, &points, &events);
        Truth { signature, points, universe, states, events, holds, occurrences, non_occurrences }
    }

    fn random_pattern(&mut self, sig: &Signature) -> ActionPattern {
        let rng = &mut self.rng;
        let kind = *ActionKind::ALL.choose(rng).unwrap();
        let objects: Vec<&Ident> = sig.objects().collect();
        let locations: Vec<&Ident> = sig.locations.iter().collect();
        let slots = (0..kind.arity())
            .map(|i| {
                let pool = if kind == ActionKind::Carry && i == 1 { &locations } else { &objects };
                match pool.choose(rng) {
                    Some(id) if rng.gen_bool(0.5) => Slot::Is((*id).clone()),
                    _ => Slot::Any,
                }
            })
            .collect();
        ActionPattern::new(kind, slots).expect("slot count matches arity")
    }

    fn true_non_occurrences(
        &mut self,
        sig: &Signature,
        universe: &Universe,
        points: &[Ident],
        events: &[Option<IAction>],
    ) -> Vec<NonOccurrence> {
        let gaps = points.len() - 1;
        let mut out = Vec::new();
        if gaps == 0 {
            return out;
        }
        for _ in 0..self.rng.gen_range(0..=6) {
            let pattern = self.random_pattern(sig);
            let a = self.rng.gen_range(0..gaps);
            let b = self.rng.gen_range(a + 1..=gaps);
            let compiled = universe.compile_pattern(&pattern).expect("pattern over declared ids");
            if events[a..b].iter().flatten().all(|e| !compiled.matches(e)) {
                out.push(NonOccurrence { start: points[a].clone(), end: points[b].clone(), pattern });
            }
        }
        out
    }

    fn reveal(&mut self, truth: &Truth) -> Generated {
        let rng = &mut self.rng;
        let first = &truth.points[0];
        let holds: BTreeSet<HoldsFact> =
            truth.holds.iter().filter(|h| rng.gen_bool(if &h.time == first { 0.7 } else { 0.2 })).cloned().collect();
        let occurrences = truth.occurrences.iter().filter(|_| rng.gen_bool(0.7)).cloned().collect();
        let non_occurrences = truth.non_occurrences.iter().cloned().collect();
        let earlier = truth.points.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
        let spec = ProblemSpec {
            signature: truth.signature.clone(),
            earlier,
            holds,
            occurrences,
            non_occurrences,
            ..ProblemSpec::default()
        };
        Generated { spec, universe: truth.universe.clone(), states: truth.states.clone(), events: truth.events.clone() }
    }
}

/// A proved goal the oracle refuted, or a proof the checker rejected.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub spec: String,
    pub time: Ident,
    pub goal: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct FuzzReport {
    pub specs: usize,
    pub goals: usize,
    pub proved: usize,
    pub counterexamples: Vec<Counterexample>,
}

/// Proves every ground goal at every point of `count` generated specs and
/// checks each proof with the proof checker and each proved goal with the
/// oracle at `bounds`.
pub fn soundness_sweep(config: FuzzConfig, seed: u64, count: usize, bounds: &CompletionBounds) -> FuzzReport {
    let mut generator = SpecGenerator::new(config, seed);
    let mut report = FuzzReport::default();
    for _ in 0..count {
        let g = generator.next_spec();
        let spec =
            ValidSpec::new(g.spec.clone()).unwrap_or_else(|r| panic!("generated spec is invalid:\n{r}\n{}", g.spec));
        report.specs += 1;
        let mut reasoner = Reasoner::new(&spec);
        let mut proved = Vec::new();
        for (i, t) in spec.timeline().points().iter().enumerate() {
            for q in ground_fluents(&spec) {
                report.goals += 1;
                if let Verdict::Proved(p) = reasoner.infer_at(i, &q) {
                    if !check_proof(&spec, &p) {
                        report.counterexamples.push(Counterexample {
                            spec: g.spec.to_string(),
                            time: t.clone(),
                            goal: q.to_string(),
                            reason: "proof rejected by the checker".into(),
                        });
                    }
                    proved.push((t.clone(), q));
                }
            }
        }
        report.proved += proved.len();
        if proved.is_empty() {
            continue;
        }
        let exploration = Exploration::new(&spec, bounds);
        for (t, q) in proved {
            let verdict = exploration.check(&t, &Literal::Holds(q.clone())).expect("goal is well sorted");
            if let Entailment::FalsifiedBy(_) | Entailment::Unsatisfiable = verdict {
                report.counterexamples.push(Counterexample {
                    spec: g.spec.to_string(),
                    time: t,
                    goal: q.to_string(),
                    reason: verdict.label().into(),
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_specs_are_valid_and_true_of_their_trajectory() {
        let mut g = SpecGenerator::new(FuzzConfig::default(), 7);
        for _ in 0..50 {
            let x = g.next_spec();
            let spec = ValidSpec::new(x.spec.clone()).unwrap();
            for h in &x.spec.holds {
                let i = spec.time_index(&h.time).unwrap();
                assert!(x.universe.eval_fluent(&x.states[i], &h.fluent).unwrap(), "{h}");
            }
            assert!(x.universe.object_count() <= 4);
            assert!((2..=4).contains(&spec.timeline().len()));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = SpecGenerator::new(FuzzConfig::default(), 11).next_spec().spec;
        let b = SpecGenerator::new(FuzzConfig::default(), 11).next_spec().spec;
        assert_eq!(a, b);
    }

    #[test]
    fn pairs_are_nested() {
        let mut g = SpecGenerator::new(FuzzConfig::default(), 3);
        for _ in 0..20 {
            let (s, l) = g.next_pair();
            assert!(s.spec.holds.is_subset(&l.spec.holds));
            assert!(s.spec.occurrences.is_subset(&l.spec.occurrences));
            assert!(s.spec.non_occurrences.is_subset(&l.spec.non_occurrences));
            ValidSpec::new(s.spec).unwrap();
            ValidSpec::new(l.spec).unwrap();
        }
    }

    #[test]
    fn small_sweep_finds_nothing() {
        let bounds = CompletionBounds::new(vec![], 1, 1);
        let r = soundness_sweep(FuzzConfig::default(), 1, 10, &bounds);
        assert!(r.proved > 0);
        assert!(r.counterexamples.is_empty(), "{:?}", r.counterexamples.first());
    }
}
