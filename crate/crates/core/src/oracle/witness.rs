use std::collections::BTreeSet;

use crate::domain::{HoldsFact, Occurrence};
use crate::specdsl::ProblemSpec;

use super::Completion;

impl Completion {
    /// The completion as a closed `.ow` specification: the extended universe with
    /// `fresh` markers, the refined time chain, the full state at every point, all
    /// events dated, and the original non-occurrence assertions.
    pub fn to_spec(&self, original: &ProblemSpec) -> ProblemSpec {
        let universe = &self.universe;
        let mut holds: BTreeSet<HoldsFact> = original.holds.clone();
        for p in &self.points {
            for fluent in universe.state_facts(&p.state) {
                holds.insert(HoldsFact { time: p.name.clone(), fluent });
            }
        }
        let occurrences = self
            .events
            .iter()
            .map(|e| Occurrence { start: e.start.clone(), end: e.end.clone(), action: e.action.clone() })
            .collect();
        let earlier = self.points.windows(2).map(|w| (w[0].name.clone(), w[1].name.clone())).collect();
        ProblemSpec {
            signature: universe.signature(),
            fresh: universe.fresh().clone(),
            earlier,
            holds,
            occurrences,
            non_occurrences: original.non_occurrences.clone(),
            ..ProblemSpec::default()
        }
    }
}
