use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{matches_pattern, Fluent, Ident, NonOccurrence, Occurrence, Sort};
use crate::specdsl::ValidSpec;
use crate::worldmodel::{effect_rules_for, threats_for, Effect};

/// Why an intermediate open container is not a barrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clearance {
    /// The container belongs to no components triple.
    Static,
    /// The container is effective, so it is not absorbed into a lidded container.
    Effective,
    /// Its lidded container is ineffective.
    ComponentUnsealed,
}

impl Clearance {
    fn needs_child(self) -> bool {
        self != Clearance::Static
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum PersistenceCase {
    /// The only event in the step is this asserted occurrence, which threatens
    /// nothing.
    KnownOccurrence { occurrence: Occurrence },
    /// Every threat is ruled out by one of these assertions.
    NonOccurrence { covering: Vec<NonOccurrence> },
}

/// The rule used at a proof node. Children appear in the order the rule lists
/// its premises.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Rule {
    Given,
    /// Children: one per condition, at the occurrence's start.
    Effect {
        occurrence: Occurrence,
        conditions: Vec<Fluent>,
    },
    /// Child: the goal at `from`.
    Persistence {
        from: Ident,
        case: PersistenceCase,
    },
    /// Child: `directContained(X,Y)`.
    ClosureDirect,
    /// Children: `directContained(X,Y)`, `contained(Y,Z)`.
    ClosureStep {
        via: Ident,
    },
    /// Children: `contained(X,C)`, `effective(W)` for `components(C,_,W)`.
    ClosureLift {
        open: Ident,
    },
    /// Children: `contained(X,W)`, `contained(W,Z)` for a lidded container `W`.
    ClosureThroughLidded {
        via: Ident,
    },
    /// Children: `directContained(X,O)`, then the clearance proof if any.
    UnshieldedDirect {
        clearance: Clearance,
    },
    /// Children: `directContained(X,Y)`, the clearance proof if any, `unshielded(Y,O)`.
    UnshieldedStep {
        via: Ident,
        clearance: Clearance,
    },
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Given => "given",
            Rule::Effect { .. } => "effect",
            Rule::Persistence { .. } => "persistence",
            Rule::ClosureDirect => "closure-direct",
            Rule::ClosureStep { .. } => "closure-step",
            Rule::ClosureLift { .. } => "closure-lift",
            Rule::ClosureThroughLidded { .. } => "closure-through-lidded",
            Rule::UnshieldedDirect { .. } => "unshielded-direct",
            Rule::UnshieldedStep { .. } => "unshielded-step",
        }
    }
}

/// A derivation of `holds(time, goal)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofTree {
    pub time: Ident,
    pub goal: Fluent,
    #[serde(flatten)]
    pub rule: Rule,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ProofTree>,
}

impl ProofTree {
    /// Nodes in depth-first pre-order with their depth.
    pub fn nodes(&self) -> Vec<(usize, &ProofTree)> {
        let mut out = Vec::new();
        let mut stack = vec![(0, self)];
        while let Some((d, n)) = stack.pop() {
            out.push((d, n));
            for c in n.children.iter().rev() {
                stack.push((d + 1, c));
            }
        }
        out
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ProofTree::size).sum::<usize>()
    }

    /// The annotation printed in brackets on a trace line.
    pub fn annotation(&self) -> String {
        match &self.rule {
            Rule::Given => "asserted".into(),
            Rule::Effect { occurrence, .. } => occurrence.to_string(),
            Rule::Persistence { from, case } => {
                let why = match case {
                    PersistenceCase::KnownOccurrence { occurrence } => occurrence.to_string(),
                    PersistenceCase::NonOccurrence { covering } if covering.is_empty() => "no threats".into(),
                    PersistenceCase::NonOccurrence { covering } => {
                        covering.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
                    }
                };
                format!("{from} -> {}; {why}", self.time)
            }
            Rule::ClosureDirect => "direct".into(),
            Rule::ClosureStep { via } | Rule::ClosureThroughLidded { via } => format!("via {via}"),
            Rule::ClosureLift { open } => format!("component {open}"),
            Rule::UnshieldedDirect { clearance } => clearance_label(*clearance).into(),
            Rule::UnshieldedStep { via, clearance } => format!("via {via}; {}", clearance_label(*clearance)),
        }
    }

    /// The indented text trace: one node per line, two spaces per depth.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

fn clearance_label(c: Clearance) -> &'static str {
    match c {
        Clearance::Static => "static",
        Clearance::Effective => "effective",
        Clearance::ComponentUnsealed => "component-unsealed",
    }
}

impl fmt::Display for ProofTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (depth, n) in self.nodes() {
            writeln!(
                f,
                "{:indent$}{} holds({}, {}) [{}]",
                "",
                n.rule.name(),
                n.time,
                n.goal,
                n.annotation(),
                indent = 2 * depth
            )?;
        }
        Ok(())
    }
}

/// Validates every node of `proof` against its problem spec and the effect and threat tables,
/// without any search.
pub fn check_proof(spec: &ValidSpec, proof: &ProofTree) -> bool {
    check_node(spec, proof)
}

fn child_is(spec: &ValidSpec, c: Option<&ProofTree>, time: &Ident, goal: &Fluent) -> bool {
    c.is_some_and(|c| &c.time == time && &c.goal == goal && check_node(spec, c))
}

fn check_node(spec: &ValidSpec, n: &ProofTree) -> bool {
    let Ok(t) = spec.time_index(&n.time) else { return false };
    if spec.signature().check_fluent(&n.goal).is_err() {
        return false;
    }
    let sig = spec.signature();
    let kids = &n.children;
    let kid = |i: usize| kids.get(i);
    let sort = |id: &Ident| sig.sort_of(id);
    match &n.rule {
        Rule::Given => kids.is_empty() && spec.is_given(t, &n.goal),
        Rule::Effect { occurrence, conditions } => {
            let asserted = spec.occurrences().iter().any(|(_, _, o)| o == occurrence);
            let instance = Effect { goal: n.goal.clone(), conditions: conditions.clone() };
            asserted
                && occurrence.end == n.time
                && effect_rules_for(sig, &occurrence.action).contains(&instance)
                && kids.len() == conditions.len()
                && conditions.iter().enumerate().all(|(i, q)| child_is(spec, kid(i), &occurrence.start, q))
        }
        Rule::Persistence { from, case } => {
            let Ok(ta) = spec.time_index(from) else { return false };
            let Ok(threats) = threats_for(sig, &n.goal) else { return false };
            let case_ok = match case {
                PersistenceCase::KnownOccurrence { occurrence } => {
                    spec.occurrences().iter().any(|(s, e, o)| o == occurrence && *s == ta && *e == t)
                        && threats.iter().all(|p| !matches_pattern(&occurrence.action, p))
                }
                PersistenceCase::NonOccurrence { covering } => {
                    let asserted = |c: &NonOccurrence| {
                        spec.non_occurrences().iter().any(|(s, e, m)| m == c && *s <= ta && t <= *e)
                    };
                    covering.iter().all(asserted)
                        && threats.iter().all(|p| covering.iter().any(|c| c.pattern.subsumes(p)))
                }
            };
            ta + 1 == t && kids.len() == 1 && case_ok && child_is(spec, kid(0), from, &n.goal)
        }
        Rule::ClosureDirect => match &n.goal {
            Fluent::Contained(x, y) => {
                kids.len() == 1 && child_is(spec, kid(0), &n.time, &Fluent::DirectContained(x.clone(), y.clone()))
            }
            _ => false,
        },
        Rule::ClosureStep { via } => match &n.goal {
            Fluent::Contained(x, z) => {
                kids.len() == 2
                    && child_is(spec, kid(0), &n.time, &Fluent::DirectContained(x.clone(), via.clone()))
                    && child_is(spec, kid(1), &n.time, &Fluent::Contained(via.clone(), z.clone()))
            }
            _ => false,
        },
        Rule::ClosureLift { open } => match &n.goal {
            Fluent::Contained(x, w) => {
                sig.triple_of_lidded(w).is_some_and(|c| &c.open == open)
                    && kids.len() == 2
                    && child_is(spec, kid(0), &n.time, &Fluent::Contained(x.clone(), open.clone()))
                    && child_is(spec, kid(1), &n.time, &Fluent::Effective(w.clone()))
            }
            _ => false,
        },
        Rule::ClosureThroughLidded { via } => match &n.goal {
            Fluent::Contained(x, z) => {
                sort(via) == Some(Sort::ContainerWithLid)
                    && kids.len() == 2
                    && child_is(spec, kid(0), &n.time, &Fluent::Contained(x.clone(), via.clone()))
                    && child_is(spec, kid(1), &n.time, &Fluent::Contained(via.clone(), z.clone()))
            }
            _ => false,
        },
        Rule::UnshieldedDirect { clearance } => match &n.goal {
            Fluent::Unshielded(x, o) => {
                let extra = usize::from(clearance.needs_child());
                kids.len() == 1 + extra
                    && child_is(spec, kid(0), &n.time, &Fluent::DirectContained(x.clone(), o.clone()))
                    && clearance_ok(spec, *clearance, o, kid(1), &n.time)
            }
            _ => false,
        },
        Rule::UnshieldedStep { via, clearance } => match &n.goal {
            Fluent::Unshielded(x, o) => {
                let extra = usize::from(clearance.needs_child());
                kids.len() == 2 + extra
                    && child_is(spec, kid(0), &n.time, &Fluent::DirectContained(x.clone(), via.clone()))
                    && clearance_ok(spec, *clearance, via, kid(1), &n.time)
                    && child_is(spec, kid(1 + extra), &n.time, &Fluent::Unshielded(via.clone(), o.clone()))
            }
            _ => false,
        },
    }
}

fn clearance_ok(spec: &ValidSpec, c: Clearance, y: &Ident, child: Option<&ProofTree>, time: &Ident) -> bool {
    let sig = spec.signature();
    if sig.sort_of(y) != Some(Sort::OpenContainer) {
        return false;
    }
    let triple = sig.triple_of_open(y);
    match c {
        Clearance::Static => triple.is_none(),
        Clearance::Effective => child_is(spec, child, time, &Fluent::Effective(y.clone())),
        Clearance::ComponentUnsealed => {
            triple.is_some_and(|t| child_is(spec, child, time, &Fluent::Ineffective(t.lidded.clone())))
        }
    }
}
