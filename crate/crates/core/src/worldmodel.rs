//! Declarative dynamics consumed by the engine: the conditional effects of each
//! action and the explanation-closure threat table.

use serde::{Deserialize, Serialize};

use crate::domain::{Action, ActionKind, ActionPattern, Fluent, FluentKind, Ident, Signature, Slot, Sort};
use crate::error::Error;

/// An instantiated conditional effect: if the action occurs over `[t1,t2]` and
/// every condition holds at `t1`, the goal holds at `t2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Effect {
    pub goal: Fluent,
    pub conditions: Vec<Fluent>,
}

impl Effect {
    fn new(goal: Fluent, conditions: Vec<Fluent>) -> Self {
        Effect { goal, conditions }
    }
}

/// All effects of `action`, with free placeholders ranging over the declared
/// objects and locations of `sig`. Effects are individually coded per action
/// kind because dumping is recursive and context dependent.
pub fn effect_rules_for(sig: &Signature, action: &Action) -> Vec<Effect> {
    use Fluent::*;
    let objects: Vec<&Ident> = sig.objects().collect();
    let mut out = Vec::new();
    match action {
        Action::Carry(o, l) => out.push(Effect::new(OutsideAt(o.clone(), l.clone()), vec![])),
        Action::Load(o, c) => {
            out.push(Effect::new(DirectContained(o.clone(), c.clone()), vec![]));
            out.push(Effect::new(Contained(o.clone(), c.clone()), vec![]));
            for &x in &objects {
                if x != o && x != c {
                    out.push(Effect::new(Contained(x.clone(), c.clone()), vec![Contained(x.clone(), o.clone())]));
                }
            }
        }
        Action::Unload(o, c) => {
            for l in &sig.locations {
                out.push(Effect::new(OutsideAt(o.clone(), l.clone()), vec![OutsideAt(c.clone(), l.clone())]));
            }
        }
        Action::Seal(oc, ol, ow) => {
            out.push(Effect::new(Effective(ow.clone()), vec![]));
            out.push(Effect::new(Ineffective(oc.clone()), vec![]));
            out.push(Effect::new(Ineffective(ol.clone()), vec![]));
            for &x in &objects {
                if x != oc && x != ow {
                    out.push(Effect::new(Contained(x.clone(), ow.clone()), vec![Contained(x.clone(), oc.clone())]));
                }
            }
            for l in &sig.locations {
                out.push(Effect::new(OutsideAt(ow.clone(), l.clone()), vec![OutsideAt(oc.clone(), l.clone())]));
            }
        }
        Action::Unseal(ow, ol, oc) => {
            out.push(Effect::new(Effective(oc.clone()), vec![]));
            out.push(Effect::new(Effective(ol.clone()), vec![]));
            out.push(Effect::new(Ineffective(ow.clone()), vec![]));
            for l in &sig.locations {
                out.push(Effect::new(OutsideAt(oc.clone(), l.clone()), vec![OutsideAt(ow.clone(), l.clone())]));
                out.push(Effect::new(OutsideAt(ol.clone(), l.clone()), vec![OutsideAt(ow.clone(), l.clone())]));
            }
        }
        Action::Dump(o) => {
            // Unshielded contents fall to the ground where the dumped container is.
            for &x in &objects {
                if x == o {
                    continue;
                }
                for l in &sig.locations {
                    out.push(Effect::new(
                        OutsideAt(x.clone(), l.clone()),
                        vec![
                            Contained(x.clone(), o.clone()),
                            Unshielded(x.clone(), o.clone()),
                            OutsideAt(o.clone(), l.clone()),
                        ],
                    ));
                }
            }
            // Shielded contents end up directly inside their innermost barrier `b`.
            // `y` is the child of `b` on the chain from `x`.
            for (b, sort) in &sig.objects {
                let (scope, mut extra) = match sort {
                    Sort::ClosedContainer => (b, vec![]),
                    Sort::OpenContainer => match sig.triple_of_open(b) {
                        Some(t) => (&t.lidded, vec![Effective(t.lidded.clone())]),
                        None => continue,
                    },
                    _ => continue,
                };
                if scope != o {
                    extra.push(Contained(scope.clone(), o.clone()));
                }
                for &y in &objects {
                    if y == b {
                        continue;
                    }
                    for &x in &objects {
                        if x == y || x == b {
                            continue;
                        }
                        let mut conditions =
                            vec![DirectContained(y.clone(), b.clone()), Unshielded(x.clone(), y.clone())];
                        conditions.extend(extra.iter().cloned());
                        out.push(Effect::new(DirectContained(x.clone(), b.clone()), conditions));
                    }
                }
            }
        }
    }
    out
}

/// Which sorts a guarded threat entry applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guard {
    Always,
    /// The fluent argument at this position has one of the listed sorts.
    ArgSort(usize, &'static [Sort]),
    ArgNotSort(usize, &'static [Sort]),
}

/// A pattern slot in a threat template: copied from a fluent argument, or a wildcard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateSlot {
    Arg(usize),
    Any,
}

/// One row of the explanation-closure table: an event shape that can falsify a
/// fluent of the given kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThreatEntry {
    pub fluent: FluentKind,
    pub guard: Guard,
    pub threat: ActionKind,
    pub slots: &'static [TemplateSlot],
}

const fn entry(fluent: FluentKind, guard: Guard, threat: ActionKind, slots: &'static [TemplateSlot]) -> ThreatEntry {
    ThreatEntry { fluent, guard, threat, slots }
}

use FluentKind as F;
use TemplateSlot::{Any, Arg};

const LIDDED: &[Sort] = &[Sort::ContainerWithLid];
const OPEN: &[Sort] = &[Sort::OpenContainer];
const CLOSED: &[Sort] = &[Sort::ClosedContainer];

pub const THREAT_TABLE: &[ThreatEntry] = &[
    entry(F::OutsideAt, Guard::Always, ActionKind::Carry, &[Arg(0), Any]),
    entry(F::OutsideAt, Guard::Always, ActionKind::Load, &[Arg(0), Any]),
    entry(F::OutsideAt, Guard::Always, ActionKind::Seal, &[Arg(0), Any, Any]),
    entry(F::OutsideAt, Guard::Always, ActionKind::Seal, &[Any, Arg(0), Any]),
    entry(F::OutsideAt, Guard::ArgSort(0, LIDDED), ActionKind::Unseal, &[Arg(0), Any, Any]),
    entry(F::DirectContained, Guard::ArgNotSort(1, CLOSED), ActionKind::Unload, &[Arg(0), Arg(1)]),
    entry(F::DirectContained, Guard::ArgNotSort(1, CLOSED), ActionKind::Dump, &[Any]),
    entry(F::Contained, Guard::ArgSort(1, LIDDED), ActionKind::Unseal, &[Arg(1), Any, Any]),
    entry(F::Contained, Guard::ArgSort(1, OPEN), ActionKind::Unload, &[Arg(0), Arg(1)]),
    entry(F::Contained, Guard::ArgSort(1, OPEN), ActionKind::Unload, &[Any, Arg(1)]),
    entry(F::Contained, Guard::ArgSort(1, OPEN), ActionKind::Dump, &[Any]),
    entry(F::Effective, Guard::Always, ActionKind::Seal, &[Arg(0), Any, Any]),
    entry(F::Effective, Guard::Always, ActionKind::Seal, &[Any, Arg(0), Any]),
    entry(F::Effective, Guard::Always, ActionKind::Unseal, &[Arg(0), Any, Any]),
    entry(F::Ineffective, Guard::Always, ActionKind::Seal, &[Any, Any, Arg(0)]),
    entry(F::Ineffective, Guard::Always, ActionKind::Unseal, &[Any, Arg(0), Any]),
    entry(F::Ineffective, Guard::Always, ActionKind::Unseal, &[Any, Any, Arg(0)]),
];

/// The event patterns that could falsify `fluent`. If none of them occurs over an
/// interval, the fluent persists across it.
pub fn threats_for(sig: &Signature, fluent: &Fluent) -> Result<Vec<ActionPattern>, Error> {
    if fluent.kind() == FluentKind::Unshielded {
        return Err(Error::UnsupportedFluent(FluentKind::Unshielded));
    }
    sig.check_fluent(fluent)?;
    let args = fluent.args();
    let sort_at = |i: usize| sig.sort_of(args[i]);
    let mut out = Vec::new();
    for e in THREAT_TABLE.iter().filter(|e| e.fluent == fluent.kind()) {
        let applies = match e.guard {
            Guard::Always => true,
            Guard::ArgSort(i, sorts) => sort_at(i).is_some_and(|s| sorts.contains(&s)),
            Guard::ArgNotSort(i, sorts) => sort_at(i).is_some_and(|s| !sorts.contains(&s)),
        };
        if !applies {
            continue;
        }
        let slots = e
            .slots
            .iter()
            .map(|s| match s {
                Arg(i) => Slot::Is(args[*i].clone()),
                Any => Slot::Any,
            })
            .collect();
        out.push(ActionPattern { kind: e.threat, slots });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specdsl::{parse_fluent, parse_pattern, parse_spec};

    fn sig(text: &str) -> Signature {
        parse_spec(text).unwrap().signature
    }

    fn f(s: &str) -> Fluent {
        parse_fluent(s).unwrap()
    }

    fn pats(list: &[&str]) -> Vec<ActionPattern> {
        list.iter().map(|p| parse_pattern(p).unwrap()).collect()
    }

    const WORLD: &str = "block(oa). block(ob). openContainer(oc). lid(ol). containerWithLid(ow).
        components(oc,ol,ow). closedContainer(cc). location(la). location(lb).";

    #[test]
    fn load_effects_include_transitive_containment() {
        let s = sig(WORLD);
        let fx = effect_rules_for(&s, &Action::Load("ob".into(), "oc".into()));
        assert!(fx.contains(&Effect::new(f("contained(ob,oc)"), vec![])));
        assert!(fx.contains(&Effect::new(f("directContained(ob,oc)"), vec![])));
        assert!(fx.contains(&Effect::new(f("contained(oa,oc)"), vec![f("contained(oa,ob)")])));
        assert!(fx.contains(&Effect::new(f("contained(cc,oc)"), vec![f("contained(cc,ob)")])));
    }

    #[test]
    fn seal_transfers_containment_to_composite() {
        let s = sig(WORLD);
        let fx = effect_rules_for(&s, &Action::Seal("oc".into(), "ol".into(), "ow".into()));
        assert!(fx.contains(&Effect::new(f("contained(oa,ow)"), vec![f("contained(oa,oc)")])));
        assert!(fx.contains(&Effect::new(f("effective(ow)"), vec![])));
        assert!(fx.contains(&Effect::new(f("outsideAt(ow,lb)"), vec![f("outsideAt(oc,lb)")])));
    }

    #[test]
    fn carry_effect() {
        let s = sig(WORLD);
        let fx = effect_rules_for(&s, &Action::Carry("oc".into(), "lb".into()));
        assert_eq!(fx, vec![Effect::new(f("outsideAt(oc,lb)"), vec![])]);
    }

    #[test]
    fn no_effect_produces_unshielded() {
        let s = sig(WORLD);
        for a in [
            "carry(oc,la)",
            "load(oa,oc)",
            "unload(oa,oc)",
            "seal(oc,ol,ow)",
            "unseal(ow,ol,oc)",
            "dump(oc)",
            "dump(ow)",
            "dump(cc)",
        ] {
            let p = parse_pattern(a).unwrap();
            let args = p
                .slots
                .iter()
                .map(|s| match s {
                    Slot::Is(i) => i.clone(),
                    Slot::Any => unreachable!(),
                })
                .collect();
            let act = Action::from_parts(p.kind, args).unwrap();
            assert!(effect_rules_for(&s, &act).iter().all(|e| e.goal.kind() != FluentKind::Unshielded));
        }
    }

    #[test]
    fn dump_barrier_rules() {
        let s = sig(WORLD);
        let fx = effect_rules_for(&s, &Action::Dump("ow".into()));
        assert!(fx.contains(&Effect::new(
            f("directContained(oa,oc)"),
            vec![f("directContained(ob,oc)"), f("unshielded(oa,ob)"), f("effective(ow)")]
        )));
        let fx = effect_rules_for(&s, &Action::Dump("oc".into()));
        assert!(fx.contains(&Effect::new(
            f("directContained(oa,cc)"),
            vec![f("directContained(ob,cc)"), f("unshielded(oa,ob)"), f("contained(cc,oc)")]
        )));
        assert!(fx.contains(&Effect::new(
            f("outsideAt(oa,la)"),
            vec![f("contained(oa,oc)"), f("unshielded(oa,oc)"), f("outsideAt(oc,la)")]
        )));
    }

    #[test]
    fn threats_for_sealed_containment() {
        let s = sig(WORLD);
        assert_eq!(threats_for(&s, &f("contained(oa,ow)")).unwrap(), pats(&["unseal(ow,_,_)"]));
    }

    #[test]
    fn closed_container_contents_have_no_threats() {
        let s = sig(WORLD);
        assert!(threats_for(&s, &f("contained(oa,cc)")).unwrap().is_empty());
        assert!(threats_for(&s, &f("directContained(oa,cc)")).unwrap().is_empty());
    }

    #[test]
    fn outside_at_threats_for_a_block() {
        let s = sig(WORLD);
        assert_eq!(
            threats_for(&s, &f("outsideAt(ob,la)")).unwrap(),
            pats(&["carry(ob,_)", "load(ob,_)", "seal(ob,_,_)", "seal(_,ob,_)"])
        );
        assert_eq!(
            threats_for(&s, &f("outsideAt(ow,la)")).unwrap(),
            pats(&["carry(ow,_)", "load(ow,_)", "seal(ow,_,_)", "seal(_,ow,_)", "unseal(ow,_,_)"])
        );
    }

    #[test]
    fn open_container_threats() {
        let s = sig(WORLD);
        assert_eq!(
            threats_for(&s, &f("contained(ob,oc)")).unwrap(),
            pats(&["unload(ob,oc)", "unload(_,oc)", "dump(_)"])
        );
        assert_eq!(threats_for(&s, &f("directContained(ob,oc)")).unwrap(), pats(&["unload(ob,oc)", "dump(_)"]));
        assert_eq!(
            threats_for(&s, &f("ineffective(ow)")).unwrap(),
            pats(&["seal(_,_,ow)", "unseal(_,ow,_)", "unseal(_,_,ow)"])
        );
    }

    #[test]
    fn unshielded_has_no_threat_table() {
        let s = sig(WORLD);
        assert_eq!(threats_for(&s, &f("unshielded(oa,oc)")), Err(Error::UnsupportedFluent(FluentKind::Unshielded)));
    }
}
