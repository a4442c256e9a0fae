//! Ground terms of the container microworld: objects and their sorts, locations,
//! named time points, fluents, actions and action patterns.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// An identifier for an object, location or time point.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ident(Arc<str>);

impl Ident {
    pub fn new(name: impl AsRef<str>) -> Self {
        Ident(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True if `name` has the shape `[a-z][a-zA-Z0-9]*`.
    pub fn is_valid(name: &str) -> bool {
        let mut chars = name.chars();
        matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_alphanumeric())
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for Ident {
    fn from(s: &str) -> Self {
        Ident::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Sort {
    Block,
    OpenContainer,
    Lid,
    ContainerWithLid,
    ClosedContainer,
}

impl Sort {
    pub const ALL: [Sort; 5] =
        [Sort::Block, Sort::OpenContainer, Sort::Lid, Sort::ContainerWithLid, Sort::ClosedContainer];

    /// The statement head used to declare an object of this sort.
    pub fn keyword(self) -> &'static str {
        match self {
            Sort::Block => "block",
            Sort::OpenContainer => "openContainer",
            Sort::Lid => "lid",
            Sort::ContainerWithLid => "containerWithLid",
            Sort::ClosedContainer => "closedContainer",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Sort> {
        Sort::ALL.into_iter().find(|sort| sort.keyword() == s)
    }

    /// Sorts whose objects can hold other objects (in some configuration).
    pub fn is_container(self) -> bool {
        matches!(self, Sort::OpenContainer | Sort::ContainerWithLid | Sort::ClosedContainer)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// `components(open, lid, lidded)`: the lidded container is assembled from the
/// open container and the lid.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Components {
    pub open: Ident,
    pub lid: Ident,
    pub lidded: Ident,
}

/// The declared universe of a problem.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub objects: BTreeMap<Ident, Sort>,
    pub locations: BTreeSet<Ident>,
    pub components: BTreeSet<Components>,
}

impl Signature {
    pub fn sort_of(&self, id: &Ident) -> Option<Sort> {
        self.objects.get(id).copied()
    }

    pub fn is_object(&self, id: &Ident) -> bool {
        self.objects.contains_key(id)
    }

    pub fn is_location(&self, id: &Ident) -> bool {
        self.locations.contains(id)
    }

    pub fn triple_of_open(&self, open: &Ident) -> Option<&Components> {
        self.components.iter().find(|c| &c.open == open)
    }

    pub fn triple_of_lid(&self, lid: &Ident) -> Option<&Components> {
        self.components.iter().find(|c| &c.lid == lid)
    }

    pub fn triple_of_lidded(&self, lidded: &Ident) -> Option<&Components> {
        self.components.iter().find(|c| &c.lidded == lidded)
    }

    pub fn is_triple(&self, open: &Ident, lid: &Ident, lidded: &Ident) -> bool {
        self.components.iter().any(|c| &c.open == open && &c.lid == lid && &c.lidded == lidded)
    }

    pub fn objects(&self) -> impl Iterator<Item = &Ident> {
        self.objects.keys()
    }

    fn expect_object(&self, id: &Ident) -> Result<(), Error> {
        if self.is_object(id) {
            Ok(())
        } else if self.is_location(id) {
            Err(Error::IllSorted(format!("`{id}` is a location, expected an object")))
        } else {
            Err(Error::Undeclared(id.clone()))
        }
    }

    fn expect_location(&self, id: &Ident) -> Result<(), Error> {
        if self.is_location(id) {
            Ok(())
        } else if self.is_object(id) {
            Err(Error::IllSorted(format!("`{id}` is an object, expected a location")))
        } else {
            Err(Error::Undeclared(id.clone()))
        }
    }

    /// Checks that every argument of the fluent is declared in the right name space.
    pub fn check_fluent(&self, fluent: &Fluent) -> Result<(), Error> {
        match fluent {
            Fluent::OutsideAt(o, l) => {
                self.expect_object(o)?;
                self.expect_location(l)
            }
            Fluent::DirectContained(a, b) | Fluent::Contained(a, b) | Fluent::Unshielded(a, b) => {
                self.expect_object(a)?;
                self.expect_object(b)
            }
            Fluent::Effective(o) | Fluent::Ineffective(o) => self.expect_object(o),
        }
    }

    pub fn check_action(&self, action: &Action) -> Result<(), Error> {
        for (slot, arg) in action.kind().slot_kinds().iter().zip(action.args()) {
            match slot {
                SlotKind::Object => self.expect_object(arg)?,
                SlotKind::Location => self.expect_location(arg)?,
            }
        }
        Ok(())
    }

    pub fn check_pattern(&self, pattern: &ActionPattern) -> Result<(), Error> {
        for (slot, arg) in pattern.kind.slot_kinds().iter().zip(&pattern.slots) {
            if let Slot::Is(id) = arg {
                match slot {
                    SlotKind::Object => self.expect_object(id)?,
                    SlotKind::Location => self.expect_location(id)?,
                }
            }
        }
        Ok(())
    }
}

/// The chain of named time points, ordered by immediate precedence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timeline {
    points: Vec<Ident>,
    index: HashMap<Ident, usize>,
}

impl Timeline {
    /// Builds the chain from `earlier` pairs. The pairs must link every point into
    /// a single chain with no branching and no cycle.
    pub fn from_pairs(pairs: &[(Ident, Ident)]) -> Result<Timeline, String> {
        if pairs.is_empty() {
            return Err("no time points declared".into());
        }
        let mut next: BTreeMap<&Ident, &Ident> = BTreeMap::new();
        let mut prev: BTreeMap<&Ident, &Ident> = BTreeMap::new();
        for (a, b) in pairs {
            if a == b {
                return Err(format!("earlier({a},{b}) relates a time point to itself"));
            }
            if let Some(old) = next.insert(a, b) {
                if old != b {
                    return Err(format!("time point {a} has two successors ({old} and {b})"));
                }
            }
            if let Some(old) = prev.insert(b, a) {
                if old != a {
                    return Err(format!("time point {b} has two predecessors ({old} and {a})"));
                }
            }
        }
        let starts: Vec<&Ident> = next.keys().filter(|p| !prev.contains_key(*p)).copied().collect();
        let &[start] = starts.as_slice() else {
            return Err(if starts.is_empty() {
                "earlier facts form a cycle".into()
            } else {
                format!("earlier facts do not form a single chain ({} separate chains)", starts.len())
            });
        };
        let mut points = vec![start.clone()];
        let mut cur = start;
        while let Some(&n) = next.get(cur) {
            if points.len() > next.len() {
                return Err("earlier facts form a cycle".into());
            }
            points.push(n.clone());
            cur = n;
        }
        if points.len() != next.len() + 1 {
            return Err("earlier facts do not form a single chain".into());
        }
        Ok(Timeline::from_points(points))
    }

    pub fn from_points(points: Vec<Ident>) -> Timeline {
        let index = points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        Timeline { points, index }
    }

    pub fn points(&self) -> &[Ident] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, t: &Ident) -> Result<usize, Error> {
        self.index.get(t).copied().ok_or_else(|| Error::UnknownTimePoint(t.clone()))
    }

    pub fn contains(&self, t: &Ident) -> bool {
        self.index.contains_key(t)
    }

    /// Strict order on the chain.
    pub fn precedes(&self, t1: &Ident, t2: &Ident) -> Result<bool, Error> {
        Ok(self.index_of(t1)? < self.index_of(t2)?)
    }

    pub fn immediately_precedes(&self, t1: &Ident, t2: &Ident) -> Result<bool, Error> {
        Ok(self.index_of(t1)? + 1 == self.index_of(t2)?)
    }

    pub fn predecessor(&self, t: &Ident) -> Result<Option<&Ident>, Error> {
        let i = self.index_of(t)?;
        Ok(i.checked_sub(1).map(|j| &self.points[j]))
    }

    pub fn earlier_pairs(&self) -> impl Iterator<Item = (&Ident, &Ident)> {
        self.points.windows(2).map(|w| (&w[0], &w[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FluentKind {
    OutsideAt,
    DirectContained,
    Contained,
    Effective,
    Ineffective,
    Unshielded,
}

impl FluentKind {
    pub const ALL: [FluentKind; 6] = [
        FluentKind::OutsideAt,
        FluentKind::DirectContained,
        FluentKind::Contained,
        FluentKind::Effective,
        FluentKind::Ineffective,
        FluentKind::Unshielded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FluentKind::OutsideAt => "outsideAt",
            FluentKind::DirectContained => "directContained",
            FluentKind::Contained => "contained",
            FluentKind::Effective => "effective",
            FluentKind::Ineffective => "ineffective",
            FluentKind::Unshielded => "unshielded",
        }
    }

    pub fn from_name(s: &str) -> Option<FluentKind> {
        FluentKind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn arity(self) -> usize {
        match self {
            FluentKind::Effective | FluentKind::Ineffective => 1,
            _ => 2,
        }
    }
}

/// A ground Boolean fluent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Fluent {
    /// Top-level at a location: not inside any container.
    OutsideAt(Ident, Ident),
    DirectContained(Ident, Ident),
    /// Non-reflexive transitive closure of direct containment, lifted through
    /// assembled lidded containers.
    Contained(Ident, Ident),
    Effective(Ident),
    Ineffective(Ident),
    /// Derived only: the first object is inside the second and no barrier lies on
    /// the containment chain between them (inclusive of the second).
    Unshielded(Ident, Ident),
}

impl Fluent {
    pub fn kind(&self) -> FluentKind {
        match self {
            Fluent::OutsideAt(..) => FluentKind::OutsideAt,
            Fluent::DirectContained(..) => FluentKind::DirectContained,
            Fluent::Contained(..) => FluentKind::Contained,
            Fluent::Effective(..) => FluentKind::Effective,
            Fluent::Ineffective(..) => FluentKind::Ineffective,
            Fluent::Unshielded(..) => FluentKind::Unshielded,
        }
    }

    pub fn args(&self) -> Vec<&Ident> {
        match self {
            Fluent::OutsideAt(a, b)
            | Fluent::DirectContained(a, b)
            | Fluent::Contained(a, b)
            | Fluent::Unshielded(a, b) => vec![a, b],
            Fluent::Effective(a) | Fluent::Ineffective(a) => vec![a],
        }
    }

    pub fn from_parts(kind: FluentKind, mut args: Vec<Ident>) -> Option<Fluent> {
        if args.len() != kind.arity() {
            return None;
        }
        let second = if args.len() == 2 { args.pop() } else { None };
        let first = args.pop()?;
        Some(match kind {
            FluentKind::OutsideAt => Fluent::OutsideAt(first, second?),
            FluentKind::DirectContained => Fluent::DirectContained(first, second?),
            FluentKind::Contained => Fluent::Contained(first, second?),
            FluentKind::Unshielded => Fluent::Unshielded(first, second?),
            FluentKind::Effective => Fluent::Effective(first),
            FluentKind::Ineffective => Fluent::Ineffective(first),
        })
    }
}

impl fmt::Display for Fluent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self.kind().name(), self.args().into_iter().map(Ident::as_str))
    }
}

/// A fluent or its negation, as a query goal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Literal {
    Holds(Fluent),
    NotHolds(Fluent),
}

impl Literal {
    pub fn fluent(&self) -> &Fluent {
        match self {
            Literal::Holds(f) | Literal::NotHolds(f) => f,
        }
    }

    pub fn is_positive(&self) -> bool {
        matches!(self, Literal::Holds(_))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Holds(q) => write!(f, "{q}"),
            Literal::NotHolds(q) => write!(f, "not({q})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ActionKind {
    Carry,
    Load,
    Unload,
    Seal,
    Unseal,
    Dump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Object,
    Location,
}

impl ActionKind {
    pub const ALL: [ActionKind; 6] = [
        ActionKind::Carry,
        ActionKind::Load,
        ActionKind::Unload,
        ActionKind::Seal,
        ActionKind::Unseal,
        ActionKind::Dump,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::Carry => "carry",
            ActionKind::Load => "load",
            ActionKind::Unload => "unload",
            ActionKind::Seal => "seal",
            ActionKind::Unseal => "unseal",
            ActionKind::Dump => "dump",
        }
    }

    pub fn from_name(s: &str) -> Option<ActionKind> {
        ActionKind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn slot_kinds(self) -> &'static [SlotKind] {
        use SlotKind::*;
        match self {
            ActionKind::Carry => &[Object, Location],
            ActionKind::Load | ActionKind::Unload => &[Object, Object],
            ActionKind::Seal | ActionKind::Unseal => &[Object, Object, Object],
            ActionKind::Dump => &[Object],
        }
    }

    pub fn arity(self) -> usize {
        self.slot_kinds().len()
    }
}

/// A ground action.
///
/// Argument order follows the action's reading: `seal(open, lid, lidded)` and
/// `unseal(lidded, lid, open)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Action {
    Carry(Ident, Ident),
    Load(Ident, Ident),
    Unload(Ident, Ident),
    Seal(Ident, Ident, Ident),
    Unseal(Ident, Ident, Ident),
    Dump(Ident),
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Carry(..) => ActionKind::Carry,
            Action::Load(..) => ActionKind::Load,
            Action::Unload(..) => ActionKind::Unload,
            Action::Seal(..) => ActionKind::Seal,
            Action::Unseal(..) => ActionKind::Unseal,
            Action::Dump(..) => ActionKind::Dump,
        }
    }

    pub fn args(&self) -> Vec<&Ident> {
        match self {
            Action::Carry(a, b) | Action::Load(a, b) | Action::Unload(a, b) => vec![a, b],
            Action::Seal(a, b, c) | Action::Unseal(a, b, c) => vec![a, b, c],
            Action::Dump(a) => vec![a],
        }
    }

    pub fn from_parts(kind: ActionKind, args: Vec<Ident>) -> Option<Action> {
        if args.len() != kind.arity() {
            return None;
        }
        let mut it = args.into_iter();
        let mut next = || it.next();
        Some(match kind {
            ActionKind::Carry => Action::Carry(next()?, next()?),
            ActionKind::Load => Action::Load(next()?, next()?),
            ActionKind::Unload => Action::Unload(next()?, next()?),
            ActionKind::Seal => Action::Seal(next()?, next()?, next()?),
            ActionKind::Unseal => Action::Unseal(next()?, next()?, next()?),
            ActionKind::Dump => Action::Dump(next()?),
        })
    }

    /// The fully ground pattern matching exactly this action.
    pub fn to_pattern(&self) -> ActionPattern {
        ActionPattern { kind: self.kind(), slots: self.args().into_iter().cloned().map(Slot::Is).collect() }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self.kind().name(), self.args().into_iter().map(Ident::as_str))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Slot {
    Any,
    Is(Ident),
}

impl Slot {
    pub fn admits(&self, id: &Ident) -> bool {
        match self {
            Slot::Any => true,
            Slot::Is(x) => x == id,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Any => f.write_str("_"),
            Slot::Is(id) => write!(f, "{id}"),
        }
    }
}

/// An action shape whose argument slots may be wildcards.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionPattern {
    pub kind: ActionKind,
    pub slots: Vec<Slot>,
}

impl ActionPattern {
    pub fn new(kind: ActionKind, slots: Vec<Slot>) -> Option<ActionPattern> {
        (slots.len() == kind.arity()).then_some(ActionPattern { kind, slots })
    }

    pub fn any(kind: ActionKind) -> ActionPattern {
        ActionPattern { kind, slots: vec![Slot::Any; kind.arity()] }
    }

    /// True if every action matched by `other` is also matched by `self`.
    pub fn subsumes(&self, other: &ActionPattern) -> bool {
        self.kind == other.kind
            && self.slots.iter().zip(&other.slots).all(|(mine, theirs)| match (mine, theirs) {
                (Slot::Any, _) => true,
                (Slot::Is(a), Slot::Is(b)) => a == b,
                (Slot::Is(_), Slot::Any) => false,
            })
    }

    pub fn is_ground(&self) -> bool {
        self.slots.iter().all(|s| matches!(s, Slot::Is(_)))
    }
}

impl fmt::Display for ActionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slots: Vec<String> = self.slots.iter().map(Slot::to_string).collect();
        write_term(f, self.kind.name(), slots.iter().map(String::as_str))
    }
}

pub fn matches_pattern(action: &Action, pattern: &ActionPattern) -> bool {
    action.kind() == pattern.kind && action.args().into_iter().zip(&pattern.slots).all(|(arg, slot)| slot.admits(arg))
}

/// `occurs(start, end, action)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Occurrence {
    pub start: Ident,
    pub end: Ident,
    pub action: Action,
}

impl fmt::Display for Occurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "occurs({},{},{})", self.start, self.end, self.action)
    }
}

/// `notOccurs(start, end, pattern)`: no action matching the pattern occurs in an
/// interval whose interior meets the interior of `[start, end]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NonOccurrence {
    pub start: Ident,
    pub end: Ident,
    pub pattern: ActionPattern,
}

impl fmt::Display for NonOccurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "notOccurs({},{},{})", self.start, self.end, self.pattern)
    }
}

/// `holds(time, fluent)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HoldsFact {
    pub time: Ident,
    pub fluent: Fluent,
}

impl fmt::Display for HoldsFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "holds({},{})", self.time, self.fluent)
    }
}

fn write_term<'a>(f: &mut fmt::Formatter<'_>, head: &str, args: impl Iterator<Item = &'a str>) -> fmt::Result {
    f.write_str(head)?;
    f.write_str("(")?;
    for (i, a) in args.enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        f.write_str(a)?;
    }
    f.write_str(")")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> Ident {
        Ident::new(s)
    }

    fn pat(kind: ActionKind, slots: &[&str]) -> ActionPattern {
        let slots = slots.iter().map(|s| if *s == "_" { Slot::Any } else { Slot::Is(id(s)) }).collect();
        ActionPattern::new(kind, slots).unwrap()
    }

    #[test]
    fn wildcard_slots_match_anything() {
        let unseal = Action::Unseal(id("ow"), id("ol"), id("oc"));
        assert!(matches_pattern(&unseal, &pat(ActionKind::Unseal, &["ow", "_", "_"])));
    }

    #[test]
    fn ground_slot_mismatch() {
        let load = Action::Load(id("oa"), id("oc"));
        assert!(!matches_pattern(&load, &pat(ActionKind::Load, &["oa", "od"])));
    }

    #[test]
    fn kind_mismatch() {
        let dump = Action::Dump(id("oc"));
        assert!(!matches_pattern(&dump, &pat(ActionKind::Carry, &["oc", "_"])));
    }

    #[test]
    fn precedes_is_strict_total_order() {
        let tl = Timeline::from_pairs(&[(id("t1"), id("t2")), (id("t0"), id("t1"))]).unwrap();
        assert_eq!(tl.points(), &[id("t0"), id("t1"), id("t2")]);
        assert!(tl.precedes(&id("t0"), &id("t2")).unwrap());
        assert!(!tl.precedes(&id("t1"), &id("t1")).unwrap());
        assert!(!tl.precedes(&id("t2"), &id("t0")).unwrap());
        assert!(matches!(tl.precedes(&id("t9"), &id("t0")), Err(Error::UnknownTimePoint(_))));
    }

    #[test]
    fn timeline_rejects_branches_and_cycles() {
        assert!(Timeline::from_pairs(&[]).is_err());
        assert!(Timeline::from_pairs(&[(id("a"), id("b")), (id("a"), id("c"))]).is_err());
        assert!(Timeline::from_pairs(&[(id("a"), id("b")), (id("c"), id("b"))]).is_err());
        assert!(Timeline::from_pairs(&[(id("a"), id("b")), (id("b"), id("a"))]).is_err());
        assert!(Timeline::from_pairs(&[(id("a"), id("b")), (id("c"), id("d"))]).is_err());
        assert!(Timeline::from_pairs(&[(id("a"), id("b")), (id("x"), id("y")), (id("y"), id("x"))]).is_err());
    }

    #[test]
    fn subsumption() {
        let broad = pat(ActionKind::Unseal, &["ow", "_", "_"]);
        let narrow = pat(ActionKind::Unseal, &["ow", "ol", "oc"]);
        assert!(broad.subsumes(&narrow));
        assert!(!narrow.subsumes(&broad));
        assert!(broad.subsumes(&broad));
    }

    #[test]
    fn sort_checking_rejects_undeclared_ids() {
        let mut sig = Signature::default();
        sig.objects.insert(id("oa"), Sort::Block);
        sig.locations.insert(id("la"));
        assert!(sig.check_fluent(&Fluent::OutsideAt(id("oa"), id("la"))).is_ok());
        assert!(matches!(sig.check_fluent(&Fluent::OutsideAt(id("ob"), id("la"))), Err(Error::Undeclared(_))));
        assert!(matches!(sig.check_fluent(&Fluent::OutsideAt(id("la"), id("oa"))), Err(Error::IllSorted(_))));
        assert!(sig.check_action(&Action::Carry(id("oa"), id("lz"))).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_action() -> impl Strategy<Value = Action> {
            let name = prop::sample::select(vec!["a", "b", "c", "d"]);
            (0..6usize, prop::collection::vec(name, 3)).prop_map(|(k, names)| {
                let kind = ActionKind::ALL[k];
                let args = names[..kind.arity()].iter().map(Ident::new).collect();
                Action::from_parts(kind, args).unwrap()
            })
        }

        proptest! {
            #[test]
            fn generalizing_a_slot_preserves_matching(
                action in arb_action(),
                mask in prop::collection::vec(any::<bool>(), 3),
            ) {
                let ground = action.to_pattern();
                prop_assert!(matches_pattern(&action, &ground));
                let mut general = ground.clone();
                for (slot, wild) in general.slots.iter_mut().zip(mask) {
                    if wild {
                        *slot = Slot::Any;
                    }
                }
                prop_assert!(matches_pattern(&action, &general));
                prop_assert!(general.subsumes(&ground));
            }

            #[test]
            fn undeclared_ids_are_rejected(name in "[a-z][a-z0-9]{0,4}") {
                let mut sig = Signature::default();
                sig.objects.insert(Ident::new("oa"), Sort::OpenContainer);
                sig.locations.insert(Ident::new("la"));
                prop_assume!(name != "oa" && name != "la");
                let fresh = Ident::new(&name);
                prop_assert!(sig.check_fluent(&Fluent::Contained(fresh.clone(), Ident::new("oa"))).is_err());
                prop_assert!(sig.check_action(&Action::Dump(fresh.clone())).is_err());
                prop_assert!(sig.check_fluent(&Fluent::OutsideAt(Ident::new("oa"), fresh)).is_err());
            }
        }
    }
}
