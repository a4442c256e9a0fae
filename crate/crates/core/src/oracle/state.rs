use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::domain::{Action, ActionKind, ActionPattern, Components, Fluent, Ident, Signature, Slot, Sort};
use crate::error::Error;

/// Where an object is. `Absent` means the object is ineffective: an unassembled
/// lidded container, or a component absorbed into an assembled one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pos {
    Absent,
    Top(u8),
    In(u8),
}

/// A total closed-world snapshot, indexed by the objects of a [`Universe`].
///
/// Contents of an absorbed open container stay `In` it; containment is lifted to
/// the assembled lidded container on evaluation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorldState {
    pos: Vec<Pos>,
}

impl WorldState {
    pub fn positions(&self) -> &[Pos] {
        &self.pos
    }

    pub fn pos(&self, o: u8) -> Pos {
        self.pos[o as usize]
    }
}

/// A fluent over universe indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IFluent {
    OutsideAt(u8, u8),
    DirectContained(u8, u8),
    Contained(u8, u8),
    Effective(u8),
    Ineffective(u8),
    Unshielded(u8, u8),
}

/// A ground action over universe indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IAction {
    Carry(u8, u8),
    Load(u8, u8),
    Unload(u8, u8),
    Seal(u8, u8, u8),
    Unseal(u8, u8, u8),
    Dump(u8),
}

impl IAction {
    fn kind(&self) -> ActionKind {
        match self {
            IAction::Carry(..) => ActionKind::Carry,
            IAction::Load(..) => ActionKind::Load,
            IAction::Unload(..) => ActionKind::Unload,
            IAction::Seal(..) => ActionKind::Seal,
            IAction::Unseal(..) => ActionKind::Unseal,
            IAction::Dump(..) => ActionKind::Dump,
        }
    }

    fn args(&self) -> ([u8; 3], usize) {
        match *self {
            IAction::Carry(a, b) | IAction::Load(a, b) | IAction::Unload(a, b) => ([a, b, 0], 2),
            IAction::Seal(a, b, c) | IAction::Unseal(a, b, c) => ([a, b, c], 3),
            IAction::Dump(a) => ([a, 0, 0], 1),
        }
    }
}

/// An action pattern over universe indices; `None` is a wildcard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IPattern {
    kind: ActionKind,
    slots: Vec<Option<u8>>,
}

impl IPattern {
    pub fn matches(&self, a: &IAction) -> bool {
        if a.kind() != self.kind {
            return false;
        }
        let (args, n) = a.args();
        self.slots.iter().zip(&args[..n]).all(|(s, x)| s.is_none_or(|v| v == *x))
    }
}

/// Why an action is not applicable in a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, thiserror::Error)]
pub enum PreconditionFailure {
    #[error("not-top-level")]
    NotTopLevel,
    #[error("not-effective")]
    NotEffective,
    #[error("location-mismatch")]
    LocationMismatch,
    #[error("wrong-sort")]
    WrongSort,
    #[error("not-directly-contained")]
    NotDirectlyContained,
    #[error("self-containment")]
    SelfContainment,
}

/// The objects and locations of one closed world, the declared ones first.
#[derive(Debug, Clone)]
pub struct Universe {
    objects: Vec<Ident>,
    sorts: Vec<Sort>,
    locations: Vec<Ident>,
    /// `(open, lid, lidded)` index triples.
    triples: Vec<[u8; 3]>,
    triple_of: Vec<Option<usize>>,
    object_index: HashMap<Ident, u8>,
    location_index: HashMap<Ident, u8>,
    fresh: BTreeSet<Ident>,
}

const MAX_OBJECTS: usize = 64;

impl Universe {
    /// The closed universe of exactly the declared entities.
    pub fn new(sig: &Signature) -> Universe {
        Universe::with_fresh(sig, &[], 0)
    }

    /// Declared entities plus fresh unnamed ones. A fresh lidded container comes
    /// with its own fresh open container and lid.
    pub fn with_fresh(sig: &Signature, extra_objects: &[Sort], extra_locations: usize) -> Universe {
        let mut taken: BTreeSet<Ident> = sig.objects.keys().chain(&sig.locations).cloned().collect();
        let mut fresh_name = |prefix: &str| {
            let mut n = 1;
            loop {
                let id = Ident::new(format!("{prefix}{n}"));
                if taken.insert(id.clone()) {
                    return id;
                }
                n += 1;
            }
        };
        let mut objects: Vec<(Ident, Sort)> = sig.objects.iter().map(|(k, v)| (k.clone(), *v)).collect();
        let mut components: Vec<Components> = sig.components.iter().cloned().collect();
        let mut locations: Vec<Ident> = sig.locations.iter().cloned().collect();
        let mut fresh = BTreeSet::new();
        for sort in extra_objects {
            let prefix = match sort {
                Sort::Block => "xb",
                Sort::OpenContainer => "xoc",
                Sort::Lid => "xl",
                Sort::ContainerWithLid => "xow",
                Sort::ClosedContainer => "xcc",
            };
            if *sort == Sort::ContainerWithLid {
                let (open, lid, lidded) = (fresh_name("xoc"), fresh_name("xl"), fresh_name(prefix));
                for (id, s) in [(&open, Sort::OpenContainer), (&lid, Sort::Lid), (&lidded, Sort::ContainerWithLid)] {
                    objects.push((id.clone(), s));
                    fresh.insert(id.clone());
                }
                components.push(Components { open, lid, lidded });
            } else {
                let id = fresh_name(prefix);
                objects.push((id.clone(), *sort));
                fresh.insert(id);
            }
        }
        for _ in 0..extra_locations {
            let id = fresh_name("xloc");
            locations.push(id.clone());
            fresh.insert(id);
        }
        assert!(objects.len() <= MAX_OBJECTS && locations.len() <= MAX_OBJECTS, "universe too large");
        let object_index: HashMap<Ident, u8> =
            objects.iter().enumerate().map(|(i, (id, _))| (id.clone(), i as u8)).collect();
        let location_index = locations.iter().enumerate().map(|(i, id)| (id.clone(), i as u8)).collect();
        let mut triples: Vec<[u8; 3]> =
            components.iter().map(|c| [object_index[&c.open], object_index[&c.lid], object_index[&c.lidded]]).collect();
        triples.sort();
        let mut triple_of = vec![None; objects.len()];
        for (i, t) in triples.iter().enumerate() {
            for &o in t {
                triple_of[o as usize] = Some(i);
            }
        }
        Universe {
            sorts: objects.iter().map(|(_, s)| *s).collect(),
            objects: objects.into_iter().map(|(id, _)| id).collect(),
            locations,
            triples,
            triple_of,
            object_index,
            location_index,
            fresh,
        }
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn location_count(&self) -> usize {
        self.locations.len()
    }

    pub fn object_name(&self, o: u8) -> &Ident {
        &self.objects[o as usize]
    }

    pub fn location_name(&self, l: u8) -> &Ident {
        &self.locations[l as usize]
    }

    pub fn fresh(&self) -> &BTreeSet<Ident> {
        &self.fresh
    }

    pub fn sort(&self, o: u8) -> Sort {
        self.sorts[o as usize]
    }

    /// The signature of the extended universe.
    pub fn signature(&self) -> Signature {
        Signature {
            objects: self.objects.iter().cloned().zip(self.sorts.iter().copied()).collect(),
            locations: self.locations.iter().cloned().collect(),
            components: self
                .triples
                .iter()
                .map(|t| Components {
                    open: self.object_name(t[0]).clone(),
                    lid: self.object_name(t[1]).clone(),
                    lidded: self.object_name(t[2]).clone(),
                })
                .collect(),
        }
    }

    fn obj(&self, id: &Ident) -> Result<u8, Error> {
        self.object_index.get(id).copied().ok_or_else(|| Error::Undeclared(id.clone()))
    }

    fn loc(&self, id: &Ident) -> Result<u8, Error> {
        self.location_index.get(id).copied().ok_or_else(|| Error::Undeclared(id.clone()))
    }

    pub fn compile_fluent(&self, f: &Fluent) -> Result<IFluent, Error> {
        Ok(match f {
            Fluent::OutsideAt(o, l) => IFluent::OutsideAt(self.obj(o)?, self.loc(l)?),
            Fluent::DirectContained(a, b) => IFluent::DirectContained(self.obj(a)?, self.obj(b)?),
            Fluent::Contained(a, b) => IFluent::Contained(self.obj(a)?, self.obj(b)?),
            Fluent::Effective(o) => IFluent::Effective(self.obj(o)?),
            Fluent::Ineffective(o) => IFluent::Ineffective(self.obj(o)?),
            Fluent::Unshielded(a, b) => IFluent::Unshielded(self.obj(a)?, self.obj(b)?),
        })
    }

    pub fn compile_action(&self, a: &Action) -> Result<IAction, Error> {
        Ok(match a {
            Action::Carry(o, l) => IAction::Carry(self.obj(o)?, self.loc(l)?),
            Action::Load(o, c) => IAction::Load(self.obj(o)?, self.obj(c)?),
            Action::Unload(o, c) => IAction::Unload(self.obj(o)?, self.obj(c)?),
            Action::Seal(a, b, c) => IAction::Seal(self.obj(a)?, self.obj(b)?, self.obj(c)?),
            Action::Unseal(a, b, c) => IAction::Unseal(self.obj(a)?, self.obj(b)?, self.obj(c)?),
            Action::Dump(o) => IAction::Dump(self.obj(o)?),
        })
    }

    pub fn compile_pattern(&self, p: &ActionPattern) -> Result<IPattern, Error> {
        let mut slots = Vec::with_capacity(p.slots.len());
        for (i, s) in p.slots.iter().enumerate() {
            slots.push(match s {
                Slot::Any => None,
                Slot::Is(id) if p.kind == ActionKind::Carry && i == 1 => Some(self.loc(id)?),
                Slot::Is(id) => Some(self.obj(id)?),
            });
        }
        Ok(IPattern { kind: p.kind, slots })
    }

    pub fn action(&self, a: &IAction) -> Action {
        let o = |i: u8| self.object_name(i).clone();
        match *a {
            IAction::Carry(x, l) => Action::Carry(o(x), self.location_name(l).clone()),
            IAction::Load(x, c) => Action::Load(o(x), o(c)),
            IAction::Unload(x, c) => Action::Unload(o(x), o(c)),
            IAction::Seal(a, b, c) => Action::Seal(o(a), o(b), o(c)),
            IAction::Unseal(a, b, c) => Action::Unseal(o(a), o(b), o(c)),
            IAction::Dump(x) => Action::Dump(o(x)),
        }
    }

    /// The lidded container assembled from `o`, if `o` is an open component.
    fn lidded_of_open(&self, o: u8) -> Option<u8> {
        let t = self.triples[self.triple_of[o as usize]?];
        (t[0] == o).then_some(t[2])
    }

    fn is_absorbed(&self, s: &WorldState, o: u8) -> bool {
        self.lidded_of_open(o).is_some_and(|w| s.pos(w) != Pos::Absent)
    }

    fn is_barrier(&self, s: &WorldState, o: u8) -> bool {
        match self.sort(o) {
            Sort::ClosedContainer => true,
            Sort::OpenContainer => self.is_absorbed(s, o),
            Sort::ContainerWithLid => s.pos(o) != Pos::Absent,
            Sort::Block | Sort::Lid => false,
        }
    }

    /// The objects `x` is contained in, innermost first. Passing through an
    /// absorbed open container also passes through its lidded container.
    fn chain(&self, s: &WorldState, x: u8) -> Vec<u8> {
        let mut out = Vec::new();
        let mut cur = s.pos(x);
        while let Pos::In(p) = cur {
            if out.len() > 2 * self.objects.len() {
                break;
            }
            out.push(p);
            match self.lidded_of_open(p) {
                Some(w) if s.pos(w) != Pos::Absent => {
                    out.push(w);
                    cur = s.pos(w);
                }
                _ => cur = s.pos(p),
            }
        }
        out
    }

    fn unshielded(&self, s: &WorldState, x: u8, o: u8) -> bool {
        for e in self.chain(s, x) {
            if self.is_barrier(s, e) {
                return false;
            }
            if e == o {
                return true;
            }
        }
        false
    }

    pub fn eval(&self, s: &WorldState, q: IFluent) -> bool {
        match q {
            IFluent::OutsideAt(o, l) => s.pos(o) == Pos::Top(l),
            IFluent::DirectContained(a, b) => s.pos(a) == Pos::In(b),
            IFluent::Contained(a, b) => self.chain(s, a).contains(&b),
            IFluent::Effective(o) => s.pos(o) != Pos::Absent,
            IFluent::Ineffective(o) => s.pos(o) == Pos::Absent,
            IFluent::Unshielded(a, b) => self.unshielded(s, a, b),
        }
    }

    pub fn eval_fluent(&self, s: &WorldState, q: &Fluent) -> Result<bool, Error> {
        Ok(self.eval(s, self.compile_fluent(q)?))
    }

    fn top(&self, s: &WorldState, o: u8) -> Result<u8, PreconditionFailure> {
        match s.pos(o) {
            Pos::Absent => Err(PreconditionFailure::NotEffective),
            Pos::In(_) => Err(PreconditionFailure::NotTopLevel),
            Pos::Top(l) => Ok(l),
        }
    }

    fn is_triple(&self, t: [u8; 3]) -> bool {
        self.triples.contains(&t)
    }

    pub fn apply(&self, s: &WorldState, a: &IAction) -> Result<WorldState, PreconditionFailure> {
        use PreconditionFailure::*;
        let mut next = s.clone();
        match *a {
            IAction::Carry(o, l) => {
                self.top(s, o)?;
                next.pos[o as usize] = Pos::Top(l);
            }
            IAction::Load(o, c) => {
                if self.sort(c) != Sort::OpenContainer {
                    return Err(WrongSort);
                }
                if o == c {
                    return Err(SelfContainment);
                }
                let (lo, lc) = (self.top(s, o)?, self.top(s, c)?);
                if lo != lc {
                    return Err(LocationMismatch);
                }
                next.pos[o as usize] = Pos::In(c);
            }
            IAction::Unload(o, c) => {
                if self.sort(c) != Sort::OpenContainer {
                    return Err(WrongSort);
                }
                let l = self.top(s, c)?;
                if s.pos(o) != Pos::In(c) {
                    return Err(NotDirectlyContained);
                }
                next.pos[o as usize] = Pos::Top(l);
            }
            IAction::Seal(oc, ol, ow) => {
                if !self.is_triple([oc, ol, ow]) {
                    return Err(WrongSort);
                }
                let (la, lb) = (self.top(s, oc)?, self.top(s, ol)?);
                if la != lb {
                    return Err(LocationMismatch);
                }
                next.pos[oc as usize] = Pos::Absent;
                next.pos[ol as usize] = Pos::Absent;
                next.pos[ow as usize] = Pos::Top(la);
            }
            IAction::Unseal(ow, ol, oc) => {
                if !self.is_triple([oc, ol, ow]) {
                    return Err(WrongSort);
                }
                let l = self.top(s, ow)?;
                next.pos[ow as usize] = Pos::Absent;
                next.pos[oc as usize] = Pos::Top(l);
                next.pos[ol as usize] = Pos::Top(l);
            }
            IAction::Dump(o) => {
                if !self.sort(o).is_container() {
                    return Err(WrongSort);
                }
                let l = self.top(s, o)?;
                for x in 0..self.objects.len() as u8 {
                    let chain = self.chain(s, x);
                    let Some(k) = chain.iter().position(|&e| e == o) else {
                        continue;
                    };
                    // The first barrier at or below `o` keeps `x`; otherwise it falls out.
                    next.pos[x as usize] = match chain[..=k].iter().find(|&&e| self.is_barrier(s, e)) {
                        None => Pos::Top(l),
                        Some(&b) => Pos::In(b),
                    };
                }
            }
        }
        Ok(next)
    }

    pub fn apply_action(&self, s: &WorldState, a: &Action) -> Result<Result<WorldState, PreconditionFailure>, Error> {
        Ok(self.apply(s, &self.compile_action(a)?))
    }

    /// All statically plausible ground actions, in canonical order: by kind, then
    /// by argument indices.
    pub fn actions(&self) -> Vec<IAction> {
        let n = self.objects.len() as u8;
        let objs = || 0..n;
        let opens: Vec<u8> = objs().filter(|&c| self.sort(c) == Sort::OpenContainer).collect();
        let mut out = Vec::new();
        for o in objs() {
            for l in 0..self.locations.len() as u8 {
                out.push(IAction::Carry(o, l));
            }
        }
        for o in objs() {
            for &c in &opens {
                if o != c {
                    out.push(IAction::Load(o, c));
                }
            }
        }
        for o in objs() {
            for &c in &opens {
                if o != c {
                    out.push(IAction::Unload(o, c));
                }
            }
        }
        for t in &self.triples {
            out.push(IAction::Seal(t[0], t[1], t[2]));
        }
        let mut unseals: Vec<IAction> = self.triples.iter().map(|t| IAction::Unseal(t[2], t[1], t[0])).collect();
        unseals.sort();
        out.extend(unseals);
        for o in objs() {
            if self.sort(o).is_container() {
                out.push(IAction::Dump(o));
            }
        }
        out
    }

    /// Checks the state invariants: triple coherence, positioned iff effective,
    /// hosts are containers, and containment is acyclic.
    pub fn is_valid(&self, s: &WorldState) -> bool {
        if s.pos.len() != self.objects.len() {
            return false;
        }
        for o in 0..self.objects.len() as u8 {
            let present = s.pos(o) != Pos::Absent;
            let must_be_present = match self.triple_of[o as usize] {
                None => true,
                Some(i) => {
                    let w = self.triples[i][2];
                    let assembled = s.pos(w) != Pos::Absent;
                    if o == w {
                        assembled
                    } else {
                        !assembled
                    }
                }
            };
            if present != must_be_present {
                return false;
            }
            match s.pos(o) {
                Pos::Top(l) if l as usize >= self.locations.len() => return false,
                Pos::In(p) if p as usize >= self.objects.len() || p == o || !self.can_host(p) => return false,
                _ => {}
            }
        }
        (0..self.objects.len() as u8).all(|x| self.is_acyclic_from(s, x))
    }

    fn can_host(&self, p: u8) -> bool {
        matches!(self.sort(p), Sort::OpenContainer | Sort::ClosedContainer)
    }

    fn is_acyclic_from(&self, s: &WorldState, x: u8) -> bool {
        let mut seen = 0u64;
        let mut cur = s.pos(x);
        let mut at = x;
        loop {
            if seen & (1 << at) != 0 {
                return false;
            }
            seen |= 1 << at;
            let Pos::In(p) = cur else { return true };
            at = match self.lidded_of_open(p) {
                Some(w) if s.pos(w) != Pos::Absent => {
                    if seen & (1 << p) != 0 {
                        return false;
                    }
                    seen |= 1 << p;
                    w
                }
                _ => p,
            };
            cur = s.pos(at);
        }
    }

    /// Every valid state in canonical order (triple status, then positions),
    /// restricted to those satisfying every fluent in `facts`.
    pub fn valid_states_matching(&self, facts: &[IFluent]) -> Vec<WorldState> {
        let n = self.objects.len();
        let mut out = Vec::new();
        for status in 0..(1u64 << self.triples.len()) {
            let assembled = |i: usize| status & (1 << i) != 0;
            let mut candidates: Vec<Vec<Pos>> = Vec::with_capacity(n);
            for o in 0..n as u8 {
                let present = match self.triple_of[o as usize] {
                    None => true,
                    Some(i) => (self.triples[i][2] == o) == assembled(i),
                };
                let mut c = Vec::new();
                if present {
                    c.extend((0..self.locations.len() as u8).map(Pos::Top));
                    c.extend((0..n as u8).filter(|&p| p != o && self.can_host(p)).map(Pos::In));
                } else {
                    c.push(Pos::Absent);
                }
                c.retain(|p| facts.iter().all(|f| admits(*f, o, *p)));
                candidates.push(c);
            }
            if candidates.iter().any(Vec::is_empty) {
                continue;
            }
            let mut idx = vec![0usize; n];
            'odometer: loop {
                let state = WorldState { pos: (0..n).map(|o| candidates[o][idx[o]]).collect() };
                if self.is_valid(&state) && facts.iter().all(|f| self.eval(&state, *f)) {
                    out.push(state);
                }
                let mut k = n;
                loop {
                    if k == 0 {
                        break 'odometer;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < candidates[k].len() {
                        break;
                    }
                    idx[k] = 0;
                }
            }
        }
        out
    }

    pub fn valid_states(&self) -> Vec<WorldState> {
        self.valid_states_matching(&[])
    }

    /// Builds a state from `outsideAt` and `directContained` facts. Objects not
    /// mentioned are absent.
    pub fn state_from_facts(&self, facts: &[Fluent]) -> Result<WorldState, String> {
        let mut pos = vec![Pos::Absent; self.objects.len()];
        for f in facts {
            match self.compile_fluent(f).map_err(|e| e.to_string())? {
                IFluent::OutsideAt(o, l) => pos[o as usize] = Pos::Top(l),
                IFluent::DirectContained(a, b) => pos[a as usize] = Pos::In(b),
                IFluent::Effective(_) | IFluent::Ineffective(_) => {}
                other => return Err(format!("cannot build a state from {other:?}")),
            }
        }
        let state = WorldState { pos };
        for f in facts {
            if !self.eval_fluent(&state, f).map_err(|e| e.to_string())? {
                return Err(format!("{f} does not hold in the described state"));
            }
        }
        if self.is_valid(&state) {
            Ok(state)
        } else {
            Err("described state violates the state invariants".into())
        }
    }

    /// The primitive facts describing `s` completely, in object order.
    pub fn state_facts(&self, s: &WorldState) -> Vec<Fluent> {
        let mut out = Vec::new();
        for o in 0..self.objects.len() as u8 {
            let name = self.object_name(o).clone();
            match s.pos(o) {
                Pos::Absent => out.push(Fluent::Ineffective(name)),
                Pos::Top(l) => {
                    out.push(Fluent::Effective(name.clone()));
                    out.push(Fluent::OutsideAt(name, self.location_name(l).clone()));
                }
                Pos::In(p) => {
                    out.push(Fluent::Effective(name.clone()));
                    out.push(Fluent::DirectContained(name, self.object_name(p).clone()));
                }
            }
        }
        out
    }

    /// One primitive fact per line; a stable rendering for golden files.
    pub fn render_state(&self, s: &WorldState) -> String {
        StateDisplay { universe: self, state: s }.to_string()
    }
}

struct StateDisplay<'a> {
    universe: &'a Universe,
    state: &'a WorldState,
}

impl fmt::Display for StateDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fact in self.universe.state_facts(self.state) {
            writeln!(f, "{fact}.")?;
        }
        Ok(())
    }
}

/// Cheap pre-filter: can object `o` at `p` be part of a state satisfying `f`?
fn admits(f: IFluent, o: u8, p: Pos) -> bool {
    match f {
        IFluent::OutsideAt(x, l) if x == o => p == Pos::Top(l),
        IFluent::DirectContained(x, c) if x == o => p == Pos::In(c),
        IFluent::Contained(x, _) | IFluent::Unshielded(x, _) if x == o => matches!(p, Pos::In(_)),
        IFluent::Effective(x) if x == o => p != Pos::Absent,
        IFluent::Ineffective(x) if x == o => p == Pos::Absent,
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specdsl::{parse_fluent, parse_spec};

    fn universe(text: &str) -> Universe {
        Universe::new(&parse_spec(text).unwrap().signature)
    }

    fn facts(list: &[&str]) -> Vec<Fluent> {
        list.iter().map(|f| parse_fluent(f).unwrap()).collect()
    }

    fn act(u: &Universe, s: &WorldState, a: &str) -> Result<WorldState, PreconditionFailure> {
        let p = crate::specdsl::parse_pattern(a).unwrap();
        let args = p
            .slots
            .iter()
            .map(|s| match s {
                Slot::Is(i) => i.clone(),
                Slot::Any => unreachable!(),
            })
            .collect();
        u.apply_action(s, &Action::from_parts(p.kind, args).unwrap()).unwrap()
    }

    fn holds(u: &Universe, s: &WorldState, f: &str) -> bool {
        u.eval_fluent(s, &parse_fluent(f).unwrap()).unwrap()
    }

    const BAG: &str = "block(oa). openContainer(oc). lid(ol). containerWithLid(ow). components(oc,ol,ow). location(la). location(lb).";

    #[test]
    fn load_then_seal() {
        let u = universe(BAG);
        let s = u.state_from_facts(&facts(&["outsideAt(oa,la)", "outsideAt(oc,la)", "outsideAt(ol,la)"])).unwrap();
        let s = act(&u, &s, "load(oa,oc)").unwrap();
        let s = act(&u, &s, "seal(oc,ol,ow)").unwrap();
        assert!(holds(&u, &s, "effective(ow)"));
        assert!(holds(&u, &s, "outsideAt(ow,la)"));
        assert!(holds(&u, &s, "ineffective(oc)"));
        assert!(holds(&u, &s, "ineffective(ol)"));
        assert!(holds(&u, &s, "directContained(oa,oc)"));
        assert!(holds(&u, &s, "contained(oa,ow)"));
        assert!(holds(&u, &s, "contained(oa,oc)"));
        assert!(!holds(&u, &s, "unshielded(oa,ow)"));
    }

    #[test]
    fn carry_of_contained_object_fails() {
        let u = universe(BAG);
        let s =
            u.state_from_facts(&facts(&["directContained(oa,oc)", "outsideAt(oc,la)", "outsideAt(ol,la)"])).unwrap();
        assert_eq!(act(&u, &s, "carry(oa,lb)"), Err(PreconditionFailure::NotTopLevel));
        assert!(!holds(&u, &s, "outsideAt(oa,la)"));
        assert!(!holds(&u, &s, "outsideAt(oa,lb)"));
    }

    #[test]
    fn named_precondition_failures() {
        let u = universe("block(oa). block(ob). openContainer(oc). openContainer(od). closedContainer(cc). location(la). location(lb).");
        let s = u
            .state_from_facts(&facts(&[
                "outsideAt(oa,la)",
                "outsideAt(ob,lb)",
                "outsideAt(oc,la)",
                "directContained(od,oc)",
                "outsideAt(cc,la)",
            ]))
            .unwrap();
        assert_eq!(act(&u, &s, "load(ob,oc)"), Err(PreconditionFailure::LocationMismatch));
        assert_eq!(act(&u, &s, "load(oc,oc)"), Err(PreconditionFailure::SelfContainment));
        assert_eq!(act(&u, &s, "load(oa,cc)"), Err(PreconditionFailure::WrongSort));
        assert_eq!(act(&u, &s, "unload(oa,oc)"), Err(PreconditionFailure::NotDirectlyContained));
        assert_eq!(act(&u, &s, "dump(oa)"), Err(PreconditionFailure::WrongSort));
        assert_eq!(act(&u, &s, "load(oa,od)"), Err(PreconditionFailure::NotTopLevel));
        assert!(act(&u, &s, "unload(od,oc)").is_ok());
        let u = universe(BAG);
        let s = u.state_from_facts(&facts(&["outsideAt(oa,la)", "outsideAt(oc,la)", "outsideAt(ol,la)"])).unwrap();
        assert_eq!(act(&u, &s, "unseal(ow,ol,oc)"), Err(PreconditionFailure::NotEffective));
    }

    #[test]
    fn unshielded_along_open_chain() {
        let u = universe("block(oa). openContainer(oc1). openContainer(oc2). location(la).");
        let s = u
            .state_from_facts(&facts(&["directContained(oa,oc2)", "directContained(oc2,oc1)", "outsideAt(oc1,la)"]))
            .unwrap();
        assert!(holds(&u, &s, "unshielded(oa,oc1)"));
        assert!(holds(&u, &s, "contained(oa,oc1)"));
        assert!(!holds(&u, &s, "contained(oc1,oa)"));
    }

    #[test]
    fn cycles_are_not_states() {
        let u = universe("openContainer(oa). openContainer(oc). location(la).");
        assert!(u.state_from_facts(&facts(&["directContained(oa,oc)", "directContained(oc,oa)"])).is_err());
        let states = u.valid_states();
        assert!(states.iter().all(|s| u.is_valid(s)));
        // Each container is at la or inside the other, but not both inside each other.
        assert_eq!(states.len(), 3);
    }

    #[test]
    fn sealed_cycle_through_lidded_container_is_rejected() {
        let u = universe(BAG);
        let s = u.state_from_facts(&facts(&["directContained(ow,oc)", "ineffective(oc)"]));
        assert!(s.is_err());
    }

    #[test]
    fn actions_are_in_canonical_order() {
        let u = universe(BAG);
        let acts = u.actions();
        let mut sorted = acts.clone();
        sorted.sort();
        assert_eq!(acts, sorted);
        assert!(acts.contains(&IAction::Seal(1, 2, 3)));
        assert!(acts.contains(&IAction::Unseal(3, 2, 1)));
    }

    #[test]
    fn fresh_entities_get_unused_names() {
        let sig = parse_spec("block(xb1). openContainer(oc). location(xloc1).").unwrap().signature;
        let u = Universe::with_fresh(&sig, &[Sort::Block, Sort::ContainerWithLid], 1);
        let names: Vec<&str> = (0..u.object_count() as u8).map(|o| u.object_name(o).as_str()).collect();
        assert_eq!(names, ["oc", "xb1", "xb2", "xoc1", "xl1", "xow1"]);
        assert_eq!(u.location_name(1).as_str(), "xloc2");
        assert_eq!(u.fresh().len(), 5);
        assert_eq!(u.signature().components.len(), 1);
    }
}
