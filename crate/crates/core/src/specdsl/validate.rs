use std::collections::BTreeMap;

use crate::domain::{matches_pattern, Action, Fluent, Ident, Sort, Timeline};

use super::{Diagnostic, ProblemSpec, ValidationReport};

struct Checker<'a> {
    spec: &'a ProblemSpec,
    out: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn error(&mut self, at: &impl std::fmt::Display, msg: impl Into<String>) {
        let span = self.spec.origin(at);
        self.out.push(Diagnostic::error(span, msg));
    }
}

/// Checks every structural invariant of a problem specification. Never fails;
/// problems are reported as diagnostics.
pub fn validate_spec(spec: &ProblemSpec) -> ValidationReport {
    let mut c = Checker { spec, out: spec.notes.clone() };
    let sig = &spec.signature;

    let timeline = match spec.timeline() {
        Ok(tl) => Some(tl),
        Err(msg) => {
            let span =
                spec.earlier.iter().next().and_then(|(a, b)| spec.origins.get(&format!("earlier({a},{b})")).copied());
            c.out.push(Diagnostic::error(span, msg));
            None
        }
    };

    for id in sig.objects.keys() {
        if sig.locations.contains(id) {
            c.error(&format!("location({id})"), format!("`{id}` is declared both as an object and as a location"));
        }
    }

    let mut seen_open: BTreeMap<&Ident, usize> = BTreeMap::new();
    let mut seen_lid: BTreeMap<&Ident, usize> = BTreeMap::new();
    let mut seen_lidded: BTreeMap<&Ident, usize> = BTreeMap::new();
    for t in &sig.components {
        let key = format!("components({},{},{})", t.open, t.lid, t.lidded);
        for (id, want) in [(&t.open, Sort::OpenContainer), (&t.lid, Sort::Lid), (&t.lidded, Sort::ContainerWithLid)] {
            match sig.sort_of(id) {
                Some(s) if s == want => {}
                Some(s) => c.error(&key, format!("components: `{id}` is a {s}, expected {want}")),
                None => c.error(&key, format!("components: undeclared object `{id}`")),
            }
        }
        *seen_open.entry(&t.open).or_default() += 1;
        *seen_lid.entry(&t.lid).or_default() += 1;
        *seen_lidded.entry(&t.lidded).or_default() += 1;
    }
    for (role, seen) in [("open container", &seen_open), ("lid", &seen_lid), ("lidded container", &seen_lidded)] {
        for (id, n) in seen {
            if *n > 1 {
                c.out.push(Diagnostic::error(None, format!("`{id}` is the {role} of {n} components triples")));
            }
        }
    }
    for (id, sort) in &sig.objects {
        if *sort == Sort::ContainerWithLid && !seen_lidded.contains_key(id) {
            c.error(&format!("containerWithLid({id})"), format!("lidded container `{id}` has no components triple"));
        }
    }

    for id in &spec.fresh {
        if !sig.is_object(id) && !sig.is_location(id) {
            c.error(&format!("fresh({id})"), format!("fresh marker for undeclared `{id}`"));
        }
    }

    let Some(tl) = timeline else {
        return ValidationReport::from_diagnostics(c.out);
    };

    let on_line = |c: &mut Checker, at: &dyn std::fmt::Display, t: &Ident| -> bool {
        if tl.contains(t) {
            true
        } else {
            let key = at.to_string();
            c.error(&key, format!("unknown time point {t}"));
            false
        }
    };

    let mut by_point: BTreeMap<&Ident, Vec<&Fluent>> = BTreeMap::new();
    for h in &spec.holds {
        if !on_line(&mut c, h, &h.time) {
            continue;
        }
        if let Err(e) = sig.check_fluent(&h.fluent) {
            c.error(h, e.to_string());
            continue;
        }
        if matches!(h.fluent, Fluent::Unshielded(..)) {
            c.error(h, "unshielded is derived and cannot be asserted");
            continue;
        }
        by_point.entry(&h.time).or_default().push(&h.fluent);
    }
    for (t, fluents) in &by_point {
        for (i, a) in fluents.iter().enumerate() {
            for b in &fluents[i + 1..] {
                let clash = match (a, b) {
                    (Fluent::Effective(x), Fluent::Ineffective(y)) | (Fluent::Ineffective(x), Fluent::Effective(y)) => {
                        x == y
                    }
                    (Fluent::OutsideAt(x, l1), Fluent::OutsideAt(y, l2)) => x == y && l1 != l2,
                    _ => false,
                };
                if clash {
                    let key = format!("holds({t},{b})");
                    c.error(&key, format!("holds facts at {t} contradict: {a} and {b}"));
                }
            }
        }
    }

    let mut occurrences = Vec::new();
    for o in &spec.occurrences {
        let ok = on_line(&mut c, o, &o.start) & on_line(&mut c, o, &o.end);
        if !ok {
            continue;
        }
        let (s, e) = (index(&tl, &o.start), index(&tl, &o.end));
        if s >= e {
            c.error(o, format!("occurrence start {} does not precede its end {}", o.start, o.end));
            continue;
        }
        if let Err(err) = sig.check_action(&o.action) {
            c.error(o, err.to_string());
            continue;
        }
        if let Some(msg) = static_inapplicability(spec, &o.action) {
            c.error(o, msg);
            continue;
        }
        occurrences.push((s, e, o));
    }
    for (i, (s1, e1, o1)) in occurrences.iter().enumerate() {
        for (s2, e2, o2) in &occurrences[i + 1..] {
            if s1 < e2 && s2 < e1 {
                c.error(*o2, format!("overlapping occurrences: {o1} and {o2}"));
            }
        }
    }

    for n in &spec.non_occurrences {
        let ok = on_line(&mut c, n, &n.start) & on_line(&mut c, n, &n.end);
        if !ok {
            continue;
        }
        let (s, e) = (index(&tl, &n.start), index(&tl, &n.end));
        if s >= e {
            c.error(n, format!("notOccurs interval start {} does not precede its end {}", n.start, n.end));
            continue;
        }
        if let Err(err) = sig.check_pattern(&n.pattern) {
            c.error(n, err.to_string());
            continue;
        }
        for (os, oe, o) in &occurrences {
            if *os < e && s < *oe && matches_pattern(&o.action, &n.pattern) {
                c.error(n, format!("occurrence contradicts non-occurrence: {o} vs {n}"));
            }
        }
    }

    ValidationReport::from_diagnostics(c.out)
}

fn index(tl: &Timeline, t: &Ident) -> usize {
    tl.index_of(t).expect("checked on timeline")
}

/// The action can never happen in any state, judging by sorts alone.
fn static_inapplicability(spec: &ProblemSpec, action: &Action) -> Option<String> {
    let sig = &spec.signature;
    let sort = |id: &Ident| sig.sort_of(id).expect("checked");
    match action {
        Action::Carry(..) => None,
        Action::Load(o, c) | Action::Unload(o, c) => {
            if sort(c) != Sort::OpenContainer {
                Some(format!("{action}: `{c}` is a {}, not an openContainer", sort(c)))
            } else if o == c {
                Some(format!("{action}: an object cannot contain itself"))
            } else {
                None
            }
        }
        Action::Seal(oc, ol, ow) | Action::Unseal(ow, ol, oc) => {
            (!sig.is_triple(oc, ol, ow)).then(|| format!("{action}: no components({oc},{ol},{ow}) triple"))
        }
        Action::Dump(o) => (!sort(o).is_container()).then(|| format!("{action}: a {} cannot be dumped", sort(o))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::specdsl::parse_spec;

    fn report(extra: &str) -> ValidationReport {
        let text = format!("{}\n{extra}", corpus::B1);
        validate_spec(&parse_spec(&text).unwrap())
    }

    fn has_error(r: &ValidationReport, needle: &str) -> bool {
        r.errors().any(|d| d.message.contains(needle))
    }

    #[test]
    fn running_example_is_valid() {
        let r = report("");
        assert!(r.is_valid(), "{r}");
        assert!(r.diagnostics.is_empty());
    }

    #[test]
    fn overlapping_occurrences_rejected() {
        let r = report("occurs(t0,t2,carry(oc,la)).");
        assert!(!r.is_valid());
        assert!(has_error(&r, "overlapping occurrences"));
    }

    #[test]
    fn occurrence_contradicting_non_occurrence_rejected() {
        let r = report("occurs(t2,t3,unseal(ow,ol,oc)).");
        assert!(has_error(&r, "occurrence contradicts non-occurrence"));
    }

    #[test]
    fn error_diagnostics_point_at_source() {
        let r = report("occurs(t2,t3,unseal(ow,ol,oc)).");
        let d = r.errors().next().unwrap();
        assert!(d.span.is_some());
    }

    #[test]
    fn shared_endpoints_are_legal() {
        let r = report("occurs(t2,t3,carry(ow,la)).");
        assert!(r.is_valid(), "{r}");
    }

    #[test]
    fn contradictory_holds_rejected() {
        assert!(has_error(&report("holds(t0,effective(ow))."), "contradict"));
        assert!(has_error(&report("location(lb). holds(t0,outsideAt(oa,lb))."), "contradict"));
    }

    #[test]
    fn unshielded_cannot_be_asserted() {
        assert!(has_error(&report("holds(t1,unshielded(oa,oc))."), "derived"));
    }

    #[test]
    fn undeclared_and_off_timeline_references() {
        assert!(has_error(&report("holds(t9,effective(oa))."), "unknown time point t9"));
        assert!(has_error(&report("holds(t1,effective(zz))."), "undeclared"));
        assert!(has_error(&report("occurs(t2,t3,carry(ow,lz))."), "undeclared"));
    }

    #[test]
    fn interval_order_checked() {
        assert!(has_error(&report("occurs(t3,t2,carry(ow,la))."), "does not precede"));
        assert!(has_error(&report("notOccurs(t3,t3,dump(_))."), "does not precede"));
    }

    #[test]
    fn components_must_be_well_sorted() {
        let r = validate_spec(
            &parse_spec("block(a). lid(b). containerWithLid(c). components(a,b,c). earlier(t0,t1).").unwrap(),
        );
        assert!(has_error(&r, "expected openContainer"));
        let r = validate_spec(&parse_spec("containerWithLid(c). earlier(t0,t1).").unwrap());
        assert!(has_error(&r, "no components triple"));
    }

    #[test]
    fn statically_impossible_occurrences_rejected() {
        assert!(has_error(&report("occurs(t2,t3,dump(oa))."), "cannot be dumped"));
        assert!(has_error(&report("block(ob). occurs(t2,t3,load(ob,oa))."), "not an openContainer"));
        assert!(has_error(&report("openContainer(od). occurs(t2,t3,unseal(ow,ol,od))."), "no components"));
    }

    #[test]
    fn timeline_must_be_a_chain() {
        assert!(has_error(&report("earlier(t1,t5)."), "two successors"));
        assert!(has_error(&report("earlier(t7,t8)."), "single chain"));
    }

    #[test]
    fn namespaces_are_disjoint() {
        assert!(has_error(&report("location(oa)."), "both as an object and as a location"));
    }

    #[test]
    fn duplicate_fact_is_a_warning_only() {
        let r = report("holds(t0,outsideAt(oa,la)).");
        assert!(r.is_valid());
        assert_eq!(r.diagnostics.len(), 1);
    }
}
