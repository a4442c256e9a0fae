//! Acceptance criteria 1 to 9. Each criterion prints one line:
//! `criterion N PASS|FAIL <seconds> <detail>`. The process exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use proptest::test_runner::{Config, TestCaseError, TestRunner};

use openworld::corpus;
use openworld::domain::{Components, Fluent, Ident, Literal, Signature, Sort};
use openworld::engine::{check_proof, ground_fluents, infer, PersistenceCase, Reasoner, Rule, Verdict};
use openworld::fuzz::{soundness_sweep, FuzzConfig, SpecGenerator};
use openworld::oracle::{
    entailed_by_all, enumerate_completions, CompletionBounds, Entailment, IFluent, Universe, WorldState,
};
use openworld::specdsl::{parse_fluent, parse_literal, parse_spec, ValidSpec};
use openworld::worldmodel::{effect_rules_for, threats_for};

const FUZZ_SEED: u64 = 20_240_501;
const MONOTONICITY_SEED: u64 = 77;

type Outcome = Result<String, String>;

fn valid(text: &str) -> ValidSpec {
    ValidSpec::new(parse_spec(text).expect("corpus parses")).expect("corpus validates")
}

fn fluent(s: &str) -> Fluent {
    parse_fluent(s).unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn criterion_1() -> Outcome {
    let spec = valid(corpus::B1);
    let Verdict::Proved(p) = infer(&spec, &"t3".into(), &fluent("contained(oa,ow)")).map_err(|e| e.to_string())? else {
        return Err("contained(oa,ow) at t3 not proved".into());
    };
    ensure(check_proof(&spec, &p), "proof rejected by the checker")?;
    let Rule::Persistence { from, case: PersistenceCase::NonOccurrence { covering } } = &p.rule else {
        return Err(format!("root is not persistence by non-occurrence:\n{p}"));
    };
    ensure(from.as_str() == "t2" && p.time.as_str() == "t3", "persistence is not t2 -> t3")?;
    ensure(covering.len() == 1 && covering[0].to_string() == "notOccurs(t0,t3,unseal(ow,_,_))", "wrong covering")?;
    let seal = &p.children[0];
    let Rule::Effect { occurrence, conditions } = &seal.rule else { return Err("second step is not an effect".into()) };
    ensure(occurrence.to_string() == "occurs(t1,t2,seal(oc,ol,ow))", "second step is not the seal")?;
    ensure(conditions == &vec![fluent("contained(oa,oc)")], "seal condition is not contained(oa,oc)")?;
    let load = &seal.children[0];
    ensure(load.time.as_str() == "t1" && load.goal == fluent("contained(oa,oc)"), "seal condition not at t1")?;
    let Rule::Effect { occurrence, .. } = &load.rule else { return Err("third step is not an effect".into()) };
    ensure(occurrence.to_string() == "occurs(t0,t1,load(oa,oc))", "third step is not the load from t0")?;
    Ok(format!("trace of {} steps", p.size()))
}

fn criterion_2() -> Outcome {
    let spec = valid(corpus::B1);
    let q = fluent("outsideAt(ow,la)");
    let v = infer(&spec, &"t3".into(), &q).map_err(|e| e.to_string())?;
    ensure(v == Verdict::Unknown, "outsideAt(ow,la) at t3 was proved")?;
    let b = CompletionBounds::new(vec![], 1, 1);
    let e = entailed_by_all(&spec, &b, &"t3".into(), &Literal::Holds(q)).map_err(|e| e.to_string())?;
    let Entailment::FalsifiedBy(w) = e else { return Err(format!("oracle says {}", e.label())) };
    let fresh: Vec<&Ident> = w.universe.fresh().iter().collect();
    let carry = w
        .events
        .iter()
        .find(|ev| matches!(&ev.action, openworld::domain::Action::Carry(_, l) if fresh.contains(&l)))
        .ok_or("no carry to a fresh location in the witness")?;
    Ok(format!("witness event {} over [{}, {}]", carry.action, carry.start, carry.end))
}

fn criterion_3(text: &str, goals: &[&str]) -> Outcome {
    let spec = valid(text);
    let mut r = Reasoner::new(&spec);
    let t: Ident = "t2".into();
    for g in goals {
        ensure(r.infer(&t, &fluent(g)).map_err(|e| e.to_string())?.is_proved(), format!("{g} not proved"))?;
    }
    let mut checked = 0;
    for sort in Sort::ALL {
        let b = CompletionBounds::new(vec![sort], 1, 1);
        for g in goals {
            let e = entailed_by_all(&spec, &b, &t, &Literal::Holds(fluent(g))).map_err(|e| e.to_string())?;
            ensure(matches!(e, Entailment::EntailedInBounds), format!("{g} {} at {b}", e.label()))?;
            checked += 1;
        }
    }
    Ok(format!("{} goals proved, {checked} oracle checks entailed", goals.len()))
}

fn criterion_4() -> Outcome {
    let b = CompletionBounds::new(vec![Sort::OpenContainer, Sort::ClosedContainer, Sort::ContainerWithLid], 1, 1);
    let r = soundness_sweep(FuzzConfig::default(), FUZZ_SEED, 200, &b);
    if let Some(c) = r.counterexamples.first() {
        return Err(format!(
            "{} counterexamples; first: {} at {} ({})\n{}",
            r.counterexamples.len(),
            c.goal,
            c.time,
            c.reason,
            c.spec
        ));
    }
    ensure(r.specs == 200, "wrong number of specs")?;
    Ok(format!("{} specs, {} goals, {} proved, 0 falsified at {b}", r.specs, r.goals, r.proved))
}

/// Every signature with at most four objects: any mix of blocks, open and closed
/// containers, optionally with one components triple.
fn small_signatures() -> Vec<Signature> {
    let plain = [Sort::Block, Sort::OpenContainer, Sort::ClosedContainer];
    let mut out = Vec::new();
    for with_triple in [false, true] {
        let base = if with_triple { 3 } else { 0 };
        for extra in 0..=(4 - base) {
            let mut counts = vec![[0usize; 3]];
            for _ in 0..extra {
                counts = counts
                    .into_iter()
                    .flat_map(|c| {
                        (0..3).map(move |i| {
                            let mut d = c;
                            d[i] += 1;
                            d
                        })
                    })
                    .collect();
            }
            counts.sort();
            counts.dedup();
            for c in counts {
                if base + c.iter().sum::<usize>() == 0 {
                    continue;
                }
                let mut sig = Signature::default();
                if with_triple {
                    for (id, s) in [("oc", Sort::OpenContainer), ("ol", Sort::Lid), ("ow", Sort::ContainerWithLid)] {
                        sig.objects.insert(id.into(), s);
                    }
                    sig.components.insert(Components { open: "oc".into(), lid: "ol".into(), lidded: "ow".into() });
                }
                for (i, sort) in plain.iter().enumerate() {
                    for k in 0..c[i] {
                        sig.objects.insert(Ident::new(format!("{}{k}", sort.keyword())), *sort);
                    }
                }
                sig.locations.insert("la".into());
                sig.locations.insert("lb".into());
                out.push(sig);
            }
        }
    }
    out
}

fn all_fluents(sig: &Signature) -> Vec<Fluent> {
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
            }
        }
    }
    out
}

fn criterion_5() -> Outcome {
    let (mut sigs, mut steps, mut threat_checks, mut effect_checks) = (0, 0usize, 0usize, 0usize);
    for sig in small_signatures() {
        sigs += 1;
        let u = Universe::new(&sig);
        let fluents = all_fluents(&sig);
        let compiled: Vec<IFluent> = fluents.iter().map(|f| u.compile_fluent(f).unwrap()).collect();
        let threats: Vec<_> = fluents.iter().map(|f| threats_for(&sig, f).unwrap()).collect();
        let actions = u.actions();
        let effects: Vec<_> = actions.iter().map(|a| effect_rules_for(&sig, &u.action(a))).collect();
        for s in u.valid_states() {
            for (ai, a) in actions.iter().enumerate() {
                let Ok(next) = u.apply(&s, a) else { continue };
                steps += 1;
                let action = u.action(a);
                for (fi, &q) in compiled.iter().enumerate() {
                    if u.eval(&s, q) && !u.eval(&next, q) {
                        threat_checks += 1;
                        let covered = threats[fi].iter().any(|p| openworld::domain::matches_pattern(&action, p));
                        ensure(covered, format!("{action} falsifies {} without a threat ({sig:?})", fluents[fi]))?;
                    }
                }
                for e in &effects[ai] {
                    let pre = e.conditions.iter().all(|c| u.eval_fluent(&s, c).unwrap());
                    if pre {
                        effect_checks += 1;
                        ensure(u.eval_fluent(&next, &e.goal).unwrap(), format!("{action}: effect {} fails", e.goal))?;
                    }
                }
            }
        }
    }
    Ok(format!(
        "{sigs} signatures, {steps} transitions, {threat_checks} falsifications covered, {effect_checks} effects hold"
    ))
}

fn closed_contents(u: &Universe, s: &WorldState) -> Vec<(u8, Vec<u8>)> {
    let n = u.object_count() as u8;
    (0..n)
        .filter(|&c| u.sort(c) == Sort::ClosedContainer)
        .map(|c| (c, (0..n).filter(|&x| x != c && u.eval(s, IFluent::Contained(x, c))).collect()))
        .collect()
}

fn criterion_6() -> Outcome {
    let spec = valid(
        "block(b). openContainer(o1). closedContainer(c1). closedContainer(c2).
         openContainer(oc). lid(ol). containerWithLid(ow). components(oc,ol,ow).
         location(la). location(lb). earlier(t0,t1).",
    );
    let u = Universe::new(spec.signature());
    let states = u.valid_states();
    let actions = u.actions();
    let mut runner = TestRunner::new(Config { cases: 512, failure_persistence: None, ..Config::default() });
    let strategy = (0..states.len(), proptest::collection::vec(proptest::num::usize::ANY, 0..=8));
    let result = runner.run(&strategy, |(start, picks)| {
        let mut s = states[start].clone();
        let expected = closed_contents(&u, &s);
        for p in picks {
            let applicable: Vec<WorldState> = actions.iter().filter_map(|a| u.apply(&s, a).ok()).collect();
            if applicable.is_empty() {
                break;
            }
            s = applicable[p % applicable.len()].clone();
            if closed_contents(&u, &s) != expected {
                return Err(TestCaseError::fail(format!("contents changed in {s:?}")));
            }
        }
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    Ok(format!("512 random runs of up to 8 actions over {} start states", states.len()))
}

fn criterion_7() -> Outcome {
    let spec = valid(corpus::INCOMPLETENESS);
    let q = parse_literal("not(contained(o,oc))").unwrap();
    let v = Reasoner::new(&spec).infer_literal(&"t2".into(), &q).map_err(|e| e.to_string())?;
    ensure(v == Verdict::Unknown, "engine proved the precondition consequence")?;
    let pos = Reasoner::new(&spec).infer(&"t2".into(), &fluent("contained(o,oc)")).map_err(|e| e.to_string())?;
    ensure(pos == Verdict::Unknown, "engine proved contained(o,oc)")?;
    for b in [CompletionBounds::new(vec![], 1, 1), CompletionBounds::new(vec![Sort::OpenContainer], 1, 1)] {
        let e = entailed_by_all(&spec, &b, &"t2".into(), &q).map_err(|e| e.to_string())?;
        ensure(matches!(e, Entailment::EntailedInBounds), format!("oracle says {} at {b}", e.label()))?;
    }
    Ok("engine unknown, oracle entailed".into())
}

fn criterion_8() -> Outcome {
    let cases = [
        ("nested", corpus::DUMP_NESTED, include_str!("golden/dump_nested.state")),
        ("toothpaste", corpus::DUMP_TOOTHPASTE, include_str!("golden/dump_toothpaste.state")),
    ];
    for (name, text, golden) in cases {
        let spec = valid(text);
        let all: Vec<_> = enumerate_completions(&spec, &CompletionBounds::default()).collect();
        ensure(all.len() == 1, format!("{name}: {} closed completions", all.len()))?;
        let c = &all[0];
        let got = c.universe.render_state(c.state_at(&"t1".into()).unwrap());
        ensure(got == golden, format!("{name} post-state differs:\n{got}"))?;
    }
    Ok("2 post-states match".into())
}

fn criterion_9() -> Outcome {
    let mut g = SpecGenerator::new(FuzzConfig::default(), MONOTONICITY_SEED);
    let mut checked = 0;
    for _ in 0..100 {
        let (small, large) = g.next_pair();
        let (s, l) = (ValidSpec::new(small.spec).unwrap(), ValidSpec::new(large.spec).unwrap());
        let (mut rs, mut rl) = (Reasoner::new(&s), Reasoner::new(&l));
        for i in 0..s.timeline().len() {
            for q in ground_fluents(&s) {
                if rs.infer_at(i, &q).is_proved() {
                    checked += 1;
                    ensure(rl.infer_at(i, &q).is_proved(), format!("{q} at {} lost\n{}", s.point(i), l.spec()))?;
                }
            }
        }
    }
    Ok(format!("100 pairs, {checked} proved goals kept"))
}

fn main() {
    let criteria: Vec<(u32, Duration, Box<dyn Fn() -> Outcome>)> = vec![
        (1, Duration::from_secs(1), Box::new(criterion_1)),
        (2, Duration::from_secs(10), Box::new(criterion_2)),
        (
            3,
            Duration::from_secs(30),
            Box::new(|| criterion_3(corpus::B2, &["contained(ob,oc)", "directContained(ob,oc)"])),
        ),
        (3, Duration::from_secs(30), Box::new(|| criterion_3(corpus::B3, &["contained(ob,oc)", "outsideAt(oc,lb)"]))),
        (4, Duration::from_secs(600), Box::new(criterion_4)),
        (5, Duration::from_secs(600), Box::new(criterion_5)),
        (6, Duration::from_secs(600), Box::new(criterion_6)),
        (7, Duration::from_secs(600), Box::new(criterion_7)),
        (8, Duration::from_secs(600), Box::new(criterion_8)),
        (9, Duration::from_secs(600), Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (n, limit, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(&run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        let (mark, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        failed += usize::from(outcome.is_err());
        println!("criterion {n} {mark} {:>8.3}s {detail}", elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
