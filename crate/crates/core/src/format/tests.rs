use super::*;
use crate::model::DomainBound;
use crate::parser::{parse_closed_state, parse_context, parse_spec, parse_term};

const RUNNING: &str = include_str!("../../../../corpus/running.ptss");
const UNTESTED: &str = include_str!("../../../../corpus/wild_untested.ptss");
const PATIENCE: &str = include_str!("../../../../corpus/wild_patience.ptss");
const NESTED: &str = include_str!("../../../../corpus/wild_nested.ptss");
const INHERITED: &str = include_str!("../../../../corpus/wild_inherited.ptss");
const NEGATIVE: &str = include_str!("../../../../corpus/wild_negative.ptss");
const TAU_TEST: &str = include_str!("../../../../corpus/wild_tau_test.ptss");
const MIXED: &str = include_str!("../../../../corpus/mixed_congruence.ptss");

fn spec(src: &str) -> Ptss {
    parse_spec(src).unwrap()
}

fn pos(op: &str, i: usize) -> Position {
    Position::new(op, i)
}

fn edge(f: &str, i: usize, g: &str, j: usize) -> (Position, Position) {
    (pos(f, i), pos(g, j))
}

#[test]
fn running_example_graph_is_empty() {
    let p = spec(RUNNING);
    let g = build_nesting_graph(&p);
    assert!(g.edges.is_empty());
    assert!(g.vertices.contains(&pos("+", 1)) && g.vertices.contains(&pos("pre<a>", 1)));
    assert_eq!(g.vertices.len(), 2 + 3);
    assert_eq!(classify_wild(&p, &g).wild().count(), 0);
}

#[test]
fn running_example_passes() {
    let r = check_format(&spec(RUNNING));
    assert!(r.overall, "{}", r.to_text());
    assert!(r.verdicts.iter().all(|v| v.verdict == Verdict::RbbSafe));
    assert!(r.patience.values().all(Option::is_none));
}

#[test]
fn premise_target_makes_argument_wild() {
    let p = spec(UNTESTED);
    let g = build_nesting_graph(&p);
    assert!(g.edges.contains(&edge("f", 1, "g", 1)));
    assert_eq!(g.edges.len(), 1);
    let w = classify_wild(&p, &g);
    assert_eq!(w.wild().cloned().collect::<Vec<_>>(), vec![pos("g", 2)]);
    assert!(w.is_wild("^g", 2));
}

#[test]
fn untested_wild_argument_violates_2b() {
    let r = check_format(&spec(UNTESTED));
    assert!(!r.overall);
    assert!(r.has_violation("g", Condition::UntestableWild));
    assert_eq!(r.violations().count(), 1);
}

#[test]
fn patience_rule_repairs_it() {
    let p = spec(PATIENCE);
    let r = check_format(&p);
    assert!(r.overall, "{}", r.to_text());
    assert_eq!(r.patience[&pos("g", 2)].as_deref(), Some("g_patience"));
    assert_eq!(r.patience[&pos("g", 1)], None);
    let v = r.verdicts.iter().find(|v| v.rule == "g_patience").unwrap();
    assert_eq!(v.verdict, Verdict::PatienceRule { position: pos("g", 2) });
}

#[test]
fn patience_rule_up_to_renaming() {
    let renamed = PATIENCE.replace(
        "g_patience: x2 --tau-> mu |- g(x1, x2) --tau-> ^g(delta(x1), mu)",
        "g_patience: q --tau-> nu |- g(p, q) --tau-> ^g(delta(p), nu)",
    );
    assert_ne!(renamed, PATIENCE);
    let r = detect_patience_rules(&spec(&renamed));
    assert_eq!(r[&pos("g", 2)].as_deref(), Some("g_patience"));
    let wrong = PATIENCE.replace("^g(delta(x1), mu)", "^g(mu, delta(x1))");
    assert_eq!(detect_patience_rules(&spec(&wrong))[&pos("g", 2)], None);
}

#[test]
fn no_patience_rules_in_running_example() {
    let r = detect_patience_rules(&spec(RUNNING));
    assert_eq!(r.len(), 2);
    assert!(r.values().all(Option::is_none));
}

#[test]
fn nested_targets_seed_both_operators() {
    let p = spec(NESTED);
    let w = classify_wild(&p, &build_nesting_graph(&p));
    assert_eq!(w.wild().cloned().collect::<Vec<_>>(), vec![pos("g", 2), pos("h", 1)]);
    let r = check_format(&p);
    assert!(r.has_violation("g", Condition::UntestableWild));
    assert!(r.has_violation("h", Condition::UntestableWild));
}

#[test]
fn wildness_is_inherited() {
    let p = spec(INHERITED);
    let g = build_nesting_graph(&p);
    assert!(g.edges.contains(&edge("g", 2, "h", 1)));
    assert!(g.edges.contains(&edge("g", 1, "h", 2)));
    let w = classify_wild(&p, &g);
    assert!(w.is_wild("h", 1));
    assert!(!w.is_wild("h", 2));
    let r = check_format(&p);
    assert!(!r.overall);
    assert!(r.has_violation("h", Condition::UntestableWild));
}

#[test]
fn wild_argument_tests_violate_2a() {
    let r = check_format(&spec(NEGATIVE));
    assert!(r.has_violation("g_neg", Condition::TauTest));
    assert!(!r.overall);
    let r = check_format(&spec(TAU_TEST));
    assert!(r.has_violation("g_tau", Condition::TauTest));
    assert!(!r.overall);
}

#[test]
fn w_nested_examples() {
    let p = spec(PATIENCE);
    let w = classify_wild(&p, &build_nesting_graph(&p));
    let mu = Var::Dist("mu".into());
    let t = |s: &str| parse_term(s, &p.signature).unwrap();
    assert_eq!(is_w_nested_occurrence(&Term::dvar("mu"), &mu, &w), Ok(true));
    assert_eq!(is_w_nested_occurrence(&t("^g(delta(x), mu)"), &mu, &w), Ok(true));
    assert_eq!(is_w_nested_occurrence(&t("^g(mu, delta(x))"), &mu, &w), Ok(false));
    assert_eq!(
        is_w_nested_occurrence(&t("oplus{1/2: mu, 1/2: ^g(delta(x), mu)}"), &mu, &w),
        Ok(true)
    );
    assert_eq!(
        is_w_nested_occurrence(&t("delta(x)"), &mu, &w),
        Err(FormatError::Absent("mu".into()))
    );
}

#[test]
fn shape_violations_are_reported() {
    let src = RUNNING.replace(
        "prefix: $a.mu --$a-> mu",
        "prefix: $a.mu --$a-> mu\ndup: +(x, x) --a-> delta(x)\nfixed: +(0, y) --b-> delta(y)",
    );
    let r = check_format(&spec(&src));
    assert!(r.has_violation("dup", Condition::Shape));
    assert!(r.has_violation("fixed", Condition::Shape));
    assert!(!r.overall);
}

#[test]
fn look_ahead_violates_2d() {
    let src = RUNNING.replace(
        "prefix: $a.mu --$a-> mu",
        "prefix: $a.mu --$a-> mu\nop k : d -> s\nlook: x --a-> mu, pre<b>(mu) --b-> nu |- +(x, x2) --c-> nu",
    );
    let src = src.replace("actions a, b, tau", "actions a, b, c, tau");
    // Operators are declared before rules are read, wherever they appear.
    let r = check_format(&spec(&src));
    assert!(r.has_violation("look", Condition::LookAhead), "{}", r.to_text());
}

#[test]
fn verdicts_stable_under_reordering() {
    let p = spec(INHERITED);
    let mut q = p.clone();
    q.rules.reverse();
    let (a, b) = (check_format(&p), check_format(&q));
    assert_eq!(a.wildness, b.wildness);
    assert_eq!(a.overall, b.overall);
    let mut va = a.verdicts.clone();
    let mut vb = b.verdicts.clone();
    va.sort_by(|x, y| x.rule.cmp(&y.rule));
    vb.sort_by(|x, y| x.rule.cmp(&y.rule));
    assert_eq!(va, vb);
}

#[test]
fn wildness_monotone_in_rules() {
    for src in [UNTESTED, NESTED, INHERITED, MIXED] {
        let p = spec(src);
        let full = classify_wild(&p, &build_nesting_graph(&p));
        for drop in 0..p.rules.len() {
            let mut q = p.clone();
            q.rules.remove(drop);
            let part = classify_wild(&q, &build_nesting_graph(&q));
            assert!(part.wild().all(|w| full.0[w] == Wildness::Wild));
        }
    }
}

fn probe(src: &str, ctx: &str, u: &str, v: &str, kind: ProbeKind) -> Vec<ProbeViolation> {
    let p = spec(src);
    let t = |s: &str| parse_closed_state(s, &p.signature).unwrap();
    let c = parse_context(ctx, &p.signature).unwrap();
    congruence_probe(&p, &[(t(u), t(v))], &[c], &DomainBound::new(vec![]), kind).unwrap()
}

const S: &str = "a.delta(b.delta(0))";
const T: &str = "a.delta(tau.delta(b.delta(0)))";

#[test]
fn probe_finds_missing_patience_rule() {
    let found = probe(UNTESTED, "f([])", S, T, ProbeKind::Rooted);
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].context, "f([])");
    assert!(probe(PATIENCE, "f([])", S, T, ProbeKind::Rooted).is_empty());
    assert!(probe(PATIENCE, "f([])", S, T, ProbeKind::Branching).is_empty());
}

#[test]
fn probe_with_no_contexts() {
    let p = spec(PATIENCE);
    let t = |s: &str| parse_closed_state(s, &p.signature).unwrap();
    let none = congruence_probe(&p, &[(t(S), t(T))], &[], &DomainBound::new(vec![]), ProbeKind::Rooted).unwrap();
    assert!(none.is_empty());
}

#[test]
fn combined_steps_not_preserved() {
    let u1 = "+(a.delta(b.delta(0)), a.delta(c.delta(0)))";
    let u2 = "+(+(a.delta(b.delta(0)), a.delta(c.delta(0))), a.oplus{1/2: delta(b.delta(0)), 1/2: delta(c.delta(0))})";
    assert!(check_format(&spec(MIXED)).overall);
    assert!(probe(MIXED, "[]", u1, u2, ProbeKind::ProbBranching).is_empty());
    assert_eq!(probe(MIXED, "[]", u1, u2, ProbeKind::Branching).len(), 1);
    assert_eq!(probe(MIXED, "f([])", u1, u2, ProbeKind::ProbBranching).len(), 1);
    let bb = "g(b.delta(0), b.delta(0))";
    assert!(probe(MIXED, "[]", bb, "g(c.delta(0), c.delta(0))", ProbeKind::ProbBranching).is_empty());
    assert!(probe(MIXED, "[]", bb, "0", ProbeKind::ProbBranching).is_empty());
    assert_eq!(probe(MIXED, "[]", "g(b.delta(0), c.delta(0))", "0", ProbeKind::ProbBranching).len(), 1);
}
