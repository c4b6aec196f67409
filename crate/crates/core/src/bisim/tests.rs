use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::model::{reachable_pts, DomainBound};
use crate::parser::{parse_closed_state, parse_spec};
use crate::pts::parse_pts;

const WEAK: &str = include_str!("../../../../corpus/weak_combined.pts");
const MIXED: &str = include_str!("../../../../corpus/mixed_match.pts");
const INERT: &str = include_str!("../../../../corpus/inert_tau.pts");
const RUNNING: &str = include_str!("../../../../corpus/running.ptss");

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn st(name: &str) -> Term {
    Term::constant(name)
}

fn dist(pairs: &[(&str, i64, i64)]) -> Distribution {
    Distribution::from_pairs(pairs.iter().map(|(t, n, d)| (st(t), q(*n, *d))))
}

fn act(a: &str) -> Action {
    Action::new(a)
}

fn pts(src: &str) -> Pts {
    parse_pts(src).unwrap()
}

fn trans_index(p: &Pts, src: &str, a: &str, target: &Distribution) -> usize {
    p.transitions()
        .iter()
        .position(|t| t.source == st(src) && t.label == act(a) && &t.target == target)
        .unwrap()
}

// Weak combined transitions

#[test]
fn weak_empty_step() {
    let p = pts(WEAK);
    assert!(weak_combined_reachable(&p, &st("s0"), None, &dist(&[("s0", 1, 1)]), None).unwrap());
    assert!(weak_combined_reachable(&p, &st("s0"), Some(&Action::tau()), &dist(&[("s0", 1, 1)]), None).unwrap());
}

#[test]
fn weak_randomized_tau() {
    let p = pts(WEAK);
    let target = dist(&[("s0", 1, 5), ("s2", 1, 5), ("s3", 1, 5), ("s6", 2, 5)]);
    assert!(weak_combined_reachable(&p, &st("s0"), None, &target, None).unwrap());
}

#[test]
fn weak_a_deterministic() {
    let p = pts(WEAK);
    let target = dist(&[("s5", 1, 2), ("s7", 1, 2)]);
    assert!(weak_combined_reachable(&p, &st("s0"), Some(&act("a")), &target, None).unwrap());
}

#[test]
fn weak_a_combined() {
    let p = pts(WEAK);
    let target = dist(&[("s5", 1, 2), ("s7", 1, 5), ("s8", 3, 20), ("s9", 3, 20)]);
    assert!(weak_combined_reachable(&p, &st("s0"), Some(&act("a")), &target, None).unwrap());
    let off = dist(&[("s5", 1, 2), ("s7", 1, 5), ("s8", 1, 5), ("s9", 1, 10)]);
    assert!(!weak_combined_reachable(&p, &st("s0"), Some(&act("a")), &off, None).unwrap());
}

/// Every distribution over the states with weights in multiples of 1/4.
fn grid(states: &[Term]) -> Vec<Distribution> {
    fn go(states: &[Term], left: i64, acc: &mut Vec<(Term, Rational)>, out: &mut Vec<Distribution>) {
        if states.len() == 1 {
            let mut pairs = acc.clone();
            if left > 0 {
                pairs.push((states[0].clone(), Rational::new(left.into(), 4.into())));
            }
            out.push(Distribution::from_pairs(pairs));
            return;
        }
        for k in 0..=left {
            if k > 0 {
                acc.push((states[0].clone(), Rational::new(k.into(), 4.into())));
            }
            go(&states[1..], left - k, acc, out);
            if k > 0 {
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(states, 4, &mut Vec::new(), &mut out);
    out
}

#[test]
fn weak_b_never() {
    let p = pts(WEAK);
    let targets = grid(p.states());
    assert_eq!(targets.len(), 715);
    for t in targets {
        assert!(!weak_combined_reachable(&p, &st("s0"), Some(&act("b")), &t, None).unwrap());
    }
}

#[test]
fn weak_respects_allowed_set() {
    let p = pts(WEAK);
    let target = dist(&[("s5", 1, 2), ("s7", 1, 2)]);
    let skip = trans_index(&p, "s1", "tau", &dist(&[("s2", 1, 2), ("s3", 1, 2)]));
    let allowed: BTreeSet<usize> = (0..p.transitions().len()).filter(|&k| k != skip).collect();
    assert!(!weak_combined_reachable(&p, &st("s0"), Some(&act("a")), &target, Some(&allowed)).unwrap());
}

#[test]
fn weak_errors() {
    let p = pts(WEAK);
    assert_eq!(
        weak_combined_reachable(&p, &st("nope"), None, &dist(&[("s0", 1, 1)]), None),
        Err(BisimError::NotAState("nope".into()))
    );
    assert_eq!(
        weak_combined_reachable(&p, &st("s0"), None, &dist(&[("s0", 1, 2)]), None),
        Err(BisimError::SubDistribution)
    );
}

// Hand-built schedulers

fn root() -> ExecutionFragment {
    ExecutionFragment::new(st("s0"))
}

#[test]
fn scheduler_randomized_tau() {
    let p = pts(WEAK);
    let k0 = trans_index(&p, "s0", "tau", &dist(&[("s1", 1, 2), ("s6", 1, 2)]));
    let k1 = trans_index(&p, "s1", "tau", &dist(&[("s2", 1, 2), ("s3", 1, 2)]));
    let mut sch = Scheduler::new();
    sch.choose(root(), k0, q(4, 5));
    sch.choose(root().then(Action::tau(), st("s1")), k1, q(1, 1));
    let induced = sch.induced(&p, &st("s0"), None).unwrap().unwrap();
    assert_eq!(induced, dist(&[("s0", 1, 5), ("s2", 1, 5), ("s3", 1, 5), ("s6", 2, 5)]));
    assert!(!sch.is_deterministic());
    // Stopping before a visible step violates the trace condition for a.
    assert_eq!(sch.induced(&p, &st("s0"), Some(&act("a"))).unwrap(), None);
}

#[test]
fn scheduler_combined_a() {
    let p = pts(WEAK);
    let k0 = trans_index(&p, "s0", "tau", &dist(&[("s1", 1, 2), ("s6", 1, 2)]));
    let k1 = trans_index(&p, "s1", "tau", &dist(&[("s2", 1, 2), ("s3", 1, 2)]));
    let k2 = trans_index(&p, "s2", "a", &dist(&[("s5", 1, 1)]));
    let k3 = trans_index(&p, "s3", "a", &dist(&[("s5", 1, 1)]));
    let k6 = trans_index(&p, "s6", "a", &dist(&[("s7", 1, 1)]));
    let k7 = trans_index(&p, "s7", "tau", &dist(&[("s8", 1, 2), ("s9", 1, 2)]));
    let tau = Action::tau;
    let mut sch = Scheduler::new();
    sch.choose(root(), k0, q(1, 1));
    let s1 = root().then(tau(), st("s1"));
    sch.choose(s1.clone(), k1, q(1, 1));
    sch.choose(s1.then(tau(), st("s2")), k2, q(1, 1));
    sch.choose(s1.then(tau(), st("s3")), k3, q(1, 1));
    let s6 = root().then(tau(), st("s6"));
    sch.choose(s6.clone(), k6, q(1, 1));
    sch.choose(s6.then(act("a"), st("s7")), k7, q(3, 5));

    let induced = sch.induced(&p, &st("s0"), Some(&act("a"))).unwrap().unwrap();
    assert_eq!(induced, dist(&[("s5", 1, 2), ("s7", 1, 5), ("s8", 3, 20), ("s9", 3, 20)]));
    assert!(weak_combined_reachable(&p, &st("s0"), Some(&act("a")), &induced, None).unwrap());

    // Cone probabilities follow the multiplicative recursion.
    let s8 = s6.then(act("a"), st("s7")).then(tau(), st("s8"));
    assert_eq!(sch.cone(&p, &st("s0"), &root()), q(1, 1));
    assert_eq!(sch.cone(&p, &st("s1"), &root()), q(0, 1));
    assert_eq!(sch.cone(&p, &st("s0"), &s6), q(1, 2));
    assert_eq!(sch.cone(&p, &st("s0"), &s8), q(1, 2) * q(1, 1) * q(3, 5) * q(1, 2));
    assert_eq!(sch.execution_probability(&p, &st("s0"), &s6.then(act("a"), st("s7"))), q(1, 5));
    assert_eq!(sch.execution_probability(&p, &st("s0"), &s6), q(0, 1));
}

#[test]
fn scheduler_rejects_foreign_transition() {
    let p = pts(WEAK);
    let k2 = trans_index(&p, "s2", "a", &dist(&[("s5", 1, 1)]));
    let mut sch = Scheduler::new();
    sch.choose(root(), k2, q(1, 1));
    assert!(matches!(sch.induced(&p, &st("s0"), None), Err(BisimError::BadScheduler(_))));
}

fn random_pts(rng: &mut ChaCha8Rng, n: usize, labels: &[&str]) -> Pts {
    random_pts_with(rng, n, labels, false)
}

/// With `forward_tau`, τ-steps only lead to higher-numbered states.
fn random_pts_with(rng: &mut ChaCha8Rng, n: usize, labels: &[&str], forward_tau: bool) -> Pts {
    let states: Vec<Term> = (0..n).map(|i| st(&format!("p{i}"))).collect();
    let mut trans = Vec::new();
    for (i, s) in states.iter().enumerate() {
        let count = rng.gen_range(0..=2);
        for _ in 0..count {
            let label = act(labels[rng.gen_range(0..labels.len())]);
            let lo = if forward_tau && label.is_tau() { i + 1 } else { 0 };
            if lo >= n {
                continue;
            }
            let target = if rng.gen_bool(0.5) {
                Distribution::dirac(states[rng.gen_range(lo..n)].clone())
            } else {
                let (a, b) = (rng.gen_range(lo..n), rng.gen_range(lo..n));
                Distribution::from_pairs([(states[a].clone(), q(1, 2)), (states[b].clone(), q(1, 2))])
            };
            trans.push(PtsTransition { source: s.clone(), label, target });
        }
    }
    let mut actions: Vec<Action> = labels.iter().map(|l| act(l)).collect();
    if !actions.iter().any(Action::is_tau) {
        actions.push(Action::tau());
    }
    Pts::new(actions, states, trans).unwrap()
}

/// Random deterministic schedulers of bounded length.
fn random_scheduler(rng: &mut ChaCha8Rng, p: &Pts, s: &Term, depth: usize) -> Scheduler {
    let mut sch = Scheduler::new();
    let mut frontier = vec![ExecutionFragment::new(s.clone())];
    for _ in 0..depth {
        let mut next = Vec::new();
        for frag in frontier {
            let out: Vec<usize> = (0..p.transitions().len())
                .filter(|&k| &p.transitions()[k].source == frag.last())
                .collect();
            if out.is_empty() || rng.gen_bool(0.3) {
                continue;
            }
            let k = out[rng.gen_range(0..out.len())];
            sch.choose(frag.clone(), k, q(1, 1));
            let tr = &p.transitions()[k];
            for t in tr.target.support() {
                let f = frag.then(tr.label.clone(), t.clone());
                if !next.contains(&f) {
                    next.push(f);
                }
            }
        }
        frontier = next;
    }
    sch
}

#[test]
fn lp_accepts_every_scheduler_induced_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut hits = 0;
    for _ in 0..150 {
        let p = random_pts(&mut rng, 4, &["a", "tau"]);
        let s = p.states()[0].clone();
        let sch = random_scheduler(&mut rng, &p, &s, 4);
        for a in [None, Some(act("a"))] {
            if let Some(d) = sch.induced(&p, &s, a.as_ref()).unwrap() {
                hits += 1;
                assert!(weak_combined_reachable(&p, &s, a.as_ref(), &d, None).unwrap(), "{}", p.to_text());
            }
        }
    }
    assert!(hits > 100);
}

// Lifting

fn four() -> Vec<Term> {
    ["w", "x", "y", "z"].iter().map(|s| st(s)).collect()
}

#[test]
fn lift_examples() {
    let states = four();
    let d = dist(&[("w", 1, 3), ("x", 2, 3)]);
    assert!(lift_check(&StateRelation::identity(&states), &d, &d).unwrap());
    let r = StateRelation::from_pairs(&states, [(st("w"), st("y"))]).unwrap();
    assert!(lift_check(&r, &dist(&[("w", 1, 1)]), &dist(&[("y", 1, 1)])).unwrap());
    let r = StateRelation::from_pairs(&states, [(st("w"), st("z"))]).unwrap();
    assert!(!lift_check(&r, &dist(&[("w", 1, 2), ("x", 1, 2)]), &dist(&[("z", 1, 1)])).unwrap());
    assert_eq!(
        lift_check(&r, &dist(&[("w", 1, 2)]), &dist(&[("z", 1, 1)])),
        Err(BisimError::SubDistribution)
    );
}

/// Does a weight function with entries in multiples of 1/6 exist?
fn brute_lift(r: &StateRelation, d1: &[(usize, i64)], d2: &[(usize, i64)]) -> bool {
    fn go(r: &StateRelation, d1: &[(usize, i64)], d2: &[(usize, i64)], col: &mut Vec<i64>) -> bool {
        let Some(((i, mass), rest)) = d1.split_first() else {
            return col.iter().zip(d2).all(|(c, (_, m))| c == m);
        };
        split(r, *i, *mass, 0, d2, col, rest)
    }
    fn split(
        r: &StateRelation,
        i: usize,
        left: i64,
        j: usize,
        d2: &[(usize, i64)],
        col: &mut Vec<i64>,
        rest: &[(usize, i64)],
    ) -> bool {
        if j == d2.len() {
            return left == 0 && go(r, rest, d2, col);
        }
        let max = if r.get(i, d2[j].0) { left } else { 0 };
        for k in 0..=max {
            col[j] += k;
            let ok = col[j] <= d2[j].1 && split(r, i, left - k, j + 1, d2, col, rest);
            col[j] -= k;
            if ok {
                return true;
            }
        }
        false
    }
    go(r, d1, d2, &mut vec![0; d2.len()])
}

fn sixths(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, i64)> {
    let size = rng.gen_range(1..=3);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..size {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    let mut cuts: Vec<i64> = (0..size - 1).map(|_| rng.gen_range(1..6)).collect();
    cuts.sort();
    cuts.dedup();
    let mut bounds = vec![0];
    bounds.extend(cuts);
    bounds.push(6);
    bounds.windows(2).zip(&idx).map(|(w, i)| (*i, w[1] - w[0])).collect()
}

fn to_dist(states: &[Term], d: &[(usize, i64)]) -> Distribution {
    Distribution::from_pairs(d.iter().map(|(i, m)| (states[*i].clone(), q(*m, 6))))
}

fn random_relation(rng: &mut ChaCha8Rng, states: &[Term]) -> StateRelation {
    let mut r = StateRelation::empty(states);
    for i in 0..states.len() {
        for j in 0..states.len() {
            r.set(i, j, rng.gen_bool(0.4));
        }
    }
    r
}

#[test]
fn lift_matches_weight_enumeration() {
    let states = four();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut yes, mut no) = (0, 0);
    for _ in 0..200 {
        let r = random_relation(&mut rng, &states);
        let (a, b) = (sixths(&mut rng, 4), sixths(&mut rng, 4));
        let expected = brute_lift(&r, &a, &b);
        assert_eq!(lift_check(&r, &to_dist(&states, &a), &to_dist(&states, &b)).unwrap(), expected);
        if expected { yes += 1 } else { no += 1 }
    }
    assert!(yes > 10 && no > 10);
}

fn close(mut r: StateRelation, refl: bool, sym: bool, trans: bool) -> StateRelation {
    let n = r.states().len();
    loop {
        let before = r.clone();
        for i in 0..n {
            if refl {
                r.set(i, i, true);
            }
            for j in 0..n {
                if sym && r.get(i, j) {
                    r.set(j, i, true);
                }
                for k in 0..n {
                    if trans && r.get(i, j) && r.get(j, k) {
                        r.set(i, k, true);
                    }
                }
            }
        }
        if r == before {
            return r;
        }
    }
}

#[test]
fn lifting_preserves_relation_properties() {
    let states = four();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..200 {
        let (refl, sym, trans) = (case % 2 == 0, case % 3 == 0, case % 5 < 2);
        let r = close(random_relation(&mut rng, &states), refl, sym, trans);
        let ds: Vec<Distribution> = (0..3).map(|_| to_dist(&states, &sixths(&mut rng, 4))).collect();
        let l = |a: &Distribution, b: &Distribution| lift_check(&r, a, b).unwrap();
        if refl {
            assert!(ds.iter().all(|d| l(d, d)));
        }
        if sym {
            assert_eq!(l(&ds[0], &ds[1]), l(&ds[1], &ds[0]));
        }
        if trans && l(&ds[0], &ds[1]) && l(&ds[1], &ds[2]) {
            assert!(l(&ds[0], &ds[2]));
        }
    }
}

// Branching bisimulation on the figures

#[test]
fn mixed_step_separates_branching_only() {
    let p = pts(MIXED);
    let b = branching_bisim(&p);
    assert!(!b.related(&st("t0"), &st("u1")));
    assert!(!b.related(&st("t1"), &st("u1")));
    assert!(b.related(&st("t0"), &st("t1")));
    let w = b.witness(&st("t1"), &st("u1")).unwrap();
    assert_eq!((w.source.as_str(), w.label.as_str()), ("t1", "a"));
    assert_eq!(w.target, "{ t2: 1/2, t3: 1/2 }");

    let pb = prob_branching_bisim(&p);
    assert!(pb.related(&st("t0"), &st("u1")));
    assert!(pb.related(&st("t1"), &st("u1")));
    assert!(!pb.related(&st("t2"), &st("t3")));
}

#[test]
fn inert_tau_states_are_bisimilar() {
    let p = pts(INERT);
    let b = branching_bisim(&p);
    let ts = ["t1", "t2", "t3", "t4"];
    for x in ts {
        for y in ts {
            assert!(b.related(&st(x), &st(y)));
        }
    }
    assert!(b.related(&st("s0"), &st("t1")));
    assert!(!b.related(&st("z"), &st("t1")));
    for t in p.transitions().iter().filter(|t| t.label.is_tau()) {
        assert!(lift_check(&b.relation, &Distribution::dirac(t.source.clone()), &t.target).unwrap());
    }
}

#[test]
fn deadlock_state_is_self_related() {
    let p = Pts::new(vec![Action::tau()], [st("z")], []).unwrap();
    assert!(branching_bisim(&p).related(&st("z"), &st("z")));
    let o = branching_bisim_scheduler_oracle(&p, 3).unwrap();
    assert_eq!(o.relation, StateRelation::full(p.states()));
}

#[test]
fn oracle_agrees_on_figures() {
    for src in [WEAK, MIXED, INERT] {
        let p = pts(src);
        assert!(p.states().len() <= 12);
        let oracle = branching_bisim_scheduler_oracle(&p, 6).unwrap();
        assert_eq!(branching_bisim(&p).relation, oracle.relation, "{}", p.to_text());
    }
}

/// Checks the scheduler-free clause for every pair of `r`, independently of
/// the refinement loop.
fn is_bisimulation(p: &Pts, r: &StateRelation) -> bool {
    let ix = Indexed::new(p);
    let rel = |a: usize, b: usize| r.get(a, b);
    for s in 0..ix.n() {
        for t in 0..ix.n() {
            if !r.get(s, t) {
                continue;
            }
            for &k in &ix.out[s] {
                let tr = &ix.trans[k];
                if tr.label.is_tau() && tr.target.iter().all(|(v, _)| r.get(t, *v)) {
                    continue;
                }
                // Depth-first over concrete executions with inert τ-steps.
                let mut seen = BTreeSet::from([t]);
                let mut todo = vec![t];
                let mut found = false;
                while let Some(u) = todo.pop() {
                    if !r.get(s, u) {
                        continue;
                    }
                    for &k2 in &ix.out[u] {
                        let o = &ix.trans[k2];
                        if o.label == tr.label && lift(rel, &tr.target, &o.target) {
                            found = true;
                        }
                        if o.label.is_tau() && o.target.iter().all(|(v, _)| r.get(s, *v)) {
                            for (v, _) in &o.target {
                                if seen.insert(*v) {
                                    todo.push(*v);
                                }
                            }
                        }
                    }
                }
                if !found {
                    return false;
                }
            }
        }
    }
    true
}

fn check_greatest(p: &Pts) {
    let b = branching_bisim(p).relation;
    assert!(b.is_equivalence(), "{}", p.to_text());
    assert!(is_bisimulation(p, &b));
    let n = p.states().len();
    for i in 0..n {
        for j in 0..n {
            if !b.get(i, j) {
                let mut bigger = b.clone();
                bigger.set(i, j, true);
                bigger.set(j, i, true);
                assert!(!is_bisimulation(p, &bigger), "{}", p.to_text());
            }
        }
    }
}

#[test]
fn result_is_greatest_equivalence() {
    for src in [WEAK, MIXED, INERT] {
        check_greatest(&pts(src));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        check_greatest(&random_pts(&mut rng, 5, &["a", "b", "tau"]));
    }
}

#[test]
fn oracle_agrees_on_random_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..60 {
        let p = random_pts_with(&mut rng, 5, &["a", "tau"], true);
        let oracle = branching_bisim_scheduler_oracle(&p, 6).unwrap();
        assert_eq!(branching_bisim(&p).relation, oracle.relation, "{}", p.to_text());
    }
}

#[test]
fn branching_within_prob_branching() {
    for src in [WEAK, MIXED, INERT] {
        let p = pts(src);
        assert!(branching_bisim(&p).relation.is_subset(&prob_branching_bisim(&p).relation));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..60 {
        let p = random_pts(&mut rng, 5, &["a", "tau"]);
        let pb = prob_branching_bisim(&p).relation;
        assert!(branching_bisim(&p).relation.is_subset(&pb), "{}", p.to_text());
        assert!(pb.is_equivalence());
    }
}

// Rooted branching bisimulation

fn running_pts(roots: &[&str]) -> (Pts, Vec<Term>) {
    let spec = parse_spec(RUNNING).unwrap();
    let roots: Vec<Term> = roots
        .iter()
        .map(|r| parse_closed_state(r, &spec.signature).unwrap())
        .collect();
    (reachable_pts(&spec, &DomainBound::new(roots.clone())).unwrap(), roots)
}

#[test]
fn rooted_inert_tau_after_prefix() {
    let (p, r) = running_pts(&["a.delta(b.delta(0))", "a.delta(tau.delta(b.delta(0)))"]);
    assert!(rooted_branching_bisim(&p, &r[0], &r[1]).unwrap());
    assert!(branching_bisim(&p).related(&r[0], &r[1]));
}

#[test]
fn rooted_initial_tau_counts() {
    let (p, r) = running_pts(&["b.delta(0)", "tau.delta(b.delta(0))"]);
    assert!(!rooted_branching_bisim(&p, &r[0], &r[1]).unwrap());
    assert!(branching_bisim(&p).related(&r[0], &r[1]));
    let w = rooted_branching_witness(&p, &r[0], &r[1]).unwrap().unwrap();
    assert_eq!(w.label, "b");
    assert!(rooted_branching_bisim(&p, &r[0], &r[0]).unwrap());
}

#[test]
fn rooted_within_branching_on_corpus() {
    for src in [WEAK, MIXED, INERT] {
        let p = pts(src);
        let b = branching_bisim(&p);
        for s in p.states() {
            for t in p.states() {
                if rooted_branching_bisim(&p, s, t).unwrap() {
                    assert!(b.related(s, t));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bisimulations_are_symmetric(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_pts(&mut rng, 4, &["a", "b", "tau"]);
        for r in [branching_bisim(&p).relation, prob_branching_bisim(&p).relation] {
            for (s, t) in r.pairs() {
                prop_assert!(r.contains(&t, &s));
            }
        }
    }
}
