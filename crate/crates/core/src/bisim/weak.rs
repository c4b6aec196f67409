use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Zero};

use super::{sparse, BisimError, Indexed, Sparse};
use crate::dist::Distribution;
use crate::lp::Lp;
use crate::pts::Pts;
use crate::term::{Action, Rational, Term};

/// Whether some scheduler yields `s ⇒a target` (`a = None` or `tau` means
/// no visible action), using only `allowed` transitions when given.
pub fn weak_combined_reachable(
    pts: &Pts,
    s: &Term,
    a: Option<&Action>,
    target: &Distribution,
    allowed: Option<&BTreeSet<usize>>,
) -> Result<bool, BisimError> {
    let ix = Indexed::new(pts);
    let start = ix.state(s)?;
    if !target.is_full() {
        return Err(BisimError::SubDistribution);
    }
    for t in target.support() {
        ix.state(t)?;
    }
    let visible = a.filter(|a| !a.is_tau());
    let usable = |k: usize| allowed.is_none_or(|set| set.contains(&k));
    let phases = if visible.is_some() { 2 } else { 1 };
    let last = phases - 1;

    // Nodes are (state, phase); phase 1 is after the visible action.
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut queue = VecDeque::from([(start, 0)]);
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    while let Some((u, p)) = queue.pop_front() {
        if !seen.insert((u, p)) {
            continue;
        }
        for &k in &ix.out[u] {
            if !usable(k) {
                continue;
            }
            let tr = &ix.trans[k];
            let next = if tr.label.is_tau() {
                p
            } else if Some(&tr.label) == visible && p == 0 {
                1
            } else {
                continue;
            };
            edges.push((k, p, next));
            for (v, _) in &tr.target {
                queue.push_back((*v, next));
            }
        }
    }
    let target = sparse(pts, target);
    if target.iter().any(|(v, _)| !seen.contains(&(*v, last))) {
        return Ok(false);
    }

    let mut lp = Lp::new();
    let flow: Vec<usize> = edges.iter().map(|_| lp.var()).collect();
    let mut balance: BTreeMap<(usize, usize), Vec<(usize, Rational)>> =
        seen.iter().map(|n| (*n, Vec::new())).collect();
    for (e, &(k, p, next)) in edges.iter().enumerate() {
        let tr = &ix.trans[k];
        balance.get_mut(&(tr.src, p)).expect("seen").push((flow[e], Rational::one()));
        for (v, q) in &tr.target {
            balance.get_mut(&(*v, next)).expect("seen").push((flow[e], -q.clone()));
        }
    }
    let want: BTreeMap<usize, Rational> = target.into_iter().collect();
    for ((u, p), row) in balance {
        let source = if (u, p) == (start, 0) { Rational::one() } else { Rational::zero() };
        if p == last {
            // Stopping here must yield exactly the requested mass.
            let stop = want.get(&u).cloned().unwrap_or_else(Rational::zero);
            lp.eq(row, source - stop);
        } else {
            lp.eq(row, source);
        }
    }
    Ok(lp.solve().is_some())
}

/// Does some allowed weak τ-step from `t` followed by a one-step combined
/// `label` hyper-transition reach a distribution lifted-related to `pi_s`?
pub(crate) fn combined_match(
    ix: &Indexed,
    allowed: &[bool],
    rel: &dyn Fn(usize, usize) -> bool,
    t: usize,
    label: &Action,
    pi_s: &Sparse,
) -> bool {
    let mut reach: BTreeSet<usize> = BTreeSet::new();
    let mut queue = VecDeque::from([t]);
    while let Some(u) = queue.pop_front() {
        if !reach.insert(u) {
            continue;
        }
        for &k in &ix.out[u] {
            if allowed[k] {
                queue.extend(ix.trans[k].target.iter().map(|(v, _)| *v));
            }
        }
    }
    let steps: Vec<usize> = reach
        .iter()
        .flat_map(|&u| ix.out[u].iter().copied().filter(|&k| ix.trans[k].label == *label))
        .collect();
    if steps.is_empty() {
        return false;
    }
    let candidates: BTreeSet<usize> = steps
        .iter()
        .flat_map(|&k| ix.trans[k].target.iter().map(|(v, _)| *v))
        .collect();
    if pi_s.iter().any(|(x, _)| !candidates.iter().any(|&v| rel(*x, v))) {
        return false;
    }

    let mut lp = Lp::new();
    let one = Rational::one;
    let mut balance: BTreeMap<usize, Vec<(usize, Rational)>> = reach.iter().map(|&u| (u, Vec::new())).collect();
    for &u in &reach {
        for &k in &ix.out[u] {
            if !allowed[k] {
                continue;
            }
            let x = lp.var();
            balance.get_mut(&u).expect("reached").push((x, one()));
            for (v, q) in &ix.trans[k].target {
                balance.get_mut(v).expect("reached").push((x, -q.clone()));
            }
        }
    }
    // stop_u equals the mass of the combined step taken from u.
    let mut image: BTreeMap<usize, Vec<(usize, Rational)>> = candidates.iter().map(|&v| (v, Vec::new())).collect();
    for &u in &reach {
        let mut row = balance.remove(&u).expect("reached");
        for &k in ix.out[u].iter().filter(|&&k| ix.trans[k].label == *label) {
            let z = lp.var();
            row.push((z, one()));
            for (v, q) in &ix.trans[k].target {
                image.get_mut(v).expect("candidate").push((z, q.clone()));
            }
        }
        let source = if u == t { one() } else { Rational::zero() };
        lp.eq(row, source);
    }
    let mut columns: BTreeMap<usize, Vec<(usize, Rational)>> = image
        .into_iter()
        .map(|(v, zs)| (v, zs.into_iter().map(|(z, q)| (z, -q)).collect()))
        .collect();
    for (x, p) in pi_s {
        let mut row = Vec::new();
        for &v in &candidates {
            if rel(*x, v) {
                let w = lp.var();
                row.push((w, one()));
                columns.get_mut(&v).expect("candidate").push((w, one()));
            }
        }
        lp.eq(row, p.clone());
    }
    for (_, row) in columns {
        lp.eq(row, Rational::zero());
    }
    lp.solve().is_some()
}
