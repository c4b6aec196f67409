use std::collections::{BTreeMap, BTreeSet};

use super::weak::combined_match;
use super::{dirac, lift, BisimError, Indexed, Sparse, StateRelation, Witness};
use crate::pts::Pts;
use crate::term::{Rational, Term};

/// A greatest fixpoint together with, for each removed pair, the transition
/// whose failure removed it.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub relation: StateRelation,
    witnesses: BTreeMap<(usize, usize), Witness>,
}

impl Refinement {
    pub fn related(&self, s: &Term, t: &Term) -> bool {
        self.relation.contains(s, t)
    }

    /// The unmatched transition that separated `s` and `t`.
    pub fn witness(&self, s: &Term, t: &Term) -> Option<&Witness> {
        let i = self.relation.states().iter().position(|x| x == s)?;
        let j = self.relation.states().iter().position(|x| x == t)?;
        self.witnesses.get(&(i, j)).or_else(|| self.witnesses.get(&(j, i)))
    }
}

/// Start from the full relation and delete violating pairs (in state order,
/// both directions at once) until nothing changes.
fn refine<F>(ix: &Indexed, mut ok: F) -> Result<Refinement, BisimError>
where
    F: FnMut(&StateRelation, Option<&SweepCache>, usize, usize, usize) -> Result<bool, BisimError>,
{
    refine_with(ix, |_| Ok(None), |r, c, s, t, k| ok(r, c, s, t, k))
}

/// Per-sweep precomputation shared by all pair checks of that sweep.
pub(crate) type SweepCache = Vec<Vec<Sparse>>;

fn refine_with<P, F>(ix: &Indexed, mut prepare: P, mut ok: F) -> Result<Refinement, BisimError>
where
    P: FnMut(&StateRelation) -> Result<Option<SweepCache>, BisimError>,
    F: FnMut(&StateRelation, Option<&SweepCache>, usize, usize, usize) -> Result<bool, BisimError>,
{
    let n = ix.n();
    let mut r = StateRelation::full(ix.pts.states());
    let mut witnesses = BTreeMap::new();
    loop {
        let cache = prepare(&r)?;
        let mut changed = false;
        for s in 0..n {
            for t in 0..n {
                if s == t || !r.get(s, t) {
                    continue;
                }
                for &k in &ix.out[s] {
                    if !ok(&r, cache.as_ref(), s, t, k)? {
                        r.set(s, t, false);
                        r.set(t, s, false);
                        witnesses.insert((s, t), Witness::of(&ix.pts.transitions()[k]));
                        changed = true;
                        break;
                    }
                }
            }
        }
        if !changed {
            return Ok(Refinement { relation: r, witnesses });
        }
    }
}

/// `δ_u` related to `pi` by the lifting of `r`.
fn preserving(r: &StateRelation, u: usize, pi: &Sparse) -> bool {
    pi.iter().all(|(v, _)| r.get(u, *v))
}

/// Branching bisimilarity via the scheduler-free characterization.
pub fn branching_bisim(pts: &Pts) -> Refinement {
    let ix = Indexed::new(pts);
    refine(&ix, |r, _, s, t, k| Ok(scheduler_free_match(&ix, r, s, t, k))).expect("no fallible checks")
}

/// Transition `k` of `s` matched from `t` by a concrete execution whose
/// τ-steps stay inside the class of `s`.
fn scheduler_free_match(ix: &Indexed, r: &StateRelation, s: usize, t: usize, k: usize) -> bool {
    let tr = &ix.trans[k];
    if tr.label.is_tau() && preserving(r, t, &tr.target) {
        return true;
    }
    let mut seen = vec![false; ix.n()];
    let mut stack = vec![t];
    seen[t] = true;
    while let Some(u) = stack.pop() {
        for &k2 in &ix.out[u] {
            let step = &ix.trans[k2];
            if step.label == tr.label && lift(|a, b| r.get(a, b), &tr.target, &step.target) {
                return true;
            }
            if step.label.is_tau() && preserving(r, s, &step.target) {
                for (v, _) in &step.target {
                    if !seen[*v] {
                        seen[*v] = true;
                        stack.push(*v);
                    }
                }
            }
        }
    }
    false
}

/// Maximal branching-preserving set for `r`.
fn preserving_set(ix: &Indexed, r: &StateRelation) -> Vec<bool> {
    ix.trans
        .iter()
        .map(|tr| tr.label.is_tau() && preserving(r, tr.src, &tr.target))
        .collect()
}

const ORACLE_BUDGET: usize = 20_000;

fn normalize(d: BTreeMap<usize, Rational>) -> Sparse {
    d.into_iter().collect()
}

/// Distributions reachable from each state by deterministic schedulers of
/// length at most `max_len` over allowed τ-transitions.
fn deterministic_reach(ix: &Indexed, allowed: &[bool], max_len: usize) -> Result<SweepCache, BisimError> {
    let n = ix.n();
    let mut layer: Vec<BTreeSet<Sparse>> = (0..n).map(|u| BTreeSet::from([dirac(u)])).collect();
    for _ in 0..max_len {
        let mut next = layer.clone();
        for u in 0..n {
            for &k in &ix.out[u] {
                if !allowed[k] {
                    continue;
                }
                // Each support state continues independently.
                let mut partial: Vec<BTreeMap<usize, Rational>> = vec![BTreeMap::new()];
                for (v, p) in &ix.trans[k].target {
                    let mut grown = Vec::new();
                    for acc in &partial {
                        for rho in &layer[*v] {
                            let mut acc = acc.clone();
                            for (w, q) in rho {
                                *acc.entry(*w).or_default() += p * q;
                            }
                            grown.push(acc);
                            if grown.len() > ORACLE_BUDGET {
                                return Err(BisimError::Budget(ORACLE_BUDGET));
                            }
                        }
                    }
                    partial = grown;
                }
                next[u].extend(partial.into_iter().map(normalize));
                if next[u].len() > ORACLE_BUDGET {
                    return Err(BisimError::Budget(ORACLE_BUDGET));
                }
            }
        }
        if next == layer {
            break;
        }
        layer = next;
    }
    Ok(layer.into_iter().map(|s| s.into_iter().collect()).collect())
}

/// The scheduler-based definition restricted to deterministic schedulers of
/// bounded length, by exhaustive search. Intended as a cross-check.
pub fn branching_bisim_scheduler_oracle(pts: &Pts, max_len: usize) -> Result<Refinement, BisimError> {
    let ix = Indexed::new(pts);
    let allowed_for = |r: &StateRelation| preserving_set(&ix, r);
    refine_with(
        &ix,
        |r| deterministic_reach(&ix, &allowed_for(r), max_len).map(Some),
        |r, cache, _, t, k| {
            let tr = &ix.trans[k];
            if tr.label.is_tau() && preserving(r, t, &tr.target) {
                return Ok(true);
            }
            let reach = &cache.expect("prepared")[t];
            for tilde in reach {
                // Deterministic hyper-step: every support state picks one transition.
                let mut partial: Vec<BTreeMap<usize, Rational>> = vec![BTreeMap::new()];
                for (u, p) in tilde {
                    let options: Vec<&Sparse> = ix.out[*u]
                        .iter()
                        .map(|&k2| &ix.trans[k2])
                        .filter(|x| x.label == tr.label)
                        .map(|x| &x.target)
                        .collect();
                    let mut grown = Vec::new();
                    for acc in &partial {
                        for pi in &options {
                            let mut acc = acc.clone();
                            for (w, q) in pi.iter() {
                                *acc.entry(*w).or_default() += p * q;
                            }
                            grown.push(acc);
                        }
                    }
                    if grown.len() > ORACLE_BUDGET {
                        return Err(BisimError::Budget(ORACLE_BUDGET));
                    }
                    partial = grown;
                }
                for pi_t in partial {
                    if lift(|a, b| r.get(a, b), &tr.target, &normalize(pi_t)) {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        },
    )
}

/// Probabilistic branching bisimilarity: combined τ-steps within the maximal
/// branching-preserving set, then one combined step.
pub fn prob_branching_bisim(pts: &Pts) -> Refinement {
    let ix = Indexed::new(pts);
    let mut allowed: Vec<bool> = Vec::new();
    let mut version: Option<StateRelation> = None;
    refine(&ix, |r, _, _, t, k| {
        let tr = &ix.trans[k];
        if tr.label.is_tau() && preserving(r, t, &tr.target) {
            return Ok(true);
        }
        if ix.out[t]
            .iter()
            .any(|&k2| ix.trans[k2].label == tr.label && lift(|a, b| r.get(a, b), &tr.target, &ix.trans[k2].target))
        {
            return Ok(true);
        }
        if version.as_ref() != Some(r) {
            allowed = preserving_set(&ix, r);
            version = Some(r.clone());
        }
        Ok(combined_match(&ix, &allowed, &|a, b| r.get(a, b), t, &tr.label, &tr.target))
    })
    .expect("no fallible checks")
}

/// Every initial step of `s` is matched by an equally labelled initial step
/// of `t` with branching-bisimilar targets, and vice versa. On failure the
/// unmatched step is returned.
pub fn rooted_branching_witness(pts: &Pts, s: &Term, t: &Term) -> Result<Option<Witness>, BisimError> {
    let ix = Indexed::new(pts);
    let (si, ti) = (ix.state(s)?, ix.state(t)?);
    let bb = branching_bisim(pts).relation;
    for (a, b) in [(si, ti), (ti, si)] {
        for &k in &ix.out[a] {
            let tr = &ix.trans[k];
            let matched = ix.out[b].iter().any(|&k2| {
                let other = &ix.trans[k2];
                other.label == tr.label && lift(|x, y| bb.get(x, y), &tr.target, &other.target)
            });
            if !matched {
                return Ok(Some(Witness::of(&pts.transitions()[k])));
            }
        }
    }
    Ok(None)
}

pub fn rooted_branching_bisim(pts: &Pts, s: &Term, t: &Term) -> Result<bool, BisimError> {
    Ok(rooted_branching_witness(pts, s, t)?.is_none())
}
