//! Relation lifting, weak combined transitions and the branching
//! bisimulations on finite PTSs.

mod branching;
mod scheduler;
mod weak;

use std::collections::BTreeMap;

use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::dist::Distribution;
use crate::flow::FlowNetwork;
use crate::parser::render_term;
use crate::pts::{render_dist, Pts, PtsTransition};
use crate::term::{Action, Rational, Term};

pub use branching::{
    branching_bisim, branching_bisim_scheduler_oracle, prob_branching_bisim, rooted_branching_bisim,
    rooted_branching_witness, Refinement,
};
pub use scheduler::{ExecutionFragment, Scheduler};
pub use weak::weak_combined_reachable;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BisimError {
    #[error("{0} is not a state of the system")]
    NotAState(String),
    #[error("lifting is only defined on full distributions")]
    SubDistribution,
    #[error("scheduler search exceeded its budget of {0} distributions")]
    Budget(usize),
    #[error("invalid scheduler: {0}")]
    BadScheduler(String),
}

/// A relation on the states of one PTS with constant-time membership.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateRelation {
    states: Vec<Term>,
    index: BTreeMap<Term, usize>,
    matrix: Vec<bool>,
}

impl StateRelation {
    pub fn empty(states: &[Term]) -> Self {
        let n = states.len();
        StateRelation {
            states: states.to_vec(),
            index: states.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect(),
            matrix: vec![false; n * n],
        }
    }

    pub fn full(states: &[Term]) -> Self {
        let mut r = Self::empty(states);
        r.matrix.iter_mut().for_each(|b| *b = true);
        r
    }

    pub fn identity(states: &[Term]) -> Self {
        let mut r = Self::empty(states);
        for i in 0..states.len() {
            r.set(i, i, true);
        }
        r
    }

    pub fn from_pairs(states: &[Term], pairs: impl IntoIterator<Item = (Term, Term)>) -> Result<Self, BisimError> {
        let mut r = Self::empty(states);
        for (s, t) in pairs {
            let i = r.idx(&s)?;
            let j = r.idx(&t)?;
            r.set(i, j, true);
        }
        Ok(r)
    }

    fn idx(&self, t: &Term) -> Result<usize, BisimError> {
        self.index
            .get(t)
            .copied()
            .ok_or_else(|| BisimError::NotAState(render_term(t)))
    }

    pub fn states(&self) -> &[Term] {
        &self.states
    }

    pub fn contains(&self, s: &Term, t: &Term) -> bool {
        match (self.index.get(s), self.index.get(t)) {
            (Some(&i), Some(&j)) => self.get(i, j),
            _ => false,
        }
    }

    pub(crate) fn get(&self, i: usize, j: usize) -> bool {
        self.matrix[i * self.states.len() + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: bool) {
        let n = self.states.len();
        self.matrix[i * n + j] = v;
    }

    pub fn len(&self) -> usize {
        self.matrix.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pairs(&self) -> Vec<(Term, Term)> {
        let n = self.states.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.get(i, j) {
                    out.push((self.states[i].clone(), self.states[j].clone()));
                }
            }
        }
        out
    }

    pub fn is_subset(&self, other: &StateRelation) -> bool {
        self.pairs().iter().all(|(s, t)| other.contains(s, t))
    }

    pub fn is_equivalence(&self) -> bool {
        let n = self.states.len();
        (0..n).all(|i| self.get(i, i))
            && (0..n).all(|i| (0..n).all(|j| self.get(i, j) == self.get(j, i)))
            && (0..n).all(|i| {
                (0..n).all(|j| !self.get(i, j) || (0..n).all(|k| !self.get(j, k) || self.get(i, k)))
            })
    }

    /// Equivalence classes in state order; meaningful for equivalences.
    pub fn classes(&self) -> Vec<Vec<Term>> {
        let n = self.states.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for i in 0..n {
            if seen[i] {
                continue;
            }
            let class: Vec<usize> = (i..n).filter(|&j| !seen[j] && self.get(i, j)).collect();
            let mut members = Vec::new();
            for j in class {
                seen[j] = true;
                members.push(self.states[j].clone());
            }
            if members.is_empty() {
                seen[i] = true;
                members.push(self.states[i].clone());
            }
            out.push(members);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub source: String,
    pub label: String,
    pub target: String,
}

impl Witness {
    fn of(t: &PtsTransition) -> Self {
        Witness {
            source: render_term(&t.source),
            label: t.label.to_string(),
            target: render_dist(&t.target),
        }
    }
}

/// Distributions as sparse vectors over state indices.
pub(crate) type Sparse = Vec<(usize, Rational)>;

pub(crate) struct ITrans {
    pub src: usize,
    pub label: Action,
    pub target: Sparse,
}

/// A PTS with states replaced by their indices.
pub(crate) struct Indexed<'a> {
    pub pts: &'a Pts,
    pub trans: Vec<ITrans>,
    pub out: Vec<Vec<usize>>,
}

impl<'a> Indexed<'a> {
    pub fn new(pts: &'a Pts) -> Self {
        let n = pts.states().len();
        let mut out = vec![Vec::new(); n];
        let trans: Vec<ITrans> = pts
            .transitions()
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let src = pts.index_of(&t.source).expect("source is a state");
                out[src].push(k);
                ITrans {
                    src,
                    label: t.label.clone(),
                    target: sparse(pts, &t.target),
                }
            })
            .collect();
        Indexed { pts, trans, out }
    }

    pub fn n(&self) -> usize {
        self.pts.states().len()
    }

    pub fn state(&self, t: &Term) -> Result<usize, BisimError> {
        self.pts
            .index_of(t)
            .ok_or_else(|| BisimError::NotAState(render_term(t)))
    }
}

pub(crate) fn sparse(pts: &Pts, d: &Distribution) -> Sparse {
    d.iter()
        .map(|(t, p)| (pts.index_of(t).expect("support is in the state space"), p.clone()))
        .collect()
}

/// Whether `d1` and `d2` are related by the lifting of `rel`.
pub(crate) fn lift(rel: impl Fn(usize, usize) -> bool, d1: &[(usize, Rational)], d2: &[(usize, Rational)]) -> bool {
    if d1.len() == 1 && d2.len() == 1 {
        return rel(d1[0].0, d2[0].0);
    }
    let total1: Rational = d1.iter().map(|(_, p)| p.clone()).sum();
    let total2: Rational = d2.iter().map(|(_, p)| p.clone()).sum();
    if total1 != total2 {
        return false;
    }
    // Every left state needs some partner and vice versa.
    if d1.iter().any(|(i, _)| !d2.iter().any(|(j, _)| rel(*i, *j)))
        || d2.iter().any(|(j, _)| !d1.iter().any(|(i, _)| rel(*i, *j)))
    {
        return false;
    }
    let (s, t) = (0, 1);
    let mut g = FlowNetwork::new(2 + d1.len() + d2.len());
    for (a, (i, p)) in d1.iter().enumerate() {
        g.add_edge(s, 2 + a, p.clone());
        for (b, (j, _)) in d2.iter().enumerate() {
            if rel(*i, *j) {
                g.add_edge(2 + a, 2 + d1.len() + b, Rational::one());
            }
        }
    }
    for (b, (_, p)) in d2.iter().enumerate() {
        g.add_edge(2 + d1.len() + b, t, p.clone());
    }
    g.max_flow(s, t) == total1
}

/// Lifting of `r` to full distributions, decided by maximum flow.
pub fn lift_check(r: &StateRelation, d1: &Distribution, d2: &Distribution) -> Result<bool, BisimError> {
    if !d1.is_full() || !d2.is_full() {
        return Err(BisimError::SubDistribution);
    }
    let to_sparse = |d: &Distribution| -> Result<Sparse, BisimError> {
        d.iter().map(|(t, p)| Ok((r.idx(t)?, p.clone()))).collect()
    };
    let (a, b) = (to_sparse(d1)?, to_sparse(d2)?);
    Ok(lift(|i, j| r.get(i, j), &a, &b))
}

pub(crate) fn dirac(i: usize) -> Sparse {
    vec![(i, Rational::one())]
}

#[cfg(test)]
mod tests;
