//! Least three-valued stable models over a finite term domain and the PTS
//! associated with a complete specification.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::dist::{eval, Distribution, EvalError};
use crate::parser::render_term;
use crate::pts::{Pts, PtsTransition};
use crate::spec::{Ptss, Rule};
use crate::term::{match_into, sort_of, substitute, Action, Sort, Substitution, Term, Var};

/// A closed symbolic transition `source --label-> target`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub source: Term,
    pub label: Action,
    pub target: Term,
}

impl Serialize for Transition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl std::fmt::Display for Transition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} --{}-> {}",
            render_term(&self.source),
            self.label,
            render_term(&self.target)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainBound {
    pub roots: Vec<Term>,
    pub max_depth: usize,
    pub max_states: usize,
    pub max_iterations: usize,
}

impl DomainBound {
    pub const DEFAULT_MAX_DEPTH: usize = 8;
    pub const DEFAULT_MAX_STATES: usize = 512;
    pub const DEFAULT_MAX_ITERATIONS: usize = 64;

    pub fn new(roots: Vec<Term>) -> Self {
        DomainBound {
            roots,
            max_depth: Self::DEFAULT_MAX_DEPTH,
            max_states: Self::DEFAULT_MAX_STATES,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("domain bound exceeded: {term} has depth {depth} > max depth {max}")]
    DepthOverflow { term: String, depth: usize, max: usize },
    #[error("domain bound exceeded: adding {term} exceeds max states {max}")]
    StateOverflow { term: String, max: usize },
    #[error("root {0} is not a closed state term")]
    BadRoot(String),
    #[error("rule {rule}: premises are not well-founded")]
    NonWellFounded { rule: String },
    #[error("rule {rule}: variable {var} of the conclusion target is not bound by the source or the premises")]
    UnboundTarget { rule: String, var: String },
    #[error("rule {rule}: distribution variable {var} in a negative premise is not bound")]
    UnboundNegative { rule: String, var: String },
    #[error("cannot evaluate target {term}: {source}")]
    Eval { term: String, source: EvalError },
    #[error("no associated PTS: the specification is not complete on this domain")]
    Incomplete,
    #[error("no convergence within {0} iterations")]
    NotConverged(usize),
}

impl ModelError {
    /// Bound and convergence failures, as opposed to malformed input.
    pub fn is_bound(&self) -> bool {
        matches!(
            self,
            ModelError::DepthOverflow { .. } | ModelError::StateOverflow { .. } | ModelError::NotConverged(_)
        )
    }
}

pub type TransitionSet = BTreeSet<Transition>;

/// The pair ⟨CT, PT⟩ of certainly and possibly true transitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreeValuedModel {
    pub ct: TransitionSet,
    pub pt: TransitionSet,
    pub iterations: usize,
    pub converged: bool,
    /// `(CT_α, PT_α)` for α = 1, 2, …; stage 0 is `(∅, everything)`.
    pub stages: Vec<(TransitionSet, TransitionSet)>,
    /// The closed state terms the model ranges over.
    pub domain: BTreeSet<Term>,
}

impl ThreeValuedModel {
    pub fn is_complete(&self) -> bool {
        self.ct == self.pt
    }

    /// Transitions that are possible but not certain.
    pub fn unknown(&self) -> impl Iterator<Item = &Transition> {
        self.pt.difference(&self.ct)
    }
}

/// How negative literals are decided during one derivation.
#[derive(Clone, Copy)]
enum Negatives<'a> {
    /// Against the full relation: `t -/a->` never holds.
    Never,
    /// Against the empty relation: always holds.
    Always,
    Against(&'a BTreeSet<(Term, Action)>),
}

impl Negatives<'_> {
    fn holds(&self, t: &Term, a: &Action) -> bool {
        match self {
            Negatives::Never => false,
            Negatives::Always => true,
            Negatives::Against(enabled) => !enabled.contains(&(t.clone(), a.clone())),
        }
    }
}

fn enabled(set: &TransitionSet) -> BTreeSet<(Term, Action)> {
    set.iter().map(|t| (t.source.clone(), t.label.clone())).collect()
}

/// Evaluation order of the positive premises of a rule.
fn premise_order(rule: &Rule, label: &str) -> Result<Vec<usize>, ModelError> {
    let bound_by_source = rule.conclusion.source.vars();
    let n = rule.positive.len();
    let deps: Vec<BTreeSet<usize>> = (0..n)
        .map(|i| {
            let needs: BTreeSet<Var> = rule.positive[i]
                .source
                .vars()
                .difference(&bound_by_source)
                .cloned()
                .collect();
            (0..n)
                .filter(|&j| rule.positive[j].target.vars().iter().any(|v| needs.contains(v)))
                .collect()
        })
        .collect();
    let mut order = Vec::new();
    let mut done = vec![false; n];
    while order.len() < n {
        let next = (0..n).find(|&i| !done[i] && deps[i].iter().all(|&j| done[j]));
        match next {
            Some(i) => {
                done[i] = true;
                order.push(i);
            }
            None => {
                return Err(ModelError::NonWellFounded {
                    rule: label.to_string(),
                })
            }
        }
    }
    Ok(order)
}

struct Engine<'p> {
    p: &'p Ptss,
    bound: &'p DomainBound,
    domain: BTreeSet<Term>,
    orders: Vec<Vec<usize>>,
    targets: BTreeMap<Term, Distribution>,
}

struct Derivation {
    set: TransitionSet,
    by_source: BTreeMap<Term, Vec<(Action, Term)>>,
}

impl Derivation {
    fn insert(&mut self, t: Transition) -> bool {
        if self.set.contains(&t) {
            return false;
        }
        self.by_source
            .entry(t.source.clone())
            .or_default()
            .push((t.label.clone(), t.target.clone()));
        self.set.insert(t);
        true
    }
}

impl<'p> Engine<'p> {
    fn new(p: &'p Ptss, bound: &'p DomainBound) -> Result<Self, ModelError> {
        for i in 0..p.rules.len() {
            check_target_vars(p, i)?;
        }
        let orders = p
            .rules
            .iter()
            .enumerate()
            .map(|(i, r)| premise_order(r, &p.rule_label(i)))
            .collect::<Result<_, _>>()?;
        let mut e = Engine {
            p,
            bound,
            domain: BTreeSet::new(),
            orders,
            targets: BTreeMap::new(),
        };
        for r in &bound.roots {
            if !r.is_closed() || sort_of(r, &p.signature) != Ok(Sort::State) {
                return Err(ModelError::BadRoot(render_term(r)));
            }
            e.add_state(r.clone())?;
        }
        Ok(e)
    }

    /// Add a state term and its state subterms; returns whether anything was new.
    fn add_state(&mut self, t: Term) -> Result<bool, ModelError> {
        if self.domain.contains(&t) {
            return Ok(false);
        }
        let depth = t.state_depth();
        if depth > self.bound.max_depth {
            return Err(ModelError::DepthOverflow {
                term: render_term(&t),
                depth,
                max: self.bound.max_depth,
            });
        }
        let subs: Vec<Term> = t
            .subterms()
            .into_iter()
            .filter(|s| s.syntactic_sort() == Sort::State)
            .cloned()
            .collect();
        for s in subs {
            if self.domain.contains(&s) {
                continue;
            }
            if self.domain.len() >= self.bound.max_states {
                return Err(ModelError::StateOverflow {
                    term: render_term(&s),
                    max: self.bound.max_states,
                });
            }
            self.domain.insert(s);
        }
        Ok(true)
    }

    fn eval_target(&mut self, theta: &Term) -> Result<Distribution, ModelError> {
        if let Some(d) = self.targets.get(theta) {
            return Ok(d.clone());
        }
        let d = eval(theta, &self.p.signature).map_err(|source| ModelError::Eval {
            term: render_term(theta),
            source,
        })?;
        self.targets.insert(theta.clone(), d.clone());
        Ok(d)
    }

    /// Least set closed under the rules with negatives decided by `neg`.
    /// With `grow`, premise sources and target supports join the domain.
    fn derive(&mut self, neg: Negatives, grow: bool) -> Result<TransitionSet, ModelError> {
        let mut der = Derivation {
            set: BTreeSet::new(),
            by_source: BTreeMap::new(),
        };
        loop {
            let mut found = Vec::new();
            let mut pending = BTreeSet::new();
            let states: Vec<Term> = self.domain.iter().cloned().collect();
            for (ri, rule) in self.p.rules.iter().enumerate() {
                for s in &states {
                    let mut rho = Substitution::new();
                    if !match_into(&rule.conclusion.source, s, &mut rho) {
                        continue;
                    }
                    self.solve(ri, 0, rho, &der, neg, &mut found, &mut pending)?;
                }
            }
            let mut changed = false;
            for t in found {
                if der.insert(t.clone()) {
                    changed = true;
                    if grow {
                        let d = self.eval_target(&t.target)?;
                        for u in d.support() {
                            changed |= self.add_state(u.clone())?;
                        }
                    }
                }
            }
            if grow {
                for s in pending {
                    changed |= self.add_state(s)?;
                }
            }
            if !changed {
                return Ok(der.set);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn solve(
        &self,
        ri: usize,
        k: usize,
        rho: Substitution,
        der: &Derivation,
        neg: Negatives,
        found: &mut Vec<Transition>,
        pending: &mut BTreeSet<Term>,
    ) -> Result<(), ModelError> {
        let rule = &self.p.rules[ri];
        let order = &self.orders[ri];
        if k == order.len() {
            return self.finish(ri, &rho, neg, found);
        }
        let prem = &rule.positive[order[k]];
        let src = substitute(&rho, &prem.source);
        if src.is_closed() {
            if !self.domain.contains(&src) {
                pending.insert(src);
                return Ok(());
            }
            if let Some(outs) = der.by_source.get(&src) {
                for (a, theta) in outs {
                    if *a != prem.label {
                        continue;
                    }
                    let mut r2 = rho.clone();
                    if match_into(&prem.target, theta, &mut r2) {
                        self.solve(ri, k + 1, r2, der, neg, found, pending)?;
                    }
                }
            }
        } else {
            for (s, outs) in &der.by_source {
                let mut r1 = rho.clone();
                if !match_into(&prem.source, s, &mut r1) {
                    continue;
                }
                for (a, theta) in outs {
                    if *a != prem.label {
                        continue;
                    }
                    let mut r2 = r1.clone();
                    if match_into(&prem.target, theta, &mut r2) {
                        self.solve(ri, k + 1, r2, der, neg, found, pending)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn finish(
        &self,
        ri: usize,
        rho: &Substitution,
        neg: Negatives,
        found: &mut Vec<Transition>,
    ) -> Result<(), ModelError> {
        let rule = &self.p.rules[ri];
        let concl = Transition {
            source: substitute(rho, &rule.conclusion.source),
            label: rule.conclusion.label.clone(),
            target: substitute(rho, &rule.conclusion.target),
        };
        let mut free: BTreeSet<Var> = BTreeSet::new();
        for n in &rule.negative {
            free.extend(substitute(rho, &n.source).vars());
        }
        if let Some(v) = free.iter().find(|v| v.sort() == Sort::Dist) {
            return Err(ModelError::UnboundNegative {
                rule: self.p.rule_label(ri),
                var: v.to_string(),
            });
        }
        let free: Vec<Var> = free.into_iter().collect();
        let states: Vec<&Term> = self.domain.iter().collect();
        if free.is_empty() || !states.is_empty() {
            let mut idx = vec![0usize; free.len()];
            loop {
                let mut full = rho.clone();
                for (v, &i) in free.iter().zip(&idx) {
                    full.insert(v.clone(), states[i].clone()).expect("state variable");
                }
                let ok = rule
                    .negative
                    .iter()
                    .all(|n| neg.holds(&substitute(&full, &n.source), &n.label));
                if ok {
                    found.push(concl);
                    return Ok(());
                }
                let mut j = 0;
                loop {
                    if j == idx.len() {
                        return Ok(());
                    }
                    idx[j] += 1;
                    if idx[j] < states.len() {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
            }
        }
        Ok(())
    }
}

/// Reject rules whose conclusion target has variables nothing can bind.
fn check_target_vars(p: &Ptss, i: usize) -> Result<(), ModelError> {
    let r = &p.rules[i];
    let mut bound = r.conclusion.source.vars();
    for prem in &r.positive {
        bound.extend(prem.source.vars());
        bound.extend(prem.target.vars());
    }
    if let Some(v) = r.conclusion.target.vars().difference(&bound).next() {
        return Err(ModelError::UnboundTarget {
            rule: p.rule_label(i),
            var: v.to_string(),
        });
    }
    Ok(())
}

/// Iterate `CT_{α+1}`, `PT_{α+1}` from `(∅, everything)` until a fixpoint.
pub fn stable_model(p: &Ptss, bound: &DomainBound) -> Result<ThreeValuedModel, ModelError> {
    let mut engine = Engine::new(p, bound)?;
    // PT_1 ignores negative premises, so it bounds every later stage and
    // fixes the domain.
    let pt1 = engine.derive(Negatives::Always, true)?;
    let ct1 = engine.derive(Negatives::Never, false)?;
    let mut stages = vec![(ct1, pt1)];
    let mut converged = false;
    while stages.len() < bound.max_iterations.max(1) {
        let (ct, pt) = stages.last().expect("nonempty");
        let (pt_en, ct_en) = (enabled(pt), enabled(ct));
        let next_ct = engine.derive(Negatives::Against(&pt_en), false)?;
        let next_pt = engine.derive(Negatives::Against(&ct_en), false)?;
        if next_ct == *ct && next_pt == *pt {
            converged = true;
            break;
        }
        stages.push((next_ct, next_pt));
    }
    let (ct, pt) = stages.last().cloned().expect("nonempty");
    Ok(ThreeValuedModel {
        ct,
        pt,
        iterations: stages.len(),
        converged,
        stages,
        domain: engine.domain,
    })
}

/// Whether CT = PT on the bounded domain, with the model.
pub fn is_complete(p: &Ptss, bound: &DomainBound) -> Result<(bool, ThreeValuedModel), ModelError> {
    let m = stable_model(p, bound)?;
    if !m.converged {
        return Err(ModelError::NotConverged(bound.max_iterations));
    }
    Ok((m.is_complete(), m))
}

/// The PTS reachable from the roots in the associated model.
pub fn reachable_pts(p: &Ptss, bound: &DomainBound) -> Result<Pts, ModelError> {
    let (complete, m) = is_complete(p, bound)?;
    if !complete {
        return Err(ModelError::Incomplete);
    }
    pts_of_model(p, &m, &bound.roots)
}

/// Concrete transitions of `m.ct` reachable from `roots`.
pub fn pts_of_model(p: &Ptss, m: &ThreeValuedModel, roots: &[Term]) -> Result<Pts, ModelError> {
    let mut by_source: BTreeMap<&Term, Vec<&Transition>> = BTreeMap::new();
    for t in &m.ct {
        by_source.entry(&t.source).or_default().push(t);
    }
    let mut seen = BTreeSet::new();
    let mut stack: Vec<Term> = roots.to_vec();
    let mut trans = BTreeSet::new();
    while let Some(s) = stack.pop() {
        if !seen.insert(s.clone()) {
            continue;
        }
        for t in by_source.get(&s).into_iter().flatten() {
            let d = eval(&t.target, &p.signature).map_err(|source| ModelError::Eval {
                term: render_term(&t.target),
                source,
            })?;
            stack.extend(d.support().filter(|u| !seen.contains(*u)).cloned());
            trans.insert(PtsTransition {
                source: s.clone(),
                label: t.label.clone(),
                target: d,
            });
        }
    }
    Ok(Pts::new(p.signature.actions.clone(), seen, trans).expect("sources are states and targets are full"))
}
