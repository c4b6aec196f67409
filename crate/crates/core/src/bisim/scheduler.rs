use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::BisimError;
use crate::dist::Distribution;
use crate::pts::Pts;
use crate::term::{Action, Rational, Term};

/// A finite execution fragment `s0 a1 s1 ... an sn`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExecutionFragment {
    pub start: Term,
    pub steps: Vec<(Action, Term)>,
}

impl ExecutionFragment {
    pub fn new(start: Term) -> Self {
        ExecutionFragment { start, steps: Vec::new() }
    }

    pub fn then(&self, a: Action, t: Term) -> Self {
        let mut next = self.clone();
        next.steps.push((a, t));
        next
    }

    pub fn last(&self) -> &Term {
        self.steps.last().map(|(_, t)| t).unwrap_or(&self.start)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Visible actions in order.
    pub fn trace(&self) -> Vec<&Action> {
        self.steps.iter().map(|(a, _)| a).filter(|a| !a.is_tau()).collect()
    }

    fn parent(&self) -> Option<ExecutionFragment> {
        let mut p = self.clone();
        p.steps.pop()?;
        Some(p)
    }
}

/// An explicit scheduler: fragments not mentioned stop with certainty.
/// Choices refer to transitions by their index in `Pts::transitions`.
#[derive(Clone, Debug, Default)]
pub struct Scheduler {
    choices: BTreeMap<ExecutionFragment, Vec<(usize, Rational)>>,
}

impl Scheduler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn choose(&mut self, fragment: ExecutionFragment, transition: usize, weight: Rational) -> &mut Self {
        self.choices.entry(fragment).or_default().push((transition, weight));
        self
    }

    pub fn is_deterministic(&self) -> bool {
        self.choices
            .values()
            .all(|c| c.is_empty() || (c.len() == 1 && c[0].1.is_one()))
    }

    /// Checks that every choice is a sub-distribution over outgoing
    /// transitions of the fragment's last state.
    pub fn validate(&self, pts: &Pts) -> Result<(), BisimError> {
        for (frag, choice) in &self.choices {
            let mut total = Rational::zero();
            for (k, w) in choice {
                let tr = pts
                    .transitions()
                    .get(*k)
                    .ok_or_else(|| BisimError::BadScheduler(format!("no transition #{k}")))?;
                if &tr.source != frag.last() {
                    return Err(BisimError::BadScheduler(format!(
                        "transition #{k} does not leave the last state of its fragment"
                    )));
                }
                if *w <= Rational::zero() {
                    return Err(BisimError::BadScheduler(format!("weight {w} is not positive")));
                }
                total += w;
            }
            if total > Rational::one() {
                return Err(BisimError::BadScheduler(format!("weights sum to {total} > 1")));
            }
        }
        Ok(())
    }

    fn stop_mass(&self, frag: &ExecutionFragment) -> Rational {
        let chosen: Rational = self
            .choices
            .get(frag)
            .map(|c| c.iter().map(|(_, w)| w.clone()).sum())
            .unwrap_or_else(Rational::zero);
        Rational::one() - chosen
    }

    /// Probability of the cone of `frag` when started in `s`.
    pub fn cone(&self, pts: &Pts, s: &Term, frag: &ExecutionFragment) -> Rational {
        let Some(parent) = frag.parent() else {
            return if &frag.start == s { Rational::one() } else { Rational::zero() };
        };
        let (a, t) = frag.steps.last().expect("non-empty");
        let base = self.cone(pts, s, &parent);
        if base.is_zero() {
            return base;
        }
        let step: Rational = self
            .choices
            .get(&parent)
            .into_iter()
            .flatten()
            .map(|(k, w)| {
                let tr = &pts.transitions()[*k];
                if &tr.label == a {
                    w * tr.target.get(t)
                } else {
                    Rational::zero()
                }
            })
            .sum();
        base * step
    }

    /// Probability of executing exactly `frag` and stopping there.
    pub fn execution_probability(&self, pts: &Pts, s: &Term, frag: &ExecutionFragment) -> Rational {
        self.cone(pts, s, frag) * self.stop_mass(frag)
    }

    /// The distribution over final states if the scheduler witnesses a weak
    /// combined transition from `s` with action `a` (`None` is ε), and
    /// `None` otherwise. Schedulers must be finite, so every run stops.
    pub fn induced(&self, pts: &Pts, s: &Term, a: Option<&Action>) -> Result<Option<Distribution>, BisimError> {
        self.validate(pts)?;
        if !pts.contains(s) {
            return Err(BisimError::NotAState(crate::parser::render_term(s)));
        }
        let wanted: Vec<&Action> = a.filter(|a| !a.is_tau()).into_iter().collect();
        let mut ends: Vec<(Term, Rational)> = Vec::new();
        let mut stack = vec![(ExecutionFragment::new(s.clone()), Rational::one())];
        while let Some((frag, p)) = stack.pop() {
            let stop = &p * self.stop_mass(&frag);
            if !stop.is_zero() {
                if frag.trace() != wanted {
                    return Ok(None);
                }
                ends.push((frag.last().clone(), stop));
            }
            for (k, w) in self.choices.get(&frag).into_iter().flatten() {
                let tr = &pts.transitions()[*k];
                for (t, q) in tr.target.iter() {
                    stack.push((frag.then(tr.label.clone(), t.clone()), &p * w * q));
                }
            }
        }
        let mut merged: BTreeMap<Term, Rational> = BTreeMap::new();
        for (t, p) in ends {
            *merged.entry(t).or_insert_with(Rational::zero) += p;
        }
        Ok(Some(Distribution::from_pairs(merged)))
    }
}
