//! Finite-support distributions over closed state terms and the evaluation of
//! closed distribution terms.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::term::{check_convex_weights, Rational, Signature, Sort, SortError, Term};

/// A (sub-)distribution with exact weights. Zero entries are never stored,
/// so structural equality is distribution equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Distribution {
    support: BTreeMap<Term, Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("cannot evaluate open term")]
    Open,
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("nonpositive weight {0} in convex combination")]
    NonPositiveWeight(String),
    #[error("convex combination weights sum to {0}, which exceeds 1")]
    Overweight(String),
}

impl Distribution {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn dirac(t: Term) -> Self {
        let mut support = BTreeMap::new();
        support.insert(t, Rational::one());
        Distribution { support }
    }

    /// Build from pairs, summing duplicates and dropping zeros.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Term, Rational)>) -> Self {
        let mut d = Distribution::empty();
        for (t, p) in pairs {
            d.add(t, p);
        }
        d
    }

    fn add(&mut self, t: Term, p: Rational) {
        if p.is_zero() {
            return;
        }
        let entry = self.support.entry(t).or_insert_with(Rational::zero);
        *entry += p;
        if entry.is_zero() {
            self.support.retain(|_, v| !v.is_zero());
        }
    }

    pub fn get(&self, t: &Term) -> Rational {
        self.support.get(t).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total_mass(&self) -> Rational {
        self.support.values().fold(Rational::zero(), |acc, p| acc + p)
    }

    /// Mass assigned to the implicit bottom element.
    pub fn bottom_mass(&self) -> Rational {
        Rational::one() - self.total_mass()
    }

    pub fn is_full(&self) -> bool {
        self.total_mass().is_one()
    }

    pub fn support(&self) -> impl Iterator<Item = &Term> {
        self.support.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Rational)> {
        self.support.iter()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn scale(&self, p: &Rational) -> Distribution {
        Distribution::from_pairs(self.support.iter().map(|(t, q)| (t.clone(), q * p)))
    }
}

/// Summed mass of `set` under `d`.
pub fn mass(d: &Distribution, set: &BTreeSet<Term>) -> Rational {
    set.iter().map(|t| d.get(t)).fold(Rational::zero(), |a, b| a + b)
}

/// Pointwise weighted sum; the result is a sub-distribution when the
/// weights sum to less than one.
pub fn convex_combine(pairs: &[(Rational, Distribution)]) -> Result<Distribution, EvalError> {
    let mut total = Rational::zero();
    let mut out = Distribution::empty();
    for (p, d) in pairs {
        if !p.is_positive() {
            return Err(EvalError::NonPositiveWeight(p.to_string()));
        }
        total += p;
        for (t, q) in d.iter() {
            out.add(t.clone(), p * q);
        }
    }
    if total > Rational::one() {
        return Err(EvalError::Overweight(total.to_string()));
    }
    Ok(out)
}

/// Interpret a closed distribution term.
pub fn eval(theta: &Term, sig: &Signature) -> Result<Distribution, EvalError> {
    if !theta.is_closed() {
        return Err(EvalError::Open);
    }
    eval_closed(theta, sig)
}

fn eval_closed(theta: &Term, sig: &Signature) -> Result<Distribution, EvalError> {
    match theta {
        Term::Dirac(t) => {
            if t.syntactic_sort() != Sort::State {
                return Err(SortError::DiracArgument.into());
            }
            Ok(Distribution::dirac((**t).clone()))
        }
        Term::Convex(branches) => {
            check_convex_weights(branches.iter().map(|(w, _)| w))?;
            let parts = branches
                .iter()
                .map(|(w, b)| Ok((w.clone(), eval_closed(b, sig)?)))
                .collect::<Result<Vec<_>, EvalError>>()?;
            convex_combine(&parts)
        }
        Term::Apply {
            op,
            lifted: true,
            args,
        } => {
            let origin = sig
                .state_op(op)
                .ok_or_else(|| SortError::UnknownOperator(format!("^{op}")))?;
            if origin.rank() != args.len() {
                return Err(SortError::Arity {
                    op: format!("^{op}"),
                    expected: origin.rank(),
                    found: args.len(),
                }
                .into());
            }
            // State-sorted positions range over the argument's support; dist-sorted
            // positions are copied verbatim.
            let mut partial: Vec<(Vec<Term>, Rational)> = vec![(Vec::new(), Rational::one())];
            for (arg, sort) in args.iter().zip(&origin.arg_sorts) {
                match sort {
                    Sort::Dist => {
                        if arg.syntactic_sort() != Sort::Dist {
                            return Err(SortError::Argument {
                                op: format!("^{op}"),
                                index: 0,
                                expected: Sort::Dist,
                                found: Sort::State,
                            }
                            .into());
                        }
                        for (prefix, _) in &mut partial {
                            prefix.push(arg.clone());
                        }
                    }
                    Sort::State => {
                        let d = eval_closed(arg, sig)?;
                        let mut next = Vec::with_capacity(partial.len() * d.len());
                        for (prefix, p) in &partial {
                            for (t, q) in d.iter() {
                                let mut v = prefix.clone();
                                v.push(t.clone());
                                next.push((v, p * q));
                            }
                        }
                        partial = next;
                    }
                }
            }
            Ok(Distribution::from_pairs(partial.into_iter().map(|(args, p)| {
                (
                    Term::Apply {
                        op: op.clone(),
                        lifted: false,
                        args,
                    },
                    p,
                )
            })))
        }
        Term::Apply { lifted: false, .. } | Term::StateVar(_) => Err(SortError::Argument {
            op: "eval".into(),
            index: 1,
            expected: Sort::Dist,
            found: Sort::State,
        }
        .into()),
        Term::DistVar(_) => Err(EvalError::Open),
    }
}
