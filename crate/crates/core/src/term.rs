//! Two-sorted signatures, state and distribution terms, substitutions and
//! first-order matching.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

/// Exact probabilities and weights.
pub type Rational = BigRational;

/// Interned-ish identifier shared between terms.
pub type Name = Arc<str>;

pub const TAU: &str = "tau";

/// The two sorts: states and distributions over states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sort {
    State,
    Dist,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::State => "s",
            Sort::Dist => "d",
        })
    }
}

/// An action label. `tau` is the internal action.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action(pub Name);

impl Action {
    pub fn new(name: &str) -> Self {
        Action(Name::from(name))
    }

    pub fn tau() -> Self {
        Action::new(TAU)
    }

    pub fn is_tau(&self) -> bool {
        &*self.0 == TAU
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Action {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// A function symbol of the two-sorted signature.
///
/// Liftings are named `^f` and record their origin in `lifted_of`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FunctionSymbol {
    pub name: Name,
    pub arg_sorts: Vec<Sort>,
    pub result: Sort,
    pub lifted_of: Option<Name>,
}

impl FunctionSymbol {
    pub fn state(name: &str, arg_sorts: Vec<Sort>) -> Self {
        FunctionSymbol {
            name: Name::from(name),
            arg_sorts,
            result: Sort::State,
            lifted_of: None,
        }
    }

    /// The probabilistic lifting `^f` of a state operator `f`.
    pub fn lifting(origin: &FunctionSymbol) -> Self {
        FunctionSymbol {
            name: Name::from(format!("^{}", origin.name)),
            arg_sorts: vec![Sort::Dist; origin.arg_sorts.len()],
            result: Sort::Dist,
            lifted_of: Some(origin.name.clone()),
        }
    }

    pub fn rank(&self) -> usize {
        self.arg_sorts.len()
    }
}

/// An action-indexed operator family such as the prefix `pre<A> : d -> s`.
/// Members are the state operators named `name<a>` for each declared action.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpFamily {
    pub name: Name,
    pub arg_sorts: Vec<Sort>,
}

impl OpFamily {
    pub fn member_name(&self, action: &str) -> String {
        format!("{}<{}>", self.name, action)
    }
}

/// Name of the family that gets the `a.θ` surface syntax.
pub const PREFIX_FAMILY: &str = "pre";

/// A probabilistically lifted signature together with its action set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub actions: Vec<Action>,
    pub families: Vec<OpFamily>,
    pub state_ops: Vec<FunctionSymbol>,
    pub dist_ops: Vec<FunctionSymbol>,
}

/// A problem reported by [`validate_signature`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignatureDiagnostic {
    pub symbol: String,
    pub rule: String,
}

impl fmt::Display for SignatureDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.symbol, self.rule)
    }
}

impl Signature {
    pub fn new<'a>(actions: impl IntoIterator<Item = &'a str>) -> Self {
        Signature {
            actions: actions.into_iter().map(Action::new).collect(),
            ..Signature::default()
        }
    }

    /// Declare a state operator and its lifting.
    pub fn add_op(&mut self, name: &str, arg_sorts: Vec<Sort>) {
        let op = FunctionSymbol::state(name, arg_sorts);
        self.dist_ops.push(FunctionSymbol::lifting(&op));
        self.state_ops.push(op);
    }

    pub fn with_op(mut self, name: &str, arg_sorts: Vec<Sort>) -> Self {
        self.add_op(name, arg_sorts);
        self
    }

    /// Declare an action-indexed family; one member (and lifting) per action.
    pub fn add_family(&mut self, name: &str, arg_sorts: Vec<Sort>) {
        let family = OpFamily {
            name: Name::from(name),
            arg_sorts: arg_sorts.clone(),
        };
        let actions = self.actions.clone();
        for a in &actions {
            self.add_op(&family.member_name(a.as_str()), arg_sorts.clone());
        }
        self.families.push(family);
    }

    pub fn with_family(mut self, name: &str, arg_sorts: Vec<Sort>) -> Self {
        self.add_family(name, arg_sorts);
        self
    }

    pub fn has_action(&self, a: &str) -> bool {
        self.actions.iter().any(|x| x.as_str() == a)
    }

    pub fn state_op(&self, name: &str) -> Option<&FunctionSymbol> {
        self.state_ops.iter().find(|f| &*f.name == name)
    }

    pub fn family(&self, name: &str) -> Option<&OpFamily> {
        self.families.iter().find(|f| &*f.name == name)
    }

    /// Argument sorts of `op` applied plainly (`lifted == false`) or lifted.
    pub fn arg_sorts(&self, op: &str, lifted: bool) -> Option<Vec<Sort>> {
        let f = self.state_op(op)?;
        Some(if lifted {
            vec![Sort::Dist; f.rank()]
        } else {
            f.arg_sorts.clone()
        })
    }

    /// Whether an operator name is a family member, returning the family and action.
    pub fn split_family_member<'n>(&self, name: &'n str) -> Option<(&OpFamily, &'n str)> {
        let open = name.find('<')?;
        let inner = name[open + 1..].strip_suffix('>')?;
        let fam = self.family(&name[..open])?;
        Some((fam, inner))
    }
}

/// Check every structural invariant of a signature.
pub fn validate_signature(sig: &Signature) -> Vec<SignatureDiagnostic> {
    let mut out = Vec::new();
    let diag = |out: &mut Vec<SignatureDiagnostic>, symbol: &str, rule: &str| {
        out.push(SignatureDiagnostic {
            symbol: symbol.to_string(),
            rule: rule.to_string(),
        })
    };

    if !sig.actions.iter().any(Action::is_tau) {
        diag(&mut out, TAU, "missing internal action");
    }
    let mut seen_actions = BTreeSet::new();
    for a in &sig.actions {
        if !seen_actions.insert(a.as_str()) {
            diag(&mut out, a.as_str(), "duplicate action");
        }
    }

    let mut seen = BTreeSet::new();
    for f in sig.state_ops.iter().chain(&sig.dist_ops) {
        if !seen.insert(&*f.name) {
            diag(&mut out, &f.name, "duplicate name");
        }
    }

    let mut checked = BTreeSet::new();
    for f in &sig.state_ops {
        if f.result != Sort::State {
            diag(&mut out, &f.name, "state operator with distribution result");
        }
        if !checked.insert(&*f.name) {
            continue;
        }
        let liftings: Vec<_> = sig
            .dist_ops
            .iter()
            .filter(|g| g.lifted_of.as_deref() == Some(&*f.name))
            .collect();
        match liftings.as_slice() {
            [] => diag(&mut out, &f.name, "missing lifting"),
            [g] => {
                if g.rank() != f.rank() {
                    diag(&mut out, &g.name, "lifting rank differs from origin");
                }
            }
            _ => diag(&mut out, &f.name, "more than one lifting"),
        }
    }
    for g in &sig.dist_ops {
        if g.result != Sort::Dist || g.arg_sorts.iter().any(|s| *s != Sort::Dist) {
            diag(&mut out, &g.name, "lifted symbol must have arity d..d -> d");
        }
        match &g.lifted_of {
            None => diag(&mut out, &g.name, "distribution operator is not a lifting"),
            Some(origin) if sig.state_op(origin).is_none() => {
                diag(&mut out, &g.name, "lifting of undeclared operator")
            }
            Some(_) => {}
        }
    }
    for fam in &sig.families {
        for a in &sig.actions {
            if sig.state_op(&fam.member_name(a.as_str())).is_none() {
                diag(&mut out, &fam.name, "family member missing for an action");
            }
        }
    }
    out
}

/// A variable of either sort.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    State(Name),
    Dist(Name),
}

impl Var {
    pub fn name(&self) -> &str {
        match self {
            Var::State(n) | Var::Dist(n) => n,
        }
    }

    pub fn sort(&self) -> Sort {
        match self {
            Var::State(_) => Sort::State,
            Var::Dist(_) => Sort::Dist,
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Var::State(n) => Term::StateVar(n.clone()),
            Var::Dist(n) => Term::DistVar(n.clone()),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// State and distribution terms.
///
/// `Apply` with `lifted == false` builds a state term from a state operator;
/// with `lifted == true` it is the lifted operator `^op` and builds a
/// distribution term. Dirac and convex combination are dedicated nodes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    StateVar(Name),
    DistVar(Name),
    Apply {
        op: Name,
        lifted: bool,
        args: Vec<Term>,
    },
    Dirac(Box<Term>),
    Convex(Vec<(Rational, Term)>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SortError {
    #[error("unknown operator {0}")]
    UnknownOperator(String),
    #[error("operator {op} expects {expected} arguments, got {found}")]
    Arity {
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("argument {index} of {op} must have sort {expected}, found {found}")]
    Argument {
        op: String,
        index: usize,
        expected: Sort,
        found: Sort,
    },
    #[error("delta expects a state term, found a distribution term")]
    DiracArgument,
    #[error("convex combination branch {index} must be a distribution term")]
    ConvexArgument { index: usize },
    #[error("convex weights must lie in (0,1] and sum to 1, got {0}")]
    ConvexWeights(String),
    #[error("variable {var} of sort {expected} bound to a term of sort {found}")]
    Binding {
        var: String,
        expected: Sort,
        found: Sort,
    },
}

impl Term {
    pub fn constant(name: &str) -> Term {
        Term::Apply {
            op: Name::from(name),
            lifted: false,
            args: Vec::new(),
        }
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::Apply {
            op: Name::from(name),
            lifted: false,
            args,
        }
    }

    pub fn lifted(name: &str, args: Vec<Term>) -> Term {
        Term::Apply {
            op: Name::from(name),
            lifted: true,
            args,
        }
    }

    pub fn dirac(inner: Term) -> Term {
        Term::Dirac(Box::new(inner))
    }

    pub fn svar(name: &str) -> Term {
        Term::StateVar(Name::from(name))
    }

    pub fn dvar(name: &str) -> Term {
        Term::DistVar(Name::from(name))
    }

    /// Prefix `a.θ`, i.e. the member `pre<a>` of the prefix family.
    pub fn prefix(action: &str, target: Term) -> Term {
        Term::app(&format!("{PREFIX_FAMILY}<{action}>"), vec![target])
    }

    /// Sort as determined by the outermost node alone.
    pub fn syntactic_sort(&self) -> Sort {
        match self {
            Term::StateVar(_) => Sort::State,
            Term::Apply { lifted: false, .. } => Sort::State,
            Term::DistVar(_) | Term::Dirac(_) | Term::Convex(_) => Sort::Dist,
            Term::Apply { lifted: true, .. } => Sort::Dist,
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Term::StateVar(_) | Term::DistVar(_) => false,
            Term::Apply { args, .. } => args.iter().all(Term::is_closed),
            Term::Dirac(t) => t.is_closed(),
            Term::Convex(branches) => branches.iter().all(|(_, t)| t.is_closed()),
        }
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::StateVar(n) => Some(Var::State(n.clone())),
            Term::DistVar(n) => Some(Var::Dist(n.clone())),
            _ => None,
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::StateVar(n) => {
                out.insert(Var::State(n.clone()));
            }
            Term::DistVar(n) => {
                out.insert(Var::Dist(n.clone()));
            }
            Term::Apply { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Dirac(t) => t.collect_vars(out),
            Term::Convex(bs) => bs.iter().for_each(|(_, t)| t.collect_vars(out)),
        }
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        match (self, v) {
            (Term::StateVar(n), Var::State(m)) | (Term::DistVar(n), Var::Dist(m)) => n == m,
            (Term::StateVar(_), _) | (Term::DistVar(_), _) => false,
            (Term::Apply { args, .. }, _) => args.iter().any(|a| a.contains_var(v)),
            (Term::Dirac(t), _) => t.contains_var(v),
            (Term::Convex(bs), _) => bs.iter().any(|(_, t)| t.contains_var(v)),
        }
    }

    /// Nesting depth counted in state-operator applications.
    pub fn state_depth(&self) -> usize {
        match self {
            Term::StateVar(_) | Term::DistVar(_) => 0,
            Term::Apply { lifted, args, .. } => {
                let inner = args.iter().map(Term::state_depth).max().unwrap_or(0);
                if *lifted {
                    inner
                } else {
                    inner + 1
                }
            }
            Term::Dirac(t) => t.state_depth(),
            Term::Convex(bs) => bs.iter().map(|(_, t)| t.state_depth()).max().unwrap_or(0),
        }
    }

    /// Every subterm (including `self`), in pre-order.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            out.push(t);
            match t {
                Term::Apply { args, .. } => stack.extend(args.iter().rev()),
                Term::Dirac(inner) => stack.push(inner),
                Term::Convex(bs) => stack.extend(bs.iter().rev().map(|(_, t)| t)),
                _ => {}
            }
        }
        out
    }
}

/// Compute the sort of `t`, checking well-sortedness against `sig`.
pub fn sort_of(t: &Term, sig: &Signature) -> Result<Sort, SortError> {
    match t {
        Term::StateVar(_) => Ok(Sort::State),
        Term::DistVar(_) => Ok(Sort::Dist),
        Term::Apply { op, lifted, args } => {
            let expected = sig
                .arg_sorts(op, *lifted)
                .ok_or_else(|| SortError::UnknownOperator(op.to_string()))?;
            let shown = if *lifted {
                format!("^{op}")
            } else {
                op.to_string()
            };
            if expected.len() != args.len() {
                return Err(SortError::Arity {
                    op: shown,
                    expected: expected.len(),
                    found: args.len(),
                });
            }
            for (i, (arg, want)) in args.iter().zip(&expected).enumerate() {
                let found = sort_of(arg, sig)?;
                if found != *want {
                    return Err(SortError::Argument {
                        op: shown,
                        index: i + 1,
                        expected: *want,
                        found,
                    });
                }
            }
            Ok(if *lifted { Sort::Dist } else { Sort::State })
        }
        Term::Dirac(inner) => match sort_of(inner, sig)? {
            Sort::State => Ok(Sort::Dist),
            Sort::Dist => Err(SortError::DiracArgument),
        },
        Term::Convex(branches) => {
            check_convex_weights(branches.iter().map(|(w, _)| w))?;
            for (i, (_, b)) in branches.iter().enumerate() {
                if sort_of(b, sig)? != Sort::Dist {
                    return Err(SortError::ConvexArgument { index: i + 1 });
                }
            }
            Ok(Sort::Dist)
        }
    }
}

pub(crate) fn check_convex_weights<'a>(
    weights: impl Iterator<Item = &'a Rational>,
) -> Result<(), SortError> {
    let mut sum = Rational::zero();
    let mut ok = true;
    let mut any = false;
    for w in weights {
        any = true;
        if !w.is_positive() || *w > Rational::one() {
            ok = false;
        }
        sum += w;
    }
    if !ok || !any || !sum.is_one() {
        return Err(SortError::ConvexWeights(sum.to_string()));
    }
    Ok(())
}

/// A sort-respecting mapping from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bind `var`, rejecting terms of the wrong sort.
    pub fn insert(&mut self, var: Var, term: Term) -> Result<(), SortError> {
        let found = term.syntactic_sort();
        if found != var.sort() {
            return Err(SortError::Binding {
                var: var.name().to_string(),
                expected: var.sort(),
                found,
            });
        }
        self.map.insert(var, term);
        Ok(())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Result<Self, SortError> {
        let mut s = Substitution::new();
        for (v, t) in pairs {
            s.insert(v, t)?;
        }
        Ok(s)
    }

    pub fn get(&self, var: &Var) -> Option<&Term> {
        self.map.get(var)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    /// `self ∘ inner`: apply `inner` first, then `self`.
    pub fn compose(&self, inner: &Substitution) -> Substitution {
        let mut map: BTreeMap<Var, Term> = inner
            .map
            .iter()
            .map(|(v, t)| (v.clone(), substitute(self, t)))
            .collect();
        for (v, t) in &self.map {
            map.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Substitution { map }
    }

    /// Bind or check consistency with an existing binding.
    fn bind_consistent(&mut self, var: Var, term: &Term) -> bool {
        match self.map.get(&var) {
            Some(existing) => existing == term,
            None => {
                self.map.insert(var, term.clone());
                true
            }
        }
    }
}

/// Replace every mapped variable occurrence in `t`.
pub fn substitute(rho: &Substitution, t: &Term) -> Term {
    match t {
        Term::StateVar(n) => rho
            .map
            .get(&Var::State(n.clone()))
            .cloned()
            .unwrap_or_else(|| t.clone()),
        Term::DistVar(n) => rho
            .map
            .get(&Var::Dist(n.clone()))
            .cloned()
            .unwrap_or_else(|| t.clone()),
        Term::Apply { op, lifted, args } => Term::Apply {
            op: op.clone(),
            lifted: *lifted,
            args: args.iter().map(|a| substitute(rho, a)).collect(),
        },
        Term::Dirac(inner) => Term::Dirac(Box::new(substitute(rho, inner))),
        Term::Convex(bs) => Term::Convex(
            bs.iter()
                .map(|(w, b)| (w.clone(), substitute(rho, b)))
                .collect(),
        ),
    }
}

/// Syntactic matching of `pattern` against the closed `subject`.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut rho = Substitution::new();
    match_into(pattern, subject, &mut rho).then_some(rho)
}

/// Extend `rho` so that `rho(pattern) == subject`; on failure `rho` may be
/// partially extended and should be discarded.
pub fn match_into(pattern: &Term, subject: &Term, rho: &mut Substitution) -> bool {
    match (pattern, subject) {
        (Term::StateVar(n), s) if s.syntactic_sort() == Sort::State => {
            rho.bind_consistent(Var::State(n.clone()), s)
        }
        (Term::DistVar(n), s) if s.syntactic_sort() == Sort::Dist => {
            rho.bind_consistent(Var::Dist(n.clone()), s)
        }
        (
            Term::Apply { op, lifted, args },
            Term::Apply {
                op: op2,
                lifted: lifted2,
                args: args2,
            },
        ) => {
            op == op2
                && lifted == lifted2
                && args.len() == args2.len()
                && args.iter().zip(args2).all(|(p, s)| match_into(p, s, rho))
        }
        (Term::Dirac(p), Term::Dirac(s)) => match_into(p, s, rho),
        (Term::Convex(ps), Term::Convex(ss)) => {
            ps.len() == ss.len()
                && ps
                    .iter()
                    .zip(ss)
                    .all(|((wp, p), (ws, s))| wp == ws && match_into(p, s, rho))
        }
        _ => false,
    }
}

/// A fresh variable name `base_k` not in `used`.
pub fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    (0..)
        .map(|k| format!("{base}_{k}"))
        .find(|n| !used.contains(n))
        .expect("unbounded counter")
}


#[cfg(test)]
pub(crate) use tests::running_sig;
