//! Static check of the probabilistic RBB safe rule format and an empirical
//! congruence probe.

mod probe;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::spec::{Ptss, Rule};
use crate::term::{Term, Var};

pub use probe::{congruence_probe, ProbeError, ProbeKind, ProbeViolation};

/// An argument position `<f, i>`, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Position {
    pub op: String,
    pub arg: usize,
}

impl Position {
    pub fn new(op: &str, arg: usize) -> Self {
        Position { op: op.to_string(), arg }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{}>", self.op, self.arg)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NestingGraph {
    pub vertices: BTreeSet<Position>,
    pub edges: BTreeSet<(Position, Position)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Wildness {
    Wild,
    Tame,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WildnessMap(pub BTreeMap<Position, Wildness>);

impl WildnessMap {
    /// `f` and `^f` share positions; a leading `^` is ignored.
    pub fn is_wild(&self, op: &str, arg: usize) -> bool {
        let op = op.strip_prefix('^').unwrap_or(op);
        self.0.get(&Position::new(op, arg)) == Some(&Wildness::Wild)
    }

    pub fn wild(&self) -> impl Iterator<Item = &Position> {
        self.0.iter().filter(|(_, w)| **w == Wildness::Wild).map(|(p, _)| p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Condition {
    #[serde(rename = "shape")]
    Shape,
    #[serde(rename = "2a")]
    TauTest,
    #[serde(rename = "2b")]
    UntestableWild,
    #[serde(rename = "2c")]
    NotNested,
    #[serde(rename = "2d")]
    LookAhead,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Shape => "shape",
            Condition::TauTest => "2a",
            Condition::UntestableWild => "2b",
            Condition::NotNested => "2c",
            Condition::LookAhead => "2d",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub variable: Option<String>,
    pub position: Option<Position>,
    pub explanation: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    PatienceRule { position: Position },
    RbbSafe,
    Violations { violations: Vec<Violation> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleVerdict {
    pub rule: String,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormatReport {
    pub wildness: WildnessMap,
    pub patience: BTreeMap<Position, Option<String>>,
    pub verdicts: Vec<RuleVerdict>,
    pub overall: bool,
}

impl FormatReport {
    pub fn violations(&self) -> impl Iterator<Item = (&str, &Violation)> {
        self.verdicts.iter().flat_map(|v| match &v.verdict {
            Verdict::Violations { violations } => violations.iter().map(|x| (v.rule.as_str(), x)).collect(),
            _ => Vec::new(),
        })
    }

    pub fn has_violation(&self, rule: &str, condition: Condition) -> bool {
        self.violations().any(|(r, v)| r == rule && v.condition == condition)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("wildness:\n");
        for (p, w) in &self.wildness.0 {
            let w = match w {
                Wildness::Wild => "wild",
                Wildness::Tame => "tame",
            };
            out.push_str(&format!("  {p} {w}\n"));
        }
        out.push_str("patience rules:\n");
        for (p, r) in &self.patience {
            out.push_str(&format!("  {p} {}\n", r.as_deref().unwrap_or("-")));
        }
        out.push_str("rules:\n");
        for v in &self.verdicts {
            match &v.verdict {
                Verdict::PatienceRule { position } => out.push_str(&format!("  {} patience rule for {position}\n", v.rule)),
                Verdict::RbbSafe => out.push_str(&format!("  {} rbb safe\n", v.rule)),
                Verdict::Violations { violations } => {
                    for x in violations {
                        out.push_str(&format!("  {} violates {}: {}\n", v.rule, x.condition, x.explanation));
                    }
                }
            }
        }
        out.push_str(&format!("overall: {}\n", if self.overall { "pass" } else { "fail" }));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("variable {0} does not occur in the term")]
    Absent(String),
}

/// Every `<g, j>` such that the j-th argument of some `g` or `^g`
/// application in `t` contains `v`.
fn positions_containing(t: &Term, v: &Var, out: &mut BTreeSet<Position>) {
    match t {
        Term::Apply { op, args, .. } => {
            for (j, a) in args.iter().enumerate() {
                if a.contains_var(v) {
                    out.insert(Position::new(op, j + 1));
                }
                positions_containing(a, v, out);
            }
        }
        Term::Dirac(inner) => positions_containing(inner, v, out),
        Term::Convex(bs) => bs.iter().for_each(|(_, b)| positions_containing(b, v, out)),
        Term::StateVar(_) | Term::DistVar(_) => {}
    }
}

/// Variables at argument positions of the conclusion source, 1-based.
fn source_vars(rule: &Rule) -> Vec<(usize, Var)> {
    match &rule.conclusion.source {
        Term::Apply { lifted: false, args, .. } => args
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.as_var().map(|v| (i + 1, v)))
            .collect(),
        _ => Vec::new(),
    }
}

fn source_op(rule: &Rule) -> Option<&str> {
    match &rule.conclusion.source {
        Term::Apply { op, lifted: false, .. } => Some(op),
        _ => None,
    }
}

/// State operators of the signature, with concrete family members.
fn state_ranks(p: &Ptss) -> Vec<(String, usize)> {
    let mut out: Vec<(String, usize)> = p
        .signature
        .state_ops
        .iter()
        .map(|f| (f.name.to_string(), f.rank()))
        .collect();
    for fam in &p.signature.families {
        for a in &p.signature.actions {
            out.push((fam.member_name(a.as_str()), fam.arg_sorts.len()));
        }
    }
    out
}

pub fn build_nesting_graph(p: &Ptss) -> NestingGraph {
    let vertices = state_ranks(p)
        .into_iter()
        .flat_map(|(f, n)| (1..=n).map(move |i| Position::new(&f, i)))
        .collect();
    let mut edges = BTreeSet::new();
    for rule in &p.rules {
        let Some(f) = source_op(rule) else { continue };
        for (i, v) in source_vars(rule) {
            let mut hits = BTreeSet::new();
            positions_containing(&rule.conclusion.target, &v, &mut hits);
            for g in hits {
                edges.insert((Position::new(f, i), g));
            }
        }
    }
    NestingGraph { vertices, edges }
}

pub fn classify_wild(p: &Ptss, g: &NestingGraph) -> WildnessMap {
    let mut wild: BTreeSet<Position> = BTreeSet::new();
    for rule in &p.rules {
        for prem in &rule.positive {
            for mu in prem.target.vars() {
                positions_containing(&rule.conclusion.target, &mu, &mut wild);
            }
        }
    }
    let mut todo: Vec<Position> = wild.iter().cloned().collect();
    while let Some(w) = todo.pop() {
        for (from, to) in &g.edges {
            if from == &w && wild.insert(to.clone()) {
                todo.push(to.clone());
            }
        }
    }
    WildnessMap(
        g.vertices
            .iter()
            .map(|v| (v.clone(), if wild.contains(v) { Wildness::Wild } else { Wildness::Tame }))
            .collect(),
    )
}

/// The position a rule is the patience rule for, if it has that exact shape.
fn patience_position(rule: &Rule) -> Option<Position> {
    let [prem] = rule.positive.as_slice() else { return None };
    if !rule.negative.is_empty() || !prem.label.is_tau() || !rule.conclusion.label.is_tau() {
        return None;
    }
    let Term::Apply { op, lifted: false, args } = &rule.conclusion.source else { return None };
    let vars: Vec<Var> = args.iter().map(Term::as_var).collect::<Option<_>>()?;
    if vars.iter().collect::<BTreeSet<_>>().len() != vars.len() {
        return None;
    }
    let x = prem.source.as_var().filter(|v| matches!(v, Var::State(_)))?;
    let mu = prem.target.as_var().filter(|v| matches!(v, Var::Dist(_)))?;
    let i = vars.iter().position(|v| *v == x)?;
    if vars.contains(&mu) {
        return None;
    }
    let expected = Term::Apply {
        op: op.clone(),
        lifted: true,
        args: vars
            .iter()
            .enumerate()
            .map(|(j, v)| match v {
                _ if j == i => mu.to_term(),
                Var::State(_) => Term::dirac(v.to_term()),
                Var::Dist(_) => v.to_term(),
            })
            .collect(),
    };
    (rule.conclusion.target == expected).then(|| Position::new(op, i + 1))
}

pub fn detect_patience_rules(p: &Ptss) -> BTreeMap<Position, Option<String>> {
    let mut out: BTreeMap<Position, Option<String>> = BTreeMap::new();
    for (f, n) in state_ranks(p) {
        let sorts = p
            .signature
            .arg_sorts(&f, false)
            .unwrap_or_default();
        for i in 1..=n {
            if sorts.get(i - 1) == Some(&crate::term::Sort::State) {
                out.insert(Position::new(&f, i), None);
            }
        }
    }
    for (k, rule) in p.rules.iter().enumerate() {
        if let Some(pos) = patience_position(rule) {
            let slot = out.entry(pos).or_insert(None);
            if slot.is_none() {
                *slot = Some(p.rule_label(k));
            }
        }
    }
    out
}

fn all_nested(t: &Term, v: &Var, w: &WildnessMap, nested: bool) -> bool {
    match t {
        Term::StateVar(_) | Term::DistVar(_) => t.as_var().as_ref() != Some(v) || nested,
        Term::Apply { op, args, .. } => args
            .iter()
            .enumerate()
            .all(|(j, a)| all_nested(a, v, w, nested && w.is_wild(op, j + 1))),
        Term::Dirac(inner) => all_nested(inner, v, w, nested),
        Term::Convex(bs) => bs.iter().all(|(_, b)| all_nested(b, v, w, nested)),
    }
}

/// Every occurrence of `v` in `target` sits under a w-nested context.
pub fn is_w_nested_occurrence(target: &Term, v: &Var, w: &WildnessMap) -> Result<bool, FormatError> {
    if !target.contains_var(v) {
        return Err(FormatError::Absent(v.to_string()));
    }
    Ok(all_nested(target, v, w, true))
}

fn violation(condition: Condition, variable: Option<&Var>, position: Option<Position>, explanation: String) -> Violation {
    Violation {
        condition,
        variable: variable.map(|v| v.to_string()),
        position,
        explanation,
    }
}

fn check_rule(rule: &Rule, w: &WildnessMap, patience: &BTreeMap<Position, Option<String>>) -> Vec<Violation> {
    let mut out = Vec::new();
    let src = crate::parser::render_term(&rule.conclusion.source);
    let Term::Apply { op, lifted: false, args } = &rule.conclusion.source else {
        out.push(violation(
            Condition::Shape,
            None,
            None,
            format!("conclusion source {src} is not an operator applied to variables"),
        ));
        return out;
    };
    let zetas: Option<Vec<Var>> = args.iter().map(Term::as_var).collect();
    let Some(zetas) = zetas else {
        out.push(violation(
            Condition::Shape,
            None,
            None,
            format!("conclusion source {src} has an argument that is not a variable"),
        ));
        return out;
    };
    let mut seen: BTreeSet<&Var> = BTreeSet::new();
    for z in &zetas {
        if !seen.insert(z) {
            out.push(violation(
                Condition::Shape,
                Some(z),
                None,
                format!("variable {z} occurs twice in the conclusion source"),
            ));
        }
    }
    let mut mus: Vec<Var> = Vec::new();
    for prem in &rule.positive {
        match prem.target.as_var() {
            Some(mu) if !seen.contains(&mu) && !mus.contains(&mu) => mus.push(mu),
            Some(mu) => out.push(violation(
                Condition::Shape,
                Some(&mu),
                None,
                format!("premise target {mu} is not a fresh variable"),
            )),
            None => out.push(violation(
                Condition::Shape,
                None,
                None,
                format!("premise target {} is not a variable", crate::parser::render_term(&prem.target)),
            )),
        }
    }

    let theta = &rule.conclusion.target;
    for (i, z) in zetas.iter().enumerate() {
        if !w.is_wild(op, i + 1) {
            continue;
        }
        let pos = Position::new(op, i + 1);
        let has_patience = patience.get(&pos).is_some_and(Option::is_some);
        if has_patience {
            for prem in &rule.positive {
                let uses = prem.source.contains_var(z) || prem.target.contains_var(z);
                if uses && (prem.source.as_var().as_ref() != Some(z) || prem.label.is_tau()) {
                    out.push(violation(
                        Condition::TauTest,
                        Some(z),
                        Some(pos.clone()),
                        format!(
                            "wild argument {z} of {op} may only be tested by `{z} --a-> mu` with a visible a, found `{} --{}->`",
                            crate::parser::render_term(&prem.source),
                            prem.label
                        ),
                    ));
                }
            }
            for neg in &rule.negative {
                if neg.source.contains_var(z) {
                    out.push(violation(
                        Condition::TauTest,
                        Some(z),
                        Some(pos.clone()),
                        format!("wild argument {z} of {op} occurs in the negative premise `{} -/{}->`", crate::parser::render_term(&neg.source), neg.label),
                    ));
                }
            }
        } else {
            let sources = rule
                .positive
                .iter()
                .map(|p| &p.source)
                .chain(rule.negative.iter().map(|n| &n.source));
            if sources.into_iter().any(|s| s.contains_var(z)) {
                out.push(violation(
                    Condition::UntestableWild,
                    Some(z),
                    Some(pos.clone()),
                    format!("wild argument {z} of {op} has no patience rule but is the source of a premise"),
                ));
            }
        }
        if theta.contains_var(z) && !all_nested(theta, z, w, true) {
            out.push(violation(
                Condition::NotNested,
                Some(z),
                Some(pos),
                format!("wild argument {z} occurs outside a w-nested position in the target"),
            ));
        }
    }
    for mu in &mus {
        if theta.contains_var(mu) && !all_nested(theta, mu, w, true) {
            out.push(violation(
                Condition::NotNested,
                Some(mu),
                None,
                format!("premise target {mu} occurs outside a w-nested position in the target"),
            ));
        }
        for prem in &rule.positive {
            if prem.source.contains_var(mu) {
                out.push(violation(
                    Condition::LookAhead,
                    Some(mu),
                    None,
                    format!("premise target {mu} occurs in the premise source {}", crate::parser::render_term(&prem.source)),
                ));
            }
        }
    }
    out
}

pub fn check_format(p: &Ptss) -> FormatReport {
    let graph = build_nesting_graph(p);
    let wildness = classify_wild(p, &graph);
    let patience = detect_patience_rules(p);
    let verdicts: Vec<RuleVerdict> = p
        .rules
        .iter()
        .enumerate()
        .map(|(k, rule)| {
            let verdict = match patience_position(rule) {
                Some(pos) if wildness.is_wild(&pos.op, pos.arg) => Verdict::PatienceRule { position: pos },
                _ => match check_rule(rule, &wildness, &patience) {
                    v if v.is_empty() => Verdict::RbbSafe,
                    violations => Verdict::Violations { violations },
                },
            };
            RuleVerdict { rule: p.rule_label(k), verdict }
        })
        .collect();
    let overall = verdicts.iter().all(|v| !matches!(v.verdict, Verdict::Violations { .. }));
    FormatReport {
        wildness,
        patience,
        verdicts,
        overall,
    }
}

#[cfg(test)]
mod tests;
