//! Rules and probabilistic transition system specifications.

use std::collections::BTreeSet;
use std::fmt;

use crate::term::{Action, Name, Signature, Term, Var};

/// `source --label-> target`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PositiveLiteral {
    pub source: Term,
    pub label: Action,
    pub target: Term,
}

/// `source -/label->`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NegativeLiteral {
    pub source: Term,
    pub label: Action,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub name: Option<Name>,
    pub positive: Vec<PositiveLiteral>,
    pub negative: Vec<NegativeLiteral>,
    pub conclusion: PositiveLiteral,
}

impl Rule {
    pub fn axiom(conclusion: PositiveLiteral) -> Self {
        Rule {
            name: None,
            positive: Vec::new(),
            negative: Vec::new(),
            conclusion,
        }
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(Name::from(name));
        self
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.conclusion.source.vars();
        out.extend(self.conclusion.target.vars());
        for p in &self.positive {
            out.extend(p.source.vars());
            out.extend(p.target.vars());
        }
        for n in &self.negative {
            out.extend(n.source.vars());
        }
        out
    }
}

/// A specification `(Σ, A, R)` with a name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ptss {
    pub name: String,
    pub signature: Signature,
    pub rules: Vec<Rule>,
}

impl Ptss {
    /// Human-facing handle for rule `index`: its name, or `#k` (1-based).
    pub fn rule_label(&self, index: usize) -> String {
        match &self.rules[index].name {
            Some(n) => n.to_string(),
            None => format!("#{}", index + 1),
        }
    }
}

impl fmt::Display for PositiveLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} --{}-> {}",
            crate::parser::render_term(&self.source),
            self.label,
            crate::parser::render_term(&self.target)
        )
    }
}

impl fmt::Display for NegativeLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} -/{}->",
            crate::parser::render_term(&self.source),
            self.label
        )
    }
}
