//! Finite probabilistic transition systems and their line-oriented text form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::dist::Distribution;
use crate::parser::grammar::{SigMode, TermParser};
use crate::parser::lexer::Tok;
use crate::parser::{lex_lines, render_term, Diagnostic};
use crate::term::{Action, Rational, Signature, Sort, Term};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PtsTransition {
    pub source: Term,
    pub label: Action,
    pub target: Distribution,
}

/// A finite PTS. States and transitions are kept sorted by their rendering,
/// so two equal systems always print identically.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Pts {
    pub actions: Vec<Action>,
    states: Vec<Term>,
    transitions: Vec<PtsTransition>,
    index: BTreeMap<Term, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PtsError {
    #[error("transition source {0} is not a state")]
    UnknownSource(String),
    #[error("target of a transition from {0} is not a full distribution")]
    SubDistribution(String),
    #[error("unknown action {0}")]
    UnknownAction(String),
}

pub(crate) fn render_dist(d: &Distribution) -> String {
    let parts: Vec<String> = d
        .iter()
        .map(|(t, p)| (render_term(t), p))
        .collect::<BTreeMap<_, _>>()
        .into_iter()
        .map(|(t, p)| format!("{t}: {p}"))
        .collect();
    format!("{{ {} }}", parts.join(", "))
}

impl Pts {
    /// Build a PTS; states in transition targets are added automatically.
    pub fn new(
        actions: Vec<Action>,
        states: impl IntoIterator<Item = Term>,
        transitions: impl IntoIterator<Item = PtsTransition>,
    ) -> Result<Pts, PtsError> {
        let mut all: BTreeSet<Term> = states.into_iter().collect();
        let mut trans = BTreeSet::new();
        for t in transitions {
            if !all.contains(&t.source) {
                return Err(PtsError::UnknownSource(render_term(&t.source)));
            }
            if !t.target.is_full() {
                return Err(PtsError::SubDistribution(render_term(&t.source)));
            }
            if !actions.contains(&t.label) {
                return Err(PtsError::UnknownAction(t.label.to_string()));
            }
            all.extend(t.target.support().cloned());
            trans.insert(t);
        }
        let mut states: Vec<(String, Term)> = all.into_iter().map(|t| (render_term(&t), t)).collect();
        states.sort();
        let states: Vec<Term> = states.into_iter().map(|(_, t)| t).collect();
        let mut transitions: Vec<(String, PtsTransition)> = trans
            .into_iter()
            .map(|t| {
                let key = format!("{} {} {}", render_term(&t.source), t.label, render_dist(&t.target));
                (key, t)
            })
            .collect();
        transitions.sort_by(|a, b| a.0.cmp(&b.0));
        let index = states.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        Ok(Pts {
            actions,
            states,
            transitions: transitions.into_iter().map(|(_, t)| t).collect(),
            index,
        })
    }

    pub fn states(&self) -> &[Term] {
        &self.states
    }

    pub fn transitions(&self) -> &[PtsTransition] {
        &self.transitions
    }

    pub fn index_of(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.index.contains_key(t)
    }

    /// Transitions leaving `s`.
    pub fn outgoing(&self, s: &Term) -> impl Iterator<Item = &PtsTransition> + '_ {
        let s = s.clone();
        self.transitions.iter().filter(move |t| t.source == s)
    }

    /// The states reachable from `roots`, with the transitions between them.
    pub fn restrict_to_reachable(&self, roots: &[Term]) -> Pts {
        let mut seen: BTreeSet<Term> = BTreeSet::new();
        let mut stack: Vec<Term> = roots.iter().filter(|r| self.contains(r)).cloned().collect();
        while let Some(s) = stack.pop() {
            if !seen.insert(s.clone()) {
                continue;
            }
            for t in self.outgoing(&s) {
                stack.extend(t.target.support().filter(|u| !seen.contains(*u)).cloned());
            }
        }
        let trans: Vec<PtsTransition> = self
            .transitions
            .iter()
            .filter(|t| seen.contains(&t.source))
            .cloned()
            .collect();
        Pts::new(self.actions.clone(), seen, trans).expect("restriction of a valid PTS")
    }

    /// `state` lines, then `trans` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let actions: Vec<&str> = self.actions.iter().map(Action::as_str).collect();
        let _ = writeln!(out, "actions {}", actions.join(", "));
        for s in &self.states {
            let _ = writeln!(out, "state {}", render_term(s));
        }
        for t in &self.transitions {
            let _ = writeln!(
                out,
                "trans {} --{}-> {}",
                render_term(&t.source),
                t.label,
                render_dist(&t.target)
            );
        }
        out
    }
}

/// Parse the text form. Names that are not operators become constants.
pub fn parse_pts(text: &str) -> Result<Pts, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let lines = lex_lines(text, &mut diags);
    let mut sig = Signature::new(["tau"]);
    let mut declared_actions: Option<Vec<Action>> = None;
    let mut states = Vec::new();
    let mut transitions = Vec::new();
    let mut positions = Vec::new();

    for line in &lines {
        let kw = match &line.toks[0].tok {
            Tok::Ident(s) => s.clone(),
            t => {
                diags.push(Diagnostic::error(line.number, line.toks[0].col, format!("unexpected {}", t.describe())));
                continue;
            }
        };
        let mut p = TermParser::new(&line.toks, line.number, line.len, SigMode::Open(&mut sig));
        p.bump();
        let res: Result<(), Diagnostic> = (|| {
            match kw.as_str() {
                "pts" => {
                    p.ident()?;
                }
                "actions" => {
                    let mut acts = Vec::new();
                    loop {
                        acts.push(p.label()?);
                        if p.at_end() {
                            break;
                        }
                        p.expect(Tok::Comma)?;
                    }
                    if !acts.iter().any(Action::is_tau) {
                        acts.push(Action::tau());
                    }
                    declared_actions = Some(acts);
                }
                "state" => states.push(p.term(Some(Sort::State))?),
                "trans" => {
                    let source = p.term(Some(Sort::State))?;
                    p.expect(Tok::DashDash)?;
                    let label = p.label()?;
                    p.expect(Tok::Arrow)?;
                    let at = p.here();
                    p.expect(Tok::LBrace)?;
                    let mut pairs: Vec<(Term, Rational)> = Vec::new();
                    loop {
                        let t = p.term(Some(Sort::State))?;
                        p.expect(Tok::Colon)?;
                        let w = p.rational()?;
                        pairs.push((t, w));
                        if p.peek() == Some(&Tok::Comma) {
                            p.bump();
                        } else {
                            break;
                        }
                    }
                    p.expect(Tok::RBrace)?;
                    let target = Distribution::from_pairs(pairs);
                    if !target.is_full() {
                        return Err(Diagnostic::error(
                            at.0,
                            at.1,
                            format!("probabilities sum to {} ≠ 1", target.total_mass()),
                        ));
                    }
                    transitions.push(PtsTransition { source, label, target });
                    positions.push((line.number, line.toks[0].col));
                }
                other => {
                    return Err(Diagnostic::error(
                        line.number,
                        line.toks[0].col,
                        format!("expected `state`, `trans` or `actions`, found `{other}`"),
                    ))
                }
            }
            p.expect_end()
        })();
        if let Err(d) = res {
            diags.push(d);
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    let actions = match declared_actions {
        Some(a) => {
            for (t, at) in transitions.iter().zip(&positions) {
                if !a.contains(&t.label) {
                    diags.push(Diagnostic::error(at.0, at.1, format!("undeclared action {}", t.label)));
                }
            }
            a
        }
        None => {
            let mut a: Vec<Action> = sig.actions.clone();
            a.sort();
            a
        }
    };
    if !diags.is_empty() {
        return Err(diags);
    }
    for t in &transitions {
        states.push(t.source.clone());
    }
    Pts::new(actions, states, transitions).map_err(|e| vec![Diagnostic::error(1, 1, e.to_string())])
}
