//! Text format for specifications, terms and contexts.

pub(crate) mod grammar;
pub(crate) mod lexer;
mod render;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::spec::{NegativeLiteral, PositiveLiteral, Ptss, Rule};
use crate::term::{sort_of, validate_signature, Action, Name, Signature, Sort, Term, TAU};
use grammar::{Literal, SigMode, TermParser};
use lexer::{lex_line, Spanned, Tok};

pub use render::{render_ptss, render_rule, render_signature, render_term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// A positioned message; lines and columns are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl Diagnostic {
    pub fn error(line: usize, column: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message: message.into(),
            line,
            column,
        }
    }

    /// `file:line:col: severity: message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{self}")
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {}: {}", self.line, self.column, sev, self.message)
    }
}

pub(crate) struct Line {
    pub number: usize,
    pub len: usize,
    pub toks: Vec<Spanned>,
}

/// Lex every non-blank line, collecting lexical errors.
pub(crate) fn lex_lines(text: &str, diags: &mut Vec<Diagnostic>) -> Vec<Line> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        match lex_line(raw, i + 1) {
            Ok(toks) if toks.is_empty() => {}
            Ok(toks) => out.push(Line {
                number: i + 1,
                len: raw.chars().count(),
                toks,
            }),
            Err(d) => diags.push(d),
        }
    }
    out
}

fn keyword(line: &Line) -> Option<&str> {
    match &line.toks[0].tok {
        Tok::Ident(s) => Some(s.as_str()),
        _ => None,
    }
}

fn is_op_line(line: &Line) -> bool {
    keyword(line) == Some("op")
}

fn is_rule_line(line: &Line) -> bool {
    !matches!(keyword(line), Some("ptss" | "actions" | "op"))
}

/// Whether a rule line starts with the optional `rule` keyword.
fn has_rule_keyword(line: &Line) -> bool {
    keyword(line) == Some("rule")
        && !matches!(
            line.toks.get(1).map(|t| &t.tok),
            None | Some(Tok::DashDash | Tok::NegArrow | Tok::LParen | Tok::Colon)
        )
}

/// Parse a specification file.
pub fn parse_spec(text: &str) -> Result<Ptss, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let lines = lex_lines(text, &mut diags);
    let mut name: Option<String> = None;
    let mut sig = Signature::default();
    let mut actions_line: Option<usize> = None;

    for line in &lines {
        let mut p = TermParser::new(&line.toks, line.number, line.len, SigMode::Strict(&sig));
        match keyword(line) {
            Some("ptss") => {
                p.bump();
                let r = p.ident().and_then(|n| p.expect_end().map(|_| n));
                match r {
                    Ok(n) if name.is_none() => name = Some(n),
                    Ok(_) => diags.push(Diagnostic::error(line.number, 1, "duplicate `ptss` header")),
                    Err(d) => diags.push(d),
                }
            }
            Some("actions") => {
                p.bump();
                if actions_line.is_some() {
                    diags.push(Diagnostic::error(line.number, 1, "duplicate `actions` declaration"));
                    continue;
                }
                actions_line = Some(line.number);
                let mut seen = BTreeSet::new();
                let mut declared = Vec::new();
                loop {
                    let at = p.here();
                    match p.ident() {
                        Ok(a) => {
                            if !seen.insert(a.clone()) {
                                diags.push(Diagnostic::error(at.0, at.1, format!("duplicate action {a}")));
                            } else {
                                declared.push(Action::new(&a));
                            }
                        }
                        Err(d) => {
                            diags.push(d);
                            break;
                        }
                    }
                    if p.at_end() {
                        break;
                    }
                    if let Err(d) = p.expect(Tok::Comma) {
                        diags.push(d);
                        break;
                    }
                }
                sig.actions.extend(declared);
            }
            _ => {}
        }
    }
    if name.is_none() {
        let at = lines.first().map(|l| (l.number, l.toks[0].col)).unwrap_or((1, 1));
        diags.push(Diagnostic::error(at.0, at.1, "missing `ptss <name>` header"));
    }
    if !sig.has_action(TAU) {
        diags.push(Diagnostic::error(
            actions_line.unwrap_or(1),
            1,
            "the internal action `tau` must be declared",
        ));
    }

    for line in lines.iter().filter(|l| is_op_line(l)) {
        if let Err(d) = op_decl(line, &mut sig) {
            diags.push(d);
        }
    }
    for d in validate_signature(&sig) {
        if d.rule != "missing internal action" {
            diags.push(Diagnostic::error(1, 1, format!("signature: {d}")));
        }
    }

    let mut rules = Vec::new();
    for line in lines.iter().filter(|l| is_rule_line(l)) {
        match rule_decl(line, &sig) {
            Ok(rs) => rules.extend(rs),
            Err(d) => diags.push(d),
        }
    }

    if diags.is_empty() {
        Ok(Ptss {
            name: name.unwrap_or_default(),
            signature: sig,
            rules,
        })
    } else {
        diags.sort_by_key(|d| (d.line, d.column));
        Err(diags)
    }
}

fn sort_token(p: &mut TermParser) -> Result<Sort, Diagnostic> {
    let at = p.here();
    match p.ident()?.as_str() {
        "s" => Ok(Sort::State),
        "d" => Ok(Sort::Dist),
        other => Err(Diagnostic::error(at.0, at.1, format!("expected sort `s` or `d`, found `{other}`"))),
    }
}

/// `op NAME : s d -> s` or `op fam<A> : d -> s`.
fn op_decl(line: &Line, sig: &mut Signature) -> Result<(), Diagnostic> {
    let snapshot = sig.clone();
    let mut p = TermParser::new(&line.toks, line.number, line.len, SigMode::Strict(&snapshot));
    p.bump();
    if p.peek() == Some(&Tok::Caret) {
        return Err(p.error_here("lifted operators are implied and cannot be declared"));
    }
    let name_at = p.here();
    let name = p.ident()?;
    let family = if p.peek() == Some(&Tok::Lt) {
        p.bump();
        let var = p.ident()?;
        p.expect(Tok::Gt)?;
        Some(var)
    } else {
        None
    };
    p.expect(Tok::Colon)?;
    let mut sorts = Vec::new();
    while p.peek() != Some(&Tok::Arrow) {
        if p.at_end() {
            return Err(p.error_here("expected `->` and a result sort"));
        }
        sorts.push(sort_token(&mut p)?);
    }
    p.bump();
    let result_at = p.here();
    let result = sort_token(&mut p)?;
    p.expect_end()?;
    if result != Sort::State {
        return Err(Diagnostic::error(
            result_at.0,
            result_at.1,
            "declared operators must have result sort s; distribution operators are liftings",
        ));
    }
    if name == "delta" || name == "oplus" {
        return Err(Diagnostic::error(name_at.0, name_at.1, format!("`{name}` is reserved")));
    }
    let clash = |n: &str| sig.state_op(n).is_some() || sig.family(n).is_some();
    match family {
        Some(_) => {
            if clash(&name) || sig.state_ops.iter().any(|f| f.name.starts_with(&format!("{name}<"))) {
                return Err(Diagnostic::error(name_at.0, name_at.1, format!("duplicate operator {name}")));
            }
            sig.add_family(&name, sorts);
        }
        None => {
            if clash(&name) {
                return Err(Diagnostic::error(name_at.0, name_at.1, format!("duplicate operator {name}")));
            }
            sig.add_op(&name, sorts);
        }
    }
    Ok(())
}

/// `rule [name:] [premises |-] conclusion`, expanded over the action metavariable.
fn rule_decl(line: &Line, sig: &Signature) -> Result<Vec<Rule>, Diagnostic> {
    let mut p = TermParser::new(&line.toks, line.number, line.len, SigMode::Strict(sig));
    p.allow_meta = true;
    let skip = usize::from(has_rule_keyword(line));
    if skip == 1 {
        p.bump();
    }
    let mut name = None;
    let toks: Vec<&Tok> = line.toks[skip..].iter().map(|s| &s.tok).collect();
    let named = match toks.as_slice() {
        [Tok::Ident(_), Tok::Colon, ..] => true,
        [Tok::Ident(_), Tok::Lt, t, Tok::Gt, Tok::Colon, ..] => matches!(t, Tok::Ident(_)),
        _ => false,
    };
    if named {
        let mut n = p.ident()?;
        if p.peek() == Some(&Tok::Lt) {
            p.bump();
            let inner = p.ident()?;
            p.bump();
            n = format!("{n}<{inner}>");
        }
        p.expect(Tok::Colon)?;
        name = Some(n);
    }

    let mut positive = Vec::new();
    let mut negative = Vec::new();
    let start = p.here();
    let first = p.literal()?;
    let conclusion_at;
    let conclusion = match p.peek() {
        None => {
            conclusion_at = start;
            first
        }
        Some(_) => {
            let mut lit = first;
            loop {
                match lit {
                    Literal::Pos(l) => positive.push(l),
                    Literal::Neg(l) => negative.push(l),
                }
                match p.peek() {
                    Some(Tok::Comma) => {
                        p.bump();
                        lit = p.literal()?;
                    }
                    Some(Tok::Turnstile) => {
                        p.bump();
                        break;
                    }
                    _ => return Err(p.error_here("expected `,` or `|-`")),
                }
            }
            conclusion_at = p.here();
            p.literal()?
        }
    };
    p.expect_end()?;
    let conclusion = match conclusion {
        Literal::Pos(l) => l,
        Literal::Neg(_) => {
            return Err(Diagnostic::error(
                conclusion_at.0,
                conclusion_at.1,
                "the conclusion of a rule must be a positive literal",
            ))
        }
    };

    let schema = Rule {
        name: name.as_deref().map(Name::from),
        positive,
        negative,
        conclusion,
    };
    let metas: Vec<String> = p.metas.iter().cloned().collect();
    let rules = match metas.as_slice() {
        [] => vec![schema],
        [m] => sig
            .actions
            .iter()
            .map(|a| {
                let mut r = instantiate_rule(&schema, &format!("${m}"), a);
                r.name = name.as_ref().map(|n| Name::from(format!("{n}<{a}>")));
                r
            })
            .collect(),
        _ => {
            return Err(Diagnostic::error(
                line.number,
                1,
                "a rule may use at most one action metavariable",
            ))
        }
    };
    for r in &rules {
        let lits = std::iter::once(&r.conclusion).chain(&r.positive);
        for t in lits
            .flat_map(|l| [&l.source, &l.target])
            .chain(r.negative.iter().map(|n| &n.source))
        {
            if let Err(e) = sort_of(t, sig) {
                return Err(Diagnostic::error(line.number, 1, e.to_string()));
            }
        }
    }
    Ok(rules)
}

fn instantiate_action(a: &Action, meta: &str, with: &Action) -> Action {
    if a.as_str() == meta {
        with.clone()
    } else {
        a.clone()
    }
}

fn instantiate_term(t: &Term, meta: &str, with: &Action) -> Term {
    match t {
        Term::StateVar(_) | Term::DistVar(_) => t.clone(),
        Term::Apply { op, lifted, args } => {
            let suffix = format!("<{meta}>");
            let op = match op.strip_suffix(suffix.as_str()) {
                Some(base) => Name::from(format!("{base}<{with}>")),
                None => op.clone(),
            };
            Term::Apply {
                op,
                lifted: *lifted,
                args: args.iter().map(|a| instantiate_term(a, meta, with)).collect(),
            }
        }
        Term::Dirac(inner) => Term::dirac(instantiate_term(inner, meta, with)),
        Term::Convex(bs) => Term::Convex(
            bs.iter()
                .map(|(w, b)| (w.clone(), instantiate_term(b, meta, with)))
                .collect(),
        ),
    }
}

fn instantiate_rule(r: &Rule, meta: &str, with: &Action) -> Rule {
    let pos = |l: &PositiveLiteral| PositiveLiteral {
        source: instantiate_term(&l.source, meta, with),
        label: instantiate_action(&l.label, meta, with),
        target: instantiate_term(&l.target, meta, with),
    };
    Rule {
        name: r.name.clone(),
        positive: r.positive.iter().map(pos).collect(),
        negative: r
            .negative
            .iter()
            .map(|l| NegativeLiteral {
                source: instantiate_term(&l.source, meta, with),
                label: instantiate_action(&l.label, meta, with),
            })
            .collect(),
        conclusion: pos(&r.conclusion),
    }
}

fn single_line(text: &str) -> Result<Line, Diagnostic> {
    let mut diags = Vec::new();
    let mut lines = lex_lines(text, &mut diags);
    if let Some(d) = diags.into_iter().next() {
        return Err(d);
    }
    match lines.len() {
        0 => Err(Diagnostic::error(1, 1, "expected a term")),
        1 => Ok(lines.remove(0)),
        _ => Err(Diagnostic::error(lines[1].number, 1, "expected a single line")),
    }
}

fn parse_with(text: &str, sig: &Signature, hole: bool, expected: Option<Sort>) -> Result<Term, Diagnostic> {
    let line = single_line(text)?;
    let mut p = TermParser::new(&line.toks, line.number, line.len, SigMode::Strict(sig));
    p.allow_hole = hole;
    let t = p.term(expected)?;
    p.expect_end()?;
    Ok(t)
}

/// Parse a term over `sig`; undeclared bare names are variables.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, Diagnostic> {
    parse_with(text, sig, false, None)
}

/// Parse a closed state term.
pub fn parse_closed_state(text: &str, sig: &Signature) -> Result<Term, Diagnostic> {
    let t = parse_with(text, sig, false, Some(Sort::State))?;
    if let Some(v) = t.vars().into_iter().next() {
        return Err(Diagnostic::error(1, 1, format!("expected a closed term, but `{v}` is not a declared operator")));
    }
    Ok(t)
}

/// Parse a unary context: a closed state term with exactly one hole `[]`.
pub fn parse_context(text: &str, sig: &Signature) -> Result<Term, Diagnostic> {
    let t = parse_with(text, sig, true, Some(Sort::State))?;
    let vars = t.vars();
    let holes = t
        .subterms()
        .into_iter()
        .filter(|s| matches!(s, Term::StateVar(n) if &**n == grammar::HOLE))
        .count();
    if holes != 1 {
        return Err(Diagnostic::error(1, 1, format!("a context needs exactly one hole `[]`, found {holes}")));
    }
    if let Some(v) = vars.iter().find(|v| v.name() != grammar::HOLE) {
        return Err(Diagnostic::error(1, 1, format!("`{v}` is not a declared operator")));
    }
    Ok(t)
}

/// Plug `filler` into the hole of `context`.
pub fn plug(context: &Term, filler: &Term) -> Term {
    match context {
        Term::StateVar(n) if &**n == grammar::HOLE => filler.clone(),
        Term::StateVar(_) | Term::DistVar(_) => context.clone(),
        Term::Apply { op, lifted, args } => Term::Apply {
            op: op.clone(),
            lifted: *lifted,
            args: args.iter().map(|a| plug(a, filler)).collect(),
        },
        Term::Dirac(inner) => Term::dirac(plug(inner, filler)),
        Term::Convex(bs) => Term::Convex(bs.iter().map(|(w, b)| (w.clone(), plug(b, filler))).collect()),
    }
}
