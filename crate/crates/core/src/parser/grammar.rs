use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::lexer::{Spanned, Tok};
use super::Diagnostic;
use crate::spec::{NegativeLiteral, PositiveLiteral};
use crate::term::{
    check_convex_weights, Action, Name, Rational, Signature, Sort, Term, PREFIX_FAMILY,
};

pub(crate) const HOLE: &str = "[]";

/// How operator names are resolved.
pub(crate) enum SigMode<'s> {
    /// Every operator must be declared; bare undeclared names are variables.
    Strict(&'s Signature),
    /// Operators are declared on first use (direct automaton files).
    Open(&'s mut Signature),
}

pub(crate) enum Literal {
    Pos(PositiveLiteral),
    Neg(NegativeLiteral),
}

pub(crate) struct TermParser<'t, 's> {
    toks: &'t [Spanned],
    pos: usize,
    line: usize,
    line_len: usize,
    sig: SigMode<'s>,
    pub var_sorts: BTreeMap<String, Sort>,
    pub allow_meta: bool,
    pub metas: BTreeSet<String>,
    pub allow_hole: bool,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'t, 's> TermParser<'t, 's> {
    pub(crate) fn new(toks: &'t [Spanned], line: usize, line_len: usize, sig: SigMode<'s>) -> Self {
        TermParser {
            toks,
            pos: 0,
            line,
            line_len,
            sig,
            var_sorts: BTreeMap::new(),
            allow_meta: false,
            metas: BTreeSet::new(),
            allow_hole: false,
        }
    }

    pub(crate) fn sig(&self) -> &Signature {
        match &self.sig {
            SigMode::Strict(s) => s,
            SigMode::Open(s) => s,
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    pub(crate) fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|s| &s.tok);
        self.pos += 1;
        t
    }

    /// Position of the current token, or the last column of the line.
    pub(crate) fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some(s) => (s.line, s.col),
            None => (self.line, self.line_len.max(1)),
        }
    }

    pub(crate) fn error_here(&self, msg: impl Into<String>) -> Diagnostic {
        let (l, c) = self.here();
        Diagnostic::error(l, c, msg)
    }

    fn error_at(&self, at: (usize, usize), msg: impl Into<String>) -> Diagnostic {
        Diagnostic::error(at.0, at.1, msg)
    }

    pub(crate) fn expect(&mut self, tok: Tok) -> PResult<()> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.error_here(format!(
                "expected {}, found {}",
                tok.describe(),
                t.describe()
            ))),
            None => Err(self.error_here(format!("expected {}, found end of line", tok.describe()))),
        }
    }

    pub(crate) fn expect_end(&self) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(self.error_here(format!("unexpected {} after end of declaration", t.describe()))),
        }
    }

    pub(crate) fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(t) => Err(self.error_here(format!("expected identifier, found {}", t.describe()))),
            None => Err(self.error_here("expected identifier, found end of line")),
        }
    }

    /// An action label, or `$m` for the action metavariable.
    pub(crate) fn label(&mut self) -> PResult<Action> {
        let at = self.here();
        if self.peek() == Some(&Tok::Dollar) {
            self.bump();
            let name = self.ident()?;
            if !self.allow_meta {
                return Err(self.error_at(at, "action metavariables are only allowed in rules"));
            }
            self.metas.insert(name.clone());
            return Ok(Action::new(&format!("${name}")));
        }
        let name = self.ident()?;
        match &mut self.sig {
            SigMode::Strict(sig) => {
                if !sig.has_action(&name) {
                    return Err(self.error_at(at, format!("unknown action {name}")));
                }
            }
            SigMode::Open(sig) => {
                if !sig.has_action(&name) {
                    sig.actions.push(Action::new(&name));
                }
            }
        }
        Ok(Action::new(&name))
    }

    pub(crate) fn rational(&mut self) -> PResult<Rational> {
        let at = self.here();
        let num = self.ident()?;
        let parse = |s: &str| -> Option<BigInt> {
            if s.chars().all(|c| c.is_ascii_digit()) {
                s.parse().ok()
            } else {
                None
            }
        };
        let n = parse(&num).ok_or_else(|| self.error_at(at, format!("expected a rational, found `{num}`")))?;
        let d = if self.peek() == Some(&Tok::Slash) {
            self.bump();
            let at = self.here();
            let den = self.ident()?;
            let d = parse(&den).ok_or_else(|| self.error_at(at, format!("expected a denominator, found `{den}`")))?;
            if d == BigInt::from(0) {
                return Err(self.error_at(at, "zero denominator"));
            }
            d
        } else {
            BigInt::from(1)
        };
        Ok(Rational::new(n, d))
    }

    /// Operator name, optionally with a family index `name<a>`.
    fn op_name(&mut self) -> PResult<String> {
        let base = self.ident()?;
        if self.peek() == Some(&Tok::Lt) {
            self.bump();
            let label = self.label()?;
            self.expect(Tok::Gt)?;
            return Ok(format!("{base}<{label}>"));
        }
        Ok(base)
    }

    pub(crate) fn term(&mut self, expected: Option<Sort>) -> PResult<Term> {
        let at = self.here();
        let t = self.term_inner(expected)?;
        if let Some(want) = expected {
            let found = t.syntactic_sort();
            if found != want {
                let (w, f) = match want {
                    Sort::State => ("state", "distribution"),
                    Sort::Dist => ("distribution", "state"),
                };
                return Err(self.error_at(
                    at,
                    format!(
                        "expected a {w} term, found the {f} term `{}`",
                        super::render_term(&t)
                    ),
                ));
            }
        }
        Ok(t)
    }

    fn is_prefix_start(&self) -> bool {
        matches!(
            (self.peek(), self.peek_at(1), self.peek_at(2)),
            (Some(Tok::Ident(_)), Some(Tok::Dot), _) | (Some(Tok::Dollar), Some(Tok::Ident(_)), Some(Tok::Dot))
        )
    }

    fn term_inner(&mut self, expected: Option<Sort>) -> PResult<Term> {
        let at = self.here();
        match self.peek().cloned() {
            None => Err(self.error_here("expected a term, found end of line")),
            Some(Tok::Caret) => {
                self.bump();
                if self.is_prefix_start() {
                    let (op, body) = self.prefix_body()?;
                    return Ok(Term::lifted(&op, vec![body]));
                }
                let name_at = self.here();
                let name = self.op_name()?;
                self.application(&name, true, name_at)
            }
            Some(Tok::LBracket) if self.allow_hole => {
                self.bump();
                self.expect(Tok::RBracket)?;
                Ok(Term::svar(HOLE))
            }
            Some(Tok::LParen) => {
                self.bump();
                let t = self.term(expected)?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(Tok::Dollar) if self.is_prefix_start() => {
                let (op, body) = self.prefix_body()?;
                Ok(Term::app(&op, vec![body]))
            }
            Some(Tok::Ident(w)) if w == "delta" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let inner = self.term(Some(Sort::State))?;
                self.expect(Tok::RParen)?;
                Ok(Term::dirac(inner))
            }
            Some(Tok::Ident(w)) if w == "oplus" => {
                self.bump();
                self.expect(Tok::LBrace)?;
                let mut branches = Vec::new();
                loop {
                    let w = self.rational()?;
                    self.expect(Tok::Colon)?;
                    let b = self.term(Some(Sort::Dist))?;
                    branches.push((w, b));
                    match self.peek() {
                        Some(Tok::Comma) => {
                            self.bump();
                        }
                        _ => break,
                    }
                }
                self.expect(Tok::RBrace)?;
                if check_convex_weights(branches.iter().map(|(w, _)| w)).is_err() {
                    let sum: Rational = branches.iter().map(|(w, _)| w.clone()).sum();
                    let msg = match branches.iter().find(|(w, _)| w.is_zero() || *w > Rational::one()) {
                        Some((w, _)) => format!("weight {w} is not in (0,1]"),
                        None => format!("weights sum to {sum} ≠ 1"),
                    };
                    return Err(self.error_at(at, msg));
                }
                Ok(Term::Convex(branches))
            }
            Some(Tok::Ident(_)) if self.is_prefix_start() => {
                let (op, body) = self.prefix_body()?;
                Ok(Term::app(&op, vec![body]))
            }
            Some(Tok::Ident(_)) => {
                let name = self.op_name()?;
                let declared = self.sig().arg_sorts(&name, false).is_some();
                let applied = self.peek() == Some(&Tok::LParen) || name.contains('<');
                if declared || applied {
                    return self.application(&name, false, at);
                }
                match &mut self.sig {
                    SigMode::Open(sig) => {
                        sig.add_op(&name, vec![]);
                        Ok(Term::constant(&name))
                    }
                    SigMode::Strict(_) => self.variable(&name, expected.unwrap_or(Sort::State), at),
                }
            }
            Some(t) => Err(self.error_here(format!("expected a term, found {}", t.describe()))),
        }
    }

    fn variable(&mut self, name: &str, sort: Sort, at: (usize, usize)) -> PResult<Term> {
        if name == "delta" || name == "oplus" {
            return Err(self.error_at(at, format!("`{name}` is reserved")));
        }
        match self.var_sorts.get(name) {
            Some(s) if *s != sort => {
                return Err(self.error_at(
                    at,
                    format!("variable {name} is used with both sorts s and d"),
                ))
            }
            _ => {
                self.var_sorts.insert(name.to_string(), sort);
            }
        }
        Ok(match sort {
            Sort::State => Term::svar(name),
            Sort::Dist => Term::dvar(name),
        })
    }

    /// `a.θ` after the optional `^`; returns the prefix operator name and body.
    fn prefix_body(&mut self) -> PResult<(String, Term)> {
        let at = self.here();
        let label = self.label()?;
        self.expect(Tok::Dot)?;
        let op = format!("{PREFIX_FAMILY}<{label}>");
        match &mut self.sig {
            SigMode::Strict(sig) => {
                if sig.family(PREFIX_FAMILY).is_none() {
                    return Err(self.error_at(
                        at,
                        format!("prefix syntax needs the family `op {PREFIX_FAMILY}<A> : d -> s`"),
                    ));
                }
            }
            SigMode::Open(sig) => {
                if sig.state_op(&op).is_none() {
                    sig.add_op(&op, vec![Sort::Dist]);
                }
            }
        }
        let body = self.term(Some(Sort::Dist))?;
        Ok((op, body))
    }

    fn application(&mut self, name: &str, lifted: bool, at: (usize, usize)) -> PResult<Term> {
        let shown = if lifted { format!("^{name}") } else { name.to_string() };
        let declared = self.sig().arg_sorts(name, lifted);
        let sorts: Option<Vec<Sort>> = match (&declared, &self.sig) {
            (Some(s), _) => Some(s.clone()),
            (None, SigMode::Strict(_)) => {
                return Err(self.error_at(at, format!("unknown operator {name}")))
            }
            (None, SigMode::Open(_)) => None,
        };
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.bump();
            if self.peek() != Some(&Tok::RParen) {
                loop {
                    let want = sorts.as_ref().and_then(|s| s.get(args.len()).copied());
                    args.push(self.term(want)?);
                    if self.peek() == Some(&Tok::Comma) {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
        }
        match sorts {
            Some(s) => {
                if s.len() != args.len() {
                    return Err(self.error_at(
                        at,
                        format!("operator {shown} expects {} arguments, got {}", s.len(), args.len()),
                    ));
                }
            }
            None => {
                if let SigMode::Open(sig) = &mut self.sig {
                    if lifted {
                        return Err(self.error_at(at, format!("unknown operator {name}")));
                    }
                    sig.add_op(name, args.iter().map(Term::syntactic_sort).collect());
                }
            }
        }
        Ok(Term::Apply {
            op: Name::from(name),
            lifted,
            args,
        })
    }

    /// `src --a-> θ` or `src -/a->`.
    pub(crate) fn literal(&mut self) -> PResult<Literal> {
        let source = self.term(Some(Sort::State))?;
        match self.peek() {
            Some(Tok::DashDash) => {
                self.bump();
                let label = self.label()?;
                self.expect(Tok::Arrow)?;
                let target = self.term(Some(Sort::Dist))?;
                Ok(Literal::Pos(PositiveLiteral {
                    source,
                    label,
                    target,
                }))
            }
            Some(Tok::NegArrow) => {
                self.bump();
                let label = self.label()?;
                self.expect(Tok::Arrow)?;
                Ok(Literal::Neg(NegativeLiteral { source, label }))
            }
            _ => Err(self.error_here("expected `--<label>->` or `-/<label>->`")),
        }
    }
}
