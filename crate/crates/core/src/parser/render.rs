use std::collections::BTreeSet;
use std::fmt::Write;

use crate::spec::{Ptss, Rule};
use crate::term::{Signature, Sort, Term, PREFIX_FAMILY};

fn prefix_action(op: &str) -> Option<&str> {
    op.strip_prefix(PREFIX_FAMILY)?.strip_prefix('<')?.strip_suffix('>')
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::StateVar(n) | Term::DistVar(n) => out.push_str(n),
        Term::Apply { op, lifted, args } => {
            if let (Some(a), [body]) = (prefix_action(op), args.as_slice()) {
                if *lifted {
                    out.push('^');
                }
                let _ = write!(out, "{a}.");
                write_term(out, body);
                return;
            }
            if *lifted {
                out.push('^');
            }
            out.push_str(op);
            if !args.is_empty() {
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_term(out, a);
                }
                out.push(')');
            }
        }
        Term::Dirac(inner) => {
            out.push_str("delta(");
            write_term(out, inner);
            out.push(')');
        }
        Term::Convex(bs) => {
            out.push_str("oplus{");
            for (i, (w, b)) in bs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{w}: ");
                write_term(out, b);
            }
            out.push('}');
        }
    }
}

/// Canonical concrete syntax of a term.
pub fn render_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t);
    out
}

pub fn render_rule(r: &Rule) -> String {
    let mut out = String::new();
    if let Some(n) = &r.name {
        let _ = write!(out, "{n}: ");
    }
    let mut premises: Vec<String> = r.positive.iter().map(|l| l.to_string()).collect();
    premises.extend(r.negative.iter().map(|l| l.to_string()));
    if !premises.is_empty() {
        let _ = write!(out, "{} |- ", premises.join(", "));
    }
    let _ = write!(out, "{}", r.conclusion);
    out
}

fn sorts(s: &[Sort]) -> String {
    s.iter().map(|s| format!("{s} ")).collect()
}

/// Header, actions and operator declarations.
pub fn render_signature(sig: &Signature) -> String {
    let mut out = String::new();
    let actions: Vec<&str> = sig.actions.iter().map(|a| a.as_str()).collect();
    let _ = writeln!(out, "actions {}", actions.join(", "));
    let mut families_done = BTreeSet::new();
    for f in &sig.state_ops {
        if let Some((fam, _)) = sig.split_family_member(&f.name) {
            if families_done.insert(fam.name.clone()) {
                let _ = writeln!(out, "op {}<A> : {}-> s", fam.name, sorts(&fam.arg_sorts));
            }
            continue;
        }
        let _ = writeln!(out, "op {} : {}-> s", f.name, sorts(&f.arg_sorts));
    }
    for fam in &sig.families {
        if families_done.insert(fam.name.clone()) {
            let _ = writeln!(out, "op {}<A> : {}-> s", fam.name, sorts(&fam.arg_sorts));
        }
    }
    out
}

/// A whole specification; parsing the result gives back an equal value.
pub fn render_ptss(p: &Ptss) -> String {
    let mut out = format!("ptss {}\n", p.name);
    out.push_str(&render_signature(&p.signature));
    for r in &p.rules {
        out.push_str(&render_rule(r));
        out.push('\n');
    }
    out
}
