//! `#!` expectation headers of corpus files and their evaluation.
//!
//! ```text
//! #! complete [; root ...]          #! incomplete [; root ...]
//! #! format ; pass                  #! format ; fail ; rule cond ; ...
//! #! pts ; root ; states ; transitions
//! #! weak ; state action { dist } ; yes|no
//! #! bisim ; kind s t ; yes|no
//! #! oracle ; max-len ; agree
//! #! probe ; kind ; context ; u ; v ; holds|fails
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use ptss_core::bisim::branching_bisim_scheduler_oracle;
use ptss_core::format::{check_format, congruence_probe};
use ptss_core::model::{is_complete, reachable_pts, DomainBound};
use ptss_core::parser::parse_context;
use ptss_core::term::Action;
use ptss_core::{branching_bisim, parse_pts, weak_combined_reachable, Distribution, Pts, Ptss, Term};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::{decide, is_pts_file, load_pts, load_spec, pool, pts_term, read, spec_term, CliError, KindArg, Outcome};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Kind {
    Complete(bool),
    Format,
    Pts,
    Weak,
    Bisim,
    Oracle,
    Probe,
}

#[derive(Clone, Debug)]
struct Header {
    line: usize,
    kind: Kind,
    args: Vec<String>,
    expected: String,
    text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub file: String,
    pub line: usize,
    pub check: String,
    pub expected: String,
    pub actual: String,
    pub ok: bool,
}

fn parse_headers(name: &str, text: &str) -> Result<Vec<Header>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let Some(rest) = raw.trim().strip_prefix("#!") else {
            continue;
        };
        let line = i + 1;
        let bad = |msg: &str| CliError::Usage(format!("{name}:{line}: malformed header: {msg}"));
        let fields: Vec<String> = rest.split(';').map(|f| f.trim().to_string()).collect();
        let (head, fields) = fields.split_first().expect("split yields one field");
        let arity = |n: usize| {
            if fields.len() == n + 1 && fields.iter().all(|f| !f.is_empty()) {
                Ok((fields[..n].to_vec(), fields[n].clone()))
            } else {
                Err(bad(&format!("`{head}` takes {} fields", n + 1)))
            }
        };
        let (kind, args, expected) = match head.as_str() {
            "complete" | "incomplete" => (Kind::Complete(head == "complete"), fields.to_vec(), head.clone()),
            "format" => match fields.first().map(String::as_str) {
                Some("pass") if fields.len() == 1 => (Kind::Format, vec![], "pass".into()),
                Some("fail") => {
                    for f in &fields[1..] {
                        if f.split_whitespace().count() != 2 {
                            return Err(bad("expected `rule condition`"));
                        }
                    }
                    (Kind::Format, vec![], fields.join(" ; "))
                }
                _ => return Err(bad("expected `pass` or `fail`")),
            },
            "pts" => {
                if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
                    return Err(bad("`pts` takes a root, a state count and a transition count"));
                }
                (Kind::Pts, vec![fields[0].clone()], fields[1..].join(" ; "))
            }
            "weak" | "bisim" | "oracle" | "probe" => {
                let (args, expected) = arity(if head == "probe" { 4 } else { 1 })?;
                let (kind, answers) = match head.as_str() {
                    "weak" => (Kind::Weak, ["yes", "no"]),
                    "bisim" => (Kind::Bisim, ["yes", "no"]),
                    "oracle" => (Kind::Oracle, ["agree", "disagree"]),
                    _ => (Kind::Probe, ["holds", "fails"]),
                };
                if !answers.contains(&expected.as_str()) {
                    return Err(bad(&format!("expected `{}` or `{}`", answers[0], answers[1])));
                }
                match kind {
                    Kind::Bisim if args[0].split_whitespace().count() != 3 => return Err(bad("expected `kind s t`")),
                    Kind::Weak if args[0].split_whitespace().count() < 3 => {
                        return Err(bad("expected `state action distribution`"))
                    }
                    Kind::Oracle if args[0].parse::<usize>().is_err() => return Err(bad("expected a length")),
                    _ => {}
                }
                (kind, args, expected)
            }
            other => return Err(bad(&format!("unknown check `{other}`"))),
        };
        out.push(Header {
            line,
            kind,
            args,
            expected,
            text: rest.trim().to_string(),
        });
    }
    Ok(out)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn kind_arg(s: &str) -> Result<KindArg, CliError> {
    KindArg::parse(s).ok_or_else(|| CliError::Usage(format!("unknown equivalence `{s}`")))
}

/// The file under test: a specification or a finite PTS.
enum Subject {
    Spec(Ptss),
    Pts(Pts),
}

impl Subject {
    fn term(&self, s: &str) -> Result<Term, CliError> {
        match self {
            Subject::Spec(p) => spec_term(p, s),
            Subject::Pts(_) => pts_term(s),
        }
    }

    fn spec(&self) -> Result<&Ptss, CliError> {
        match self {
            Subject::Spec(p) => Ok(p),
            Subject::Pts(_) => Err(CliError::Usage("this check needs a specification".into())),
        }
    }

    /// The PTS itself, or the one reachable from `roots`.
    fn system(&self, roots: Vec<Term>) -> Result<Pts, CliError> {
        match self {
            Subject::Pts(p) => Ok(p.clone()),
            Subject::Spec(p) => Ok(reachable_pts(p, &DomainBound::new(roots))?),
        }
    }
}

/// Roots for checks that name none: constants plus terms named elsewhere in the headers.
fn default_roots(subject: &Subject, headers: &[Header]) -> Result<Vec<Term>, CliError> {
    let Subject::Spec(p) = subject else {
        return Ok(Vec::new());
    };
    let mut roots = crate::constants(p);
    for h in headers {
        let named: Vec<&String> = match h.kind {
            Kind::Pts => vec![&h.args[0]],
            Kind::Probe => vec![&h.args[2], &h.args[3]],
            _ => vec![],
        };
        for n in named {
            let t = spec_term(p, n)?;
            if !roots.contains(&t) {
                roots.push(t);
            }
        }
    }
    Ok(roots)
}

fn evaluate(subject: &Subject, h: &Header, roots: &[Term]) -> Result<String, CliError> {
    Ok(match &h.kind {
        Kind::Complete(_) => {
            let p = subject.spec()?;
            let mut rs = h.args.iter().map(|a| spec_term(p, a)).collect::<Result<Vec<_>, _>>()?;
            if rs.is_empty() {
                rs = roots.to_vec();
            }
            let (complete, _) = is_complete(p, &DomainBound::new(rs))?;
            if complete { "complete" } else { "incomplete" }.into()
        }
        Kind::Format => {
            let r = check_format(subject.spec()?);
            if r.overall {
                "pass".into()
            } else {
                let listed: Vec<&str> = h.expected.split(';').skip(1).map(str::trim).collect();
                let mut found = vec!["fail".to_string()];
                for l in listed {
                    let (rule, cond) = l.split_once(' ').expect("checked when parsing");
                    if r.violations().any(|(x, v)| x == rule && v.condition.to_string() == cond.trim()) {
                        found.push(l.to_string());
                    }
                }
                found.join(" ; ")
            }
        }
        Kind::Pts => {
            let root = subject.term(&h.args[0])?;
            let pts = subject.system(vec![root.clone()])?.restrict_to_reachable(&[root]);
            format!("{} ; {}", pts.states().len(), pts.transitions().len())
        }
        Kind::Weak => {
            let mut it = h.args[0].splitn(3, char::is_whitespace);
            let (s, a, dist) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap().trim());
            let pts = subject.system(roots.to_vec())?;
            let target = parse_dist(dist)?;
            let action = Action::new(a);
            yes_no(weak_combined_reachable(&pts, &subject.term(s)?, Some(&action), &target, None)?).into()
        }
        Kind::Bisim => {
            let w: Vec<&str> = h.args[0].split_whitespace().collect();
            let kind = kind_arg(w[0])?;
            let (s, t) = (subject.term(w[1])?, subject.term(w[2])?);
            let pts = match subject {
                Subject::Pts(p) => p.clone(),
                Subject::Spec(_) => subject.system(vec![s.clone(), t.clone()])?,
            };
            yes_no(decide(&pts, kind, &s, &t)?.0).into()
        }
        Kind::Oracle => {
            let n: usize = h.args[0].parse().expect("checked when parsing");
            let pts = subject.system(roots.to_vec())?;
            let oracle = branching_bisim_scheduler_oracle(&pts, n)?;
            if oracle.relation == branching_bisim(&pts).relation { "agree" } else { "disagree" }.into()
        }
        Kind::Probe => {
            let p = subject.spec()?;
            let kind = kind_arg(&h.args[0])?;
            let ctx = parse_context(&h.args[1], &p.signature).map_err(|d| CliError::Usage(format!("`{}`: {d}", h.args[1])))?;
            let pair = (spec_term(p, &h.args[2])?, spec_term(p, &h.args[3])?);
            let found = congruence_probe(p, &[pair], &[ctx], &DomainBound::new(vec![]), kind.probe_kind())?;
            if found.is_empty() { "holds" } else { "fails" }.into()
        }
    })
}

/// A distribution over `.pts` state names, `{ s: 1/2, t: 1/2 }`.
fn parse_dist(text: &str) -> Result<Distribution, CliError> {
    let pts = parse_pts(&format!("trans _d --tau-> {text}\n"))
        .map_err(|ds| CliError::Usage(format!("`{text}`: {}", ds[0])))?;
    Ok(pts.transitions()[0].target.clone())
}

fn run_file(path: &Path) -> Result<Vec<CheckResult>, CliError> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let headers = parse_headers(&name, &read(path)?)?;
    let subject = if is_pts_file(path) {
        Subject::Pts(load_pts(path)?)
    } else {
        Subject::Spec(load_spec(path)?)
    };
    let roots = default_roots(&subject, &headers)?;
    let mut out = Vec::new();
    for h in &headers {
        let actual = match evaluate(&subject, h, &roots) {
            Ok(a) => a,
            Err(CliError::Usage(m)) => return Err(CliError::Usage(format!("{name}:{}: {m}", h.line))),
            Err(e) => format!("error: {e}"),
        };
        out.push(CheckResult {
            file: name.clone(),
            line: h.line,
            check: h.text.clone(),
            ok: actual == h.expected,
            expected: h.expected.clone(),
            actual,
        });
    }
    Ok(out)
}

pub fn run_corpus(dir: &Path, json: bool) -> Result<Outcome, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "pts" || e == "ptss"))
        .collect();
    files.sort();
    let per_file = pool()?.install(|| files.par_iter().map(|f| run_file(f)).collect::<Vec<_>>());
    let mut results = Vec::new();
    for r in per_file {
        results.extend(r?);
    }
    let mismatches = results.iter().filter(|r| !r.ok).count();
    let code = if mismatches == 0 { crate::EXIT_YES } else { crate::EXIT_NO };
    let stdout = if json {
        let mut s = serde_json::to_string_pretty(&json!({
            "files": files.len(),
            "checks": results,
            "mismatches": mismatches,
        }))
        .expect("json values serialize");
        s.push('\n');
        s
    } else {
        let mut s = String::new();
        for r in &results {
            if r.ok {
                s.push_str(&format!("ok    {}:{}  {}\n", r.file, r.line, r.check));
            } else {
                s.push_str(&format!(
                    "FAIL  {}:{}  {}  (expected {}, got {})\n",
                    r.file, r.line, r.check, r.expected, r.actual
                ));
            }
        }
        s.push_str(&format!(
            "{} files, {} checks, {} mismatches\n",
            files.len(),
            results.len(),
            mismatches
        ));
        s
    };
    Ok(Outcome {
        code,
        stdout,
        stderr: String::new(),
    })
}
