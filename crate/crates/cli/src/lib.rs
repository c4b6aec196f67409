//! Command logic behind the `ptss-kit` binary. Every command returns an
//! [`Outcome`] instead of printing, so the binary and the tests share it.

mod corpus;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ptss_core::format::{check_format, congruence_probe, FormatReport, ProbeError, ProbeKind};
use ptss_core::model::{is_complete, reachable_pts, DomainBound, ModelError};
use ptss_core::parser::{parse_closed_state, parse_context, parse_spec, render_term};
use ptss_core::term::Sort;
use ptss_core::{
    branching_bisim, parse_pts, prob_branching_bisim, BisimError, Pts, Ptss, Term, Witness,
};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

pub use corpus::run_corpus;

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BOUND: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ptss-kit", version, about = "Analyse probabilistic transition system specifications")]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the rule format of a specification.
    CheckFormat { spec: PathBuf },
    /// Compute the least three-valued stable model on a bounded domain.
    StableModel {
        spec: PathBuf,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// Print the PTS reachable from the roots.
    Pts {
        spec: PathBuf,
        #[command(flatten)]
        bound: BoundArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide an equivalence between two states, or print its classes.
    Bisim {
        /// A `.pts` file, or a specification whose PTS is built from the roots.
        file: PathBuf,
        #[arg(long, value_enum, default_value = "branching")]
        kind: KindArg,
        #[command(flatten)]
        bound: BoundArgs,
        /// Two states to compare; without them the partition is printed.
        #[arg(num_args = 0..=2)]
        states: Vec<String>,
    },
    /// Test pairs of terms under a set of contexts.
    ProbeCongruence {
        spec: PathBuf,
        /// One pair per line: `u ; v`.
        pairs: PathBuf,
        /// One context with a single hole `[]` per line.
        contexts: PathBuf,
        #[arg(long, value_enum, default_value = "rooted")]
        kind: KindArg,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// Check the `#!` expectations of every file in a directory.
    CorpusRun { dir: PathBuf },
}

#[derive(Args, Debug, Clone)]
pub struct BoundArgs {
    /// Root state term; repeatable. Defaults to the constants of the signature.
    #[arg(long = "root")]
    pub roots: Vec<String>,
    #[arg(long, default_value_t = DomainBound::DEFAULT_MAX_DEPTH)]
    pub max_depth: usize,
    #[arg(long, default_value_t = DomainBound::DEFAULT_MAX_STATES)]
    pub max_states: usize,
    #[arg(long, default_value_t = DomainBound::DEFAULT_MAX_ITERATIONS)]
    pub max_iterations: usize,
}

impl Default for BoundArgs {
    fn default() -> Self {
        BoundArgs {
            roots: Vec::new(),
            max_depth: DomainBound::DEFAULT_MAX_DEPTH,
            max_states: DomainBound::DEFAULT_MAX_STATES,
            max_iterations: DomainBound::DEFAULT_MAX_ITERATIONS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Branching,
    Pbranching,
    Rooted,
}

impl KindArg {
    pub fn probe_kind(self) -> ProbeKind {
        match self {
            KindArg::Branching => ProbeKind::Branching,
            KindArg::Pbranching => ProbeKind::ProbBranching,
            KindArg::Rooted => ProbeKind::Rooted,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        <KindArg as ValueEnum>::from_str(s, false).ok()
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Bound(String),
    #[error("{0}")]
    Negative(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Bound(_) => EXIT_BOUND,
            CliError::Negative(_) => EXIT_NO,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        if e.is_bound() {
            CliError::Bound(e.to_string())
        } else if e == ModelError::Incomplete {
            CliError::Negative(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<BisimError> for CliError {
    fn from(e: BisimError) -> Self {
        match e {
            BisimError::Budget(_) => CliError::Bound(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<ProbeError> for CliError {
    fn from(e: ProbeError) -> Self {
        match e {
            ProbeError::Model(e) => e.into(),
            ProbeError::Bisim(e) => e.into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Self {
        Outcome {
            code,
            stdout,
            stderr: String::new(),
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    match dispatch(cli) {
        Ok(o) => o,
        Err(e) => Outcome {
            code: e.code(),
            stdout: if cli.json {
                pretty(&json!({ "error": e.to_string(), "exit": e.code() }))
            } else {
                String::new()
            },
            stderr: format!("error: {e}\n"),
        },
    }
}

/// Rayon pool sized by `PTSS_KIT_THREADS` when set.
pub fn pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("PTSS_KIT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("PTSS_KIT_THREADS must be a number, got `{v}`")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Usage(e.to_string()))
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let json = cli.json;
    match &cli.command {
        Command::CheckFormat { spec } => {
            let p = load_spec(spec)?;
            let r = check_format(&p);
            let code = if r.overall { EXIT_YES } else { EXIT_NO };
            let out = if json { pretty(&format_json(&r)) } else { r.to_text() };
            Ok(Outcome::ok(code, out))
        }
        Command::StableModel { spec, bound } => stable_model_cmd(&load_spec(spec)?, bound, json),
        Command::Pts { spec, bound, out } => {
            let p = load_spec(spec)?;
            let pts = reachable_pts(&p, &domain_bound(&p, bound, &[])?)?;
            let text = pts.to_text();
            match out {
                Some(path) => {
                    fs::write(path, &text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                    Ok(Outcome::ok(
                        EXIT_YES,
                        format!("wrote {} states, {} transitions\n", pts.states().len(), pts.transitions().len()),
                    ))
                }
                None => Ok(Outcome::ok(EXIT_YES, text)),
            }
        }
        Command::Bisim {
            file,
            kind,
            bound,
            states,
        } => bisim_cmd(file, *kind, bound, states, json),
        Command::ProbeCongruence {
            spec,
            pairs,
            contexts,
            kind,
            bound,
        } => probe_cmd(spec, pairs, contexts, *kind, bound, json),
        Command::CorpusRun { dir } => run_corpus(dir, json),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn diagnostics(path: &Path, ds: &[ptss_core::Diagnostic]) -> CliError {
    let name = path.display().to_string();
    CliError::Usage(ds.iter().map(|d| d.render(&name)).collect::<Vec<_>>().join("\n"))
}

pub fn load_spec(path: &Path) -> Result<Ptss, CliError> {
    parse_spec(&read(path)?).map_err(|ds| diagnostics(path, &ds))
}

pub fn load_pts(path: &Path) -> Result<Pts, CliError> {
    parse_pts(&read(path)?).map_err(|ds| diagnostics(path, &ds))
}

pub fn is_pts_file(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "pts")
}

/// Closed state term in the signature of `p`.
pub fn spec_term(p: &Ptss, text: &str) -> Result<Term, CliError> {
    parse_closed_state(text, &p.signature).map_err(|d| CliError::Usage(format!("`{text}`: {d}")))
}

/// A state of a `.pts` file, written as in the file.
pub fn pts_term(text: &str) -> Result<Term, CliError> {
    let pts = parse_pts(&format!("state {text}\n")).map_err(|ds| CliError::Usage(format!("`{text}`: {}", ds[0])))?;
    Ok(pts.states()[0].clone())
}

/// The nullary state operators of the signature.
pub fn constants(p: &Ptss) -> Vec<Term> {
    p.signature
        .state_ops
        .iter()
        .filter(|f| f.arg_sorts.is_empty() && f.result == Sort::State && f.lifted_of.is_none())
        .map(|f| Term::constant(&f.name))
        .collect()
}

/// Roots are the `--root` terms, then `extra`; without either, the constants.
pub fn domain_bound(p: &Ptss, args: &BoundArgs, extra: &[Term]) -> Result<DomainBound, CliError> {
    let mut roots = args.roots.iter().map(|r| spec_term(p, r)).collect::<Result<Vec<_>, _>>()?;
    roots.extend(extra.iter().cloned());
    if roots.is_empty() {
        roots = constants(p);
    }
    let mut seen = std::collections::BTreeSet::new();
    roots.retain(|r| seen.insert(r.clone()));
    Ok(DomainBound {
        roots,
        max_depth: args.max_depth,
        max_states: args.max_states,
        max_iterations: args.max_iterations,
    })
}

fn stable_model_cmd(p: &Ptss, args: &BoundArgs, json: bool) -> Result<Outcome, CliError> {
    let bound = domain_bound(p, args, &[])?;
    let (complete, m) = is_complete(p, &bound)?;
    let code = if complete { EXIT_YES } else { EXIT_NO };
    let show = |set: &mut dyn Iterator<Item = &ptss_core::model::Transition>| set.map(|t| t.to_string()).collect::<Vec<_>>();
    let ct = show(&mut m.ct.iter());
    let unknown = show(&mut m.unknown());
    let out = if json {
        pretty(&json!({
            "complete": complete,
            "iterations": m.iterations,
            "domain": m.domain.iter().map(render_term).collect::<Vec<_>>(),
            "certain": ct,
            "unknown": unknown,
        }))
    } else {
        let mut s = format!(
            "domain: {} terms\niterations: {}\ncomplete: {}\ncertain ({}):\n",
            m.domain.len(),
            m.iterations,
            if complete { "yes" } else { "no" },
            ct.len()
        );
        for t in &ct {
            s.push_str(&format!("  {t}\n"));
        }
        s.push_str(&format!("unknown ({}):\n", unknown.len()));
        for t in &unknown {
            s.push_str(&format!("  {t}\n"));
        }
        s
    };
    Ok(Outcome::ok(code, out))
}

/// The PTS behind `file` with the two compared states, if given.
pub fn system(file: &Path, bound: &BoundArgs, states: &[String]) -> Result<(Pts, Vec<Term>), CliError> {
    if is_pts_file(file) {
        let pts = load_pts(file)?;
        let terms = states.iter().map(|s| pts_term(s)).collect::<Result<Vec<_>, _>>()?;
        for (t, name) in terms.iter().zip(states) {
            if !pts.contains(t) {
                return Err(CliError::Usage(format!("{name} is not a state of {}", file.display())));
            }
        }
        Ok((pts, terms))
    } else {
        let p = load_spec(file)?;
        let terms = states.iter().map(|s| spec_term(&p, s)).collect::<Result<Vec<_>, _>>()?;
        let pts = reachable_pts(&p, &domain_bound(&p, bound, &terms)?)?;
        Ok((pts, terms))
    }
}

fn bisim_cmd(file: &Path, kind: KindArg, bound: &BoundArgs, states: &[String], json: bool) -> Result<Outcome, CliError> {
    if states.len() == 1 {
        return Err(CliError::Usage("give two states to compare, or none for the partition".into()));
    }
    let (pts, terms) = system(file, bound, states)?;
    if terms.is_empty() {
        if kind == KindArg::Rooted {
            return Err(CliError::Usage("the rooted check needs two states".into()));
        }
        let r = if kind == KindArg::Pbranching {
            prob_branching_bisim(&pts)
        } else {
            branching_bisim(&pts)
        };
        let classes: Vec<Vec<String>> = r
            .relation
            .classes()
            .iter()
            .map(|c| c.iter().map(render_term).collect())
            .collect();
        let out = if json {
            pretty(&json!({ "kind": kind_name(kind), "classes": classes }))
        } else {
            classes.iter().map(|c| format!("{{ {} }}\n", c.join(", "))).collect()
        };
        return Ok(Outcome::ok(EXIT_YES, out));
    }
    let (s, t) = (&terms[0], &terms[1]);
    let (related, witness) = decide(&pts, kind, s, t)?;
    let code = if related { EXIT_YES } else { EXIT_NO };
    let out = if json {
        pretty(&json!({
            "kind": kind_name(kind),
            "left": render_term(s),
            "right": render_term(t),
            "related": related,
            "witness": witness,
        }))
    } else {
        let mut o = format!("{}\n", if related { "YES" } else { "NO" });
        if let Some(w) = &witness {
            o.push_str(&format!("witness: {} --{}-> {}\n", w.source, w.label, w.target));
        }
        o
    };
    Ok(Outcome::ok(code, out))
}

/// Whether `s` and `t` are related, with a distinguishing step otherwise.
pub fn decide(pts: &Pts, kind: KindArg, s: &Term, t: &Term) -> Result<(bool, Option<Witness>), CliError> {
    for x in [s, t] {
        if !pts.contains(x) {
            return Err(BisimError::NotAState(render_term(x)).into());
        }
    }
    let r = match kind {
        KindArg::Rooted => {
            let w = ptss_core::bisim::rooted_branching_witness(pts, s, t)?;
            return Ok((w.is_none(), w));
        }
        KindArg::Branching => branching_bisim(pts),
        KindArg::Pbranching => prob_branching_bisim(pts),
    };
    if r.related(s, t) {
        Ok((true, None))
    } else {
        Ok((false, r.witness(s, t).cloned()))
    }
}

pub fn kind_name(k: KindArg) -> &'static str {
    match k {
        KindArg::Branching => "branching",
        KindArg::Pbranching => "pbranching",
        KindArg::Rooted => "rooted",
    }
}

/// Non-empty lines that are not `#` comments, with their line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn probe_cmd(
    spec: &Path,
    pairs: &Path,
    contexts: &Path,
    kind: KindArg,
    args: &BoundArgs,
    json: bool,
) -> Result<Outcome, CliError> {
    let p = load_spec(spec)?;
    let bad = |path: &Path, n: usize, msg: String| CliError::Usage(format!("{}:{n}: {msg}", path.display()));
    let mut pair_terms = Vec::new();
    for (n, line) in content_lines(&read(pairs)?) {
        let (u, v) = line
            .split_once(';')
            .ok_or_else(|| bad(pairs, n, "expected `u ; v`".into()))?;
        let u = spec_term(&p, u.trim()).map_err(|e| bad(pairs, n, e.to_string()))?;
        let v = spec_term(&p, v.trim()).map_err(|e| bad(pairs, n, e.to_string()))?;
        pair_terms.push((u, v));
    }
    let mut ctxs = Vec::new();
    for (n, line) in content_lines(&read(contexts)?) {
        ctxs.push(parse_context(line, &p.signature).map_err(|d| bad(contexts, n, d.to_string()))?);
    }
    let bound = domain_bound(&p, args, &[])?;
    let found = pool()?.install(|| {
        ctxs.par_iter()
            .map(|c| congruence_probe(&p, &pair_terms, std::slice::from_ref(c), &bound, kind.probe_kind()))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let found: Vec<_> = found.into_iter().flatten().collect();
    let code = if found.is_empty() { EXIT_YES } else { EXIT_NO };
    let out = if json {
        pretty(&json!({
            "kind": kind_name(kind),
            "checked": pair_terms.len() * ctxs.len(),
            "violations": found,
        }))
    } else {
        let mut o = format!(
            "checked {} instances, {} violations\n",
            pair_terms.len() * ctxs.len(),
            found.len()
        );
        for v in &found {
            o.push_str(&format!("  {} : {} vs {}\n", v.context, v.left, v.right));
        }
        o
    };
    Ok(Outcome::ok(code, out))
}

pub fn format_json(r: &FormatReport) -> Value {
    json!({
        "overall": if r.overall { "pass" } else { "fail" },
        "wildness": r.wildness.0.iter().map(|(p, w)| json!({ "op": p.op, "arg": p.arg, "wildness": w })).collect::<Vec<_>>(),
        "patience": r.patience.iter().map(|(p, rule)| json!({ "op": p.op, "arg": p.arg, "rule": rule })).collect::<Vec<_>>(),
        "rules": r.verdicts,
    })
}
