use serde::Serialize;
use thiserror::Error;

use crate::bisim::{branching_bisim, prob_branching_bisim, rooted_branching_bisim, BisimError};
use crate::model::{reachable_pts, DomainBound, ModelError};
use crate::parser::{plug, render_term};
use crate::spec::Ptss;
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Rooted,
    Branching,
    #[serde(rename = "pbranching")]
    ProbBranching,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeViolation {
    pub context: String,
    pub left: String,
    pub right: String,
}

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bisim(#[from] BisimError),
}

/// For every context `C` and pair `(u, v)`, checks that `C[u]` and `C[v]`
/// are related by the chosen equivalence; returns the failures.
pub fn congruence_probe(
    p: &Ptss,
    pairs: &[(Term, Term)],
    contexts: &[Term],
    bound: &DomainBound,
    kind: ProbeKind,
) -> Result<Vec<ProbeViolation>, ProbeError> {
    let mut out = Vec::new();
    for c in contexts {
        for (u, v) in pairs {
            let (cu, cv) = (plug(c, u), plug(c, v));
            let mut b = bound.clone();
            b.roots = vec![cu.clone(), cv.clone()];
            let pts = reachable_pts(p, &b)?;
            let related = match kind {
                ProbeKind::Rooted => rooted_branching_bisim(&pts, &cu, &cv)?,
                ProbeKind::Branching => branching_bisim(&pts).related(&cu, &cv),
                ProbeKind::ProbBranching => prob_branching_bisim(&pts).related(&cu, &cv),
            };
            if !related {
                out.push(ProbeViolation {
                    context: render_term(c),
                    left: render_term(u),
                    right: render_term(v),
                });
            }
        }
    }
    Ok(out)
}
