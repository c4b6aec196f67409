//! Probabilistic transition system specifications: two-sorted terms, their
//! distribution semantics, stable-model based transition systems, branching
//! bisimulations and rule-format checking.

pub mod bisim;
pub mod dist;
pub mod flow;
pub mod format;
pub mod lp;
pub mod model;
pub mod parser;
pub mod pts;
pub mod spec;
pub mod term;

pub use dist::{eval, Distribution};
pub use parser::{parse_spec, parse_term, render_ptss, render_term, Diagnostic};
pub use model::{reachable_pts, stable_model, DomainBound, ThreeValuedModel};
pub use pts::{parse_pts, Pts};
pub use spec::{Ptss, Rule};
pub use term::{Action, Rational, Signature, Sort, Term};
pub use bisim::{
    branching_bisim, branching_bisim_scheduler_oracle, prob_branching_bisim, rooted_branching_bisim,
    weak_combined_reachable, BisimError, Refinement, StateRelation, Witness,
};
pub use format::{check_format, congruence_probe, FormatReport, ProbeKind, ProbeViolation};
