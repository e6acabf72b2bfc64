//! Exact contextuality analysis for systems of dichotomous random
//! variables, in the Contextuality-by-Default style.
//!
//! A *system* is a family of `{-1,+1}`-valued random variables indexed by
//! what is measured (the *content*) and the condition it is measured
//! under (the *context*). Variables sharing a context are jointly
//! distributed; variables in different contexts are not, even when they
//! share a content. A *coupling* imposes a single joint distribution on
//! all of them while reproducing every context distribution exactly, and
//! contextuality is a property of the set of couplings: the system is
//! noncontextual when some coupling makes same-content variables agree as
//! much as their marginals allow, contextual otherwise. The gap
//! `delta0 - delta_max` measures how far the system falls short.
//!
//! Everything is computed in exact rational arithmetic; verdicts sit on
//! strict inequalities and are decided by an exact simplex solver over the
//! coupling polytope, so there are no tolerances to tune. On top of the
//! verdict the crate offers the closed-form Suppes-Zanotti criterion for
//! rank-3 cyclic systems, explicit hidden-variable models extracted from
//! identically connected couplings, and canonical JSON file formats with
//! byte-reproducible reports.
//!
//! Start with [`System::new`] or [`io::SystemFile`], then [`analyze`]. The
//! `examples/` directory walks through every major capability; the `cbd`
//! binary exposes the same operations on files.

pub mod coupling;
pub mod cyclic;
pub mod hv;
pub mod io;
pub mod lp;
pub mod rational;
pub mod system;

#[cfg(test)]
pub(crate) mod testkit;

pub use coupling::{
    analyze, delta0, max_pair_equal_prob, verify_coupling, AnalysisResult, Analyzer, Coupling,
    CouplingError, CouplingObjective, GlobalAssignment, DEFAULT_MAX_SLOTS,
};
pub use cyclic::{cyclic3_contextual, is_cyclic3, suppes_zanotti_value, Cyclic3View, CyclicError};
pub use hv::{context_specific_hv, extract, realize, ContextHvModel, HiddenState, HiddenVariableModel, HvError};
pub use lp::{check_solution, solve, LinearProgram, LpError, LpResult};
pub use rational::Rational;
pub use system::{
    validate, Assignment, ConnectionPair, ConsistencyViolation, ContentId, ContextDistribution,
    ContextGraph, ContextId, Sign, Slot, System, SystemError, ValidationReport, Violation,
};
