//! Hidden-variable models with context-independent response functions.
//!
//! A model is a finite random variable `H` together with one response
//! function per content, so that reading off `(f_q(H))` for the contents
//! of each context reproduces that context's distribution. Such a model
//! exists exactly when the system has an identically connected coupling,
//! and the coupling itself is the most economical hidden variable: its
//! states are the content-value profiles. `extract` reads that model out
//! of a coupling, `realize` pushes a model forward into a system, and
//! `context_specific_hv` is the per-context construction that always
//! exists regardless of contextuality.

use std::collections::BTreeMap;
use std::fmt;

use crate::coupling::Coupling;
use crate::rational::Rational;
use crate::system::{
    Assignment, ConnectionPair, ContentId, ContextDistribution, ContextId, Sign, System,
    ValidationReport,
};

/// One value of the hidden variable: its probability and the response
/// `f_q` of every content at this value.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HiddenState {
    pub label: String,
    pub probability: Rational,
    pub responses: BTreeMap<ContentId, Sign>,
}

/// A finite hidden variable with deterministic, context-independent
/// response functions, stored extensionally (one row per hidden value).
///
/// Distinct states may carry identical response rows; that redundancy is
/// what lets an enlarged support absorb any extra per-content noise
/// source, so it is deliberately not collapsed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HiddenVariableModel {
    contents: Vec<ContentId>,
    states: Vec<HiddenState>,
}

/// The per-context specialization: a hidden variable for one context
/// only, with responses defined on that context's contents.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ContextHvModel {
    pub context: ContextId,
    pub states: Vec<HiddenState>,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum HvError {
    #[error(
        "coupling is not identically connected: {pair} agree with probability {probability}, not 1/1"
    )]
    NotIdenticallyConnected {
        pair: ConnectionPair,
        probability: Rational,
    },
    #[error("model has no response function for content {0}")]
    UnknownContent(ContentId),
    #[error("invalid hidden-variable model: {0}")]
    InvalidModel(String),
    #[error("layout does not form a valid system: {0}")]
    InvalidLayout(ValidationReport),
}

impl HiddenVariableModel {
    /// Validates and wraps a list of states: probabilities must be
    /// nonnegative and sum to 1, labels must be distinct, and every state
    /// must respond on the same nonempty content set.
    pub fn new(states: Vec<HiddenState>) -> Result<Self, HvError> {
        let first = states
            .first()
            .ok_or_else(|| HvError::InvalidModel("model has no states".into()))?;
        let contents: Vec<ContentId> = first.responses.keys().cloned().collect();
        if contents.is_empty() {
            return Err(HvError::InvalidModel("states respond to no contents".into()));
        }
        let mut labels = std::collections::BTreeSet::new();
        let mut mass = Rational::zero();
        for state in &states {
            if !labels.insert(state.label.clone()) {
                return Err(HvError::InvalidModel(format!(
                    "duplicate state label {:?}",
                    state.label
                )));
            }
            if state.probability.is_negative() {
                return Err(HvError::InvalidModel(format!(
                    "state {:?} has negative probability {}",
                    state.label, state.probability
                )));
            }
            let state_contents: Vec<ContentId> = state.responses.keys().cloned().collect();
            if state_contents != contents {
                return Err(HvError::InvalidModel(format!(
                    "state {:?} responds to a different content set",
                    state.label
                )));
            }
            mass += &state.probability;
        }
        if mass != Rational::one() {
            return Err(HvError::InvalidModel(format!(
                "state probabilities sum to {}, not 1/1",
                mass
            )));
        }
        Ok(HiddenVariableModel { contents, states })
    }

    /// Contents the response functions are defined on, sorted.
    pub fn contents(&self) -> &[ContentId] {
        &self.contents
    }

    pub fn states(&self) -> &[HiddenState] {
        &self.states
    }
}

impl fmt::Display for HiddenVariableModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for state in &self.states {
            let row: Vec<String> = self
                .contents
                .iter()
                .map(|q| format!("{}={}", q, state.responses[q]))
                .collect();
            writeln!(f, "  H={}  p={}  {}", state.label, state.probability, row.join(" "))?;
        }
        Ok(())
    }
}

/// Reads the hidden-variable model off an identically connected coupling.
///
/// Every positive atom assigns one value per content (slots sharing a
/// content agree on the support), so the atoms become the hidden states
/// and the response functions are plain projections. The support size is
/// therefore at most `2^|Q|`.
pub fn extract(coupling: &Coupling) -> Result<HiddenVariableModel, HvError> {
    let system = coupling.system();
    let equality_probs = coupling.connection_equality_probs();
    for (pair, probability) in &equality_probs {
        if *probability != Rational::one() {
            return Err(HvError::NotIdenticallyConnected {
                pair: pair.clone(),
                probability: probability.clone(),
            });
        }
    }

    let contents = system.contents().to_vec();
    // One representative slot per content; on the support all slots of a
    // connection carry the same value, so the choice does not matter.
    let representative: Vec<usize> = contents
        .iter()
        .map(|q| {
            let context = system.connections()[q]
                .iter()
                .next()
                .expect("every content has a context");
            system
                .slot_index(q, context)
                .expect("connection entries are slots")
        })
        .collect();

    let mut profiles: BTreeMap<Assignment, Rational> = BTreeMap::new();
    for (atom, p) in coupling.pmf() {
        let profile: Assignment = representative.iter().map(|&i| atom.value_at(i)).collect();
        *profiles.entry(profile).or_insert_with(Rational::zero) += p;
    }

    let states: Vec<HiddenState> = profiles
        .into_iter()
        .map(|(profile, probability)| HiddenState {
            label: profile_label(&profile),
            probability,
            responses: contents.iter().cloned().zip(profile).collect(),
        })
        .collect();
    HiddenVariableModel::new(states)
}

/// Pushes a model forward through a context layout: each context receives
/// the joint distribution of its contents' responses. The result is
/// consistently connected by construction, since response functions carry
/// no context index.
pub fn realize(
    model: &HiddenVariableModel,
    layout: &[(ContextId, Vec<ContentId>)],
) -> Result<System, HvError> {
    for (_, contents) in layout {
        for q in contents {
            if !model.contents.contains(q) {
                return Err(HvError::UnknownContent(q.clone()));
            }
        }
    }
    let contexts: Vec<ContextDistribution> = layout
        .iter()
        .map(|(context, contents)| {
            let mut pmf: BTreeMap<Assignment, Rational> = BTreeMap::new();
            for state in &model.states {
                let key: Assignment = contents.iter().map(|q| state.responses[q]).collect();
                *pmf.entry(key).or_insert_with(Rational::zero) += &state.probability;
            }
            ContextDistribution::new(context.clone(), contents.clone(), pmf)
        })
        .collect();
    System::new(contexts).map_err(HvError::InvalidLayout)
}

/// The always-available one-context construction: the context's own
/// distribution serves as the hidden variable and the responses are the
/// componentwise projections.
pub fn context_specific_hv(dist: &ContextDistribution) -> ContextHvModel {
    let states: Vec<HiddenState> = dist
        .pmf
        .iter()
        .map(|(assignment, p)| HiddenState {
            label: profile_label(assignment),
            probability: p.clone(),
            responses: dist.contents.iter().cloned().zip(assignment.iter().copied()).collect(),
        })
        .collect();
    ContextHvModel {
        context: dist.context.clone(),
        states,
    }
}

fn profile_label(profile: &[Sign]) -> String {
    profile
        .iter()
        .map(|s| match s {
            Sign::Plus => '+',
            Sign::Minus => '-',
        })
        .collect()
}
