//! Systems of dichotomous random variables indexed by content and context.
//!
//! A *content* is the property being measured, a *context* the condition
//! under which a set of contents is measured jointly. Each context carries
//! a joint distribution over `{-1,+1}` assignments of its contents; the
//! pair of a content and a context it belongs to is a *slot*. Variables in
//! different contexts are stochastically unrelated until coupled, so the
//! system itself is just the family of per-context distributions plus the
//! bookkeeping that says which slots share a content.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

/// One of the two values a dichotomous variable can take. `Minus` orders
/// before `Plus`, which fixes the canonical enumeration order everywhere.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    pub fn from_value(v: i8) -> Option<Sign> {
        match v {
            -1 => Some(Sign::Minus),
            1 => Some(Sign::Plus),
            _ => None,
        }
    }

    pub const BOTH: [Sign; 2] = [Sign::Minus, Sign::Plus];
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Minus => write!(f, "-1"),
            Sign::Plus => write!(f, "+1"),
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(match self {
            Sign::Minus => "-1",
            Sign::Plus => "+1",
        })
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        match s.as_str() {
            "-1" => Ok(Sign::Minus),
            "+1" => Ok(Sign::Plus),
            other => Err(serde::de::Error::custom(format!(
                "expected \"+1\" or \"-1\", found {other:?}"
            ))),
        }
    }
}

/// A joint assignment of signs to an ordered list of contents.
pub type Assignment = Vec<Sign>;

macro_rules! label_newtype {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:?}", self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

label_newtype!(
    /// Label of a measured property (the first index of a variable).
    ContentId
);
label_newtype!(
    /// Label of a measurement condition (the second index of a variable).
    ContextId
);

/// A single random variable's position in a system: content `q` measured
/// in context `c`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Slot {
    pub content: ContentId,
    pub context: ContextId,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.content, self.context)
    }
}

/// An unordered pair of contexts sharing a content. The two context labels
/// are kept sorted so each pair is represented exactly once.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ConnectionPair {
    pub content: ContentId,
    pub context_a: ContextId,
    pub context_b: ContextId,
}

impl ConnectionPair {
    pub fn new(content: ContentId, a: ContextId, b: ContextId) -> Self {
        let (context_a, context_b) = if a <= b { (a, b) } else { (b, a) };
        ConnectionPair {
            content,
            context_a,
            context_b,
        }
    }
}

impl fmt::Display for ConnectionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {} vs {}", self.content, self.context_a, self.context_b)
    }
}

/// The joint distribution of one context's variables.
///
/// Assignments are tuples over the context's contents in declaration
/// order. Entries with probability zero are not stored; a missing
/// assignment means probability zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ContextDistribution {
    pub context: ContextId,
    pub contents: Vec<ContentId>,
    pub pmf: BTreeMap<Assignment, Rational>,
}

impl ContextDistribution {
    /// Builds a distribution, dropping explicit zero entries so that equal
    /// distributions compare equal.
    pub fn new(
        context: impl Into<ContextId>,
        contents: Vec<ContentId>,
        entries: impl IntoIterator<Item = (Assignment, Rational)>,
    ) -> Self {
        let pmf = entries
            .into_iter()
            .filter(|(_, p)| !p.is_zero())
            .collect();
        ContextDistribution {
            context: context.into(),
            contents,
            pmf,
        }
    }

    pub fn arity(&self) -> usize {
        self.contents.len()
    }

    /// Probability of one assignment; zero when absent.
    pub fn prob(&self, assignment: &[Sign]) -> Rational {
        self.pmf.get(assignment).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total_mass(&self) -> Rational {
        self.pmf.values().sum()
    }

    fn content_position(&self, q: &ContentId) -> Option<usize> {
        self.contents.iter().position(|c| c == q)
    }

    /// Marginal over an ordered subset of this context's contents, by
    /// direct summation.
    pub fn marginal(&self, subset: &[ContentId]) -> Result<BTreeMap<Assignment, Rational>, SystemError> {
        if subset.is_empty() {
            return Err(SystemError::EmptyMarginalSubset {
                context: self.context.clone(),
            });
        }
        let mut positions = Vec::with_capacity(subset.len());
        let mut seen = BTreeSet::new();
        for q in subset {
            let pos = self.content_position(q).ok_or_else(|| SystemError::ContentNotInContext {
                content: q.clone(),
                context: self.context.clone(),
            })?;
            if !seen.insert(pos) {
                return Err(SystemError::DuplicateMarginalContent { content: q.clone() });
            }
            positions.push(pos);
        }
        let mut out: BTreeMap<Assignment, Rational> = BTreeMap::new();
        for (assignment, p) in &self.pmf {
            let key: Assignment = positions.iter().map(|&i| assignment[i]).collect();
            *out.entry(key).or_insert_with(Rational::zero) += p;
        }
        out.retain(|_, p| !p.is_zero());
        Ok(out)
    }

    /// `Pr[variable at content q = +1]` within this context.
    pub fn prob_plus(&self, q: &ContentId) -> Result<Rational, SystemError> {
        let m = self.marginal(std::slice::from_ref(q))?;
        Ok(m.get(&vec![Sign::Plus]).cloned().unwrap_or_else(Rational::zero))
    }

    /// Product expectation of two distinct contents in this context.
    pub fn correlation(&self, q1: &ContentId, q2: &ContentId) -> Result<Rational, SystemError> {
        if q1 == q2 {
            return Err(SystemError::DuplicateMarginalContent { content: q1.clone() });
        }
        let i = self.content_position(q1).ok_or_else(|| SystemError::ContentNotInContext {
            content: q1.clone(),
            context: self.context.clone(),
        })?;
        let j = self.content_position(q2).ok_or_else(|| SystemError::ContentNotInContext {
            content: q2.clone(),
            context: self.context.clone(),
        })?;
        let mut sum = Rational::zero();
        for (assignment, p) in &self.pmf {
            let prod = i64::from(assignment[i].value() * assignment[j].value());
            sum += &Rational::from_integer(prod) * p;
        }
        Ok(sum)
    }
}

/// One invariant violation found while checking a would-be system.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum Violation {
    #[error("system declares no contexts")]
    EmptySystem,
    #[error("context label {0:?} is declared more than once")]
    DuplicateContext(ContextId),
    #[error("context {0} has an empty label")]
    EmptyContextLabel(usize),
    #[error("context {context} declares no contents")]
    EmptyContext { context: ContextId },
    #[error("context {context} has an empty content label")]
    EmptyContentLabel { context: ContextId },
    #[error("content {content} appears more than once in context {context}")]
    DuplicateContent { content: ContentId, context: ContextId },
    #[error("context {context}: assignment has {got} signs for {expected} contents")]
    WrongArity {
        context: ContextId,
        expected: usize,
        got: usize,
    },
    #[error("context {context}: probability {value} of assignment is negative")]
    NegativeProbability { context: ContextId, value: Rational },
    #[error("context {context}: probabilities sum to {sum}, not 1/1")]
    MassNotOne { context: ContextId, sum: Rational },
    #[error("context {context} uses content {content}, which is not declared")]
    UndeclaredContent { content: ContentId, context: ContextId },
    #[error("content {content} is declared but appears in no context")]
    UnusedContent { content: ContentId },
}

/// Everything wrong with a candidate system; empty means valid.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Lookup and precondition errors on an already-valid system.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum SystemError {
    #[error("unknown context {0}")]
    UnknownContext(ContextId),
    #[error("content {content} is not measured in context {context}")]
    ContentNotInContext { content: ContentId, context: ContextId },
    #[error("content {content} listed twice in a marginal request")]
    DuplicateMarginalContent { content: ContentId },
    #[error("marginal requested over an empty content set in context {context}")]
    EmptyMarginalSubset { context: ContextId },
}

/// Checks every invariant of a candidate context list and reports all
/// violations rather than stopping at the first.
pub fn validate(contexts: &[ContextDistribution]) -> ValidationReport {
    let mut violations = Vec::new();
    if contexts.is_empty() {
        violations.push(Violation::EmptySystem);
    }
    let mut seen_contexts = BTreeSet::new();
    for (i, dist) in contexts.iter().enumerate() {
        if dist.context.as_str().is_empty() {
            violations.push(Violation::EmptyContextLabel(i));
        }
        if !seen_contexts.insert(dist.context.clone()) {
            violations.push(Violation::DuplicateContext(dist.context.clone()));
        }
        if dist.contents.is_empty() {
            violations.push(Violation::EmptyContext {
                context: dist.context.clone(),
            });
        }
        let mut seen_contents = BTreeSet::new();
        for q in &dist.contents {
            if q.as_str().is_empty() {
                violations.push(Violation::EmptyContentLabel {
                    context: dist.context.clone(),
                });
            }
            if !seen_contents.insert(q.clone()) {
                violations.push(Violation::DuplicateContent {
                    content: q.clone(),
                    context: dist.context.clone(),
                });
            }
        }
        let mut arity_ok = true;
        for (assignment, p) in &dist.pmf {
            if assignment.len() != dist.arity() {
                violations.push(Violation::WrongArity {
                    context: dist.context.clone(),
                    expected: dist.arity(),
                    got: assignment.len(),
                });
                arity_ok = false;
            }
            if p.is_negative() {
                violations.push(Violation::NegativeProbability {
                    context: dist.context.clone(),
                    value: p.clone(),
                });
            }
        }
        if arity_ok {
            let sum = dist.total_mass();
            if sum != Rational::one() {
                violations.push(Violation::MassNotOne {
                    context: dist.context.clone(),
                    sum,
                });
            }
        }
    }
    ValidationReport { violations }
}

/// A validated system of contextually labelled dichotomous variables.
///
/// Construction runs the full validation, so holding a `System` certifies
/// that every context distribution is a genuine probability distribution.
/// The slot list is kept sorted by `(content, context)` label and fixes
/// the canonical coordinate order used by couplings.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct System {
    contexts: Vec<ContextDistribution>,
    contents: Vec<ContentId>,
    slots: Vec<Slot>,
    connections: BTreeMap<ContentId, BTreeSet<ContextId>>,
}

impl System {
    pub fn new(contexts: Vec<ContextDistribution>) -> Result<System, ValidationReport> {
        let report = validate(&contexts);
        if !report.is_valid() {
            return Err(report);
        }
        let mut connections: BTreeMap<ContentId, BTreeSet<ContextId>> = BTreeMap::new();
        for dist in &contexts {
            for q in &dist.contents {
                connections
                    .entry(q.clone())
                    .or_default()
                    .insert(dist.context.clone());
            }
        }
        let contents: Vec<ContentId> = connections.keys().cloned().collect();
        let mut slots: Vec<Slot> = connections
            .iter()
            .flat_map(|(q, ctxs)| {
                ctxs.iter().map(|c| Slot {
                    content: q.clone(),
                    context: c.clone(),
                })
            })
            .collect();
        slots.sort();
        Ok(System {
            contexts,
            contents,
            slots,
            connections,
        })
    }

    /// Context distributions in declaration order.
    pub fn contexts(&self) -> &[ContextDistribution] {
        &self.contexts
    }

    /// All contents, sorted by label.
    pub fn contents(&self) -> &[ContentId] {
        &self.contents
    }

    /// All slots, sorted by `(content, context)` label; this order indexes
    /// global assignments.
    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// Which contexts measure each content.
    pub fn connections(&self) -> &BTreeMap<ContentId, BTreeSet<ContextId>> {
        &self.connections
    }

    pub fn slot_index(&self, content: &ContentId, context: &ContextId) -> Option<usize> {
        self.slots
            .binary_search_by(|s| {
                (&s.content, &s.context).cmp(&(content, context))
            })
            .ok()
    }

    pub fn context(&self, c: &ContextId) -> Result<&ContextDistribution, SystemError> {
        self.contexts
            .iter()
            .find(|d| &d.context == c)
            .ok_or_else(|| SystemError::UnknownContext(c.clone()))
    }

    /// Every unordered pair of contexts sharing a content, sorted.
    pub fn connection_pairs(&self) -> Vec<ConnectionPair> {
        let mut pairs = Vec::new();
        for (q, ctxs) in &self.connections {
            let ctxs: Vec<&ContextId> = ctxs.iter().collect();
            for i in 0..ctxs.len() {
                for j in i + 1..ctxs.len() {
                    pairs.push(ConnectionPair::new(
                        q.clone(),
                        ctxs[i].clone(),
                        ctxs[j].clone(),
                    ));
                }
            }
        }
        pairs.sort();
        pairs
    }

    /// Exact marginal of a context distribution over an ordered subset of
    /// its contents.
    pub fn marginal(
        &self,
        c: &ContextId,
        subset: &[ContentId],
    ) -> Result<BTreeMap<Assignment, Rational>, SystemError> {
        self.context(c)?.marginal(subset)
    }

    /// `<R_q1 R_q2>` within one context.
    pub fn correlation(
        &self,
        c: &ContextId,
        q1: &ContentId,
        q2: &ContentId,
    ) -> Result<Rational, SystemError> {
        self.context(c)?.correlation(q1, q2)
    }
}

/// A connection pair whose two single-variable marginals differ, with both
/// `Pr[+1]` values.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConsistencyViolation {
    pub pair: ConnectionPair,
    pub prob_plus_a: Rational,
    pub prob_plus_b: Rational,
}

impl System {
    /// A system is consistently connected when every content has the same
    /// single-variable distribution in all contexts measuring it (for
    /// dichotomous variables, the same `Pr[+1]`).
    pub fn is_consistently_connected(&self) -> (bool, Vec<ConsistencyViolation>) {
        let mut violations = Vec::new();
        for pair in self.connection_pairs() {
            let pa = self
                .context(&pair.context_a)
                .and_then(|d| d.prob_plus(&pair.content))
                .expect("pair comes from the system's own connections");
            let pb = self
                .context(&pair.context_b)
                .and_then(|d| d.prob_plus(&pair.content))
                .expect("pair comes from the system's own connections");
            if pa != pb {
                violations.push(ConsistencyViolation {
                    pair,
                    prob_plus_a: pa,
                    prob_plus_b: pb,
                });
            }
        }
        (violations.is_empty(), violations)
    }

    /// The context graph: contexts are nodes, two contexts are adjacent
    /// when they share at least one content.
    pub fn context_graph(&self) -> ContextGraph {
        let nodes: Vec<ContextId> = {
            let mut n: Vec<ContextId> = self.contexts.iter().map(|d| d.context.clone()).collect();
            n.sort();
            n
        };
        let mut adjacency: BTreeMap<ContextId, BTreeSet<ContextId>> =
            nodes.iter().map(|c| (c.clone(), BTreeSet::new())).collect();
        for ctxs in self.connections.values() {
            let ctxs: Vec<&ContextId> = ctxs.iter().collect();
            for i in 0..ctxs.len() {
                for j in i + 1..ctxs.len() {
                    adjacency.get_mut(ctxs[i]).unwrap().insert(ctxs[j].clone());
                    adjacency.get_mut(ctxs[j]).unwrap().insert(ctxs[i].clone());
                }
            }
        }
        ContextGraph { nodes, adjacency }
    }

    /// Splits the system along the connected components of its context
    /// graph. Components are ordered by their smallest context label;
    /// inside a component, contexts keep their declaration order. The
    /// components partition the slot set.
    pub fn connected_components(&self) -> Vec<System> {
        let graph = self.context_graph();
        let mut assigned: BTreeMap<ContextId, usize> = BTreeMap::new();
        let mut component_count = 0;
        for start in &graph.nodes {
            if assigned.contains_key(start) {
                continue;
            }
            let id = component_count;
            component_count += 1;
            let mut stack = vec![start.clone()];
            while let Some(c) = stack.pop() {
                if assigned.insert(c.clone(), id).is_some() {
                    continue;
                }
                for next in &graph.adjacency[&c] {
                    if !assigned.contains_key(next) {
                        stack.push(next.clone());
                    }
                }
            }
        }
        (0..component_count)
            .map(|id| {
                let members: Vec<ContextDistribution> = self
                    .contexts
                    .iter()
                    .filter(|d| assigned[&d.context] == id)
                    .cloned()
                    .collect();
                System::new(members).expect("components of a valid system are valid")
            })
            .collect()
    }
}

/// Adjacency view of the context graph.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ContextGraph {
    pub nodes: Vec<ContextId>,
    pub adjacency: BTreeMap<ContextId, BTreeSet<ContextId>>,
}

impl ContextGraph {
    /// Undirected edges, each reported once with endpoints sorted.
    pub fn edges(&self) -> Vec<(ContextId, ContextId)> {
        let mut edges = Vec::new();
        for (a, nbrs) in &self.adjacency {
            for b in nbrs {
                if a < b {
                    edges.push((a.clone(), b.clone()));
                }
            }
        }
        edges
    }
}
