//! Couplings of a system and the linear programs over them.
//!
//! A coupling is a single joint distribution over *all* slots of a system
//! whose restriction to each context reproduces that context's
//! distribution exactly. The set of couplings is a nonempty polytope: its
//! points are probability vectors over the `2^K` global assignments
//! (`K` = number of slots), cut out by one marginal equality per
//! context-assignment plus normalization.
//!
//! Contextuality questions become linear programs over this polytope. For
//! each *connection pair* (two contexts sharing a content) a coupling has
//! a probability that the two coupled variables agree; `delta` sums these
//! over all pairs. The system is noncontextual exactly when some coupling
//! pushes every pairwise agreement to its maximum possible value, i.e.
//! when `delta_max` reaches `delta0`, the sum of the per-pair maxima. The
//! difference `delta0 - delta_max` is the contextuality measure: zero for
//! noncontextual systems, positive otherwise. For consistently connected
//! systems `delta0` equals the number of pairs and the optimal coupling,
//! when the measure is zero, is an *identically connected* one (all
//! agreements hold with probability 1).

use std::collections::BTreeMap;
use std::fmt;

use crate::lp::{solve, LinearProgram, LpResult};
use crate::rational::Rational;
use crate::system::{Assignment, ConnectionPair, Sign, System};

/// Default ceiling on the slot count `K`; the LP has `2^K` columns.
pub const DEFAULT_MAX_SLOTS: usize = 16;

/// One assignment of signs to every slot of a system, in the system's
/// canonical slot order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct GlobalAssignment(Vec<Sign>);

impl GlobalAssignment {
    pub fn from_signs(signs: Vec<Sign>) -> Self {
        GlobalAssignment(signs)
    }

    pub fn signs(&self) -> &[Sign] {
        &self.0
    }

    /// Value at a slot position in the owning system's slot order.
    pub fn value_at(&self, slot_index: usize) -> Sign {
        self.0[slot_index]
    }
}

/// Errors raised by coupling construction and analysis.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum CouplingError {
    #[error("system has {slots} slots, above the configured cap of {max_slots}")]
    Capacity { slots: usize, max_slots: usize },
    #[error("coupling/system slot mismatch: {0}")]
    SlotMismatch(String),
    #[error("{0} is not a probability (outside [0, 1])")]
    NotAProbability(Rational),
}

/// What the coupling LP should optimize.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CouplingObjective {
    /// Maximize the total connection-pair agreement probability.
    Delta,
    /// Zero objective; any feasible point will do.
    Feasibility,
}

/// A joint distribution over global assignments whose per-context
/// marginals reproduce the coupled system. Only atoms with nonzero
/// probability are stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Coupling {
    system: System,
    pmf: BTreeMap<GlobalAssignment, Rational>,
}

impl Coupling {
    /// Wraps an explicit pmf over the system's assignments. Only the shape
    /// is checked here; distribution laws are the business of
    /// [`verify_coupling`], so that near-misses can be represented and
    /// rejected there.
    pub fn from_pmf(
        system: System,
        pmf: impl IntoIterator<Item = (GlobalAssignment, Rational)>,
    ) -> Result<Coupling, CouplingError> {
        let k = system.slots().len();
        let mut map = BTreeMap::new();
        for (atom, p) in pmf {
            if atom.signs().len() != k {
                return Err(CouplingError::SlotMismatch(format!(
                    "atom has {} values for {} slots",
                    atom.signs().len(),
                    k
                )));
            }
            if !p.is_zero() {
                map.insert(atom, p);
            }
        }
        Ok(Coupling { system, pmf: map })
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    /// Atoms with nonzero probability, in canonical assignment order.
    pub fn pmf(&self) -> &BTreeMap<GlobalAssignment, Rational> {
        &self.pmf
    }

    pub fn total_mass(&self) -> Rational {
        self.pmf.values().sum()
    }

    /// Marginal distribution over an ordered list of slot positions.
    pub fn marginal(&self, slot_indices: &[usize]) -> BTreeMap<Assignment, Rational> {
        let mut out: BTreeMap<Assignment, Rational> = BTreeMap::new();
        for (atom, p) in &self.pmf {
            let key: Assignment = slot_indices.iter().map(|&i| atom.value_at(i)).collect();
            *out.entry(key).or_insert_with(Rational::zero) += p;
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// `Pr[the two coupled variables agree]` for every connection pair.
    /// The values sum to this coupling's delta.
    pub fn connection_equality_probs(&self) -> BTreeMap<ConnectionPair, Rational> {
        let mut out = BTreeMap::new();
        for pair in self.system.connection_pairs() {
            let i = self
                .system
                .slot_index(&pair.content, &pair.context_a)
                .expect("pair comes from the system");
            let j = self
                .system
                .slot_index(&pair.content, &pair.context_b)
                .expect("pair comes from the system");
            let p: Rational = self
                .pmf
                .iter()
                .filter(|(atom, _)| atom.value_at(i) == atom.value_at(j))
                .map(|(_, p)| p)
                .sum();
            out.insert(pair, p);
        }
        out
    }

    /// Total connection-pair agreement probability of this coupling.
    pub fn delta(&self) -> Rational {
        self.connection_equality_probs().values().sum()
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slots = self.system.slots();
        for (atom, p) in &self.pmf {
            let desc: Vec<String> = slots
                .iter()
                .zip(atom.signs())
                .map(|(s, v)| format!("{s}={v}"))
                .collect();
            writeln!(f, "  {}  {}", p, desc.join(" "))?;
        }
        Ok(())
    }
}

/// Full verdict for one system.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AnalysisResult {
    /// Maximum of delta over all couplings.
    pub delta_max: Rational,
    /// Sum over connection pairs of the maximal achievable agreement.
    pub delta0: Rational,
    /// `delta0 - delta_max`; zero exactly for noncontextual systems.
    pub measure: Rational,
    pub noncontextual: bool,
    /// A coupling attaining `delta_max`.
    pub witness: Coupling,
}

/// Analysis entry point carrying the capacity configuration.
#[derive(Clone, Copy, Debug)]
pub struct Analyzer {
    max_slots: usize,
}

impl Default for Analyzer {
    fn default() -> Self {
        Analyzer {
            max_slots: DEFAULT_MAX_SLOTS,
        }
    }
}

impl Analyzer {
    pub fn with_max_slots(max_slots: usize) -> Self {
        Analyzer { max_slots }
    }

    pub fn max_slots(&self) -> usize {
        self.max_slots
    }

    fn check_capacity(&self, system: &System) -> Result<usize, CouplingError> {
        let slots = system.slots().len();
        if slots > self.max_slots {
            Err(CouplingError::Capacity {
                slots,
                max_slots: self.max_slots,
            })
        } else {
            Ok(slots)
        }
    }

    /// All `2^K` global assignments in lexicographic order over the
    /// canonical slot order, `-1` before `+1`.
    pub fn enumerate_assignments(
        &self,
        system: &System,
    ) -> Result<Vec<GlobalAssignment>, CouplingError> {
        let k = self.check_capacity(system)?;
        let count: usize = 1 << k;
        let mut out = Vec::with_capacity(count);
        for code in 0..count {
            let signs: Vec<Sign> = (0..k)
                .map(|j| {
                    if code >> (k - 1 - j) & 1 == 1 {
                        Sign::Plus
                    } else {
                        Sign::Minus
                    }
                })
                .collect();
            out.push(GlobalAssignment(signs));
        }
        Ok(out)
    }

    /// Builds the coupling polytope as an LP: one probability variable per
    /// global assignment, one equality per context-assignment, and a
    /// normalization row. For [`CouplingObjective::Delta`] the coefficient
    /// of an assignment counts the connection pairs it satisfies.
    pub fn build_coupling_lp(
        &self,
        system: &System,
        objective: CouplingObjective,
    ) -> Result<LinearProgram, CouplingError> {
        let assignments = self.enumerate_assignments(system)?;
        let n = assignments.len();

        let mut constraints = Vec::new();
        let mut rhs = Vec::new();
        for dist in system.contexts() {
            let positions: Vec<usize> = dist
                .contents
                .iter()
                .map(|q| {
                    system
                        .slot_index(q, &dist.context)
                        .expect("context contents are slots")
                })
                .collect();
            for local in enumerate_local(positions.len()) {
                let mut row = vec![Rational::zero(); n];
                for (g, atom) in assignments.iter().enumerate() {
                    let matches = positions
                        .iter()
                        .zip(&local)
                        .all(|(&i, &v)| atom.value_at(i) == v);
                    if matches {
                        row[g] = Rational::one();
                    }
                }
                constraints.push(row);
                rhs.push(dist.prob(&local));
            }
        }
        constraints.push(vec![Rational::one(); n]);
        rhs.push(Rational::one());

        let pair_slots = pair_slot_indices(system);
        let objective = match objective {
            CouplingObjective::Feasibility => vec![Rational::zero(); n],
            CouplingObjective::Delta => assignments
                .iter()
                .map(|atom| {
                    let satisfied = pair_slots
                        .iter()
                        .filter(|(i, j)| atom.value_at(*i) == atom.value_at(*j))
                        .count();
                    Rational::from_integer(satisfied as i64)
                })
                .collect(),
        };

        Ok(LinearProgram {
            num_vars: n,
            objective,
            constraints,
            rhs,
        })
    }

    /// Exact maximum of delta over all couplings, with a witness attaining
    /// it. The witness is a vertex of the coupling polytope selected by
    /// the solver's deterministic pivot order; optimal witnesses are not
    /// unique in general.
    pub fn max_delta(&self, system: &System) -> Result<(Rational, Coupling), CouplingError> {
        let lp = self.build_coupling_lp(system, CouplingObjective::Delta)?;
        let assignments = self.enumerate_assignments(system)?;
        match solve(&lp).expect("coupling LP is well-formed by construction") {
            LpResult::Optimal { optimum, solution } => {
                let pmf = assignments.into_iter().zip(solution);
                let witness = Coupling::from_pmf(system.clone(), pmf)?;
                Ok((optimum, witness))
            }
            // The polytope of couplings is never empty (the independent
            // coupling lies in it) and lives inside the probability
            // simplex, so neither branch can be reached for a validated
            // system.
            other => unreachable!("coupling LP returned {other:?} for a valid system"),
        }
    }

    /// A coupling in which every connection pair agrees with probability
    /// 1, when one exists. Equivalent to `delta_max` hitting the number of
    /// pairs; inconsistently connected systems never qualify.
    pub fn identically_connected_coupling(
        &self,
        system: &System,
    ) -> Result<Option<Coupling>, CouplingError> {
        let n_pairs = system.connection_pairs().len();
        let (delta_max, witness) = self.max_delta(system)?;
        if delta_max == Rational::from_integer(n_pairs as i64) {
            Ok(Some(witness))
        } else {
            Ok(None)
        }
    }

    /// The product coupling: contexts are made mutually independent, each
    /// keeping its own joint distribution. It exists for every valid
    /// system, which is exactly why "realist" representations with
    /// context-dependent response functions never constrain anything.
    pub fn independent_coupling(&self, system: &System) -> Result<Coupling, CouplingError> {
        let k = self.check_capacity(system)?;
        let mut partial: Vec<(Vec<Option<Sign>>, Rational)> =
            vec![(vec![None; k], Rational::one())];
        for dist in system.contexts() {
            let positions: Vec<usize> = dist
                .contents
                .iter()
                .map(|q| {
                    system
                        .slot_index(q, &dist.context)
                        .expect("context contents are slots")
                })
                .collect();
            let mut next = Vec::with_capacity(partial.len() * dist.pmf.len());
            for (values, p) in &partial {
                for (assignment, pa) in &dist.pmf {
                    let mut values = values.clone();
                    for (&pos, &v) in positions.iter().zip(assignment) {
                        values[pos] = Some(v);
                    }
                    next.push((values, p * pa));
                }
            }
            partial = next;
        }
        let pmf = partial.into_iter().map(|(values, p)| {
            let signs: Vec<Sign> = values
                .into_iter()
                .map(|v| v.expect("every slot belongs to exactly one context"))
                .collect();
            (GlobalAssignment(signs), p)
        });
        Coupling::from_pmf(system.clone(), pmf)
    }

    /// Runs the whole analysis: `delta_max`, `delta0`, the measure
    /// `delta0 - delta_max`, the verdict, and the optimal witness.
    pub fn analyze(&self, system: &System) -> Result<AnalysisResult, CouplingError> {
        let (delta_max, witness) = self.max_delta(system)?;
        let delta0 = delta0(system);
        let measure = &delta0 - &delta_max;
        debug_assert!(!measure.is_negative(), "delta_max cannot exceed delta0");
        Ok(AnalysisResult {
            noncontextual: measure.is_zero(),
            delta_max,
            delta0,
            measure,
            witness,
        })
    }
}

/// Analysis with the default slot cap.
pub fn analyze(system: &System) -> Result<AnalysisResult, CouplingError> {
    Analyzer::default().analyze(system)
}

/// Maximal probability with which a coupling of two dichotomous variables
/// can make them agree, given their `Pr[+1]` values: `1 - |p1 - p2|`.
pub fn max_pair_equal_prob(p1: &Rational, p2: &Rational) -> Result<Rational, CouplingError> {
    for p in [p1, p2] {
        if !p.is_probability() {
            return Err(CouplingError::NotAProbability(p.clone()));
        }
    }
    Ok(Rational::one() - (p1 - p2).abs())
}

/// Sum over connection pairs of the maximal achievable agreement
/// probability. Equals the number of pairs when the system is
/// consistently connected.
pub fn delta0(system: &System) -> Rational {
    system
        .connection_pairs()
        .iter()
        .map(|pair| {
            let pa = system
                .context(&pair.context_a)
                .and_then(|d| d.prob_plus(&pair.content))
                .expect("pair comes from the system");
            let pb = system
                .context(&pair.context_b)
                .and_then(|d| d.prob_plus(&pair.content))
                .expect("pair comes from the system");
            max_pair_equal_prob(&pa, &pb).expect("marginals of a valid system are probabilities")
        })
        .sum()
}

/// True when the pmf is a genuine distribution whose restriction to each
/// context of `system` equals that context's distribution exactly.
pub fn verify_coupling(system: &System, coupling: &Coupling) -> Result<bool, CouplingError> {
    if coupling.system().slots() != system.slots() {
        return Err(CouplingError::SlotMismatch(format!(
            "coupling is over {} slots of a different system",
            coupling.system().slots().len()
        )));
    }
    if coupling.pmf.values().any(Rational::is_negative) {
        return Ok(false);
    }
    if coupling.total_mass() != Rational::one() {
        return Ok(false);
    }
    for dist in system.contexts() {
        let positions: Vec<usize> = dist
            .contents
            .iter()
            .map(|q| {
                system
                    .slot_index(q, &dist.context)
                    .expect("context contents are slots")
            })
            .collect();
        if coupling.marginal(&positions) != dist.pmf {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Slot index pairs of every connection pair, in pair order.
fn pair_slot_indices(system: &System) -> Vec<(usize, usize)> {
    system
        .connection_pairs()
        .iter()
        .map(|pair| {
            let i = system
                .slot_index(&pair.content, &pair.context_a)
                .expect("pair comes from the system");
            let j = system
                .slot_index(&pair.content, &pair.context_b)
                .expect("pair comes from the system");
            (i, j)
        })
        .collect()
}

/// All sign tuples of the given arity, lexicographic, `-1` first.
fn enumerate_local(arity: usize) -> Vec<Assignment> {
    let count: usize = 1 << arity;
    (0..count)
        .map(|code| {
            (0..arity)
                .map(|j| {
                    if code >> (arity - 1 - j) & 1 == 1 {
                        Sign::Plus
                    } else {
                        Sign::Minus
                    }
                })
                .collect()
        })
        .collect()
}
