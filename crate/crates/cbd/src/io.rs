//! File formats and reports.
//!
//! Everything on disk is JSON with rationals as `"num/den"` strings and
//! signs as `"+1"`/`"-1"`, so exactness survives the round trip. Writers
//! emit a canonical form: sorted labels, sorted map keys, fixed field
//! order, pretty-printed with a trailing newline. Identical inputs
//! therefore produce byte-identical outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::coupling::{analyze, AnalysisResult, Analyzer, Coupling, CouplingError};
use crate::cyclic::{is_cyclic3, suppes_zanotti_value};
use crate::hv::{HiddenState, HiddenVariableModel, HvError};
use crate::rational::Rational;
use crate::system::{
    validate, Assignment, ContentId, ContextDistribution, ContextId, Sign, System,
    ValidationReport, Violation,
};

/// A context assignment in its on-disk form, e.g. `"+1,-1"`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct AssignmentKey(pub Assignment);

impl Serialize for AssignmentKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        serializer.serialize_str(&parts.join(","))
    }
}

impl<'de> Deserialize<'de> for AssignmentKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        let mut signs = Vec::new();
        for part in raw.split(',') {
            match part {
                "+1" => signs.push(Sign::Plus),
                "-1" => signs.push(Sign::Minus),
                other => {
                    return Err(serde::de::Error::custom(format!(
                        "expected \"+1\" or \"-1\" in assignment, found {other:?}"
                    )))
                }
            }
        }
        Ok(AssignmentKey(signs))
    }
}

/// On-disk description of one context.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextFile {
    pub label: String,
    pub contents: Vec<String>,
    pub pmf: BTreeMap<AssignmentKey, Rational>,
}

/// On-disk description of a system: the declared content set and the
/// per-context distributions.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub contents: Vec<String>,
    pub contexts: Vec<ContextFile>,
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<SystemFile, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn distributions(&self) -> Vec<ContextDistribution> {
        self.contexts
            .iter()
            .map(|c| {
                ContextDistribution::new(
                    c.label.as_str(),
                    c.contents.iter().map(|q| q.as_str().into()).collect(),
                    c.pmf.iter().map(|(k, p)| (k.0.clone(), p.clone())),
                )
            })
            .collect()
    }

    /// Full validation: the system invariants plus the file-level checks
    /// that every used content is declared and every declared content is
    /// used.
    pub fn validate(&self) -> ValidationReport {
        let mut report = validate(&self.distributions());
        let declared: std::collections::BTreeSet<&str> =
            self.contents.iter().map(String::as_str).collect();
        let mut used = std::collections::BTreeSet::new();
        for ctx in &self.contexts {
            for q in &ctx.contents {
                used.insert(q.as_str());
                if !declared.contains(q.as_str()) {
                    report.violations.push(Violation::UndeclaredContent {
                        content: q.as_str().into(),
                        context: ctx.label.as_str().into(),
                    });
                }
            }
        }
        for q in &declared {
            if !used.contains(*q) {
                report.violations.push(Violation::UnusedContent {
                    content: (*q).into(),
                });
            }
        }
        report
    }

    pub fn to_system(&self) -> Result<System, ValidationReport> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(report);
        }
        System::new(self.distributions()).map_err(|r| r)
    }

    /// Canonical file form of a system: contents sorted, contexts sorted
    /// by label, probability-zero entries dropped.
    pub fn from_system(system: &System) -> SystemFile {
        let contents: Vec<String> = system.contents().iter().map(|q| q.0.clone()).collect();
        let mut contexts: Vec<ContextFile> = system
            .contexts()
            .iter()
            .map(|d| ContextFile {
                label: d.context.0.clone(),
                contents: d.contents.iter().map(|q| q.0.clone()).collect(),
                pmf: d
                    .pmf
                    .iter()
                    .map(|(a, p)| (AssignmentKey(a.clone()), p.clone()))
                    .collect(),
            })
            .collect();
        contexts.sort_by(|a, b| a.label.cmp(&b.label));
        SystemFile { contents, contexts }
    }
}

/// On-disk form of one hidden state.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HvStateFile {
    pub label: String,
    pub probability: Rational,
    pub responses: BTreeMap<String, Sign>,
}

/// On-disk form of a hidden-variable model: the content set and the
/// response table row of every hidden state.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HvModelFile {
    pub contents: Vec<String>,
    pub states: Vec<HvStateFile>,
}

impl HvModelFile {
    pub fn parse(text: &str) -> Result<HvModelFile, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_model(&self) -> Result<HiddenVariableModel, HvError> {
        let declared: Vec<ContentId> = self.contents.iter().map(|q| q.as_str().into()).collect();
        let states: Vec<HiddenState> = self
            .states
            .iter()
            .map(|s| HiddenState {
                label: s.label.clone(),
                probability: s.probability.clone(),
                responses: s
                    .responses
                    .iter()
                    .map(|(q, v)| (q.as_str().into(), *v))
                    .collect(),
            })
            .collect();
        let model = HiddenVariableModel::new(states)?;
        let mut sorted = declared;
        sorted.sort();
        if model.contents() != sorted.as_slice() {
            return Err(HvError::InvalidModel(
                "declared contents do not match the response tables".into(),
            ));
        }
        Ok(model)
    }

    pub fn from_model(model: &HiddenVariableModel) -> HvModelFile {
        HvModelFile {
            contents: model.contents().iter().map(|q| q.0.clone()).collect(),
            states: model
                .states()
                .iter()
                .map(|s| HvStateFile {
                    label: s.label.clone(),
                    probability: s.probability.clone(),
                    responses: s.responses.iter().map(|(q, v)| (q.0.clone(), *v)).collect(),
                })
                .collect(),
        }
    }
}

/// On-disk layout for realizing a model into a system: which contents
/// each context measures, in tuple order.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutFile {
    pub contexts: Vec<LayoutContextFile>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutContextFile {
    pub label: String,
    pub contents: Vec<String>,
}

impl LayoutFile {
    pub fn parse(text: &str) -> Result<LayoutFile, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_layout(&self) -> Vec<(ContextId, Vec<ContentId>)> {
        self.contexts
            .iter()
            .map(|c| {
                (
                    c.label.as_str().into(),
                    c.contents.iter().map(|q| q.as_str().into()).collect(),
                )
            })
            .collect()
    }

    pub fn from_system(system: &System) -> LayoutFile {
        LayoutFile {
            contexts: system
                .contexts()
                .iter()
                .map(|d| LayoutContextFile {
                    label: d.context.0.clone(),
                    contents: d.contents.iter().map(|q| q.0.clone()).collect(),
                })
                .collect(),
        }
    }
}

/// Serializes any file value in the canonical byte form: two-space
/// pretty-printing plus a trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("file types serialize");
    text.push('\n');
    text
}

/// One inconsistently connected pair in a report.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ConsistencyViolationReport {
    pub content: String,
    pub context_a: String,
    pub context_b: String,
    pub prob_plus_a: Rational,
    pub prob_plus_b: Rational,
}

/// Analysis of one connected component of the context graph.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ComponentReport {
    pub contexts: Vec<String>,
    pub verdict: String,
    pub delta_max: Rational,
    pub delta0: Rational,
    pub measure: Rational,
}

/// One atom of a witness coupling.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct WitnessAtom {
    pub assignment: BTreeMap<String, Sign>,
    pub probability: Rational,
}

/// A witness coupling rendered slot-by-slot, with its per-pair agreement
/// probabilities.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct WitnessReport {
    pub atoms: Vec<WitnessAtom>,
    pub connection_equality_probs: Vec<PairProbReport>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct PairProbReport {
    pub content: String,
    pub context_a: String,
    pub context_b: String,
    pub probability: Rational,
}

/// The machine-readable analysis report. Field order is the canonical
/// JSON order; every rational is a reduced `"num/den"` string.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Report {
    pub verdict: String,
    pub consistently_connected: bool,
    pub consistency_violations: Vec<ConsistencyViolationReport>,
    pub connection_pairs: usize,
    pub delta_max: Rational,
    pub delta0: Rational,
    pub measure: Rational,
    pub sz_value: Option<Rational>,
    pub components: Vec<ComponentReport>,
    pub witness: Option<WitnessReport>,
}

fn verdict_str(noncontextual: bool) -> String {
    if noncontextual {
        "noncontextual".to_string()
    } else {
        "contextual".to_string()
    }
}

fn witness_report(coupling: &Coupling) -> WitnessReport {
    let slots = coupling.system().slots();
    let atoms = coupling
        .pmf()
        .iter()
        .map(|(atom, p)| WitnessAtom {
            assignment: slots
                .iter()
                .zip(atom.signs())
                .map(|(s, &v)| (s.to_string(), v))
                .collect(),
            probability: p.clone(),
        })
        .collect();
    let connection_equality_probs = coupling
        .connection_equality_probs()
        .into_iter()
        .map(|(pair, probability)| PairProbReport {
            content: pair.content.0,
            context_a: pair.context_a.0,
            context_b: pair.context_b.0,
            probability,
        })
        .collect();
    WitnessReport {
        atoms,
        connection_equality_probs,
    }
}

impl Report {
    /// Runs the full analysis of a system and assembles the report. The
    /// component breakdown comes from analyzing each connected component
    /// of the context graph on its own.
    pub fn build(
        system: &System,
        analyzer: &Analyzer,
        include_witness: bool,
    ) -> Result<Report, CouplingError> {
        let result = analyzer.analyze(system)?;
        let (consistent, violations) = system.is_consistently_connected();
        let sz_value = if consistent {
            is_cyclic3(system).map(|view| suppes_zanotti_value(&view))
        } else {
            None
        };
        let components = system.connected_components();
        let component_reports: Vec<ComponentReport> = if components.len() == 1 {
            vec![component_report(&components[0], &result)]
        } else {
            components
                .iter()
                .map(|part| {
                    let part_result = analyzer.analyze(part)?;
                    Ok(component_report(part, &part_result))
                })
                .collect::<Result<_, CouplingError>>()?
        };
        Ok(Report {
            verdict: verdict_str(result.noncontextual),
            consistently_connected: consistent,
            consistency_violations: violations
                .into_iter()
                .map(|v| ConsistencyViolationReport {
                    content: v.pair.content.0,
                    context_a: v.pair.context_a.0,
                    context_b: v.pair.context_b.0,
                    prob_plus_a: v.prob_plus_a,
                    prob_plus_b: v.prob_plus_b,
                })
                .collect(),
            connection_pairs: system.connection_pairs().len(),
            delta_max: result.delta_max.clone(),
            delta0: result.delta0.clone(),
            measure: result.measure.clone(),
            sz_value,
            components: component_reports,
            witness: include_witness.then(|| witness_report(&result.witness)),
        })
    }

    /// Human-readable rendering; same content as the JSON form.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verdict:                {}", self.verdict);
        let _ = writeln!(
            out,
            "consistently connected: {}",
            if self.consistently_connected { "yes" } else { "no" }
        );
        for v in &self.consistency_violations {
            let _ = writeln!(
                out,
                "  mismatch: {} has Pr[+1] {} in {} but {} in {}",
                v.content, v.prob_plus_a, v.context_a, v.prob_plus_b, v.context_b
            );
        }
        let _ = writeln!(out, "connection pairs:       {}", self.connection_pairs);
        let _ = writeln!(out, "delta0:                 {}", self.delta0);
        let _ = writeln!(out, "delta_max:              {}", self.delta_max);
        let _ = writeln!(out, "measure:                {}", self.measure);
        if let Some(sz) = &self.sz_value {
            let _ = writeln!(out, "suppes-zanotti value:   {}", sz);
        }
        if self.components.len() > 1 {
            let _ = writeln!(out, "components:             {}", self.components.len());
            for (i, c) in self.components.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "  [{}] {{{}}}: {} (delta_max {}, delta0 {}, measure {})",
                    i + 1,
                    c.contexts.join(", "),
                    c.verdict,
                    c.delta_max,
                    c.delta0,
                    c.measure
                );
            }
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "witness atoms:");
            for atom in &w.atoms {
                let parts: Vec<String> = atom
                    .assignment
                    .iter()
                    .map(|(slot, sign)| format!("{slot}={sign}"))
                    .collect();
                let _ = writeln!(out, "  {}  {}", atom.probability, parts.join(" "));
            }
            let _ = writeln!(out, "witness agreement probabilities:");
            for p in &w.connection_equality_probs {
                let _ = writeln!(
                    out,
                    "  {} in {} vs {}: {}",
                    p.content, p.context_a, p.context_b, p.probability
                );
            }
        }
        out
    }
}

fn component_report(part: &System, result: &AnalysisResult) -> ComponentReport {
    ComponentReport {
        contexts: part.contexts().iter().map(|d| d.context.0.clone()).collect(),
        verdict: verdict_str(result.noncontextual),
        delta_max: result.delta_max.clone(),
        delta0: result.delta0.clone(),
        measure: result.measure.clone(),
    }
}

/// Convenience used by tests and examples: analyze with defaults and
/// build the canonical JSON report.
pub fn report_json(system: &System) -> Result<String, CouplingError> {
    let _ = analyze(system)?;
    let report = Report::build(system, &Analyzer::default(), false)?;
    Ok(canonical_json(&report))
}
