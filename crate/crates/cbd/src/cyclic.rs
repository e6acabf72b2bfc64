//! Closed-form contextuality criterion for rank-3 cyclic systems.
//!
//! For a consistently connected system of three dichotomous contents
//! measured pairwise in a triangle of contexts, contextuality is decided
//! by the Suppes-Zanotti expression: the maximum, over sign patterns with
//! an odd number of minuses, of `±e1 ± e2 ± e3` on the three context
//! correlations. The system is contextual exactly when that maximum
//! exceeds 1. Higher cyclic ranks and inconsistently connected systems
//! have no closed form here and route to the coupling LP.

use crate::rational::Rational;
use crate::system::{ContentId, ContextId, System};

/// The three context correlations of a rank-3 cyclic system, together
/// with the cycle labeling they were read from: `e1 = <q1 q2>` in `c1`,
/// `e2 = <q2 q3>` in `c2`, `e3 = <q3 q1>` in `c3`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cyclic3View {
    pub contents: [ContentId; 3],
    pub contexts: [ContextId; 3],
    pub e1: Rational,
    pub e2: Rational,
    pub e3: Rational,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum CyclicError {
    #[error("system is not a rank-3 cyclic system; use the general coupling analysis instead")]
    NotCyclic3,
    #[error(
        "system is not consistently connected, the closed-form criterion \
         does not apply; use the general coupling analysis instead"
    )]
    InconsistentlyConnected,
}

/// Detects the rank-3 cyclic shape structurally (labels play no role):
/// three contents, three contexts, every context holding exactly two
/// contents, every content measured in exactly two contexts. Those counts
/// force the context graph to be a triangle. Returns the correlation view
/// read along the cycle, starting from the lexicographically smallest
/// content and its smallest context.
pub fn is_cyclic3(system: &System) -> Option<Cyclic3View> {
    if system.contents().len() != 3 || system.contexts().len() != 3 {
        return None;
    }
    if system.contexts().iter().any(|d| d.contents.len() != 2) {
        return None;
    }
    if system.connections().values().any(|ctxs| ctxs.len() != 2) {
        return None;
    }

    let q1 = system.contents()[0].clone();
    let c1 = system.connections()[&q1]
        .iter()
        .next()
        .expect("content q1 has two contexts")
        .clone();
    let other_content = |ctx: &ContextId, not: &ContentId| -> ContentId {
        system
            .context(ctx)
            .expect("context comes from the system")
            .contents
            .iter()
            .find(|q| *q != not)
            .expect("cyclic contexts hold two distinct contents")
            .clone()
    };
    let other_context = |q: &ContentId, not: &ContextId| -> ContextId {
        system.connections()[q]
            .iter()
            .find(|c| *c != not)
            .expect("cyclic contents appear in two contexts")
            .clone()
    };

    let q2 = other_content(&c1, &q1);
    let c2 = other_context(&q2, &c1);
    let q3 = other_content(&c2, &q2);
    let c3 = other_context(&q3, &c2);
    // The cycle must close on q1; anything else is not the cyclic shape.
    if other_content(&c3, &q3) != q1 || other_context(&q1, &c1) != c3 {
        return None;
    }

    let e1 = system.correlation(&c1, &q1, &q2).expect("cycle is in the system");
    let e2 = system.correlation(&c2, &q2, &q3).expect("cycle is in the system");
    let e3 = system.correlation(&c3, &q3, &q1).expect("cycle is in the system");
    Some(Cyclic3View {
        contents: [q1, q2, q3],
        contexts: [c1, c2, c3],
        e1,
        e2,
        e3,
    })
}

/// Maximum of `±e1 ± e2 ± e3` over the four sign patterns with an odd
/// number of minuses.
pub fn suppes_zanotti_value(view: &Cyclic3View) -> Rational {
    const ODD_MINUS_PATTERNS: [[i64; 3]; 4] =
        [[-1, 1, 1], [1, -1, 1], [1, 1, -1], [-1, -1, -1]];
    ODD_MINUS_PATTERNS
        .iter()
        .map(|signs| {
            &(&Rational::from_integer(signs[0]) * &view.e1)
                + &(&(&Rational::from_integer(signs[1]) * &view.e2)
                    + &(&Rational::from_integer(signs[2]) * &view.e3))
        })
        .max()
        .expect("four patterns")
}

/// Closed-form verdict for consistently connected rank-3 cyclic systems:
/// contextual iff the Suppes-Zanotti value exceeds 1.
pub fn cyclic3_contextual(system: &System) -> Result<bool, CyclicError> {
    let view = is_cyclic3(system).ok_or(CyclicError::NotCyclic3)?;
    let (consistent, _) = system.is_consistently_connected();
    if !consistent {
        return Err(CyclicError::InconsistentlyConnected);
    }
    Ok(suppes_zanotti_value(&view) > Rational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;
    use crate::system::{ContextDistribution, Sign};
    use crate::testkit::{
        anticorrelated_cyclic3, correlated_cyclic3, cyclic3_with_correlations,
        inconsistent_cyclic3, pair_context, prbox_cyclic4,
    };

    fn view(e1: Rational, e2: Rational, e3: Rational) -> Cyclic3View {
        is_cyclic3(&cyclic3_with_correlations(e1, e2, e3)).expect("cyclic-3 shape")
    }

    #[test]
    fn detects_the_canonical_shape() {
        let v = is_cyclic3(&anticorrelated_cyclic3()).expect("triangle shape");
        assert_eq!(v.e1, rat!(-1));
        assert_eq!(v.e2, rat!(-1));
        assert_eq!(v.e3, rat!(-1));
    }

    #[test]
    fn detection_is_structural_not_label_based() {
        let system = System::new(vec![
            pair_context("evening", "temperature", "humidity", rat!(1, 3)),
            pair_context("morning", "humidity", "pressure", rat!(-1, 5)),
            pair_context("noon", "pressure", "temperature", rat!(0)),
        ])
        .unwrap();
        let v = is_cyclic3(&system).expect("triangle shape under any labels");
        // Cycle starts at the smallest content label.
        assert_eq!(v.contents[0], "humidity".into());
    }

    #[test]
    fn rejects_other_shapes() {
        assert!(is_cyclic3(&prbox_cyclic4()).is_none());
        let single = System::new(vec![pair_context("c", "a", "b", rat!(0))]).unwrap();
        assert!(is_cyclic3(&single).is_none());
        // Three contexts over three contents, but the hub content appears
        // in all three contexts instead of two: not a cycle.
        let star = System::new(vec![
            pair_context("c1", "hub", "a", rat!(0)),
            pair_context("c2", "hub", "b", rat!(0)),
            pair_context("c3", "hub", "a", rat!(1, 2)),
        ])
        .unwrap();
        assert!(is_cyclic3(&star).is_none());
    }

    #[test]
    fn suppes_zanotti_values() {
        assert_eq!(suppes_zanotti_value(&view(rat!(-1), rat!(-1), rat!(-1))), rat!(3));
        assert_eq!(suppes_zanotti_value(&view(rat!(1), rat!(1), rat!(1))), rat!(1));
        assert_eq!(suppes_zanotti_value(&view(rat!(0), rat!(0), rat!(0))), rat!(0));
        assert_eq!(
            suppes_zanotti_value(&view(rat!(1, 2), rat!(-1, 2), rat!(1, 4))),
            rat!(5, 4)
        );
    }

    #[test]
    fn double_negation_leaves_the_value_unchanged() {
        // Base correlations (1/2, -1/3, 1/7); negating any two of them
        // permutes the odd-minus pattern set, so the maximum is unchanged.
        let value = suppes_zanotti_value(&view(rat!(1, 2), rat!(-1, 3), rat!(1, 7)));
        let flipped_e1_e2 = view(rat!(-1, 2), rat!(1, 3), rat!(1, 7));
        let flipped_e2_e3 = view(rat!(1, 2), rat!(1, 3), rat!(-1, 7));
        let flipped_e1_e3 = view(rat!(-1, 2), rat!(-1, 3), rat!(-1, 7));
        assert_eq!(suppes_zanotti_value(&flipped_e1_e2), value);
        assert_eq!(suppes_zanotti_value(&flipped_e2_e3), value);
        assert_eq!(suppes_zanotti_value(&flipped_e1_e3), value);
    }

    #[test]
    fn verdicts_on_the_canonical_triples() {
        assert_eq!(cyclic3_contextual(&anticorrelated_cyclic3()), Ok(true));
        assert_eq!(cyclic3_contextual(&correlated_cyclic3()), Ok(false));
    }

    #[test]
    fn boundary_value_one_is_noncontextual() {
        // (1, 0, 0) gives a Suppes-Zanotti value of exactly 1; the strict
        // inequality must classify it as noncontextual.
        let system = cyclic3_with_correlations(rat!(1), rat!(0), rat!(0));
        assert_eq!(cyclic3_contextual(&system), Ok(false));
    }

    #[test]
    fn preconditions_route_to_the_lp() {
        assert_eq!(
            cyclic3_contextual(&inconsistent_cyclic3()),
            Err(CyclicError::InconsistentlyConnected)
        );
        assert_eq!(
            cyclic3_contextual(&prbox_cyclic4()),
            Err(CyclicError::NotCyclic3)
        );
    }

    #[test]
    fn joint_distributions_never_beat_the_bound() {
        // Any genuine joint pmf over three dichotomous variables keeps the
        // Suppes-Zanotti expression of its pairwise correlations at or
        // below 1. Sweep a grid of joints with denominator 8.
        let assignments: Vec<[Sign; 3]> = (0..8)
            .map(|code| {
                [
                    if code & 4 != 0 { Sign::Plus } else { Sign::Minus },
                    if code & 2 != 0 { Sign::Plus } else { Sign::Minus },
                    if code & 1 != 0 { Sign::Plus } else { Sign::Minus },
                ]
            })
            .collect();
        let mut checked = 0;
        // Compositions of 8 into at most 8 parts, coarse-sampled.
        for a in 0..=8i64 {
            for b in 0..=8 - a {
                for c in 0..=8 - a - b {
                    for d in [0, 8 - a - b - c] {
                        let rest = 8 - a - b - c - d;
                        let weights = [a, b, c, d, rest, 0, 0, 0];
                        let mut corr = [Rational::zero(), Rational::zero(), Rational::zero()];
                        for (w, signs) in weights.iter().zip(&assignments) {
                            if *w == 0 {
                                continue;
                            }
                            let p = rat!(*w, 8);
                            corr[0] += &p * &rat!((signs[0].value() * signs[1].value()).into());
                            corr[1] += &p * &rat!((signs[1].value() * signs[2].value()).into());
                            corr[2] += &p * &rat!((signs[2].value() * signs[0].value()).into());
                        }
                        let system = cyclic3_with_correlations(
                            corr[0].clone(),
                            corr[1].clone(),
                            corr[2].clone(),
                        );
                        let view = is_cyclic3(&system).unwrap();
                        assert!(suppes_zanotti_value(&view) <= rat!(1));
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 100);
    }
}
