//! Canonical small systems shared by the unit tests.

use crate::rational::Rational;
use crate::system::{ContextDistribution, Sign, System};

/// A two-content context with uniform marginals and the given product
/// expectation `e`: `Pr[++] = Pr[--] = (1+e)/4`, `Pr[+-] = Pr[-+] = (1-e)/4`.
pub fn pair_context(label: &str, q1: &str, q2: &str, e: Rational) -> ContextDistribution {
    let quarter = Rational::new(1, 4);
    let same = &(Rational::one() + &e) * &quarter;
    let diff = &(Rational::one() - &e) * &quarter;
    ContextDistribution::new(
        label,
        vec![q1.into(), q2.into()],
        vec![
            (vec![Sign::Plus, Sign::Plus], same.clone()),
            (vec![Sign::Plus, Sign::Minus], diff.clone()),
            (vec![Sign::Minus, Sign::Plus], diff),
            (vec![Sign::Minus, Sign::Minus], same),
        ],
    )
}

/// Rank-3 cyclic system on contents `q1,q2,q3` with contexts
/// `c1=(q1,q2)`, `c2=(q2,q3)`, `c3=(q3,q1)` and the given correlations.
pub fn cyclic3_with_correlations(e1: Rational, e2: Rational, e3: Rational) -> System {
    System::new(vec![
        pair_context("c1", "q1", "q2", e1),
        pair_context("c2", "q2", "q3", e2),
        pair_context("c3", "q3", "q1", e3),
    ])
    .expect("cyclic-3 construction is valid")
}

pub fn correlated_cyclic3() -> System {
    cyclic3_with_correlations(Rational::one(), Rational::one(), Rational::one())
}

pub fn anticorrelated_cyclic3() -> System {
    cyclic3_with_correlations(
        -Rational::one(),
        -Rational::one(),
        -Rational::one(),
    )
}

pub fn uniform_cyclic3() -> System {
    cyclic3_with_correlations(Rational::zero(), Rational::zero(), Rational::zero())
}

/// Rank-4 cyclic system with correlations `+1,+1,+1,-1` and uniform
/// marginals; the standard maximally contextual box.
pub fn prbox_cyclic4() -> System {
    System::new(vec![
        pair_context("c1", "q1", "q2", Rational::one()),
        pair_context("c2", "q2", "q3", Rational::one()),
        pair_context("c3", "q3", "q4", Rational::one()),
        pair_context("c4", "q4", "q1", -Rational::one()),
    ])
    .expect("cyclic-4 construction is valid")
}

/// Cyclic-3 system whose only consistency defect is `Pr[q1=+1]` being 1/2
/// in `c1` but 3/4 in `c3`.
pub fn inconsistent_cyclic3() -> System {
    let c3 = ContextDistribution::new(
        "c3",
        vec!["q3".into(), "q1".into()],
        vec![
            (vec![Sign::Plus, Sign::Plus], Rational::new(3, 8)),
            (vec![Sign::Plus, Sign::Minus], Rational::new(1, 8)),
            (vec![Sign::Minus, Sign::Plus], Rational::new(3, 8)),
            (vec![Sign::Minus, Sign::Minus], Rational::new(1, 8)),
        ],
    );
    System::new(vec![
        pair_context("c1", "q1", "q2", -Rational::one()),
        pair_context("c2", "q2", "q3", -Rational::one()),
        c3,
    ])
    .expect("inconsistent cyclic-3 construction is valid")
}
