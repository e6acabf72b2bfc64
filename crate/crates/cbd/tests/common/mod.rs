//! Independent oracles used by the integration and acceptance tests.
//!
//! Nothing here calls the simplex solver or the coupling LP builder: the
//! constraint data is rebuilt from the raw context distributions and the
//! optima come from exhaustive enumeration of basic feasible solutions,
//! so agreement with the production path is a genuine cross-check.

use std::collections::BTreeMap;

use itertools::Itertools;

use cbd::rational::Rational;
use cbd::system::{Sign, System};

/// Row-reduces `[matrix | rhs]` in place over the rationals and returns
/// the pivot columns. `None` signals an inconsistent system.
fn row_reduce(rows: &mut Vec<Vec<Rational>>) -> Option<Vec<usize>> {
    let height = rows.len();
    if height == 0 {
        return Some(vec![]);
    }
    let width = rows[0].len() - 1;
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        let Some(pivot_row) = (r..height).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, pivot_row);
        let piv = rows[r][col].clone();
        for v in rows[r].iter_mut() {
            *v /= &piv;
        }
        for i in 0..height {
            if i != r && !rows[i][col].is_zero() {
                let factor = rows[i][col].clone();
                let pivot = rows[r].clone();
                for (v, p) in rows[i].iter_mut().zip(&pivot) {
                    *v -= &factor * p;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == height {
            break;
        }
    }
    // Any leftover row must have reduced to 0 = 0.
    for row in rows.iter().skip(r) {
        if !row[width].is_zero() {
            return None;
        }
    }
    Some(pivots)
}

/// Solves `A_S x_S = b` for one column subset. Returns the values in
/// subset order when the system is consistent with a unique solution.
fn solve_subset(
    constraints: &[Vec<Rational>],
    rhs: &[Rational],
    subset: &[usize],
) -> Option<Vec<Rational>> {
    let mut rows: Vec<Vec<Rational>> = constraints
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r: Vec<Rational> = subset.iter().map(|&j| row[j].clone()).collect();
            r.push(b.clone());
            r
        })
        .collect();
    let pivots = row_reduce(&mut rows)?;
    if pivots.len() != subset.len() {
        return None; // dependent columns: no unique solution
    }
    let width = subset.len();
    let mut values = vec![Rational::zero(); width];
    for (i, &col) in pivots.iter().enumerate() {
        values[col] = rows[i][width].clone();
    }
    Some(values)
}

/// Brute-force LP maximization over `{x >= 0 : Ax = b}` by enumerating
/// every basic feasible solution. Returns `None` when no subset yields a
/// feasible point.
pub fn enumerate_bfs_max(
    objective: &[Rational],
    constraints: &[Vec<Rational>],
    rhs: &[Rational],
) -> Option<(Rational, Vec<Rational>)> {
    let n = objective.len();
    let rank = {
        let mut rows: Vec<Vec<Rational>> = constraints
            .iter()
            .zip(rhs)
            .map(|(row, b)| {
                let mut r = row.clone();
                r.push(b.clone());
                r
            })
            .collect();
        row_reduce(&mut rows)?.len()
    };
    let mut best: Option<(Rational, Vec<Rational>)> = None;
    for subset in (0..n).combinations(rank) {
        let Some(values) = solve_subset(constraints, rhs, &subset) else {
            continue;
        };
        if values.iter().any(Rational::is_negative) {
            continue;
        }
        let mut x = vec![Rational::zero(); n];
        for (&j, v) in subset.iter().zip(values) {
            x[j] = v;
        }
        let score: Rational = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, x));
        }
    }
    best
}

/// The maximal agreement probability of two dichotomous variables with
/// `Pr[+1]` values `p1` and `p2`, computed as the brute-force 4-atom
/// coupling LP: maximize `Pr[++] + Pr[--]` under both marginals.
pub fn oracle_max_pair_equal_prob(p1: &Rational, p2: &Rational) -> Rational {
    let one = Rational::one();
    let zero = Rational::zero();
    // Variables: x(++), x(+-), x(-+), x(--).
    let objective = vec![one.clone(), zero.clone(), zero.clone(), one.clone()];
    let constraints = vec![
        vec![one.clone(), one.clone(), zero.clone(), zero.clone()],
        vec![one.clone(), zero.clone(), one.clone(), zero.clone()],
        vec![one.clone(), one.clone(), one.clone(), one.clone()],
    ];
    let rhs = vec![p1.clone(), p2.clone(), one];
    enumerate_bfs_max(&objective, &constraints, &rhs)
        .expect("two-variable coupling polytope is nonempty")
        .0
}

/// Maximum total connection-pair agreement over all couplings of the
/// system, by vertex enumeration of the coupling polytope.
///
/// Atoms that extend a probability-zero context assignment are forced to
/// zero in every coupling and are eliminated up front; the remaining
/// polytope is enumerated basis by basis.
pub fn oracle_delta_max(system: &System) -> Rational {
    let slots = system.slots();
    let k = slots.len();
    assert!(k <= 16, "oracle atom space is 2^K");

    // Connection pairs, recomputed from the contexts.
    let mut by_content: BTreeMap<&cbd::system::ContentId, Vec<usize>> = BTreeMap::new();
    for (i, slot) in slots.iter().enumerate() {
        by_content.entry(&slot.content).or_default().push(i);
    }
    let mut pair_slots: Vec<(usize, usize)> = Vec::new();
    for slot_indices in by_content.values() {
        for a in 0..slot_indices.len() {
            for b in a + 1..slot_indices.len() {
                pair_slots.push((slot_indices[a], slot_indices[b]));
            }
        }
    }

    let sign_of = |atom: usize, slot: usize| -> Sign {
        if atom >> (k - 1 - slot) & 1 == 1 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    };

    // Forced-zero elimination: drop atoms whose restriction to some
    // context has probability zero.
    let context_positions: Vec<(usize, Vec<usize>)> = system
        .contexts()
        .iter()
        .enumerate()
        .map(|(ci, dist)| {
            let positions: Vec<usize> = dist
                .contents
                .iter()
                .map(|q| system.slot_index(q, &dist.context).unwrap())
                .collect();
            (ci, positions)
        })
        .collect();
    let atoms: Vec<usize> = (0..1usize << k)
        .filter(|&atom| {
            context_positions.iter().all(|(ci, positions)| {
                let local: Vec<Sign> = positions.iter().map(|&s| sign_of(atom, s)).collect();
                !system.contexts()[*ci].prob(&local).is_zero()
            })
        })
        .collect();

    // One equality per positive context assignment, plus normalization.
    let mut constraints: Vec<Vec<Rational>> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();
    for (ci, positions) in &context_positions {
        for (assignment, p) in &system.contexts()[*ci].pmf {
            let row: Vec<Rational> = atoms
                .iter()
                .map(|&atom| {
                    let matches = positions
                        .iter()
                        .zip(assignment)
                        .all(|(&s, &v)| sign_of(atom, s) == v);
                    if matches {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            constraints.push(row);
            rhs.push(p.clone());
        }
    }
    constraints.push(vec![Rational::one(); atoms.len()]);
    rhs.push(Rational::one());

    let objective: Vec<Rational> = atoms
        .iter()
        .map(|&atom| {
            let agreements = pair_slots
                .iter()
                .filter(|(a, b)| sign_of(atom, *a) == sign_of(atom, *b))
                .count();
            Rational::from_integer(agreements as i64)
        })
        .collect();

    enumerate_bfs_max(&objective, &constraints, &rhs)
        .expect("coupling polytope is nonempty")
        .0
}
