//! Exact linear programming over nonnegative rationals.
//!
//! Problems are equality-constrained maximizations in standard form:
//! maximize `c·x` subject to `Ax = b`, `x >= 0`. The solver is a two-phase
//! primal simplex on a dense tableau using Bland's least-index pivot rule,
//! which cannot cycle, so every solve terminates. All arithmetic is done in
//! [`Rational`]; a returned optimum satisfies its constraints exactly, not
//! within a tolerance.
//!
//! The feasible regions built elsewhere in this crate (coupling polytopes)
//! have at most a few thousand columns, so a dense tableau is the robust
//! choice over anything sparse or factorized.

use crate::rational::Rational;

/// An equality-constrained LP in standard form with implicit `x >= 0`
/// bounds, maximizing the objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub num_vars: usize,
    /// Objective coefficients, length `num_vars`.
    pub objective: Vec<Rational>,
    /// Equality rows, each of length `num_vars`.
    pub constraints: Vec<Vec<Rational>>,
    /// Right-hand sides, one per constraint row.
    pub rhs: Vec<Rational>,
}

/// Outcome of an exact solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpResult {
    Optimal {
        optimum: Rational,
        solution: Vec<Rational>,
    },
    Infeasible,
    Unbounded,
}

impl LpResult {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpResult::Optimal { .. })
    }
}

/// Structural errors, reported separately from infeasibility: a malformed
/// program is a caller bug, an empty feasible set is an answer.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

fn validate(lp: &LinearProgram) -> Result<(), LpError> {
    if lp.objective.len() != lp.num_vars {
        return Err(LpError::Dimension(format!(
            "objective has {} coefficients for {} variables",
            lp.objective.len(),
            lp.num_vars
        )));
    }
    if lp.rhs.len() != lp.constraints.len() {
        return Err(LpError::Dimension(format!(
            "{} constraint rows but {} right-hand sides",
            lp.constraints.len(),
            lp.rhs.len()
        )));
    }
    for (i, row) in lp.constraints.iter().enumerate() {
        if row.len() != lp.num_vars {
            return Err(LpError::Dimension(format!(
                "constraint row {} has {} coefficients for {} variables",
                i,
                row.len(),
                lp.num_vars
            )));
        }
    }
    Ok(())
}

/// Checks `x >= 0` and `Ax = b` with exact equality.
pub fn check_solution(lp: &LinearProgram, x: &[Rational]) -> Result<bool, LpError> {
    validate(lp)?;
    if x.len() != lp.num_vars {
        return Err(LpError::Dimension(format!(
            "candidate has {} entries for {} variables",
            x.len(),
            lp.num_vars
        )));
    }
    if x.iter().any(Rational::is_negative) {
        return Ok(false);
    }
    for (row, b) in lp.constraints.iter().zip(&lp.rhs) {
        let lhs: Rational = row.iter().zip(x).map(|(a, v)| a * v).sum();
        if &lhs != b {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Dense simplex tableau. Each row carries its right-hand side in the last
/// position; `basis[i]` is the column whose unit vector lives in row `i`.
struct Tableau {
    ncols: usize,
    rows: Vec<Vec<Rational>>,
    /// Reduced-cost row for the current basis, objective value last.
    obj: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.ncols]
    }

    /// Gauss-Jordan pivot on `(row, col)`; afterwards column `col` is the
    /// unit vector of `row` and the objective row is updated to match.
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col].clone();
        debug_assert!(!piv.is_zero(), "pivot on zero element");
        let mut pivot_row = std::mem::take(&mut self.rows[row]);
        for v in pivot_row.iter_mut() {
            *v /= &piv;
        }
        for (k, r) in self.rows.iter_mut().enumerate() {
            if k == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for (v, p) in r.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        if !self.obj[col].is_zero() {
            let factor = self.obj[col].clone();
            for (v, p) in self.obj.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        self.rows[row] = pivot_row;
        self.basis[row] = col;
    }

    /// Bland's entering rule: lowest column index with a positive reduced
    /// cost (we maximize). `None` means the current basis is optimal.
    fn entering(&self) -> Option<usize> {
        (0..self.ncols).find(|&j| self.obj[j].is_positive())
    }

    /// Ratio test with Bland's tie-break: among rows attaining the minimal
    /// ratio, the one whose basic variable has the lowest index leaves.
    /// `None` means the column is unbounded.
    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(Rational, usize)> = None;
        for i in 0..self.rows.len() {
            let a = &self.rows[i][col];
            if !a.is_positive() {
                continue;
            }
            let ratio = self.rhs(i) / a;
            best = match best {
                None => Some((ratio, i)),
                Some((best_ratio, best_row)) => {
                    if ratio < best_ratio
                        || (ratio == best_ratio && self.basis[i] < self.basis[best_row])
                    {
                        Some((ratio, i))
                    } else {
                        Some((best_ratio, best_row))
                    }
                }
            };
        }
        best.map(|(_, i)| i)
    }

    /// Runs Bland pivots until optimal or unbounded. Returns false on
    /// unboundedness.
    fn optimize(&mut self) -> bool {
        while let Some(col) = self.entering() {
            match self.leaving(col) {
                Some(row) => self.pivot(row, col),
                None => return false,
            }
        }
        true
    }
}

/// Variables pinned to zero before the simplex runs: an equality row with
/// zero right-hand side whose live coefficients all share one sign forces
/// every variable it touches to zero. Fixing those variables can expose
/// further such rows, so this iterates to a fixed point.
fn presolve_zero_fixed(lp: &LinearProgram) -> Vec<bool> {
    let mut fixed = vec![false; lp.num_vars];
    loop {
        let mut changed = false;
        for (row, b) in lp.constraints.iter().zip(&lp.rhs) {
            if !b.is_zero() {
                continue;
            }
            let mut positive = 0usize;
            let mut negative = 0usize;
            for (j, a) in row.iter().enumerate() {
                if fixed[j] || a.is_zero() {
                    continue;
                }
                if a.is_positive() {
                    positive += 1;
                } else {
                    negative += 1;
                }
            }
            if positive + negative == 0 || (positive > 0 && negative > 0) {
                continue;
            }
            for (j, a) in row.iter().enumerate() {
                if !fixed[j] && !a.is_zero() {
                    fixed[j] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return fixed;
        }
    }
}

/// Solves the program exactly. The result is deterministic: identical
/// inputs take identical pivot sequences.
pub fn solve(lp: &LinearProgram) -> Result<LpResult, LpError> {
    validate(lp)?;

    let fixed = presolve_zero_fixed(lp);
    if fixed.iter().any(|&f| f) {
        let keep: Vec<usize> = (0..lp.num_vars).filter(|&j| !fixed[j]).collect();
        let reduced = LinearProgram {
            num_vars: keep.len(),
            objective: keep.iter().map(|&j| lp.objective[j].clone()).collect(),
            constraints: lp
                .constraints
                .iter()
                .map(|row| keep.iter().map(|&j| row[j].clone()).collect())
                .collect(),
            rhs: lp.rhs.clone(),
        };
        return Ok(match solve_unreduced(&reduced) {
            LpResult::Optimal { optimum, solution } => {
                let mut full = vec![Rational::zero(); lp.num_vars];
                for (&j, v) in keep.iter().zip(solution) {
                    full[j] = v;
                }
                debug_assert_eq!(check_solution(lp, &full), Ok(true));
                LpResult::Optimal {
                    optimum,
                    solution: full,
                }
            }
            other => other,
        });
    }
    Ok(solve_unreduced(lp))
}

fn solve_unreduced(lp: &LinearProgram) -> LpResult {
    let n = lp.num_vars;
    let m = lp.constraints.len();

    // Phase 1: minimize the total mass of one artificial variable per row
    // (columns n..n+m), starting from the all-artificial basis. Rows are
    // sign-normalized so every right-hand side is nonnegative.
    let mut rows = Vec::with_capacity(m);
    for (row, b) in lp.constraints.iter().zip(&lp.rhs) {
        let negate = b.is_negative();
        let mut r: Vec<Rational> = Vec::with_capacity(n + m + 1);
        for a in row {
            r.push(if negate { -a } else { a.clone() });
        }
        r.extend(std::iter::repeat_with(Rational::zero).take(m));
        r.push(if negate { -b } else { b.clone() });
        rows.push(r);
    }
    for (i, r) in rows.iter_mut().enumerate() {
        r[n + i] = Rational::one();
    }

    // Reduced costs for maximizing -(sum of artificials) from the identity
    // basis: column sums over the original variables, zero elsewhere. The
    // value cell holds the negated objective, so it starts at +sum(b).
    let mut obj = vec![Rational::zero(); n + m + 1];
    for r in &rows {
        for j in 0..n {
            obj[j] += &r[j];
        }
        obj[n + m] += &r[n + m];
    }

    let mut t = Tableau {
        ncols: n + m,
        rows,
        obj,
        basis: (n..n + m).collect(),
    };
    let bounded = t.optimize();
    debug_assert!(bounded, "phase-1 objective is bounded by zero");
    if !t.obj[t.ncols].is_zero() {
        return LpResult::Infeasible;
    }

    // Drive leftover artificials out of the basis; a row with no original
    // coefficient left is redundant and is dropped.
    let mut i = 0;
    while i < t.basis.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase 2: restate the real objective over the current basis and
    // re-optimize. Artificial columns are gone from consideration.
    for r in t.rows.iter_mut() {
        let b = r.pop().expect("row has rhs");
        r.truncate(n);
        r.push(b);
    }
    t.ncols = n;
    let mut obj: Vec<Rational> = lp.objective.clone();
    obj.push(Rational::zero());
    for (i, &bi) in t.basis.iter().enumerate() {
        if !obj[bi].is_zero() {
            let factor = obj[bi].clone();
            let row = t.rows[i].clone();
            for (v, p) in obj.iter_mut().zip(&row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
    }
    t.obj = obj;

    if !t.optimize() {
        return LpResult::Unbounded;
    }

    let mut solution = vec![Rational::zero(); n];
    for (i, &bi) in t.basis.iter().enumerate() {
        solution[bi] = t.rhs(i).clone();
    }
    let optimum: Rational = lp.objective.iter().zip(&solution).map(|(c, x)| c * x).sum();
    debug_assert_eq!(check_solution(lp, &solution), Ok(true));
    LpResult::Optimal { optimum, solution }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn lp(
        objective: Vec<Rational>,
        constraints: Vec<Vec<Rational>>,
        rhs: Vec<Rational>,
    ) -> LinearProgram {
        LinearProgram {
            num_vars: objective.len(),
            objective,
            constraints,
            rhs,
        }
    }

    #[test]
    fn forced_single_point() {
        let p = lp(vec![rat!(1)], vec![vec![rat!(1)]], vec![rat!(1)]);
        assert_eq!(
            solve(&p).unwrap(),
            LpResult::Optimal {
                optimum: rat!(1),
                solution: vec![rat!(1)],
            }
        );
    }

    #[test]
    fn negative_rhs_is_infeasible_under_nonnegativity() {
        let p = lp(vec![rat!(1)], vec![vec![rat!(1)]], vec![rat!(-1)]);
        assert_eq!(solve(&p).unwrap(), LpResult::Infeasible);
    }

    #[test]
    fn objective_equal_to_constraint() {
        let p = lp(
            vec![rat!(1), rat!(1)],
            vec![vec![rat!(1), rat!(1)]],
            vec![rat!(1)],
        );
        match solve(&p).unwrap() {
            LpResult::Optimal { optimum, solution } => {
                assert_eq!(optimum, rat!(1));
                assert_eq!(check_solution(&p, &solution), Ok(true));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn simplex_moves_off_the_initial_vertex() {
        // maximize 2x + 3y s.t. x + y = 1; optimum at y = 1.
        let p = lp(
            vec![rat!(2), rat!(3)],
            vec![vec![rat!(1), rat!(1)]],
            vec![rat!(1)],
        );
        assert_eq!(
            solve(&p).unwrap(),
            LpResult::Optimal {
                optimum: rat!(3),
                solution: vec![rat!(0), rat!(1)],
            }
        );
    }

    #[test]
    fn fractional_optimum_stays_exact() {
        // maximize x + 2y s.t. x + 3y = 1, x + y = 1/2 -> x = 1/4, y = 1/4.
        let p = lp(
            vec![rat!(1), rat!(2)],
            vec![vec![rat!(1), rat!(3)], vec![rat!(1), rat!(1)]],
            vec![rat!(1), rat!(1, 2)],
        );
        assert_eq!(
            solve(&p).unwrap(),
            LpResult::Optimal {
                optimum: rat!(3, 4),
                solution: vec![rat!(1, 4), rat!(1, 4)],
            }
        );
    }

    #[test]
    fn unbounded_direction_is_reported() {
        // maximize x s.t. x - y = 0: x = y can grow without bound.
        let p = lp(
            vec![rat!(1), rat!(0)],
            vec![vec![rat!(1), rat!(-1)]],
            vec![rat!(0)],
        );
        assert_eq!(solve(&p).unwrap(), LpResult::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let p = lp(
            vec![rat!(1), rat!(1)],
            vec![
                vec![rat!(1), rat!(1)],
                vec![rat!(2), rat!(2)],
                vec![rat!(1), rat!(1)],
            ],
            vec![rat!(1), rat!(2), rat!(1)],
        );
        match solve(&p).unwrap() {
            LpResult::Optimal { optimum, .. } => assert_eq!(optimum, rat!(1)),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn inconsistent_redundancy_is_infeasible() {
        let p = lp(
            vec![rat!(1), rat!(1)],
            vec![vec![rat!(1), rat!(1)], vec![rat!(1), rat!(1)]],
            vec![rat!(1), rat!(2)],
        );
        assert_eq!(solve(&p).unwrap(), LpResult::Infeasible);
    }

    #[test]
    fn no_constraints_at_all() {
        let p = lp(vec![rat!(-1), rat!(-2)], vec![], vec![]);
        assert_eq!(
            solve(&p).unwrap(),
            LpResult::Optimal {
                optimum: rat!(0),
                solution: vec![rat!(0), rat!(0)],
            }
        );
        let up = lp(vec![rat!(1)], vec![], vec![]);
        assert_eq!(solve(&up).unwrap(), LpResult::Unbounded);
    }

    #[test]
    fn check_solution_agrees_with_spec_examples() {
        let p = lp(vec![rat!(1)], vec![vec![rat!(1)]], vec![rat!(1)]);
        assert_eq!(check_solution(&p, &[rat!(1)]), Ok(true));
        assert_eq!(check_solution(&p, &[rat!(1, 2)]), Ok(false));
        let q = lp(
            vec![rat!(1), rat!(1)],
            vec![vec![rat!(1), rat!(1)]],
            vec![rat!(1)],
        );
        assert_eq!(check_solution(&q, &[rat!(1, 3), rat!(2, 3)]), Ok(true));
        assert_eq!(check_solution(&q, &[rat!(-1), rat!(2)]), Ok(false));
    }

    #[test]
    fn dimension_errors_are_not_infeasibility() {
        let p = lp(vec![rat!(1)], vec![vec![rat!(1), rat!(2)]], vec![rat!(1)]);
        assert!(matches!(solve(&p), Err(LpError::Dimension(_))));
        let q = lp(vec![rat!(1)], vec![vec![rat!(1)]], vec![rat!(1)]);
        assert!(matches!(
            check_solution(&q, &[rat!(1), rat!(1)]),
            Err(LpError::Dimension(_))
        ));
    }

    #[test]
    fn degenerate_lp_terminates() {
        // Beale's classical cycling instance, stated with explicit slacks.
        // The zero right-hand sides force degenerate pivots; the
        // largest-coefficient rule cycles here, Bland's rule must not.
        let p = lp(
            vec![rat!(3, 4), rat!(-150), rat!(1, 50), rat!(-6), rat!(0), rat!(0), rat!(0)],
            vec![
                vec![rat!(1, 4), rat!(-60), rat!(-1, 25), rat!(9), rat!(1), rat!(0), rat!(0)],
                vec![rat!(1, 2), rat!(-90), rat!(-1, 50), rat!(3), rat!(0), rat!(1), rat!(0)],
                vec![rat!(0), rat!(0), rat!(1), rat!(0), rat!(0), rat!(0), rat!(1)],
            ],
            vec![rat!(0), rat!(0), rat!(1)],
        );
        match solve(&p).unwrap() {
            LpResult::Optimal { optimum, .. } => assert_eq!(optimum, rat!(1, 20)),
            other => panic!("expected optimal, got {other:?}"),
        }
    }
}
