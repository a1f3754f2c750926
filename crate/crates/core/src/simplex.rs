//! Dense two-phase primal simplex over any `Scalar`, with Bland's rule.
//!
//! All LPs in this crate are equality-constrained with nonnegative variables:
//! maximize (or minimize) `c . x` subject to `A x = b`, `x >= 0`. Redundant
//! rows are tolerated: artificials that cannot be pivoted out stay frozen at
//! zero. Pivoting is fully deterministic (lowest-index entering column,
//! lowest-index basic variable on ratio ties), so repeated runs produce
//! identical bases.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpProblem<S> {
    pub ncols: usize,
    /// Equality rows `(coefficients, rhs)`.
    pub rows: Vec<(Vec<S>, S)>,
    pub objective: Vec<S>,
    pub maximize: bool,
}

#[derive(Debug, Clone)]
pub struct SimplexSolution<S> {
    pub status: SimplexStatus,
    pub value: S,
    pub x: Vec<S>,
    /// One dual value per input row, in input order.
    pub duals: Vec<S>,
    /// Basic column per row; entries `>= ncols` are frozen artificials.
    pub basis: Vec<usize>,
    /// Reduced costs of the internal maximization problem, nonnegative at
    /// optimality; a column with strictly positive entry is zero on the whole
    /// optimal face.
    pub reduced_costs: Vec<S>,
}

struct Tableau<S> {
    m: usize,
    n: usize,
    rows: Vec<Vec<S>>, // each of length n + m + 1, rhs last
    z: Vec<S>,
    basis: Vec<usize>,
    negated: Vec<bool>,
    tol: S,
}

impl<S: Scalar> Tableau<S> {
    fn build(p: &LpProblem<S>) -> Self {
        let m = p.rows.len();
        let n = p.ncols;
        let width = n + m + 1;
        let mut rows = Vec::with_capacity(m);
        let mut negated = Vec::with_capacity(m);
        for (i, (coeffs, rhs)) in p.rows.iter().enumerate() {
            assert_eq!(coeffs.len(), n, "row {i} has wrong arity");
            let flip = *rhs < S::zero();
            let mut row = vec![S::zero(); width];
            for (j, c) in coeffs.iter().enumerate() {
                row[j] = if flip { -c.clone() } else { c.clone() };
            }
            row[n + i] = S::one();
            row[width - 1] = if flip { -rhs.clone() } else { rhs.clone() };
            rows.push(row);
            negated.push(flip);
        }
        Tableau {
            m,
            n,
            rows,
            z: vec![S::zero(); width],
            basis: (0..m).map(|i| n + i).collect(),
            negated,
            tol: S::solver_tol(),
        }
    }

    fn width(&self) -> usize {
        self.n + self.m + 1
    }

    fn rhs(&self, i: usize) -> &S {
        &self.rows[i][self.width() - 1]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.width();
        let pivot_val = self.rows[r][c].clone();
        debug_assert!(!pivot_val.is_zero());
        if pivot_val != S::one() {
            for j in 0..width {
                if !self.rows[r][j].is_zero() {
                    let v = self.rows[r][j].clone() / pivot_val.clone();
                    self.rows[r][j] = v;
                }
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let factor = self.rows[i][c].clone();
            if factor.is_zero() {
                continue;
            }
            for j in 0..width {
                if !pivot_row[j].is_zero() {
                    let delta = factor.clone() * pivot_row[j].clone();
                    self.rows[i][j] = self.rows[i][j].clone() - delta;
                }
            }
        }
        let factor = self.z[c].clone();
        if !factor.is_zero() {
            for j in 0..width {
                if !pivot_row[j].is_zero() {
                    let delta = factor.clone() * pivot_row[j].clone();
                    self.z[j] = self.z[j].clone() - delta;
                }
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Rebuilds the reduced-cost row for the given costs (length n + m).
    fn price(&mut self, costs: &[S]) {
        let width = self.width();
        let mut z = vec![S::zero(); width];
        for i in 0..self.m {
            let cb = costs[self.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..width {
                if !self.rows[i][j].is_zero() {
                    z[j] = z[j].clone() + cb.clone() * self.rows[i][j].clone();
                }
            }
        }
        for (j, c) in costs.iter().enumerate() {
            z[j] = z[j].clone() - c.clone();
        }
        self.z = z;
    }

    /// Runs Bland-rule simplex for the priced objective (maximization).
    /// Artificial columns never enter. Returns false on unboundedness.
    fn run(&mut self) -> bool {
        loop {
            let mut entering = None;
            for j in 0..self.n {
                if self.z[j] < -self.tol.clone() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(usize, S)> = None;
            for i in 0..self.m {
                let a = self.rows[i][c].clone();
                if a > self.tol {
                    let ratio = self.rhs(i).clone() / a;
                    match &leave {
                        None => leave = Some((i, ratio)),
                        Some((best_i, best_ratio)) => {
                            if ratio < *best_ratio
                                || (ratio == *best_ratio && self.basis[i] < self.basis[*best_i])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    /// Phase 1: drive artificials to zero. Returns false when infeasible.
    fn phase1(&mut self) -> bool {
        let mut costs = vec![S::zero(); self.n + self.m];
        for j in self.n..self.n + self.m {
            costs[j] = -S::one();
        }
        self.price(&costs);
        let feasible_always = self.run();
        debug_assert!(feasible_always, "phase 1 objective is bounded");
        let width = self.width();
        let residual = -self.z[width - 1].clone();
        if residual > self.tol {
            return false;
        }
        // Pivot artificials out of the basis where a real column is available;
        // rows with no real coefficients are frozen 0 = 0 rows and can never
        // change again.
        for r in 0..self.m {
            if self.basis[r] >= self.n {
                let col = (0..self.n).find(|&j| {
                    let v = &self.rows[r][j];
                    if S::EXACT {
                        !v.is_zero()
                    } else {
                        v.abs() > self.tol
                    }
                });
                if let Some(c) = col {
                    self.pivot(r, c);
                }
            }
        }
        true
    }

    fn extract(&self, p: &LpProblem<S>, sign: S) -> SimplexSolution<S> {
        let width = self.width();
        let mut x = vec![S::zero(); self.n];
        for i in 0..self.m {
            if self.basis[i] < self.n {
                let mut v = self.rhs(i).clone();
                if !S::EXACT && v < S::zero() {
                    v = S::zero();
                }
                x[self.basis[i]] = v;
            }
        }
        let value = sign.clone() * self.z[width - 1].clone();
        let duals = (0..self.m)
            .map(|i| {
                let y = self.z[self.n + i].clone() * sign.clone();
                if self.negated[i] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        let _ = p;
        SimplexSolution {
            status: SimplexStatus::Optimal,
            value,
            x,
            duals,
            basis: self.basis.clone(),
            reduced_costs: self.z[..self.n].to_vec(),
        }
    }
}

/// Solves the problem from scratch.
pub fn solve<S: Scalar>(p: &LpProblem<S>) -> Result<SimplexSolution<S>> {
    solve_with_hint(p, None)
}

/// Solves, optionally warm-starting from a previous basis. The hint is used
/// when it spans the rows and its basic solution is primal feasible for the
/// new right-hand side; otherwise the solver falls back to a cold start. The
/// optimal value never depends on the hint.
pub fn solve_with_hint<S: Scalar>(
    p: &LpProblem<S>,
    hint: Option<&[usize]>,
) -> Result<SimplexSolution<S>> {
    assert_eq!(p.objective.len(), p.ncols);
    let sign = if p.maximize { S::one() } else { -S::one() };
    let mut costs = vec![S::zero(); p.ncols + p.rows.len()];
    for (j, c) in p.objective.iter().enumerate() {
        costs[j] = sign.clone() * c.clone();
    }

    if let Some(basis) = hint {
        if let Some(mut tab) = try_warm_tableau(p, basis) {
            tab.price(&costs);
            if !tab.run() {
                return Ok(unbounded(p));
            }
            let sol = tab.extract(p, sign);
            return finish(p, sol);
        }
    }

    let mut tab = Tableau::build(p);
    if !tab.phase1() {
        return Ok(SimplexSolution {
            status: SimplexStatus::Infeasible,
            value: S::zero(),
            x: vec![S::zero(); p.ncols],
            duals: vec![S::zero(); p.rows.len()],
            basis: Vec::new(),
            reduced_costs: Vec::new(),
        });
    }
    tab.price(&costs);
    if !tab.run() {
        return Ok(unbounded(p));
    }
    let sol = tab.extract(p, sign);
    finish(p, sol)
}

fn unbounded<S: Scalar>(p: &LpProblem<S>) -> SimplexSolution<S> {
    SimplexSolution {
        status: SimplexStatus::Unbounded,
        value: S::zero(),
        x: vec![S::zero(); p.ncols],
        duals: vec![S::zero(); p.rows.len()],
        basis: Vec::new(),
        reduced_costs: Vec::new(),
    }
}

fn finish<S: Scalar>(p: &LpProblem<S>, sol: SimplexSolution<S>) -> Result<SimplexSolution<S>> {
    // Certificate checks: primal feasibility and duality gap within tolerance.
    let tol = S::solver_tol();
    let mut gap_tol = tol.clone();
    if !S::EXACT {
        // Scale with data magnitude to avoid spurious failures on large inputs.
        let scale = p
            .rows
            .iter()
            .flat_map(|(r, b)| r.iter().chain(std::iter::once(b)))
            .chain(p.objective.iter())
            .map(|v| v.abs())
            .fold(S::one(), S::max_of);
        gap_tol = tol.clone() * scale * S::from_int(64);
    }
    for (coeffs, rhs) in &p.rows {
        let mut lhs = S::zero();
        for (c, xv) in coeffs.iter().zip(sol.x.iter()) {
            if !xv.is_zero() {
                lhs = lhs + c.clone() * xv.clone();
            }
        }
        if (lhs - rhs.clone()).abs() > gap_tol {
            return Err(Error::NumericallyUnstable(
                "optimal basis violates primal feasibility beyond tolerance".into(),
            ));
        }
    }
    let mut dual_value = S::zero();
    for ((_, rhs), y) in p.rows.iter().zip(sol.duals.iter()) {
        dual_value = dual_value + rhs.clone() * y.clone();
    }
    if (dual_value - sol.value.clone()).abs() > gap_tol {
        return Err(Error::NumericallyUnstable(
            "duality gap exceeds tolerance".into(),
        ));
    }
    Ok(sol)
}

/// Builds a tableau with the hinted basis eliminated to identity, if the hint
/// is structurally valid and primal feasible.
fn try_warm_tableau<S: Scalar>(p: &LpProblem<S>, hint: &[usize]) -> Option<Tableau<S>> {
    let m = p.rows.len();
    if hint.len() != m {
        return None;
    }
    let mut tab = Tableau::build(p);
    let mut assigned = vec![false; m];
    for &col in hint {
        if col >= p.ncols + m {
            return None;
        }
        let r = (0..m).find(|&i| {
            if assigned[i] {
                return false;
            }
            let v = &tab.rows[i][col];
            if S::EXACT {
                !v.is_zero()
            } else {
                v.abs() > S::solver_tol()
            }
        })?;
        tab.pivot(r, col);
        assigned[r] = true;
    }
    let feasible = (0..m).all(|i| {
        let v = tab.rhs(i);
        *v >= -S::solver_tol()
    });
    feasible.then_some(tab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::FastRational;
    use num_traits::Zero;

    type Q = FastRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn problem(
        ncols: usize,
        rows: Vec<(Vec<Q>, Q)>,
        objective: Vec<Q>,
        maximize: bool,
    ) -> LpProblem<Q> {
        LpProblem {
            ncols,
            rows,
            objective,
            maximize,
        }
    }

    #[test]
    fn simplex_on_a_segment() {
        // max 2x + y on x + y = 1.
        let p = problem(
            2,
            vec![(vec![q(1, 1), q(1, 1)], q(1, 1))],
            vec![q(2, 1), q(1, 1)],
            true,
        );
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SimplexStatus::Optimal);
        assert_eq!(sol.value, q(2, 1));
        assert_eq!(sol.x, vec![q(1, 1), Q::zero()]);
    }

    #[test]
    fn infeasible_rhs() {
        let p = problem(1, vec![(vec![q(1, 1)], q(-1, 1))], vec![Q::zero()], true);
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SimplexStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction() {
        // max x with the vacuous row 0 x = 0.
        let p = problem(1, vec![(vec![Q::zero()], Q::zero())], vec![q(1, 1)], true);
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SimplexStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_are_harmless() {
        // x + y = 1 stated twice, plus its double.
        let p = problem(
            2,
            vec![
                (vec![q(1, 1), q(1, 1)], q(1, 1)),
                (vec![q(1, 1), q(1, 1)], q(1, 1)),
                (vec![q(2, 1), q(2, 1)], q(2, 1)),
            ],
            vec![q(1, 1), q(3, 1)],
            true,
        );
        let sol = solve(&p).unwrap();
        assert_eq!(sol.value, q(3, 1));
        assert_eq!(sol.x, vec![Q::zero(), q(1, 1)]);
    }

    #[test]
    fn minimization_and_duality() {
        // min x + 2y + 3z on x+y+z = 1, y + z = 1/2.
        let p = problem(
            3,
            vec![
                (vec![q(1, 1), q(1, 1), q(1, 1)], q(1, 1)),
                (vec![Q::zero(), q(1, 1), q(1, 1)], q(1, 2)),
            ],
            vec![q(1, 1), q(2, 1), q(3, 1)],
            false,
        );
        let sol = solve(&p).unwrap();
        assert_eq!(sol.value, q(3, 2));
        // Strong duality: y . b = value.
        let dual_val = sol.duals[0].clone() * q(1, 1) + sol.duals[1].clone() * q(1, 2);
        assert_eq!(dual_val, sol.value);
    }

    #[test]
    fn warm_start_agrees_with_cold() {
        let p = problem(
            3,
            vec![
                (vec![q(1, 1), q(1, 1), q(1, 1)], q(1, 1)),
                (vec![q(1, 1), Q::zero(), q(-1, 1)], Q::zero()),
            ],
            vec![q(1, 1), q(1, 2), q(1, 4)],
            true,
        );
        let cold = solve(&p).unwrap();
        let warm = solve_with_hint(&p, Some(&cold.basis)).unwrap();
        assert_eq!(cold.value, warm.value);
        assert_eq!(cold.x, warm.x);
        // A nonsense hint falls back to cold start.
        let nonsense = solve_with_hint(&p, Some(&[0, 0])).unwrap();
        assert_eq!(nonsense.value, cold.value);
    }

    #[test]
    fn float_mode_matches_rational_on_random_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..60 {
            let ncols = rng.random_range(2..6);
            let nrows = rng.random_range(1..3);
            let rows_q: Vec<(Vec<Q>, Q)> = (0..nrows)
                .map(|_| {
                    let coeffs = (0..ncols)
                        .map(|_| q(rng.random_range(0..4), 1))
                        .collect::<Vec<_>>();
                    (coeffs, q(rng.random_range(1..4), 1))
                })
                .collect();
            let obj_q: Vec<Q> = (0..ncols).map(|_| q(rng.random_range(-3..4), 1)).collect();
            let pq = problem(ncols, rows_q.clone(), obj_q.clone(), true);
            let pf = LpProblem {
                ncols,
                rows: rows_q
                    .iter()
                    .map(|(r, b)| {
                        (
                            r.iter().map(|v| v.to_f64_lossy()).collect(),
                            b.to_f64_lossy(),
                        )
                    })
                    .collect(),
                objective: obj_q.iter().map(|v| v.to_f64_lossy()).collect(),
                maximize: true,
            };
            let sq = solve(&pq).unwrap();
            let sf = solve(&pf).unwrap();
            match sq.status {
                SimplexStatus::Optimal => {
                    assert_eq!(sf.status, SimplexStatus::Optimal);
                    assert!((sq.value.to_f64_lossy() - sf.value).abs() < 1e-9);
                }
                other => assert_eq!(sf.status, other),
            }
        }
    }
}
