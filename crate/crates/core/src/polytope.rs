//! The space of invariant measures at marginal resolution: normalized,
//! flow-conserving, nonnegative edge-frequency vectors over an SFT, and the
//! LP contract every optimizer goes through. Vertices of this polytope are
//! the uniform measures on simple cycles, i.e. the ergodic measures visible
//! at this resolution.

use crate::error::{Error, Result};
use crate::karp::strongly_connected_components;
use crate::scalar::Scalar;
use crate::simplex::{self, LpProblem, SimplexSolution, SimplexStatus};
use crate::symbolic::{Cycle, Sft, Symbol, Word};

/// Marginal of an invariant measure on the edges of an SFT, aligned with
/// `Sft::edges()`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFrequencyVector<S> {
    freq: Vec<S>,
}

impl<S: Scalar> EdgeFrequencyVector<S> {
    pub fn new(freq: Vec<S>) -> Self {
        EdgeFrequencyVector { freq }
    }

    /// Uniform measure on a simple cycle: `1 / len` on each traversed edge.
    pub fn uniform_cycle(sft: &Sft, cycle: &Cycle) -> Self {
        let mut freq = vec![S::zero(); sft.edge_count()];
        let share = S::one() / S::from_int(cycle.len() as i64);
        for e in cycle.edge_ids(sft) {
            freq[e] = freq[e].clone() + share.clone();
        }
        EdgeFrequencyVector { freq }
    }

    pub fn freq(&self) -> &[S] {
        &self.freq
    }

    pub fn get(&self, e: usize) -> &S {
        &self.freq[e]
    }

    pub fn len(&self) -> usize {
        self.freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq.is_empty()
    }

    pub fn sum(&self) -> S {
        self.freq.iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    pub fn support(&self) -> Vec<usize> {
        let tol = S::solver_tol();
        self.freq
            .iter()
            .enumerate()
            .filter(|(_, f)| **f > tol)
            .map(|(e, _)| e)
            .collect()
    }

    /// Net flow imbalance `|inflow - outflow|` maximized over vertices.
    pub fn conservation_defect(&self, sft: &Sft) -> S {
        let n = sft.alphabet_size();
        let mut net = vec![S::zero(); n];
        for (e, f) in self.freq.iter().enumerate() {
            let (u, v) = sft.edges()[e];
            net[v as usize] = net[v as usize].clone() + f.clone();
            net[u as usize] = net[u as usize].clone() - f.clone();
        }
        net.into_iter().map(|x| x.abs()).fold(S::zero(), S::max_of)
    }

    /// Checks membership in the invariant polytope: nonnegative, total mass
    /// one, flow conserved at every vertex (all within solver tolerance).
    pub fn validate(&self, sft: &Sft) -> Result<()> {
        if self.freq.len() != sft.edge_count() {
            return Err(Error::Infeasible(format!(
                "edge vector has {} entries, SFT has {} edges",
                self.freq.len(),
                sft.edge_count()
            )));
        }
        let tol = S::solver_tol();
        if self.freq.iter().any(|f| *f < -tol.clone()) {
            return Err(Error::Infeasible("negative edge frequency".into()));
        }
        let total_defect = (self.sum() - S::one()).abs();
        if total_defect > tol {
            return Err(Error::Infeasible("frequencies do not sum to 1".into()));
        }
        let scaled_tol = tol * S::from_int(sft.alphabet_size() as i64 + 1);
        if self.conservation_defect(sft) > scaled_tol {
            return Err(Error::Infeasible("flow conservation violated".into()));
        }
        Ok(())
    }

    /// `t * self + (1 - t) * other`.
    pub fn convex_combination(&self, t: &S, other: &Self) -> Self {
        let one_minus = S::one() - t.clone();
        EdgeFrequencyVector {
            freq: self
                .freq
                .iter()
                .zip(other.freq.iter())
                .map(|(a, b)| t.clone() * a.clone() + one_minus.clone() * b.clone())
                .collect(),
        }
    }

    /// Inner product with a per-edge weight vector.
    pub fn dot(&self, weights: &[S]) -> S {
        self.freq
            .iter()
            .zip(weights.iter())
            .fold(S::zero(), |acc, (f, w)| {
                if f.is_zero() {
                    acc
                } else {
                    acc + f.clone() * w.clone()
                }
            })
    }

    /// Greedy peeling of the support into edge-disjoint simple cycles with
    /// their mixture coefficients (summing to the total mass).
    pub fn decompose_into_cycles(&self, sft: &Sft) -> Result<Vec<(Cycle, S)>> {
        let tol = S::solver_tol();
        let mut residual = self.freq.clone();
        let mut out = Vec::new();
        loop {
            let support: Vec<usize> = residual
                .iter()
                .enumerate()
                .filter(|(_, f)| **f > tol.clone())
                .map(|(e, _)| e)
                .collect();
            if support.is_empty() {
                break;
            }
            let cycle_edges = find_cycle_in_support(sft, &residual, &tol).ok_or_else(|| {
                Error::NumericallyUnstable("support carries mass but no cycle".into())
            })?;
            let delta = cycle_edges
                .iter()
                .map(|&e| residual[e].clone())
                .fold(None, |acc: Option<S>, f| match acc {
                    None => Some(f),
                    Some(a) => Some(S::min_of(a, f)),
                })
                .unwrap();
            for &e in &cycle_edges {
                residual[e] = residual[e].clone() - delta.clone();
            }
            let symbols: Vec<Symbol> = cycle_edges.iter().map(|&e| sft.edges()[e].0).collect();
            let mass = delta * S::from_int(cycle_edges.len() as i64);
            out.push((Cycle::canonical_unchecked(symbols), mass));
            if out.len() > sft.edge_count() + 1 {
                return Err(Error::NumericallyUnstable(
                    "cycle peeling failed to terminate".into(),
                ));
            }
        }
        Ok(out)
    }
}

/// Walks the support from its least vertex until a vertex repeats; the loop
/// closed there is a simple cycle, returned as its ordered edge ids.
fn find_cycle_in_support<S: Scalar>(sft: &Sft, freq: &[S], tol: &S) -> Option<Vec<usize>> {
    let out_support = |v: Symbol| -> Option<usize> {
        sft.out_edge_ids(v)
            .iter()
            .copied()
            .find(|&e| freq[e] > *tol)
    };
    let start = (0..sft.alphabet_size() as Symbol).find(|&v| out_support(v).is_some())?;
    let mut path: Vec<usize> = Vec::new();
    let mut seen_at = vec![usize::MAX; sft.alphabet_size()];
    let mut v = start;
    loop {
        if seen_at[v as usize] != usize::MAX {
            return Some(path[seen_at[v as usize]..].to_vec());
        }
        seen_at[v as usize] = path.len();
        let e = out_support(v)?;
        path.push(e);
        v = sft.edges()[e].1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Outcome of an LP over the invariant polytope.
#[derive(Debug, Clone)]
pub struct LpOutcome<S> {
    pub value: S,
    pub solution: EdgeFrequencyVector<S>,
    pub status: LpStatus,
    /// Dual values: one per vertex (flow rows), then the normalization row,
    /// then the extra equality rows.
    pub certificate: Vec<S>,
    pub basis: Vec<usize>,
    /// Set when an extra equality was nudged back into the feasible interval.
    pub clamped: bool,
}

/// Flow-conservation rows (one per vertex, rhs zero).
pub(crate) fn flow_rows<S: Scalar>(sft: &Sft) -> Vec<(Vec<S>, S)> {
    let m_edges = sft.edge_count();
    let n = sft.alphabet_size();
    let mut rows = Vec::with_capacity(n);
    for v in 0..n as Symbol {
        let mut coeffs = vec![S::zero(); m_edges];
        for &e in sft.in_edge_ids(v) {
            coeffs[e] = coeffs[e].clone() + S::one();
        }
        for &e in sft.out_edge_ids(v) {
            coeffs[e] = coeffs[e].clone() - S::one();
        }
        rows.push((coeffs, S::zero()));
    }
    rows
}

fn polytope_rows<S: Scalar>(sft: &Sft, extra_eq: &[(Vec<S>, S)]) -> Vec<(Vec<S>, S)> {
    let m_edges = sft.edge_count();
    let mut rows = flow_rows(sft);
    rows.push((vec![S::one(); m_edges], S::one()));
    for (coeffs, rhs) in extra_eq {
        assert_eq!(coeffs.len(), m_edges, "extra row arity");
        rows.push((coeffs.clone(), rhs.clone()));
    }
    rows
}

/// Pushes recoded edge frequencies down to the base SFT: each base edge
/// collects the mass of the recoded edges whose block starts with it.
pub fn project_frequencies<S: Scalar>(
    rec: &crate::symbolic::Recoding,
    efv: &EdgeFrequencyVector<S>,
) -> EdgeFrequencyVector<S> {
    if rec.is_identity() {
        return efv.clone();
    }
    let base = rec.base();
    let mut freq = vec![S::zero(); base.edge_count()];
    for e in 0..rec.sft().edge_count() {
        let block = rec.edge_block(e);
        let id = base
            .edge_id(block[0], block[1])
            .expect("recoded edge blocks are allowed in the base");
        freq[id] = freq[id].clone() + efv.get(e).clone();
    }
    EdgeFrequencyVector::new(freq)
}

/// Optimizes a per-edge objective over the invariant polytope, with optional
/// extra equality rows.
///
/// Deterministic: Bland pivoting from a fixed cold start (or the supplied
/// warm-start basis; the value never depends on it). In inexact mode a single
/// infeasible extra row within `1e-9` of its feasible interval is clamped to
/// the interval and the outcome flagged.
pub fn lp_optimize<S: Scalar>(
    sft: &Sft,
    objective: &[S],
    sense: Sense,
    extra_eq: &[(Vec<S>, S)],
) -> Result<LpOutcome<S>> {
    lp_optimize_with(sft, objective, sense, extra_eq, None, false)
}

pub fn lp_optimize_with<S: Scalar>(
    sft: &Sft,
    objective: &[S],
    sense: Sense,
    extra_eq: &[(Vec<S>, S)],
    hint: Option<&[usize]>,
    lex_tiebreak: bool,
) -> Result<LpOutcome<S>> {
    assert_eq!(objective.len(), sft.edge_count(), "objective arity");
    let problem = LpProblem {
        ncols: sft.edge_count(),
        rows: polytope_rows(sft, extra_eq),
        objective: objective.to_vec(),
        maximize: sense == Sense::Maximize,
    };
    let sol = simplex::solve_with_hint(&problem, hint)?;
    match sol.status {
        SimplexStatus::Optimal => finish_outcome(problem, sol, lex_tiebreak, false),
        SimplexStatus::Unbounded => Err(Error::NumericallyUnstable(
            "objective unbounded over the invariant polytope".into(),
        )),
        SimplexStatus::Infeasible => {
            if !S::EXACT && extra_eq.len() == 1 {
                return clamp_and_resolve(sft, objective, sense, extra_eq, lex_tiebreak);
            }
            Err(Error::Infeasible(
                "extra equality rows cut the polytope to the empty set".into(),
            ))
        }
    }
}

fn finish_outcome<S: Scalar>(
    problem: LpProblem<S>,
    sol: SimplexSolution<S>,
    lex_tiebreak: bool,
    clamped: bool,
) -> Result<LpOutcome<S>> {
    let mut x = sol.x;
    let basis = sol.basis;
    if lex_tiebreak {
        x = lex_least_optimal(&problem, &sol.value, &sol.reduced_costs, x)?;
    }
    Ok(LpOutcome {
        value: sol.value,
        solution: EdgeFrequencyVector::new(x),
        status: LpStatus::Optimal,
        certificate: sol.duals,
        basis,
        clamped,
    })
}

/// Replaces the solution by the lexicographically least point of the optimal
/// face: fix the objective value, then minimize each coordinate in turn.
///
/// Complementary slackness prunes the work: a column with strictly positive
/// reduced cost vanishes on the whole face, so only the zero-reduced-cost
/// columns take part in the refinement; if none are ambiguous the optimum was
/// unique already.
fn lex_least_optimal<S: Scalar>(
    problem: &LpProblem<S>,
    value: &S,
    reduced_costs: &[S],
    x: Vec<S>,
) -> Result<Vec<S>> {
    let n = problem.ncols;
    let tol = if S::EXACT {
        S::zero()
    } else {
        S::solver_tol() * S::from_int(64)
    };
    let keep: Vec<usize> = (0..n).filter(|&j| reduced_costs[j] <= tol).collect();
    if keep.len() <= 1 {
        return Ok(x); // unique optimum (up to one basic coordinate)
    }
    let restrict = |full: &[S]| -> Vec<S> { keep.iter().map(|&j| full[j].clone()).collect() };
    let mut rows: Vec<(Vec<S>, S)> = problem
        .rows
        .iter()
        .map(|(coeffs, rhs)| (restrict(coeffs), rhs.clone()))
        .collect();
    rows.push((restrict(&problem.objective), value.clone()));
    let mut out = vec![S::zero(); n];
    for (pos, &j) in keep.iter().enumerate() {
        let mut e = vec![S::zero(); keep.len()];
        e[pos] = S::one();
        let sub = LpProblem {
            ncols: keep.len(),
            rows: rows.clone(),
            objective: e.clone(),
            maximize: false,
        };
        let sol = simplex::solve(&sub)?;
        if sol.status != SimplexStatus::Optimal {
            return Err(Error::NumericallyUnstable(
                "lexicographic refinement lost feasibility".into(),
            ));
        }
        let v = if !S::EXACT && sol.value < S::zero() {
            S::zero()
        } else {
            sol.value
        };
        rows.push((e, v.clone()));
        out[j] = v;
    }
    Ok(out)
}

fn clamp_and_resolve<S: Scalar>(
    sft: &Sft,
    objective: &[S],
    sense: Sense,
    extra_eq: &[(Vec<S>, S)],
    lex_tiebreak: bool,
) -> Result<LpOutcome<S>> {
    let (coeffs, rhs) = &extra_eq[0];
    let lo = lp_optimize(sft, coeffs, Sense::Minimize, &[])?.value;
    let hi = lp_optimize(sft, coeffs, Sense::Maximize, &[])?.value;
    // Looser than the simplex feasibility tolerance, else the solver accepts
    // the rhs before the clamp can see it.
    let tol = S::solver_tol() * S::from_int(64);
    let clamped_rhs = if *rhs < lo && (lo.clone() - rhs.clone()) <= tol {
        lo
    } else if *rhs > hi && (rhs.clone() - hi.clone()) <= tol {
        hi
    } else {
        return Err(Error::Infeasible(format!(
            "equality rhs {rhs} outside feasible interval beyond clamp tolerance"
        )));
    };
    let rows = vec![(coeffs.clone(), clamped_rhs)];
    let outcome = lp_optimize_with(sft, objective, sense, &rows, None, lex_tiebreak)?;
    Ok(LpOutcome {
        clamped: true,
        ..outcome
    })
}

/// Extreme-point recovery: when the solution's support is a single simple
/// cycle, return it (the witness is ergodic); otherwise `None`.
pub fn vertex_to_cycle<S: Scalar>(sft: &Sft, solution: &EdgeFrequencyVector<S>) -> Option<Cycle> {
    let support = solution.support();
    if support.is_empty() {
        return None;
    }
    let mut out_edge = vec![None; sft.alphabet_size()];
    let mut support_vertices = Vec::new();
    for &e in &support {
        let (u, _) = sft.edges()[e];
        if out_edge[u as usize].is_some() {
            return None; // branching support
        }
        out_edge[u as usize] = Some(e);
        support_vertices.push(u);
    }
    let start = *support_vertices.iter().min().unwrap();
    let mut symbols = Vec::new();
    let mut v = start;
    let mut used = 0usize;
    loop {
        let e = out_edge[v as usize]?;
        symbols.push(v);
        used += 1;
        v = sft.edges()[e].1;
        if v == start {
            break;
        }
        if used > support.len() {
            return None;
        }
    }
    if used != support.len() {
        return None; // disconnected support
    }
    Some(Cycle::canonical_unchecked(symbols))
}

/// A recurrent class of a stationary chain's support.
#[derive(Debug, Clone)]
pub struct RecurrentClass<S> {
    pub vertices: Vec<Symbol>,
    pub edge_ids: Vec<usize>,
    pub mass: S,
}

/// Stationary Markov chain on the support of an invariant edge vector.
#[derive(Debug, Clone)]
pub struct MarkovChain<S> {
    sft: Sft,
    freq: Vec<S>,
    probs: Vec<S>,
    stationary: Vec<S>,
}

/// Normalizes an invariant edge vector into a stationary chain: transition
/// probabilities `freq(e) / outflow(source)` on the support, stationary
/// vertex distribution equal to the outflow.
pub fn edge_vector_to_markov<S: Scalar>(
    sft: &Sft,
    solution: &EdgeFrequencyVector<S>,
) -> Result<MarkovChain<S>> {
    solution.validate(sft)?;
    let tol = S::solver_tol();
    let n = sft.alphabet_size();
    let mut outflow = vec![S::zero(); n];
    for (e, f) in solution.freq().iter().enumerate() {
        let (u, _) = sft.edges()[e];
        outflow[u as usize] = outflow[u as usize].clone() + f.clone();
    }
    let probs = solution
        .freq()
        .iter()
        .enumerate()
        .map(|(e, f)| {
            let (u, _) = sft.edges()[e];
            if outflow[u as usize] > tol {
                f.clone() / outflow[u as usize].clone()
            } else {
                S::zero()
            }
        })
        .collect();
    Ok(MarkovChain {
        sft: sft.clone(),
        freq: solution.freq().to_vec(),
        probs,
        stationary: outflow,
    })
}

impl<S: Scalar> MarkovChain<S> {
    pub fn sft(&self) -> &Sft {
        &self.sft
    }

    pub fn transition_probability(&self, edge: usize) -> S {
        self.probs[edge].clone()
    }

    pub fn stationary(&self, v: Symbol) -> S {
        self.stationary[v as usize].clone()
    }

    pub fn edge_frequency(&self, edge: usize) -> S {
        self.freq[edge].clone()
    }

    /// Round trip back to edge frequencies: `pi(src) * P(e)`.
    pub fn stationary_edge_frequencies(&self) -> EdgeFrequencyVector<S> {
        let freq = self
            .probs
            .iter()
            .enumerate()
            .map(|(e, p)| {
                let (u, _) = self.sft.edges()[e];
                self.stationary[u as usize].clone() * p.clone()
            })
            .collect();
        EdgeFrequencyVector::new(freq)
    }

    pub fn support_vertices(&self) -> Vec<Symbol> {
        let tol = S::solver_tol();
        (0..self.sft.alphabet_size() as Symbol)
            .filter(|&v| self.stationary[v as usize] > tol)
            .collect()
    }

    /// Probability that a stationary sample starts with the given block.
    pub fn block_probability(&self, block: &[Symbol]) -> S {
        if block.is_empty() {
            return S::one();
        }
        let mut p = self.stationary[block[0] as usize].clone();
        for pair in block.windows(2) {
            if p.is_zero() {
                return S::zero();
            }
            match self.sft.edge_id(pair[0], pair[1]) {
                Some(e) => p = p * self.probs[e].clone(),
                None => return S::zero(),
            }
        }
        p
    }

    /// Simulates `steps` transitions from a stationary start; the word has
    /// `steps + 1` symbols. Deterministic given the RNG state.
    pub fn sample_word<R: rand::Rng>(&self, steps: usize, rng: &mut R) -> Word {
        let mut symbols = Vec::with_capacity(steps + 1);
        let start = sample_index(
            rng,
            (0..self.sft.alphabet_size()).map(|v| self.stationary[v].to_f64_lossy()),
        );
        let mut v = start as Symbol;
        symbols.push(v);
        for _ in 0..steps {
            let out = self.sft.out_edge_ids(v);
            let pick = sample_index(rng, out.iter().map(|&e| self.probs[e].to_f64_lossy()));
            let e = out[pick];
            v = self.sft.edges()[e].1;
            symbols.push(v);
        }
        Word::new_unchecked(symbols)
    }

    /// Strongly connected components of the support; for a stationary chain
    /// these are exactly the recurrent (ergodic) classes.
    pub fn recurrent_classes(&self) -> Vec<RecurrentClass<S>> {
        let tol = S::solver_tol();
        let support_edges: Vec<usize> = (0..self.sft.edge_count())
            .filter(|&e| self.freq[e] > tol)
            .collect();
        let edges: Vec<(Symbol, Symbol)> = support_edges
            .iter()
            .map(|&e| self.sft.edges()[e])
            .collect();
        let comps = strongly_connected_components(self.sft.alphabet_size(), &edges);
        comps
            .into_iter()
            .filter_map(|vertices| {
                let in_comp: std::collections::BTreeSet<Symbol> = vertices.iter().copied().collect();
                let edge_ids: Vec<usize> = support_edges
                    .iter()
                    .copied()
                    .filter(|&e| {
                        let (u, v) = self.sft.edges()[e];
                        in_comp.contains(&u) && in_comp.contains(&v)
                    })
                    .collect();
                if edge_ids.is_empty() {
                    return None;
                }
                let mass = vertices
                    .iter()
                    .map(|&v| self.stationary[v as usize].clone())
                    .fold(S::zero(), |a, b| a + b);
                Some(RecurrentClass {
                    vertices,
                    edge_ids,
                    mass,
                })
            })
            .collect()
    }
}

fn sample_index<R: rand::Rng>(rng: &mut R, weights: impl Iterator<Item = f64>) -> usize {
    let ws: Vec<f64> = weights.collect();
    let total: f64 = ws.iter().sum();
    let mut t = rng.random::<f64>() * total;
    for (i, w) in ws.iter().enumerate() {
        t -= w;
        if t <= 0.0 {
            return i;
        }
    }
    ws.len().saturating_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::enumerate_simple_cycles;
    use crate::FastRational;
    use num_traits::Zero;

    type Q = FastRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    #[test]
    fn golden_mean_edge_objective() {
        let sft = Sft::golden_mean();
        // Indicator of edges leaving symbol 1.
        let obj: Vec<Q> = sft
            .edges()
            .iter()
            .map(|&(u, _)| if u == 1 { q(1, 1) } else { Q::zero() })
            .collect();
        let out = lp_optimize(&sft, &obj, Sense::Maximize, &[]).unwrap();
        assert_eq!(out.value, q(1, 2));
        let cycle = vertex_to_cycle(&sft, &out.solution).unwrap();
        assert_eq!(cycle.symbols(), &[0, 1]);
    }

    #[test]
    fn zero_objective_gives_zero() {
        let sft = Sft::full_shift(3).unwrap();
        let obj = vec![Q::zero(); sft.edge_count()];
        let out = lp_optimize(&sft, &obj, Sense::Maximize, &[]).unwrap();
        assert_eq!(out.value, Q::zero());
        out.solution.validate(&sft).unwrap();
    }

    #[test]
    fn pinned_loop_forces_point_mass() {
        let sft = Sft::full_shift(2).unwrap();
        let e00 = sft.edge_id(0, 0).unwrap();
        let e11 = sft.edge_id(1, 1).unwrap();
        let mut obj = vec![Q::zero(); 4];
        obj[e11] = q(1, 1);
        let mut pin = vec![Q::zero(); 4];
        pin[e00] = q(1, 1);
        let out = lp_optimize(&sft, &obj, Sense::Maximize, &[(pin, q(1, 1))]).unwrap();
        assert_eq!(out.value, Q::zero());
        assert_eq!(out.solution.get(e00), &q(1, 1));
    }

    #[test]
    fn infeasible_alpha_detected() {
        let sft = Sft::full_shift(2).unwrap();
        let obj = vec![Q::zero(); 4];
        let row = vec![q(1, 1); 4];
        let err = lp_optimize(&sft, &obj, Sense::Maximize, &[(row, q(2, 1))]).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn float_clamp_within_tolerance() {
        let sft = Sft::golden_mean();
        // Frequency of symbol 1 lies in [0, 1/2]; ask for 0.5 + 1e-8, which
        // is infeasible for the solver but inside the clamp window.
        let obj = vec![0.0f64; 3];
        let ind1: Vec<f64> = sft
            .edges()
            .iter()
            .map(|&(u, _)| if u == 1 { 1.0 } else { 0.0 })
            .collect();
        let out = lp_optimize(&sft, &obj, Sense::Maximize, &[(ind1, 0.5 + 1e-8)]).unwrap();
        assert!(out.clamped);
        let err = lp_optimize(
            &sft,
            &obj,
            Sense::Maximize,
            &[(
                sft.edges()
                    .iter()
                    .map(|&(u, _)| if u == 1 { 1.0 } else { 0.0 })
                    .collect(),
                0.6,
            )],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn vertex_to_cycle_on_mixtures() {
        let sft = Sft::golden_mean();
        let c0 = Cycle::new(vec![0], &sft).unwrap();
        let c01 = Cycle::new(vec![0, 1], &sft).unwrap();
        let v0 = EdgeFrequencyVector::<Q>::uniform_cycle(&sft, &c0);
        let v01 = EdgeFrequencyVector::uniform_cycle(&sft, &c01);
        assert_eq!(vertex_to_cycle(&sft, &v01).unwrap(), c01);
        let mix = v0.convex_combination(&q(1, 2), &v01);
        assert_eq!(vertex_to_cycle(&sft, &mix), None);
    }

    #[test]
    fn markov_from_golden_mean_mixture() {
        let sft = Sft::golden_mean();
        let freq = EdgeFrequencyVector::new(vec![q(2, 3), q(1, 6), q(1, 6)]);
        let chain = edge_vector_to_markov(&sft, &freq).unwrap();
        let e00 = sft.edge_id(0, 0).unwrap();
        let e01 = sft.edge_id(0, 1).unwrap();
        let e10 = sft.edge_id(1, 0).unwrap();
        assert_eq!(chain.transition_probability(e00), q(4, 5));
        assert_eq!(chain.transition_probability(e01), q(1, 5));
        assert_eq!(chain.transition_probability(e10), q(1, 1));
        assert_eq!(chain.stationary_edge_frequencies(), freq);
    }

    #[test]
    fn deterministic_two_cycle_chain() {
        let sft = Sft::golden_mean();
        let c01 = Cycle::new(vec![0, 1], &sft).unwrap();
        let v = EdgeFrequencyVector::<Q>::uniform_cycle(&sft, &c01);
        let chain = edge_vector_to_markov(&sft, &v).unwrap();
        assert_eq!(chain.transition_probability(sft.edge_id(0, 1).unwrap()), q(1, 1));
        assert_eq!(chain.transition_probability(sft.edge_id(1, 0).unwrap()), q(1, 1));
        assert_eq!(chain.transition_probability(sft.edge_id(0, 0).unwrap()), Q::zero());
    }

    #[test]
    fn bernoulli_chain_probabilities() {
        let sft = Sft::full_shift(2).unwrap();
        let freq = EdgeFrequencyVector::new(vec![q(1, 4); 4]);
        let chain = edge_vector_to_markov(&sft, &freq).unwrap();
        for e in 0..4 {
            assert_eq!(chain.transition_probability(e), q(1, 2));
        }
        assert_eq!(chain.block_probability(&[1, 1]), q(1, 4));
    }

    #[test]
    fn uniform_cycle_vectors_are_feasible_and_basic_solutions_decompose() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for mask in (0..4096u64).step_by(37) {
            let n = 4;
            let flags: Vec<bool> = (0..16).map(|i| mask >> (i % 12) & 1 == 1 || i % 5 == 0).collect();
            let pairs: Vec<(Symbol, Symbol)> = (0..16)
                .filter(|&i| flags[i])
                .map(|i| ((i / n) as Symbol, (i % n) as Symbol))
                .collect();
            let Ok(sft) = Sft::new(n, &pairs) else { continue };
            for cycle in enumerate_simple_cycles(&sft, n, 10_000).unwrap() {
                let v = EdgeFrequencyVector::<Q>::uniform_cycle(&sft, &cycle);
                v.validate(&sft).unwrap();
            }
            let obj: Vec<Q> = (0..sft.edge_count())
                .map(|_| q(rng.random_range(-4..5), 1 + rng.random_range(0..3)))
                .collect();
            let out = lp_optimize(&sft, &obj, Sense::Maximize, &[]).unwrap();
            let parts = out.solution.decompose_into_cycles(&sft).unwrap();
            let total: Q = parts.iter().map(|(_, m)| m.clone()).fold(Q::zero(), |a, b| a + b);
            assert_eq!(total, q(1, 1));
            // Pure-polytope basic optima are single cycles.
            assert_eq!(parts.len(), 1);
        }
    }

    #[test]
    fn lp_value_matches_cycle_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let n = rng.random_range(2..5);
            let mut pairs = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    if rng.random_bool(0.6) {
                        pairs.push((a as Symbol, b as Symbol));
                    }
                }
            }
            let Ok(sft) = Sft::new(n, &pairs) else { continue };
            let obj: Vec<Q> = (0..sft.edge_count())
                .map(|_| q(rng.random_range(-6..7), rng.random_range(1..4)))
                .collect();
            let out = lp_optimize(&sft, &obj, Sense::Maximize, &[]).unwrap();
            let cycles = enumerate_simple_cycles(&sft, n, 10_000).unwrap();
            let oracle = cycles
                .iter()
                .map(|c| {
                    let ids = c.edge_ids(&sft);
                    let total: Q = ids.iter().map(|&e| obj[e].clone()).fold(Q::zero(), |a, b| a + b);
                    total / q(ids.len() as i64, 1)
                })
                .max()
                .unwrap();
            assert_eq!(out.value, oracle);
        }
    }

    #[test]
    fn lex_tiebreak_is_canonical() {
        let sft = Sft::full_shift(2).unwrap();
        let obj = vec![Q::zero(); 4];
        let out = lp_optimize_with(&sft, &obj, Sense::Maximize, &[], None, true).unwrap();
        // Lexicographically least point of the whole polytope: all mass on the
        // last edge, the 1 -> 1 loop.
        assert_eq!(
            out.solution.freq(),
            &[Q::zero(), Q::zero(), Q::zero(), q(1, 1)]
        );
    }

    #[test]
    fn round_trip_identity_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let sft = Sft::full_shift(3).unwrap();
        let cycles = enumerate_simple_cycles(&sft, 3, 10_000).unwrap();
        for _ in 0..25 {
            // Random rational mixture of cycles.
            let mut freq = vec![Q::zero(); sft.edge_count()];
            let mut mass = Q::zero();
            for c in &cycles {
                let w = q(rng.random_range(0..5), 7);
                let v = EdgeFrequencyVector::<Q>::uniform_cycle(&sft, c);
                for (f, g) in freq.iter_mut().zip(v.freq()) {
                    *f = f.clone() + w.clone() * g.clone();
                }
                mass = mass + w;
            }
            if mass.is_zero() {
                continue;
            }
            let freq: Vec<Q> = freq.into_iter().map(|f| f / mass.clone()).collect();
            let efv = EdgeFrequencyVector::new(freq);
            efv.validate(&sft).unwrap();
            let chain = edge_vector_to_markov(&sft, &efv).unwrap();
            assert_eq!(chain.stationary_edge_frequencies(), efv);
        }
    }
}
