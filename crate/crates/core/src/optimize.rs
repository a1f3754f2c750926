//! The variational optimizers: maximum / minimum ergodic averages, the
//! conditional maximum `Lambda_{F|Phi}(alpha)` and its spectrum, constrained
//! and unconstrained ratio optimization, and the extreme-point ergodicity
//! check.
//!
//! Locally constant data is solved exactly (two independent routes, graph and
//! LP, cross-checked); asymptotically additive inputs go through their
//! additive approximants and every returned value becomes an interval.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::karp::{max_mean_cycle, min_mean_cycle};
use crate::orbit;
use crate::polytope::{
    lp_optimize_with, project_frequencies, vertex_to_cycle, EdgeFrequencyVector, Sense,
};
use crate::potential::{CocyclePotential, DenominatorBound, LocallyConstantPotential, Potential};
use crate::scalar::Scalar;
use crate::simplex::{self, LpProblem, SimplexStatus};
use crate::symbolic::{enumerate_simple_cycles, Cycle, Recoding, Sft};

/// A closed interval; degenerate (`lo == hi`) in exact computations.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<S> {
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> Interval<S> {
    pub fn point(v: S) -> Self {
        Interval { lo: v.clone(), hi: v }
    }

    pub fn new(lo: S, hi: S) -> Self {
        if lo > hi {
            Interval { hi: lo.clone(), lo: hi }
        } else {
            Interval { lo, hi }
        }
    }

    pub fn width(&self) -> S {
        self.hi.clone() - self.lo.clone()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: &S) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    pub fn midpoint_f64(&self) -> f64 {
        (self.lo.to_f64_lossy() + self.hi.to_f64_lossy()) / 2.0
    }
}

/// An extremal ergodic average with its witnessing measure.
#[derive(Debug, Clone)]
pub struct Extremum<S> {
    pub value: S,
    /// Witness measure as base-SFT edge frequencies.
    pub witness: EdgeFrequencyVector<S>,
    /// Periodic-orbit witness (projection of the single-cycle LP vertex).
    pub cycle: Option<Cycle>,
}

fn cross_check_tol<S: Scalar>() -> S {
    if S::EXACT {
        S::zero()
    } else {
        S::from_ratio(1, 1_000_000_000)
    }
}

/// `beta(F)` for a locally constant potential: the exact max-mean-cycle value,
/// computed independently by Karp's algorithm and by the polytope LP; the two
/// routes must agree.
pub fn max_ergodic_average<S: Scalar>(
    sft: &Sft,
    f: &LocallyConstantPotential<S>,
) -> Result<Extremum<S>> {
    extremal_average(sft, f, Sense::Maximize)
}

/// `eta(F)`: as `max_ergodic_average` with sense min.
pub fn min_ergodic_average<S: Scalar>(
    sft: &Sft,
    f: &LocallyConstantPotential<S>,
) -> Result<Extremum<S>> {
    extremal_average(sft, f, Sense::Minimize)
}

fn extremal_average<S: Scalar>(
    sft: &Sft,
    f: &LocallyConstantPotential<S>,
    sense: Sense,
) -> Result<Extremum<S>> {
    let rec = Recoding::for_ranges(sft, &[f.range()])?;
    let weights = f.edge_weights(&rec)?;
    let graph_route = match sense {
        Sense::Maximize => max_mean_cycle(rec.sft(), &weights)?,
        Sense::Minimize => min_mean_cycle(rec.sft(), &weights)?,
    };
    let lp_route = lp_optimize_with(rec.sft(), &weights, sense, &[], None, true)?;
    if (graph_route.mean.clone() - lp_route.value.clone()).abs() > cross_check_tol::<S>() {
        return Err(Error::NumericallyUnstable(format!(
            "graph route {} disagrees with LP route {}",
            graph_route.mean, lp_route.value
        )));
    }
    let cycle = vertex_to_cycle(rec.sft(), &lp_route.solution).map(|c| rec.project_cycle(&c));
    Ok(Extremum {
        value: lp_route.value,
        witness: project_frequencies(&rec, &lp_route.solution),
        cycle,
    })
}

/// Certified bounds for an asymptotically additive potential's extremal
/// average, via the additive approximant plus orbit-side bounds.
#[derive(Debug, Clone)]
pub struct AapExtremum {
    pub interval: Interval<f64>,
    /// Exact extremal average of the approximant.
    pub approximant_value: f64,
    /// Certified approximant error (zero means the reduction was exact).
    pub xi: f64,
    /// Finite-horizon certified upper bounds `(1/n) max f_n` along doubling n
    /// (max sense only).
    pub horizon_upper: Vec<(usize, f64)>,
    /// Best bound extracted from short periodic orbits.
    pub cycle_bound: Option<f64>,
    /// Set when the diagonal-cocycle scalar reduction applied (exact).
    pub exact: bool,
}

/// Knobs for the orbit-side refinement of AAP bounds.
#[derive(Debug, Clone)]
pub struct AapOptions {
    pub xi: f64,
    /// Exhaustive-search cap for cocycle finite horizons (0 disables).
    pub horizon_cap: usize,
    pub cycle_len_cap: usize,
}

impl Default for AapOptions {
    fn default() -> Self {
        AapOptions {
            xi: 1e-3,
            horizon_cap: 12,
            cycle_len_cap: 4,
        }
    }
}

pub fn max_ergodic_average_aap(
    sft: &Sft,
    pot: &Potential,
    opts: &AapOptions,
) -> Result<AapExtremum> {
    if let Potential::Cocycle(c) = pot {
        if let Some(value) = diagonal_beta(sft, c)? {
            return Ok(AapExtremum {
                interval: Interval::point(value),
                approximant_value: value,
                xi: 0.0,
                horizon_upper: Vec::new(),
                cycle_bound: None,
                exact: true,
            });
        }
    }
    let (approx, xi) = pot.approximant(sft, opts.xi)?;
    let base = max_ergodic_average(sft, &approx)?;
    let v = base.value;
    let mut lo = v - xi;
    let mut hi = v + xi;
    let mut horizon_upper = Vec::new();
    let mut cycle_bound = None;
    if let Potential::Cocycle(c) = pot {
        // Lower bounds from short periodic orbits, upper bounds from exact
        // finite horizons (both certified).
        let cycles = enumerate_simple_cycles(sft, opts.cycle_len_cap.max(1), 10_000)?;
        let best_cycle = cycles
            .iter()
            .map(|cy| c.cycle_lower_bound(cy))
            .fold(f64::NEG_INFINITY, f64::max);
        if best_cycle.is_finite() {
            cycle_bound = Some(best_cycle);
            lo = lo.max(best_cycle);
        }
        let mut n = 1usize;
        while n <= opts.horizon_cap {
            match orbit::max_cocycle_over_words(sft, c, n, 400_000) {
                Ok(max_fn) => {
                    horizon_upper.push((n, max_fn / n as f64));
                    hi = hi.min(max_fn / n as f64);
                }
                Err(_) => break,
            }
            n *= 2;
        }
    }
    if lo > hi {
        lo = hi;
    }
    Ok(AapExtremum {
        interval: Interval::new(lo, hi),
        approximant_value: v,
        xi,
        horizon_upper,
        cycle_bound,
        exact: xi == 0.0,
    })
}

pub fn min_ergodic_average_aap(
    sft: &Sft,
    pot: &Potential,
    opts: &AapOptions,
) -> Result<AapExtremum> {
    let (approx, xi) = pot.approximant(sft, opts.xi)?;
    let base = min_ergodic_average(sft, &approx)?;
    let v = base.value;
    let mut lo = v - xi;
    let mut hi = v + xi;
    let mut cycle_bound = None;
    if let Potential::Cocycle(c) = pot {
        // Any periodic orbit's value is an upper bound for the minimum.
        let cycles = enumerate_simple_cycles(sft, opts.cycle_len_cap.max(1), 10_000)?;
        let best = cycles
            .iter()
            .map(|cy| c.cycle_upper_bound(cy))
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            cycle_bound = Some(best);
            hi = hi.min(best);
        }
    }
    if lo > hi {
        lo = hi;
    }
    Ok(AapExtremum {
        interval: Interval::new(lo, hi),
        approximant_value: v,
        xi,
        horizon_upper: Vec::new(),
        cycle_bound,
        exact: xi == 0.0,
    })
}

/// `beta` of a diagonal cocycle, exactly: the cocycle is the maximum of the
/// per-coordinate additive potentials, so its maximum ergodic average is the
/// best coordinate's max mean cycle.
fn diagonal_beta(sft: &Sft, c: &CocyclePotential) -> Result<Option<f64>> {
    let Some(coords) = c.diagonal_coordinates(sft) else {
        return Ok(None);
    };
    let mut best = f64::NEG_INFINITY;
    for h in coords {
        let v = max_ergodic_average(sft, &h)?.value;
        best = best.max(v);
    }
    Ok(Some(best))
}

/// The conditional-optimization workspace: a common recoding of `F` and `Phi`
/// with the feasible interval `[eta(Phi), beta(Phi)]` precomputed.
#[derive(Debug, Clone)]
pub struct ConditionalProblem<S> {
    rec: Recoding,
    f_weights: Vec<S>,
    phi_weights: Vec<S>,
    eta: S,
    beta_phi: S,
}

/// One conditional optimum `Lambda_{F|Phi}(alpha)`.
#[derive(Debug, Clone)]
pub struct ConditionalOutcome<S> {
    pub alpha: S,
    pub value: S,
    pub witness: EdgeFrequencyVector<S>,
    pub cycle: Option<Cycle>,
    pub clamped: bool,
    pub(crate) basis: Vec<usize>,
    pub(crate) witness_recoded: EdgeFrequencyVector<S>,
}

impl<S: Scalar> ConditionalOutcome<S> {
    /// LP basis usable as a warm start for nearby alphas.
    pub fn warm_hint(&self) -> &[usize] {
        &self.basis
    }
}

impl<S: Scalar> ConditionalProblem<S> {
    pub fn new(
        sft: &Sft,
        f: &LocallyConstantPotential<S>,
        phi: &LocallyConstantPotential<S>,
    ) -> Result<Self> {
        let rec = Recoding::for_ranges(sft, &[f.range(), phi.range()])?;
        let f_weights = f.edge_weights(&rec)?;
        let phi_weights = phi.edge_weights(&rec)?;
        let eta = min_mean_cycle(rec.sft(), &phi_weights)?.mean;
        let beta_phi = max_mean_cycle(rec.sft(), &phi_weights)?.mean;
        Ok(ConditionalProblem {
            rec,
            f_weights,
            phi_weights,
            eta,
            beta_phi,
        })
    }

    pub fn eta(&self) -> &S {
        &self.eta
    }

    pub fn beta_phi(&self) -> &S {
        &self.beta_phi
    }

    pub fn recoding(&self) -> &Recoding {
        &self.rec
    }

    /// `Lambda_{F|Phi}(alpha)`: LP over the polytope with the extra equality
    /// `int phi = alpha`. Exact-mode alphas must lie in the feasible interval;
    /// inexact alphas within `1e-9` outside are clamped and flagged.
    pub fn lambda(&self, alpha: &S) -> Result<ConditionalOutcome<S>> {
        self.lambda_with(alpha, None, false)
    }

    pub fn lambda_with(
        &self,
        alpha: &S,
        hint: Option<&[usize]>,
        lex: bool,
    ) -> Result<ConditionalOutcome<S>> {
        let tol = S::solver_tol() * S::from_int(64);
        let mut a = alpha.clone();
        let mut clamped = false;
        if a < self.eta {
            if self.eta.clone() - a.clone() <= tol {
                a = self.eta.clone();
                clamped = true;
            } else {
                return Err(Error::Infeasible(format!(
                    "alpha {alpha} below eta(Phi) = {}",
                    self.eta
                )));
            }
        } else if a > self.beta_phi {
            if a.clone() - self.beta_phi.clone() <= tol {
                a = self.beta_phi.clone();
                clamped = true;
            } else {
                return Err(Error::Infeasible(format!(
                    "alpha {alpha} above beta(Phi) = {}",
                    self.beta_phi
                )));
            }
        }
        let extras = vec![(self.phi_weights.clone(), a.clone())];
        let out = lp_optimize_with(
            self.rec.sft(),
            &self.f_weights,
            Sense::Maximize,
            &extras,
            hint,
            lex,
        )?;
        let cycle =
            vertex_to_cycle(self.rec.sft(), &out.solution).map(|c| self.rec.project_cycle(&c));
        Ok(ConditionalOutcome {
            alpha: a,
            value: out.value,
            witness: project_frequencies(&self.rec, &out.solution),
            cycle,
            clamped: clamped || out.clamped,
            basis: out.basis,
            witness_recoded: out.solution,
        })
    }

    /// `beta(F)` and the flat-top interval `[alpha_1, alpha_2]`: the extreme
    /// `Phi`-averages over the set of `F`-maximizing measures, by two
    /// auxiliary LPs pinned to the optimal value.
    pub fn flat_top(&self) -> Result<(S, S, S)> {
        let beta_f = max_mean_cycle(self.rec.sft(), &self.f_weights)?.mean;
        let pin = vec![(self.f_weights.clone(), beta_f.clone())];
        let a1 = lp_optimize_with(
            self.rec.sft(),
            &self.phi_weights,
            Sense::Minimize,
            &pin,
            None,
            false,
        )?
        .value;
        let a2 = lp_optimize_with(
            self.rec.sft(),
            &self.phi_weights,
            Sense::Maximize,
            &pin,
            None,
            false,
        )?
        .value;
        Ok((beta_f, a1, a2))
    }

    /// Sweeps a uniform grid over `[eta, beta(Phi)]`, computes the flat top,
    /// asserts sampled unimodality, and records the largest adjacent jump.
    ///
    /// Grid points are solved in deterministic parallel chunks; within a chunk
    /// each solve warm-starts from its predecessor's basis.
    pub fn spectrum(&self, grid_size: usize) -> Result<SpectrumResult<S>> {
        assert!(grid_size >= 3, "grid_size must be at least 3");
        let (beta_f, a1, a2) = self.flat_top()?;
        let span = self.beta_phi.clone() - self.eta.clone();
        let denom = S::from_int((grid_size - 1) as i64);
        let alphas: Vec<S> = (0..grid_size)
            .map(|i| {
                self.eta.clone() + span.clone() * S::from_int(i as i64) / denom.clone()
            })
            .collect();
        let threads = rayon::current_num_threads().max(1);
        let chunk = grid_size.div_ceil(threads).max(1);
        let chunks: Vec<Result<Vec<(S, S)>>> = alphas
            .par_chunks(chunk)
            .map(|block| {
                let mut hint: Option<Vec<usize>> = None;
                let mut out = Vec::with_capacity(block.len());
                for alpha in block {
                    let sol = self.lambda_with(alpha, hint.as_deref(), false)?;
                    hint = Some(sol.basis.clone());
                    out.push((alpha.clone(), sol.value));
                }
                Ok(out)
            })
            .collect();
        let mut grid: Vec<(S, Interval<S>)> = Vec::with_capacity(grid_size);
        for c in chunks {
            for (a, v) in c? {
                grid.push((a, Interval::point(v)));
            }
        }

        let tol = unimodality_tol::<S>();
        // Nondecreasing up to alpha_1, nonincreasing after alpha_2, and flat
        // at beta(F) in between.
        for w in grid.windows(2) {
            let (ref a, ref va) = w[0];
            let (ref b, ref vb) = w[1];
            if *b <= a1 && va.lo.clone() > vb.lo.clone() + tol.clone() {
                return Err(Error::UnimodalityViolation {
                    a: a.to_f64_lossy(),
                    b: b.to_f64_lossy(),
                    c: a1.to_f64_lossy(),
                });
            }
            if *a >= a2 && vb.lo.clone() > va.lo.clone() + tol.clone() {
                return Err(Error::UnimodalityViolation {
                    a: a.to_f64_lossy(),
                    b: b.to_f64_lossy(),
                    c: a2.to_f64_lossy(),
                });
            }
        }
        for (a, v) in &grid {
            if *a >= a1 && *a <= a2 && (v.lo.clone() - beta_f.clone()).abs() > tol {
                return Err(Error::UnimodalityViolation {
                    a: a.to_f64_lossy(),
                    b: a.to_f64_lossy(),
                    c: beta_f.to_f64_lossy(),
                });
            }
        }

        let max_adjacent_jump = grid
            .windows(2)
            .map(|w| (w[1].1.lo.clone() - w[0].1.lo.clone()).abs())
            .fold(S::zero(), S::max_of);
        Ok(SpectrumResult {
            range: (self.eta.clone(), self.beta_phi.clone()),
            grid,
            flat_top: (a1.clone(), a2),
            beta_f,
            alpha_star: a1,
            max_adjacent_jump,
        })
    }
}

fn unimodality_tol<S: Scalar>() -> S {
    if S::EXACT {
        S::zero()
    } else {
        S::from_ratio(1, 1_000_000_000)
    }
}

/// Grid of `(alpha, Lambda)` over the feasible interval with the flat-top
/// interval and continuity diagnostics.
#[derive(Debug, Clone)]
pub struct SpectrumResult<S> {
    pub range: (S, S),
    pub grid: Vec<(S, Interval<S>)>,
    pub flat_top: (S, S),
    pub beta_f: S,
    /// One alpha attaining `Lambda = beta(F)` (the left flat-top endpoint).
    pub alpha_star: S,
    pub max_adjacent_jump: S,
}

/// One-shot spectrum sweep.
pub fn spectrum<S: Scalar>(
    sft: &Sft,
    f: &LocallyConstantPotential<S>,
    phi: &LocallyConstantPotential<S>,
    grid_size: usize,
) -> Result<SpectrumResult<S>> {
    ConditionalProblem::new(sft, f, phi)?.spectrum(grid_size)
}

/// Convenience wrapper over `ConditionalProblem` for a single alpha.
pub fn conditional_max<S: Scalar>(
    sft: &Sft,
    f: &LocallyConstantPotential<S>,
    phi: &LocallyConstantPotential<S>,
    alpha: &S,
) -> Result<ConditionalOutcome<S>> {
    ConditionalProblem::new(sft, f, phi)?.lambda(alpha)
}

/// Conditional maximum for AAP inputs: exact on the approximants, widened by
/// the certified objective error and by the constraint-side window (the
/// feasible alpha is only known within `xi_phi`, so the interval takes the
/// extreme `Lambda` values over that window, using unimodality).
pub fn conditional_max_aap(
    sft: &Sft,
    f: &Potential,
    phi: &Potential,
    alpha: f64,
    opts: &AapOptions,
) -> Result<(Interval<f64>, ConditionalOutcome<f64>)> {
    let (f_a, xi_f) = f.approximant(sft, opts.xi)?;
    let (phi_a, xi_phi) = phi.approximant(sft, opts.xi)?;
    let problem = ConditionalProblem::new(sft, &f_a, &phi_a)?;
    let center = problem.lambda(&alpha)?;
    if xi_f == 0.0 && xi_phi == 0.0 {
        let v = Interval::point(center.value);
        return Ok((v, center));
    }
    let clamp = |a: f64| a.clamp(*problem.eta(), *problem.beta_phi());
    let left = problem.lambda(&clamp(alpha - xi_phi))?.value;
    let right = problem.lambda(&clamp(alpha + xi_phi))?.value;
    let mut hi = left.max(right);
    let lo = left.min(right);
    let (beta_f, a1, a2) = problem.flat_top()?;
    if alpha + xi_phi >= a1 && alpha - xi_phi <= a2 {
        hi = hi.max(beta_f);
    }
    Ok((
        Interval::new(lo - xi_f, hi + xi_f),
        center,
    ))
}

/// Outcome of a ratio optimization `sup F_* / G_*`.
#[derive(Debug, Clone)]
pub struct RatioOutcome<S> {
    pub value: S,
    pub witness: EdgeFrequencyVector<S>,
    pub cycle: Option<Cycle>,
    /// Total mass of the Charnes-Cooper variables (the reciprocal of the
    /// witness's `G`-average).
    pub mass: S,
}

/// Constrained ratio optimization (the level-set form):
/// `sup F_*(mu) / G_*(mu)` over `{ Phi_*(mu) / Psi_*(mu) = alpha }`.
///
/// Solved as a linear program after the normalization substitution
/// `y = x / (g . x)`: flow conservation and the constraint
/// `(phi - alpha psi) . y = 0` are homogeneous, the denominator is pinned by
/// `g . y = 1`, and the total mass is recovered afterwards to unscale the
/// witness.
pub fn ratio_max_constrained<S: Scalar>(
    sft: &Sft,
    f: &LocallyConstantPotential<S>,
    g: &LocallyConstantPotential<S>,
    phi: &LocallyConstantPotential<S>,
    psi: &LocallyConstantPotential<S>,
    alpha: &S,
    sigma: &DenominatorBound<S>,
) -> Result<RatioOutcome<S>> {
    sigma.validate_for(g)?;
    sigma.validate_for(psi)?;
    let rec = Recoding::for_ranges(sft, &[f.range(), g.range(), phi.range(), psi.range()])?;
    let f_w = f.edge_weights(&rec)?;
    let g_w = g.edge_weights(&rec)?;
    let phi_w = phi.edge_weights(&rec)?;
    let psi_w = psi.edge_weights(&rec)?;
    let constraint: Vec<S> = phi_w
        .iter()
        .zip(psi_w.iter())
        .map(|(p, q)| p.clone() - alpha.clone() * q.clone())
        .collect();
    solve_ratio(&rec, &f_w, &g_w, Some(constraint), Sense::Maximize)
}

/// Unconstrained ratio optimization `sup { F_*(mu) / G_*(mu) }`, plus the
/// ergodic-attainment check: the optimal face must contain a single-cycle
/// vertex, which is returned.
pub fn ratio_max<S: Scalar>(
    sft: &Sft,
    f: &LocallyConstantPotential<S>,
    g: &LocallyConstantPotential<S>,
    sigma: &DenominatorBound<S>,
) -> Result<RatioOutcome<S>> {
    ratio_extremum(sft, f, g, sigma, Sense::Maximize)
}

pub fn ratio_min<S: Scalar>(
    sft: &Sft,
    f: &LocallyConstantPotential<S>,
    g: &LocallyConstantPotential<S>,
    sigma: &DenominatorBound<S>,
) -> Result<RatioOutcome<S>> {
    ratio_extremum(sft, f, g, sigma, Sense::Minimize)
}

fn ratio_extremum<S: Scalar>(
    sft: &Sft,
    f: &LocallyConstantPotential<S>,
    g: &LocallyConstantPotential<S>,
    sigma: &DenominatorBound<S>,
    sense: Sense,
) -> Result<RatioOutcome<S>> {
    sigma.validate_for(g)?;
    let rec = Recoding::for_ranges(sft, &[f.range(), g.range()])?;
    let f_w = f.edge_weights(&rec)?;
    let g_w = g.edge_weights(&rec)?;
    let out = solve_ratio(&rec, &f_w, &g_w, None, sense)?;
    if out.cycle.is_none() {
        return Err(Error::NumericallyUnstable(
            "ratio optimum returned a non-vertex solution; ergodic attainment check failed"
                .into(),
        ));
    }
    Ok(out)
}

fn solve_ratio<S: Scalar>(
    rec: &Recoding,
    f_w: &[S],
    g_w: &[S],
    constraint: Option<Vec<S>>,
    sense: Sense,
) -> Result<RatioOutcome<S>> {
    let sft = rec.sft();
    let m = sft.edge_count();
    let mut rows = crate::polytope::flow_rows::<S>(sft);
    rows.push((g_w.to_vec(), S::one()));
    if let Some(c) = constraint {
        rows.push((c, S::zero()));
    }
    let problem = LpProblem {
        ncols: m,
        rows,
        objective: f_w.to_vec(),
        maximize: sense == Sense::Maximize,
    };
    let sol = simplex::solve(&problem)?;
    match sol.status {
        SimplexStatus::Optimal => {}
        SimplexStatus::Infeasible => {
            return Err(Error::Infeasible(
                "no invariant measure satisfies the ratio constraint".into(),
            ))
        }
        SimplexStatus::Unbounded => {
            return Err(Error::NumericallyUnstable(
                "ratio LP unbounded; denominator bound ineffective".into(),
            ))
        }
    }
    let mass = sol.x.iter().cloned().fold(S::zero(), |a, b| a + b);
    if mass <= S::solver_tol() {
        return Err(Error::NumericallyUnstable("zero-mass ratio solution".into()));
    }
    let unscaled: Vec<S> = sol.x.iter().map(|y| y.clone() / mass.clone()).collect();
    let efv = EdgeFrequencyVector::new(unscaled);
    let cycle = vertex_to_cycle(sft, &efv).map(|c| rec.project_cycle(&c));
    Ok(RatioOutcome {
        value: sol.value,
        witness: project_frequencies(rec, &efv),
        cycle,
        mass,
    })
}

/// Certified ratio bounds under approximant errors.
///
/// With `|F_* - F'_*| <= xi_f`, `|G_* - G'_*| <= xi_g`, and `G_* >= sigma`,
/// every measure satisfies
/// `F_*/G_* <= max((F'+xi_f)/(G'-xi_g), (F'+xi_f)/(G'+xi_g))` (the second
/// branch covers negative numerators), so the upper bound maximizes both
/// envelope branches by LP. The lower bound evaluates the mirror envelope at
/// the approximant's own optimizer. Requires `xi_g < sigma` so perturbed
/// denominators stay positive.
pub fn ratio_max_aap(
    sft: &Sft,
    f: &Potential,
    g: &Potential,
    sigma: f64,
    opts: &AapOptions,
) -> Result<(Interval<f64>, RatioOutcome<f64>)> {
    let (f_a, xi_f) = f.approximant(sft, opts.xi)?;
    let (g_a, xi_g) = g.approximant(sft, opts.xi)?;
    if xi_g >= sigma {
        return Err(Error::DenominatorViolated {
            sigma,
            observed: sigma - xi_g,
        });
    }
    let g_lo = g_a.map_weights(|w| w - xi_g);
    let g_hi = g_a.map_weights(|w| w + xi_g);
    if g_lo.min_weight() <= 0.0 {
        return Err(Error::DenominatorViolated {
            sigma,
            observed: g_lo.min_weight(),
        });
    }
    let center = ratio_max(sft, &f_a, &g_a, &DenominatorBound::tight(&g_a)?)?;
    if xi_f == 0.0 && xi_g == 0.0 {
        let v = Interval::point(center.value);
        return Ok((v, center));
    }
    // Constant denominator: the ratio is beta(F) / c, whose bounds also get
    // the orbit-side tightening.
    if xi_g == 0.0 && g_a.min_weight() == g_a.max_weight() {
        let c = g_a.min_weight();
        let beta = max_ergodic_average_aap(sft, f, opts)?;
        return Ok((
            Interval::new(beta.interval.lo / c, beta.interval.hi / c),
            center,
        ));
    }
    let f_up = f_a.map_weights(|w| w + xi_f);
    let f_dn = f_a.map_weights(|w| w - xi_f);
    let hi = ratio_max(sft, &f_up, &g_lo, &DenominatorBound::tight(&g_lo)?)?
        .value
        .max(ratio_max(sft, &f_up, &g_hi, &DenominatorBound::tight(&g_hi)?)?.value);
    // sup F/G is at least the certified value at the center's witness.
    let chain = crate::polytope::edge_vector_to_markov(sft, &center.witness)?;
    let num = crate::potential::measure_average_lc(&f_dn, &chain)?.lo;
    let den = if num >= 0.0 {
        crate::potential::measure_average_lc(&g_hi, &chain)?.lo
    } else {
        crate::potential::measure_average_lc(&g_lo, &chain)?.lo
    };
    let lo = num / den;
    Ok((Interval::new(lo, hi.max(lo)), center))
}

/// Report from the extreme-point ergodicity check at `alpha = eta(Phi)` and
/// `alpha = beta(Phi)`.
#[derive(Debug, Clone)]
pub struct ExtremeReport<S> {
    pub eta: S,
    pub beta_phi: S,
    pub value_at_eta: S,
    pub value_at_beta: S,
    pub cycle_at_eta: Cycle,
    pub cycle_at_beta: Cycle,
}

/// At the endpoints of the feasible interval the constraint hyperplane
/// supports the polytope, so the conditional optimum is attained by a vertex,
/// i.e. an ergodic (single-cycle) measure. Verifies that and reports the
/// cycles.
pub fn extreme_point_check<S: Scalar>(
    sft: &Sft,
    f: &LocallyConstantPotential<S>,
    phi: &LocallyConstantPotential<S>,
) -> Result<ExtremeReport<S>> {
    let problem = ConditionalProblem::new(sft, f, phi)?;
    let eta = problem.eta().clone();
    let beta_phi = problem.beta_phi().clone();
    let at_eta = problem.lambda_with(&eta, None, true)?;
    let at_beta = problem.lambda_with(&beta_phi, None, true)?;
    let cycle_at_eta = vertex_to_cycle(problem.rec.sft(), &at_eta.witness_recoded)
        .map(|c| problem.rec.project_cycle(&c))
        .ok_or_else(|| {
            Error::NumericallyUnstable("endpoint witness at eta is not a single cycle".into())
        })?;
    let cycle_at_beta = vertex_to_cycle(problem.rec.sft(), &at_beta.witness_recoded)
        .map(|c| problem.rec.project_cycle(&c))
        .ok_or_else(|| {
            Error::NumericallyUnstable("endpoint witness at beta is not a single cycle".into())
        })?;
    Ok(ExtremeReport {
        eta,
        beta_phi,
        value_at_eta: at_eta.value,
        value_at_beta: at_beta.value,
        cycle_at_eta,
        cycle_at_beta,
    })
}

/// Brute-force conditional optimum over mixtures of at most two simple
/// cycles: the independent oracle for small instances (with one extra
/// equality, every optimal vertex lies on an edge of the cycle polytope).
pub fn two_cycle_mixture_oracle<S: Scalar>(
    sft: &Sft,
    f: &LocallyConstantPotential<S>,
    phi: &LocallyConstantPotential<S>,
    alpha: &S,
) -> Result<Option<S>> {
    let rec = Recoding::for_ranges(sft, &[f.range(), phi.range()])?;
    let f_w = f.edge_weights(&rec)?;
    let phi_w = phi.edge_weights(&rec)?;
    let cycles = enumerate_simple_cycles(rec.sft(), rec.sft().alphabet_size(), 1_000_000)?;
    let stats: Vec<(S, S)> = cycles
        .iter()
        .map(|c| {
            let ids = c.edge_ids(rec.sft());
            let len = S::from_int(ids.len() as i64);
            let fm = ids.iter().map(|&e| f_w[e].clone()).fold(S::zero(), |a, b| a + b) / len.clone();
            let pm = ids.iter().map(|&e| phi_w[e].clone()).fold(S::zero(), |a, b| a + b) / len;
            (fm, pm)
        })
        .collect();
    let mut best: Option<S> = None;
    let mut relax = |v: S| {
        best = Some(match best.take() {
            None => v,
            Some(b) => S::max_of(b, v),
        });
    };
    for i in 0..stats.len() {
        let (fi, pi) = &stats[i];
        if pi == alpha {
            relax(fi.clone());
        }
        for (fj, pj) in stats.iter().skip(i + 1) {
            if pi == pj {
                continue;
            }
            // t * pi + (1 - t) * pj = alpha.
            let t = (alpha.clone() - pj.clone()) / (pi.clone() - pj.clone());
            if t >= S::zero() && t <= S::one() {
                relax(t.clone() * fi.clone() + (S::one() - t) * fj.clone());
            }
        }
    }
    Ok(best)
}
