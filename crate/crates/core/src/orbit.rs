//! Pointwise computations: finite-horizon maxima, empirical traces of sampled
//! generic words, level-set membership reports, and the specification-based
//! zig-zag construction of irregular witnesses.
//!
//! In a shift space the specification property is realized exactly by
//! connecting words found by BFS, so the construction below needs no metric
//! and no shadowing error: every assembled word is a genuine point of the
//! subshift.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::polytope::{EdgeFrequencyVector, MarkovChain};
use crate::potential::{measure_ratio, CocyclePotential, LocallyConstantPotential};
use crate::scalar::Scalar;
use crate::symbolic::{Recoding, Sft, Word};

/// Exact `(1/n) max_x f_n(x)` for a locally constant potential, by max-plus
/// dynamic programming over length-`n` walks of the recoded graph.
#[derive(Debug, Clone)]
pub struct HorizonResult<S> {
    pub n: usize,
    pub value: S,
    /// A word realizing the maximum (its first `n` Birkhoff terms sum to
    /// `n * value`).
    pub word: Word,
}

pub fn finite_horizon_max<S: Scalar>(
    sft: &Sft,
    f: &LocallyConstantPotential<S>,
    n: usize,
) -> Result<HorizonResult<S>> {
    if n < f.range() {
        return Err(Error::WordTooShort {
            len: n,
            range: f.range(),
        });
    }
    let rec = Recoding::for_ranges(sft, &[f.range()])?;
    let weights = f.edge_weights(&rec)?;
    let g = rec.sft();
    let nv = g.alphabet_size();
    let mut dist: Vec<Option<S>> = vec![Some(S::zero()); nv];
    let mut preds: Vec<Vec<Option<usize>>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut next: Vec<Option<S>> = vec![None; nv];
        let mut pred: Vec<Option<usize>> = vec![None; nv];
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            if let Some(base) = &dist[u as usize] {
                let cand = base.clone() + weights[e].clone();
                match &next[v as usize] {
                    Some(cur) if *cur >= cand => {}
                    _ => {
                        next[v as usize] = Some(cand);
                        pred[v as usize] = Some(e);
                    }
                }
            }
        }
        preds.push(pred);
        dist = next;
    }
    let (best_v, best) = dist
        .iter()
        .enumerate()
        .filter_map(|(v, d)| d.clone().map(|d| (v, d)))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("walks of every length exist");
    // Backtrack the argmax walk.
    let mut path_rev = vec![best_v as u32];
    let mut v = best_v;
    for k in (0..n).rev() {
        let e = preds[k][v].expect("predecessor on optimal walk");
        let (u, _) = g.edges()[e];
        path_rev.push(u);
        v = u as usize;
    }
    path_rev.reverse();
    let word = rec.project_path(&path_rev);
    Ok(HorizonResult {
        n,
        value: best / S::from_int(n as i64),
        word,
    })
}

/// Exact `max_x f_n(x)` for a cocycle by branch-and-bound over words, pruning
/// with `log||P|| + (n - k) max_s log||A_s||`. Errors when the node budget is
/// exhausted before the search completes.
pub fn max_cocycle_over_words(
    sft: &Sft,
    cocycle: &CocyclePotential,
    n: usize,
    node_budget: usize,
) -> Result<f64> {
    let per_step: f64 = (0..sft.alphabet_size())
        .map(|s| cocycle.matrix(s as u32).op_norm().ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut best = f64::NEG_INFINITY;
    let mut visited = 0usize;
    struct Frame {
        last: u32,
        product: crate::potential::Matrix,
        depth: usize,
    }
    let mut stack: Vec<Frame> = (0..sft.alphabet_size() as u32)
        .rev()
        .map(|s| Frame {
            last: s,
            product: cocycle.matrix(s).clone(),
            depth: 1,
        })
        .collect();
    while let Some(frame) = stack.pop() {
        visited += 1;
        if visited > node_budget {
            return Err(Error::HorizonTooLarge { n, cap: node_budget });
        }
        let log_norm = frame.product.op_norm().ln();
        if frame.depth == n {
            best = best.max(log_norm);
            continue;
        }
        if log_norm + (n - frame.depth) as f64 * per_step <= best {
            continue;
        }
        for next in (0..sft.alphabet_size() as u32).rev() {
            if sft.is_allowed(frame.last, next) {
                stack.push(Frame {
                    last: next,
                    product: cocycle.matrix(next).mul(&frame.product),
                    depth: frame.depth + 1,
                });
            }
        }
    }
    Ok(best)
}

/// Finite-horizon data for a cocycle: the exact value at `n` plus the
/// certified upper-bound sequence `(1/j) max f_j` along doubling `j <= n`
/// (nonincreasing by subadditivity, and an upper bound for `beta`).
#[derive(Debug, Clone)]
pub struct CocycleHorizon {
    pub n: usize,
    pub value: f64,
    pub upper_sequence: Vec<(usize, f64)>,
    pub certified_upper: f64,
}

pub fn finite_horizon_max_cocycle(
    sft: &Sft,
    cocycle: &CocyclePotential,
    n: usize,
    cap: usize,
) -> Result<CocycleHorizon> {
    if n > cap {
        return Err(Error::HorizonTooLarge { n, cap });
    }
    let budget = 2_000_000usize;
    let mut upper_sequence = Vec::new();
    let mut certified = f64::INFINITY;
    let mut j = 1usize;
    while j < n {
        let v = max_cocycle_over_words(sft, cocycle, j, budget)? / j as f64;
        upper_sequence.push((j, v));
        certified = certified.min(v);
        j *= 2;
    }
    let value = max_cocycle_over_words(sft, cocycle, n, budget)? / n as f64;
    upper_sequence.push((n, value));
    certified = certified.min(value);
    Ok(CocycleHorizon {
        n,
        value,
        upper_sequence,
        certified_upper: certified,
    })
}

/// One empirical checkpoint: the edge marginal `delta_{x,n}` of the first `n`
/// steps and the Birkhoff averages of the registered potentials.
#[derive(Debug, Clone)]
pub struct Checkpoint<S> {
    pub n: usize,
    pub freq: EdgeFrequencyVector<S>,
    pub averages: Vec<S>,
}

/// A sampled orbit segment with checkpoints at powers of two.
#[derive(Debug, Clone)]
pub struct EmpiricalTrace<S> {
    pub word: Word,
    pub checkpoints: Vec<Checkpoint<S>>,
}

/// Simulates the stationary chain for `n` steps (so the word has `n + 1`
/// symbols) and records checkpoints at powers of two and at `n`.
/// Deterministic given the seed.
pub fn sample_generic_word<S: Scalar>(
    chain: &MarkovChain<S>,
    n: usize,
    seed: u64,
    potentials: &[&LocallyConstantPotential<S>],
) -> Result<EmpiricalTrace<S>> {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let word = chain.sample_word(n, &mut rng);
    trace_of_word(chain.sft(), word, potentials)
}

/// Builds the checkpointed trace of an existing word.
pub fn trace_of_word<S: Scalar>(
    sft: &Sft,
    word: Word,
    potentials: &[&LocallyConstantPotential<S>],
) -> Result<EmpiricalTrace<S>> {
    let n = word.len() - 1;
    let mut marks: Vec<usize> = Vec::new();
    let mut p = 1usize;
    while p < n {
        marks.push(p);
        p *= 2;
    }
    marks.push(n);
    let sums: Vec<(usize, Vec<S>)> = potentials
        .iter()
        .map(|pot| Ok((pot.range(), pot.prefix_sums(&word)?)))
        .collect::<Result<_>>()?;
    let mut checkpoints = Vec::with_capacity(marks.len());
    let mut counts = vec![0u64; sft.edge_count()];
    let mut upto = 0usize;
    for &mark in &marks {
        while upto < mark {
            let e = sft
                .edge_id(word.symbols()[upto], word.symbols()[upto + 1])
                .ok_or_else(|| Error::InvalidWord("trace word leaves the SFT".into()))?;
            counts[e] += 1;
            upto += 1;
        }
        let freq = EdgeFrequencyVector::new(
            counts
                .iter()
                .map(|&c| S::from_ratio(c as i64, mark as i64))
                .collect(),
        );
        let averages = sums
            .iter()
            .map(|(range, ps)| {
                let terms = (mark + 1).saturating_sub(*range).max(1).min(ps.len() - 1);
                ps[terms].clone() / S::from_int(terms as i64)
            })
            .collect();
        checkpoints.push(Checkpoint {
            n: mark,
            freq,
            averages,
        });
    }
    Ok(EmpiricalTrace { word, checkpoints })
}

/// Report of a level-set membership check `phi_n / psi_n -> alpha`.
#[derive(Debug, Clone)]
pub struct LevelSetReport<S> {
    pub ratios: Vec<(usize, S)>,
    pub deviations: Vec<S>,
    pub within_tol: bool,
    pub eventually_decreasing: bool,
}

/// Checks the trace's Birkhoff ratio against `alpha` at every checkpoint:
/// passes when the final deviation is within `tol` and the deviation sequence
/// is nonincreasing on its tail.
pub fn verify_level_set_membership<S: Scalar>(
    trace: &EmpiricalTrace<S>,
    phi: &LocallyConstantPotential<S>,
    psi: &LocallyConstantPotential<S>,
    alpha: &S,
    tol: &S,
) -> Result<LevelSetReport<S>> {
    let phi_sums = phi.prefix_sums(&trace.word)?;
    let psi_sums = psi.prefix_sums(&trace.word)?;
    let mut ratios = Vec::with_capacity(trace.checkpoints.len());
    let mut deviations = Vec::with_capacity(trace.checkpoints.len());
    for cp in &trace.checkpoints {
        let r = ratio_at(&phi_sums, phi.range(), &psi_sums, psi.range(), cp.n)?;
        deviations.push((r.clone() - alpha.clone()).abs());
        ratios.push((cp.n, r));
    }
    let within_tol = deviations.last().map(|d| d <= tol).unwrap_or(false);
    let tail = deviations.len().min(3);
    let eventually_decreasing = deviations.len() < 2
        || deviations[deviations.len() - tail..]
            .windows(2)
            .all(|w| w[1] <= w[0]);
    Ok(LevelSetReport {
        ratios,
        deviations,
        within_tol,
        eventually_decreasing,
    })
}

fn ratio_at<S: Scalar>(
    phi_sums: &[S],
    phi_range: usize,
    psi_sums: &[S],
    psi_range: usize,
    n: usize,
) -> Result<S> {
    let tp = (n + 1).saturating_sub(phi_range).max(1).min(phi_sums.len() - 1);
    let tq = (n + 1).saturating_sub(psi_range).max(1).min(psi_sums.len() - 1);
    let num = phi_sums[tp].clone() / S::from_int(tp as i64);
    let den = psi_sums[tq].clone() / S::from_int(tq as i64);
    if den <= S::zero() {
        return Err(Error::DenominatorViolated {
            sigma: 0.0,
            observed: den.to_f64_lossy(),
        });
    }
    Ok(num / den)
}

/// One block of the zig-zag schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub k: usize,
    /// Generic-block length `N_k`.
    pub block_len: usize,
    /// Connecting-word length `m_k` (at most the mixing time).
    pub bridge_len: usize,
    /// Checkpoint position `t_k = t_{k-1} + m_k + N_k`.
    pub t_k: usize,
    /// Which target the block tracks: 1 on odd k, 2 on even k.
    pub rho: u8,
}

/// A finite word whose Birkhoff ratios oscillate between two targets: the
/// computable core of the irregular-point construction.
#[derive(Debug, Clone)]
pub struct IrregularWitness<S> {
    pub word: Word,
    pub schedule: Vec<ScheduleEntry>,
    /// `Phi/Psi` ratio values of the two target measures.
    pub target_ratios: (S, S),
    /// Birkhoff ratio of `Phi/Psi` at each `t_k`.
    pub oscillation: Vec<S>,
    pub growth_factor: usize,
    /// Records the schedule actually used (a geometric schedule in place of
    /// the super-exponential one, which is infeasible at finite scale).
    pub schedule_note: String,
}

#[derive(Debug, Clone)]
pub struct WitnessParams {
    pub depth: usize,
    pub growth_factor: usize,
    /// Length `N_1` of the first block.
    pub base_len: usize,
    pub seed: u64,
}

impl Default for WitnessParams {
    fn default() -> Self {
        WitnessParams {
            depth: 8,
            growth_factor: 4,
            base_len: 4,
            seed: 0,
        }
    }
}

/// Builds a single finite word alternating generic blocks of the two target
/// chains, joined by exact connecting words (BFS bridges of length at most
/// the mixing time). Block lengths follow `N_{k+1} = growth_factor * t_k`, so
/// the last block dominates each checkpoint with fraction
/// `growth_factor / (growth_factor + 1)` up to bridge terms.
pub fn construct_irregular_witness<S: Scalar>(
    sft: &Sft,
    phi: &LocallyConstantPotential<S>,
    psi: &LocallyConstantPotential<S>,
    mu1: &MarkovChain<S>,
    mu2: &MarkovChain<S>,
    params: &WitnessParams,
) -> Result<IrregularWitness<S>> {
    assert!(params.depth >= 2, "depth must be at least 2");
    assert!(params.growth_factor >= 2, "growth factor must be at least 2");
    if !sft.is_mixing() {
        return Err(Error::NotMixing);
    }
    let r1 = measure_ratio(phi, psi, mu1)?;
    let r2 = measure_ratio(phi, psi, mu2)?;
    let distinct = if S::EXACT {
        r1 != r2
    } else {
        (r1.clone() - r2.clone()).abs() > S::solver_tol()
    };
    if !distinct {
        return Err(Error::TargetsIndistinguishable(format!(
            "both targets have Phi/Psi ratio {r1}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let targets = [mu1, mu2];
    let mut symbols: Vec<u32> = Vec::new();
    let mut schedule = Vec::with_capacity(params.depth);
    let mut t_prev = 0usize;
    for k in 1..=params.depth {
        let rho = if k % 2 == 1 { 1u8 } else { 2u8 };
        let chain = targets[(rho - 1) as usize];
        let block_len = if k == 1 {
            params.base_len.max(1)
        } else {
            params.growth_factor * t_prev
        };
        let block = chain.sample_word(block_len - 1, &mut rng);
        let bridge_len = if symbols.is_empty() {
            0
        } else {
            let from = *symbols.last().unwrap();
            let to = block.symbols()[0];
            let bridge = sft
                .bridge(from, to)
                .ok_or_else(|| Error::InvalidWord(format!("no path {from} -> {to}")))?;
            symbols.extend_from_slice(&bridge);
            bridge.len()
        };
        symbols.extend_from_slice(block.symbols());
        let t_k = t_prev + bridge_len + block_len;
        schedule.push(ScheduleEntry {
            k,
            block_len,
            bridge_len,
            t_k,
            rho,
        });
        t_prev = t_k;
    }
    let word = Word::new(symbols, sft)?;
    let phi_sums = phi.prefix_sums(&word)?;
    let psi_sums = psi.prefix_sums(&word)?;
    let oscillation = schedule
        .iter()
        .map(|entry| ratio_at(&phi_sums, phi.range(), &psi_sums, psi.range(), entry.t_k))
        .collect::<Result<Vec<_>>>()?;
    Ok(IrregularWitness {
        word,
        schedule,
        target_ratios: (r1, r2),
        oscillation,
        growth_factor: params.growth_factor,
        schedule_note: format!(
            "geometric schedule N_(k+1) = {} * t_k (super-exponential schedule replaced; \
             bridges are exact connecting words, shadowing error 0)",
            params.growth_factor
        ),
    })
}

/// Estimate of the supremum of `limsup f_n / g_n` over the irregular set,
/// read off the odd checkpoints of constructed witnesses (where the tracked
/// target is the ratio-maximizing one).
#[derive(Debug, Clone)]
pub struct SupremumEstimate<S> {
    pub estimate: S,
    pub odd_ratios: Vec<S>,
    /// Set when any witness has depth < 3: the estimate is crude.
    pub low_depth: bool,
}

pub fn irregular_supremum_estimate<S: Scalar>(
    f: &LocallyConstantPotential<S>,
    g: &LocallyConstantPotential<S>,
    witnesses: &[&IrregularWitness<S>],
) -> Result<SupremumEstimate<S>> {
    assert!(!witnesses.is_empty(), "need at least one witness");
    let mut odd_ratios = Vec::new();
    let mut low_depth = false;
    for w in witnesses {
        low_depth |= w.schedule.len() < 3;
        let f_sums = f.prefix_sums(&w.word)?;
        let g_sums = g.prefix_sums(&w.word)?;
        for entry in &w.schedule {
            if entry.rho == 1 {
                odd_ratios.push(ratio_at(&f_sums, f.range(), &g_sums, g.range(), entry.t_k)?);
            }
        }
    }
    let estimate = odd_ratios
        .iter()
        .cloned()
        .fold(None, |acc: Option<S>, v| match acc {
            None => Some(v),
            Some(a) => Some(S::max_of(a, v)),
        })
        .expect("odd checkpoints exist at depth >= 1");
    Ok(SupremumEstimate {
        estimate,
        odd_ratios,
        low_depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::edge_vector_to_markov;
    use crate::potential::Matrix;
    use crate::symbolic::Cycle;
    use crate::FastRational;
    use num_traits::{Signed, Zero};

    type Q = FastRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn cycle_chain(sft: &Sft, symbols: Vec<u32>) -> MarkovChain<Q> {
        let c = Cycle::new(symbols, sft).unwrap();
        let v = EdgeFrequencyVector::uniform_cycle(sft, &c);
        edge_vector_to_markov(sft, &v).unwrap()
    }

    #[test]
    fn horizon_golden_mean() {
        let sft = Sft::golden_mean();
        let f = LocallyConstantPotential::<Q>::symbol_indicator(&sft, 1);
        let out = finite_horizon_max(&sft, &f, 4).unwrap();
        assert_eq!(out.value, q(1, 2));
        assert!(out.word.is_valid(&sft));
        let sums = f.prefix_sums(&out.word).unwrap();
        assert_eq!(sums[4], q(2, 1));
    }

    #[test]
    fn horizon_constant_and_full_shift() {
        let sft = Sft::full_shift(2).unwrap();
        let c = LocallyConstantPotential::constant(&sft, q(5, 3));
        assert_eq!(finite_horizon_max(&sft, &c, 7).unwrap().value, q(5, 3));
        let f = LocallyConstantPotential::<Q>::symbol_value(&sft);
        assert_eq!(finite_horizon_max(&sft, &f, 10).unwrap().value, q(1, 1));
    }

    #[test]
    fn horizon_ge_cycle_means_and_converges_to_beta() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..6 {
            let n_sym = rng.random_range(2..5);
            let mut pairs = Vec::new();
            for a in 0..n_sym {
                for b in 0..n_sym {
                    if rng.random_bool(0.7) {
                        pairs.push((a, b));
                    }
                }
            }
            let Ok(sft) = Sft::new(n_sym as usize, &pairs) else {
                continue;
            };
            let weights: std::collections::BTreeMap<Vec<u32>, Q> = (0..n_sym)
                .map(|s| (vec![s], q(rng.random_range(-4..5), rng.random_range(1..4))))
                .collect();
            let f = LocallyConstantPotential::from_weights(1, weights).unwrap();
            let beta = crate::optimize::max_ergodic_average(&sft, &f).unwrap().value;
            let c_bound = q(2, 1) * q(f.range() as i64, 1) * f.max_abs_weight();
            for n in [8usize, 16, 64, 256] {
                let h = finite_horizon_max(&sft, &f, n).unwrap().value;
                assert!(h >= beta);
                assert!(h.clone() - beta.clone() <= c_bound.clone() / q(n as i64, 1));
            }
            for cy in crate::symbolic::enumerate_simple_cycles(&sft, 4, 1000).unwrap() {
                let mean = f.cycle_mean(&cy).unwrap();
                if 8 % cy.len() == 0 {
                    let h = finite_horizon_max(&sft, &f, 8).unwrap().value;
                    assert!(h >= mean);
                }
            }
        }
    }

    #[test]
    fn cocycle_horizon_cap_and_upper_sequence() {
        let sft = Sft::full_shift(2).unwrap();
        let a = Matrix::new(2, vec![1.1, 0.8, 0.0, 0.9]).unwrap();
        let b = Matrix::new(2, vec![0.7, 0.0, 0.3, 1.2]).unwrap();
        let c = CocyclePotential::new(vec![a, b]).unwrap();
        let out = finite_horizon_max_cocycle(&sft, &c, 12, 16).unwrap();
        for w in out.upper_sequence.windows(2) {
            // Doubling steps are nonincreasing by subadditivity.
            if w[1].0 == 2 * w[0].0 {
                assert!(w[1].1 <= w[0].1 + 1e-12);
            }
        }
        assert!(matches!(
            finite_horizon_max_cocycle(&sft, &c, 64, 16),
            Err(Error::HorizonTooLarge { .. })
        ));
    }

    #[test]
    fn deterministic_cycle_trace_is_uniform() {
        let sft = Sft::golden_mean();
        let chain = cycle_chain(&sft, vec![0, 1]);
        let phi = LocallyConstantPotential::<Q>::symbol_indicator(&sft, 1);
        let trace = sample_generic_word(&chain, 8, 3, &[&phi]).unwrap();
        let last = trace.checkpoints.last().unwrap();
        assert_eq!(last.n, 8);
        let e01 = sft.edge_id(0, 1).unwrap();
        let e10 = sft.edge_id(1, 0).unwrap();
        assert_eq!(last.freq.get(e01), &q(1, 2));
        assert_eq!(last.freq.get(e10), &q(1, 2));
        assert_eq!(last.freq.get(sft.edge_id(0, 0).unwrap()), &Q::zero());
    }

    #[test]
    fn single_step_trace() {
        let sft = Sft::full_shift(2).unwrap();
        let chain = cycle_chain(&sft, vec![0]);
        let trace = sample_generic_word::<Q>(&chain, 1, 0, &[]).unwrap();
        assert_eq!(trace.checkpoints.len(), 1);
        assert_eq!(trace.checkpoints[0].freq.sum(), q(1, 1));
    }

    #[test]
    fn bernoulli_trace_l1_close_to_marginal() {
        let sft = Sft::full_shift(2).unwrap();
        let freq = EdgeFrequencyVector::new(vec![0.25f64; 4]);
        let chain = edge_vector_to_markov(&sft, &freq).unwrap();
        let trace = sample_generic_word(&chain, 1 << 16, 12345, &[]).unwrap();
        let last = trace.checkpoints.last().unwrap();
        let l1: f64 = (0..4).map(|e| (last.freq.get(e) - 0.25).abs()).sum();
        assert!(l1 <= 0.02, "l1 distance {l1}");
        // Boundary effect on conservation is at most 2/n per vertex.
        let defect = last.freq.conservation_defect(&sft);
        assert!(defect <= 2.0 / last.n as f64);
    }

    #[test]
    fn level_set_membership_reports() {
        let sft = Sft::full_shift(2).unwrap();
        let freq = EdgeFrequencyVector::new(vec![0.25f64; 4]);
        let chain = edge_vector_to_markov(&sft, &freq).unwrap();
        let phi = LocallyConstantPotential::<f64>::symbol_value(&sft);
        let one = LocallyConstantPotential::constant(&sft, 1.0);
        let trace = sample_generic_word(&chain, 1 << 16, 99, &[&phi]).unwrap();
        let ok = verify_level_set_membership(&trace, &phi, &one, &0.5, &0.05).unwrap();
        assert!(ok.within_tol);
        let off = verify_level_set_membership(&trace, &phi, &one, &1.0, &0.05).unwrap();
        assert!(!off.within_tol);

        // Deterministic two-cycle: deviation exactly <= 1/n.
        let chain = cycle_chain(&Sft::golden_mean(), vec![0, 1]);
        let gm = Sft::golden_mean();
        let phi = LocallyConstantPotential::<Q>::symbol_indicator(&gm, 1);
        let one = LocallyConstantPotential::constant(&gm, q(1, 1));
        let trace = sample_generic_word(&chain, 64, 5, &[&phi]).unwrap();
        let rep = verify_level_set_membership(&trace, &phi, &one, &q(1, 2), &q(1, 10)).unwrap();
        for (n, r) in &rep.ratios {
            assert!((r.clone() - q(1, 2)).abs() <= q(1, *n as i64));
        }
        assert!(rep.within_tol);
    }

    #[test]
    fn witness_full_shift_oscillates() {
        let sft = Sft::full_shift(2).unwrap();
        let mu1 = cycle_chain(&sft, vec![0]);
        let mu2 = cycle_chain(&sft, vec![1]);
        let phi = LocallyConstantPotential::<Q>::symbol_value(&sft);
        let one = LocallyConstantPotential::constant(&sft, q(1, 1));
        let params = WitnessParams::default();
        let w = construct_irregular_witness(&sft, &phi, &one, &mu1, &mu2, &params).unwrap();
        assert!(w.word.is_valid(&sft));
        // Schedule identity t_k = t_{k-1} + m_k + N_k and rho alternation.
        let mut t = 0usize;
        for e in &w.schedule {
            t += e.bridge_len + e.block_len;
            assert_eq!(e.t_k, t);
            assert_eq!(e.rho, if e.k % 2 == 1 { 1 } else { 2 });
        }
        // Block dominance: odd checkpoints near 0 (target mu1), even near 1.
        let slack = q(1, w.growth_factor as i64) + q(1, 20);
        for (entry, r) in w.schedule.iter().zip(&w.oscillation).skip(1) {
            if entry.rho == 1 {
                assert!(r.clone() <= slack.clone(), "k={} ratio {r}", entry.k);
            } else {
                assert!(r.clone() >= q(1, 1) - slack.clone(), "k={} ratio {r}", entry.k);
            }
        }
        // Same-parity deviations settle monotonically after the first two
        // blocks (deterministic targets, exact arithmetic).
        let devs: Vec<Q> = w
            .oscillation
            .iter()
            .zip(&w.schedule)
            .map(|(r, e)| {
                let target = if e.rho == 1 { Q::zero() } else { q(1, 1) };
                (r.clone() - target).abs()
            })
            .collect();
        for parity in [0usize, 1] {
            let seq: Vec<&Q> = devs
                .iter()
                .enumerate()
                .filter(|(i, _)| i % 2 == parity && *i >= 2)
                .map(|(_, d)| d)
                .collect();
            let increasing = seq.windows(2).all(|w| w[0] <= w[1]);
            let decreasing = seq.windows(2).all(|w| w[0] >= w[1]);
            assert!(increasing || decreasing);
        }
    }

    #[test]
    fn witness_rejects_equal_targets() {
        let sft = Sft::full_shift(2).unwrap();
        let mu = cycle_chain(&sft, vec![0]);
        let phi = LocallyConstantPotential::<Q>::symbol_value(&sft);
        let one = LocallyConstantPotential::constant(&sft, q(1, 1));
        let err = construct_irregular_witness(
            &sft,
            &phi,
            &one,
            &mu,
            &mu.clone(),
            &WitnessParams::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::TargetsIndistinguishable(_)));
    }

    #[test]
    fn witness_golden_mean_bridges_are_valid() {
        let sft = Sft::golden_mean();
        let mu1 = cycle_chain(&sft, vec![0]);
        let mu2 = cycle_chain(&sft, vec![0, 1]);
        let phi = LocallyConstantPotential::<Q>::symbol_indicator(&sft, 1);
        let one = LocallyConstantPotential::constant(&sft, q(1, 1));
        let params = WitnessParams {
            depth: 6,
            ..Default::default()
        };
        let w = construct_irregular_witness(&sft, &phi, &one, &mu1, &mu2, &params).unwrap();
        assert!(w.word.is_valid(&sft));
        for e in &w.schedule {
            assert!(e.bridge_len <= sft.mixing_time().unwrap());
        }
    }

    #[test]
    fn witness_rejects_non_mixing() {
        let sft = Sft::new(2, &[(0, 1), (1, 0)]).unwrap();
        let mu = cycle_chain(&sft, vec![0, 1]);
        let phi = LocallyConstantPotential::<Q>::symbol_value(&sft);
        let one = LocallyConstantPotential::constant(&sft, q(1, 1));
        let err = construct_irregular_witness(
            &sft,
            &phi,
            &one,
            &mu,
            &mu.clone(),
            &WitnessParams::default(),
        )
        .unwrap_err();
        assert_eq!(err, Error::NotMixing);
    }

    #[test]
    fn supremum_estimate_constant_objective() {
        let sft = Sft::full_shift(2).unwrap();
        let mu1 = cycle_chain(&sft, vec![1]);
        let mu2 = cycle_chain(&sft, vec![0]);
        let phi = LocallyConstantPotential::<Q>::symbol_value(&sft);
        let one = LocallyConstantPotential::constant(&sft, q(1, 1));
        let w =
            construct_irregular_witness(&sft, &phi, &one, &mu1, &mu2, &WitnessParams::default())
                .unwrap();
        let c = LocallyConstantPotential::constant(&sft, q(7, 2));
        let est = irregular_supremum_estimate(&c, &one, &[&w]).unwrap();
        assert_eq!(est.estimate, q(7, 2));
        assert!(!est.low_depth);

        let shallow = construct_irregular_witness(
            &sft,
            &phi,
            &one,
            &mu1,
            &mu2,
            &WitnessParams {
                depth: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let est = irregular_supremum_estimate(&c, &one, &[&shallow]).unwrap();
        assert!(est.low_depth);
    }

    #[test]
    fn supremum_estimate_tracks_beta() {
        let sft = Sft::full_shift(2).unwrap();
        // mu1 must be the ratio-maximizing vertex: cycle (1) for F = x0.
        let mu1 = cycle_chain(&sft, vec![1]);
        let mu2 = cycle_chain(&sft, vec![0]);
        let f = LocallyConstantPotential::<Q>::symbol_value(&sft);
        let one = LocallyConstantPotential::constant(&sft, q(1, 1));
        let w = construct_irregular_witness(&sft, &f, &one, &mu1, &mu2, &WitnessParams::default())
            .unwrap();
        let est = irregular_supremum_estimate(&f, &one, &[&w]).unwrap();
        assert!(est.estimate >= q(92, 100));
    }
}
