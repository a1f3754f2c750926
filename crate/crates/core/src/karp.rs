//! Maximum mean cycle by Karp's dynamic program, run per strongly connected
//! component. This is the graph-algorithm route to the maximum ergodic
//! average; the LP route lives in `polytope`, and the two are cross-checked
//! by the optimizers.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symbolic::{Cycle, Sft, Symbol};

/// Strongly connected components (Tarjan, iterative). Components and their
/// vertex lists are returned sorted for determinism.
pub(crate) fn strongly_connected_components(
    n: usize,
    edges: &[(Symbol, Symbol)],
) -> Vec<Vec<Symbol>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u as usize].push(v as usize);
    }
    let mut index = vec![usize::MAX; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0usize;
    let mut comps: Vec<Vec<Symbol>> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        // (vertex, next child position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut ci)) = call.last_mut() {
            if *ci == 0 {
                index[v] = next_index;
                lowlink[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *ci < adj[v].len() {
                let w = adj[v][*ci];
                *ci += 1;
                if index[w] == usize::MAX {
                    call.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                if lowlink[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w as Symbol);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
                call.pop();
                if let Some(&mut (parent, _)) = call.last_mut() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
            }
        }
    }
    comps.sort();
    comps
}

#[derive(Debug, Clone)]
pub struct MeanCycle<S> {
    pub mean: S,
    pub cycle: Cycle,
}

/// Maximum mean cycle of the edge-weighted SFT graph.
///
/// The optimal mean comes from Karp's formula; the witness cycle is recovered
/// from the tight subgraph of the shifted weights (exact by construction) and
/// its mean is re-verified before returning.
pub fn max_mean_cycle<S: Scalar>(sft: &Sft, weights: &[S]) -> Result<MeanCycle<S>> {
    assert_eq!(weights.len(), sft.edge_count());
    let comps = strongly_connected_components(sft.alphabet_size(), sft.edges());
    let mut best: Option<(S, Vec<Symbol>, Vec<usize>)> = None;
    for comp in comps {
        let in_comp: Vec<bool> = {
            let mut flags = vec![false; sft.alphabet_size()];
            for &v in &comp {
                flags[v as usize] = true;
            }
            flags
        };
        let edge_ids: Vec<usize> = (0..sft.edge_count())
            .filter(|&e| {
                let (u, v) = sft.edges()[e];
                in_comp[u as usize] && in_comp[v as usize]
            })
            .collect();
        if edge_ids.is_empty() {
            continue;
        }
        let mean = karp_mean(sft, &comp, &edge_ids, weights);
        let replace = match &best {
            None => true,
            Some((m, _, _)) => mean > *m,
        };
        if replace {
            best = Some((mean, comp, edge_ids));
        }
    }
    let (mean, comp, edge_ids) =
        best.ok_or_else(|| Error::NumericallyUnstable("graph has no cycle".into()))?;
    let cycle = extract_tight_cycle(sft, &comp, &edge_ids, weights, &mean)?;
    // Verify the witness agrees with the Karp value.
    let ids = cycle.edge_ids(sft);
    let total = ids
        .iter()
        .map(|&e| weights[e].clone())
        .fold(S::zero(), |a, b| a + b);
    let cycle_mean = total / S::from_int(ids.len() as i64);
    let gap = (cycle_mean.clone() - mean.clone()).abs();
    let tol = if S::EXACT {
        S::zero()
    } else {
        S::solver_tol() * S::from_int(64)
    };
    if gap > tol {
        return Err(Error::NumericallyUnstable(
            "tight-cycle witness disagrees with the Karp value".into(),
        ));
    }
    Ok(MeanCycle { mean, cycle })
}

pub fn min_mean_cycle<S: Scalar>(sft: &Sft, weights: &[S]) -> Result<MeanCycle<S>> {
    let negated: Vec<S> = weights.iter().map(|w| -w.clone()).collect();
    let out = max_mean_cycle(sft, &negated)?;
    Ok(MeanCycle {
        mean: -out.mean,
        cycle: out.cycle,
    })
}

/// Karp's formula on one SCC: `max_v min_k (D_n(v) - D_k(v)) / (n - k)` with
/// `D_k` the maximum weight over walks of exactly `k` edges from a fixed
/// source.
fn karp_mean<S: Scalar>(sft: &Sft, comp: &[Symbol], edge_ids: &[usize], weights: &[S]) -> S {
    let nc = comp.len();
    let local: std::collections::HashMap<Symbol, usize> =
        comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let source = 0usize;
    let mut d: Vec<Vec<Option<S>>> = vec![vec![None; nc]; nc + 1];
    d[0][source] = Some(S::zero());
    for k in 1..=nc {
        for &e in edge_ids {
            let (u, v) = sft.edges()[e];
            let (ul, vl) = (local[&u], local[&v]);
            if let Some(base) = &d[k - 1][ul] {
                let cand = base.clone() + weights[e].clone();
                match &d[k][vl] {
                    Some(cur) if *cur >= cand => {}
                    _ => d[k][vl] = Some(cand),
                }
            }
        }
    }
    let mut best: Option<S> = None;
    for v in 0..nc {
        let Some(dn) = &d[nc][v] else { continue };
        let mut inner: Option<S> = None;
        for (k, row) in d.iter().enumerate().take(nc) {
            if let Some(dk) = &row[v] {
                let ratio = (dn.clone() - dk.clone()) / S::from_int((nc - k) as i64);
                inner = Some(match inner {
                    None => ratio,
                    Some(b) => S::min_of(b, ratio),
                });
            }
        }
        if let Some(val) = inner {
            best = Some(match best {
                None => val,
                Some(b) => S::max_of(b, val),
            });
        }
    }
    best.expect("SCC with an edge has a cycle")
}

/// With weights shifted by the optimal mean, every cycle has nonpositive
/// weight and optimal cycles have weight zero. Shortest-path potentials for
/// the negated shifted weights make exactly the optimal cycles all-tight, so a
/// cycle search restricted to tight edges is guaranteed to find a witness.
fn extract_tight_cycle<S: Scalar>(
    sft: &Sft,
    comp: &[Symbol],
    edge_ids: &[usize],
    weights: &[S],
    mean: &S,
) -> Result<Cycle> {
    let nc = comp.len();
    let local: std::collections::HashMap<Symbol, usize> =
        comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    // Bellman-Ford from local source 0 with costs -(w - mean).
    let mut dist: Vec<Option<S>> = vec![None; nc];
    dist[0] = Some(S::zero());
    for _ in 0..nc {
        let mut changed = false;
        for &e in edge_ids {
            let (u, v) = sft.edges()[e];
            let (ul, vl) = (local[&u], local[&v]);
            if let Some(base) = &dist[ul] {
                let cand = base.clone() - (weights[e].clone() - mean.clone());
                match &dist[vl] {
                    Some(cur) if *cur <= cand => {}
                    _ => {
                        dist[vl] = Some(cand);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let tol = if S::EXACT {
        S::zero()
    } else {
        S::solver_tol() * S::from_int(16)
    };
    let mut tight = vec![Vec::new(); nc];
    for &e in edge_ids {
        let (u, v) = sft.edges()[e];
        let (ul, vl) = (local[&u], local[&v]);
        if let (Some(du), Some(dv)) = (&dist[ul], &dist[vl]) {
            let reduced = du.clone() - (weights[e].clone() - mean.clone()) - dv.clone();
            if reduced.abs() <= tol {
                tight[ul].push((vl, e));
            }
        }
    }
    // DFS for any cycle inside the tight subgraph.
    for start in 0..nc {
        let mut on_path = vec![false; nc];
        let mut path: Vec<(usize, usize)> = Vec::new(); // (local vertex, edge into it)
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        let mut cursors: Vec<usize> = Vec::new();
        let _ = &mut stack;
        // Straightforward recursive search, iteratively.
        let mut frames: Vec<(usize, usize)> = vec![(start, 0)];
        on_path[start] = true;
        cursors.clear();
        while let Some(&mut (v, ref mut ci)) = frames.last_mut() {
            if *ci < tight[v].len() {
                let (w, e) = tight[v][*ci];
                *ci += 1;
                if on_path[w] {
                    // Close the cycle at w.
                    let mut symbols: Vec<Symbol> = Vec::new();
                    let mut collecting = false;
                    for &(fv, _) in frames.iter() {
                        if fv == w {
                            collecting = true;
                        }
                        if collecting {
                            symbols.push(comp[fv]);
                        }
                    }
                    let _ = e;
                    let _ = &mut path;
                    return Ok(Cycle::canonical_unchecked(symbols));
                }
                on_path[w] = true;
                frames.push((w, 0));
            } else {
                on_path[v] = false;
                frames.pop();
            }
        }
    }
    Err(Error::NumericallyUnstable(
        "tight subgraph unexpectedly acyclic".into(),
    ))
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

    fn source_indicator_weights(sft: &Sft, symbol: Symbol) -> Vec<Q> {
        sft.edges()
            .iter()
            .map(|&(u, _)| if u == symbol { q(1, 1) } else { Q::zero() })
            .collect()
    }

    #[test]
    fn golden_mean_max_and_min() {
        let sft = Sft::golden_mean();
        let w = source_indicator_weights(&sft, 1);
        let max = max_mean_cycle(&sft, &w).unwrap();
        assert_eq!(max.mean, q(1, 2));
        assert_eq!(max.cycle.symbols(), &[0, 1]);
        let min = min_mean_cycle(&sft, &w).unwrap();
        assert_eq!(min.mean, Q::zero());
        assert_eq!(min.cycle.symbols(), &[0]);
    }

    #[test]
    fn respects_scc_structure() {
        // Two loops joined one-way: 0 (loop weight 1) -> 1 (loop weight 2).
        let sft = Sft::new(2, &[(0, 0), (0, 1), (1, 1)]).unwrap();
        let w: Vec<Q> = sft
            .edges()
            .iter()
            .map(|&(u, v)| if u == v { q(u as i64 + 1, 1) } else { q(-10, 1) })
            .collect();
        let out = max_mean_cycle(&sft, &w).unwrap();
        assert_eq!(out.mean, q(2, 1));
        assert_eq!(out.cycle.symbols(), &[1]);
    }

    #[test]
    fn matches_enumeration_oracle_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let mut tested = 0;
        while tested < 60 {
            let n = rng.random_range(2..6);
            let mut pairs = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    if rng.random_bool(0.5) {
                        pairs.push((a as Symbol, b as Symbol));
                    }
                }
            }
            let Ok(sft) = Sft::new(n, &pairs) else { continue };
            tested += 1;
            let w: Vec<Q> = (0..sft.edge_count())
                .map(|_| q(rng.random_range(-8..9), rng.random_range(1..5)))
                .collect();
            let karp = max_mean_cycle(&sft, &w).unwrap();
            let cycles = enumerate_simple_cycles(&sft, n, 100_000).unwrap();
            let oracle = cycles
                .iter()
                .map(|c| {
                    let ids = c.edge_ids(&sft);
                    ids.iter().map(|&e| w[e].clone()).fold(Q::zero(), |a, b| a + b)
                        / q(ids.len() as i64, 1)
                })
                .max()
                .unwrap();
            assert_eq!(karp.mean, oracle);
            // Witness attains the optimum.
            let ids = karp.cycle.edge_ids(&sft);
            let mean = ids.iter().map(|&e| w[e].clone()).fold(Q::zero(), |a, b| a + b)
                / q(ids.len() as i64, 1);
            assert_eq!(mean, karp.mean);
        }
    }

    #[test]
    fn scc_decomposition_small() {
        let comps = strongly_connected_components(4, &[(0, 1), (1, 0), (2, 3), (3, 2), (1, 2)]);
        assert_eq!(comps, vec![vec![0, 1], vec![2, 3]]);
    }
}
