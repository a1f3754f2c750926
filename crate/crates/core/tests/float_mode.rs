//! Floating-point pipeline vs exact rational ground truth on random
//! instances: values must agree within the solver tolerance.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ergopt_core::*;

type Q = FastRational;

fn random_instance(
    rng: &mut ChaCha8Rng,
) -> (Sft, LocallyConstantPotential<Q>, LocallyConstantPotential<Q>) {
    loop {
        let n = rng.random_range(2..5);
        let mut pairs = Vec::new();
        for a in 0..n as Symbol {
            for b in 0..n as Symbol {
                if rng.random_bool(0.6) {
                    pairs.push((a, b));
                }
            }
        }
        let Ok(sft) = Sft::new(n, &pairs) else { continue };
        let table = |rng: &mut ChaCha8Rng| {
            let weights: BTreeMap<Vec<Symbol>, Q> = (0..n as Symbol)
                .map(|s| {
                    (
                        vec![s],
                        Q::from_ratio(rng.random_range(-6..7), rng.random_range(1..4)),
                    )
                })
                .collect();
            LocallyConstantPotential::from_weights(1, weights).unwrap()
        };
        let f = table(rng);
        let phi = table(rng);
        return (sft, f, phi);
    }
}

fn to_f64(p: &LocallyConstantPotential<Q>) -> LocallyConstantPotential<f64> {
    p.map_weights(|w| w.to_f64_lossy())
}

#[test]
fn float_pipeline_matches_exact_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(1717);
    for _ in 0..30 {
        let (sft, f_q, phi_q) = random_instance(&mut rng);
        let (f_r, phi_r) = (to_f64(&f_q), to_f64(&phi_q));

        let beta_q = max_ergodic_average(&sft, &f_q).unwrap().value;
        let beta_r = max_ergodic_average(&sft, &f_r).unwrap().value;
        assert!((beta_q.to_f64_lossy() - beta_r).abs() < 1e-9);

        let prob_q = ConditionalProblem::new(&sft, &f_q, &phi_q).unwrap();
        let prob_r = ConditionalProblem::new(&sft, &f_r, &phi_r).unwrap();
        assert!((prob_q.eta().to_f64_lossy() - prob_r.eta()).abs() < 1e-9);
        for i in 0..=4 {
            let alpha_q =
                prob_q.eta().clone() + (prob_q.beta_phi().clone() - prob_q.eta().clone())
                    * Q::from_ratio(i, 4);
            let alpha_r = alpha_q.to_f64_lossy();
            let v_q = prob_q.lambda(&alpha_q).unwrap().value;
            let v_r = prob_r.lambda(&alpha_r).unwrap().value;
            assert!(
                (v_q.to_f64_lossy() - v_r).abs() < 1e-8,
                "lambda mismatch at alpha {alpha_r}: exact {v_q} float {v_r}"
            );
        }

        // Ratio with a strictly positive random denominator.
        let g_q = LocallyConstantPotential::from_weights(
            1,
            (0..sft.alphabet_size() as Symbol)
                .map(|s| {
                    (
                        vec![s],
                        Q::from_ratio(1, 1) + Q::from_ratio(rng.random_range(0..4), 2),
                    )
                })
                .collect(),
        )
        .unwrap();
        let g_r = to_f64(&g_q);
        let sq = DenominatorBound::tight(&g_q).unwrap();
        let sr = DenominatorBound::tight(&g_r).unwrap();
        let rq = ratio_max(&sft, &f_q, &g_q, &sq).unwrap().value;
        let rr = ratio_max(&sft, &f_r, &g_r, &sr).unwrap().value;
        assert!((rq.to_f64_lossy() - rr).abs() < 1e-9);
    }
}

#[test]
fn float_spectrum_matches_exact_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(42_42);
    for _ in 0..8 {
        let (sft, f_q, phi_q) = random_instance(&mut rng);
        let prob_q = ConditionalProblem::new(&sft, &f_q, &phi_q).unwrap();
        let prob_r = ConditionalProblem::new(&sft, &to_f64(&f_q), &to_f64(&phi_q)).unwrap();
        let s_q = prob_q.spectrum(9).unwrap();
        let s_r = prob_r.spectrum(9).unwrap();
        for ((aq, vq), (ar, vr)) in s_q.grid.iter().zip(s_r.grid.iter()) {
            assert!((aq.to_f64_lossy() - ar).abs() < 1e-9);
            assert!((vq.lo.to_f64_lossy() - vr.lo).abs() < 1e-8);
        }
        assert!((s_q.flat_top.0.to_f64_lossy() - s_r.flat_top.0).abs() < 1e-8);
        assert!((s_q.flat_top.1.to_f64_lossy() - s_r.flat_top.1).abs() < 1e-8);
    }
}
