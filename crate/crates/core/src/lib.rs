//! Exact and certified-approximate ergodic optimization on subshifts of
//! finite type: maximum and conditional ergodic averages, ratio optimization
//! over invariant measures, multifractal-style spectra, irregular-point
//! witnesses, and suspension-flow reductions.
//!
//! All core solvers are generic over the [`Scalar`] arithmetic type, so the
//! same code runs exactly over rationals (`Rational`, `FastRational`) and
//! approximately over floats (`f64`, `f32`). Inexact inputs (matrix cocycles,
//! generic sequence potentials) enter through certified additive approximants
//! and produce interval answers.

pub mod error;
pub mod karp;
pub mod optimize;
pub mod orbit;
pub mod polytope;
pub mod potential;
pub mod scalar;
pub mod simplex;
pub mod suspension;
pub mod symbolic;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Arbitrary-precision exact rationals: the default arithmetic for exact mode.
pub type Rational = num_rational::BigRational;

/// Fixed-width exact rationals: fast for small instances, panics on overflow
/// in debug builds.
pub type FastRational = num_rational::Ratio<i128>;

pub use karp::{max_mean_cycle, min_mean_cycle, MeanCycle};
pub use optimize::{
    conditional_max, conditional_max_aap, extreme_point_check, max_ergodic_average,
    max_ergodic_average_aap, min_ergodic_average, min_ergodic_average_aap, ratio_max,
    ratio_max_aap, ratio_max_constrained, ratio_min, spectrum, two_cycle_mixture_oracle,
    AapExtremum,
    AapOptions, ConditionalOutcome, ConditionalProblem, ExtremeReport, Extremum, Interval,
    RatioOutcome, SpectrumResult,
};
pub use orbit::{
    construct_irregular_witness, finite_horizon_max, finite_horizon_max_cocycle,
    irregular_supremum_estimate, sample_generic_word, trace_of_word,
    verify_level_set_membership, CocycleHorizon, EmpiricalTrace, HorizonResult, IrregularWitness,
    LevelSetReport, ScheduleEntry, SupremumEstimate, WitnessParams,
};
pub use polytope::{
    edge_vector_to_markov, lp_optimize, lp_optimize_with, project_frequencies, vertex_to_cycle,
    EdgeFrequencyVector, LpOutcome, LpStatus, MarkovChain, RecurrentClass, Sense,
};
pub use potential::{
    measure_average, measure_average_lc, measure_ratio, AverageOutcome, CocyclePotential,
    DenominatorBound, EffortBudget, LocallyConstantPotential, Matrix, Potential,
    SequencePotential, SpotCheck,
};
pub use suspension::{
    flow_average, flow_average_chain, flow_irregular_optimum, flow_level_set_optimum,
    FlowIrregularReport, FlowObservable, FlowOptimum, RoofFunction,
};
pub use symbolic::{
    enumerate_simple_cycles, Cycle, Recoding, Sft, Symbol, Word, DEFAULT_CYCLE_CAP,
};
