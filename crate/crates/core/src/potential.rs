//! Potentials: locally constant weight tables, matrix cocycles, and generic
//! sequence potentials, together with their additive approximants and measure
//! functionals.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::polytope::MarkovChain;
use crate::scalar::Scalar;
use crate::symbolic::{Recoding, Sft, Symbol, Word};

/// A potential determined by a weight table on allowed `range`-blocks. The
/// induced sequence `f_n = S_n f` is additive, hence asymptotically additive
/// with zero error.
#[derive(Debug, Clone, PartialEq)]
pub struct LocallyConstantPotential<S> {
    range: usize,
    weights: BTreeMap<Vec<Symbol>, S>,
}

impl<S: Scalar> LocallyConstantPotential<S> {
    pub fn from_weights(range: usize, weights: BTreeMap<Vec<Symbol>, S>) -> Result<Self> {
        if range == 0 {
            return Err(Error::InvalidPotential("range must be positive".into()));
        }
        if weights.keys().any(|b| b.len() != range) {
            return Err(Error::InvalidPotential(
                "weight table keys must all have length equal to the range".into(),
            ));
        }
        Ok(LocallyConstantPotential { range, weights })
    }

    /// Checks that the table covers exactly the allowed `range`-blocks of the SFT.
    pub fn validate_on(&self, sft: &Sft) -> Result<()> {
        let rec = Recoding::new(sft, self.range)?;
        let allowed: Vec<&[Symbol]> = (0..rec.sft().alphabet_size())
            .map(|v| rec.block(v as Symbol))
            .collect();
        for block in &allowed {
            if !self.weights.contains_key(*block) {
                return Err(Error::InvalidPotential(format!(
                    "missing weight for allowed block {block:?}"
                )));
            }
        }
        if self.weights.len() != allowed.len() {
            return Err(Error::InvalidPotential(format!(
                "table has {} entries but the SFT has {} allowed {}-blocks",
                self.weights.len(),
                allowed.len(),
                self.range
            )));
        }
        Ok(())
    }

    pub fn constant(sft: &Sft, value: S) -> Self {
        let weights = (0..sft.alphabet_size() as Symbol)
            .map(|s| (vec![s], value.clone()))
            .collect();
        LocallyConstantPotential { range: 1, weights }
    }

    /// Indicator of a single symbol.
    pub fn symbol_indicator(sft: &Sft, symbol: Symbol) -> Self {
        let weights = (0..sft.alphabet_size() as Symbol)
            .map(|s| (vec![s], if s == symbol { S::one() } else { S::zero() }))
            .collect();
        LocallyConstantPotential { range: 1, weights }
    }

    /// Weight of a symbol equals its index (`x_0` on numeric alphabets).
    pub fn symbol_value(sft: &Sft) -> Self {
        let weights = (0..sft.alphabet_size() as Symbol)
            .map(|s| (vec![s], S::from_int(s as i64)))
            .collect();
        LocallyConstantPotential { range: 1, weights }
    }

    /// Indicator of a block; all other allowed blocks of the same length get 0.
    pub fn block_indicator(sft: &Sft, block: &[Symbol]) -> Result<Self> {
        let rec = Recoding::new(sft, block.len())?;
        let weights = (0..rec.sft().alphabet_size())
            .map(|v| {
                let b = rec.block(v as Symbol).to_vec();
                let w = if b == block { S::one() } else { S::zero() };
                (b, w)
            })
            .collect();
        Ok(LocallyConstantPotential {
            range: block.len(),
            weights,
        })
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn weights(&self) -> &BTreeMap<Vec<Symbol>, S> {
        &self.weights
    }

    pub fn weight(&self, block: &[Symbol]) -> Option<&S> {
        self.weights.get(block)
    }

    pub fn min_weight(&self) -> S {
        self.weights
            .values()
            .cloned()
            .fold(None, |acc: Option<S>, w| match acc {
                None => Some(w),
                Some(a) => Some(S::min_of(a, w)),
            })
            .expect("nonempty weight table")
    }

    pub fn max_weight(&self) -> S {
        self.weights
            .values()
            .cloned()
            .fold(None, |acc: Option<S>, w| match acc {
                None => Some(w),
                Some(a) => Some(S::max_of(a, w)),
            })
            .expect("nonempty weight table")
    }

    pub fn max_abs_weight(&self) -> S {
        self.weights
            .values()
            .map(|w| w.abs())
            .fold(S::zero(), S::max_of)
    }

    pub fn scale(&self, c: &S) -> Self {
        LocallyConstantPotential {
            range: self.range,
            weights: self
                .weights
                .iter()
                .map(|(b, w)| (b.clone(), w.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn map_weights<T: Scalar>(&self, f: impl Fn(&S) -> T) -> LocallyConstantPotential<T> {
        LocallyConstantPotential {
            range: self.range,
            weights: self.weights.iter().map(|(b, w)| (b.clone(), f(w))).collect(),
        }
    }

    /// Weight per edge of a recoded graph whose order is at least `range - 1`:
    /// the weight of the leading `range`-subblock of each edge block.
    pub fn edge_weights(&self, rec: &Recoding) -> Result<Vec<S>> {
        if rec.order() + 1 < self.range {
            return Err(Error::InvalidPotential(format!(
                "recoding order {} too small for range {}",
                rec.order(),
                self.range
            )));
        }
        (0..rec.sft().edge_count())
            .map(|e| {
                let block = rec.edge_block(e);
                self.weights
                    .get(&block[..self.range])
                    .cloned()
                    .ok_or_else(|| {
                        Error::InvalidPotential(format!(
                            "no weight for allowed block {:?}",
                            &block[..self.range]
                        ))
                    })
            })
            .collect()
    }

    /// Birkhoff sum `f_n` of the periodic point spelled by `word` (n = word
    /// length, blocks wrap around).
    pub fn birkhoff_sum(&self, word: &Word) -> Result<S> {
        let n = word.len();
        if n < self.range {
            return Err(Error::WordTooShort {
                len: n,
                range: self.range,
            });
        }
        let mut total = S::zero();
        let mut block = vec![0; self.range];
        for i in 0..n {
            for (j, slot) in block.iter_mut().enumerate() {
                *slot = word.cyclic(i + j);
            }
            match self.weights.get(&block) {
                Some(w) => total = total + w.clone(),
                None => {
                    return Err(Error::InvalidWord(format!(
                        "periodic extension contains block {block:?} with no weight"
                    )))
                }
            }
        }
        Ok(total)
    }

    /// Partial Birkhoff sums along a word without periodic extension:
    /// `out[t]` is the sum of the first `t` block weights, for
    /// `t = 0 ..= len - range + 1`.
    pub fn prefix_sums(&self, word: &Word) -> Result<Vec<S>> {
        let n = word.len();
        if n < self.range {
            return Err(Error::WordTooShort {
                len: n,
                range: self.range,
            });
        }
        let terms = n - self.range + 1;
        let mut out = Vec::with_capacity(terms + 1);
        out.push(S::zero());
        let mut acc = S::zero();
        for i in 0..terms {
            let block = &word.symbols()[i..i + self.range];
            match self.weights.get(block) {
                Some(w) => acc = acc + w.clone(),
                None => {
                    return Err(Error::InvalidWord(format!(
                        "word contains block {block:?} with no weight"
                    )))
                }
            }
            out.push(acc.clone());
        }
        Ok(out)
    }

    /// Mean weight along one period of a cycle.
    pub fn cycle_mean(&self, cycle: &crate::symbolic::Cycle) -> Result<S> {
        let n = cycle.len().max(self.range);
        // Unfold enough to cover every block of the period.
        let l = cycle.len();
        let word = cycle.unfold(l);
        let sum = self.birkhoff_sum(&word)?;
        let _ = n;
        Ok(sum / S::from_int(l as i64))
    }
}

/// Small dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim || dim == 0 {
            return Err(Error::InvalidPotential(format!(
                "matrix data length {} does not match dimension {}",
                data.len(),
                dim
            )));
        }
        Ok(Matrix { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Matrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let d = self.dim;
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a != 0.0 {
                    for j in 0..d {
                        data[i * d + j] += a * other.data[k * d + j];
                    }
                }
            }
        }
        Matrix { dim: d, data }
    }

    /// Operator norm induced by the max norm: maximum absolute row sum.
    /// Submultiplicative, and equal to the largest |entry| on diagonal
    /// matrices, which keeps the diagonal reduction exact.
    pub fn op_norm(&self) -> f64 {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> f64 {
        let d = self.dim;
        let mut m = self.data.clone();
        let mut det = 1.0;
        for col in 0..d {
            let pivot = (col..d)
                .max_by(|&a, &b| m[a * d + col].abs().total_cmp(&m[b * d + col].abs()))
                .unwrap();
            if m[pivot * d + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for j in 0..d {
                    m.swap(col * d + j, pivot * d + j);
                }
                det = -det;
            }
            det *= m[col * d + col];
            for row in col + 1..d {
                let f = m[row * d + col] / m[col * d + col];
                if f != 0.0 {
                    for j in col..d {
                        m[row * d + j] -= f * m[col * d + j];
                    }
                }
            }
        }
        det
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j) == 0.0))
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }
}

/// `f_n(x) = log || A_{x_{n-1}} ... A_{x_0} ||` for one invertible matrix per
/// symbol. Subadditive, hence asymptotically additive; the additive
/// approximant is `(1/d) log |det A_s|` per symbol.
#[derive(Debug, Clone)]
pub struct CocyclePotential {
    dim: usize,
    matrices: Vec<Matrix>,
}

impl CocyclePotential {
    pub fn new(matrices: Vec<Matrix>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidPotential("cocycle needs one matrix per symbol".into()));
        }
        let dim = matrices[0].dim();
        for (s, m) in matrices.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::InvalidPotential(
                    "all cocycle matrices must share a dimension".into(),
                ));
            }
            if m.det().abs() < 1e-300 {
                return Err(Error::InvalidPotential(format!(
                    "matrix for symbol {s} is singular"
                )));
            }
        }
        Ok(CocyclePotential { dim, matrices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, s: Symbol) -> &Matrix {
        &self.matrices[s as usize]
    }

    pub fn symbol_count(&self) -> usize {
        self.matrices.len()
    }

    /// Ordered product along the first `n` symbols of the word:
    /// `A_{w_{n-1}} ... A_{w_0}`.
    pub fn product(&self, symbols: &[Symbol]) -> Matrix {
        let mut acc = Matrix::identity(self.dim);
        for &s in symbols {
            acc = self.matrices[s as usize].mul(&acc);
        }
        acc
    }

    /// `f_n` on the first `n = word length` symbols.
    pub fn evaluate(&self, word: &Word) -> f64 {
        self.product(word.symbols()).op_norm().ln()
    }

    pub fn all_diagonal(&self) -> bool {
        self.matrices.iter().all(Matrix::is_diagonal)
    }

    /// For a diagonal cocycle: the per-coordinate additive potentials
    /// `log |a_{ii}|` as range-1 weight tables.
    pub fn diagonal_coordinates(&self, sft: &Sft) -> Option<Vec<LocallyConstantPotential<f64>>> {
        if !self.all_diagonal() || self.matrices.len() < sft.alphabet_size() {
            return None;
        }
        Some(
            (0..self.dim)
                .map(|i| {
                    let weights = (0..sft.alphabet_size() as Symbol)
                        .map(|s| (vec![s], self.matrices[s as usize].get(i, i).abs().ln()))
                        .collect();
                    LocallyConstantPotential { range: 1, weights }
                })
                .collect(),
        )
    }

    /// Additive approximant `(1/d) log |det A_s|` per symbol, with the
    /// certified per-step error `max_s (log ||A_s|| - (1/d) log |det A_s|)`.
    /// The error bounds `(1/n) |f_n - S_n f|` for every n and word.
    pub fn approximant(&self, sft: &Sft) -> (LocallyConstantPotential<f64>, f64) {
        let d = self.dim as f64;
        let weights: BTreeMap<Vec<Symbol>, f64> = (0..sft.alphabet_size() as Symbol)
            .map(|s| (vec![s], self.matrices[s as usize].det().abs().ln() / d))
            .collect();
        let err = (0..sft.alphabet_size())
            .map(|s| {
                let m = &self.matrices[s];
                m.op_norm().ln() - m.det().abs().ln() / d
            })
            .fold(0.0, f64::max);
        (
            LocallyConstantPotential { range: 1, weights },
            err.max(0.0),
        )
    }

    /// Certified lower bound on `(1/p) log rho(A_cycle)` via
    /// `rho(M) >= (|tr M^k| / d)^{1/k}`.
    pub fn cycle_lower_bound(&self, cycle: &crate::symbolic::Cycle) -> f64 {
        let m = self.product(cycle.symbols());
        let d = self.dim as f64;
        let mut best = f64::NEG_INFINITY;
        let mut power = m.clone();
        let mut k = 1u32;
        while k <= 64 {
            let tr = power.trace().abs();
            if tr > 0.0 {
                let bound = (tr.ln() - d.ln()) / k as f64;
                best = best.max(bound);
            }
            if k == 64 || !power.data.iter().all(|x| x.is_finite()) {
                break;
            }
            power = power.mul(&power);
            k *= 2;
        }
        best / cycle.len() as f64
    }

    /// Upper bound on the same quantity via Gelfand: `rho(M) <= ||M^k||^{1/k}`.
    pub fn cycle_upper_bound(&self, cycle: &crate::symbolic::Cycle) -> f64 {
        let m = self.product(cycle.symbols());
        let mut best = f64::INFINITY;
        let mut power = m.clone();
        let mut k = 1u32;
        while k <= 64 {
            let norm = power.op_norm();
            if norm > 0.0 && norm.is_finite() {
                best = best.min(norm.ln() / k as f64);
            } else {
                break;
            }
            if k == 64 {
                break;
            }
            power = power.mul(&power);
            k *= 2;
        }
        best / cycle.len() as f64
    }
}

/// Report from spot-checking a declared approximant family on sampled words.
#[derive(Debug, Clone)]
pub struct SpotCheck {
    pub declared_xi: f64,
    pub observed: f64,
    pub word_length: usize,
    pub samples: usize,
    pub within_declared: bool,
}

type SequenceEvaluator = Box<dyn Fn(&Word) -> f64 + Send + Sync>;

/// A generic sequence potential given by an evaluator `word |-> f_n`, with an
/// optional user-declared family of additive approximants. Asymptotic
/// additivity is asserted by the user and spot-checked, never proven.
pub struct SequencePotential {
    evaluator: SequenceEvaluator,
    declared: Vec<(f64, LocallyConstantPotential<f64>)>,
}

impl std::fmt::Debug for SequencePotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SequencePotential")
            .field("declared", &self.declared.len())
            .finish()
    }
}

impl SequencePotential {
    pub fn new(
        evaluator: SequenceEvaluator,
        declared: Vec<(f64, LocallyConstantPotential<f64>)>,
    ) -> Self {
        let mut declared = declared;
        declared.sort_by(|a, b| a.0.total_cmp(&b.0));
        SequencePotential { evaluator, declared }
    }

    pub fn evaluate(&self, word: &Word) -> f64 {
        (self.evaluator)(word)
    }

    /// Declared approximant with the smallest xi not exceeding the request.
    pub fn approximant(&self, xi: f64) -> Result<(LocallyConstantPotential<f64>, f64)> {
        self.declared
            .iter()
            .find(|(declared_xi, _)| *declared_xi <= xi)
            .map(|(declared_xi, pot)| (pot.clone(), *declared_xi))
            .ok_or(Error::NoApproximantAvailable { requested: xi })
    }

    /// Samples words of length `n` from the chain and reports the observed
    /// `(1/n) |f_n - S_n f_xi|` against the declared xi.
    pub fn spot_check(
        &self,
        chain: &MarkovChain<f64>,
        xi: f64,
        n: usize,
        samples: usize,
        seed: u64,
    ) -> Result<SpotCheck> {
        let (approx, declared_xi) = self.approximant(xi)?;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut observed: f64 = 0.0;
        for _ in 0..samples {
            let word = chain.sample_word(n, &mut rng);
            let f_n = self.evaluate(&word);
            let s_n = approx.prefix_sums(&word)?.last().cloned().unwrap_or(0.0);
            observed = observed.max((f_n - s_n).abs() / n as f64);
        }
        Ok(SpotCheck {
            declared_xi,
            observed,
            word_length: n,
            samples,
            within_declared: observed < declared_xi || declared_xi == 0.0,
        })
    }
}

/// Any supported potential, for floating-point pipelines.
#[derive(Debug)]
pub enum Potential {
    LocallyConstant(LocallyConstantPotential<f64>),
    Cocycle(CocyclePotential),
    Sequence(SequencePotential),
}

impl Potential {
    /// Additive approximant with certified error:
    /// locally constant -> itself with error 0; cocycle -> determinant
    /// approximant; sequence -> best declared family member.
    pub fn approximant(&self, sft: &Sft, xi: f64) -> Result<(LocallyConstantPotential<f64>, f64)> {
        assert!(xi > 0.0, "xi must be positive");
        match self {
            Potential::LocallyConstant(p) => Ok((p.clone(), 0.0)),
            Potential::Cocycle(c) => Ok(c.approximant(sft)),
            Potential::Sequence(s) => s.approximant(xi),
        }
    }

    pub fn birkhoff_sum(&self, word: &Word) -> Result<f64> {
        match self {
            Potential::LocallyConstant(p) => p.birkhoff_sum(word),
            Potential::Cocycle(c) => Ok(c.evaluate(word)),
            Potential::Sequence(s) => Ok(s.evaluate(word)),
        }
    }

    pub fn range(&self) -> usize {
        match self {
            Potential::LocallyConstant(p) => p.range(),
            _ => 1,
        }
    }
}

/// A certified constant `sigma > 0` with `(1/n) psi_n >= sigma` for all n and
/// x. For locally constant potentials the tight value is the minimum block
/// weight.
#[derive(Debug, Clone, PartialEq)]
pub struct DenominatorBound<S> {
    sigma: S,
}

impl<S: Scalar> DenominatorBound<S> {
    pub fn new(sigma: S) -> Result<Self> {
        if sigma <= S::zero() {
            return Err(Error::DenominatorViolated {
                sigma: sigma.to_f64_lossy(),
                observed: sigma.to_f64_lossy(),
            });
        }
        Ok(DenominatorBound { sigma })
    }

    /// The tight bound for a locally constant potential.
    pub fn tight(pot: &LocallyConstantPotential<S>) -> Result<Self> {
        Self::new(pot.min_weight())
    }

    pub fn sigma(&self) -> &S {
        &self.sigma
    }

    /// Checks the bound against a locally constant potential's minimum weight.
    pub fn validate_for(&self, pot: &LocallyConstantPotential<S>) -> Result<()> {
        let min = pot.min_weight();
        if min < self.sigma {
            return Err(Error::DenominatorViolated {
                sigma: self.sigma.to_f64_lossy(),
                observed: min.to_f64_lossy(),
            });
        }
        Ok(())
    }
}

/// Result of a measure-average computation: a (possibly degenerate) interval.
#[derive(Debug, Clone)]
pub struct AverageOutcome<S> {
    pub lo: S,
    pub hi: S,
    pub exact: bool,
    /// Best interval returned but wider than the requested tolerance.
    pub effort_exceeded: bool,
    /// Certified upper bounds `(1/n) int f_n d mu` along doubling n
    /// (nonincreasing by Fekete); cocycle path only.
    pub upper_sequence: Vec<(usize, f64)>,
    /// Two-sided confidence level of the Monte-Carlo lower estimate, if one
    /// was used.
    pub mc_confidence: Option<f64>,
}

impl<S: Scalar> AverageOutcome<S> {
    fn exact_point(v: S) -> Self {
        AverageOutcome {
            lo: v.clone(),
            hi: v,
            exact: true,
            effort_exceeded: false,
            upper_sequence: Vec::new(),
            mc_confidence: None,
        }
    }

    pub fn width(&self) -> S {
        self.hi.clone() - self.lo.clone()
    }

    pub fn midpoint_f64(&self) -> f64 {
        (self.lo.to_f64_lossy() + self.hi.to_f64_lossy()) / 2.0
    }
}

/// Exact measure average of a locally constant potential under a stationary
/// Markov chain: the expectation of block weights under the stationary block
/// distribution.
pub fn measure_average_lc<S: Scalar>(
    pot: &LocallyConstantPotential<S>,
    chain: &MarkovChain<S>,
) -> Result<AverageOutcome<S>> {
    let mut total = S::zero();
    for (block, w) in pot.weights() {
        let p = chain.block_probability(block);
        if !p.is_zero() {
            total = total + p * w.clone();
        }
    }
    Ok(AverageOutcome::exact_point(total))
}

/// Effort budget for the certified/sampled cocycle average.
#[derive(Debug, Clone)]
pub struct EffortBudget {
    /// Cap on support words enumerated per exact `int f_n` evaluation.
    pub max_words: usize,
    /// Monte-Carlo sample count for the lower estimate.
    pub mc_samples: usize,
    /// Monte-Carlo word length.
    pub mc_length: usize,
    pub seed: u64,
}

impl Default for EffortBudget {
    fn default() -> Self {
        EffortBudget {
            max_words: 200_000,
            mc_samples: 96,
            mc_length: 2048,
            seed: 0,
        }
    }
}

/// Measure average of any potential under a stationary chain, to the given
/// tolerance when possible.
///
/// Locally constant: exact. Diagonal cocycles: exact via the per-coordinate
/// scalar reduction on each recurrent class. General cocycles: certified
/// subadditive upper bounds along doubling n plus a Monte-Carlo lower
/// estimate; if the interval stays wider than `tolerance` the best interval is
/// returned with `effort_exceeded` set. Sequence potentials: declared
/// approximant value with its xi as the radius.
pub fn measure_average(
    pot: &Potential,
    chain: &MarkovChain<f64>,
    tolerance: f64,
    budget: &EffortBudget,
) -> Result<AverageOutcome<f64>> {
    match pot {
        Potential::LocallyConstant(p) => measure_average_lc(p, chain),
        Potential::Sequence(s) => {
            let (approx, xi) = s.approximant(f64::INFINITY)?;
            let base = measure_average_lc(&approx, chain)?;
            Ok(AverageOutcome {
                lo: base.lo - xi,
                hi: base.hi + xi,
                exact: xi == 0.0,
                effort_exceeded: 2.0 * xi > tolerance,
                upper_sequence: Vec::new(),
                mc_confidence: None,
            })
        }
        Potential::Cocycle(c) => measure_average_cocycle(c, chain, tolerance, budget),
    }
}

fn measure_average_cocycle(
    cocycle: &CocyclePotential,
    chain: &MarkovChain<f64>,
    tolerance: f64,
    budget: &EffortBudget,
) -> Result<AverageOutcome<f64>> {
    if let Some(coords) = cocycle.diagonal_coordinates(chain.sft()) {
        // Per recurrent class the chain is ergodic and the limit is the best
        // coordinate mean; classes mix affinely.
        let mut total = 0.0;
        for class in chain.recurrent_classes() {
            let best = coords
                .iter()
                .map(|h| {
                    class
                        .edge_ids
                        .iter()
                        .map(|&e| {
                            let (u, _) = chain.sft().edges()[e];
                            chain.edge_frequency(e) * h.weight(&[u]).copied().unwrap_or(0.0)
                        })
                        .sum::<f64>()
                        / class.mass
                })
                .fold(f64::NEG_INFINITY, f64::max);
            total += class.mass * best;
        }
        return Ok(AverageOutcome::exact_point(total));
    }

    // Certified upper bounds along doubling lengths.
    let mut upper_sequence = Vec::new();
    let mut n = 1usize;
    let mut hi = f64::INFINITY;
    loop {
        match exact_integral(cocycle, chain, n, budget.max_words) {
            Some(v) => {
                hi = hi.min(v / n as f64);
                upper_sequence.push((n, v / n as f64));
            }
            None => break,
        }
        if n >= 64 {
            break;
        }
        n *= 2;
    }

    // Monte-Carlo lower estimate: mean - 2 * stderr, ~95% one-sided.
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(budget.seed);
    let mut vals = Vec::with_capacity(budget.mc_samples);
    for _ in 0..budget.mc_samples {
        let word = chain.sample_word(budget.mc_length, &mut rng);
        vals.push(cocycle.evaluate(&word) / word.len() as f64);
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (vals.len().saturating_sub(1).max(1)) as f64;
    let stderr = (var / vals.len() as f64).sqrt();
    let lo = (mean - 2.0 * stderr).min(hi);

    Ok(AverageOutcome {
        lo,
        hi,
        exact: false,
        effort_exceeded: hi - lo > tolerance,
        upper_sequence,
        mc_confidence: Some(0.95),
    })
}

/// `Phi_*(mu) / Psi_*(mu)` for a stationary chain, exactly.
pub fn measure_ratio<S: Scalar>(
    phi: &LocallyConstantPotential<S>,
    psi: &LocallyConstantPotential<S>,
    chain: &MarkovChain<S>,
) -> Result<S> {
    let num = measure_average_lc(phi, chain)?.lo;
    let den = measure_average_lc(psi, chain)?.lo;
    if den <= S::zero() {
        return Err(Error::DenominatorViolated {
            sigma: 0.0,
            observed: den.to_f64_lossy(),
        });
    }
    Ok(num / den)
}

/// `int f_n d mu` by exact enumeration of the chain's support words, or `None`
/// when the word budget is exceeded.
fn exact_integral(
    cocycle: &CocyclePotential,
    chain: &MarkovChain<f64>,
    n: usize,
    max_words: usize,
) -> Option<f64> {
    struct Frame {
        state: Symbol,
        prob: f64,
        product: Matrix,
        depth: usize,
    }
    let mut total = 0.0;
    let mut visited = 0usize;
    let mut stack: Vec<Frame> = chain
        .support_vertices()
        .iter()
        .map(|&v| Frame {
            state: v,
            prob: chain.stationary(v),
            product: cocycle.matrix(v).clone(),
            depth: 1,
        })
        .collect();
    while let Some(frame) = stack.pop() {
        visited += 1;
        if visited > max_words {
            return None;
        }
        if frame.depth == n {
            total += frame.prob * frame.product.op_norm().ln();
            continue;
        }
        for &e in chain.sft().out_edge_ids(frame.state) {
            let p = chain.transition_probability(e);
            if p > 0.0 {
                let next = chain.sft().edges()[e].1;
                stack.push(Frame {
                    state: next,
                    prob: frame.prob * p,
                    product: cocycle.matrix(next).mul(&frame.product),
                    depth: frame.depth + 1,
                });
            }
        }
    }
    Some(total)
}
