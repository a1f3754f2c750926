//! Subshifts of finite type: the phase space `(X, T)`, finite words and
//! cycles as its computable stand-ins, higher-block recoding, and simple-cycle
//! enumeration.
//!
//! Everything here is immutable after construction and safe to share across
//! threads.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

pub type Symbol = u32;

/// Default cap for simple-cycle enumeration.
pub const DEFAULT_CYCLE_CAP: usize = 1_000_000;

/// A subshift of finite type over a finite alphabet `{0, .., n-1}` with an
/// allowed-transition relation.
///
/// `mixing_time` is the least `p` such that every entry of the `p`-th Boolean
/// power of the adjacency matrix is positive; `None` when the adjacency is not
/// primitive (the SFT is then accepted for LP and graph computations but
/// rejected by the irregular-point construction).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sft {
    alphabet_size: usize,
    allowed: Vec<bool>, // row-major alphabet_size x alphabet_size
    edges: Vec<(Symbol, Symbol)>,
    edge_index: Vec<Option<usize>>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    mixing_time: Option<usize>,
}

impl Sft {
    /// Validates and builds an SFT from the allowed-pair relation.
    ///
    /// Rejects empty alphabets and stranded symbols (a symbol with no outgoing
    /// or no incoming transition). Computes the mixing time when the adjacency
    /// matrix is primitive.
    pub fn new(alphabet_size: usize, allowed_pairs: &[(Symbol, Symbol)]) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::EmptyAlphabet);
        }
        let n = alphabet_size;
        let mut allowed = vec![false; n * n];
        for &(a, b) in allowed_pairs {
            if (a as usize) < n && (b as usize) < n {
                allowed[a as usize * n + b as usize] = true;
            } else {
                return Err(Error::InvalidWord(format!(
                    "transition ({a}, {b}) outside alphabet of size {n}"
                )));
            }
        }
        Self::from_matrix(n, allowed)
    }

    fn from_matrix(n: usize, allowed: Vec<bool>) -> Result<Self> {
        for s in 0..n {
            let has_out = (0..n).any(|t| allowed[s * n + t]);
            let has_in = (0..n).any(|t| allowed[t * n + s]);
            if !has_out || !has_in {
                return Err(Error::StrandedSymbol(s as Symbol));
            }
        }
        let mut edges = Vec::new();
        let mut edge_index = vec![None; n * n];
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for a in 0..n {
            for b in 0..n {
                if allowed[a * n + b] {
                    let id = edges.len();
                    edge_index[a * n + b] = Some(id);
                    edges.push((a as Symbol, b as Symbol));
                    out_edges[a].push(id);
                    in_edges[b].push(id);
                }
            }
        }
        let mixing_time = mixing_time_of(n, &allowed);
        Ok(Sft {
            alphabet_size: n,
            allowed,
            edges,
            edge_index,
            out_edges,
            in_edges,
            mixing_time,
        })
    }

    /// Full shift on `n` symbols (every transition allowed).
    pub fn full_shift(n: usize) -> Result<Self> {
        Self::from_matrix(n, vec![true; n * n])
    }

    /// Golden-mean shift: two symbols, transition `1 -> 1` forbidden.
    pub fn golden_mean() -> Self {
        Sft::new(2, &[(0, 0), (0, 1), (1, 0)]).expect("golden mean is valid")
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn is_allowed(&self, a: Symbol, b: Symbol) -> bool {
        self.allowed[a as usize * self.alphabet_size + b as usize]
    }

    /// Edge list in lexicographic `(source, target)` order; all edge-indexed
    /// vectors in the crate align with it.
    pub fn edges(&self) -> &[(Symbol, Symbol)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_id(&self, a: Symbol, b: Symbol) -> Option<usize> {
        self.edge_index[a as usize * self.alphabet_size + b as usize]
    }

    pub fn out_edge_ids(&self, v: Symbol) -> &[usize] {
        &self.out_edges[v as usize]
    }

    pub fn in_edge_ids(&self, v: Symbol) -> &[usize] {
        &self.in_edges[v as usize]
    }

    pub fn mixing_time(&self) -> Option<usize> {
        self.mixing_time
    }

    pub fn is_mixing(&self) -> bool {
        self.mixing_time.is_some()
    }

    /// Shortest connecting word between `from` and `to`: symbols strictly
    /// between the endpoints, possibly empty. `None` only when `to` is
    /// unreachable from `from`.
    pub fn bridge(&self, from: Symbol, to: Symbol) -> Option<Vec<Symbol>> {
        if self.is_allowed(from, to) {
            return Some(Vec::new());
        }
        // BFS over symbols, tracking predecessors.
        let n = self.alphabet_size;
        let mut pred = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(from as usize);
        let mut seen = vec![false; n];
        seen[from as usize] = true;
        while let Some(u) = queue.pop_front() {
            for &e in &self.out_edges[u] {
                let v = self.edges[e].1 as usize;
                if !seen[v] {
                    seen[v] = true;
                    pred[v] = u;
                    if self.allowed[v * n + to as usize] {
                        let mut path = vec![v as Symbol];
                        let mut cur = v;
                        while pred[cur] != usize::MAX {
                            cur = pred[cur];
                            if cur == from as usize {
                                break;
                            }
                            path.push(cur as Symbol);
                        }
                        path.reverse();
                        return Some(path);
                    }
                    queue.push_back(v);
                }
            }
        }
        None
    }
}

/// Least `p` with all entries of the Boolean `p`-th power positive, or `None`
/// when no such `p` exists below the Wielandt bound `(n-1)^2 + 1`.
fn mixing_time_of(n: usize, allowed: &[bool]) -> Option<usize> {
    let a = BoolMatrix::from_flags(n, allowed);
    let wielandt = if n == 1 { 1 } else { (n - 1) * (n - 1) + 1 };
    if !a.pow(wielandt).all_positive() {
        return None;
    }
    // Positivity is monotone in the exponent (no stranded symbols), so the
    // least exponent can be found by binary search.
    let (mut lo, mut hi) = (1usize, wielandt);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if a.pow(mid).all_positive() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(lo)
}

/// Square Boolean matrix with bitset rows.
#[derive(Clone)]
pub(crate) struct BoolMatrix {
    n: usize,
    rows: Vec<Vec<u64>>,
}

impl BoolMatrix {
    pub(crate) fn from_flags(n: usize, flags: &[bool]) -> Self {
        let words = n.div_ceil(64);
        let mut rows = vec![vec![0u64; words]; n];
        for i in 0..n {
            for j in 0..n {
                if flags[i * n + j] {
                    rows[i][j / 64] |= 1 << (j % 64);
                }
            }
        }
        BoolMatrix { n, rows }
    }

    fn identity(n: usize) -> Self {
        let words = n.div_ceil(64);
        let mut rows = vec![vec![0u64; words]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i / 64] |= 1 << (i % 64);
        }
        BoolMatrix { n, rows }
    }

    fn mul(&self, other: &Self) -> Self {
        let words = self.rows[0].len();
        let mut rows = vec![vec![0u64; words]; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                if self.rows[i][j / 64] >> (j % 64) & 1 == 1 {
                    for w in 0..words {
                        rows[i][w] |= other.rows[j][w];
                    }
                }
            }
        }
        BoolMatrix { n: self.n, rows }
    }

    pub(crate) fn pow(&self, mut e: usize) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.n);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub(crate) fn all_positive(&self) -> bool {
        let n = self.n;
        self.rows
            .iter()
            .all(|row| (0..n).all(|j| row[j / 64] >> (j % 64) & 1 == 1))
    }
}

/// A finite word over the alphabet; a finite approximation of a point of `X`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    symbols: Vec<Symbol>,
}

impl Word {
    /// Builds a word, checking every adjacent pair against the SFT.
    pub fn new(symbols: Vec<Symbol>, sft: &Sft) -> Result<Self> {
        for pair in symbols.windows(2) {
            if !sft.is_allowed(pair[0], pair[1]) {
                return Err(Error::InvalidWord(format!(
                    "transition {} -> {} not allowed",
                    pair[0], pair[1]
                )));
            }
        }
        for &s in &symbols {
            if s as usize >= sft.alphabet_size() {
                return Err(Error::InvalidWord(format!("symbol {s} outside alphabet")));
            }
        }
        Ok(Word { symbols })
    }

    /// Builds a word without adjacency checks; for internal constructions that
    /// are valid by design.
    pub fn new_unchecked(symbols: Vec<Symbol>) -> Self {
        Word { symbols }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbol at position `i` under periodic extension.
    pub fn cyclic(&self, i: usize) -> Symbol {
        self.symbols[i % self.symbols.len()]
    }

    pub fn is_valid(&self, sft: &Sft) -> bool {
        self.symbols
            .windows(2)
            .all(|p| sft.is_allowed(p[0], p[1]))
    }
}

/// A nonempty word whose wrap-around transition is also allowed: a periodic
/// point. Canonicalized to its lexicographically least rotation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cycle {
    symbols: Vec<Symbol>,
}

impl Cycle {
    pub fn new(symbols: Vec<Symbol>, sft: &Sft) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidWord("empty cycle".into()));
        }
        let word = Word::new(symbols, sft)?;
        let symbols = word.symbols;
        let last = *symbols.last().unwrap();
        if !sft.is_allowed(last, symbols[0]) {
            return Err(Error::InvalidWord(format!(
                "wrap transition {} -> {} not allowed",
                last, symbols[0]
            )));
        }
        Ok(Self::canonical(symbols))
    }

    fn canonical(symbols: Vec<Symbol>) -> Self {
        let n = symbols.len();
        let mut best = 0usize;
        for start in 1..n {
            for k in 0..n {
                let a = symbols[(start + k) % n];
                let b = symbols[(best + k) % n];
                if a < b {
                    best = start;
                    break;
                }
                if a > b {
                    break;
                }
            }
        }
        let rotated = (0..n).map(|k| symbols[(best + k) % n]).collect();
        Cycle { symbols: rotated }
    }

    pub(crate) fn canonical_unchecked(symbols: Vec<Symbol>) -> Self {
        Self::canonical(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The cycle unfolded into a word of length `n` (periodic extension).
    pub fn unfold(&self, n: usize) -> Word {
        Word::new_unchecked((0..n).map(|i| self.cyclic(i)).collect())
    }

    pub fn cyclic(&self, i: usize) -> Symbol {
        self.symbols[i % self.symbols.len()]
    }

    /// Edge ids traversed by one period, in order.
    pub fn edge_ids(&self, sft: &Sft) -> Vec<usize> {
        let l = self.symbols.len();
        (0..l)
            .map(|i| {
                sft.edge_id(self.symbols[i], self.symbols[(i + 1) % l])
                    .expect("cycle edges are allowed")
            })
            .collect()
    }
}

/// All simple cycles (no repeated vertex) of length at most `max_len`, each in
/// canonical rotation, in deterministic sorted order.
///
/// Errors with `BudgetExceeded` when more than `cap` cycles would be emitted.
pub fn enumerate_simple_cycles(sft: &Sft, max_len: usize, cap: usize) -> Result<Vec<Cycle>> {
    let n = sft.alphabet_size();
    let max_len = max_len.min(n);
    let mut found = BTreeSet::new();
    // Cycles whose minimal vertex is `root`, explored over vertices >= root.
    for root in 0..n as Symbol {
        let mut stack: Vec<Symbol> = vec![root];
        let mut on_path = vec![false; n];
        on_path[root as usize] = true;
        // Iterative DFS with per-level next-neighbor cursors.
        let mut cursors: Vec<usize> = vec![0];
        while !stack.is_empty() {
            let depth = stack.len();
            let u = *stack.last().unwrap();
            let cursor = &mut cursors[depth - 1];
            let mut advanced = false;
            while (*cursor) < n {
                let v = *cursor as Symbol;
                *cursor += 1;
                if v < root || !sft.is_allowed(u, v) {
                    continue;
                }
                if v == root {
                    if found.insert(Cycle::canonical_unchecked(stack.clone())) && found.len() > cap {
                        return Err(Error::BudgetExceeded { cap });
                    }
                    continue;
                }
                if depth < max_len && !on_path[v as usize] {
                    stack.push(v);
                    on_path[v as usize] = true;
                    cursors.push(0);
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                let popped = stack.pop().unwrap();
                on_path[popped as usize] = false;
                cursors.pop();
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// Higher-block presentation of an SFT: vertices are allowed `order`-blocks,
/// edges are allowed `(order+1)`-blocks. Conjugate to the base shift; any
/// potential of range `<= order + 1` becomes an edge weight on the recoded
/// graph.
#[derive(Debug, Clone)]
pub struct Recoding {
    base: Sft,
    order: usize,
    sft: Sft,
    blocks: Vec<Vec<Symbol>>,
}

impl Recoding {
    /// `recode_k_blocks`: vertices = allowed `k`-blocks.
    pub fn new(base: &Sft, k: usize) -> Result<Self> {
        assert!(k >= 1, "recoding order must be at least 1");
        let mut blocks: Vec<Vec<Symbol>> = Vec::new();
        // Enumerate allowed k-blocks in lexicographic order.
        let mut stack: Vec<Vec<Symbol>> =
            (0..base.alphabet_size() as Symbol).rev().map(|s| vec![s]).collect();
        while let Some(block) = stack.pop() {
            if block.len() == k {
                blocks.push(block);
                continue;
            }
            let last = *block.last().unwrap();
            for next in (0..base.alphabet_size() as Symbol).rev() {
                if base.is_allowed(last, next) {
                    let mut b = block.clone();
                    b.push(next);
                    stack.push(b);
                }
            }
        }
        blocks.sort();
        let index: std::collections::HashMap<&[Symbol], usize> = blocks
            .iter()
            .enumerate()
            .map(|(i, b)| (b.as_slice(), i))
            .collect();
        let m = blocks.len();
        let mut pairs = Vec::new();
        for (ui, u) in blocks.iter().enumerate() {
            for next in 0..base.alphabet_size() as Symbol {
                if base.is_allowed(*u.last().unwrap(), next) {
                    let mut v = u[1..].to_vec();
                    v.push(next);
                    if k == 1 {
                        v = vec![next];
                    }
                    if let Some(&vi) = index.get(v.as_slice()) {
                        pairs.push((ui as Symbol, vi as Symbol));
                    }
                }
            }
        }
        let sft = Sft::new(m, &pairs)?;
        Ok(Recoding {
            base: base.clone(),
            order: k,
            sft,
            blocks,
        })
    }

    /// Recoding level adequate for potentials of the given ranges: order
    /// `max(1, max_range - 1)`, so each range becomes an edge weight.
    pub fn for_ranges(base: &Sft, ranges: &[usize]) -> Result<Self> {
        let max_range = ranges.iter().copied().max().unwrap_or(1);
        Self::new(base, max_range.saturating_sub(1).max(1))
    }

    pub fn base(&self) -> &Sft {
        &self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sft(&self) -> &Sft {
        &self.sft
    }

    /// The `order`-block carried by a recoded vertex.
    pub fn block(&self, v: Symbol) -> &[Symbol] {
        &self.blocks[v as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.order == 1
    }

    /// The `(order+1)`-block carried by a recoded edge.
    pub fn edge_block(&self, edge_id: usize) -> Vec<Symbol> {
        let (u, v) = self.sft.edges()[edge_id];
        let mut b = self.blocks[u as usize].clone();
        b.push(*self.blocks[v as usize].last().unwrap());
        b
    }

    /// Projects a recoded vertex path to the base word it spells.
    pub fn project_path(&self, path: &[Symbol]) -> Word {
        if path.is_empty() {
            return Word::new_unchecked(Vec::new());
        }
        let mut symbols: Vec<Symbol> = path.iter().map(|&v| self.blocks[v as usize][0]).collect();
        symbols.extend_from_slice(&self.blocks[*path.last().unwrap() as usize][1..]);
        Word::new_unchecked(symbols)
    }

    /// Projects a recoded cycle to the base cycle it spells (same length).
    pub fn project_cycle(&self, cycle: &Cycle) -> Cycle {
        let symbols = cycle
            .symbols()
            .iter()
            .map(|&v| self.blocks[v as usize][0])
            .collect();
        Cycle::canonical_unchecked(symbols)
    }

    /// Lifts a base word of length `>= order` to the recoded vertex path.
    pub fn lift_word(&self, word: &Word) -> Result<Vec<Symbol>> {
        let k = self.order;
        if word.len() < k {
            return Err(Error::WordTooShort {
                len: word.len(),
                range: k,
            });
        }
        let index: std::collections::HashMap<&[Symbol], usize> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| (b.as_slice(), i))
            .collect();
        (0..=word.len() - k)
            .map(|i| {
                index
                    .get(&word.symbols()[i..i + k])
                    .map(|&v| v as Symbol)
                    .ok_or_else(|| Error::InvalidWord(format!("block at {i} not allowed")))
            })
            .collect()
    }
}
