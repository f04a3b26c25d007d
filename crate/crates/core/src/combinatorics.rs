//! Exact combinatorial primitives.
//!
//! Everything here is integer or rational valued and computed with big
//! integers. Factorials and the Stirling triangle are memoized in
//! process-wide, insert-only caches: concurrent readers are fine and two
//! threads racing to extend a cache compute identical values.

use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational used for all bound arithmetic.
///
/// `BigRational` keeps its fraction reduced with a positive denominator.
pub type ExactScalar = BigRational;

pub(crate) fn int(n: impl Into<BigInt>) -> ExactScalar {
    BigRational::from_integer(n.into())
}

fn factorial_cache() -> &'static RwLock<Vec<BigInt>> {
    static CACHE: OnceLock<RwLock<Vec<BigInt>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(vec![BigInt::one()]))
}

/// `n!` as a big integer.
pub fn factorial(n: usize) -> BigInt {
    {
        let cache = factorial_cache().read().expect("factorial cache poisoned");
        if let Some(v) = cache.get(n) {
            return v.clone();
        }
    }
    let mut cache = factorial_cache().write().expect("factorial cache poisoned");
    while cache.len() <= n {
        let next = cache.last().unwrap() * BigInt::from(cache.len());
        cache.push(next);
    }
    cache[n].clone()
}

/// `n! / Π parts_i!`, assuming the parts sum to `n`.
pub(crate) fn multinomial_int(n: usize, parts: &[usize]) -> BigInt {
    debug_assert_eq!(parts.iter().sum::<usize>(), n);
    let mut denom = BigInt::one();
    for &p in parts {
        if p > 1 {
            denom *= factorial(p);
        }
    }
    factorial(n) / denom
}

pub(crate) fn binomial_int(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    multinomial_int(n, &[k, n - k])
}

/// Number of ways to place `n` distinct objects into bins of the given sizes.
pub fn big_multinomial(n: usize, parts: &[usize]) -> Result<ExactScalar> {
    let total: usize = parts.iter().sum();
    if total != n {
        return Err(Error::param(format!(
            "multinomial parts sum to {total}, expected {n}"
        )));
    }
    Ok(int(multinomial_int(n, parts)))
}

fn stirling_cache() -> &'static RwLock<Vec<Vec<BigInt>>> {
    static CACHE: OnceLock<RwLock<Vec<Vec<BigInt>>>> = OnceLock::new();
    // row 0 holds {0,0} = 1
    CACHE.get_or_init(|| RwLock::new(vec![vec![BigInt::one()]]))
}

/// Stirling number of the second kind, total on all `(n, k)`.
///
/// Follows the convention `{0,0} = 1` and returns zero whenever `k > n`
/// or `k = 0 < n`.
pub(crate) fn stirling2_int(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    {
        let tri = stirling_cache().read().expect("stirling cache poisoned");
        if let Some(row) = tri.get(n) {
            return row[k].clone();
        }
    }
    let mut tri = stirling_cache().write().expect("stirling cache poisoned");
    while tri.len() <= n {
        let m = tri.len();
        let prev = &tri[m - 1];
        let mut row = Vec::with_capacity(m + 1);
        row.push(BigInt::zero());
        for j in 1..=m {
            let left = prev[j - 1].clone();
            let up = if j < m {
                &prev[j] * BigInt::from(j)
            } else {
                BigInt::zero()
            };
            row.push(left + up);
        }
        tri.push(row);
    }
    tri[n][k].clone()
}

/// Stirling number of the second kind `{n, k}` for `1 ≤ k ≤ n`.
pub fn stirling2(n: usize, k: usize) -> Result<ExactScalar> {
    if k == 0 || k > n {
        return Err(Error::param(format!(
            "stirling2 requires 1 <= k <= n, got n = {n}, k = {k}"
        )));
    }
    Ok(int(stirling2_int(n, k)))
}

/// `|Φ| = n_w! / (s_c!)^{n_c}`, the number of equipartitions.
pub fn count_equipartitions(n_words: usize, n_concepts: usize) -> Result<ExactScalar> {
    Ok(int(count_equipartitions_int(n_words, n_concepts)?))
}

pub(crate) fn count_equipartitions_int(n_words: usize, n_concepts: usize) -> Result<BigInt> {
    if n_concepts == 0 || n_words % n_concepts != 0 {
        return Err(Error::param(format!(
            "n_c = {n_concepts} does not divide n_w = {n_words}"
        )));
    }
    let s_c = n_words / n_concepts;
    Ok(multinomial_int(n_words, &vec![s_c; n_concepts]))
}

/// Histogram of connected-component sizes: `counts[i - 1] = k_i` is the
/// number of components with `i` vertices, for `i = 1..=L+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComponentSignature {
    counts: Vec<usize>,
    gamma: usize,
    ghat: usize,
}

impl ComponentSignature {
    pub fn new(counts: Vec<usize>) -> Self {
        let gamma = counts.iter().enumerate().map(|(i, &k)| i * k).sum();
        let ghat = counts.iter().enumerate().map(|(i, &k)| (i + 1) * k).sum();
        ComponentSignature {
            counts,
            gamma,
            ghat,
        }
    }

    /// `[k_1, ..., k_{L+1}]`.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Number of components with exactly `size` vertices (1-based).
    pub fn k(&self, size: usize) -> usize {
        self.counts.get(size - 1).copied().unwrap_or(0)
    }

    /// `γ(k) = Σ (i−1) k_i`, the edge count of any forest with this signature.
    pub fn gamma(&self) -> usize {
        self.gamma
    }

    /// `γ̂(k) = Σ i k_i`, the number of vertices covered.
    pub fn ghat(&self) -> usize {
        self.ghat
    }

    /// Sentence length `L` this signature is padded for.
    pub fn length(&self) -> usize {
        self.counts.len() - 1
    }

    /// The largest component size present.
    pub fn max_component(&self) -> usize {
        self.counts.iter().rposition(|&k| k > 0).map_or(0, |i| i + 1)
    }

    /// Compact key over `(k_2, ..., k_{L+1})`; `k_1` is implied by `γ̂ = n_w`.
    pub fn tail(&self) -> &[usize] {
        &self.counts[1..]
    }
}

impl fmt::Display for ComponentSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// All `k ∈ N^{L+1}` with `γ̂(k) = n_w` and `ell ≤ γ(k) ≤ L`.
///
/// Ordered lexicographically on `(k_{L+1}, ..., k_1)`.
pub fn enumerate_signatures(
    length: usize,
    n_words: usize,
    ell: usize,
) -> Result<Vec<ComponentSignature>> {
    if ell > length {
        return Err(Error::param(format!(
            "ell = {ell} outside [0, L = {length}]"
        )));
    }
    let mut out = Vec::new();
    let mut counts = vec![0usize; length + 1];
    fill_signatures(length + 1, length, n_words, ell, 0, 0, &mut counts, &mut out);
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn fill_signatures(
    size: usize,
    length: usize,
    n_words: usize,
    ell: usize,
    gamma: usize,
    covered: usize,
    counts: &mut Vec<usize>,
    out: &mut Vec<ComponentSignature>,
) {
    if size == 1 {
        if covered <= n_words && gamma >= ell {
            counts[0] = n_words - covered;
            out.push(ComponentSignature::new(counts.clone()));
            counts[0] = 0;
        }
        return;
    }
    let max_k = (length - gamma) / (size - 1);
    for k in 0..=max_k {
        let cov = covered + k * size;
        if cov > n_words {
            break;
        }
        counts[size - 1] = k;
        fill_signatures(
            size - 1,
            length,
            n_words,
            ell,
            gamma + k * (size - 1),
            cov,
            counts,
            out,
        );
    }
    counts[size - 1] = 0;
}

/// An `(L+1) × n_c` assignment of components to concepts.
///
/// Row `i` (1-based) tells how many size-`i` components each concept gets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibleMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<usize>,
}

impl AdmissibleMatrix {
    /// `A_{size, concept}` with both indices 1-based.
    pub fn get(&self, size: usize, concept: usize) -> usize {
        self.entries[(size - 1) * self.cols + (concept - 1)]
    }

    pub fn row(&self, size: usize) -> &[usize] {
        &self.entries[(size - 1) * self.cols..size * self.cols]
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    /// `Π_i multinomial(k_i; A_{i,·})`: the number of cut-free equipartitions
    /// that distribute components according to this matrix.
    pub fn assignment_count(&self) -> BigInt {
        let mut prod = BigInt::one();
        for size in 1..=self.rows {
            let row = self.row(size);
            let k: usize = row.iter().sum();
            if k > 1 && row.iter().filter(|&&a| a > 0).count() > 1 {
                prod *= multinomial_int(k, row);
            }
        }
        prod
    }
}

/// Streams every k-admissible matrix.
///
/// Rows for sizes `L+1` down to 2 are chosen by backtracking (their counts
/// are small); the singleton row is then forced by the column capacities.
pub fn enumerate_admissible(
    k: &ComponentSignature,
    n_concepts: usize,
    concept_size: usize,
) -> AdmissibleIter {
    AdmissibleIter::new(k.counts().to_vec(), n_concepts, concept_size)
}

/// Lazy odometer over the admissible matrices of one signature.
pub struct AdmissibleIter {
    counts: Vec<usize>,
    cols: usize,
    concept_size: usize,
    // rows[d] holds the composition chosen for size = counts.len() - d
    rows: Vec<Vec<usize>>,
    started: bool,
    done: bool,
}

impl AdmissibleIter {
    fn new(counts: Vec<usize>, cols: usize, concept_size: usize) -> Self {
        let depth = counts.len().saturating_sub(1);
        AdmissibleIter {
            counts,
            cols,
            concept_size,
            rows: vec![vec![0; cols]; depth],
            started: false,
            done: cols == 0,
        }
    }

    fn size_at(&self, depth: usize) -> usize {
        self.counts.len() - depth
    }

    /// Remaining per-concept capacity after rows `0..depth`.
    fn remaining(&self, depth: usize) -> Vec<usize> {
        let mut rem = vec![self.concept_size; self.cols];
        for d in 0..depth {
            let size = self.size_at(d);
            for (r, a) in rem.iter_mut().zip(&self.rows[d]) {
                *r -= size * a;
            }
        }
        rem
    }

    fn caps(&self, depth: usize) -> Vec<usize> {
        let size = self.size_at(depth);
        self.remaining(depth).into_iter().map(|r| r / size).collect()
    }

    /// Initialise row `depth` to its first composition; false if infeasible.
    fn init_row(&mut self, depth: usize) -> bool {
        let caps = self.caps(depth);
        let total = self.counts[self.size_at(depth) - 1];
        greedy_fill(&mut self.rows[depth], total, &caps)
    }

    fn advance_row(&mut self, depth: usize) -> bool {
        let caps = self.caps(depth);
        next_composition(&mut self.rows[depth], &caps)
    }

    /// Fill rows `from..` with first compositions, backtracking as needed.
    /// Returns false when the whole space is exhausted.
    fn settle(&mut self, mut depth: usize, mut fresh: bool) -> bool {
        let n = self.rows.len();
        loop {
            if depth == n {
                return true;
            }
            let ok = if fresh {
                self.init_row(depth)
            } else {
                self.advance_row(depth)
            };
            if ok {
                depth += 1;
                fresh = true;
            } else {
                if depth == 0 {
                    return false;
                }
                depth -= 1;
                fresh = false;
            }
        }
    }

    fn current(&self) -> Option<AdmissibleMatrix> {
        let rem = self.remaining(self.rows.len());
        if rem.iter().sum::<usize>() != self.counts[0] {
            return None;
        }
        let rows = self.counts.len();
        let mut entries = Vec::with_capacity(rows * self.cols);
        entries.extend_from_slice(&rem);
        for d in (0..self.rows.len()).rev() {
            entries.extend_from_slice(&self.rows[d]);
        }
        Some(AdmissibleMatrix {
            rows,
            cols: self.cols,
            entries,
        })
    }
}

impl Iterator for AdmissibleIter {
    type Item = AdmissibleMatrix;

    fn next(&mut self) -> Option<AdmissibleMatrix> {
        loop {
            if self.done {
                return None;
            }
            let ok = if !self.started {
                self.started = true;
                self.settle(0, true)
            } else if self.rows.is_empty() {
                false
            } else {
                let last = self.rows.len() - 1;
                self.settle(last, false)
            };
            if !ok {
                self.done = true;
                return None;
            }
            if self.rows.is_empty() {
                // L = 0: a single candidate, consumed on first visit.
                let m = self.current();
                self.done = true;
                return m;
            }
            if let Some(m) = self.current() {
                return Some(m);
            }
        }
    }
}

/// First composition of `total` in decreasing lexicographic order under caps.
fn greedy_fill(parts: &mut [usize], mut total: usize, caps: &[usize]) -> bool {
    for (p, &c) in parts.iter_mut().zip(caps) {
        let take = total.min(c);
        *p = take;
        total -= take;
    }
    total == 0
}

/// Step to the next composition (same total) in decreasing lexicographic order.
fn next_composition(parts: &mut [usize], caps: &[usize]) -> bool {
    let n = parts.len();
    if n < 2 {
        return false;
    }
    let mut suffix: usize = parts[n - 1];
    let mut suffix_cap: usize = caps[n - 1];
    for j in (0..n - 1).rev() {
        if parts[j] > 0 && suffix < suffix_cap {
            parts[j] -= 1;
            return greedy_fill(&mut parts[j + 1..], suffix + 1, &caps[j + 1..]);
        }
        suffix += parts[j];
        suffix_cap += caps[j];
    }
    false
}
