//! The optimal kernel `K*` via its graph-cut formulation.
//!
//! A pair of sentences induces a graph on the vocabulary (one edge per
//! position where they differ). `K*(x, y)` only depends on the histogram of
//! component sizes of that graph, so evaluating a pair costs one small
//! union-find plus a memo lookup instead of a sweep over all equipartitions.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::combinatorics::{
    count_equipartitions_int, enumerate_admissible, enumerate_signatures, factorial, int,
    ComponentSignature, ExactScalar,
};
use crate::datamodel::{Equipartition, ModelParams, Sentence, Word};
use crate::error::{Error, Result};

/// `ζ(x, y)`: the undirected edges `{x_ℓ, y_ℓ}` over non-silent positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairGraph {
    /// Sorted, deduplicated, each stored as `(min, max)`.
    edges: Vec<(Word, Word)>,
    silent_count: usize,
}

impl PairGraph {
    /// Builds a graph from explicit edges (self-loops rejected).
    pub fn from_edges(edges: impl IntoIterator<Item = (Word, Word)>) -> Result<Self> {
        let mut out = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::param(format!("self-loop on word {a}")));
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        out.dedup();
        Ok(PairGraph {
            edges: out,
            silent_count: 0,
        })
    }

    pub fn edges(&self) -> &[(Word, Word)] {
        &self.edges
    }

    pub fn silent_count(&self) -> usize {
        self.silent_count
    }
}

pub fn zeta(x: &Sentence, y: &Sentence) -> Result<PairGraph> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let mut edges = Vec::with_capacity(x.len());
    let mut silent = 0;
    for (&a, &b) in x.words().iter().zip(y.words()) {
        if a == b {
            silent += 1;
        } else {
            edges.push((a.min(b), a.max(b)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(PairGraph {
        edges,
        silent_count: silent,
    })
}

/// Tiny disjoint-set forest over local vertex slots.
struct Components {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl Components {
    fn new() -> Self {
        Components {
            parent: Vec::new(),
            size: Vec::new(),
        }
    }

    fn add(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.size.push(1);
        self.parent.len() - 1
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
    }

    /// Sizes of all components, one entry per root.
    fn sizes(&mut self) -> Vec<usize> {
        let mut out = Vec::new();
        for v in 0..self.parent.len() {
            if self.find(v) == v {
                out.push(self.size[v]);
            }
        }
        out
    }
}

fn touched_component_sizes(edges: &[(Word, Word)]) -> Vec<usize> {
    let mut slots: Vec<Word> = Vec::with_capacity(2 * edges.len());
    let mut comps = Components::new();
    let mut slot_of = |w: Word, comps: &mut Components| -> usize {
        match slots.iter().position(|&s| s == w) {
            Some(i) => i,
            None => {
                slots.push(w);
                comps.add()
            }
        }
    };
    for &(a, b) in edges {
        let ia = slot_of(a, &mut comps);
        let ib = slot_of(b, &mut comps);
        comps.union(ia, ib);
    }
    comps.sizes()
}

/// Component-size histogram of `g` on the vertex set `{1..n_w}`, padded to
/// length `L + 1`. Untouched words are singleton components.
pub fn component_signature(g: &PairGraph, n_words: usize, length: usize) -> ComponentSignature {
    let sizes = touched_component_sizes(&g.edges);
    let touched: usize = sizes.iter().sum();
    let top = sizes.iter().copied().max().unwrap_or(1).max(length + 1);
    let mut counts = vec![0usize; top];
    counts[0] = n_words - touched;
    for s in sizes {
        counts[s - 1] += 1;
    }
    ComponentSignature::new(counts)
}

/// `I(G)` for a graph with signature `k`: equipartitions severing no edge.
pub(crate) fn cut_free_count_int(k: &ComponentSignature, n_concepts: usize, concept_size: usize) -> BigInt {
    if k.max_component() > concept_size {
        return BigInt::zero();
    }
    enumerate_admissible(k, n_concepts, concept_size)
        .map(|a| a.assignment_count())
        .sum()
}

/// `I(G)`, the number of equipartitions that keep every edge of `g` inside
/// one concept.
pub fn count_cut_free(g: &PairGraph, n_words: usize, n_concepts: usize) -> Result<ExactScalar> {
    count_equipartitions_int(n_words, n_concepts)?;
    if let Some(&(_, b)) = g.edges.iter().max_by_key(|e| e.1) {
        if b as usize > n_words {
            return Err(Error::param(format!("word {b} outside vocabulary")));
        }
    }
    let k = component_signature(g, n_words, g.edges.len().max(1));
    Ok(int(cut_free_count_int(&k, n_concepts, n_words / n_concepts)))
}

/// `𝔣(k)` computed from scratch.
pub fn f_of_signature_uncached(k: &ComponentSignature, params: &ModelParams) -> ExactScalar {
    let s_c = params.concept_size();
    let n_c = params.n_concepts();
    let count = cut_free_count_int(k, n_c, s_c);
    if count.is_zero() {
        return ExactScalar::zero();
    }
    let mut numer = count * BigInt::from(n_c).pow(params.length() as u32);
    numer *= factorial(s_c).pow(n_c as u32);
    ExactScalar::new(numer, factorial(params.n_words()))
}

type FKey = (usize, usize, usize, Vec<usize>);

fn f_memo() -> &'static RwLock<HashMap<FKey, ExactScalar>> {
    static MEMO: OnceLock<RwLock<HashMap<FKey, ExactScalar>>> = OnceLock::new();
    MEMO.get_or_init(Default::default)
}

/// `𝔣(k) = |X| · K*` on the level set of signature `k`; memoized on
/// `(L, n_w, n_c, k_2..k_{L+1})`.
pub fn f_of_signature(k: &ComponentSignature, params: &ModelParams) -> ExactScalar {
    let mut tail = k.tail().to_vec();
    while tail.last() == Some(&0) {
        tail.pop();
    }
    let key = (params.length(), params.n_words(), params.n_concepts(), tail);
    if let Some(v) = f_memo().read().expect("f memo poisoned").get(&key) {
        return v.clone();
    }
    let value = f_of_signature_uncached(k, params);
    f_memo()
        .write()
        .expect("f memo poisoned")
        .entry(key)
        .or_insert(value)
        .clone()
}

/// `|X| = n_w^L` as a big integer.
pub(crate) fn data_space_size(params: &ModelParams) -> BigInt {
    BigInt::from(params.n_words()).pow(params.length() as u32)
}

/// Exact `K*(x, y)`.
pub fn kstar(x: &Sentence, y: &Sentence, params: &ModelParams) -> Result<ExactScalar> {
    check_sentence(x, params)?;
    check_sentence(y, params)?;
    let g = zeta(x, y)?;
    let k = component_signature(&g, params.n_words(), params.length());
    Ok(f_of_signature(&k, params) / int(data_space_size(params)))
}

fn check_sentence(x: &Sentence, params: &ModelParams) -> Result<()> {
    if x.len() != params.length() {
        return Err(Error::LengthMismatch(x.len(), params.length()));
    }
    if x.words().iter().any(|&w| w == 0 || w as usize > params.n_words()) {
        return Err(Error::param("word id outside vocabulary"));
    }
    Ok(())
}

/// 64-bit finaliser used to derive pair perturbations.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_sentence(mut h: u64, x: &[Word]) -> u64 {
    for &w in x {
        h = mix64(h ^ u64::from(w).wrapping_add(0x9e37_79b9_7f4a_7c15));
    }
    h
}

/// 53-bit pseudorandom integer of the unordered pair `{x, y}` and `seed`.
pub fn pair_noise_bits(x: &[Word], y: &[Word], seed: u64) -> u64 {
    let (a, b) = if x <= y { (x, y) } else { (y, x) };
    let h = hash_sentence(mix64(seed ^ 0x5851_f42d_4c95_7f2d), a);
    let h = hash_sentence(mix64(h), b);
    h >> 11
}

/// `ε(x, y) ∈ [0, 1)`, symmetric in its arguments.
pub fn pair_epsilon(x: &Sentence, y: &Sentence, seed: u64) -> f64 {
    pair_noise_bits(x.words(), y.words(), seed) as f64 / (1u64 << 53) as f64
}

/// `K*(x, y) + ε(x, y) / (2 s_c^L |Φ|)` as a float.
///
/// At large `n_w` the perturbation falls below `f64` resolution relative to
/// `K*`; ranking code should use [`KernelLevels`] with [`pair_noise_bits`]
/// as an exact lexicographic key instead.
pub fn perturbed_kstar(x: &Sentence, y: &Sentence, params: &ModelParams, seed: u64) -> Result<f64> {
    let k = kstar(x, y, params)?;
    let grid = BigInt::from(params.concept_size()).pow(params.length() as u32)
        * count_equipartitions_int(params.n_words(), params.n_concepts())?;
    let step = 1.0 / grid.to_f64().unwrap_or(f64::INFINITY);
    Ok(k.to_f64().unwrap_or(0.0) + pair_epsilon(x, y, seed) * 0.5 * step)
}

/// `K**_α = log(1 + (n_w^L / α) v)`, strictly increasing in `v`.
pub fn rescale_log(v: f64, alpha: f64, params: &ModelParams) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::param(format!("alpha must be positive, got {alpha}")));
    }
    if v < 0.0 {
        return Err(Error::param(format!("kernel value must be >= 0, got {v}")));
    }
    let scale = (params.n_words() as f64).powi(params.length() as i32) / alpha;
    Ok((scale * v).ln_1p())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    /// Inner product with the products summed exactly and rounded once, so
    /// equal multisets of products always give the same value.
    pub fn dot(&self, other: &FeatureVector) -> f64 {
        exact_sum(self.0.iter().zip(&other.0).map(|(a, b)| a * b))
    }
}

/// Correctly rounded sum of finite floats (Shewchuk partials with the
/// half-even fix-up of `math.fsum`).
pub fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let Some(mut n) = partials.len().checked_sub(1) else {
        return 0.0;
    };
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

/// `[e_{x_1}, ..., e_{x_L}]`, optionally standardised entrywise with
/// `p = 1/n_w`.
pub fn onehot_features(x: &Sentence, params: &ModelParams, normalized: bool) -> FeatureVector {
    let n_w = params.n_words();
    let mut v = vec![0.0; x.len() * n_w];
    for (pos, &w) in x.words().iter().enumerate() {
        v[pos * n_w + (w as usize - 1)] = 1.0;
    }
    if normalized {
        let p = 1.0 / n_w as f64;
        let scale = 1.0 / (p * (1.0 - p)).sqrt();
        for e in &mut v {
            *e = (*e - p) * scale;
        }
    }
    FeatureVector(v)
}

/// `[e_{φ(x_1)}, ..., e_{φ(x_L)}]`.
pub fn concept_features(x: &Sentence, phi: &Equipartition) -> FeatureVector {
    let n_c = phi.n_concepts();
    let mut v = vec![0.0; x.len() * n_c];
    for (pos, &w) in x.words().iter().enumerate() {
        v[pos * n_c + (phi.concept_of(w) as usize - 1)] = 1.0;
    }
    FeatureVector(v)
}

/// Precomputed ranking of every level set of `K*` for one parameter set.
///
/// `level(x, y)` returns an integer that orders pairs exactly as `K*` does
/// (equal values share a level), which is what nearest-neighbour decisions
/// need. The table covers every signature with `γ(k) ≤ L`.
pub struct KernelLevels {
    length: usize,
    radix: u128,
    levels: HashMap<u128, u32>,
    values: Vec<f64>,
}

impl KernelLevels {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let length = params.length();
        let radix = length as u128 + 1;
        if (length as f64 + 1.0).log2() * length as f64 > 127.0 {
            return Err(Error::param(format!("L = {length} too large for level keys")));
        }
        let sigs = enumerate_signatures(length, params.n_words(), 0)?;
        let exact: Vec<(u128, ExactScalar)> = sigs
            .iter()
            .map(|k| (tail_key(k.tail(), radix), f_of_signature(k, params)))
            .collect();
        let mut distinct: Vec<&ExactScalar> = exact.iter().map(|(_, v)| v).collect();
        distinct.sort();
        distinct.dedup();
        let n_x = int(data_space_size(params));
        let values = distinct
            .iter()
            .map(|v| (*v / &n_x).to_f64().unwrap_or(0.0))
            .collect();
        let levels = exact
            .iter()
            .map(|(key, v)| (*key, distinct.binary_search(&v).unwrap() as u32))
            .collect();
        Ok(KernelLevels {
            length,
            radix,
            levels,
            values,
        })
    }

    /// Rank of `K*(x, y)` among all attainable values (0 = smallest).
    pub fn level(&self, x: &[Word], y: &[Word]) -> u32 {
        debug_assert_eq!(x.len(), self.length);
        let mut edges: [(Word, Word); 32] = [(0, 0); 32];
        let mut n = 0;
        if x.len() > 32 {
            let g = zeta(&Sentence(x.to_vec()), &Sentence(y.to_vec())).unwrap();
            return self.level_of_sizes(&touched_component_sizes(g.edges()));
        }
        for (&a, &b) in x.iter().zip(y) {
            if a != b {
                edges[n] = (a.min(b), a.max(b));
                n += 1;
            }
        }
        if n == 0 {
            return self.levels[&0];
        }
        self.level_of_sizes(&touched_component_sizes(&edges[..n]))
    }

    fn level_of_sizes(&self, sizes: &[usize]) -> u32 {
        let mut key = 0u128;
        for &s in sizes {
            key += self.radix.pow(s as u32 - 2);
        }
        self.levels[&key]
    }

    /// `K*` value (as `f64`) of a level.
    pub fn value(&self, level: u32) -> f64 {
        self.values[level as usize]
    }

    pub fn n_levels(&self) -> usize {
        self.values.len()
    }
}

fn tail_key(tail: &[usize], radix: u128) -> u128 {
    tail.iter()
        .enumerate()
        .map(|(i, &k)| k as u128 * radix.pow(i as u32))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::stream_rng;
    use num_traits::One;
    use rand::Rng;

    fn s(w: &[Word]) -> Sentence {
        Sentence(w.to_vec())
    }

    fn q(n: i64, d: i64) -> ExactScalar {
        ExactScalar::new(n.into(), d.into())
    }

    fn tiny() -> ModelParams {
        ModelParams::new(2, 4, 2, 2, 2, 1).unwrap()
    }

    #[test]
    fn zeta_published_examples() {
        let g = zeta(&s(&[2, 2, 8, 5, 9, 7]), &s(&[2, 5, 8, 2, 2, 1])).unwrap();
        assert_eq!(g.edges(), &[(1, 7), (2, 5), (2, 9)]);
        assert_eq!(g.silent_count(), 2);
        let g = zeta(&s(&[1, 1, 1, 5, 6, 7]), &s(&[2, 3, 4, 6, 7, 1])).unwrap();
        assert_eq!(g.edges().len(), 6);
        let g = zeta(&s(&[3, 1, 4]), &s(&[3, 1, 4])).unwrap();
        assert!(g.edges().is_empty());
        assert_eq!(g.silent_count(), 3);
        assert!(matches!(
            zeta(&s(&[1, 2]), &s(&[1])),
            Err(Error::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn signature_of_published_graph() {
        let g = zeta(&s(&[2, 2, 8, 5, 9, 7]), &s(&[2, 5, 8, 2, 2, 1])).unwrap();
        let k = component_signature(&g, 10, 6);
        assert_eq!(k.counts(), &[5, 1, 1, 0, 0, 0, 0]);
        let k = component_signature(&PairGraph::from_edges([]).unwrap(), 10, 3);
        assert_eq!(k.counts(), &[10, 0, 0, 0]);
    }

    #[test]
    fn cut_free_counts() {
        let empty = PairGraph::from_edges([]).unwrap();
        assert_eq!(count_cut_free(&empty, 4, 2).unwrap(), q(6, 1));
        let one = PairGraph::from_edges([(1, 2)]).unwrap();
        assert_eq!(count_cut_free(&one, 4, 2).unwrap(), q(2, 1));
        let path = PairGraph::from_edges([(1, 2), (2, 3)]).unwrap();
        assert_eq!(count_cut_free(&path, 4, 2).unwrap(), q(0, 1));
        assert!(PairGraph::from_edges([(3, 3)]).is_err());
    }

    #[test]
    fn f_examples() {
        let p = tiny();
        let f = |c: &[usize]| f_of_signature(&ComponentSignature::new(c.to_vec()), &p);
        assert_eq!(f(&[4, 0, 0]), q(4, 1));
        assert_eq!(f(&[2, 1, 0]), q(4, 3));
        assert_eq!(f(&[1, 0, 1]), q(0, 1));
    }

    #[test]
    fn memo_agrees_with_recomputation() {
        let p = ModelParams::new(4, 12, 3, 2, 2, 1).unwrap();
        for k in enumerate_signatures(4, 12, 0).unwrap() {
            assert_eq!(f_of_signature(&k, &p), f_of_signature_uncached(&k, &p));
            assert_eq!(f_of_signature(&k, &p), f_of_signature_uncached(&k, &p));
        }
    }

    #[test]
    fn kstar_examples() {
        let p = tiny();
        assert_eq!(kstar(&s(&[1, 2]), &s(&[1, 2]), &p).unwrap(), q(1, 4));
        assert_eq!(kstar(&s(&[1, 2]), &s(&[1, 3]), &p).unwrap(), q(1, 12));
        assert_eq!(kstar(&s(&[1, 2]), &s(&[2, 3]), &p).unwrap(), q(0, 1));
        assert!(kstar(&s(&[1, 5]), &s(&[1, 2]), &p).is_err());
    }

    #[test]
    fn kstar_rows_sum_to_one_tiny() {
        let p = ModelParams::new(2, 6, 3, 1, 1, 1).unwrap();
        let all: Vec<Sentence> = (1..=6)
            .flat_map(|a| (1..=6).map(move |b| s(&[a, b])))
            .collect();
        for x in &all {
            let total: ExactScalar = all.iter().map(|y| kstar(x, y, &p).unwrap()).sum();
            assert!(total.is_one());
        }
    }

    #[test]
    fn kstar_symmetric_at_scale() {
        let p = ModelParams::headline();
        let mut rng = stream_rng(1, 0);
        for _ in 0..50 {
            let x = s(&(0..9).map(|_| rng.random_range(1..=30)).collect::<Vec<_>>());
            let y = s(&(0..9).map(|_| rng.random_range(1..=30)).collect::<Vec<_>>());
            assert_eq!(kstar(&x, &y, &p).unwrap(), kstar(&y, &x, &p).unwrap());
        }
    }

    #[test]
    fn levels_order_like_exact_kernel() {
        let p = ModelParams::new(4, 12, 3, 1, 1, 1).unwrap();
        let levels = KernelLevels::new(&p).unwrap();
        let mut rng = stream_rng(4, 0);
        let draw = |rng: &mut crate::datamodel::LabRng| {
            s(&(0..4).map(|_| rng.random_range(1..=12)).collect::<Vec<_>>())
        };
        for _ in 0..300 {
            let (x, y, z) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
            let (a, b) = (kstar(&x, &y, &p).unwrap(), kstar(&x, &z, &p).unwrap());
            let (la, lb) = (levels.level(x.words(), y.words()), levels.level(x.words(), z.words()));
            assert_eq!(a.cmp(&b), la.cmp(&lb));
            assert!((levels.value(la) - a.to_f64().unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn perturbation_preserves_strict_order_and_symmetry() {
        let p = tiny();
        let x = s(&[1, 2]);
        let all: Vec<Sentence> = (1..=4)
            .flat_map(|a| (1..=4).map(move |b| s(&[a, b])))
            .collect();
        for y in &all {
            assert_eq!(
                perturbed_kstar(&x, y, &p, 3).unwrap(),
                perturbed_kstar(y, &x, &p, 3).unwrap()
            );
            for z in &all {
                if kstar(&x, y, &p).unwrap() > kstar(&x, z, &p).unwrap() {
                    assert!(perturbed_kstar(&x, y, &p, 3).unwrap() > perturbed_kstar(&x, z, &p, 3).unwrap());
                }
            }
        }
    }

    #[test]
    fn pair_noise_has_no_collisions_in_a_large_row() {
        let mut rng = stream_rng(77, 0);
        let x: Vec<Word> = (0..9).map(|_| rng.random_range(1..=150)).collect();
        let mut seen: Vec<u64> = (0..1_000_000)
            .map(|_| {
                let y: Vec<Word> = (0..9).map(|_| rng.random_range(1..=150)).collect();
                pair_noise_bits(&x, &y, 5)
            })
            .collect();
        seen.sort_unstable();
        let before = seen.len();
        seen.dedup();
        assert_eq!(seen.len(), before);
    }

    #[test]
    fn rescale_log_basics() {
        let p = tiny();
        assert_eq!(rescale_log(0.0, 2.0, &p).unwrap(), 0.0);
        assert!(rescale_log(0.1, 2.0, &p).unwrap() < rescale_log(0.2, 2.0, &p).unwrap());
        assert!(rescale_log(0.1, 0.0, &p).is_err());
        assert!(rescale_log(-0.1, 1.0, &p).is_err());
    }

    #[test]
    fn onehot_inner_products_count_matches() {
        let p = ModelParams::new(5, 7, 7, 1, 1, 1).unwrap();
        let x = s(&[1, 2, 3, 4, 5]);
        let y = s(&[1, 3, 3, 7, 5]);
        let fx = onehot_features(&x, &p, false);
        assert_eq!(fx.len(), 35);
        assert_eq!(fx.dot(&onehot_features(&y, &p, false)), 3.0);
        assert_eq!(fx.dot(&fx), 5.0);
    }

    #[test]
    fn concept_features_collapse_concepts() {
        let phi = Equipartition::from_assignment(vec![1, 1, 2, 2], 2).unwrap();
        let a = concept_features(&s(&[1, 3, 4]), &phi);
        let b = concept_features(&s(&[2, 4, 3]), &phi);
        let c = concept_features(&s(&[2, 1, 3]), &phi);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.dot(&a), 3.0);
    }

    #[test]
    fn exact_sum_cases() {
        assert_eq!(exact_sum([]), 0.0);
        assert_eq!(exact_sum([1e100, 1.0, -1e100]), 1.0);
        assert_eq!(exact_sum([0.1; 10]), 1.0);
        assert_eq!(exact_sum([1.0, 1e-16, 1e-16]), 1.0 + 2e-16);
    }

    proptest::proptest! {
        #[test]
        fn exact_sum_is_order_free(
            v in proptest::collection::vec(-1e6f64..1e6, 0..60),
            rot in 0usize..60,
        ) {
            let mut w = v.clone();
            if !w.is_empty() {
                let r = rot % w.len();
                w.rotate_left(r);
            }
            w.reverse();
            proptest::prop_assert_eq!(exact_sum(v.iter().copied()), exact_sum(w));
            let exact: ExactScalar = v
                .iter()
                .map(|&x| ExactScalar::from_float(x).unwrap())
                .fold(ExactScalar::zero(), |a, b| a + b);
            proptest::prop_assert_eq!(exact_sum(v.iter().copied()), exact.to_f64().unwrap());
        }
    }
}
