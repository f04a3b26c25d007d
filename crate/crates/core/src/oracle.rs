//! Brute-force checks on universes small enough to enumerate: every
//! sentence, every equipartition, every sentence pair.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{forest_count, g_of_signature, preimage_count};
use crate::combinatorics::{count_equipartitions_int, ComponentSignature, ExactScalar};
use crate::datamodel::{sample_sdm, stream_rng, Concept, Equipartition, ModelParams, Sentence, Word};
use crate::error::{Error, Result};
use crate::graphkernel::{component_signature, pair_noise_bits, zeta};
use crate::moment::permuted_moment_exact;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniverseCaps {
    pub max_sentences: u128,
    pub max_equipartitions: u128,
}

impl Default for UniverseCaps {
    fn default() -> Self {
        UniverseCaps {
            max_sentences: 4096,
            max_equipartitions: 10_000,
        }
    }
}

/// `X = V^L` and `Φ`, enumerated.
#[derive(Clone, Debug)]
pub struct TinyUniverse {
    params: ModelParams,
    /// Lexicographic order; index `i` has base-`n_w` digits `x_ℓ − 1`.
    sentences: Vec<Sentence>,
    phis: Vec<Equipartition>,
    /// `agree[i][j] = |{φ : φ̊(x_i) = φ̊(x_j)}|`.
    agree: Vec<Vec<u32>>,
}

impl TinyUniverse {
    pub fn new(length: usize, n_words: usize, n_concepts: usize) -> Result<Self> {
        Self::with_caps(length, n_words, n_concepts, UniverseCaps::default())
    }

    pub fn with_caps(length: usize, n_words: usize, n_concepts: usize, caps: UniverseCaps) -> Result<Self> {
        let params = ModelParams::new(length, n_words, n_concepts, 1, 1, 1)?;
        let size = (n_words as u128)
            .checked_pow(length as u32)
            .unwrap_or(u128::MAX);
        if size > caps.max_sentences {
            return Err(Error::UniverseTooLarge {
                what: "n_w^L",
                size,
                cap: caps.max_sentences,
            });
        }
        let n_phi = count_equipartitions_int(n_words, n_concepts)?
            .to_u128()
            .unwrap_or(u128::MAX);
        if n_phi > caps.max_equipartitions {
            return Err(Error::UniverseTooLarge {
                what: "|Phi|",
                size: n_phi,
                cap: caps.max_equipartitions,
            });
        }
        let sentences: Vec<Sentence> = (0..size as usize)
            .map(|i| sentence_at(i, length, n_words))
            .collect();
        let phis = all_equipartitions(n_words, n_concepts)?;
        debug_assert_eq!(phis.len() as u128, n_phi);
        let codes: Vec<Vec<u64>> = phis
            .iter()
            .map(|phi| {
                sentences
                    .iter()
                    .map(|x| sequence_code(phi, x, n_concepts))
                    .collect()
            })
            .collect();
        let agree = (0..sentences.len())
            .into_par_iter()
            .map(|i| {
                (0..sentences.len())
                    .map(|j| codes.iter().filter(|c| c[i] == c[j]).count() as u32)
                    .collect()
            })
            .collect();
        Ok(TinyUniverse {
            params,
            sentences,
            phis,
            agree,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn equipartitions(&self) -> &[Equipartition] {
        &self.phis
    }

    /// Position of `x` in the lexicographic enumeration.
    pub fn index_of(&self, x: &Sentence) -> Result<usize> {
        let n_w = self.params.n_words();
        if x.len() != self.params.length() {
            return Err(Error::LengthMismatch(x.len(), self.params.length()));
        }
        let mut idx = 0usize;
        for &w in x.words() {
            if w == 0 || w as usize > n_w {
                return Err(Error::param(format!("word {w} outside vocabulary")));
            }
            idx = idx * n_w + (w as usize - 1);
        }
        Ok(idx)
    }

    /// `n_c^L / (n_w^L |Φ|)`: the weight of one agreeing equipartition.
    fn unit(&self) -> ExactScalar {
        let p = &self.params;
        let nc_l = BigInt::from(p.n_concepts()).pow(p.length() as u32);
        let size = BigInt::from(self.sentences.len()) * BigInt::from(self.phis.len());
        ExactScalar::new(nc_l, size)
    }

    /// Exact row `K*(x_i, ·)`.
    pub fn kernel_row(&self, i: usize) -> Vec<ExactScalar> {
        let unit = self.unit();
        self.agree[i]
            .iter()
            .map(|&c| &unit * ExactScalar::from_integer(BigInt::from(c)))
            .collect()
    }
}

fn sentence_at(mut i: usize, length: usize, n_words: usize) -> Sentence {
    let mut words = vec![0 as Word; length];
    for pos in (0..length).rev() {
        words[pos] = (i % n_words) as Word + 1;
        i /= n_words;
    }
    Sentence(words)
}

fn sequence_code(phi: &Equipartition, x: &Sentence, n_concepts: usize) -> u64 {
    x.words()
        .iter()
        .fold(0u64, |acc, &w| acc * n_concepts as u64 + u64::from(phi.concept_of(w) - 1))
}

/// Every equipartition, as the distinct permutations of `1^{s_c} 2^{s_c} …`
/// in lexicographic order.
fn all_equipartitions(n_words: usize, n_concepts: usize) -> Result<Vec<Equipartition>> {
    let s_c = n_words / n_concepts;
    let mut a: Vec<Concept> = (1..=n_concepts as Concept)
        .flat_map(|c| std::iter::repeat_n(c, s_c))
        .collect();
    let mut out = Vec::new();
    loop {
        out.push(Equipartition::from_assignment(a.clone(), n_concepts)?);
        if !next_permutation(&mut a) {
            return Ok(out);
        }
    }
}

fn next_permutation<T: Ord>(a: &mut [T]) -> bool {
    let Some(i) = (1..a.len()).rev().find(|&i| a[i - 1] < a[i]) else {
        return false;
    };
    let j = (i..a.len()).rev().find(|&j| a[j] > a[i - 1]).unwrap();
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// `K*(x, y)` by counting agreeing equipartitions directly.
pub fn kstar_direct(x: &Sentence, y: &Sentence, universe: &TinyUniverse) -> Result<ExactScalar> {
    let i = universe.index_of(x)?;
    let j = universe.index_of(y)?;
    Ok(universe.unit() * ExactScalar::from_integer(BigInt::from(universe.agree[i][j])))
}

#[derive(Clone, Debug)]
pub struct AvgMoment {
    pub exact: ExactScalar,
    pub value: f64,
}

/// `(1/|X|) Σ_x H_t(K*(x, ·))`.
pub fn exact_avg_moment(universe: &TinyUniverse, t: u32) -> Result<AvgMoment> {
    let n = universe.sentences.len();
    let moments = (0..n)
        .into_par_iter()
        .map(|i| permuted_moment_exact(&universe.kernel_row(i), t))
        .collect::<Result<Vec<_>>>()?;
    let total: ExactScalar = moments.into_iter().fold(ExactScalar::zero(), |a, b| a + b);
    let exact = total / ExactScalar::from_integer(BigInt::from(n));
    Ok(AvgMoment {
        value: exact.to_f64().unwrap_or(f64::NAN),
        exact,
    })
}

/// The similarity scored in [`verify_beautiful`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MonteCarloKernel {
    /// `K*` plus a pair perturbation smaller than half a level step.
    PerturbedOptimal,
    /// A pseudorandom symmetric kernel with no relation to `K*`.
    RandomSymmetric,
}

#[derive(Clone, Debug, Serialize)]
pub struct BeautifulReport {
    pub kernel: MonteCarloKernel,
    pub t: u32,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub exact: String,
    pub exact_value: f64,
    pub std_error: f64,
    pub z: f64,
    pub passed: bool,
}

const MC_CHUNK: u64 = 10_000;

/// Estimates, under the simplified sampling process with `t` distractors,
/// the probability that the test point is strictly closer to its own
/// sequence's point than to every distractor, and compares it with the
/// exact averaged moment. For the perturbed optimal kernel the two agree
/// (`|z| ≤ 4`); any other symmetric kernel can only do worse (`z ≤ 4`).
pub fn verify_beautiful(
    universe: &TinyUniverse,
    t: u32,
    mc_trials: u64,
    seed: u64,
    kernel: MonteCarloKernel,
) -> Result<BeautifulReport> {
    if t == 0 || mc_trials == 0 {
        return Err(Error::param("verify_beautiful needs t >= 1 and at least one trial"));
    }
    let exact = exact_avg_moment(universe, t)?;
    let score = |a: usize, b: usize| -> (u32, u64) {
        let (xa, xb) = (universe.sentences[a].words(), universe.sentences[b].words());
        match kernel {
            MonteCarloKernel::PerturbedOptimal => {
                (universe.agree[a][b], pair_noise_bits(xa, xb, seed))
            }
            MonteCarloKernel::RandomSymmetric => (0, pair_noise_bits(xa, xb, !seed)),
        }
    };
    let params = universe.params;
    let chunks = mc_trials.div_ceil(MC_CHUNK);
    let successes: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<u64> {
            let mut rng = stream_rng(seed, c);
            let n = MC_CHUNK.min(mc_trials - c * MC_CHUNK);
            let mut wins = 0;
            for _ in 0..n {
                let inst = sample_sdm(&params, t as usize, &mut rng)?;
                let test = universe.index_of(&inst.test)?;
                let own = score(test, universe.index_of(&inst.points[0])?);
                let mut beats_all = true;
                for p in &inst.points[1..] {
                    if score(test, universe.index_of(p)?) >= own {
                        beats_all = false;
                        break;
                    }
                }
                wins += u64::from(beats_all);
            }
            Ok(wins)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let estimate = successes as f64 / mc_trials as f64;
    let p = exact.value;
    let std_error = (p * (1.0 - p) / mc_trials as f64).sqrt();
    let z = if std_error > 0.0 {
        (estimate - p) / std_error
    } else if estimate == p {
        0.0
    } else {
        f64::INFINITY.copysign(estimate - p)
    };
    let passed = match kernel {
        MonteCarloKernel::PerturbedOptimal => z.abs() <= 4.0,
        MonteCarloKernel::RandomSymmetric => z <= 4.0,
    };
    Ok(BeautifulReport {
        kernel,
        t,
        trials: mc_trials,
        successes,
        estimate,
        exact: exact.exact.to_string(),
        exact_value: p,
        std_error,
        z,
        passed,
    })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct StructureReport {
    pub pairs: usize,
    pub graphs_checked: usize,
    pub signatures_checked: usize,
    pub mismatches: Vec<String>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.graphs_checked > 0
    }
}

/// Groups every sentence pair by its graph and by its signature, and checks
/// the preimage count of every realized graph, the forest count of every
/// signature with at most `L` edges, and `|Ω_k|/|Ω| ≥ 𝔤(k)`.
pub fn verify_structure_counts(universe: &TinyUniverse) -> Result<StructureReport> {
    let p = universe.params;
    if p.n_words() > 6 || p.length() > 3 {
        return Err(Error::param("structure counts need n_w <= 6 and L <= 3"));
    }
    let (length, n_w) = (p.length(), p.n_words());
    let mut by_graph: HashMap<Vec<(Word, Word)>, u64> = HashMap::new();
    let mut by_signature: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    let xs = &universe.sentences;
    for x in xs {
        for y in xs {
            let g = zeta(x, y)?;
            let k = component_signature(&g, n_w, length);
            *by_signature.entry(k.counts().to_vec()).or_default() += 1;
            *by_graph.entry(g.edges().to_vec()).or_default() += 1;
        }
    }
    let mut report = StructureReport {
        pairs: xs.len() * xs.len(),
        ..Default::default()
    };
    let mut forests: HashMap<Vec<usize>, u64> = HashMap::new();
    for (edges, &count) in &by_graph {
        let expected = preimage_count(edges.len(), length, n_w);
        if BigInt::from(count) != expected {
            report
                .mismatches
                .push(format!("graph {edges:?}: {count} preimages, formula {expected}"));
        }
        let g = crate::graphkernel::PairGraph::from_edges(edges.iter().copied())?;
        let k = component_signature(&g, n_w, length);
        if edges.len() == k.gamma() {
            *forests.entry(k.counts().to_vec()).or_default() += 1;
        }
        report.graphs_checked += 1;
    }
    let total = ExactScalar::from_integer(BigInt::from(report.pairs));
    for (counts, &omega) in &by_signature {
        let k = ComponentSignature::new(counts.clone());
        if k.gamma() > length {
            continue;
        }
        let found = forests.get(counts).copied().unwrap_or(0);
        let expected = forest_count(&k);
        if BigInt::from(found) != expected {
            report
                .mismatches
                .push(format!("signature {k}: {found} forests, formula {expected}"));
        }
        let mass = ExactScalar::from_integer(BigInt::from(omega)) / &total;
        let g = g_of_signature(&k, length, n_w)?;
        if mass < g {
            report
                .mismatches
                .push(format!("signature {k}: mass {mass} below g = {g}"));
        }
        report.signatures_checked += 1;
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginalReport {
    pub trials: u64,
    pub cells: usize,
    pub max_abs_z: f64,
    pub passed: bool,
}

/// Checks that a sentence and a fresh sentence of the same concept sequence
/// (same random equipartition) are jointly distributed as `K*(x, y)/|X|`.
pub fn verify_kernel_marginal(universe: &TinyUniverse, mc_trials: u64, seed: u64) -> Result<MarginalReport> {
    let n = universe.sentences.len();
    let mut counts = vec![0u64; n * n];
    let mut rng = stream_rng(seed, 0);
    for _ in 0..mc_trials {
        let inst = sample_sdm(&universe.params, 1, &mut rng)?;
        let a = universe.index_of(&inst.points[0])?;
        let b = universe.index_of(&inst.test)?;
        counts[a * n + b] += 1;
    }
    let mut max_abs_z: f64 = 0.0;
    for a in 0..n {
        let row = universe.kernel_row(a);
        for b in 0..n {
            let prob = row[b].to_f64().unwrap_or(0.0) / n as f64;
            let observed = counts[a * n + b] as f64;
            let mean = prob * mc_trials as f64;
            let sd = (mean * (1.0 - prob)).sqrt();
            let z = if sd > 0.0 {
                (observed - mean) / sd
            } else if observed == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            max_abs_z = max_abs_z.max(z.abs());
        }
    }
    // a Bonferroni-style threshold across all cells
    let threshold = 4.0 + (n as f64).ln().sqrt();
    Ok(MarginalReport {
        trials: mc_trials,
        cells: n * n,
        max_abs_z,
        passed: max_abs_z <= threshold,
    })
}

/// Values pinned for a universe: averaged moments at several `t`.
pub fn golden_values(universe: &TinyUniverse, ts: &[u32]) -> Result<Vec<(String, ExactScalar)>> {
    ts.iter()
        .map(|&t| Ok((format!("avg_moment_t{t}"), exact_avg_moment(universe, t)?.exact)))
        .collect()
}

/// `name = exact-rational` lines under `#` header lines.
pub fn format_golden(header: &[String], entries: &[(String, ExactScalar)]) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    for (name, value) in entries {
        let _ = writeln!(out, "{name} = {value}");
    }
    out
}

pub fn parse_golden(text: &str) -> Result<Vec<(String, ExactScalar)>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: missing '='", no + 1)))?;
        let value: ExactScalar = value
            .trim()
            .parse()
            .map_err(|e| Error::Format(format!("line {}: {e}", no + 1)))?;
        out.push((name.trim().to_string(), value));
    }
    Ok(out)
}

/// Header lines recording how a universe's golden values were produced.
pub fn golden_header(universe: &TinyUniverse) -> Vec<String> {
    let p = universe.params;
    vec![
        "exact values pinned by the brute-force oracle".to_string(),
        format!("L = {}, n_w = {}, n_c = {}", p.length(), p.n_words(), p.n_concepts()),
    ]
}
