//! Nearest-neighbour classification and the Monte Carlo harness that
//! estimates success on unfamiliar test sentences.
//!
//! A test counts as a success only when every training point attaining the
//! maximal similarity carries the test's category.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datamodel::{
    sample_task, sample_test_set, sample_training_set, stream_rng, ModelParams, Sentence, Task,
    TestPoint, TrainingSet, Word,
};
use crate::error::{Error, Result};
use crate::graphkernel::{pair_noise_bits, KernelLevels};
use crate::neuralnet::{
    config_for, evaluate_accuracy, extract_feature_matrix, train_network, Network, NetworkConfig,
    Real, TrainingLog,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    /// Inner product of concatenated one-hot words (= positional matches).
    OneHot,
    /// One-hot entries standardised with `p = 1/n_w`.
    OneHotNormalized,
    /// One-hot with ties broken by a pair-hash perturbation.
    OneHotPerturbed,
    /// `K*` with strict tie semantics.
    Optimal,
    /// `K*` plus a pair-hash perturbation below the level spacing.
    OptimalPerturbed,
    /// Concept one-hot features from the task's own equipartition.
    Concept,
    /// Features of a network trained on each trial's training set.
    Learned,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 7] = [
        FeatureKind::OneHot,
        FeatureKind::OneHotNormalized,
        FeatureKind::OneHotPerturbed,
        FeatureKind::Optimal,
        FeatureKind::OptimalPerturbed,
        FeatureKind::Concept,
        FeatureKind::Learned,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::OneHot => "one-hot",
            FeatureKind::OneHotNormalized => "one-hot-normalized",
            FeatureKind::OneHotPerturbed => "one-hot-perturbed",
            FeatureKind::Optimal => "optimal",
            FeatureKind::OptimalPerturbed => "optimal-perturbed",
            FeatureKind::Concept => "concept",
            FeatureKind::Learned => "learned",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = FeatureKind::ALL.iter().map(|k| k.name()).collect();
                Error::param(format!("unknown feature kind {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Which similarity a run uses. `Learned` trains a fresh network per trial
/// with `network` (defaults derived from the model), unless a trained `net`
/// is supplied for [`evaluate_task`].
#[derive(Clone, Debug)]
pub struct SimilaritySpec {
    pub kind: FeatureKind,
    /// Seed of the pair perturbation.
    pub seed: u64,
    pub network: Option<NetworkConfig>,
    pub net: Option<Arc<Network>>,
}

impl SimilaritySpec {
    pub fn new(kind: FeatureKind) -> Self {
        SimilaritySpec {
            kind,
            seed: 0,
            network: None,
            net: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
}

impl Outcome {
    pub fn is_success(self) -> bool {
        self == Outcome::Success
    }
}

/// Nearest-neighbour decision from precomputed scores: success iff every
/// maximiser has label `category`.
pub fn nn_decide<K: PartialOrd>(
    category: usize,
    labels: impl IntoIterator<Item = usize>,
    scores: impl IntoIterator<Item = K>,
) -> Outcome {
    let mut best: Option<K> = None;
    let mut all_correct = true;
    for (label, score) in labels.into_iter().zip(scores) {
        match &best {
            Some(b) if score < *b => {}
            Some(b) if score == *b => all_correct &= label == category,
            _ => {
                best = Some(score);
                all_correct = label == category;
            }
        }
    }
    if best.is_some() && all_correct {
        Outcome::Success
    } else {
        Outcome::Failure
    }
}

/// Classifies `test` against every training row with `sim`.
pub fn nn_classify(
    test: &TestPoint,
    train: &TrainingSet,
    sim: impl Fn(&Sentence, &Sentence) -> f64,
) -> Outcome {
    nn_decide(
        test.category,
        train.rows.iter().map(|r| r.category),
        train.rows.iter().map(|r| sim(&test.sentence, &r.sentence)),
    )
}

fn matches(x: &[Word], y: &[Word]) -> u32 {
    x.iter().zip(y).filter(|(a, b)| a == b).count() as u32
}

/// `⟨ψ(x), ψ(y)⟩` for the standardised one-hot map, from the match count.
pub fn normalized_onehot_similarity(matches: u32, length: usize, n_words: usize) -> f64 {
    let p = 1.0 / n_words as f64;
    let l = length as f64;
    (matches as f64 - 2.0 * l * p + l * n_words as f64 * p * p) / (p * (1.0 - p))
}

/// Decides one test under a fixed (non-learned) similarity.
fn decide_fixed(
    kind: FeatureKind,
    seed: u64,
    params: &ModelParams,
    levels: Option<&KernelLevels>,
    task: &Task,
    train: &TrainingSet,
    test: &TestPoint,
) -> Outcome {
    let x = test.sentence.words();
    let labels = train.rows.iter().map(|r| r.category);
    let ys = train.rows.iter().map(|r| r.sentence.words());
    match kind {
        FeatureKind::OneHot => nn_decide(test.category, labels, ys.map(|y| matches(x, y))),
        FeatureKind::OneHotNormalized => nn_decide(
            test.category,
            labels,
            ys.map(|y| normalized_onehot_similarity(matches(x, y), params.length(), params.n_words())),
        ),
        FeatureKind::OneHotPerturbed => nn_decide(
            test.category,
            labels,
            ys.map(|y| (matches(x, y), pair_noise_bits(x, y, seed))),
        ),
        FeatureKind::Optimal => {
            let levels = levels.expect("kernel levels");
            nn_decide(test.category, labels, ys.map(|y| levels.level(x, y)))
        }
        FeatureKind::OptimalPerturbed => {
            let levels = levels.expect("kernel levels");
            nn_decide(
                test.category,
                labels,
                ys.map(|y| (levels.level(x, y), pair_noise_bits(x, y, seed))),
            )
        }
        FeatureKind::Concept => {
            let cx = task.phi.concepts_of(&test.sentence);
            nn_decide(
                test.category,
                labels,
                train.rows.iter().map(|r| {
                    let cy = task.phi.concepts_of(&r.sentence);
                    matches(&cx.0, &cy.0)
                }),
            )
        }
        FeatureKind::Learned => unreachable!("learned features go through feature matrices"),
    }
}

/// Nearest-neighbour success rate on inner products of learned features.
pub fn nn_success_on_features<F: Real>(net: &Network<F>, train: &TrainingSet, tests: &[TestPoint]) -> f64 {
    let outcomes = nn_outcomes_on_features(net, train, tests);
    outcomes.iter().filter(|o| o.is_success()).count() as f64 / tests.len().max(1) as f64
}

fn nn_outcomes_on_features<F: Real>(net: &Network<F>, train: &TrainingSet, tests: &[TestPoint]) -> Vec<Outcome> {
    let train_refs: Vec<&Sentence> = train.sentences().collect();
    let test_refs: Vec<&Sentence> = tests.iter().map(|t| &t.sentence).collect();
    let ftrain = extract_feature_matrix(net, &train_refs);
    let ftest = extract_feature_matrix(net, &test_refs);
    let sims: Array2<F> = ftest.dot(&ftrain.t());
    tests
        .iter()
        .zip(sims.outer_iter())
        .map(|(t, row)| nn_decide(t.category, train.rows.iter().map(|r| r.category), row.iter().copied()))
        .collect()
}

/// Per-test outcomes for one task under `sim`. `Learned` requires `sim.net`.
pub fn evaluate_task(
    params: &ModelParams,
    sim: &SimilaritySpec,
    task: &Task,
    train: &TrainingSet,
    tests: &[TestPoint],
) -> Result<Vec<Outcome>> {
    if train.is_empty() {
        return Err(Error::param("empty training set"));
    }
    if sim.kind == FeatureKind::Learned {
        let net = sim
            .net
            .as_ref()
            .ok_or_else(|| Error::param("learned similarity requires a trained network"))?;
        return Ok(nn_outcomes_on_features(net, train, tests));
    }
    let levels = match sim.kind {
        FeatureKind::Optimal | FeatureKind::OptimalPerturbed => Some(KernelLevels::new(params)?),
        _ => None,
    };
    Ok(evaluate_fixed(params, sim, levels.as_ref(), task, train, tests))
}

fn evaluate_fixed(
    params: &ModelParams,
    sim: &SimilaritySpec,
    levels: Option<&KernelLevels>,
    task: &Task,
    train: &TrainingSet,
    tests: &[TestPoint],
) -> Vec<Outcome> {
    tests
        .par_iter()
        .map(|t| decide_fixed(sim.kind, sim.seed, params, levels, task, train, t))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub trials: usize,
    pub tests_total: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub std_error: f64,
    pub per_trial: Vec<f64>,
}

impl ExperimentResult {
    pub fn from_counts(per_trial: &[(usize, usize)]) -> Self {
        let successes: usize = per_trial.iter().map(|c| c.0).sum();
        let tests_total: usize = per_trial.iter().map(|c| c.1).sum();
        let rates: Vec<f64> = per_trial
            .iter()
            .map(|&(s, n)| s as f64 / n.max(1) as f64)
            .collect();
        let trials = rates.len();
        let std_error = if trials > 1 {
            let mean = rates.iter().sum::<f64>() / trials as f64;
            let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
            (var / trials as f64).sqrt()
        } else {
            0.0
        };
        ExperimentResult {
            trials,
            tests_total,
            successes,
            success_rate: successes as f64 / tests_total.max(1) as f64,
            std_error,
            per_trial: rates,
        }
    }
}

/// Memory the sampled sentences of one trial would need, in bytes.
fn trial_footprint(params: &ModelParams, tests_per_category: usize) -> u128 {
    let sentences = params.n_categories() as u128
        * (params.n_samples() as u128 + tests_per_category as u128);
    sentences * (params.length() as u128 * std::mem::size_of::<Word>() as u128 + 64)
}

const TRIAL_MEMORY_CAP: u128 = 2 << 30;

/// The trial `trial` of an experiment seeded with `seed`: task, training set
/// and tests, all drawn from stream `trial`.
pub fn sample_trial(
    params: &ModelParams,
    tests_per_category: usize,
    seed: u64,
    trial: u64,
) -> (Task, TrainingSet, Vec<TestPoint>) {
    let mut rng = stream_rng(seed, trial);
    let task = sample_task(params, &mut rng);
    let train = sample_training_set(&task, params, &mut rng);
    let tests = sample_test_set(&task, tests_per_category, &mut rng);
    (task, train, tests)
}

/// Runs `trials` independent tasks and tallies nearest-neighbour successes
/// on `tests_per_category` unfamiliar sentences per category.
pub fn run_experiment(
    params: &ModelParams,
    sim: &SimilaritySpec,
    trials: usize,
    tests_per_category: usize,
    seed: u64,
) -> Result<ExperimentResult> {
    if trials == 0 || tests_per_category == 0 {
        return Err(Error::param("trials and tests_per_category must be positive"));
    }
    let footprint = trial_footprint(params, tests_per_category);
    if footprint > TRIAL_MEMORY_CAP {
        return Err(Error::Resource(format!(
            "one trial needs about {} MiB of sentences (cap {} MiB)",
            footprint >> 20,
            TRIAL_MEMORY_CAP >> 20
        )));
    }
    if sim.kind == FeatureKind::Learned {
        let runs = (0..trials as u64)
            .map(|t| run_learned_trial(params, sim.network, tests_per_category, seed, t))
            .collect::<Result<Vec<_>>>()?;
        let counts: Vec<(usize, usize)> = runs.iter().map(|r| (r.nn_successes, r.tests)).collect();
        return Ok(ExperimentResult::from_counts(&counts));
    }
    let levels = match sim.kind {
        FeatureKind::Optimal | FeatureKind::OptimalPerturbed => Some(KernelLevels::new(params)?),
        _ => None,
    };
    let counts: Vec<(usize, usize)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let (task, train, tests) = sample_trial(params, tests_per_category, seed, t);
            let outcomes = evaluate_fixed(params, sim, levels.as_ref(), &task, &train, &tests);
            (outcomes.iter().filter(|o| o.is_success()).count(), tests.len())
        })
        .collect();
    Ok(ExperimentResult::from_counts(&counts))
}

/// One trained-network trial.
#[derive(Clone, Debug, Serialize)]
pub struct LearnedTrial {
    pub trial: u64,
    pub tests: usize,
    /// Tests whose strict argmax logit is correct.
    pub net_accuracy: f64,
    /// Tests correctly classified by nearest neighbour on learned features.
    pub nn_successes: usize,
    pub nn_accuracy: f64,
    pub train_accuracy: f64,
    pub log: TrainingLog,
}

/// Trains a network on trial `trial`'s training set and scores it both
/// directly and as a feature map for nearest neighbour.
pub fn run_learned_trial(
    params: &ModelParams,
    cfg: Option<NetworkConfig>,
    tests_per_category: usize,
    seed: u64,
    trial: u64,
) -> Result<LearnedTrial> {
    let cfg = config_for(params, cfg)?;
    let (_, train, tests) = sample_trial(params, tests_per_category, seed, trial);
    let mut rng = stream_rng(seed ^ 0x6e65_7477_6f72_6b00, trial);
    let (net, log) = train_network::<f32, _>(&train, &cfg, &mut rng)?;
    let train_points: Vec<TestPoint> = train
        .rows
        .iter()
        .map(|r| TestPoint {
            category: r.category,
            sentence: r.sentence.clone(),
        })
        .collect();
    let outcomes = nn_outcomes_on_features(&net, &train, &tests);
    let nn_successes = outcomes.iter().filter(|o| o.is_success()).count();
    Ok(LearnedTrial {
        trial,
        tests: tests.len(),
        net_accuracy: evaluate_accuracy(&net, &tests),
        nn_successes,
        nn_accuracy: nn_successes as f64 / tests.len() as f64,
        train_accuracy: evaluate_accuracy(&net, &train_points),
        log,
    })
}
