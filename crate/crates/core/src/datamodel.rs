//! Vocabulary/concept universe and the sampling processes that generate
//! tasks, training sets and test sentences.
//!
//! Word and concept ids are 1-based (`1..=n_w`, `1..=n_c`).

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Word = u32;
pub type Concept = u32;

/// The generator used for every random draw in the crate.
pub type LabRng = ChaCha8Rng;

/// Independent stream `stream` derived from `master`. Trial `i` of an
/// experiment always uses stream `i`, so parallel and serial runs agree.
pub fn stream_rng(master: u64, stream: u64) -> LabRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// `(L, n_w, n_c, R, n_spl, n*)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    length: usize,
    n_words: usize,
    n_concepts: usize,
    n_categories: usize,
    n_samples: usize,
    n_star: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(rename = "L")]
    length: usize,
    n_w: usize,
    n_c: usize,
    #[serde(rename = "R")]
    n_categories: usize,
    n_spl: usize,
    #[serde(default = "one")]
    n_star: usize,
}

fn one() -> usize {
    1
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        ModelParams::new(r.length, r.n_w, r.n_c, r.n_categories, r.n_spl, r.n_star)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            length: p.length,
            n_w: p.n_words,
            n_c: p.n_concepts,
            n_categories: p.n_categories,
            n_spl: p.n_samples,
            n_star: p.n_star,
        }
    }
}

impl ModelParams {
    /// Validates and builds a parameter set.
    pub fn new(
        length: usize,
        n_words: usize,
        n_concepts: usize,
        n_categories: usize,
        n_samples: usize,
        n_star: usize,
    ) -> Result<Self> {
        let named = [
            ("L", length),
            ("n_w", n_words),
            ("n_c", n_concepts),
            ("R", n_categories),
            ("n_spl", n_samples),
            ("n_star", n_star),
        ];
        for (name, value) in named {
            if value == 0 {
                return Err(Error::param(format!("{name} must be positive")));
            }
        }
        if n_words % n_concepts != 0 {
            return Err(Error::param(format!(
                "n_c = {n_concepts} does not divide n_w = {n_words}"
            )));
        }
        if n_star > n_samples {
            return Err(Error::param(format!(
                "n_star = {n_star} exceeds n_spl = {n_samples}"
            )));
        }
        if n_words > Word::MAX as usize || n_concepts > Concept::MAX as usize {
            return Err(Error::param("vocabulary too large for word ids"));
        }
        Ok(ModelParams {
            length,
            n_words,
            n_concepts,
            n_categories,
            n_samples,
            n_star,
        })
    }

    /// The parameters of the headline setting, `n_spl = 6`, `n* = 1`.
    pub fn headline() -> Self {
        ModelParams::new(9, 150, 5, 1000, 6, 1).unwrap()
    }

    pub fn length(&self) -> usize {
        self.length
    }
    pub fn n_words(&self) -> usize {
        self.n_words
    }
    pub fn n_concepts(&self) -> usize {
        self.n_concepts
    }
    pub fn n_categories(&self) -> usize {
        self.n_categories
    }
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }
    pub fn n_star(&self) -> usize {
        self.n_star
    }
    /// `s_c = n_w / n_c`.
    pub fn concept_size(&self) -> usize {
        self.n_words / self.n_concepts
    }

    pub fn with_n_star(&self, n_star: usize, n_samples: usize) -> Result<Self> {
        ModelParams::new(
            self.length,
            self.n_words,
            self.n_concepts,
            self.n_categories,
            n_samples,
            n_star,
        )
    }

    pub fn with_categories(&self, n_categories: usize) -> Result<Self> {
        ModelParams::new(
            self.length,
            self.n_words,
            self.n_concepts,
            n_categories,
            self.n_samples,
            self.n_star,
        )
    }
}

/// A map `φ: V → C` with exactly `s_c` words per concept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equipartition {
    assignment: Vec<Concept>,
    members: Vec<Vec<Word>>,
}

impl Equipartition {
    /// `assignment[w - 1]` is the concept of word `w`.
    pub fn from_assignment(assignment: Vec<Concept>, n_concepts: usize) -> Result<Self> {
        let mut members = vec![Vec::new(); n_concepts];
        for (i, &c) in assignment.iter().enumerate() {
            if c == 0 || c as usize > n_concepts {
                return Err(Error::param(format!("concept id {c} out of range")));
            }
            members[c as usize - 1].push(i as Word + 1);
        }
        let size = assignment.len() / n_concepts.max(1);
        if members.iter().any(|m| m.len() != size) || size * n_concepts != assignment.len() {
            return Err(Error::param("assignment is not an equipartition"));
        }
        Ok(Equipartition {
            assignment,
            members,
        })
    }

    /// Blocks of a word ordering: the first `s_c` words go to concept 1, etc.
    fn from_ordering(order: &[Word], n_concepts: usize) -> Self {
        let size = order.len() / n_concepts;
        let mut assignment = vec![0; order.len()];
        let mut members = Vec::with_capacity(n_concepts);
        for (c, block) in order.chunks(size).enumerate() {
            for &w in block {
                assignment[w as usize - 1] = c as Concept + 1;
            }
            let mut block = block.to_vec();
            block.sort_unstable();
            members.push(block);
        }
        Equipartition {
            assignment,
            members,
        }
    }

    pub fn concept_of(&self, word: Word) -> Concept {
        self.assignment[word as usize - 1]
    }

    /// Words belonging to `concept`, ascending.
    pub fn words_of(&self, concept: Concept) -> &[Word] {
        &self.members[concept as usize - 1]
    }

    pub fn assignment(&self) -> &[Concept] {
        &self.assignment
    }

    pub fn n_words(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_concepts(&self) -> usize {
        self.members.len()
    }

    /// `φ̊(x)`: the concept sequence underlying a sentence.
    pub fn concepts_of(&self, x: &Sentence) -> ConceptSequence {
        ConceptSequence(x.words().iter().map(|&w| self.concept_of(w)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConceptSequence(pub Vec<Concept>);

impl ConceptSequence {
    pub fn concepts(&self) -> &[Concept] {
        &self.0
    }
}

/// A sentence of `L` word ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sentence(pub Vec<Word>);

impl Sentence {
    pub fn words(&self) -> &[Word] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `φ ; c_1..c_R ; c'_1..c'_R`.
#[derive(Clone, Debug)]
pub struct Task {
    pub phi: Equipartition,
    pub familiar: Vec<ConceptSequence>,
    pub unfamiliar: Vec<ConceptSequence>,
}

impl Task {
    pub fn n_categories(&self) -> usize {
        self.familiar.len()
    }

    /// Whether every unfamiliar sequence differs from every other category's
    /// sequences (familiar or unfamiliar).
    pub fn has_distinct_sequences(&self) -> bool {
        let r = self.n_categories();
        for a in 0..r {
            for b in 0..r {
                if a == b {
                    continue;
                }
                if self.unfamiliar[a] == self.unfamiliar[b] || self.unfamiliar[a] == self.familiar[b]
                {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainingRow {
    /// 1-based category.
    pub category: usize,
    /// 1-based slot within the category.
    pub slot: usize,
    pub unfamiliar: bool,
    pub sentence: Sentence,
}

/// `R × n_spl` labeled sentences, category-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainingSet {
    pub rows: Vec<TrainingRow>,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.rows.iter().map(|r| &r.sentence)
    }
}

/// A test sentence together with the category that generated it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestPoint {
    pub category: usize,
    pub sentence: Sentence,
}

/// One draw of the simplified process: `t + 1` sequences, one point each,
/// and a test point generated by sequence 1.
#[derive(Clone, Debug)]
pub struct SdmInstance {
    pub phi: Equipartition,
    pub sequences: Vec<ConceptSequence>,
    pub points: Vec<Sentence>,
    pub test: Sentence,
}

/// Uniform equipartition: a random permutation of the vocabulary chopped
/// into `n_c` blocks of `s_c`.
pub fn sample_equipartition<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Equipartition {
    let mut order: Vec<Word> = (1..=params.n_words() as Word).collect();
    order.shuffle(rng);
    Equipartition::from_ordering(&order, params.n_concepts())
}

pub fn sample_concept_sequence<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> ConceptSequence {
    let n_c = params.n_concepts() as Concept;
    ConceptSequence(
        (0..params.length())
            .map(|_| rng.random_range(1..=n_c))
            .collect(),
    )
}

/// A task drawn uniformly from `Φ × Z^{2R}`.
pub fn sample_task<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Task {
    let phi = sample_equipartition(params, rng);
    let r = params.n_categories();
    let familiar = (0..r).map(|_| sample_concept_sequence(params, rng)).collect();
    let unfamiliar = (0..r).map(|_| sample_concept_sequence(params, rng)).collect();
    Task {
        phi,
        familiar,
        unfamiliar,
    }
}

/// A sentence drawn uniformly from `φ̊^{-1}(c)`.
pub fn generate_sentence<R: Rng + ?Sized>(
    phi: &Equipartition,
    c: &ConceptSequence,
    rng: &mut R,
) -> Sentence {
    let x = Sentence(
        c.concepts()
            .iter()
            .map(|&concept| {
                let words = phi.words_of(concept);
                words[rng.random_range(0..words.len())]
            })
            .collect(),
    );
    debug_assert_eq!(&phi.concepts_of(&x), c);
    x
}

/// Slots `1..=n*` come from `c'_r`, the rest from `c_r`.
pub fn sample_training_set<R: Rng + ?Sized>(
    task: &Task,
    params: &ModelParams,
    rng: &mut R,
) -> TrainingSet {
    let mut rows = Vec::with_capacity(params.n_categories() * params.n_samples());
    for r in 0..params.n_categories() {
        for slot in 1..=params.n_samples() {
            let unfamiliar = slot <= params.n_star();
            let seq = if unfamiliar {
                &task.unfamiliar[r]
            } else {
                &task.familiar[r]
            };
            rows.push(TrainingRow {
                category: r + 1,
                slot,
                unfamiliar,
                sentence: generate_sentence(&task.phi, seq, rng),
            });
        }
    }
    TrainingSet { rows }
}

/// An unfamiliar test sentence for the given 1-based category.
pub fn sample_test_sentence<R: Rng + ?Sized>(
    task: &Task,
    category: usize,
    rng: &mut R,
) -> Result<Sentence> {
    if category == 0 || category > task.n_categories() {
        return Err(Error::param(format!(
            "category {category} outside 1..={}",
            task.n_categories()
        )));
    }
    Ok(generate_sentence(
        &task.phi,
        &task.unfamiliar[category - 1],
        rng,
    ))
}

/// `tests_per_category` unfamiliar test points for every category.
pub fn sample_test_set<R: Rng + ?Sized>(
    task: &Task,
    tests_per_category: usize,
    rng: &mut R,
) -> Vec<TestPoint> {
    let mut out = Vec::with_capacity(task.n_categories() * tests_per_category);
    for category in 1..=task.n_categories() {
        for _ in 0..tests_per_category {
            out.push(TestPoint {
                category,
                sentence: generate_sentence(&task.phi, &task.unfamiliar[category - 1], rng),
            });
        }
    }
    out
}

/// One draw of the simplified sampling process with `t` distractors.
pub fn sample_sdm<R: Rng + ?Sized>(params: &ModelParams, t: usize, rng: &mut R) -> Result<SdmInstance> {
    if t == 0 {
        return Err(Error::param("SDM requires t >= 1"));
    }
    let phi = sample_equipartition(params, rng);
    let sequences: Vec<ConceptSequence> = (0..=t)
        .map(|_| sample_concept_sequence(params, rng))
        .collect();
    let points = sequences
        .iter()
        .map(|c| generate_sentence(&phi, c, rng))
        .collect();
    let test = generate_sentence(&phi, &sequences[0], rng);
    Ok(SdmInstance {
        phi,
        sequences,
        points,
        test,
    })
}

/// Writes a training set as `r s flag w_1 ... w_L` lines.
pub fn write_dataset<W: Write>(out: &mut W, set: &TrainingSet) -> std::io::Result<()> {
    for row in &set.rows {
        write!(out, "{} {} {}", row.category, row.slot, u8::from(row.unfamiliar))?;
        for w in row.sentence.words() {
            write!(out, " {w}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Parses the format produced by [`write_dataset`]; `#` lines are skipped.
pub fn read_dataset<R: BufRead>(input: R) -> Result<TrainingSet> {
    let mut rows = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<u64> = line
            .split_ascii_whitespace()
            .map(|t| t.parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
        if nums.len() < 4 || nums[2] > 1 {
            return Err(Error::Format(format!("line {}: malformed record", lineno + 1)));
        }
        rows.push(TrainingRow {
            category: nums[0] as usize,
            slot: nums[1] as usize,
            unfamiliar: nums[2] == 1,
            sentence: Sentence(nums[3..].iter().map(|&w| w as Word).collect()),
        });
    }
    Ok(TrainingSet { rows })
}
