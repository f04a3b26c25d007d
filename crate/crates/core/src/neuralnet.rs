//! The word-shared MLP network: each word goes through MLP 1 and LayerNorm,
//! the `L` embeddings are concatenated, and MLP 2 maps them to category
//! logits. Trained with plain minibatch SGD on cross-entropy.
//!
//! MLP 1 takes a one-hot word, so its first affine layer is a row lookup.

use std::io::{Read, Write};

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use ndarray::{s, Array1, Array2, ArrayView2, Axis, LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive};
use rand::distr::uniform::SampleUniform;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datamodel::{ModelParams, Sentence, TestPoint, TrainingSet, Word};
use crate::error::{Error, Result};
use crate::graphkernel::FeatureVector;

const LN_EPS: f64 = 1e-5;
const MAGIC: &[u8; 8] = b"LTLABNN\0";
const FORMAT_VERSION: u32 = 1;

/// Floating-point type the network computes in. Training runs use `f32`;
/// `f64` serves gradient checks.
pub trait Real:
    LinalgScalar
    + Float
    + FromPrimitive
    + ScalarOperand
    + SampleUniform
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Send
    + Sync
    + 'static
{
    const BITS: u32;

    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("representable constant")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const BITS: u32 = 32;
}

impl Real for f64 {
    const BITS: u32 = 64;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub length: usize,
    pub d_in: usize,
    pub d_hidden1: usize,
    pub d_embed: usize,
    pub d_hidden2: usize,
    pub d_out: usize,
    pub lr: f64,
    pub batch: usize,
    pub loss_target: f64,
    pub max_epochs: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig::for_params(&ModelParams::headline())
    }
}

impl NetworkConfig {
    pub fn for_params(params: &ModelParams) -> Self {
        NetworkConfig {
            length: params.length(),
            d_in: params.n_words(),
            d_hidden1: 500,
            d_embed: 10,
            d_hidden2: 2000,
            d_out: params.n_categories(),
            lr: 0.01,
            batch: 100,
            loss_target: 1e-4,
            max_epochs: 2000,
        }
    }

    pub fn concat_width(&self) -> usize {
        self.length * self.d_embed
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            self.length,
            self.d_in,
            self.d_hidden1,
            self.d_embed,
            self.d_hidden2,
            self.d_out,
            self.batch,
            self.max_epochs,
        ];
        if dims.contains(&0) {
            return Err(Error::param("network dimensions must be positive"));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) || !(self.loss_target > 0.0) {
            return Err(Error::param("lr must be >= 0 and loss_target > 0"));
        }
        Ok(())
    }

    fn check_params(&self, params: &ModelParams) -> Result<()> {
        if self.d_in != params.n_words()
            || self.d_out != params.n_categories()
            || self.length != params.length()
        {
            return Err(Error::param(format!(
                "network shape (L={}, d_in={}, d_out={}) does not match model (L={}, n_w={}, R={})",
                self.length,
                self.d_in,
                self.d_out,
                params.length(),
                params.n_words(),
                params.n_categories()
            )));
        }
        Ok(())
    }
}

/// All trainable parameters, in checkpoint order.
#[derive(Clone, Debug, PartialEq)]
pub struct Network<F: Real = f32> {
    cfg: NetworkConfig,
    w1: Array2<F>,
    b1: Array1<F>,
    w2: Array2<F>,
    b2: Array1<F>,
    ln_gain: Array1<F>,
    ln_bias: Array1<F>,
    w3: Array2<F>,
    b3: Array1<F>,
    w4: Array2<F>,
    b4: Array1<F>,
}

fn uniform<F: Real, R: Rng + ?Sized>(rows: usize, cols: usize, fan_in: usize, rng: &mut R) -> Array2<F> {
    let a = F::of(1.0 / (fan_in as f64).sqrt());
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-a..a))
}

fn uniform1<F: Real, R: Rng + ?Sized>(n: usize, fan_in: usize, rng: &mut R) -> Array1<F> {
    let a = F::of(1.0 / (fan_in as f64).sqrt());
    Array1::from_shape_simple_fn(n, || rng.random_range(-a..a))
}

/// Activations kept for the backward pass.
struct Cache<F> {
    words: Vec<usize>,
    h1_pre: Array2<F>,
    h1: Array2<F>,
    z: Array2<F>,
    inv_std: Array1<F>,
    concat: Array2<F>,
    h2_pre: Array2<F>,
    h2: Array2<F>,
}

impl<F: Real> Network<F> {
    /// Fan-in scaled uniform initialisation; LayerNorm starts at identity.
    pub fn new<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let c = cfg;
        Ok(Network {
            cfg: *c,
            w1: uniform(c.d_in, c.d_hidden1, c.d_in, rng),
            b1: uniform1(c.d_hidden1, c.d_in, rng),
            w2: uniform(c.d_hidden1, c.d_embed, c.d_hidden1, rng),
            b2: uniform1(c.d_embed, c.d_hidden1, rng),
            ln_gain: Array1::ones(c.d_embed),
            ln_bias: Array1::zeros(c.d_embed),
            w3: uniform(c.concat_width(), c.d_hidden2, c.concat_width(), rng),
            b3: uniform1(c.d_hidden2, c.concat_width(), rng),
            w4: uniform(c.d_hidden2, c.d_out, c.d_hidden2, rng),
            b4: uniform1(c.d_out, c.d_hidden2, rng),
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn n_parameters(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    fn blocks(&self) -> [&[F]; 10] {
        [
            self.w1.as_slice().unwrap(),
            self.b1.as_slice().unwrap(),
            self.w2.as_slice().unwrap(),
            self.b2.as_slice().unwrap(),
            self.ln_gain.as_slice().unwrap(),
            self.ln_bias.as_slice().unwrap(),
            self.w3.as_slice().unwrap(),
            self.b3.as_slice().unwrap(),
            self.w4.as_slice().unwrap(),
            self.b4.as_slice().unwrap(),
        ]
    }

    fn blocks_mut(&mut self) -> [&mut [F]; 10] {
        [
            self.w1.as_slice_mut().unwrap(),
            self.b1.as_slice_mut().unwrap(),
            self.w2.as_slice_mut().unwrap(),
            self.b2.as_slice_mut().unwrap(),
            self.ln_gain.as_slice_mut().unwrap(),
            self.ln_bias.as_slice_mut().unwrap(),
            self.w3.as_slice_mut().unwrap(),
            self.b3.as_slice_mut().unwrap(),
            self.w4.as_slice_mut().unwrap(),
            self.b4.as_slice_mut().unwrap(),
        ]
    }

    fn zeros(c: &NetworkConfig) -> Self {
        Network {
            cfg: *c,
            w1: Array2::zeros((c.d_in, c.d_hidden1)),
            b1: Array1::zeros(c.d_hidden1),
            w2: Array2::zeros((c.d_hidden1, c.d_embed)),
            b2: Array1::zeros(c.d_embed),
            ln_gain: Array1::zeros(c.d_embed),
            ln_bias: Array1::zeros(c.d_embed),
            w3: Array2::zeros((c.concat_width(), c.d_hidden2)),
            b3: Array1::zeros(c.d_hidden2),
            w4: Array2::zeros((c.d_hidden2, c.d_out)),
            b4: Array1::zeros(c.d_out),
        }
    }

    fn zeros_like(&self) -> Self {
        Network::zeros(&self.cfg)
    }

    fn word_index(&self, w: Word) -> usize {
        assert!(
            w >= 1 && (w as usize) <= self.cfg.d_in,
            "word {w} outside vocabulary of {}",
            self.cfg.d_in
        );
        w as usize - 1
    }

    /// Forward pass for a batch of sentences; returns `(logits, cache)`.
    fn forward_cached(&self, batch: &[&Sentence]) -> (Array2<F>, Cache<F>) {
        let c = &self.cfg;
        let n = batch.len();
        let mut words = Vec::with_capacity(n * c.length);
        for x in batch {
            assert_eq!(x.len(), c.length, "sentence length");
            words.extend(x.words().iter().map(|&w| self.word_index(w)));
        }
        let mut h1_pre = Array2::zeros((words.len(), c.d_hidden1));
        for (mut row, &w) in h1_pre.outer_iter_mut().zip(&words) {
            row.assign(&self.w1.row(w));
            row += &self.b1;
        }
        let h1 = h1_pre.mapv(relu::<F>);
        let e = h1.dot(&self.w2) + &self.b2;
        let (z, inv_std) = layer_norm(&e);
        let y = &z * &self.ln_gain + &self.ln_bias;
        let concat = y
            .into_shape_with_order((n, c.concat_width()))
            .expect("contiguous embeddings");
        let h2_pre = concat.dot(&self.w3) + &self.b3;
        let h2 = h2_pre.mapv(relu::<F>);
        let logits = h2.dot(&self.w4) + &self.b4;
        (
            logits,
            Cache {
                words,
                h1_pre,
                h1,
                z,
                inv_std,
                concat,
                h2_pre,
                h2,
            },
        )
    }

    /// Mean cross-entropy of the batch and its gradient.
    fn loss_and_grad(&self, batch: &[&Sentence], labels: &[usize]) -> (f64, Self) {
        let (logits, cache) = self.forward_cached(batch);
        let n = batch.len() as f64;
        let (loss, mut d_logits) = softmax_cross_entropy(&logits, labels);
        d_logits /= F::of(n);
        let mut g = self.zeros_like();
        g.w4 = cache.h2.t().dot(&d_logits);
        g.b4 = d_logits.sum_axis(Axis(0));
        let mut d_h2 = d_logits.dot(&self.w4.t());
        relu_backward(&mut d_h2, &cache.h2_pre);
        g.w3 = cache.concat.t().dot(&d_h2);
        g.b3 = d_h2.sum_axis(Axis(0));
        let d_concat = d_h2.dot(&self.w3.t());
        let d_y = d_concat
            .into_shape_with_order((cache.z.nrows(), self.cfg.d_embed))
            .expect("contiguous gradient");
        g.ln_gain = (&d_y * &cache.z).sum_axis(Axis(0));
        g.ln_bias = d_y.sum_axis(Axis(0));
        let d_z = &d_y * &self.ln_gain;
        let d_e = layer_norm_backward(&d_z, &cache.z, &cache.inv_std);
        g.w2 = cache.h1.t().dot(&d_e);
        g.b2 = d_e.sum_axis(Axis(0));
        let mut d_h1 = d_e.dot(&self.w2.t());
        relu_backward(&mut d_h1, &cache.h1_pre);
        for (row, &w) in d_h1.outer_iter().zip(&cache.words) {
            let mut target = g.w1.row_mut(w);
            target += &row;
        }
        g.b1 = d_h1.sum_axis(Axis(0));
        (loss.as_f64() / n, g)
    }

    fn sgd_step(&mut self, grad: &Self, lr: f64) {
        let lr = F::of(lr);
        for (p, g) in self.blocks_mut().into_iter().zip(grad.blocks()) {
            for (a, &b) in p.iter_mut().zip(g) {
                *a -= lr * b;
            }
        }
    }

    pub fn forward_batch(&self, batch: &[&Sentence]) -> Array2<F> {
        self.forward_cached(batch).0
    }

    /// Concatenated LayerNorm outputs, one row per sentence.
    pub fn features_batch(&self, batch: &[&Sentence]) -> Array2<F> {
        self.forward_cached(batch).1.concat
    }

    /// Checkpoint: magic, version, config block (dimensions, hyperparameters
    /// and the compute precision), then each parameter block as
    /// little-endian `f64`s.
    pub fn save<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&FORMAT_VERSION.to_le_bytes())?;
        let c = &self.cfg;
        for v in [
            c.length,
            c.d_in,
            c.d_hidden1,
            c.d_embed,
            c.d_hidden2,
            c.d_out,
            c.batch,
            c.max_epochs,
        ] {
            out.write_all(&(v as u64).to_le_bytes())?;
        }
        out.write_all(&c.lr.to_le_bytes())?;
        out.write_all(&c.loss_target.to_le_bytes())?;
        out.write_all(&F::BITS.to_le_bytes())?;
        for block in self.blocks() {
            out.write_all(&(block.len() as u64).to_le_bytes())?;
            for v in block {
                out.write_all(&v.as_f64().to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn load<R: Read>(input: &mut R) -> Result<Self> {
        let fmt = |e: std::io::Error| Error::Format(format!("truncated checkpoint: {e}"));
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic).map_err(fmt)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a network checkpoint".into()));
        }
        let mut b4 = [0u8; 4];
        input.read_exact(&mut b4).map_err(fmt)?;
        let version = u32::from_le_bytes(b4);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported checkpoint version {version}")));
        }
        let mut b8 = [0u8; 8];
        let mut next_u64 = |input: &mut R| -> Result<u64> {
            input.read_exact(&mut b8).map_err(fmt)?;
            Ok(u64::from_le_bytes(b8))
        };
        let mut dims = [0usize; 8];
        for d in &mut dims {
            *d = next_u64(input)? as usize;
        }
        let lr = f64::from_bits(next_u64(input)?);
        let loss_target = f64::from_bits(next_u64(input)?);
        let cfg = NetworkConfig {
            length: dims[0],
            d_in: dims[1],
            d_hidden1: dims[2],
            d_embed: dims[3],
            d_hidden2: dims[4],
            d_out: dims[5],
            batch: dims[6],
            max_epochs: dims[7],
            lr,
            loss_target,
        };
        cfg.validate()
            .map_err(|e| Error::Format(format!("bad config block: {e}")))?;
        input.read_exact(&mut b4).map_err(fmt)?;
        let bits = u32::from_le_bytes(b4);
        if bits != F::BITS {
            return Err(Error::Format(format!(
                "checkpoint holds a {bits}-bit network, expected {}-bit",
                F::BITS
            )));
        }
        let mut net = Self::zeros(&cfg);
        for block in net.blocks_mut() {
            let len = next_u64(input)? as usize;
            if len != block.len() {
                return Err(Error::Format(format!(
                    "parameter block of length {len}, expected {}",
                    block.len()
                )));
            }
            for v in block.iter_mut() {
                *v = F::of(f64::from_bits(next_u64(input)?));
            }
        }
        let mut rest = [0u8; 1];
        if input.read(&mut rest).map_err(fmt)? != 0 {
            return Err(Error::Format("trailing bytes after checkpoint".into()));
        }
        Ok(net)
    }
}

fn relu<F: Real>(v: F) -> F {
    v.max(F::zero())
}

fn relu_backward<F: Real>(grad: &mut Array2<F>, pre: &Array2<F>) {
    grad.zip_mut_with(pre, |g, &p| {
        if p <= F::zero() {
            *g = F::zero();
        }
    });
}

/// Row-wise standardisation; returns `(z, 1/σ)`.
fn layer_norm<F: Real>(e: &Array2<F>) -> (Array2<F>, Array1<F>) {
    let d = F::of(e.ncols() as f64);
    let eps = F::of(LN_EPS);
    let mut z = e.clone();
    let mut inv_std = Array1::zeros(e.nrows());
    for (mut row, s) in z.outer_iter_mut().zip(inv_std.iter_mut()) {
        let mean = row.sum() / d;
        row -= mean;
        let var = row.iter().map(|&v| v * v).sum::<F>() / d;
        *s = F::one() / (var + eps).sqrt();
        row *= *s;
    }
    (z, inv_std)
}

fn layer_norm_backward<F: Real>(d_z: &Array2<F>, z: &Array2<F>, inv_std: &Array1<F>) -> Array2<F> {
    let d = F::of(z.ncols() as f64);
    let mut out = d_z.clone();
    for ((mut o, zr), &s) in out.outer_iter_mut().zip(z.outer_iter()).zip(inv_std) {
        let mean_dz = o.sum() / d;
        let mean_dzz = o.iter().zip(zr).map(|(&a, &b)| a * b).sum::<F>() / d;
        for (v, &zv) in o.iter_mut().zip(zr) {
            *v = s * (*v - mean_dz - zv * mean_dzz);
        }
    }
    out
}

/// Summed cross-entropy and `softmax − onehot`.
fn softmax_cross_entropy<F: Real>(logits: &Array2<F>, labels: &[usize]) -> (F, Array2<F>) {
    let mut probs = logits.clone();
    let mut loss = F::zero();
    for ((mut row, raw), &label) in probs.outer_iter_mut().zip(logits.outer_iter()).zip(labels) {
        let max = raw.fold(F::neg_infinity(), |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let total = row.sum();
        loss += total.ln() - (raw[label] - max);
        row /= total;
        row[label] -= F::one();
    }
    (loss, probs)
}

#[derive(Clone, Debug, Serialize)]
pub struct TrainingLog {
    /// Mean minibatch loss of every epoch.
    pub epoch_losses: Vec<f64>,
    pub converged: bool,
    pub epochs: usize,
}

impl TrainingLog {
    pub fn final_loss(&self) -> f64 {
        self.epoch_losses.last().copied().unwrap_or(f64::NAN)
    }
}

/// Trains a fresh network on `train` with shuffled minibatch SGD until the
/// epoch's mean loss reaches `cfg.loss_target` or `cfg.max_epochs` pass.
pub fn train_network<F: Real, R: Rng + ?Sized>(
    train: &TrainingSet,
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<(Network<F>, TrainingLog)> {
    let net = Network::new(cfg, rng)?;
    continue_training(net, train, cfg.max_epochs, rng)
}

/// Runs up to `epochs` further epochs on an existing network.
pub fn continue_training<F: Real, R: Rng + ?Sized>(
    mut net: Network<F>,
    train: &TrainingSet,
    epochs: usize,
    rng: &mut R,
) -> Result<(Network<F>, TrainingLog)> {
    if train.is_empty() {
        return Err(Error::param("empty training set"));
    }
    let cfg = net.cfg;
    if let Some(row) = train
        .rows
        .iter()
        .find(|r| r.category == 0 || r.category > cfg.d_out)
    {
        return Err(Error::param(format!(
            "category {} outside 1..={}",
            row.category, cfg.d_out
        )));
    }
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut log = TrainingLog {
        epoch_losses: Vec::new(),
        converged: false,
        epochs: 0,
    };
    for epoch in 1..=epochs {
        order.shuffle(rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch) {
            let batch: Vec<&Sentence> = chunk.iter().map(|&i| &train.rows[i].sentence).collect();
            let labels: Vec<usize> = chunk.iter().map(|&i| train.rows[i].category - 1).collect();
            let (loss, grad) = net.loss_and_grad(&batch, &labels);
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            total += loss * chunk.len() as f64;
            net.sgd_step(&grad, cfg.lr);
        }
        let mean = total / train.len() as f64;
        log.epoch_losses.push(mean);
        log.epochs = epoch;
        if mean <= cfg.loss_target {
            log.converged = true;
            break;
        }
    }
    Ok((net, log))
}

/// Category logits (length `R`) for one sentence.
pub fn forward<F: Real>(net: &Network<F>, x: &Sentence) -> Vec<f64> {
    net.forward_batch(&[x]).row(0).iter().map(|v| v.as_f64()).collect()
}

/// The concatenated word representations fed to MLP 2 (length `L·d_embed`).
pub fn extract_features<F: Real>(net: &Network<F>, x: &Sentence) -> FeatureVector {
    FeatureVector(net.features_batch(&[x]).row(0).iter().map(|v| v.as_f64()).collect())
}

const EVAL_CHUNK: usize = 512;

/// Fraction of tests whose strict argmax logit is the true category; a tie
/// at the maximum counts as a failure.
pub fn evaluate_accuracy<F: Real>(net: &Network<F>, tests: &[TestPoint]) -> f64 {
    if tests.is_empty() {
        return f64::NAN;
    }
    let mut correct = 0usize;
    for chunk in tests.chunks(EVAL_CHUNK) {
        let batch: Vec<&Sentence> = chunk.iter().map(|t| &t.sentence).collect();
        let logits = net.forward_batch(&batch);
        correct += chunk
            .iter()
            .zip(logits.outer_iter())
            .filter(|(t, row)| strict_argmax(row.as_slice().unwrap()) == Some(t.category - 1))
            .count();
    }
    correct as f64 / tests.len() as f64
}

fn strict_argmax<F: Real>(v: &[F]) -> Option<usize> {
    let mut best = 0;
    let mut tied = false;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
            tied = false;
        } else if v[i] == v[best] {
            tied = true;
        }
    }
    (!tied).then_some(best)
}

/// Features of many sentences as an `n × (L·d_embed)` matrix.
pub fn extract_feature_matrix<F: Real>(net: &Network<F>, xs: &[&Sentence]) -> Array2<F> {
    let mut out = Array2::zeros((xs.len(), net.cfg.concat_width()));
    for (i, chunk) in xs.chunks(EVAL_CHUNK).enumerate() {
        let f = net.features_batch(chunk);
        let start = i * EVAL_CHUNK;
        out.slice_mut(s![start..start + chunk.len(), ..]).assign(&f);
    }
    out
}

/// Mean distance between word embeddings (MLP 1 + LayerNorm output) of
/// same-concept pairs and of different-concept pairs.
pub fn concept_separation<F: Real>(net: &Network<F>, assignment: &[u32]) -> (f64, f64) {
    let words: Vec<usize> = (0..net.cfg.d_in).collect();
    let mut h1 = Array2::zeros((words.len(), net.cfg.d_hidden1));
    for (mut row, &w) in h1.outer_iter_mut().zip(&words) {
        row.assign(&(&net.w1.row(w) + &net.b1).mapv(relu::<F>));
    }
    let e = h1.dot(&net.w2) + &net.b2;
    let (z, _) = layer_norm(&e);
    let y = &z * &net.ln_gain + &net.ln_bias;
    pairwise_means(y.view(), assignment)
}

fn pairwise_means<F: Real>(y: ArrayView2<F>, assignment: &[u32]) -> (f64, f64) {
    let (mut same, mut n_same, mut diff, mut n_diff) = (0.0, 0usize, 0.0, 0usize);
    for a in 0..y.nrows() {
        for b in a + 1..y.nrows() {
            let d = (&y.row(a) - &y.row(b)).mapv(|v| v * v).sum().sqrt().as_f64();
            if assignment[a] == assignment[b] {
                same += d;
                n_same += 1;
            } else {
                diff += d;
                n_diff += 1;
            }
        }
    }
    (same / n_same.max(1) as f64, diff / n_diff.max(1) as f64)
}

/// Shape check used by callers that train on sampled data.
/// Largest relative difference between the backpropagated gradient of the
/// mean batch loss and its central finite difference with step `h`.
pub fn gradient_check(net: &Network<f64>, xs: &[Sentence], labels: &[usize], h: f64) -> f64 {
    let batch: Vec<&Sentence> = xs.iter().collect();
    let (_, grad) = net.loss_and_grad(&batch, labels);
    let mut worst: f64 = 0.0;
    for (bi, g_block) in grad.blocks().iter().enumerate() {
        for j in 0..g_block.len() {
            let mut plus = net.clone();
            plus.blocks_mut()[bi][j] += h;
            let mut minus = net.clone();
            minus.blocks_mut()[bi][j] -= h;
            let numeric = (plus.loss_and_grad(&batch, labels).0 - minus.loss_and_grad(&batch, labels).0) / (2.0 * h);
            let analytic = g_block[j];
            let scale = analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic - numeric).abs() / scale);
        }
    }
    worst
}

pub fn config_for(params: &ModelParams, cfg: Option<NetworkConfig>) -> Result<NetworkConfig> {
    let cfg = cfg.unwrap_or_else(|| NetworkConfig::for_params(params));
    cfg.validate()?;
    cfg.check_params(params)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{sample_task, sample_test_set, sample_training_set, stream_rng};

    fn small_cfg() -> NetworkConfig {
        NetworkConfig {
            length: 3,
            d_in: 6,
            d_hidden1: 7,
            d_embed: 4,
            d_hidden2: 8,
            d_out: 5,
            lr: 0.01,
            batch: 3,
            loss_target: 1e-4,
            max_epochs: 10,
        }
    }

    fn sentences(rows: &[[Word; 3]]) -> Vec<Sentence> {
        rows.iter().map(|r| Sentence(r.to_vec())).collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = stream_rng(3, 0);
        let net: Network<f64> = Network::new(&small_cfg(), &mut rng).unwrap();
        let xs = sentences(&[[1, 2, 3], [6, 6, 1], [4, 2, 5]]);
        let worst = gradient_check(&net, &xs, &[0, 4, 2], 1e-6);
        assert!(worst <= 1e-4, "worst relative error {worst}");
    }

    #[test]
    fn zero_learning_rate_keeps_loss() {
        let params = ModelParams::new(3, 6, 2, 5, 2, 1).unwrap();
        let mut rng = stream_rng(4, 0);
        let task = sample_task(&params, &mut rng);
        let train = sample_training_set(&task, &params, &mut rng);
        let cfg = NetworkConfig {
            lr: 0.0,
            max_epochs: 4,
            ..small_cfg()
        };
        let (net, log) = train_network::<f64, _>(&train, &cfg, &mut rng).unwrap();
        let l0 = log.epoch_losses[0];
        for l in &log.epoch_losses {
            assert!((l - l0).abs() <= 1e-12 * l0);
        }
        assert!(!log.converged);
        assert_eq!(log.epochs, 4);
        let mut fresh_rng = stream_rng(4, 0);
        let _ = sample_task(&params, &mut fresh_rng);
        let _ = sample_training_set(&task, &params, &mut fresh_rng);
        assert_eq!(net, Network::<f64>::new(&cfg, &mut fresh_rng).unwrap());
    }

    #[test]
    fn training_is_deterministic() {
        let params = ModelParams::new(3, 6, 2, 5, 3, 1).unwrap();
        let run = || {
            let mut rng = stream_rng(9, 2);
            let task = sample_task(&params, &mut rng);
            let train = sample_training_set(&task, &params, &mut rng);
            train_network::<f64, _>(&train, &small_cfg(), &mut rng).unwrap()
        };
        let (a, la) = run();
        let (b, lb) = run();
        assert_eq!(a, b);
        assert_eq!(la.epoch_losses, lb.epoch_losses);
    }

    #[test]
    fn small_problem_is_learned() {
        let params = ModelParams::new(3, 6, 2, 5, 3, 1).unwrap();
        let mut rng = stream_rng(1, 1);
        let task = sample_task(&params, &mut rng);
        let train = sample_training_set(&task, &params, &mut rng);
        let cfg = NetworkConfig {
            lr: 0.1,
            max_epochs: 5000,
            loss_target: 1e-3,
            d_hidden1: 16,
            d_hidden2: 32,
            ..small_cfg()
        };
        let (net, log) = train_network::<f64, _>(&train, &cfg, &mut rng).unwrap();
        assert!(log.converged, "final loss {}", log.final_loss());
        let points: Vec<TestPoint> = train
            .rows
            .iter()
            .map(|r| TestPoint {
                category: r.category,
                sentence: r.sentence.clone(),
            })
            .collect();
        assert_eq!(evaluate_accuracy(&net, &points), 1.0);
    }

    #[test]
    fn divergence_is_reported() {
        let params = ModelParams::new(3, 6, 2, 5, 3, 1).unwrap();
        let mut rng = stream_rng(1, 1);
        let task = sample_task(&params, &mut rng);
        let train = sample_training_set(&task, &params, &mut rng);
        let mut net: Network<f64> = Network::new(&small_cfg(), &mut rng).unwrap();
        net.w4[[0, 0]] = f64::NAN;
        assert!(matches!(
            continue_training(net, &train, 3, &mut rng),
            Err(Error::Diverged { epoch: 1, .. })
        ));
    }

    #[test]
    fn shapes_and_layer_norm() {
        let mut rng = stream_rng(5, 0);
        let cfg = small_cfg();
        let net: Network<f64> = Network::new(&cfg, &mut rng).unwrap();
        let x = Sentence(vec![1, 5, 2]);
        assert_eq!(forward(&net, &x).len(), cfg.d_out);
        let f = extract_features(&net, &x);
        assert_eq!(f.len(), cfg.length * cfg.d_embed);
        // gain 1 and bias 0 at init, so each word block is standardised
        for block in f.0.chunks(cfg.d_embed) {
            let mean = block.iter().sum::<f64>() / block.len() as f64;
            let var = block.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / block.len() as f64;
            assert!(mean.abs() < 1e-12);
            assert!((var - 1.0).abs() < 1e-3);
        }
        assert_eq!(f, extract_features(&net, &Sentence(vec![1, 5, 2])));
        assert_ne!(forward(&net, &x), forward(&net, &Sentence(vec![5, 1, 2])));
    }

    #[test]
    fn batch_and_single_forward_agree() {
        let mut rng = stream_rng(6, 0);
        let net: Network<f64> = Network::new(&small_cfg(), &mut rng).unwrap();
        let xs = sentences(&[[1, 2, 3], [3, 2, 1], [6, 6, 6]]);
        let refs: Vec<&Sentence> = xs.iter().collect();
        let batch = net.forward_batch(&refs);
        for (i, x) in xs.iter().enumerate() {
            let single = forward(&net, x);
            for (a, b) in single.iter().zip(batch.row(i)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let feats = extract_feature_matrix(&net, &refs);
        assert_eq!(feats.row(2).to_vec(), extract_features(&net, &xs[2]).0);
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut rng = stream_rng(7, 0);
        let net: Network<f64> = Network::new(&small_cfg(), &mut rng).unwrap();
        let mut buf = Vec::new();
        net.save(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 10 * 8 + 4 + 10 * 8 + 8 * net.n_parameters());
        assert_eq!(Network::<f64>::load(&mut buf.as_slice()).unwrap(), net);
        assert!(Network::<f32>::load(&mut buf.as_slice()).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(Network::<f64>::load(&mut bad.as_slice()), Err(Error::Format(_))));
        assert!(Network::<f64>::load(&mut &buf[..buf.len() - 3]).is_err());
        let mut long = buf.clone();
        long.push(0);
        assert!(Network::<f64>::load(&mut long.as_slice()).is_err());
    }

    #[test]
    fn untrained_network_is_near_chance() {
        let params = ModelParams::new(4, 12, 3, 200, 1, 1).unwrap();
        let mut rng = stream_rng(8, 0);
        let task = sample_task(&params, &mut rng);
        let tests = sample_test_set(&task, 5, &mut rng);
        let cfg = NetworkConfig {
            d_hidden1: 16,
            d_hidden2: 32,
            ..NetworkConfig::for_params(&params)
        };
        let net: Network<f64> = Network::new(&cfg, &mut rng).unwrap();
        assert!(evaluate_accuracy(&net, &tests) < 0.03);
    }

    #[test]
    fn strict_argmax_ties_fail() {
        assert_eq!(strict_argmax::<f64>(&[0.1, 0.3, 0.2]), Some(1));
        assert_eq!(strict_argmax::<f64>(&[0.3, 0.3, 0.2]), None);
        assert_eq!(strict_argmax::<f64>(&[0.3, 0.1, 0.3]), None);
        assert_eq!(strict_argmax::<f64>(&[0.1, 0.3, 0.3, 0.4]), Some(3));
    }
}
