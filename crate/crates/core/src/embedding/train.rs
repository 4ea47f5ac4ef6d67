//! The skip-gram negative-sampling training loop.
//!
//! Pair enumeration (subsampling draws, window shrinking) and negative
//! sampling consume two independent seeded streams. A dry enumeration
//! pass replays the pair stream to count total pairs exactly, which pins
//! the linear learning-rate decay without a corpus-size heuristic.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::model::EmbeddingModel;
use crate::embedding::sampler::NegativeSampler;
use crate::embedding::vocab::Vocabulary;
use crate::error::{Error, Result};
use crate::features::{window_pair_indices, FeatureScheme, TrainingPair};
use crate::real::{sigmoid, softplus, Real};
use crate::util::{mix_seed, seeded_rng};

const SALT_PAIR: u64 = 0x5041_4952;
const SALT_NEG: u64 = 0x4e45_4731;

/// Hyperparameters. Field names are the on-disk JSON contract; unknown
/// keys are rejected so config typos fail loudly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub d: usize,
    pub window: usize,
    pub negatives: usize,
    pub initial_lr: f64,
    pub final_lr: f64,
    pub epochs: usize,
    pub min_count: u64,
    pub subsample_t: f64,
    pub seed: u64,
    pub worker_count: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            d: 50,
            window: 5,
            negatives: 5,
            initial_lr: 0.025,
            final_lr: 1e-4,
            epochs: 5,
            min_count: 5,
            subsample_t: 1e-3,
            seed: 1,
            worker_count: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Param("d must be >= 1".into()));
        }
        if self.window == 0 {
            return Err(Error::Param("window must be >= 1".into()));
        }
        if self.negatives == 0 {
            return Err(Error::Param("negatives must be >= 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Param("epochs must be >= 1".into()));
        }
        if !(self.initial_lr.is_finite() && self.initial_lr > 0.0) {
            return Err(Error::Param("initial_lr must be positive".into()));
        }
        if !(self.final_lr.is_finite() && self.final_lr > 0.0 && self.final_lr <= self.initial_lr) {
            return Err(Error::Param(
                "final_lr must satisfy 0 < final_lr <= initial_lr".into(),
            ));
        }
        if !(self.subsample_t.is_finite() && self.subsample_t >= 0.0) {
            return Err(Error::Param("subsample_t must be >= 0".into()));
        }
        if self.min_count == 0 {
            return Err(Error::Param("min_count must be >= 1".into()));
        }
        if self.worker_count == 0 {
            return Err(Error::Param("worker_count must be >= 1".into()));
        }
        Ok(())
    }
}

/// Training input: tokenized sentences paired by sliding window, or
/// pre-extracted directed pairs.
#[derive(Debug, Clone)]
pub enum PairCorpus {
    Window {
        sentences: Vec<Vec<String>>,
        /// Draw the effective window width uniformly from 1..=window per
        /// position (standard skip-gram shrinking).
        stochastic: bool,
    },
    Pairs { pairs: Vec<TrainingPair> },
}

impl PairCorpus {
    pub fn window(sentences: Vec<Vec<String>>) -> Self {
        PairCorpus::Window { sentences, stochastic: true }
    }

    pub fn window_fixed(sentences: Vec<Vec<String>>) -> Self {
        PairCorpus::Window { sentences, stochastic: false }
    }

    pub fn pairs(pairs: Vec<TrainingPair>) -> Self {
        PairCorpus::Pairs { pairs }
    }
}

/// Keep probability for a unit with relative frequency `f` under
/// threshold `t`: min(1, sqrt(t/f) + t/f). `t == 0` disables subsampling.
pub fn subsample_keep_probability(f: f64, t: f64) -> f64 {
    if t <= 0.0 || f <= 0.0 {
        return 1.0;
    }
    let r = t / f;
    (r.sqrt() + r).min(1.0)
}

/// Per-epoch training trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_loss: f64,
    pub lr: f64,
}

#[derive(Clone, Copy)]
enum View<'a> {
    Window { sentences: &'a [Vec<usize>], stochastic: bool },
    Pairs { pairs: &'a [(usize, usize)] },
}

impl<'a> View<'a> {
    fn split(self, workers: usize) -> Vec<View<'a>> {
        match self {
            View::Window { sentences, stochastic } => {
                split_ranges(sentences.len(), workers)
                    .into_iter()
                    .map(|r| View::Window { sentences: &sentences[r], stochastic })
                    .collect()
            }
            View::Pairs { pairs } => split_ranges(pairs.len(), workers)
                .into_iter()
                .map(|r| View::Pairs { pairs: &pairs[r] })
                .collect(),
        }
    }
}

fn split_ranges(len: usize, workers: usize) -> Vec<std::ops::Range<usize>> {
    let chunk = len.div_ceil(workers).max(1);
    (0..workers)
        .map(|w| {
            let lo = (w * chunk).min(len);
            let hi = ((w + 1) * chunk).min(len);
            lo..hi
        })
        .collect()
}

/// Enumerate (target, context) index pairs for one pass over a view,
/// consuming subsampling and window-width draws from `rng`. The dry
/// counting pass and the real pass both route through here so their
/// random streams stay aligned.
fn for_each_pair<G: Rng>(
    view: View<'_>,
    window: usize,
    keep: Option<&[f64]>,
    rng: &mut G,
    mut f: impl FnMut(usize, usize),
) {
    match view {
        View::Window { sentences, stochastic } => {
            let mut kept: Vec<usize> = Vec::new();
            for sent in sentences {
                kept.clear();
                for &u in sent {
                    let retain = match keep {
                        Some(k) => rng.gen::<f64>() < k[u],
                        None => true,
                    };
                    if retain {
                        kept.push(u);
                    }
                }
                let width = |_: usize| if stochastic { rng_width(rng, window) } else { window };
                // widths are drawn per target position, in order
                let idx_pairs = window_pair_indices(kept.len(), window, width);
                for (i, j) in idx_pairs {
                    f(kept[i], kept[j]);
                }
            }
        }
        View::Pairs { pairs } => {
            for &(t, ctx) in pairs {
                let retain = match keep {
                    Some(k) => rng.gen::<f64>() < k[t],
                    None => true,
                };
                if retain {
                    f(t, ctx);
                }
            }
        }
    }
}

fn rng_width<G: Rng>(rng: &mut G, window: usize) -> usize {
    rng.gen_range(1..=window)
}

fn count_pairs<G: Rng>(view: View<'_>, window: usize, keep: Option<&[f64]>, rng: &mut G) -> u64 {
    let mut n = 0;
    for_each_pair(view, window, keep, rng, |_, _| n += 1);
    n
}

/// One full gradient step on (u, v_ctx, v_negs) for a single pair.
/// All dot products are taken before any write, so repeated or aliased
/// rows receive the sum of their gradient terms; returns the pair loss
/// softplus(-u.v_ctx) + sum_i softplus(u.v_neg_i).
pub(crate) fn sgns_step<R: Real>(
    w: &mut [R],
    c: &mut [R],
    d: usize,
    target: usize,
    positive: usize,
    negatives: &[usize],
    lr: R,
    gains: &mut Vec<(usize, R)>,
    u_grad: &mut Vec<R>,
) -> R {
    gains.clear();
    u_grad.clear();
    u_grad.resize(d, R::zero());
    let ub = target * d;
    let mut loss = R::zero();
    {
        let row = positive * d;
        let mut h = R::zero();
        for k in 0..d {
            h += w[ub + k] * c[row + k];
        }
        loss += softplus(-h);
        let g = sigmoid(h) - R::one();
        for k in 0..d {
            u_grad[k] += g * c[row + k];
        }
        gains.push((positive, g));
    }
    for &n in negatives {
        let row = n * d;
        let mut h = R::zero();
        for k in 0..d {
            h += w[ub + k] * c[row + k];
        }
        loss += softplus(h);
        let g = sigmoid(h);
        for k in 0..d {
            u_grad[k] += g * c[row + k];
        }
        gains.push((n, g));
    }
    for &(idx, g) in gains.iter() {
        let row = idx * d;
        let step = lr * g;
        for k in 0..d {
            c[row + k] -= step * w[ub + k];
        }
    }
    for k in 0..d {
        w[ub + k] -= lr * u_grad[k];
    }
    loss
}

/// Replay one training step on copies of flat row-major tables (both
/// `rows x d`), returning the pair loss and the updated tables. This is
/// the exact step the trainer applies: `lr = 0` evaluates the loss alone,
/// and with `lr = 1` the difference `w - w'` is the applied gradient,
/// aliasing rules included. Exposed for numerical audits.
pub fn sgns_probe<R: Real>(
    w: &[R],
    c: &[R],
    d: usize,
    target: usize,
    positive: usize,
    negatives: &[usize],
    lr: R,
) -> (R, Vec<R>, Vec<R>) {
    assert!(d > 0 && w.len() % d == 0 && c.len() % d == 0, "tables must be rows x d");
    assert!((target + 1) * d <= w.len(), "target row out of range");
    for &row in std::iter::once(&positive).chain(negatives) {
        assert!((row + 1) * d <= c.len(), "context row out of range");
    }
    let mut w2 = w.to_vec();
    let mut c2 = c.to_vec();
    let mut gains = Vec::new();
    let mut u_grad = Vec::new();
    let loss = sgns_step(&mut w2, &mut c2, d, target, positive, negatives, lr, &mut gains, &mut u_grad);
    (loss, w2, c2)
}

#[derive(Clone, Copy)]
struct Schedule {
    initial: f64,
    floor: f64,
    total: u64,
}

impl Schedule {
    fn lr(&self, done: u64) -> f64 {
        let frac = done as f64 / self.total as f64;
        (self.initial - (self.initial - self.floor) * frac).max(self.floor)
    }
}

/// Raw parts of the weight matrices, shared across hogwild workers.
#[derive(Clone, Copy)]
struct SharedSlice<R> {
    ptr: *mut R,
    len: usize,
}

// SAFETY: workers intentionally race on plain float loads/stores; lost
// updates are tolerated by this algorithm (hogwild). The buffers outlive
// the thread scope and are never reallocated while shared.
unsafe impl<R: Real> Send for SharedSlice<R> {}
unsafe impl<R: Real> Sync for SharedSlice<R> {}

impl<R: Real> SharedSlice<R> {
    fn new(s: &mut [R]) -> Self {
        Self { ptr: s.as_mut_ptr(), len: s.len() }
    }

    #[allow(clippy::mut_from_ref)]
    unsafe fn slice_mut(&self) -> &mut [R] {
        std::slice::from_raw_parts_mut(self.ptr, self.len)
    }
}

fn stream_seed(seed: u64, salt: u64, epoch: usize, widx: usize, workers: usize) -> u64 {
    mix_seed(mix_seed(seed, salt), (epoch * workers + widx) as u64)
}

#[allow(clippy::too_many_arguments)]
fn run_worker<R: Real>(
    w: &mut [R],
    c: &mut [R],
    d: usize,
    view: View<'_>,
    window: usize,
    keep: Option<&[f64]>,
    sampler: &NegativeSampler,
    negatives: usize,
    schedule: Schedule,
    counter: &AtomicU64,
    mut pair_rng: ChaCha8Rng,
    mut neg_rng: ChaCha8Rng,
) -> (f64, u64) {
    let mut negs = Vec::with_capacity(negatives);
    let mut gains = Vec::with_capacity(negatives + 1);
    let mut u_grad = vec![R::zero(); d];
    let mut loss = 0.0;
    let mut pairs = 0u64;
    for_each_pair(view, window, keep, &mut pair_rng, |t, ctx| {
        let done = counter.fetch_add(1, Ordering::Relaxed);
        let lr = schedule.lr(done);
        negs.clear();
        for _ in 0..negatives {
            negs.push(sampler.draw_avoiding(&mut neg_rng, ctx));
        }
        loss += sgns_step(w, c, d, t, ctx, &negs, R::from_f64(lr), &mut gains, &mut u_grad)
            .to_f64();
        pairs += 1;
    });
    (loss, pairs)
}

struct Prepared<R: Real> {
    model: EmbeddingModel<R>,
    sentences: Vec<Vec<usize>>,
    index_pairs: Vec<(usize, usize)>,
    stochastic: bool,
    is_window: bool,
    keep: Option<Vec<f64>>,
    sampler: NegativeSampler,
}

fn prepare<R: Real>(
    corpus: &PairCorpus,
    config: &TrainConfig,
    scheme: Option<FeatureScheme>,
) -> Result<Prepared<R>> {
    match corpus {
        PairCorpus::Window { sentences, stochastic } => {
            let vocab = Vocabulary::build(sentences.iter().map(|s| s.as_slice()), config.min_count)?;
            let indexed: Vec<Vec<usize>> = sentences
                .iter()
                .map(|s| s.iter().filter_map(|u| vocab.index_of(u)).collect::<Vec<_>>())
                .filter(|s: &Vec<usize>| !s.is_empty())
                .collect();
            let keep = keep_table(&vocab, config.subsample_t);
            let sampler = NegativeSampler::new(vocab.counts())?;
            let model =
                EmbeddingModel::new_seeded(vocab.clone(), vocab, config.d, config.seed)?
                    .with_scheme(scheme);
            Ok(Prepared {
                model,
                sentences: indexed,
                index_pairs: Vec::new(),
                stochastic: *stochastic,
                is_window: true,
                keep,
                sampler,
            })
        }
        PairCorpus::Pairs { pairs } => {
            let targets = Vocabulary::build(
                std::iter::once(pairs.iter().map(|p| &p.target)),
                config.min_count,
            )?;
            let contexts = Vocabulary::build(
                std::iter::once(pairs.iter().map(|p| &p.context)),
                config.min_count,
            )?;
            let indexed: Vec<(usize, usize)> = pairs
                .iter()
                .filter_map(|p| {
                    Some((targets.index_of(&p.target)?, contexts.index_of(&p.context)?))
                })
                .collect();
            let keep = keep_table(&targets, config.subsample_t);
            let sampler = NegativeSampler::new(contexts.counts())?;
            let model = EmbeddingModel::new_seeded(targets, contexts, config.d, config.seed)?
                .with_scheme(scheme);
            Ok(Prepared {
                model,
                sentences: Vec::new(),
                index_pairs: indexed,
                stochastic: false,
                is_window: false,
                keep,
                sampler,
            })
        }
    }
}

fn keep_table(vocab: &Vocabulary, t: f64) -> Option<Vec<f64>> {
    if t <= 0.0 {
        return None;
    }
    let total = vocab.total_count() as f64;
    Some(
        vocab
            .counts()
            .iter()
            .map(|&c| subsample_keep_probability(c as f64 / total, t))
            .collect(),
    )
}

pub fn train_embeddings<R: Real>(
    corpus: &PairCorpus,
    config: &TrainConfig,
    scheme: Option<FeatureScheme>,
) -> Result<EmbeddingModel<R>> {
    train_embeddings_logged(corpus, config, scheme).map(|(m, _)| m)
}

/// Train and return the per-epoch loss trace alongside the model.
pub fn train_embeddings_logged<R: Real>(
    corpus: &PairCorpus,
    config: &TrainConfig,
    scheme: Option<FeatureScheme>,
) -> Result<(EmbeddingModel<R>, Vec<EpochLog>)> {
    train_embeddings_observed(corpus, config, scheme, |_| {})
}

/// Train, calling `observe` as each epoch finishes so callers can report
/// progress while the run is still going.
pub fn train_embeddings_observed<R: Real, F: FnMut(&EpochLog)>(
    corpus: &PairCorpus,
    config: &TrainConfig,
    scheme: Option<FeatureScheme>,
    mut observe: F,
) -> Result<(EmbeddingModel<R>, Vec<EpochLog>)> {
    config.validate()?;
    let mut prep = prepare::<R>(corpus, config, scheme)?;
    let view = if prep.is_window {
        View::Window { sentences: &prep.sentences, stochastic: prep.stochastic }
    } else {
        View::Pairs { pairs: &prep.index_pairs }
    };
    let keep = prep.keep.as_deref();
    let workers = config.worker_count;
    let chunks = view.split(workers);

    // dry pass: replay every epoch's pair stream to fix the lr schedule
    let mut total = 0u64;
    for epoch in 0..config.epochs {
        for (widx, chunk) in chunks.iter().enumerate() {
            let mut rng = seeded_rng(stream_seed(config.seed, SALT_PAIR, epoch, widx, workers));
            total += count_pairs(*chunk, config.window, keep, &mut rng);
        }
    }
    if total == 0 {
        return Err(Error::EmptyStream(
            "no training pairs survive filtering".into(),
        ));
    }
    let schedule = Schedule { initial: config.initial_lr, floor: config.final_lr, total };

    let d = config.d;
    let counter = AtomicU64::new(0);
    let mut logs = Vec::with_capacity(config.epochs);
    let (w, c) = (&mut prep.model.w, &mut prep.model.c);
    for epoch in 0..config.epochs {
        let mut epoch_loss = 0.0;
        let mut epoch_pairs = 0u64;
        if workers == 1 {
            let pair_rng = seeded_rng(stream_seed(config.seed, SALT_PAIR, epoch, 0, 1));
            let neg_rng = seeded_rng(stream_seed(config.seed, SALT_NEG, epoch, 0, 1));
            let (l, n) = run_worker(
                w, c, d, chunks[0], config.window, keep, &prep.sampler, config.negatives,
                schedule, &counter, pair_rng, neg_rng,
            );
            epoch_loss = l;
            epoch_pairs = n;
        } else {
            let shared_w = SharedSlice::new(w);
            let shared_c = SharedSlice::new(c);
            let sampler = &prep.sampler;
            let counter_ref = &counter;
            let results: Vec<(f64, u64)> = std::thread::scope(|s| {
                let handles: Vec<_> = chunks
                    .iter()
                    .enumerate()
                    .map(|(widx, chunk)| {
                        let chunk = *chunk;
                        s.spawn(move || {
                            // SAFETY: hogwild contract documented on SharedSlice
                            let (w, c) =
                                unsafe { (shared_w.slice_mut(), shared_c.slice_mut()) };
                            let pair_rng = seeded_rng(stream_seed(
                                config.seed, SALT_PAIR, epoch, widx, workers,
                            ));
                            let neg_rng = seeded_rng(stream_seed(
                                config.seed, SALT_NEG, epoch, widx, workers,
                            ));
                            run_worker(
                                w, c, d, chunk, config.window, keep, sampler,
                                config.negatives, schedule, counter_ref, pair_rng, neg_rng,
                            )
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .collect()
            });
            for (l, n) in results {
                epoch_loss += l;
                epoch_pairs += n;
            }
        }
        let log = EpochLog {
            epoch,
            mean_loss: epoch_loss / epoch_pairs.max(1) as f64,
            lr: schedule.lr(counter.load(Ordering::Relaxed)),
        };
        observe(&log);
        logs.push(log);
    }
    prep.model.finite_check()?;
    Ok((prep.model, logs))
}
