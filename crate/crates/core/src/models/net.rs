//! Shared machinery for the three neural classifiers: named parameter
//! tensors, seeded initialization, inverted dropout, the class-weighted
//! binary cross-entropy head, and the Adam mini-batch training loop.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::models::adam::{adam_update, AdamParams, AdamState};
use crate::models::input::ModelInput;
use crate::models::ClassWeights;
use crate::real::{sigmoid, softplus, Real};
use crate::util::{mix_seed, seeded_rng};

pub(crate) const SALT_NET_INIT: u64 = 0x4e45_5449;
pub(crate) const SALT_SHUFFLE: u64 = 0x53_4855;
pub(crate) const SALT_DROP: u64 = 0x44_524f;

/// Ad-hoc embedding tables are initialized uniformly in this range.
pub(crate) const ADHOC_EMBED_SPAN: f64 = 0.05;

/// Named 2-D parameter tensors; vectors live as 1 x n rows.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Params<R: Real> {
    pub names: Vec<&'static str>,
    pub values: Vec<Array2<R>>,
}

impl<R: Real> Params<R> {
    pub fn new() -> Self {
        Self { names: Vec::new(), values: Vec::new() }
    }

    pub fn add(&mut self, name: &'static str, value: Array2<R>) -> usize {
        self.names.push(name);
        self.values.push(value);
        self.names.len() - 1
    }

    pub fn zero_grads(&self) -> Vec<Array2<R>> {
        self.values.iter().map(|v| Array2::zeros(v.raw_dim())).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// Glorot-uniform matrix: U(-l, l) with l = sqrt(6/(fan_in + fan_out)).
/// Draws happen in f64 so the stream is scalar-type independent.
pub(crate) fn glorot<R: Real>(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    fan_in: usize,
    fan_out: usize,
) -> Array2<R> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || R::from_f64(rng.gen_range(-limit..limit)))
}

pub(crate) fn uniform<R: Real>(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    span: f64,
) -> Array2<R> {
    Array2::from_shape_simple_fn((rows, cols), || R::from_f64(rng.gen_range(-span..span)))
}

/// Trainable embedding table for the ad-hoc condition: uniform in
/// [-0.05, 0.05] except row 0, the padding row, which stays zero and is
/// never updated.
pub(crate) fn adhoc_embed_table<R: Real>(
    rng: &mut ChaCha8Rng,
    table_len: usize,
    d: usize,
) -> Array2<R> {
    let mut t = uniform(rng, table_len, d, ADHOC_EMBED_SPAN);
    t.row_mut(0).fill(R::zero());
    t
}

/// Inverted dropout mask: each unit survives with probability 1 - p and is
/// scaled by 1/(1 - p), so inference needs no correction.
pub(crate) fn dropout_mask<R: Real>(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<R> {
    if p <= 0.0 {
        return vec![R::one(); n];
    }
    let keep = R::from_f64(1.0 / (1.0 - p));
    (0..n)
        .map(|_| if rng.gen::<f64>() < p { R::zero() } else { keep })
        .collect()
}

/// Class-weighted binary cross-entropy on a logit:
/// loss = w * (y*softplus(-z) + (1-y)*softplus(z)), dloss/dz = w*(sigma(z)-y).
pub(crate) fn weighted_bce<R: Real>(z: R, y: R, weight: R) -> (R, R) {
    let loss = weight * (y * softplus(-z) + (R::one() - y) * softplus(z));
    let dz = weight * (sigmoid(z) - y);
    (loss, dz)
}

/// What each architecture implements; the shared loop drives it.
pub(crate) trait NetCore<R: Real>: Send {
    fn params(&self) -> &Params<R>;
    fn params_mut(&mut self) -> &mut Params<R>;
    /// Inference logit (no dropout).
    fn logit(&self, input: &ModelInput<R>) -> Result<R>;
    /// Forward with dropout drawn from `rng`, then backward; accumulates
    /// dLoss/dtheta into `grads` and returns the example loss.
    fn forward_backward(
        &self,
        input: &ModelInput<R>,
        y: R,
        weight: R,
        rng: &mut ChaCha8Rng,
        grads: &mut [Array2<R>],
    ) -> Result<R>;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LoopConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub adam: AdamParams,
}

/// Mini-batch Adam loop: seeded epoch shuffle, gradients averaged over the
/// batch, one optimizer step per batch. Returns mean loss per epoch.
pub(crate) fn train_network<R: Real, N: NetCore<R>>(
    net: &mut N,
    inputs: &[ModelInput<R>],
    labels: &[Label],
    weights: &ClassWeights,
    cfg: LoopConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    if inputs.is_empty() || inputs.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} inputs for {} labels",
            inputs.len(),
            labels.len()
        )));
    }
    if cfg.batch_size == 0 || cfg.epochs == 0 {
        return Err(Error::Param("batch_size and epochs must be >= 1".into()));
    }
    cfg.adam.validate()?;
    let mut shuffle_rng = seeded_rng(mix_seed(seed, SALT_SHUFFLE));
    let mut drop_rng = seeded_rng(mix_seed(seed, SALT_DROP));
    let mut adam = AdamState::new(cfg.adam, &net.params().values);
    let mut grads = net.params().zero_grads();
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for (batch_no, batch) in order.chunks(cfg.batch_size).enumerate() {
            for g in &mut grads {
                g.fill(R::zero());
            }
            let mut batch_loss = R::zero();
            for &i in batch {
                let y = R::from_f64(if labels[i].is_harmful() { 1.0 } else { 0.0 });
                let cw = R::from_f64(weights.weight(labels[i]));
                batch_loss += net
                    .forward_backward(&inputs[i], y, cw, &mut drop_rng, &mut grads)
                    .map_err(|e| at(e, epoch, batch_no))?;
            }
            if !batch_loss.is_finite() {
                return Err(at(
                    Error::Numeric("non-finite loss".into()),
                    epoch,
                    batch_no,
                ));
            }
            let inv = R::from_f64(1.0 / batch.len() as f64);
            for g in &mut grads {
                g.mapv_inplace(|x| x * inv);
            }
            adam_update(&mut adam, &mut net.params_mut().values, &grads)
                .map_err(|e| at(e, epoch, batch_no))?;
            total += batch_loss.to_f64();
        }
        if !net.params().all_finite() {
            return Err(Error::Numeric(format!(
                "non-finite parameters after epoch {epoch}"
            )));
        }
        epoch_losses.push(total / inputs.len() as f64);
    }
    Ok(epoch_losses)
}

fn at(e: Error, epoch: usize, batch: usize) -> Error {
    match e {
        Error::Numeric(msg) => Error::Numeric(format!("epoch {epoch} batch {batch}: {msg}")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bce_oracles() {
        // z = 0: loss = w * ln 2 either way; gradient w*(0.5 - y)
        let (l, dz) = weighted_bce(0.0f64, 1.0, 2.0);
        assert_relative_eq!(l, 2.0 * std::f64::consts::LN_2, epsilon = 1e-12);
        assert_relative_eq!(dz, -1.0, epsilon = 1e-12);
        // well-classified positive: tiny loss
        let (l, _) = weighted_bce(30.0f64, 1.0, 1.0);
        assert!(l < 1e-12);
        // misclassified positive under a larger weight loses strictly more
        let (l1, _) = weighted_bce(-2.0f64, 1.0, 1.0);
        let (l5, _) = weighted_bce(-2.0f64, 1.0, 5.0);
        assert!(l5 > l1);
        assert_relative_eq!(l5, 5.0 * l1, epsilon = 1e-12);
    }

    #[test]
    fn bce_gradient_matches_finite_differences() {
        let h = 1e-7;
        for &(z, y, w) in &[(0.3f64, 1.0, 2.5), (-1.2, 0.0, 0.7), (2.0, 1.0, 1.0)] {
            let (_, dz) = weighted_bce(z, y, w);
            let (lp, _) = weighted_bce(z + h, y, w);
            let (lm, _) = weighted_bce(z - h, y, w);
            assert_relative_eq!(dz, (lp - lm) / (2.0 * h), max_relative = 1e-6);
        }
    }

    #[test]
    fn dropout_mask_properties() {
        let mut rng = seeded_rng(4);
        let none: Vec<f64> = dropout_mask(&mut rng, 8, 0.0);
        assert!(none.iter().all(|&m| m == 1.0));
        let mask: Vec<f64> = dropout_mask(&mut rng, 10_000, 0.5);
        let kept = mask.iter().filter(|&&m| m != 0.0).count();
        assert!((kept as f64 / 10_000.0 - 0.5).abs() < 0.03);
        for &m in &mask {
            assert!(m == 0.0 || (m - 2.0).abs() < 1e-12, "inverted scaling");
        }
    }

    #[test]
    fn embed_table_keeps_padding_row_zero() {
        let mut rng = seeded_rng(5);
        let t: Array2<f64> = adhoc_embed_table(&mut rng, 4, 3);
        assert!(t.row(0).iter().all(|&x| x == 0.0));
        assert!(t.rows().into_iter().skip(1).all(|r| r.iter().any(|&x| x != 0.0)));
        assert!(t.iter().all(|&x| x.abs() < ADHOC_EMBED_SPAN));
    }

    #[test]
    fn glorot_bounds() {
        let mut rng = seeded_rng(6);
        let m: Array2<f64> = glorot(&mut rng, 10, 20, 10, 20);
        let limit = (6.0 / 30.0f64).sqrt();
        assert!(m.iter().all(|&x| x.abs() < limit));
    }
}
