//! Linear SVM trained by class-weighted subgradient descent on the
//! L2-regularized hinge objective.

use ndarray::Array1;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::models::input::FeatureVector;
use crate::models::ClassWeights;
use crate::real::Real;
use crate::util::{mix_seed, seeded_rng};

const SALT_SVM: u64 = 0x53564d;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub lr: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { lambda: 1e-4, epochs: 50, lr: 0.1 }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Param("svm lambda must be >= 0".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Param("svm epochs must be >= 1".into()));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::Param("svm lr must be positive".into()));
        }
        Ok(())
    }
}

/// Linear decision function w.x + b; harmful on the non-negative side.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel<R: Real> {
    pub(crate) w: Array1<R>,
    pub(crate) b: R,
}

impl<R: Real> SvmModel<R> {
    pub(crate) fn from_parts(w: Array1<R>, b: R) -> Self {
        Self { w, b }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// The separating hyperplane's coefficient vector.
    pub fn weights(&self) -> &Array1<R> {
        &self.w
    }

    /// The separating hyperplane's intercept.
    pub fn bias(&self) -> R {
        self.b
    }

    pub fn margin(&self, x: &FeatureVector<R>) -> Result<R> {
        if x.dim() != self.w.len() {
            return Err(Error::Shape(format!(
                "svm expects dimension {}, got {}",
                self.w.len(),
                x.dim()
            )));
        }
        Ok(x.dot(&self.w) + self.b)
    }
}

fn signed(label: Label) -> f64 {
    if label.is_harmful() {
        1.0
    } else {
        -1.0
    }
}

/// Objective (lambda/2)|w|^2 + (1/N) sum w_y_i max(0, 1 - y_i (w.x_i + b))
/// and its gradient in (w, b). Off the hinge boundary this is the exact
/// gradient, which the finite-difference oracle checks.
pub fn svm_objective_gradient<R: Real>(
    xs: &[FeatureVector<R>],
    ys: &[Label],
    weights: &ClassWeights,
    lambda: f64,
    w: &Array1<R>,
    b: R,
) -> (f64, Array1<f64>, f64) {
    let n = xs.len() as f64;
    let mut grad_w: Array1<f64> = w.mapv(|x| x.to_f64() * lambda);
    let mut grad_b = 0.0;
    let mut obj = 0.5 * lambda * w.iter().map(|&x| x.to_f64().powi(2)).sum::<f64>();
    for (x, &label) in xs.iter().zip(ys) {
        let y = signed(label);
        let cw = weights.weight(label);
        let m = (x.dot(w) + b).to_f64();
        let slack = 1.0 - y * m;
        if slack > 0.0 {
            obj += cw * slack / n;
            // d/dw of -y(w.x): -y x, scaled by cw/n
            let scale = -cw * y / n;
            match x {
                FeatureVector::Dense(v) => {
                    for (g, &xi) in grad_w.iter_mut().zip(v) {
                        *g += scale * xi.to_f64();
                    }
                }
                FeatureVector::Sparse { indices, values, .. } => {
                    for (&i, &xi) in indices.iter().zip(values) {
                        grad_w[i] += scale * xi.to_f64();
                    }
                }
            }
            grad_b += scale;
        }
    }
    (obj, grad_w, grad_b)
}

/// Seeded epoch-shuffled per-example subgradient descent with learning
/// rate lr/(1 + epoch).
pub fn train_svm<R: Real>(
    xs: &[FeatureVector<R>],
    ys: &[Label],
    weights: &ClassWeights,
    config: &SvmConfig,
    seed: u64,
) -> Result<SvmModel<R>> {
    config.validate()?;
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::Shape(format!(
            "svm got {} inputs for {} labels",
            xs.len(),
            ys.len()
        )));
    }
    let dim = xs[0].dim();
    if xs.iter().any(|x| x.dim() != dim) {
        return Err(Error::Shape("svm inputs differ in dimensionality".into()));
    }
    if ys.iter().all(|y| y.is_harmful()) || ys.iter().all(|y| !y.is_harmful()) {
        return Err(Error::Degenerate(
            "svm training data contains a single class".into(),
        ));
    }
    let mut w: Array1<R> = Array1::zeros(dim);
    let mut b = R::zero();
    let mut rng = seeded_rng(mix_seed(seed, SALT_SVM));
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let lambda = R::from_f64(config.lambda);
    for epoch in 0..config.epochs {
        let eta = R::from_f64(config.lr / (1.0 + epoch as f64));
        order.shuffle(&mut rng);
        for &i in &order {
            let y = R::from_f64(signed(ys[i]));
            let cw = R::from_f64(weights.weight(ys[i]));
            let m = y * (xs[i].dot(&w) + b);
            // shrinkage applies every step; the hinge term only when active
            let decay = R::one() - eta * lambda;
            w.mapv_inplace(|x| x * decay);
            if m < R::one() {
                xs[i].add_scaled_to(&mut w, eta * cw * y);
                b += eta * cw * y;
            }
        }
    }
    if w.iter().any(|x| !x.is_finite()) || !b.is_finite() {
        return Err(Error::Numeric("non-finite svm parameters".into()));
    }
    Ok(SvmModel { w, b })
}
