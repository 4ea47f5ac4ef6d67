//! Adam optimizer over named parameter tensors.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self { lr: 0.001, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl AdamParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::Param("adam lr must be positive".into()));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b.is_finite() && (0.0..1.0).contains(&b)) {
                return Err(Error::Param(format!("adam {name} must be in [0,1)")));
            }
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::Param("adam eps must be positive".into()));
        }
        Ok(())
    }
}

/// Moment estimates for a list of tensors plus the shared step counter.
#[derive(Debug, Clone)]
pub struct AdamState<R: Real> {
    pub params: AdamParams,
    pub t: u64,
    m: Vec<Array2<R>>,
    v: Vec<Array2<R>>,
}

impl<R: Real> AdamState<R> {
    /// Zero-initialized moments shaped like `tensors`.
    pub fn new(params: AdamParams, tensors: &[Array2<R>]) -> Self {
        let m = tensors.iter().map(|t| Array2::zeros(t.raw_dim())).collect();
        let v = tensors.iter().map(|t| Array2::zeros(t.raw_dim())).collect();
        Self { params, t: 0, m, v }
    }
}

/// One Adam step over every tensor: t += 1, then per coordinate
/// m = b1*m + (1-b1)*g, v = b2*v + (1-b2)*g^2, and
/// theta -= lr * (m/(1-b1^t)) / (sqrt(v/(1-b2^t)) + eps).
pub fn adam_update<R: Real>(
    state: &mut AdamState<R>,
    tensors: &mut [Array2<R>],
    grads: &[Array2<R>],
) -> Result<()> {
    if tensors.len() != grads.len() || tensors.len() != state.m.len() {
        return Err(Error::Shape(format!(
            "adam got {} tensors, {} grads, state for {}",
            tensors.len(),
            grads.len(),
            state.m.len()
        )));
    }
    state.t += 1;
    let p = state.params;
    let (b1, b2) = (R::from_f64(p.beta1), R::from_f64(p.beta2));
    let one = R::one();
    let bc1 = R::from_f64(1.0 - p.beta1.powi(state.t as i32));
    let bc2 = R::from_f64(1.0 - p.beta2.powi(state.t as i32));
    let lr = R::from_f64(p.lr);
    let eps = R::from_f64(p.eps);
    for ((theta, g), (m, v)) in tensors
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        if theta.raw_dim() != g.raw_dim() {
            return Err(Error::Shape("adam tensor/grad shape mismatch".into()));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite gradient".into()));
        }
        ndarray::Zip::from(theta)
            .and(g)
            .and(m)
            .and(v)
            .for_each(|th, &g, m, v| {
                *m = b1 * *m + (one - b1) * g;
                *v = b2 * *v + (one - b2) * g * g;
                let mh = *m / bc1;
                let vh = *v / bc2;
                *th = *th - lr * mh / (vh.sqrt() + eps);
            });
    }
    Ok(())
}
