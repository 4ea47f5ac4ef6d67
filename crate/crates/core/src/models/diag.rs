//! Numerical diagnostics for the network models: the per-example training
//! loss and its exact parameter gradients, with read/write access to the
//! parameter tensors. This is the surface finite-difference audits poke
//! at; the training loop itself never goes through here.
//!
//! Everything requires dropout 0 — with an active dropout mask the
//! per-example loss is stochastic and finite differences are meaningless.
//! The SVM is not covered: its objective and gradient are already public
//! as [`svm_objective_gradient`](crate::models::svm_objective_gradient).

use ndarray::Array2;

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::models::input::ModelInput;
use crate::models::net::{weighted_bce, NetCore};
use crate::models::{cnn, lstm, mlp, NetworkModel};
use crate::real::Real;
use crate::util::seeded_rng;

fn core<R: Real>(model: &NetworkModel<R>) -> Result<&dyn NetCore<R>> {
    match model {
        NetworkModel::Svm(_) => Err(Error::Param(
            "the SVM has no network parameters; use svm_objective_gradient".into(),
        )),
        NetworkModel::Mlp(m) => Ok(m),
        NetworkModel::Cnn(m) => Ok(m),
        NetworkModel::Lstm(m) => Ok(m),
    }
}

fn dropout<R: Real>(model: &NetworkModel<R>) -> f64 {
    match model {
        NetworkModel::Svm(_) => 0.0,
        NetworkModel::Mlp(m) => m.dropout,
        NetworkModel::Cnn(m) => m.dropout,
        NetworkModel::Lstm(m) => m.dropout,
    }
}

fn require_deterministic<R: Real>(model: &NetworkModel<R>) -> Result<()> {
    if dropout(model) != 0.0 {
        return Err(Error::Param(
            "per-example diagnostics need dropout 0; rebuild the network without dropout".into(),
        ));
    }
    Ok(())
}

fn target<R: Real>(label: Label) -> R {
    if label.is_harmful() {
        R::one()
    } else {
        R::zero()
    }
}

/// Names of the parameter tensors, aligned with [`param_tensors`].
pub fn param_names<R: Real>(model: &NetworkModel<R>) -> Result<Vec<&'static str>> {
    Ok(core(model)?.params().names.clone())
}

pub fn param_tensors<R: Real>(model: &NetworkModel<R>) -> Result<&[Array2<R>]> {
    Ok(&core(model)?.params().values)
}

/// Mutable tensor access, for perturbation studies. Shapes must not change.
pub fn param_tensors_mut<R: Real>(model: &mut NetworkModel<R>) -> Result<&mut [Array2<R>]> {
    let m: &mut dyn NetCore<R> = match model {
        NetworkModel::Svm(_) => {
            return Err(Error::Param(
                "the SVM has no network parameters; use svm_objective_gradient".into(),
            ))
        }
        NetworkModel::Mlp(m) => m,
        NetworkModel::Cnn(m) => m,
        NetworkModel::Lstm(m) => m,
    };
    Ok(&mut m.params_mut().values)
}

/// Rows the trainer holds fixed — the ad-hoc padding embedding. Their
/// analytic gradient is defined as zero even though the loss depends on
/// them, so finite-difference checks must skip these coordinates.
pub fn frozen_rows<R: Real>(model: &NetworkModel<R>) -> Vec<(usize, usize)> {
    if !model.is_adhoc() {
        return Vec::new();
    }
    match model {
        NetworkModel::Svm(_) => Vec::new(),
        NetworkModel::Mlp(_) => vec![(mlp::EMB, 0)],
        NetworkModel::Cnn(_) => vec![(cnn::EMB, 0)],
        NetworkModel::Lstm(_) => vec![(lstm::EMB, 0)],
    }
}

/// Class-weighted binary cross-entropy of one example, dropout off.
pub fn example_loss<R: Real>(
    model: &NetworkModel<R>,
    input: &ModelInput<R>,
    label: Label,
    weight: f64,
) -> Result<f64> {
    require_deterministic(model)?;
    let z = core(model)?.logit(input)?;
    let (loss, _) = weighted_bce(z, target::<R>(label), R::from_f64(weight));
    Ok(loss.to_f64())
}

/// The example loss together with dLoss/dtheta for every parameter
/// tensor, in [`param_tensors`] order.
pub fn example_gradients<R: Real>(
    model: &NetworkModel<R>,
    input: &ModelInput<R>,
    label: Label,
    weight: f64,
) -> Result<(f64, Vec<Array2<R>>)> {
    require_deterministic(model)?;
    let c = core(model)?;
    let mut grads = c.params().zero_grads();
    // the rng feeds only dropout masks, which dropout 0 never draws
    let mut rng = seeded_rng(0);
    let loss = c.forward_backward(input, target::<R>(label), R::from_f64(weight), &mut rng, &mut grads)?;
    Ok((loss.to_f64(), grads))
}
