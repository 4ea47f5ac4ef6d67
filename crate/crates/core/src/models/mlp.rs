//! Multilayer perceptron: dense(H, ReLU) -> dropout -> dense(1, sigmoid).
//! Consumes the flattened padded matrix (pretrained) or an index sequence
//! through a trainable embedding table (ad-hoc).

use std::borrow::Cow;

use ndarray::{Array1, Array2, ArrayView1};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models::input::{wrong_input, ModelInput};
use crate::models::net::{
    adhoc_embed_table, dropout_mask, glorot, weighted_bce, NetCore, Params, SALT_NET_INIT,
};
use crate::real::Real;
use crate::util::{mix_seed, seeded_rng};

pub(crate) const W1: usize = 0;
pub(crate) const B1: usize = 1;
pub(crate) const W2: usize = 2;
pub(crate) const B2: usize = 3;
pub(crate) const EMB: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpNet<R: Real> {
    pub(crate) params: Params<R>,
    pub(crate) maxlen: usize,
    pub(crate) d: usize,
    pub(crate) hidden: usize,
    pub(crate) dropout: f64,
    pub(crate) adhoc: bool,
}

impl<R: Real> MlpNet<R> {
    pub fn new_pretrained(
        maxlen: usize,
        d: usize,
        hidden: usize,
        dropout: f64,
        seed: u64,
    ) -> Result<Self> {
        Self::build(maxlen, d, hidden, dropout, None, seed)
    }

    /// `table_len` counts the padding row (unit count + 1).
    pub fn new_adhoc(
        maxlen: usize,
        table_len: usize,
        d: usize,
        hidden: usize,
        dropout: f64,
        seed: u64,
    ) -> Result<Self> {
        if table_len < 2 {
            return Err(Error::Param("ad-hoc table needs at least one unit".into()));
        }
        Self::build(maxlen, d, hidden, dropout, Some(table_len), seed)
    }

    fn build(
        maxlen: usize,
        d: usize,
        hidden: usize,
        dropout: f64,
        table_len: Option<usize>,
        seed: u64,
    ) -> Result<Self> {
        if maxlen == 0 || d == 0 || hidden == 0 {
            return Err(Error::Param("mlp dimensions must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::Param("dropout must be in [0, 1)".into()));
        }
        let in_dim = maxlen * d;
        let mut rng = seeded_rng(mix_seed(seed, SALT_NET_INIT));
        let mut params = Params::new();
        params.add("w1", glorot(&mut rng, in_dim, hidden, in_dim, hidden));
        params.add("b1", Array2::zeros((1, hidden)));
        params.add("w2", glorot(&mut rng, hidden, 1, hidden, 1));
        params.add("b2", Array2::zeros((1, 1)));
        if let Some(t) = table_len {
            params.add("embed", adhoc_embed_table(&mut rng, t, d));
        }
        Ok(Self {
            params,
            maxlen,
            d,
            hidden,
            dropout,
            adhoc: table_len.is_some(),
        })
    }

    pub(crate) fn from_parts(
        params: Params<R>,
        maxlen: usize,
        d: usize,
        hidden: usize,
        dropout: f64,
        adhoc: bool,
    ) -> Self {
        Self { params, maxlen, d, hidden, dropout, adhoc }
    }

    /// Flattened (maxlen*d) input row plus the index sequence if ad-hoc.
    fn gather<'a>(&self, input: &'a ModelInput<R>) -> Result<(Cow<'a, [R]>, Option<&'a [usize]>)> {
        match (self.adhoc, input) {
            (false, ModelInput::Matrix { x, len: _ }) => {
                if x.nrows() != self.maxlen || x.ncols() != self.d {
                    return Err(Error::Shape(format!(
                        "mlp expects {}x{} matrix, got {}x{}",
                        self.maxlen,
                        self.d,
                        x.nrows(),
                        x.ncols()
                    )));
                }
                let flat = x
                    .as_slice()
                    .expect("padded matrices are standard layout");
                Ok((Cow::Borrowed(flat), None))
            }
            (true, ModelInput::Indices { idx, len: _ }) => {
                if idx.len() != self.maxlen {
                    return Err(Error::Shape(format!(
                        "mlp expects {} indices, got {}",
                        self.maxlen,
                        idx.len()
                    )));
                }
                let table = &self.params.values[EMB];
                let mut flat = Vec::with_capacity(self.maxlen * self.d);
                for &i in idx {
                    if i >= table.nrows() {
                        return Err(Error::Shape(format!("index {i} outside embedding table")));
                    }
                    flat.extend(table.row(i).iter().copied());
                }
                Ok((Cow::Owned(flat), Some(idx)))
            }
            (false, other) => Err(wrong_input("matrix", other)),
            (true, other) => Err(wrong_input("indices", other)),
        }
    }

    /// (pre-activation hidden, post-relu hidden, logit-without-dropout-mask applied later)
    fn hidden_forward(&self, x: ArrayView1<R>) -> (Array1<R>, Array1<R>) {
        let w1 = &self.params.values[W1];
        let b1 = &self.params.values[B1];
        let mut z1 = x.dot(w1);
        for (z, &b) in z1.iter_mut().zip(b1.row(0)) {
            *z += b;
        }
        let a = z1.mapv(|v| v.max(R::zero()));
        (z1, a)
    }

    fn output(&self, a_dropped: &Array1<R>) -> R {
        let w2 = &self.params.values[W2];
        let b2 = self.params.values[B2][[0, 0]];
        a_dropped
            .iter()
            .zip(w2.column(0))
            .map(|(&a, &w)| a * w)
            .sum::<R>()
            + b2
    }
}

impl<R: Real> NetCore<R> for MlpNet<R> {
    fn params(&self) -> &Params<R> {
        &self.params
    }

    fn params_mut(&mut self) -> &mut Params<R> {
        &mut self.params
    }

    fn logit(&self, input: &ModelInput<R>) -> Result<R> {
        let (flat, _) = self.gather(input)?;
        let (_, a) = self.hidden_forward(ArrayView1::from(flat.as_ref()));
        Ok(self.output(&a))
    }

    fn forward_backward(
        &self,
        input: &ModelInput<R>,
        y: R,
        weight: R,
        rng: &mut ChaCha8Rng,
        grads: &mut [Array2<R>],
    ) -> Result<R> {
        let (flat, idx) = self.gather(input)?;
        let x = ArrayView1::from(flat.as_ref());
        let (z1, a) = self.hidden_forward(x);
        let mask = dropout_mask::<R>(rng, self.hidden, self.dropout);
        let ad: Array1<R> = a
            .iter()
            .zip(&mask)
            .map(|(&v, &m)| v * m)
            .collect();
        let z = self.output(&ad);
        let (loss, dz) = weighted_bce(z, y, weight);

        // output layer
        grads[B2][[0, 0]] += dz;
        let w2 = &self.params.values[W2];
        let mut dz1 = Array1::zeros(self.hidden);
        for j in 0..self.hidden {
            grads[W2][[j, 0]] += dz * ad[j];
            let da = dz * w2[[j, 0]] * mask[j];
            dz1[j] = if z1[j] > R::zero() { da } else { R::zero() };
        }
        // hidden layer
        for (g, &d1) in grads[B1].row_mut(0).iter_mut().zip(&dz1) {
            *g += d1;
        }
        let gw1 = &mut grads[W1];
        for (i, &xi) in x.iter().enumerate() {
            if xi == R::zero() {
                continue;
            }
            let mut row = gw1.row_mut(i);
            for (g, &d1) in row.iter_mut().zip(&dz1) {
                *g += xi * d1;
            }
        }
        // embedding rows (ad-hoc only); padding row 0 stays frozen
        if let Some(idx) = idx {
            let w1 = &self.params.values[W1];
            let dx = w1.dot(&dz1);
            let gemb = &mut grads[EMB];
            for (t, &row_idx) in idx.iter().enumerate() {
                if row_idx == 0 {
                    continue;
                }
                let mut row = gemb.row_mut(row_idx);
                for (g, &dv) in row.iter_mut().zip(dx.iter().skip(t * self.d).take(self.d)) {
                    *g += dv;
                }
            }
        }
        Ok(loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::net::tests_support::{check_gradients, GradCheck};
    use ndarray::Array2;

    fn matrix_input(maxlen: usize, d: usize, fill: &[(usize, usize, f64)]) -> ModelInput<f64> {
        let mut x = Array2::zeros((maxlen, d));
        for &(i, j, v) in fill {
            x[[i, j]] = v;
        }
        ModelInput::Matrix { x, len: maxlen }
    }

    #[test]
    fn gradients_match_finite_differences_pretrained() {
        let net = MlpNet::<f64>::new_pretrained(3, 4, 2, 0.0, 42).unwrap();
        let input = matrix_input(
            3,
            4,
            &[(0, 0, 0.5), (0, 3, -1.2), (1, 1, 0.8), (2, 2, 0.3), (2, 3, 0.9)],
        );
        check_gradients(GradCheck {
            net: &net,
            input: &input,
            y: 1.0,
            weight: 2.5,
            skip: &[],
            tol: 1e-4,
        });
    }

    #[test]
    fn gradients_match_finite_differences_adhoc() {
        let net = MlpNet::<f64>::new_adhoc(3, 5, 4, 2, 0.0, 43).unwrap();
        let input = ModelInput::Indices { idx: vec![2, 4, 0], len: 2 };
        // padding row of the table is frozen by contract: FD would disagree
        // there, so it is excluded and its analytic gradient must be zero
        check_gradients(GradCheck {
            net: &net,
            input: &input,
            y: 0.0,
            weight: 1.5,
            skip: &[(EMB, 0)],
            tol: 1e-4,
        });
    }

    #[test]
    fn zero_parameters_score_through_output_bias() {
        let mut net = MlpNet::<f64>::new_pretrained(2, 3, 4, 0.0, 1).unwrap();
        for v in &mut net.params.values {
            v.fill(0.0);
        }
        net.params.values[B2][[0, 0]] = 0.3;
        let a = matrix_input(2, 3, &[(0, 0, 5.0)]);
        let b = matrix_input(2, 3, &[(1, 2, -7.0)]);
        assert_eq!(net.logit(&a).unwrap(), 0.3);
        assert_eq!(net.logit(&b).unwrap(), 0.3);
    }

    #[test]
    fn input_shape_errors() {
        let net = MlpNet::<f64>::new_pretrained(2, 3, 4, 0.0, 1).unwrap();
        let wrong = matrix_input(3, 3, &[]);
        assert!(matches!(net.logit(&wrong).unwrap_err(), Error::Shape(_)));
        let idx = ModelInput::Indices { idx: vec![0, 0], len: 0 };
        assert!(matches!(net.logit(&idx).unwrap_err(), Error::Shape(_)));
    }
}
