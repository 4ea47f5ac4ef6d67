//! Convolutional net: 4x4 valid convolution (ReLU) over the padded
//! document matrix, 2x2 max-pooling with floor semantics, flatten,
//! dropout, dense(1, sigmoid).

use std::borrow::Cow;

use ndarray::{Array2, Array3};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models::input::{wrong_input, ModelInput};
use crate::models::net::{
    adhoc_embed_table, dropout_mask, glorot, weighted_bce, NetCore, Params, SALT_NET_INIT,
};
use crate::real::Real;
use crate::util::{mix_seed, seeded_rng};

pub(crate) const KERNEL: usize = 0;
pub(crate) const BC: usize = 1;
pub(crate) const WO: usize = 2;
pub(crate) const BO: usize = 3;
pub(crate) const EMB: usize = 4;

const KSIZE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CnnNet<R: Real> {
    pub(crate) params: Params<R>,
    pub(crate) maxlen: usize,
    pub(crate) d: usize,
    pub(crate) filters: usize,
    pub(crate) dropout: f64,
    pub(crate) adhoc: bool,
}

/// All convolution/pooling output sizes for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct CnnDims {
    pub hout: usize,
    pub wout: usize,
    pub ph: usize,
    pub pw: usize,
    pub flat: usize,
}

pub(crate) fn cnn_dims(maxlen: usize, d: usize, filters: usize) -> Result<CnnDims> {
    if maxlen < KSIZE + 1 || d < KSIZE + 1 {
        return Err(Error::Param(format!(
            "cnn needs maxlen >= {} and dimension >= {} (got {maxlen} x {d})",
            KSIZE + 1,
            KSIZE + 1
        )));
    }
    let hout = maxlen - (KSIZE - 1);
    let wout = d - (KSIZE - 1);
    let (ph, pw) = (hout / 2, wout / 2);
    Ok(CnnDims { hout, wout, ph, pw, flat: filters * ph * pw })
}

struct Trace<R> {
    conv: Array3<R>,
    flat: Vec<R>,
    /// winning (row, col) in the relu map for every pooled cell
    argmax: Vec<(usize, usize)>,
}

impl<R: Real> CnnNet<R> {
    pub fn new_pretrained(
        maxlen: usize,
        d: usize,
        filters: usize,
        dropout: f64,
        seed: u64,
    ) -> Result<Self> {
        Self::build(maxlen, d, filters, dropout, None, seed)
    }

    /// `table_len` counts the padding row (unit count + 1).
    pub fn new_adhoc(
        maxlen: usize,
        table_len: usize,
        d: usize,
        filters: usize,
        dropout: f64,
        seed: u64,
    ) -> Result<Self> {
        if table_len < 2 {
            return Err(Error::Param("ad-hoc table needs at least one unit".into()));
        }
        Self::build(maxlen, d, filters, dropout, Some(table_len), seed)
    }

    fn build(
        maxlen: usize,
        d: usize,
        filters: usize,
        dropout: f64,
        table_len: Option<usize>,
        seed: u64,
    ) -> Result<Self> {
        if filters == 0 {
            return Err(Error::Param("cnn needs at least one filter".into()));
        }
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::Param("dropout must be in [0, 1)".into()));
        }
        let dims = cnn_dims(maxlen, d, filters)?;
        let mut rng = seeded_rng(mix_seed(seed, SALT_NET_INIT));
        let mut params = Params::new();
        let patch = KSIZE * KSIZE;
        params.add("kernel", glorot(&mut rng, filters, patch, patch, filters));
        params.add("bc", Array2::zeros((1, filters)));
        params.add("wo", glorot(&mut rng, dims.flat, 1, dims.flat, 1));
        params.add("bo", Array2::zeros((1, 1)));
        if let Some(t) = table_len {
            params.add("embed", adhoc_embed_table(&mut rng, t, d));
        }
        Ok(Self {
            params,
            maxlen,
            d,
            filters,
            dropout,
            adhoc: table_len.is_some(),
        })
    }

    pub(crate) fn from_parts(
        params: Params<R>,
        maxlen: usize,
        d: usize,
        filters: usize,
        dropout: f64,
        adhoc: bool,
    ) -> Self {
        Self { params, maxlen, d, filters, dropout, adhoc }
    }

    fn dims(&self) -> CnnDims {
        cnn_dims(self.maxlen, self.d, self.filters).expect("validated at construction")
    }

    fn gather<'a>(
        &self,
        input: &'a ModelInput<R>,
    ) -> Result<(Cow<'a, Array2<R>>, Option<&'a [usize]>)> {
        match (self.adhoc, input) {
            (false, ModelInput::Matrix { x, len: _ }) => {
                if x.nrows() != self.maxlen || x.ncols() != self.d {
                    return Err(Error::Shape(format!(
                        "cnn expects {}x{} matrix, got {}x{}",
                        self.maxlen,
                        self.d,
                        x.nrows(),
                        x.ncols()
                    )));
                }
                Ok((Cow::Borrowed(x), None))
            }
            (true, ModelInput::Indices { idx, len: _ }) => {
                if idx.len() != self.maxlen {
                    return Err(Error::Shape(format!(
                        "cnn expects {} indices, got {}",
                        self.maxlen,
                        idx.len()
                    )));
                }
                let table = &self.params.values[EMB];
                let mut x = Array2::zeros((self.maxlen, self.d));
                for (t, &i) in idx.iter().enumerate() {
                    if i >= table.nrows() {
                        return Err(Error::Shape(format!("index {i} outside embedding table")));
                    }
                    x.row_mut(t).assign(&table.row(i));
                }
                Ok((Cow::Owned(x), Some(idx)))
            }
            (false, other) => Err(wrong_input("matrix", other)),
            (true, other) => Err(wrong_input("indices", other)),
        }
    }

    fn forward(&self, x: &Array2<R>) -> Trace<R> {
        let dims = self.dims();
        let kernel = &self.params.values[KERNEL];
        let bc = &self.params.values[BC];
        let mut conv = Array3::zeros((self.filters, dims.hout, dims.wout));
        for f in 0..self.filters {
            let krow = kernel.row(f);
            for i in 0..dims.hout {
                for j in 0..dims.wout {
                    let mut acc = bc[[0, f]];
                    for a in 0..KSIZE {
                        for b in 0..KSIZE {
                            acc += krow[a * KSIZE + b] * x[[i + a, j + b]];
                        }
                    }
                    conv[[f, i, j]] = acc;
                }
            }
        }
        let mut flat = Vec::with_capacity(dims.flat);
        let mut argmax = Vec::with_capacity(dims.flat);
        for f in 0..self.filters {
            for pi in 0..dims.ph {
                for pj in 0..dims.pw {
                    let mut best = R::neg_infinity();
                    let mut where_ = (0, 0);
                    for a in 0..2 {
                        for b in 0..2 {
                            let (i, j) = (2 * pi + a, 2 * pj + b);
                            let v = conv[[f, i, j]].max(R::zero());
                            if v > best {
                                best = v;
                                where_ = (i, j);
                            }
                        }
                    }
                    flat.push(best);
                    argmax.push(where_);
                }
            }
        }
        Trace { conv, flat, argmax }
    }

    fn output(&self, flat_dropped: &[R]) -> R {
        let wo = &self.params.values[WO];
        let bo = self.params.values[BO][[0, 0]];
        flat_dropped
            .iter()
            .zip(wo.column(0))
            .map(|(&v, &w)| v * w)
            .sum::<R>()
            + bo
    }
}

impl<R: Real> NetCore<R> for CnnNet<R> {
    fn params(&self) -> &Params<R> {
        &self.params
    }

    fn params_mut(&mut self) -> &mut Params<R> {
        &mut self.params
    }

    fn logit(&self, input: &ModelInput<R>) -> Result<R> {
        let (x, _) = self.gather(input)?;
        let trace = self.forward(&x);
        Ok(self.output(&trace.flat))
    }

    fn forward_backward(
        &self,
        input: &ModelInput<R>,
        y: R,
        weight: R,
        rng: &mut ChaCha8Rng,
        grads: &mut [Array2<R>],
    ) -> Result<R> {
        let dims = self.dims();
        let (x, idx) = self.gather(input)?;
        let trace = self.forward(&x);
        let mask = dropout_mask::<R>(rng, dims.flat, self.dropout);
        let dropped: Vec<R> = trace
            .flat
            .iter()
            .zip(&mask)
            .map(|(&v, &m)| v * m)
            .collect();
        let z = self.output(&dropped);
        let (loss, dz) = weighted_bce(z, y, weight);

        grads[BO][[0, 0]] += dz;
        let wo = &self.params.values[WO];
        let kernel = &self.params.values[KERNEL];
        let mut dx: Option<Array2<R>> = idx.map(|_| Array2::zeros((self.maxlen, self.d)));
        for (k, &pooled) in dropped.iter().enumerate() {
            grads[WO][[k, 0]] += dz * pooled;
            let dflat = dz * wo[[k, 0]] * mask[k];
            if dflat == R::zero() {
                continue;
            }
            let f = k / (dims.ph * dims.pw);
            let (i, j) = trace.argmax[k];
            if trace.conv[[f, i, j]] <= R::zero() {
                continue; // pooled value was the relu floor
            }
            grads[BC][[0, f]] += dflat;
            let krow = kernel.row(f);
            let mut gk = grads[KERNEL].row_mut(f);
            for a in 0..KSIZE {
                for b in 0..KSIZE {
                    gk[a * KSIZE + b] += dflat * x[[i + a, j + b]];
                    if let Some(dx) = dx.as_mut() {
                        dx[[i + a, j + b]] += dflat * krow[a * KSIZE + b];
                    }
                }
            }
        }
        if let (Some(idx), Some(dx)) = (idx, dx) {
            let gemb = &mut grads[EMB];
            for (t, &row_idx) in idx.iter().enumerate() {
                if row_idx == 0 {
                    continue;
                }
                let mut row = gemb.row_mut(row_idx);
                for (g, &dv) in row.iter_mut().zip(dx.row(t)) {
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
    use crate::util::seeded_rng;
    use rand::Rng;

    #[test]
    fn output_dimensions_follow_valid_convolution_and_floor_pooling() {
        let dims = cnn_dims(64, 50, 32).unwrap();
        assert_eq!(dims.hout, 61);
        assert_eq!(dims.wout, 47);
        assert_eq!(dims.ph, 30);
        assert_eq!(dims.pw, 23);
        assert_eq!(dims.flat, 32 * 30 * 23);
        // smallest legal input: one pooled cell per filter
        let dims = cnn_dims(5, 5, 3).unwrap();
        assert_eq!((dims.hout, dims.wout, dims.ph, dims.pw, dims.flat), (2, 2, 1, 1, 3));
        assert!(matches!(cnn_dims(4, 50, 1), Err(Error::Param(_))));
        assert!(matches!(cnn_dims(64, 4, 1), Err(Error::Param(_))));
    }

    #[test]
    fn single_filter_uniform_input_pools_to_kernel_sum() {
        // all-ones input, kernel of ones, zero biases: every conv cell is 16,
        // pooling keeps 16, output = 16 * wo + bo
        let mut net = CnnNet::<f64>::new_pretrained(5, 5, 1, 0.0, 9).unwrap();
        net.params.values[KERNEL].fill(1.0);
        net.params.values[BC].fill(0.0);
        net.params.values[WO].fill(0.25);
        net.params.values[BO].fill(-1.0);
        let x = Array2::from_elem((5, 5), 1.0);
        let z = net.logit(&ModelInput::Matrix { x, len: 5 }).unwrap();
        assert!((z - (16.0 * 0.25 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences_pretrained() {
        let net = CnnNet::<f64>::new_pretrained(6, 5, 2, 0.0, 11).unwrap();
        let mut rng = seeded_rng(12);
        let x = Array2::from_shape_simple_fn((6, 5), || rng.gen_range(-1.0..1.0));
        let input = ModelInput::Matrix { x, len: 6 };
        check_gradients(GradCheck {
            net: &net,
            input: &input,
            y: 1.0,
            weight: 1.8,
            skip: &[],
            tol: 1e-4,
        });
    }

    #[test]
    fn gradients_match_finite_differences_adhoc() {
        let net = CnnNet::<f64>::new_adhoc(5, 6, 5, 2, 0.0, 13).unwrap();
        let input = ModelInput::Indices { idx: vec![3, 1, 5, 2, 0], len: 4 };
        check_gradients(GradCheck {
            net: &net,
            input: &input,
            y: 0.0,
            weight: 0.7,
            skip: &[(EMB, 0)],
            tol: 1e-4,
        });
    }

    #[test]
    fn input_shape_errors() {
        let net = CnnNet::<f64>::new_pretrained(5, 5, 1, 0.0, 1).unwrap();
        let wrong = ModelInput::Matrix { x: Array2::zeros((5, 6)), len: 5 };
        assert!(matches!(net.logit(&wrong).unwrap_err(), Error::Shape(_)));
        let idx = ModelInput::Indices { idx: vec![0; 5], len: 0 };
        assert!(matches!(net.logit(&idx).unwrap_err(), Error::Shape(_)));
    }
}
