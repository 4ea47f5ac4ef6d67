//! Single-layer LSTM read left to right over the unpadded prefix of the
//! document; the last hidden state goes through dropout into dense(1).
//! Gates use sigmoid, cell candidate and cell output use tanh, and the
//! forget-gate bias starts at 1.0.

use ndarray::{Array1, Array2, ArrayView1};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models::input::{wrong_input, ModelInput};
use crate::models::net::{
    adhoc_embed_table, dropout_mask, glorot, weighted_bce, NetCore, Params, SALT_NET_INIT,
};
use crate::real::Real;
use crate::util::{mix_seed, seeded_rng};

pub(crate) const WI: usize = 0;
pub(crate) const WF: usize = 1;
pub(crate) const WO_GATE: usize = 2;
pub(crate) const WG: usize = 3;
pub(crate) const UI: usize = 4;
pub(crate) const UF: usize = 5;
pub(crate) const UO: usize = 6;
pub(crate) const UG: usize = 7;
pub(crate) const BI: usize = 8;
pub(crate) const BF: usize = 9;
pub(crate) const BO_GATE: usize = 10;
pub(crate) const BG: usize = 11;
pub(crate) const OUT_W: usize = 12;
pub(crate) const OUT_B: usize = 13;
pub(crate) const EMB: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmNet<R: Real> {
    pub(crate) params: Params<R>,
    pub(crate) maxlen: usize,
    pub(crate) d: usize,
    pub(crate) hidden: usize,
    pub(crate) dropout: f64,
    pub(crate) adhoc: bool,
}

struct Step<R> {
    i: Array1<R>,
    f: Array1<R>,
    o: Array1<R>,
    g: Array1<R>,
    c: Array1<R>,
    tanh_c: Array1<R>,
    h: Array1<R>,
}

impl<R: Real> LstmNet<R> {
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
            return Err(Error::Param("lstm dimensions must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::Param("dropout must be in [0, 1)".into()));
        }
        let mut rng = seeded_rng(mix_seed(seed, SALT_NET_INIT));
        let mut params = Params::new();
        for name in ["wi", "wf", "wo", "wg"] {
            params.add(name, glorot(&mut rng, d, hidden, d, hidden));
        }
        for name in ["ui", "uf", "uo", "ug"] {
            params.add(name, glorot(&mut rng, hidden, hidden, hidden, hidden));
        }
        params.add("bi", Array2::zeros((1, hidden)));
        params.add("bf", Array2::from_elem((1, hidden), R::one()));
        params.add("bo", Array2::zeros((1, hidden)));
        params.add("bg", Array2::zeros((1, hidden)));
        params.add("out_w", glorot(&mut rng, hidden, 1, hidden, 1));
        params.add("out_b", Array2::zeros((1, 1)));
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

    /// Owned (steps, d) matrix covering only the unpadded prefix, plus the
    /// index prefix when ad-hoc.
    fn gather<'a>(&self, input: &'a ModelInput<R>) -> Result<(Array2<R>, Option<&'a [usize]>)> {
        match (self.adhoc, input) {
            (false, ModelInput::Matrix { x, len }) => {
                if x.nrows() != self.maxlen || x.ncols() != self.d {
                    return Err(Error::Shape(format!(
                        "lstm expects {}x{} matrix, got {}x{}",
                        self.maxlen,
                        self.d,
                        x.nrows(),
                        x.ncols()
                    )));
                }
                let steps = (*len).min(self.maxlen);
                let mut out = Array2::zeros((steps, self.d));
                for t in 0..steps {
                    out.row_mut(t).assign(&x.row(t));
                }
                Ok((out, None))
            }
            (true, ModelInput::Indices { idx, len }) => {
                if idx.len() != self.maxlen {
                    return Err(Error::Shape(format!(
                        "lstm expects {} indices, got {}",
                        self.maxlen,
                        idx.len()
                    )));
                }
                let steps = (*len).min(self.maxlen);
                let table = &self.params.values[EMB];
                let mut out = Array2::zeros((steps, self.d));
                for t in 0..steps {
                    let i = idx[t];
                    if i >= table.nrows() {
                        return Err(Error::Shape(format!("index {i} outside embedding table")));
                    }
                    out.row_mut(t).assign(&table.row(i));
                }
                Ok((out, Some(&idx[..steps])))
            }
            (false, other) => Err(wrong_input("matrix", other)),
            (true, other) => Err(wrong_input("indices", other)),
        }
    }

    fn gate(
        &self,
        w: usize,
        u: usize,
        b: usize,
        x_t: ArrayView1<R>,
        h_prev: &Array1<R>,
    ) -> Array1<R> {
        let mut a = x_t.dot(&self.params.values[w]) + h_prev.dot(&self.params.values[u]);
        for (v, &bias) in a.iter_mut().zip(self.params.values[b].row(0)) {
            *v += bias;
        }
        a
    }

    fn forward(&self, xs: &Array2<R>) -> Vec<Step<R>> {
        let h0 = Array1::zeros(self.hidden);
        let c0 = Array1::zeros(self.hidden);
        let mut steps = Vec::with_capacity(xs.nrows());
        let (mut h_prev, mut c_prev) = (h0, c0);
        for t in 0..xs.nrows() {
            let x_t = xs.row(t);
            let i = self.gate(WI, UI, BI, x_t, &h_prev).mapv(crate::real::sigmoid);
            let f = self.gate(WF, UF, BF, x_t, &h_prev).mapv(crate::real::sigmoid);
            let o = self
                .gate(WO_GATE, UO, BO_GATE, x_t, &h_prev)
                .mapv(crate::real::sigmoid);
            let g = self.gate(WG, UG, BG, x_t, &h_prev).mapv(|v| v.tanh());
            let c: Array1<R> = (0..self.hidden)
                .map(|j| f[j] * c_prev[j] + i[j] * g[j])
                .collect();
            let tanh_c = c.mapv(|v| v.tanh());
            let h: Array1<R> = (0..self.hidden).map(|j| o[j] * tanh_c[j]).collect();
            h_prev = h.clone();
            c_prev = c.clone();
            steps.push(Step { i, f, o, g, c, tanh_c, h });
        }
        steps
    }

    fn last_hidden(steps: &[Step<R>], hidden: usize) -> Array1<R> {
        steps
            .last()
            .map(|s| s.h.clone())
            .unwrap_or_else(|| Array1::zeros(hidden))
    }

    fn output(&self, h_dropped: &Array1<R>) -> R {
        let out_w = &self.params.values[OUT_W];
        let out_b = self.params.values[OUT_B][[0, 0]];
        h_dropped
            .iter()
            .zip(out_w.column(0))
            .map(|(&h, &w)| h * w)
            .sum::<R>()
            + out_b
    }
}

impl<R: Real> NetCore<R> for LstmNet<R> {
    fn params(&self) -> &Params<R> {
        &self.params
    }

    fn params_mut(&mut self) -> &mut Params<R> {
        &mut self.params
    }

    fn logit(&self, input: &ModelInput<R>) -> Result<R> {
        let (xs, _) = self.gather(input)?;
        let steps = self.forward(&xs);
        Ok(self.output(&Self::last_hidden(&steps, self.hidden)))
    }

    fn forward_backward(
        &self,
        input: &ModelInput<R>,
        y: R,
        weight: R,
        rng: &mut ChaCha8Rng,
        grads: &mut [Array2<R>],
    ) -> Result<R> {
        let (xs, idx) = self.gather(input)?;
        let steps = self.forward(&xs);
        let h_last = Self::last_hidden(&steps, self.hidden);
        let mask = dropout_mask::<R>(rng, self.hidden, self.dropout);
        let dropped: Array1<R> = h_last
            .iter()
            .zip(&mask)
            .map(|(&h, &m)| h * m)
            .collect();
        let z = self.output(&dropped);
        let (loss, dz) = weighted_bce(z, y, weight);

        grads[OUT_B][[0, 0]] += dz;
        let out_w = &self.params.values[OUT_W];
        let mut dh: Array1<R> = Array1::zeros(self.hidden);
        for j in 0..self.hidden {
            grads[OUT_W][[j, 0]] += dz * dropped[j];
            dh[j] = dz * out_w[[j, 0]] * mask[j];
        }

        let mut dc: Array1<R> = Array1::zeros(self.hidden);
        let mut dx = idx.map(|_| Array2::zeros((xs.nrows(), self.d)));
        for t in (0..steps.len()).rev() {
            let s = &steps[t];
            let one = R::one();
            let (h_prev, c_prev) = if t == 0 {
                (None, None)
            } else {
                (Some(&steps[t - 1].h), Some(&steps[t - 1].c))
            };
            // through h_t = o * tanh(c_t)
            let mut da_i = Array1::zeros(self.hidden);
            let mut da_f = Array1::zeros(self.hidden);
            let mut da_o = Array1::zeros(self.hidden);
            let mut da_g = Array1::zeros(self.hidden);
            for j in 0..self.hidden {
                let do_ = dh[j] * s.tanh_c[j];
                let dcj = dc[j] + dh[j] * s.o[j] * (one - s.tanh_c[j] * s.tanh_c[j]);
                let cp = c_prev.map_or(R::zero(), |c| c[j]);
                let df = dcj * cp;
                let di = dcj * s.g[j];
                let dg = dcj * s.i[j];
                da_i[j] = di * s.i[j] * (one - s.i[j]);
                da_f[j] = df * s.f[j] * (one - s.f[j]);
                da_o[j] = do_ * s.o[j] * (one - s.o[j]);
                da_g[j] = dg * (one - s.g[j] * s.g[j]);
                dc[j] = dcj * s.f[j]; // flows to c_{t-1}
            }
            let x_t = xs.row(t);
            for (gw, gu, gb, da) in [
                (WI, UI, BI, &da_i),
                (WF, UF, BF, &da_f),
                (WO_GATE, UO, BO_GATE, &da_o),
                (WG, UG, BG, &da_g),
            ] {
                for (g, &d1) in grads[gb].row_mut(0).iter_mut().zip(da) {
                    *g += d1;
                }
                for (a, &xa) in x_t.iter().enumerate() {
                    if xa == R::zero() {
                        continue;
                    }
                    let mut row = grads[gw].row_mut(a);
                    for (g, &d1) in row.iter_mut().zip(da) {
                        *g += xa * d1;
                    }
                }
                if let Some(hp) = h_prev {
                    for (a, &ha) in hp.iter().enumerate() {
                        let mut row = grads[gu].row_mut(a);
                        for (g, &d1) in row.iter_mut().zip(da) {
                            *g += ha * d1;
                        }
                    }
                }
            }
            if let Some(dx) = dx.as_mut() {
                let mut dxr = dx.row_mut(t);
                for (w, da) in [(WI, &da_i), (WF, &da_f), (WO_GATE, &da_o), (WG, &da_g)] {
                    let dxc = self.params.values[w].dot(da);
                    for (slot, &v) in dxr.iter_mut().zip(&dxc) {
                        *slot += v;
                    }
                }
            }
            // dh for the previous step
            let mut dh_prev: Array1<R> = Array1::zeros(self.hidden);
            for (u, da) in [(UI, &da_i), (UF, &da_f), (UO, &da_o), (UG, &da_g)] {
                let contrib = self.params.values[u].dot(da);
                for j in 0..self.hidden {
                    dh_prev[j] += contrib[j];
                }
            }
            dh = dh_prev;
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
