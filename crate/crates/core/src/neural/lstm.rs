use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::params::{gemv_acc, gemv_backward, LayoutBuilder, Span};

#[inline]
pub fn sigmoid<S: Scalar>(x: S) -> S {
    S::one() / (S::one() + (-x).exp())
}

/// LSTM cell with gates stacked as `[input, forget, candidate, output]`.
///
/// The weight matrix acts on the concatenation `[x; h_prev]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LstmCell {
    pub n_in: usize,
    pub hidden: usize,
    pub weight: Span,
    pub bias: Span,
}

/// Everything one step needs for backpropagation.
#[derive(Clone, Debug)]
pub struct LstmStep<S> {
    /// `[x; h_prev]`
    pub xh: Vec<S>,
    pub c_prev: Vec<S>,
    /// Activated gates, `4 * hidden` long.
    pub gates: Vec<S>,
    pub c: Vec<S>,
    pub tanh_c: Vec<S>,
    pub h: Vec<S>,
}

/// Gradients flowing out of one backward step.
#[derive(Clone, Debug)]
pub struct LstmStepGrad<S> {
    pub dx: Vec<S>,
    pub dh_prev: Vec<S>,
    pub dc_prev: Vec<S>,
}

impl LstmCell {
    pub fn declare(b: &mut LayoutBuilder, name: &str, n_in: usize, hidden: usize) -> Self {
        let fan_in = n_in + hidden;
        let weight = b.matrix(format!("{name}.weight"), 4 * hidden, fan_in, fan_in);
        let bias = b.vector(format!("{name}.bias"), 4 * hidden, fan_in);
        LstmCell { n_in, hidden, weight, bias }
    }

    pub fn step<S: Scalar>(&self, p: &[S], x: &[S], h_prev: &[S], c_prev: &[S]) -> Result<LstmStep<S>> {
        let hd = self.hidden;
        if x.len() != self.n_in {
            return Err(Error::Shape { expected: self.n_in, got: x.len() });
        }
        if h_prev.len() != hd || c_prev.len() != hd {
            return Err(Error::Shape { expected: hd, got: h_prev.len().min(c_prev.len()) });
        }
        let mut xh = Vec::with_capacity(self.n_in + hd);
        xh.extend_from_slice(x);
        xh.extend_from_slice(h_prev);
        let mut z = self.bias.of(p).to_vec();
        gemv_acc(self.weight.of(p), 4 * hd, self.n_in + hd, &xh, &mut z);
        let mut gates = z;
        for j in 0..hd {
            gates[j] = sigmoid(gates[j]);
            gates[hd + j] = sigmoid(gates[hd + j]);
            gates[2 * hd + j] = gates[2 * hd + j].tanh();
            gates[3 * hd + j] = sigmoid(gates[3 * hd + j]);
        }
        let mut c = vec![S::zero(); hd];
        let mut tanh_c = vec![S::zero(); hd];
        let mut h = vec![S::zero(); hd];
        for j in 0..hd {
            c[j] = gates[hd + j] * c_prev[j] + gates[j] * gates[2 * hd + j];
            tanh_c[j] = c[j].tanh();
            h[j] = gates[3 * hd + j] * tanh_c[j];
        }
        Ok(LstmStep { xh, c_prev: c_prev.to_vec(), gates, c, tanh_c, h })
    }

    /// One step of backpropagation through time. `dh` and `dc` are the total
    /// gradients arriving at this step's hidden and cell outputs.
    pub fn step_backward<S: Scalar>(
        &self,
        p: &[S],
        cache: &LstmStep<S>,
        dh: &[S],
        dc: &[S],
        grads: &mut [S],
    ) -> LstmStepGrad<S> {
        let hd = self.hidden;
        let g = &cache.gates;
        let mut dz = vec![S::zero(); 4 * hd];
        let mut dc_prev = vec![S::zero(); hd];
        for j in 0..hd {
            let (i, f, cand, o) = (g[j], g[hd + j], g[2 * hd + j], g[3 * hd + j]);
            let tc = cache.tanh_c[j];
            let do_ = dh[j] * tc;
            let dct = dc[j] + dh[j] * o * (S::one() - tc * tc);
            let di = dct * cand;
            let df = dct * cache.c_prev[j];
            let dg = dct * i;
            dc_prev[j] = dct * f;
            dz[j] = di * i * (S::one() - i);
            dz[hd + j] = df * f * (S::one() - f);
            dz[2 * hd + j] = dg * (S::one() - cand * cand);
            dz[3 * hd + j] = do_ * o * (S::one() - o);
        }
        for (gb, d) in self.bias.of_mut(grads).iter_mut().zip(&dz) {
            *gb += *d;
        }
        let mut dxh = vec![S::zero(); self.n_in + hd];
        let w = self.weight.of(p);
        gemv_backward(w, 4 * hd, self.n_in + hd, &cache.xh, &dz, &mut grads[self.weight.range()], Some(&mut dxh));
        let dh_prev = dxh.split_off(self.n_in);
        LstmStepGrad { dx: dxh, dh_prev, dc_prev }
    }
}
