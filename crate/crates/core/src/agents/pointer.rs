use rand::Rng;

use crate::error::{Error, Result};
use crate::neural::{AttentionCache, Dense, Layout, LstmCell, LstmStep, Parametric, PointerAttention};
use crate::scalar::Scalar;
use crate::traffic::ActionMatrix;

use super::decode::decode_action;
use super::observation::{ObservationDims, StationObservation};

/// Encoder-decoder actor that points at a request for every channel.
///
/// The encoder runs over the serving requests, starting from a state produced
/// by a single affine layer over the queued requests. The decoder then runs
/// over the channels and each of its outputs attends over the encoder outputs.
#[derive(Clone, Debug)]
pub struct PointerNet<S> {
    pub dims: ObservationDims,
    pub hidden: usize,
    init: Dense,
    encoder: LstmCell,
    decoder: LstmCell,
    attention: PointerAttention,
    layout: Layout,
    params: Vec<S>,
}

/// Forward activations kept for backpropagation.
#[derive(Clone, Debug)]
pub struct PointerPass<S> {
    init_in: Vec<S>,
    enc: Vec<LstmStep<S>>,
    enc_out: Vec<Vec<S>>,
    dec: Vec<LstmStep<S>>,
    att: Vec<AttentionCache<S>>,
}

impl<S: Scalar> PointerPass<S> {
    pub fn num_requests(&self) -> usize {
        self.enc.len()
    }

    pub fn num_channels(&self) -> usize {
        self.att.len()
    }

    /// `P[k][c]`: probability that channel `c` points at request `k`.
    pub fn probs(&self) -> Vec<Vec<S>> {
        (0..self.num_requests()).map(|k| self.att.iter().map(|a| a.probs[k]).collect()).collect()
    }

    pub fn probs_f64(&self) -> Vec<Vec<f64>> {
        (0..self.num_requests()).map(|k| self.att.iter().map(|a| a.probs[k].to_f64_lossy()).collect()).collect()
    }

    /// Sum of `log P[k][c]` over the set entries of `action`.
    pub fn log_prob(&self, action: &ActionMatrix) -> S {
        let mut s = S::zero();
        for (k, c) in action.entries() {
            s += self.att[c].probs[k].ln();
        }
        s
    }

    pub fn greedy(&self, n_c: usize) -> ActionMatrix {
        decode_action(&self.probs_f64(), self.num_channels(), n_c)
    }
}

fn lift<S: Scalar>(x: &[f64]) -> Vec<S> {
    x.iter().map(|&v| S::lit(v)).collect()
}

impl<S: Scalar> PointerNet<S> {
    fn build(dims: ObservationDims, hidden: usize) -> (Dense, LstmCell, LstmCell, PointerAttention, Layout) {
        let mut b = Layout::builder();
        let init = Dense::declare(&mut b, "init", dims.init_input(), 2 * hidden);
        let encoder = LstmCell::declare(&mut b, "encoder", dims.encoder_input(), hidden);
        let decoder = LstmCell::declare(&mut b, "decoder", dims.decoder_input(), hidden);
        let attention = PointerAttention::declare(&mut b, "attention", hidden, 1.0);
        (init, encoder, decoder, attention, b.finish())
    }

    pub fn new<R: Rng + ?Sized>(dims: ObservationDims, hidden: usize, rng: &mut R) -> Self {
        let (init, encoder, decoder, attention, layout) = Self::build(dims, hidden);
        let params = layout.init(rng);
        PointerNet { dims, hidden, init, encoder, decoder, attention, layout, params }
    }

    pub fn zeros(dims: ObservationDims, hidden: usize) -> Self {
        let (init, encoder, decoder, attention, layout) = Self::build(dims, hidden);
        let params = layout.zeros();
        PointerNet { dims, hidden, init, encoder, decoder, attention, layout, params }
    }

    pub fn forward(&self, obs: &StationObservation) -> Result<PointerPass<S>> {
        let hd = self.hidden;
        let p = &self.params;
        if obs.encoder.is_empty() {
            return Err(Error::EmptySequence);
        }
        let init_in: Vec<S> = lift(&obs.init);
        if init_in.len() != self.init.n_in {
            return Err(Error::Shape { expected: self.init.n_in, got: init_in.len() });
        }
        let mut state = vec![S::zero(); 2 * hd];
        self.init.forward(p, &init_in, &mut state);
        let (mut h, mut c) = (state[..hd].to_vec(), state[hd..].to_vec());

        let mut enc = Vec::with_capacity(obs.encoder.len());
        for x in &obs.encoder {
            let st = self.encoder.step(p, &lift::<S>(x), &h, &c)?;
            h.clone_from(&st.h);
            c.clone_from(&st.c);
            enc.push(st);
        }
        let enc_out: Vec<Vec<S>> = enc.iter().map(|s| s.h.clone()).collect();

        let mut dec = Vec::with_capacity(obs.decoder.len());
        let mut att = Vec::with_capacity(obs.decoder.len());
        for x in &obs.decoder {
            let st = self.decoder.step(p, &lift::<S>(x), &h, &c)?;
            h.clone_from(&st.h);
            c.clone_from(&st.c);
            att.push(self.attention.forward(p, &enc_out, &st.h)?);
            dec.push(st);
        }
        Ok(PointerPass { init_in, enc, enc_out, dec, att })
    }

    /// Accumulates parameter gradients given `d_scores[c][k]`, the gradient of
    /// the loss with respect to the attention logits of channel `c`.
    pub fn backward(&self, pass: &PointerPass<S>, d_scores: &[Vec<S>], grads: &mut [S]) -> Result<()> {
        let hd = self.hidden;
        let p = &self.params;
        if d_scores.len() != pass.dec.len() {
            return Err(Error::StaleCache);
        }
        let n_r = pass.enc.len();
        let mut d_enc_out = vec![vec![S::zero(); hd]; n_r];
        let mut dh = vec![S::zero(); hd];
        let mut dc = vec![S::zero(); hd];
        for ci in (0..pass.dec.len()).rev() {
            let st = &pass.dec[ci];
            let (de, dd) = self.attention.backward(p, &pass.enc_out, &st.h, &pass.att[ci], &d_scores[ci], grads)?;
            for (acc, g) in d_enc_out.iter_mut().zip(de) {
                for j in 0..hd {
                    acc[j] += g[j];
                }
            }
            for j in 0..hd {
                dh[j] += dd[j];
            }
            let g = self.decoder.step_backward(p, st, &dh, &dc, grads);
            dh = g.dh_prev;
            dc = g.dc_prev;
        }
        for k in (0..n_r).rev() {
            for j in 0..hd {
                dh[j] += d_enc_out[k][j];
            }
            let g = self.encoder.step_backward(p, &pass.enc[k], &dh, &dc, grads);
            dh = g.dh_prev;
            dc = g.dc_prev;
        }
        let mut d_state = dh;
        d_state.extend(dc);
        self.init.backward(p, &pass.init_in, &d_state, grads, None);
        Ok(())
    }

    /// Gradient of `-weight * log P(action)` accumulated into `grads`.
    pub fn accumulate_policy_grad(
        &self,
        pass: &PointerPass<S>,
        action: &ActionMatrix,
        weight: S,
        grads: &mut [S],
    ) -> Result<()> {
        let n_r = pass.num_requests();
        let mut d = vec![vec![S::zero(); n_r]; pass.num_channels()];
        for c in 0..pass.num_channels() {
            if let Some(k) = action.owner_of(c) {
                let probs = &pass.att[c].probs;
                for (kk, dv) in d[c].iter_mut().enumerate() {
                    let t = if kk == k { S::one() } else { S::zero() };
                    *dv = -weight * (t - probs[kk]);
                }
            }
        }
        self.backward(pass, &d, grads)
    }
}

impl<S: Scalar> Parametric<S> for PointerNet<S> {
    fn layout(&self) -> &Layout {
        &self.layout
    }
    fn params(&self) -> &[S] {
        &self.params
    }
    fn params_mut(&mut self) -> &mut [S] {
        &mut self.params
    }
}
