use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::params::{LayoutBuilder, Span};

/// Numerically stable softmax.
pub fn softmax<S: Scalar>(u: &[S]) -> Vec<S> {
    let m = u.iter().copied().fold(S::neg_infinity(), S::max);
    let mut out: Vec<S> = u.iter().map(|&x| (x - m).exp()).collect();
    let z: S = out.iter().copied().sum();
    for o in &mut out {
        *o /= z;
    }
    out
}

/// Reduced attention head: `u_k = v * sum_j tanh(w1_j e_kj + w2_j d_j)`.
///
/// `w1` and `w2` are trainable vectors applied elementwise, `v` is a fixed scalar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointerAttention {
    pub hidden: usize,
    pub w1: Span,
    pub w2: Span,
    pub v: f64,
}

#[derive(Clone, Debug)]
pub struct AttentionCache<S> {
    /// `tanh(w1 * e_k + w2 * d)` per encoder position.
    pub act: Vec<Vec<S>>,
    pub scores: Vec<S>,
    pub probs: Vec<S>,
}

impl PointerAttention {
    pub fn declare(b: &mut LayoutBuilder, name: &str, hidden: usize, v: f64) -> Self {
        let w1 = b.vector(format!("{name}.w1"), hidden, hidden);
        let w2 = b.vector(format!("{name}.w2"), hidden, hidden);
        PointerAttention { hidden, w1, w2, v }
    }

    pub fn forward<S: Scalar>(&self, p: &[S], enc: &[Vec<S>], dec: &[S]) -> Result<AttentionCache<S>> {
        if enc.is_empty() {
            return Err(Error::EmptySequence);
        }
        if dec.len() != self.hidden {
            return Err(Error::Shape { expected: self.hidden, got: dec.len() });
        }
        let (w1, w2) = (self.w1.of(p), self.w2.of(p));
        let v = S::lit(self.v);
        let mut act = Vec::with_capacity(enc.len());
        let mut scores = Vec::with_capacity(enc.len());
        for e in enc {
            if e.len() != self.hidden {
                return Err(Error::Shape { expected: self.hidden, got: e.len() });
            }
            let a: Vec<S> = (0..self.hidden).map(|j| (w1[j] * e[j] + w2[j] * dec[j]).tanh()).collect();
            scores.push(v * a.iter().copied().sum());
            act.push(a);
        }
        let probs = softmax(&scores);
        Ok(AttentionCache { act, scores, probs })
    }

    /// Backpropagates gradients w.r.t. the scores `u`; returns `(d enc, d dec)`.
    pub fn backward<S: Scalar>(
        &self,
        p: &[S],
        enc: &[Vec<S>],
        dec: &[S],
        cache: &AttentionCache<S>,
        du: &[S],
        grads: &mut [S],
    ) -> Result<(Vec<Vec<S>>, Vec<S>)> {
        if cache.act.len() != enc.len() || du.len() != enc.len() {
            return Err(Error::StaleCache);
        }
        let hd = self.hidden;
        let (w1, w2) = (self.w1.of(p).to_vec(), self.w2.of(p).to_vec());
        let v = S::lit(self.v);
        let mut d_enc = vec![vec![S::zero(); hd]; enc.len()];
        let mut d_dec = vec![S::zero(); hd];
        let (o1, o2) = (self.w1.offset, self.w2.offset);
        for (k, e) in enc.iter().enumerate() {
            if du[k] == S::zero() {
                continue;
            }
            for j in 0..hd {
                let a = cache.act[k][j];
                let g = du[k] * v * (S::one() - a * a);
                grads[o1 + j] += g * e[j];
                grads[o2 + j] += g * dec[j];
                d_enc[k][j] += g * w1[j];
                d_dec[j] += g * w2[j];
            }
        }
        Ok((d_enc, d_dec))
    }
}

/// Gradient of `sum_k target_k * log p_k` w.r.t. the softmax logits, where
/// `target` holds the multiplicities of the chosen entries.
pub fn log_softmax_grad<S: Scalar>(probs: &[S], target: &[S]) -> Vec<S> {
    let total: S = target.iter().copied().sum();
    probs.iter().zip(target).map(|(&p, &t)| t - total * p).collect()
}
