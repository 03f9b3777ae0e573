use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::params::{gemv_acc, gemv_backward, Layout, LayoutBuilder, Parametric, Span};

/// Affine map `y = W x + b` over a span of a flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    pub weight: Span,
    pub bias: Span,
}

impl Dense {
    pub fn declare(b: &mut LayoutBuilder, name: &str, n_in: usize, n_out: usize) -> Self {
        let weight = b.matrix(format!("{name}.weight"), n_out, n_in, n_in);
        let bias = b.vector(format!("{name}.bias"), n_out, n_in);
        Dense { n_in, n_out, weight, bias }
    }

    pub fn forward<S: Scalar>(&self, p: &[S], x: &[S], y: &mut [S]) {
        y.copy_from_slice(self.bias.of(p));
        gemv_acc(self.weight.of(p), self.n_out, self.n_in, x, y);
    }

    /// Accumulates parameter gradients and, optionally, the input gradient.
    pub fn backward<S: Scalar>(&self, p: &[S], x: &[S], dy: &[S], grads: &mut [S], dx: Option<&mut [S]>) {
        for (g, d) in self.bias.of_mut(grads).iter_mut().zip(dy) {
            *g += *d;
        }
        let (w, dw) = (self.weight.of(p), &mut grads[self.weight.range()]);
        gemv_backward(w, self.n_out, self.n_in, x, dy, dw, dx);
    }
}

/// Feed-forward stack: ReLU on every hidden layer, linear output.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Activations recorded by [`Mlp::forward`]; `acts[0]` is the input.
#[derive(Clone, Debug)]
pub struct MlpCache<S> {
    pub acts: Vec<Vec<S>>,
}

impl<S: Scalar> MlpCache<S> {
    pub fn output(&self) -> &[S] {
        self.acts.last().expect("cache holds at least the input")
    }
}

impl Mlp {
    /// `sizes = [input, hidden..., output]`.
    pub fn declare(b: &mut LayoutBuilder, name: &str, sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output sizes");
        let layers =
            sizes.windows(2).enumerate().map(|(i, w)| Dense::declare(b, &format!("{name}.{i}"), w[0], w[1])).collect();
        Mlp { layers }
    }

    pub fn n_in(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn n_out(&self) -> usize {
        self.layers.last().map(|l| l.n_out).unwrap_or(0)
    }

    pub fn forward<S: Scalar>(&self, p: &[S], x: &[S]) -> Result<MlpCache<S>> {
        if x.len() != self.n_in() {
            return Err(Error::Shape { expected: self.n_in(), got: x.len() });
        }
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut y = vec![S::zero(); layer.n_out];
            layer.forward(p, acts.last().unwrap(), &mut y);
            if i < last {
                for v in &mut y {
                    if *v < S::zero() {
                        *v = S::zero();
                    }
                }
            }
            acts.push(y);
        }
        Ok(MlpCache { acts })
    }

    /// Backpropagates `dy` (gradient w.r.t. the output) and returns the input gradient.
    pub fn backward<S: Scalar>(&self, p: &[S], cache: &MlpCache<S>, dy: &[S], grads: &mut [S]) -> Result<Vec<S>> {
        if cache.acts.len() != self.layers.len() + 1 {
            return Err(Error::StaleCache);
        }
        if dy.len() != self.n_out() {
            return Err(Error::Shape { expected: self.n_out(), got: dy.len() });
        }
        let mut delta = dy.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let x = &cache.acts[i];
            let mut dx = vec![S::zero(); layer.n_in];
            layer.backward(p, x, &delta, grads, Some(&mut dx));
            if i > 0 {
                // x is a ReLU output here, so the mask is x > 0.
                for (d, a) in dx.iter_mut().zip(x) {
                    if *a <= S::zero() {
                        *d = S::zero();
                    }
                }
            }
            delta = dx;
        }
        Ok(delta)
    }
}

/// Stand-alone feed-forward network that owns its parameters.
#[derive(Clone, Debug)]
pub struct Ffn<S> {
    pub mlp: Mlp,
    layout: Layout,
    params: Vec<S>,
}

impl<S: Scalar> Ffn<S> {
    pub fn new<R: rand::Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        let mut b = Layout::builder();
        let mlp = Mlp::declare(&mut b, "ffn", sizes);
        let layout = b.finish();
        let params = layout.init(rng);
        Ffn { mlp, layout, params }
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        let mut b = Layout::builder();
        let mlp = Mlp::declare(&mut b, "ffn", sizes);
        let layout = b.finish();
        let params = layout.zeros();
        Ffn { mlp, layout, params }
    }

    pub fn forward(&self, x: &[S]) -> Result<MlpCache<S>> {
        self.mlp.forward(&self.params, x)
    }

    pub fn predict(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(self.forward(x)?.acts.pop().unwrap_or_default())
    }

    pub fn backward(&self, cache: &MlpCache<S>, dy: &[S], grads: &mut [S]) -> Result<Vec<S>> {
        self.mlp.backward(&self.params, cache, dy, grads)
    }
}

impl<S: Scalar> Parametric<S> for Ffn<S> {
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

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let net = Ffn::<f64>::zeros(&[3, 5, 2]);
        assert_eq!(net.predict(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer() {
        let mut net = Ffn::<f64>::zeros(&[1, 1]);
        net.params_mut()[0] = 1.0;
        assert_eq!(net.predict(&[3.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn matches_hand_computed_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let net = Ffn::<f64>::new(&[4, 3, 1], &mut rng);
        let x = [0.3, -1.2, 0.5, 2.0];
        let p = net.params();
        // Layout order: w0 (3x4), b0 (3), w1 (1x3), b1 (1).
        let (w0, rest) = p.split_at(12);
        let (b0, rest) = rest.split_at(3);
        let (w1, b1) = rest.split_at(3);
        let mut hidden = [0.0; 3];
        for r in 0..3 {
            let mut z = b0[r];
            for c in 0..4 {
                z += w0[r * 4 + c] * x[c];
            }
            hidden[r] = z.max(0.0);
        }
        let mut y = b1[0];
        for c in 0..3 {
            y += w1[c] * hidden[c];
        }
        let got = net.predict(&x).unwrap()[0];
        assert!((got - y).abs() < 1e-12, "{got} vs {y}");
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let net = Ffn::<f64>::zeros(&[2, 1]);
        assert!(matches!(net.forward(&[1.0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn single_weight_chain_rule() {
        let mut net = Ffn::<f64>::zeros(&[1, 1]);
        net.params_mut()[0] = 0.7;
        let cache = net.forward(&[2.0]).unwrap();
        let mut g = net.zero_grads();
        net.backward(&cache, &[1.0], &mut g).unwrap();
        assert_eq!(g[0], 2.0);
        assert_eq!(g[1], 1.0);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Ffn::<f64>::new(&[3, 4, 2], &mut rng);
        let cache = net.forward(&[0.1, 0.2, 0.3]).unwrap();
        let mut g = net.zero_grads();
        net.backward(&cache, &[0.0, 0.0], &mut g).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn f32_network_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Ffn::<f32>::new(&[2, 3, 1], &mut rng);
        assert!(net.predict(&[0.5, 0.5]).unwrap()[0].is_finite());
    }
}
