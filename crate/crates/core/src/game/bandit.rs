use rand::Rng;

use crate::neural::softmax;

use super::ensemble::{dual_reward, EnsembleConfig, EnsembleController, EnsembleKind};

/// Two-class matrix game where the first action beats every other action
/// under every opponent class.
#[derive(Clone, Debug, PartialEq)]
pub struct DominanceBandit {
    /// `payoff[a][l]`.
    pub payoff: Vec<Vec<f64>>,
    pub noise: f64,
    pub learning_rate: f64,
    pub zeta: f64,
    /// Initial logit bias of policy 0 toward the dominating action.
    pub head_start: f64,
}

impl Default for DominanceBandit {
    fn default() -> Self {
        DominanceBandit {
            payoff: vec![vec![1.0, 0.8], vec![0.5, 0.3], vec![0.2, 0.6]],
            noise: 0.1,
            learning_rate: 0.05,
            zeta: 0.1,
            head_start: 2.0,
        }
    }
}

impl DominanceBandit {
    pub fn num_actions(&self) -> usize {
        self.payoff.len()
    }

    pub fn num_classes(&self) -> usize {
        self.payoff.first().map_or(0, Vec::len)
    }

    /// Plays `steps` rounds of a two-policy ensemble and returns the selection
    /// probability of policy 0 after every round.
    pub fn run<R: Rng + ?Sized>(&self, steps: usize, rng: &mut R) -> Vec<f64> {
        let a_n = self.num_actions();
        let cfg = EnsembleConfig {
            kind: EnsembleKind::Nespe,
            policies: 2,
            classes: self.num_classes(),
            zeta: self.zeta,
            ..Default::default()
        };
        let mut ctl = EnsembleController::new(&cfg);
        let mut logits = vec![vec![0.0; a_n]; 2];
        logits[0][0] = self.head_start;
        let mut baseline = [0.0f64; 2];
        let mut trace = Vec::with_capacity(steps);
        for step in 0..steps {
            let sigma = ctl.sigma().to_vec();
            let e = ctl.select(rng);
            let probs = softmax(&logits[e]);
            let a = sample(&probs, rng);
            let l = rng.random_range(0..self.num_classes());
            let u = self.payoff[a][l] + self.noise * (2.0 * rng.random::<f64>() - 1.0);
            ctl.record(e, l, u, rng);

            let greedy: Vec<usize> = logits.iter().map(|z| argmax(z)).collect();
            let rho: Vec<f64> = greedy.iter().map(|&g| f64::from(u8::from(g == greedy[e]))).collect();
            let r = dual_reward(u, self.zeta, &sigma, &rho, e);
            let k = 1.0 / (step as f64 + 1.0).min(100.0);
            baseline[e] += k * (r - baseline[e]);
            let adv = r - baseline[e];
            for (i, z) in logits[e].iter_mut().enumerate() {
                let g = f64::from(u8::from(i == a)) - probs[i];
                *z += self.learning_rate * adv * g;
            }
            trace.push(ctl.sigma()[0]);
        }
        trace
    }
}

fn sample<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}
