use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::ActorTraining;

use super::history::UtilityHistory;
use super::solver::solve_zero_sum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Single,
    /// Policies drawn from the maximin mix of the utility history.
    Nespe,
    /// Policies drawn uniformly, each learning only from its own experience.
    Ape,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub kind: EnsembleKind,
    pub policies: usize,
    pub classes: usize,
    pub queue_capacity: usize,
    /// Dual variable on the correlation penalty, in utility units per overlap.
    pub zeta: f64,
    /// Relative spread of the first-visit seeds.
    pub seed_spread: f64,
    /// Uniform jitter added when copying a warm-start policy into the others.
    pub warm_start_jitter: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            kind: EnsembleKind::Single,
            policies: 5,
            classes: 5,
            queue_capacity: 20,
            zeta: 0.1,
            seed_spread: 0.5,
            warm_start_jitter: 0.02,
        }
    }
}

impl EnsembleConfig {
    pub fn num_policies(&self) -> usize {
        match self.kind {
            EnsembleKind::Single => 1,
            _ => self.policies.max(1),
        }
    }

    pub fn training(&self) -> ActorTraining {
        match self.kind {
            EnsembleKind::Single => ActorTraining::Shared { zeta: 0.0 },
            EnsembleKind::Nespe => ActorTraining::Shared { zeta: self.zeta },
            EnsembleKind::Ape => ActorTraining::Isolated,
        }
    }
}

/// `u - zeta * sum_{o != e} sigma_o * rho[o]`, where `rho[o]` is the overlap
/// between policy `e` and policy `o`.
pub fn dual_reward(utility: f64, zeta: f64, sigma: &[f64], rho: &[f64], e: usize) -> f64 {
    let pen: f64 = sigma.iter().zip(rho).enumerate().filter(|(o, _)| *o != e).map(|(_, (s, r))| s * r).sum();
    utility - zeta * pen
}

/// Policy selection for one player (or one station of a player).
#[derive(Clone, Debug)]
pub struct EnsembleController {
    pub kind: EnsembleKind,
    pub history: UtilityHistory,
    pub seed_spread: f64,
    sigma: Vec<f64>,
    value: f64,
    dirty: bool,
}

impl EnsembleController {
    pub fn new(cfg: &EnsembleConfig) -> Self {
        let e = cfg.num_policies();
        let l = match cfg.kind {
            EnsembleKind::Nespe => cfg.classes.max(1),
            _ => 1,
        };
        EnsembleController {
            kind: cfg.kind,
            history: UtilityHistory::new(e, l, cfg.queue_capacity),
            seed_spread: cfg.seed_spread,
            sigma: vec![1.0 / e as f64; e],
            value: 0.0,
            dirty: true,
        }
    }

    pub fn num_policies(&self) -> usize {
        self.sigma.len()
    }

    /// Current selection probabilities.
    pub fn sigma(&mut self) -> &[f64] {
        if self.kind == EnsembleKind::Nespe && self.dirty {
            let s = solve_zero_sum(&self.history.averages());
            self.sigma = s.sigma;
            self.value = s.value;
            self.dirty = false;
        }
        &self.sigma
    }

    pub fn value(&mut self) -> f64 {
        self.sigma();
        self.value
    }

    pub fn select<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let e = self.num_policies();
        if e == 1 {
            return 0;
        }
        match self.kind {
            EnsembleKind::Single => 0,
            EnsembleKind::Ape => rng.random_range(0..e),
            EnsembleKind::Nespe => {
                let sigma = self.sigma().to_vec();
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (i, s) in sigma.iter().enumerate() {
                    acc += s;
                    if u < acc {
                        return i;
                    }
                }
                sigma.iter().rposition(|&s| s > 0.0).unwrap_or(e - 1)
            }
        }
    }

    /// Appends the utility of policy `e` under class `l`. The first call seeds
    /// every queue around the first observed utility.
    pub fn record<R: Rng + ?Sized>(&mut self, e: usize, l: usize, utility: f64, rng: &mut R) {
        if self.kind != EnsembleKind::Nespe {
            return;
        }
        let l = l.min(self.history.classes - 1);
        if self.history.is_empty() {
            let spread = self.seed_spread * utility.abs().max(1.0);
            self.history.seed(utility, spread, rng);
        }
        self.history.push(e, l, utility);
        self.dirty = true;
    }
}
