use rand::Rng;
use serde::{Deserialize, Serialize};

/// Which generator produces a slot's action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionMode {
    Actor,
    MaxRate,
    Random,
}

/// Linear epsilon decay with a max-rate share inside the exploration branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplorationSchedule {
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_max_rate: f64,
    pub train_slots: u64,
}

impl Default for ExplorationSchedule {
    fn default() -> Self {
        ExplorationSchedule { eps_start: 1.0, eps_end: 0.005, eps_max_rate: 0.1, train_slots: 10_000 }
    }
}

impl ExplorationSchedule {
    pub fn epsilon(&self, t: u64) -> f64 {
        if t >= self.train_slots || self.train_slots == 0 {
            return self.eps_end;
        }
        let frac = t as f64 / self.train_slots as f64;
        self.eps_start + (self.eps_end - self.eps_start) * frac
    }

    pub fn draw<R: Rng + ?Sized>(&self, t: u64, rng: &mut R) -> ActionMode {
        if rng.random::<f64>() >= self.epsilon(t) {
            ActionMode::Actor
        } else if rng.random::<f64>() < self.eps_max_rate {
            ActionMode::MaxRate
        } else {
            ActionMode::Random
        }
    }
}
