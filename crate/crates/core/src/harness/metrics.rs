use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::traffic::RequestId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Train,
    Test,
}

/// One per-slot CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotRow {
    pub slot: u64,
    pub phase: Phase,
    pub reward: f64,
    pub moving_avg: f64,
    pub successes: usize,
    pub failures: usize,
    pub admitted: usize,
    pub denied: usize,
    pub jammed: usize,
    pub jam_reward: Option<f64>,
    pub td_sq: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub slot: u64,
    pub bs: usize,
    pub request: RequestId,
    pub success: bool,
    pub reward: f64,
}

/// Selection probabilities of one ensemble at one slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSnapshot {
    pub slot: u64,
    pub owner: String,
    pub sigma: Vec<f64>,
    pub utility: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub slots: u64,
    pub avg_reward: f64,
    pub successes: u64,
    pub failures: u64,
    pub completion_ratio: f64,
    pub per_bs_reward: Vec<f64>,
    pub avg_jam_reward: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub seed: u64,
    pub victim: String,
    pub jammer: Option<String>,
    pub victim_ensemble: String,
    pub jammer_ensemble: Option<String>,
    pub jammer_position: Option<(f64, f64)>,
    pub train: PhaseSummary,
    pub test: PhaseSummary,
    pub invariant_violations: Vec<String>,
}

/// Ratio of successes over resolved requests; zero when nothing resolved.
pub fn completion_ratio(successes: u64, failures: u64) -> f64 {
    let n = successes + failures;
    if n == 0 {
        0.0
    } else {
        successes as f64 / n as f64
    }
}

#[derive(Clone, Debug)]
pub struct MovingAverage {
    window: usize,
    values: VecDeque<f64>,
    sum: f64,
}

impl MovingAverage {
    pub fn new(window: usize) -> Self {
        MovingAverage { window: window.max(1), values: VecDeque::new(), sum: 0.0 }
    }

    pub fn push(&mut self, v: f64) -> f64 {
        if self.values.len() == self.window {
            self.sum -= self.values.pop_front().unwrap_or(0.0);
        }
        self.values.push_back(v);
        self.sum += v;
        self.value()
    }

    pub fn value(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.sum / self.values.len() as f64
        }
    }
}

#[derive(Clone, Debug, Default)]
struct PhaseAcc {
    slots: u64,
    reward: f64,
    successes: u64,
    failures: u64,
    per_bs: Vec<f64>,
    jam_reward: f64,
    jam_count: u64,
}

impl PhaseAcc {
    fn summary(&self) -> PhaseSummary {
        let n = self.slots.max(1) as f64;
        PhaseSummary {
            slots: self.slots,
            avg_reward: self.reward / n,
            successes: self.successes,
            failures: self.failures,
            completion_ratio: completion_ratio(self.successes, self.failures),
            per_bs_reward: self.per_bs.iter().map(|r| r / n).collect(),
            avg_jam_reward: (self.jam_count > 0).then(|| self.jam_reward / self.jam_count as f64),
        }
    }
}

/// Append-only metric streams of one run.
#[derive(Clone, Debug)]
pub struct MetricsLog {
    pub rows: Vec<SlotRow>,
    pub outcomes: Vec<Outcome>,
    pub snapshots: Vec<EnsembleSnapshot>,
    ma: MovingAverage,
    train: PhaseAcc,
    test: PhaseAcc,
}

impl MetricsLog {
    pub fn new(num_bs: usize, window: usize) -> Self {
        let acc = PhaseAcc { per_bs: vec![0.0; num_bs], ..Default::default() };
        MetricsLog {
            rows: Vec::new(),
            outcomes: Vec::new(),
            snapshots: Vec::new(),
            ma: MovingAverage::new(window),
            train: acc.clone(),
            test: acc,
        }
    }

    pub fn push_outcome(&mut self, phase: Phase, o: Outcome) {
        let acc = self.acc(phase);
        if o.success {
            acc.successes += 1;
        } else {
            acc.failures += 1;
        }
        acc.per_bs[o.bs] += o.reward;
        self.outcomes.push(o);
    }

    /// Closes a slot. `reward` must equal the rewards of the outcomes pushed for it.
    pub fn push_slot(&mut self, mut row: SlotRow) {
        row.moving_avg = self.ma.push(row.reward);
        let acc = self.acc(row.phase);
        acc.slots += 1;
        acc.reward += row.reward;
        if let Some(r) = row.jam_reward {
            acc.jam_reward += r;
            acc.jam_count += 1;
        }
        self.rows.push(row);
    }

    fn acc(&mut self, phase: Phase) -> &mut PhaseAcc {
        match phase {
            Phase::Train => &mut self.train,
            Phase::Test => &mut self.test,
        }
    }

    pub fn phase_summary(&self, phase: Phase) -> PhaseSummary {
        match phase {
            Phase::Train => self.train.summary(),
            Phase::Test => self.test.summary(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_outcomes_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for o in &self.outcomes {
            w.serialize(o)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Completion ratio recomputed from the raw outcome log for the slots in `[from, to)`.
pub fn replay_completion_ratio(outcomes: &[Outcome], from: u64, to: u64) -> f64 {
    let (mut s, mut f) = (0, 0);
    for o in outcomes.iter().filter(|o| o.slot >= from && o.slot < to) {
        if o.success {
            s += 1;
        } else {
            f += 1;
        }
    }
    completion_ratio(s, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moving_average_window() {
        let mut m = MovingAverage::new(2);
        assert_eq!(m.push(1.0), 1.0);
        assert_eq!(m.push(3.0), 2.0);
        assert_eq!(m.push(5.0), 4.0);
    }

    #[test]
    fn ratio_of_nothing_is_zero() {
        assert_eq!(completion_ratio(0, 0), 0.0);
        assert_eq!(completion_ratio(3, 1), 0.75);
    }
}
