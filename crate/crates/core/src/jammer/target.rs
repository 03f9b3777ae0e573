use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// `(beta * before + after) / (beta + 1)` per channel.
pub fn interpolate_target(before: &[f64], after: &[f64], beta: f64) -> Vec<f64> {
    before.iter().zip(after).map(|(b, a)| (beta * b + a) / (beta + 1.0)).collect()
}

/// Per-channel absolute change between two listening vectors, summed.
pub fn listen_difference(before: &[f64], after: &[f64]) -> f64 {
    before.iter().zip(after).map(|(b, a)| (a - b).abs()).sum()
}

/// Negative squared distance between the jam set and the max-normalized target.
pub fn jam_reward(action: &[bool], target: &[f64]) -> f64 {
    let m = target.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = if m > 0.0 { 1.0 / m } else { 0.0 };
    let sq: f64 = action
        .iter()
        .zip(target)
        .map(|(&a, &t)| {
            let d = if a { 1.0 } else { 0.0 } - t * scale;
            d * d
        })
        .sum();
    -sq
}

/// Indices of the `k` largest values; ties go to the lowest index.
pub fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

pub fn indicator(n: usize, set: &[usize]) -> Vec<bool> {
    let mut v = vec![false; n];
    for &c in set {
        v[c] = true;
    }
    v
}

/// Experience-based weight between pre- and post-attack interference.
///
/// Baseline differences come from listening without attack; attack differences
/// are kept over a sliding window of recent jamming phases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimator {
    pub baseline: Vec<f64>,
    pub recent: VecDeque<f64>,
    pub window: usize,
    pub beta: f64,
}

impl BetaEstimator {
    pub fn new(window: usize, initial: f64) -> Self {
        BetaEstimator { baseline: Vec::new(), recent: VecDeque::new(), window: window.max(1), beta: initial }
    }

    pub fn push_baseline(&mut self, d: f64) {
        self.baseline.push(d);
    }

    pub fn push_attack(&mut self, d: f64) -> f64 {
        if self.recent.len() == self.window {
            self.recent.pop_front();
        }
        self.recent.push_back(d);
        self.update()
    }

    /// `max(2 * mean(attack) / mean(baseline) - 1, 0)`; unchanged when either set is empty
    /// or the baseline sum is zero.
    pub fn update(&mut self) -> f64 {
        if let Some(b) = beta_from(&self.recent.iter().copied().collect::<Vec<_>>(), &self.baseline) {
            self.beta = b;
        }
        self.beta
    }
}

/// Closed form of the estimator; `None` on an empty set or zero denominator.
pub fn beta_from(attack: &[f64], baseline: &[f64]) -> Option<f64> {
    if attack.is_empty() || baseline.is_empty() {
        return None;
    }
    let sa: f64 = attack.iter().sum();
    let sb: f64 = baseline.iter().sum();
    let den = attack.len() as f64 * sb;
    if den == 0.0 {
        return None;
    }
    Some((2.0 * baseline.len() as f64 * sa / den - 1.0).max(0.0))
}

/// The jammer's most recent `period` observation vectors: the last jam
/// indicator followed by the listening vectors since.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationWindow {
    pub num_channels: usize,
    pub period: usize,
    slots: VecDeque<Vec<f64>>,
}

impl ObservationWindow {
    pub fn new(num_channels: usize, period: usize) -> Self {
        ObservationWindow { num_channels, period, slots: VecDeque::with_capacity(period) }
    }

    fn push(&mut self, v: Vec<f64>) {
        if self.slots.len() == self.period {
            self.slots.pop_front();
        }
        self.slots.push_back(v);
    }

    pub fn push_jam(&mut self, action: &[bool]) {
        self.push(action.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect());
    }

    /// Listening vectors are scaled by their maximum.
    pub fn push_listen(&mut self, listen: &[f64]) {
        let m = listen.iter().copied().fold(0.0, f64::max);
        let s = if m > 0.0 { 1.0 / m } else { 0.0 };
        self.push(listen.iter().map(|x| x * s).collect());
    }

    pub fn is_complete(&self) -> bool {
        self.slots.len() == self.period
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.slots.iter().flatten().copied().collect()
    }
}
