use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Number of victim observation classes.
pub const VICTIM_CLASSES: usize = 5;

fn candidates(queue: &[f64]) -> [f64; VICTIM_CLASSES] {
    let min = queue.iter().copied().fold(f64::INFINITY, f64::min);
    let min = if min.is_finite() { min } else { 0.0 };
    let mut out = [min; VICTIM_CLASSES];
    for (j, slot) in out.iter_mut().take(VICTIM_CLASSES - 1).enumerate() {
        if j < queue.len() {
            *slot = queue[queue.len() - 1 - j];
        }
    }
    out
}

/// Per-candidate squared distances for a set of `(history queue, realized rate)` pairs.
///
/// The candidates of each pair are its four most recent history entries and
/// the queue minimum; a short queue pads with its minimum.
pub fn victim_distances(pairs: &[(&[f64], f64)]) -> [f64; VICTIM_CLASSES] {
    let mut d = [0.0; VICTIM_CLASSES];
    for (queue, realized) in pairs {
        let cand = candidates(queue);
        for j in 0..VICTIM_CLASSES {
            let e = cand[j] - realized;
            d[j] += e * e;
        }
    }
    d
}

/// Index (0-based) of the smallest entry, lowest index on ties.
pub fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] < values[best] {
            best = i;
        }
    }
    best
}

/// Class (0-based) of a station's realized rates against its rate history.
pub fn classify_victim(pairs: &[(&[f64], f64)]) -> usize {
    argmin(&victim_distances(pairs))
}

/// Class 0 when the listening difference is below the running mean, else 1.
pub fn classify_jammer(difference: f64, mean: f64) -> usize {
    if difference < mean {
        0
    } else {
        1
    }
}

/// Bounded queue of past listening differences.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceQueue {
    capacity: usize,
    values: VecDeque<f64>,
}

impl DifferenceQueue {
    pub fn new(capacity: usize) -> Self {
        DifferenceQueue { capacity: capacity.max(1), values: VecDeque::new() }
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.values.is_empty()).then(|| self.values.iter().sum::<f64>() / self.values.len() as f64)
    }

    /// Classifies against the current mean, then records the value.
    pub fn classify_and_push(&mut self, difference: f64) -> usize {
        let l = match self.mean() {
            Some(m) => classify_jammer(difference, m),
            None => 1,
        };
        if self.values.len() == self.capacity {
            self.values.pop_front();
        }
        self.values.push_back(difference);
        l
    }
}

/// Number of positions where both actions are set.
pub fn correlation(a: &[bool], b: &[bool]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::Shape { expected: a.len(), got: b.len() });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| **x && **y).count())
}
