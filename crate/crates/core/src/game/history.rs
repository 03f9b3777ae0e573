use std::collections::VecDeque;

use rand::Rng;

/// `E x L` matrix of bounded utility queues.
#[derive(Clone, Debug, PartialEq)]
pub struct UtilityHistory {
    pub policies: usize,
    pub classes: usize,
    pub capacity: usize,
    cells: Vec<VecDeque<f64>>,
    total: f64,
    count: u64,
}

impl UtilityHistory {
    pub fn new(policies: usize, classes: usize, capacity: usize) -> Self {
        UtilityHistory {
            policies,
            classes,
            capacity: capacity.max(1),
            cells: vec![VecDeque::new(); policies * classes],
            total: 0.0,
            count: 0,
        }
    }

    pub fn queue(&self, e: usize, l: usize) -> &VecDeque<f64> {
        &self.cells[e * self.classes + l]
    }

    pub fn push(&mut self, e: usize, l: usize, u: f64) {
        let cap = self.capacity;
        let q = &mut self.cells[e * self.classes + l];
        if q.len() == cap {
            q.pop_front();
        }
        q.push_back(u);
        self.total += u;
        self.count += 1;
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(VecDeque::is_empty)
    }

    /// Mean of every utility ever pushed, or zero.
    pub fn running_mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.total / self.count as f64
        }
    }

    /// Puts one uniform draw from `[center - spread, center + spread]` into
    /// every empty queue.
    pub fn seed<R: Rng + ?Sized>(&mut self, center: f64, spread: f64, rng: &mut R) {
        let cap = self.capacity;
        for q in self.cells.iter_mut().filter(|q| q.is_empty()) {
            let v = center + spread * (2.0 * rng.random::<f64>() - 1.0);
            if q.len() < cap {
                q.push_back(v);
            }
        }
    }

    /// Queue averages; an empty queue reads as the running mean.
    pub fn averages(&self) -> Vec<Vec<f64>> {
        let fallback = self.running_mean();
        (0..self.policies)
            .map(|e| {
                (0..self.classes)
                    .map(|l| {
                        let q = self.queue(e, l);
                        if q.is_empty() {
                            fallback
                        } else {
                            q.iter().sum::<f64>() / q.len() as f64
                        }
                    })
                    .collect()
            })
            .collect()
    }
}
