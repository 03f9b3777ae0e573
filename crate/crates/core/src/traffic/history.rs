use std::collections::VecDeque;

/// Per `(user, channel)` bounded queue of the most recent realized rates.
#[derive(Clone, Debug, PartialEq)]
pub struct RateHistory {
    num_users: usize,
    num_channels: usize,
    depth: usize,
    queues: Vec<VecDeque<f64>>,
}

impl RateHistory {
    pub fn new(num_users: usize, num_channels: usize, depth: usize) -> Self {
        assert!(depth >= 1, "history depth must be at least one");
        RateHistory {
            num_users,
            num_channels,
            depth,
            queues: vec![VecDeque::with_capacity(depth); num_users * num_channels],
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn queue(&self, user: usize, channel: usize) -> &VecDeque<f64> {
        &self.queues[user * self.num_channels + channel]
    }

    /// Latest recorded rate, `0` when the pair was never used.
    #[inline]
    pub fn latest(&self, user: usize, channel: usize) -> f64 {
        self.queue(user, channel).back().copied().unwrap_or(0.0)
    }

    pub fn latest_row(&self, user: usize) -> Vec<f64> {
        (0..self.num_channels).map(|c| self.latest(user, c)).collect()
    }

    pub fn push(&mut self, user: usize, channel: usize, rate: f64) {
        let q = &mut self.queues[user * self.num_channels + channel];
        if q.len() == self.depth {
            q.pop_front();
        }
        q.push_back(rate);
    }

    /// Appends the realized rate of every `(user, channel)` used this slot.
    pub fn update(&mut self, used: &[(usize, usize, f64)]) {
        for &(u, c, r) in used {
            self.push(u, c, r);
        }
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }
}
