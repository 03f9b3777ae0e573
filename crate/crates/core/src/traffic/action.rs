use crate::error::{Error, Result};

/// Binary channel-to-request assignment of one base station (`n_r x N`).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ActionMatrix {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl ActionMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        ActionMatrix { rows, cols, data: vec![false; rows * cols] }
    }

    pub fn empty(cols: usize) -> Self {
        Self::new(0, cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, k: usize, c: usize) -> bool {
        self.data[k * self.cols + c]
    }

    pub fn set(&mut self, k: usize, c: usize, on: bool) {
        self.data[k * self.cols + c] = on;
    }

    /// Assigns channel `c` exclusively to request `k`.
    pub fn assign(&mut self, k: usize, c: usize) {
        for r in 0..self.rows {
            self.data[r * self.cols + c] = false;
        }
        self.data[k * self.cols + c] = true;
    }

    pub fn row(&self, k: usize) -> &[bool] {
        &self.data[k * self.cols..(k + 1) * self.cols]
    }

    pub fn ones(&self) -> usize {
        self.data.iter().filter(|b| **b).count()
    }

    pub fn channels_of(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(k).iter().enumerate().filter(|(_, b)| **b).map(|(c, _)| c)
    }

    pub fn owner_of(&self, c: usize) -> Option<usize> {
        (0..self.rows).find(|&k| self.get(k, c))
    }

    pub fn used_channels(&self) -> Vec<bool> {
        (0..self.cols).map(|c| self.owner_of(c).is_some()).collect()
    }

    /// `(request, channel)` pairs that are set.
    pub fn entries(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::with_capacity(self.ones());
        for k in 0..self.rows {
            for c in self.channels_of(k) {
                v.push((k, c));
            }
        }
        v
    }

    /// Row-major flattening used by the ensemble correlation measure.
    pub fn flatten(&self) -> Vec<bool> {
        self.data.clone()
    }

    /// Channel sets disjoint (column sums at most one) and at most `max_channels` in use.
    pub fn validate(&self, max_channels: usize) -> Result<()> {
        for c in 0..self.cols {
            let s = (0..self.rows).filter(|&k| self.get(k, c)).count();
            if s > 1 {
                return Err(Error::Invariant(format!("channel {c} shared by {s} requests")));
            }
        }
        let n_c = self.ones();
        if n_c > max_channels {
            return Err(Error::Invariant(format!("{n_c} channels in use, limit {max_channels}")));
        }
        Ok(())
    }
}
