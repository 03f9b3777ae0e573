use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::action::ActionMatrix;
use super::history::RateHistory;
use super::request::{Request, RequestId, RequestStatus};

/// Per-station capacity limits `N_c`, `N_r`, `N_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationLimits {
    pub max_channels: usize,
    pub max_serving: usize,
    pub max_queue: usize,
}

/// A request that reached a terminal state this slot.
#[derive(Clone, Debug, PartialEq)]
pub struct Completion {
    pub bs: usize,
    pub request: Request,
    pub reward: f64,
}

#[derive(Clone, Debug)]
pub struct BaseStation {
    pub id: usize,
    pub limits: StationLimits,
    pub serving: Vec<Request>,
    pub queue: VecDeque<Request>,
    pub history: RateHistory,
    last_action: ActionMatrix,
    last_action_ids: Vec<RequestId>,
}

impl BaseStation {
    pub fn new(id: usize, limits: StationLimits, num_users: usize, num_channels: usize, history_depth: usize) -> Self {
        BaseStation {
            id,
            limits,
            serving: Vec::with_capacity(limits.max_serving),
            queue: VecDeque::with_capacity(limits.max_queue),
            history: RateHistory::new(num_users, num_channels, history_depth),
            last_action: ActionMatrix::empty(num_channels),
            last_action_ids: Vec::new(),
        }
    }

    pub fn num_serving(&self) -> usize {
        self.serving.len()
    }

    pub fn has_room(&self) -> bool {
        self.serving.len() < self.limits.max_serving || self.queue.len() < self.limits.max_queue
    }

    /// Admits a request straight into service when a slot is free, otherwise
    /// into the queue. A full station hands the request back (denied).
    pub fn admit(&mut self, mut req: Request) -> std::result::Result<(), Request> {
        debug_assert_eq!(req.status, RequestStatus::Queued);
        if self.serving.len() < self.limits.max_serving && self.queue.is_empty() {
            req.transition(RequestStatus::Serving);
            self.serving.push(req);
            Ok(())
        } else if self.queue.len() < self.limits.max_queue {
            self.queue.push_back(req);
            Ok(())
        } else {
            Err(req)
        }
    }

    /// Ids of every request present (serving then queued).
    pub fn present_ids(&self) -> Vec<RequestId> {
        self.serving.iter().chain(self.queue.iter()).map(|r| r.id).collect()
    }

    /// Last-slot action row of a serving request, if it was served last slot.
    pub fn last_action_row(&self, id: RequestId) -> Option<&[bool]> {
        self.last_action_ids.iter().position(|x| *x == id).map(|k| self.last_action.row(k))
    }

    pub fn last_action(&self) -> &ActionMatrix {
        &self.last_action
    }

    pub fn record_action(&mut self, action: &ActionMatrix) {
        self.last_action = action.clone();
        self.last_action_ids = self.serving.iter().map(|r| r.id).collect();
    }

    /// Applies one slot of service. `realized[k]` is the sum rate of serving request `k`.
    pub fn step_requests(&mut self, realized: &[f64]) -> Vec<Completion> {
        assert_eq!(realized.len(), self.serving.len(), "one realized rate per serving request");
        let mut done = Vec::new();
        let mut kept = Vec::with_capacity(self.serving.len());
        for (mut req, &rate) in std::mem::take(&mut self.serving).into_iter().zip(realized) {
            if rate < req.min_rate || req.lifetime <= 0.0 {
                req.transition(RequestStatus::Failed);
            } else {
                req.lifetime -= 1.0;
                req.payload = (req.payload - rate).max(0.0);
                if req.payload == 0.0 {
                    req.transition(RequestStatus::Success);
                }
            }
            if req.status.is_terminal() {
                let reward = req.outcome_reward();
                done.push(Completion { bs: self.id, request: req, reward });
            } else {
                kept.push(req);
            }
        }
        self.serving = kept;
        let mut queue = VecDeque::with_capacity(self.queue.len());
        for mut req in std::mem::take(&mut self.queue) {
            if req.lifetime <= 0.0 {
                req.transition(RequestStatus::Failed);
                let reward = req.outcome_reward();
                done.push(Completion { bs: self.id, request: req, reward });
            } else {
                req.lifetime -= 1.0;
                queue.push_back(req);
            }
        }
        self.queue = queue;
        while self.serving.len() < self.limits.max_serving {
            match self.queue.pop_front() {
                Some(mut req) => {
                    req.transition(RequestStatus::Serving);
                    self.serving.push(req);
                }
                None => break,
            }
        }
        done
    }

    /// Constraints on channel sets and occupancy for the action about to be executed.
    pub fn check_constraints(&self, action: &ActionMatrix) -> Result<()> {
        if self.serving.len() > self.limits.max_serving {
            return Err(Error::Invariant(format!("bs {}: {} serving > N_r", self.id, self.serving.len())));
        }
        if self.queue.len() > self.limits.max_queue {
            return Err(Error::Invariant(format!("bs {}: {} queued > N_q", self.id, self.queue.len())));
        }
        if action.rows() != self.serving.len() && action.ones() > 0 {
            return Err(Error::Invariant(format!(
                "bs {}: action has {} rows for {} serving requests",
                self.id,
                action.rows(),
                self.serving.len()
            )));
        }
        action.validate(self.limits.max_channels).map_err(|e| Error::Invariant(format!("bs {}: {e}", self.id)))?;
        for r in self.serving.iter().chain(self.queue.iter()) {
            if r.payload < 0.0 || r.lifetime < -1e-12 || r.status.is_terminal() {
                return Err(Error::Invariant(format!("bs {}: request {} in bad state", self.id, r.id)));
            }
        }
        Ok(())
    }
}
