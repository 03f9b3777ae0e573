use serde::{Deserialize, Serialize};

pub type RequestId = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RequestStatus {
    Queued,
    Serving,
    Success,
    Failed,
}

impl RequestStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, RequestStatus::Success | RequestStatus::Failed)
    }
}

/// One service request: remaining payload, minimum rate and remaining lifetime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: RequestId,
    pub user: usize,
    pub payload: f64,
    pub initial_payload: f64,
    pub min_rate: f64,
    pub lifetime: f64,
    pub status: RequestStatus,
    pub arrived_at: u64,
}

impl Request {
    pub fn new(id: RequestId, user: usize, payload: f64, min_rate: f64, lifetime: f64, arrived_at: u64) -> Self {
        Request {
            id,
            user,
            payload,
            initial_payload: payload,
            min_rate,
            lifetime,
            status: RequestStatus::Queued,
            arrived_at,
        }
    }

    /// Reward recorded when the request resolves.
    pub fn outcome_reward(&self) -> f64 {
        match self.status {
            RequestStatus::Success => self.initial_payload,
            RequestStatus::Failed => -self.initial_payload,
            _ => 0.0,
        }
    }

    /// `{p, m, l, |R|}` as fed to the networks.
    pub fn info(&self) -> [f64; 4] {
        [self.payload, self.min_rate, self.lifetime, self.initial_payload]
    }

    pub(crate) fn transition(&mut self, to: RequestStatus) {
        let ok = matches!(
            (self.status, to),
            (RequestStatus::Queued, RequestStatus::Serving)
                | (RequestStatus::Queued, RequestStatus::Failed)
                | (RequestStatus::Serving, RequestStatus::Success)
                | (RequestStatus::Serving, RequestStatus::Failed)
        );
        assert!(ok, "illegal request transition {:?} -> {:?}", self.status, to);
        self.status = to;
    }
}
