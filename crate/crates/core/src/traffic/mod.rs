//! Request lifecycle, station queues, user mobility and rate history.

pub mod action;
pub mod arrivals;
pub mod history;
pub mod mobility;
pub mod request;
pub mod station;

pub use action::ActionMatrix;
pub use arrivals::{ArrivalParams, ArrivalReport, RequestSource, UserState};
pub use history::RateHistory;
pub use mobility::{disk_step, move_users, place_users};
pub use request::{Request, RequestId, RequestStatus};
pub use station::{BaseStation, Completion, StationLimits};
