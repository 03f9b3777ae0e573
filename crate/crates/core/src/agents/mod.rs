//! Slicing agents: observations, the pointer-network actor, action decoding,
//! exploration, the actor-critic learner and the rule-based baselines.

pub mod baselines;
pub mod decode;
pub mod exploration;
pub mod learner;
pub mod observation;
pub mod pointer;

pub use baselines::{
    baseline_action, fifo_action, hard_slicing_action, proportional_counts, random_action, BaselineKind,
};
pub use decode::{decode_action, max_rate_action};
pub use exploration::{ActionMode, ExplorationSchedule};
pub use learner::{
    critic_td, overlap, ActorTraining, CriticKind, Decision, LearnerConfig, Record, ReplayBuffer, SlicingLearner,
    TrainStats,
};
pub use observation::{observe_station, FeatureScale, ObservationBundle, ObservationDims, StationObservation};
pub use pointer::{PointerNet, PointerPass};
