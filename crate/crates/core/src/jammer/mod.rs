//! Adversarial jammer: location search, listening-based targets and the
//! learned and rule-based channel selection policies.

pub mod agent;
pub mod location;
pub mod target;

pub use agent::{JamOutcome, JamSample, JammerAgent, JammerConfig, JammerKind, JammerPhase};
pub use location::{grid_candidates, location_objectives, optimize_location, LocationSearch};
pub use target::{
    beta_from, indicator, interpolate_target, jam_reward, listen_difference, top_k, BetaEstimator, ObservationWindow,
};
