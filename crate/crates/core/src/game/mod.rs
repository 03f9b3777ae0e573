mod bandit;
mod classify;
mod ensemble;
mod history;
mod solver;

pub use bandit::DominanceBandit;
pub use classify::{
    argmin, classify_jammer, classify_victim, correlation, victim_distances, DifferenceQueue, VICTIM_CLASSES,
};
pub use ensemble::{dual_reward, EnsembleConfig, EnsembleController, EnsembleKind};
pub use history::UtilityHistory;
pub use solver::{guarantee, solve_zero_sum, MixedStrategy};
