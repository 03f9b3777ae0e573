pub mod agents;
pub mod error;
pub mod game;
pub mod harness;
pub mod jammer;
pub mod neural;
pub mod radio;
pub mod scalar;
pub mod traffic;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Ffn = neural::Ffn<f64>;
pub type PointerNet = agents::PointerNet<f64>;
pub type MixedStrategy = game::MixedStrategy<f64>;
