//! Differentiable building blocks with hand-written backpropagation.
//!
//! Every model keeps its trainable state in one flat vector described by a
//! [`Layout`]; gradients and optimizer moments use the same layout, which is
//! what the checkpoint format and the finite-difference checks rely on.

pub mod adam;
pub mod attention;
pub mod checkpoint;
pub mod dense;
pub mod lstm;
pub mod params;

pub use adam::Adam;
pub use attention::{log_softmax_grad, softmax, AttentionCache, PointerAttention};
pub use checkpoint::Checkpoint;
pub use dense::{Dense, Ffn, Mlp, MlpCache};
pub use lstm::{sigmoid, LstmCell, LstmStep, LstmStepGrad};
pub use params::{Layout, LayoutBuilder, Parametric, Segment, Span};
