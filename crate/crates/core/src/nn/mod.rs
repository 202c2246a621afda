//! Minimal deterministic differentiable-computation kernel.
//!
//! Exactly the layers the classifier variants need, each with an explicit
//! backward pass (no general tape): conv2d, batchnorm2d, ReLU/ELU, dense,
//! dropout, graph attention, global max pooling, softmax cross-entropy,
//! SGD with momentum, and a reduce-on-plateau scheduler.
//!
//! Everything is generic over [`Real`]: training runs in `f32`, gradient
//! checks in `f64`. Determinism: parallel loops partition work by fixed
//! chunk boundaries and reduce partials in index order, so outputs do not
//! depend on the worker count.

pub mod activation;
pub mod batchnorm;
pub mod checkpoint;
pub mod conv;
pub mod dense;
pub mod dropout;
pub mod gat;
pub mod gradcheck;
pub mod init;
pub mod loss;
pub mod optim;
pub mod params;
pub mod pool;
pub mod real;
pub mod tensor;

pub use batchnorm::{BatchNorm2d, StatsUpdate};
pub use conv::Conv2d;
pub use dense::Dense;
pub use gat::{GatConv, GraphBatch};
pub use loss::{softmax_cross_entropy, softmax_probs};
pub use optim::PlateauScheduler;
pub use params::{ParamId, ParamStore};
pub use pool::{global_max_pool, global_max_pool_backward};
pub use real::Real;
pub use tensor::Tensor;

/// Forward-pass mode: training uses batch statistics and dropout masks,
/// evaluation uses running statistics and identity dropout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}
