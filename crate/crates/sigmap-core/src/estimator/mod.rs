//! Compact multiscale convolutional sigma-map estimator.
//!
//! Three stride-2 encoder stages (so the coarsest activations cover 8x8
//! input pixels), residual-block cascades at every scale, a mirrored
//! transposed-convolution decoder with additive skip connections at each
//! level plus an outermost input-to-output skip, and a final softplus that
//! keeps estimated sigmas nonnegative. Backpropagation, Adam and the
//! training loop are implemented here directly in double precision.
//!
//! The network consumes pixel values scaled by 1/255 internally; targets
//! and outputs stay in [0, 255]-scale sigma units.

mod tensor;
mod ops;
mod model;
mod adam;
mod train;
mod infer;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use infer::estimate;
pub use model::{loss_mse, EstimatorConfig, Model};
pub use tensor::Tensor;
pub use train::{batch_gradient, batch_loss, train, TrainEvent, TrainSchedule, TrainedEstimator};
