//! Gaussian process regression over a scalar input with composite kernels.
//!
//! Inputs are standardized before every kernel evaluation and the prior mean
//! is zero, so a fitted model reverts to 0 far from its data. Training
//! maximizes the log marginal likelihood jointly over the log
//! hyperparameters and the log combination coefficients.

mod kernel;
mod model;
mod optim;
mod train;

pub use kernel::{kernel_eval, BaseKernel, KernelSpec, KernelTerm};
pub use model::{gram, GprModel, Prediction, Standardizer};
pub use train::{lml_and_grad, retrain, train, train_with_report, StartOutcome, TrainOptions, TrainReport};
