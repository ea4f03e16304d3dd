//! Data generation, losses, the α schedule and the training loop.

pub mod data;
pub mod metrics;
pub mod schedule;
pub mod train;

pub use data::{conservation_residual, generate_dataset, DataGenConfig, Dataset, GeneratedData, Sample};
pub use metrics::{accuracy, momentum_penalty, mse_loss, relative_momentum_loss};
pub use schedule::AlphaSchedule;
pub use train::{train, Checkpoint, LossPoint, TrainConfig, TrainReport, CHECKPOINT_VERSION};
