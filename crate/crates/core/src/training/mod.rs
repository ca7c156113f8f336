//! Configuration, optimization loop, pretraining, checkpoints and the
//! whole-model gradient check.

mod checkpoint;
mod config;
mod embeddings;
mod gradcheck;
mod trainer;

pub use crate::model::{combined_loss, combined_loss_var};
pub use checkpoint::{Checkpoint, MAGIC, VERSION};
pub use config::TrainConfig;
pub use embeddings::{load_embeddings, load_embeddings_text};
pub use gradcheck::{gradcheck_model, random_pairs, GradCheckConfig, ModelCheckOutcome};
pub use trainer::{
    initial_model, loss_log_csv, mean_losses, pretrain, train, EpochLoss, LossSums, LOSS_LOG_HEADER,
};
