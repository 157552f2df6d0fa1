//! File formats and batch commands behind the `yayambo` binary.

pub mod commands;
pub mod error;
pub mod format;

pub use commands::{cmd_eval, cmd_fuse, cmd_pairwise, cmd_synth, RunConfig};
pub use error::{CliError, Result};
pub use format::{parse_predictions, write_predictions, Format, PredictionRecord};
