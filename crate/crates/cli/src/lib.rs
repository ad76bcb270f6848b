//! Batch verification of rearrangement bounds, sharpness sweeps, norm
//! constants and target-space membership, emitting deterministic CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod table;

pub use commands::{
    cmd_brezis_merle, cmd_check_inequalities, cmd_lq_constants, cmd_sweep_sharpness, cmd_target_membership, Outcome,
};
pub use config::RunConfig;
pub use table::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] sharp_embed::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// `2` for usage and configuration problems, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(sharp_embed::Error::Domain(_)) | CliError::Core(sharp_embed::Error::Precondition(_)) => 2,
            CliError::Io(_) => 2,
            _ => 1,
        }
    }
}
