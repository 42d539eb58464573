//! Verification experiments for the density of states outer measure.
//!
//! Every experiment sweeps a grid of independent cells in parallel, compares
//! measured quantities with the bounds they should satisfy and produces rows
//! ready for plotting. Cells are merged in a fixed order, so the output does
//! not depend on the number of worker threads.

mod bethe;
mod common;
pub mod config;
mod hausdorff;
mod iods;
mod lattice;
mod metrics_suite;
mod operator_lipschitz;
pub mod output;
mod volume_gap;
mod weak;

pub use config::{ExperimentConfig, ExperimentId, ExperimentParams};
pub use output::{ExperimentOutput, Relation, ResultRow};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Core(#[from] dosom::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// Runs one experiment on a dedicated pool of `threads` workers.
pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentOutput> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
    let outcome = pool.install(|| -> Result<common::Outcome> {
        let seed = cfg.seed;
        match &cfg.params {
            ExperimentParams::LatticeLip(c) => lattice::run(c, seed),
            ExperimentParams::Bethe(c) => bethe::run(c, seed),
            ExperimentParams::Iods(c) => iods::run(c, seed),
            ExperimentParams::Weak(c) => weak::run(c, seed),
            ExperimentParams::Metrics(c) => metrics_suite::run(c, seed),
            ExperimentParams::Hausdorff(c) => hausdorff::run(c, seed),
            ExperimentParams::VolumeGap(c) => volume_gap::run(c, seed),
            ExperimentParams::OperatorLipschitz(c) => operator_lipschitz::run(c, seed),
        }
    })?;
    Ok(ExperimentOutput {
        experiment: cfg.id(),
        config: cfg.canonical(),
        config_hash: cfg.hash(),
        seeds: outcome.seeds,
        rows: outcome.rows,
    })
}
