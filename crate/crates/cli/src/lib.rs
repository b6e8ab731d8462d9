//! Library half of the `tcbench` command: config parsing and the run pipeline.

pub mod config;
pub mod pipeline;

use tcbench::ablation::AblationError;
use tcbench::corpus::CorpusError;
use tcbench::finetune::FineTuneError;
use tcbench::metrics::MetricsError;
use tcbench::mtclient::MtError;
use tcbench::report::ReportError;
use tcbench::zeroshot::ZeroShotError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config:\n{0}")]
    ConfigInvalid(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    FineTune(#[from] FineTuneError),
    #[error(transparent)]
    ZeroShot(#[from] ZeroShotError),
    #[error(transparent)]
    Mt(#[from] MtError),
    #[error(transparent)]
    Ablation(#[from] AblationError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("io: {0}")]
    Io(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// 2 for configuration problems, 3 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigInvalid(_) => 2,
            _ => 3,
        }
    }
}
