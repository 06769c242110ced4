use indicvox::attention::AttentionError;
use indicvox::corpus::CorpusError;
use indicvox::eval::EvalError;
use indicvox::features::FeatureError;
use indicvox::script::ScriptError;
use indicvox::speaker::SpeakerError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Speaker(#[from] SpeakerError),
    #[error(transparent)]
    Attention(#[from] AttentionError),
    #[error("gradient check failed: max relative error {worst:.3e} on instance {seed} exceeds {tolerance:.0e}")]
    GradCheckFailed { worst: f64, seed: u64, tolerance: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Exit statuses. Clap reports unknown subcommands and bad flags with 2.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const IO: i32 = 4;
    pub const SCRIPT: i32 = 10;
    pub const CORPUS: i32 = 20;
    pub const INSUFFICIENT_DATA: i32 = 21;
    pub const CROSS_FAMILY: i32 = 22;
    pub const FEATURE: i32 = 30;
    pub const SPEAKER: i32 = 40;
    pub const ATTENTION: i32 = 50;
    pub const GRAD_CHECK_FAILED: i32 = 51;
    pub const EVAL: i32 = 60;
    pub const NO_PAIRS: i32 = 61;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Config(_) => exit::CONFIG,
            CliError::Io(_) => exit::IO,
            CliError::Script(_) => exit::SCRIPT,
            CliError::Corpus(CorpusError::InsufficientData { .. }) => exit::INSUFFICIENT_DATA,
            CliError::Corpus(CorpusError::CrossFamilyPooling { .. }) => exit::CROSS_FAMILY,
            CliError::Corpus(_) => exit::CORPUS,
            CliError::Feature(_) => exit::FEATURE,
            CliError::Speaker(_) => exit::SPEAKER,
            CliError::Attention(_) => exit::ATTENTION,
            CliError::GradCheckFailed { .. } => exit::GRAD_CHECK_FAILED,
            CliError::Eval(EvalError::NoPairs) => exit::NO_PAIRS,
            CliError::Eval(_) => exit::EVAL,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Config(_) => "Config",
            CliError::Io(_) => "Io",
            CliError::Script(_) => "Script",
            CliError::Corpus(CorpusError::InsufficientData { .. }) => "InsufficientData",
            CliError::Corpus(CorpusError::CrossFamilyPooling { .. }) => "CrossFamilyPooling",
            CliError::Corpus(_) => "Corpus",
            CliError::Feature(_) => "Feature",
            CliError::Speaker(_) => "Speaker",
            CliError::Attention(_) => "Attention",
            CliError::GradCheckFailed { .. } => "GradCheckFailed",
            CliError::Eval(EvalError::NoPairs) => "NoPairs",
            CliError::Eval(_) => "Eval",
        }
    }
}
