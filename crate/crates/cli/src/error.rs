use yayambo::FusionError;

/// Whole-file failures. Any of these maps to exit status 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error(
        "line {line}: expected {expected_members} classifiers x {expected_classes} classes, \
         found {members} x {classes}"
    )]
    InconsistentShape {
        line: u64,
        expected_members: usize,
        expected_classes: usize,
        members: usize,
        classes: usize,
    },
    #[error("line {line}, classifier {row}: {reason}")]
    InvalidDistribution {
        line: u64,
        row: usize,
        reason: FusionError,
    },
    #[error("observation {obs_id:?} (line {line}) has no label")]
    MissingLabels { line: u64, obs_id: String },
    #[error("input contains no records")]
    EmptyInput,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
