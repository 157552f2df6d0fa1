use core::fmt;

/// Errors raised while validating or fusing classifier outputs.
#[derive(Debug, Clone, PartialEq)]
pub enum FusionError {
    /// An entry is below the negative clamp threshold.
    NegativeEntry { index: usize, value: f64 },
    /// An entry is NaN or infinite.
    NonFinite { index: usize },
    /// Total mass falls outside `1 ± tolerance`.
    BadMass { sum: f64 },
    /// Fewer than two classes.
    TooFewClasses { classes: usize },
    /// Normalization of an all-zero vector.
    ZeroMass,
    /// An ensemble needs at least one member.
    EmptyEnsemble,
    /// Members disagree on the number of classes.
    ClassCountMismatch { expected: usize, found: usize },
    /// Every class is vetoed by at least one member's zero probability.
    ZeroProductMass,
    /// A consensus update annihilated all mass of a member.
    DegenerateUpdate { member: usize, iteration: usize },
    /// Two inputs that must be aligned have different shapes.
    DimensionMismatch,
    /// A label lies outside `[0, l)`.
    LabelOutOfRange {
        index: usize,
        label: usize,
        classes: usize,
    },
    /// An evaluation set has no observations.
    EmptyInput,
    /// Parameters fail validation.
    InvalidParams(&'static str),
}

impl fmt::Display for FusionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NegativeEntry { index, value } => {
                write!(f, "negative probability {value} at class {index}")
            }
            Self::NonFinite { index } => write!(f, "non-finite probability at class {index}"),
            Self::BadMass { sum } => write!(f, "probabilities sum to {sum}, expected 1"),
            Self::TooFewClasses { classes } => {
                write!(f, "need at least 2 classes, got {classes}")
            }
            Self::ZeroMass => write!(f, "cannot normalize a vector with zero mass"),
            Self::EmptyEnsemble => write!(f, "ensemble has no members"),
            Self::ClassCountMismatch { expected, found } => {
                write!(f, "expected {expected} classes, found {found}")
            }
            Self::ZeroProductMass => {
                write!(
                    f,
                    "product rule: every class has zero probability under some member"
                )
            }
            Self::DegenerateUpdate { member, iteration } => write!(
                f,
                "consensus update annihilated all mass of member {member} at iteration {iteration}"
            ),
            Self::DimensionMismatch => write!(f, "dimension mismatch"),
            Self::LabelOutOfRange {
                index,
                label,
                classes,
            } => write!(
                f,
                "label {label} of observation {index} is outside [0, {classes})"
            ),
            Self::EmptyInput => write!(f, "no observations"),
            Self::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
        }
    }
}

impl core::error::Error for FusionError {}

pub type Result<T> = core::result::Result<T, FusionError>;
