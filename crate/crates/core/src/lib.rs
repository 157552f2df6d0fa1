//! Decision fusion for ensembles of probabilistic classifiers.
//!
//! Every rule here consumes only the classifiers' output distributions: no
//! features, no training data, no accuracy estimates. The crate provides
//!
//! * [`baselines`]: sum, product, majority vote and Borda count rules,
//! * [`yayambo`]: iterative support-weighted consensus, finalized by the sum rule,
//! * [`metrics`]: accuracy, cross-entropy, macro precision/recall/F1 and
//!   pairwise agreement measures,
//! * [`synth`]: seeded artificial ensembles for reproducible benchmarks.
//!
//! The crate is `no_std` and only needs `alloc`.
//!
//! ```
//! use yayambo::{EnsembleSnapshot, Distribution, YayamboParams, yayambo::yayambo_fuse};
//!
//! let ensemble = EnsembleSnapshot::from_rows(&[[0.3, 0.7], [0.8, 0.2]]).unwrap();
//! let outcome = yayambo_fuse(&ensemble, &YayamboParams::default(), false).unwrap();
//! assert_eq!(outcome.decision.class_index(), 0);
//! assert_eq!(outcome.iterations, 7);
//! ```

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baselines;
mod distribution;
mod error;
pub mod metrics;
mod rule;
pub mod synth;
pub mod yayambo;

pub use distribution::{
    decide, normalize, validate_distribution, Decision, Distribution, EnsembleSnapshot,
    DEFAULT_TOLERANCE,
};
pub use error::{FusionError, Result};
pub use rule::{FusionRule, RuleOutcome};
pub use yayambo::{FusionOutcome, YayamboParams};
