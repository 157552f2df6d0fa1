use alloc::vec::Vec;

use crate::error::{FusionError, Result};

/// Default mass tolerance accepted by [`validate_distribution`].
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Entries in `(-NEGATIVE_CLAMP, 0)` are serialization noise and are clamped to zero.
const NEGATIVE_CLAMP: f64 = 1e-12;

/// A probability vector over `l >= 2` classes.
///
/// Entries are nonnegative and sum to one up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Point mass on class `k`.
    pub fn one_hot(classes: usize, k: usize) -> Result<Self> {
        if classes < 2 {
            return Err(FusionError::TooFewClasses { classes });
        }
        if k >= classes {
            return Err(FusionError::DimensionMismatch);
        }
        let mut probs = alloc::vec![0.0; classes];
        probs[k] = 1.0;
        Ok(Self { probs })
    }

    pub fn uniform(classes: usize) -> Result<Self> {
        if classes < 2 {
            return Err(FusionError::TooFewClasses { classes });
        }
        Ok(Self {
            probs: alloc::vec![1.0 / classes as f64; classes],
        })
    }

    /// Wraps a vector the caller has already normalized.
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        debug_assert!(probs.len() >= 2);
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn classes(&self) -> usize {
        self.probs.len()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.probs[k]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    /// Probability vector with classes reordered so that class `k` moves to `perm[k]`.
    pub fn permute_classes(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.probs.len() {
            return Err(FusionError::DimensionMismatch);
        }
        let mut out = alloc::vec![0.0; perm.len()];
        let mut seen = alloc::vec![false; perm.len()];
        for (k, &target) in perm.iter().enumerate() {
            if target >= out.len() || seen[target] {
                return Err(FusionError::DimensionMismatch);
            }
            seen[target] = true;
            out[target] = self.probs[k];
        }
        Ok(Self { probs: out })
    }
}

impl AsRef<[f64]> for Distribution {
    fn as_ref(&self) -> &[f64] {
        &self.probs
    }
}

fn clamp_entries(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.len() < 2 {
        return Err(FusionError::TooFewClasses { classes: raw.len() });
    }
    raw.iter()
        .enumerate()
        .map(|(index, &value)| {
            if !value.is_finite() {
                Err(FusionError::NonFinite { index })
            } else if value < -NEGATIVE_CLAMP {
                Err(FusionError::NegativeEntry { index, value })
            } else {
                Ok(value.max(0.0))
            }
        })
        .collect()
}

/// Checks that `raw` is a probability vector up to `tolerance` and renormalizes it.
pub fn validate_distribution(raw: &[f64], tolerance: f64) -> Result<Distribution> {
    let mut probs = clamp_entries(raw)?;
    let sum: f64 = probs.iter().sum();
    if !(sum >= 1.0 - tolerance && sum <= 1.0 + tolerance) {
        return Err(FusionError::BadMass { sum });
    }
    // already unit mass up to rounding: keep the bits so serialization round-trips
    if libm::fabs(sum - 1.0) > probs.len() as f64 * f64::EPSILON {
        probs.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(Distribution { probs })
}

/// Divides each entry by the total mass.
pub fn normalize(raw: &[f64]) -> Result<Distribution> {
    let mut probs = clamp_entries(raw)?;
    let sum: f64 = probs.iter().sum();
    if sum <= 0.0 {
        return Err(FusionError::ZeroMass);
    }
    probs.iter_mut().for_each(|p| *p /= sum);
    Ok(Distribution { probs })
}

/// A class decision, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decision(usize);

impl Decision {
    pub fn new(class_index: usize) -> Self {
        Self(class_index)
    }

    pub fn class_index(self) -> usize {
        self.0
    }
}

/// Smallest index attaining the maximum.
pub fn decide(fused: &Distribution) -> Decision {
    Decision(argmax_first(fused.probs()))
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    best
}

/// The outputs of `m` classifiers for a single observation.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSnapshot {
    members: Vec<Distribution>,
}

impl EnsembleSnapshot {
    pub fn new(members: Vec<Distribution>) -> Result<Self> {
        let first = members.first().ok_or(FusionError::EmptyEnsemble)?;
        let expected = first.classes();
        if let Some(bad) = members.iter().find(|d| d.classes() != expected) {
            return Err(FusionError::ClassCountMismatch {
                expected,
                found: bad.classes(),
            });
        }
        Ok(Self { members })
    }

    /// Validates each row with [`DEFAULT_TOLERANCE`] and builds the snapshot.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let members = rows
            .iter()
            .map(|r| validate_distribution(r.as_ref(), DEFAULT_TOLERANCE))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    pub fn members(&self) -> &[Distribution] {
        &self.members
    }

    /// Number of classifiers.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Always false; snapshots hold at least one member.
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Number of classes.
    pub fn classes(&self) -> usize {
        self.members[0].classes()
    }

    pub fn into_members(self) -> Vec<Distribution> {
        self.members
    }
}
