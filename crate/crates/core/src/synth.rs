//! Seeded artificial binary classifiers.
//!
//! | classifier | output for the true class `y` |
//! |------------|-------------------------------|
//! | `F1` | 0.51 on `y`, 0.49 on the other class |
//! | `F2` | 0.9 on `y`, 0.1 on the other class |
//! | `F3` | 0.49 on `y`, 0.51 on the other class (always wrong) |
//! | `F4` | with probability 0.65: 0.7 on `y`; otherwise class-0 probability ~ U(0, 1) |
//! | `F5` | class-0 probability ~ U(0, 1) |
//!
//! # Random stream
//!
//! The generator is ChaCha20 ([`rand_chacha::ChaCha20Rng`]) seeded through
//! `SeedableRng::seed_from_u64`. A uniform draw on the open interval `(0, 1)`
//! is `(next_u64 >> 11) * 2^-53`, redrawn while zero. Observations are
//! visited in order (all class-0 observations first); for each observation
//! `F4` draws its branch (confident when the draw is below 0.65) and, in the
//! other branch, its class-0 probability, then `F5` draws its class-0
//! probability. Classifiers absent from the spec draw nothing. The same seed
//! therefore reproduces the same dataset bit for bit.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::distribution::{Distribution, EnsembleSnapshot};
use crate::error::{FusionError, Result};

const F4_CONFIDENT_RATE: f64 = 0.65;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArtificialClassifier {
    F1,
    F2,
    F3,
    F4,
    F5,
}

impl ArtificialClassifier {
    pub const ALL: [ArtificialClassifier; 5] = [Self::F1, Self::F2, Self::F3, Self::F4, Self::F5];

    pub fn name(self) -> &'static str {
        match self {
            Self::F1 => "f1",
            Self::F2 => "f2",
            Self::F3 => "f3",
            Self::F4 => "f4",
            Self::F5 => "f5",
        }
    }

    /// Accuracy in expectation.
    pub fn expected_accuracy(self) -> f64 {
        match self {
            Self::F1 | Self::F2 => 1.0,
            Self::F3 => 0.0,
            Self::F4 => F4_CONFIDENT_RATE + (1.0 - F4_CONFIDENT_RATE) * 0.5,
            Self::F5 => 0.5,
        }
    }
}

impl fmt::Display for ArtificialClassifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ArtificialClassifier {
    type Err = &'static str;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or("expected one of f1, f2, f3, f4, f5")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtificialEnsembleSpec {
    n_per_class: usize,
    seed: u64,
    classifiers: Vec<ArtificialClassifier>,
}

impl ArtificialEnsembleSpec {
    pub fn new(
        n_per_class: usize,
        seed: u64,
        classifiers: Vec<ArtificialClassifier>,
    ) -> Result<Self> {
        if n_per_class == 0 {
            return Err(FusionError::InvalidParams("n_per_class must be positive"));
        }
        if classifiers.is_empty() {
            return Err(FusionError::InvalidParams(
                "at least one classifier is required",
            ));
        }
        for (i, c) in classifiers.iter().enumerate() {
            if classifiers[..i].contains(c) {
                return Err(FusionError::InvalidParams("classifiers must not repeat"));
            }
        }
        Ok(Self {
            n_per_class,
            seed,
            classifiers,
        })
    }

    pub fn n_per_class(&self) -> usize {
        self.n_per_class
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn classifiers(&self) -> &[ArtificialClassifier] {
        &self.classifiers
    }
}

/// Labels plus one output sequence per requested classifier, in spec order.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub labels: Vec<usize>,
    pub classifiers: Vec<ArtificialClassifier>,
    pub outputs: Vec<Vec<Distribution>>,
}

impl SyntheticDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Output sequence of `classifier`, if it was generated.
    pub fn outputs_of(&self, classifier: ArtificialClassifier) -> Option<&[Distribution]> {
        let idx = self.classifiers.iter().position(|&c| c == classifier)?;
        Some(&self.outputs[idx])
    }

    /// Ensemble snapshot of observation `obs`, members in spec order.
    pub fn snapshot(&self, obs: usize) -> EnsembleSnapshot {
        let members = self.outputs.iter().map(|col| col[obs].clone()).collect();
        EnsembleSnapshot::new(members).expect("synthetic members share two classes")
    }
}

fn open_unit(rng: &mut ChaCha20Rng) -> f64 {
    loop {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if u > 0.0 {
            return u;
        }
    }
}

fn binary(p_first: f64) -> Distribution {
    Distribution::from_normalized(alloc::vec![p_first, 1.0 - p_first])
}

fn confident(label: usize, p_true: f64) -> Distribution {
    if label == 0 {
        binary(p_true)
    } else {
        binary(1.0 - p_true)
    }
}

pub fn generate(spec: &ArtificialEnsembleSpec) -> SyntheticDataset {
    let n = 2 * spec.n_per_class;
    let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= spec.n_per_class)).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let wants = |c| spec.classifiers.contains(&c);
    let (want_f4, want_f5) = (
        wants(ArtificialClassifier::F4),
        wants(ArtificialClassifier::F5),
    );

    let mut f4 = Vec::with_capacity(if want_f4 { n } else { 0 });
    let mut f5 = Vec::with_capacity(if want_f5 { n } else { 0 });
    for &y in &labels {
        if want_f4 {
            let d = if open_unit(&mut rng) < F4_CONFIDENT_RATE {
                confident(y, 0.7)
            } else {
                binary(open_unit(&mut rng))
            };
            f4.push(d);
        }
        if want_f5 {
            f5.push(binary(open_unit(&mut rng)));
        }
    }

    let mut f4 = Some(f4);
    let mut f5 = Some(f5);
    let outputs = spec
        .classifiers
        .iter()
        .map(|c| match c {
            ArtificialClassifier::F1 => labels.iter().map(|&y| confident(y, 0.51)).collect(),
            ArtificialClassifier::F2 => labels.iter().map(|&y| confident(y, 0.9)).collect(),
            ArtificialClassifier::F3 => labels.iter().map(|&y| confident(y, 0.49)).collect(),
            ArtificialClassifier::F4 => f4.take().unwrap_or_default(),
            ArtificialClassifier::F5 => f5.take().unwrap_or_default(),
        })
        .collect();

    SyntheticDataset {
        labels,
        classifiers: spec.classifiers.clone(),
        outputs,
    }
}
