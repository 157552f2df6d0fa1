//! Evaluation of classifier or fusion outputs against labels, and pairwise
//! agreement between two output sequences.

use alloc::vec::Vec;

use crate::distribution::{decide, Distribution};
use crate::error::{FusionError, Result};

/// Default probability floor for [`cross_entropy`].
pub const DEFAULT_CE_FLOOR: f64 = 1e-15;

/// Outputs of one classifier (or one rule) over `n` observations, with labels.
#[derive(Debug, Clone, Copy)]
pub struct LabeledPredictions<'a> {
    outputs: &'a [Distribution],
    labels: &'a [usize],
    classes: usize,
}

impl<'a> LabeledPredictions<'a> {
    pub fn new(outputs: &'a [Distribution], labels: &'a [usize]) -> Result<Self> {
        if outputs.len() != labels.len() {
            return Err(FusionError::DimensionMismatch);
        }
        let first = outputs.first().ok_or(FusionError::EmptyInput)?;
        let classes = first.classes();
        if let Some(bad) = outputs.iter().find(|d| d.classes() != classes) {
            return Err(FusionError::ClassCountMismatch {
                expected: classes,
                found: bad.classes(),
            });
        }
        if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &y)| y >= classes) {
            return Err(FusionError::LabelOutOfRange {
                index,
                label,
                classes,
            });
        }
        Ok(Self {
            outputs,
            labels,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    fn pairs(&self) -> impl Iterator<Item = (&'a Distribution, usize)> + 'a {
        self.outputs.iter().zip(self.labels.iter().copied())
    }
}

pub fn accuracy(preds: &LabeledPredictions<'_>) -> f64 {
    let correct = preds
        .pairs()
        .filter(|(d, y)| decide(d).class_index() == *y)
        .count();
    correct as f64 / preds.len() as f64
}

/// Mean of `-ln(max(p_true, floor))`, in nats.
pub fn cross_entropy(preds: &LabeledPredictions<'_>, floor: f64) -> f64 {
    let total: f64 = preds
        .pairs()
        .map(|(d, y)| -libm::log(d.get(y).max(floor)))
        .sum();
    total / preds.len() as f64
}

/// Unweighted means of the per-class scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Macro-averaged precision, recall and F1 over `classes` classes (0/0 counts as 0).
pub fn macro_prf(preds: &LabeledPredictions<'_>, classes: usize) -> MacroScores {
    let mut tp = alloc::vec![0usize; classes];
    let mut predicted = alloc::vec![0usize; classes];
    let mut actual = alloc::vec![0usize; classes];
    for (d, y) in preds.pairs() {
        let p = decide(d).class_index();
        predicted[p] += 1;
        actual[y] += 1;
        if p == y {
            tp[p] += 1;
        }
    }
    let (mut precision, mut recall, mut f1) = (0.0, 0.0, 0.0);
    for c in 0..classes {
        let pc = ratio(tp[c], predicted[c]);
        let rc = ratio(tp[c], actual[c]);
        precision += pc;
        recall += rc;
        f1 += if pc + rc > 0.0 {
            2.0 * pc * rc / (pc + rc)
        } else {
            0.0
        };
    }
    let l = classes as f64;
    MacroScores {
        precision: precision / l,
        recall: recall / l,
        f1: f1 / l,
    }
}

/// The five evaluation metrics for one output sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub cross_entropy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

pub fn evaluate(preds: &LabeledPredictions<'_>, floor: f64) -> MetricsReport {
    let scores = macro_prf(preds, preds.classes());
    MetricsReport {
        accuracy: accuracy(preds),
        cross_entropy: cross_entropy(preds, floor),
        macro_precision: scores.precision,
        macro_recall: scores.recall,
        macro_f1: scores.f1,
    }
}

fn check_aligned(a: &[Distribution], b: &[Distribution]) -> Result<()> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.classes() != y.classes()) {
        return Err(FusionError::DimensionMismatch);
    }
    Ok(())
}

/// Frobenius distance between the two stacked `n x l` output matrices.
pub fn prediction_disagreement(a: &[Distribution], b: &[Distribution]) -> Result<f64> {
    check_aligned(a, b)?;
    let sq: f64 = a
        .iter()
        .zip(b)
        .flat_map(|(x, y)| {
            x.probs()
                .iter()
                .zip(y.probs())
                .map(|(p, q)| (p - q) * (p - q))
        })
        .sum();
    Ok(libm::sqrt(sq))
}

/// Fraction of observations on which both sequences decide the same class.
pub fn decision_agreement(reference: &[Distribution], candidate: &[Distribution]) -> Result<f64> {
    check_aligned(reference, candidate)?;
    if reference.is_empty() {
        return Err(FusionError::EmptyInput);
    }
    let same = reference
        .iter()
        .zip(candidate)
        .filter(|(r, c)| decide(r) == decide(c))
        .count();
    Ok(same as f64 / reference.len() as f64)
}

/// Decisions of a sequence, as class indices.
pub fn decisions(outputs: &[Distribution]) -> Vec<usize> {
    outputs.iter().map(|d| decide(d).class_index()).collect()
}
