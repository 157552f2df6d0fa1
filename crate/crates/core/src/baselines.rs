//! Fusion rules that treat every classifier as equally credible.
//!
//! All four rules are symmetric in the ensemble members. Only the product rule
//! can fail, when every class is vetoed by some member's exact zero.

use alloc::vec::Vec;

use crate::distribution::{normalize, Distribution, EnsembleSnapshot};
use crate::error::{FusionError, Result};

/// Arithmetic mean of the member distributions.
pub fn fuse_sum(ensemble: &EnsembleSnapshot) -> Distribution {
    mean_distribution(ensemble.members())
}

/// `members` must be nonempty and share a class count.
pub(crate) fn mean_distribution(members: &[Distribution]) -> Distribution {
    let m = members.len() as f64;
    let mut acc = alloc::vec![0.0; members[0].classes()];
    for member in members {
        for (a, &p) in acc.iter_mut().zip(member.probs()) {
            *a += p;
        }
    }
    acc.iter_mut().for_each(|a| *a /= m);
    Distribution::from_normalized(acc)
}

/// Normalized componentwise product, accumulated in log space.
pub fn fuse_product(ensemble: &EnsembleSnapshot) -> Result<Distribution> {
    let mut log_mass = alloc::vec![0.0_f64; ensemble.classes()];
    for member in ensemble.members() {
        for (acc, &p) in log_mass.iter_mut().zip(member.probs()) {
            *acc += if p > 0.0 {
                libm::log(p)
            } else {
                f64::NEG_INFINITY
            };
        }
    }
    let peak = log_mass.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Err(FusionError::ZeroProductMass);
    }
    let scaled: Vec<f64> = log_mass.iter().map(|&v| libm::exp(v - peak)).collect();
    normalize(&scaled)
}

/// `1` for every class attaining the member's maximum, `0` elsewhere.
///
/// Ties produce several ones.
pub fn majority_indicator(d: &Distribution) -> Vec<u8> {
    let max = d.probs().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    d.probs().iter().map(|&p| u8::from(p == max)).collect()
}

/// Fraction of members whose maximum set includes each class.
///
/// Sums to more than one when some member has tied maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteVector {
    votes: Vec<f64>,
}

impl VoteVector {
    pub fn votes(&self) -> &[f64] {
        &self.votes
    }

    pub fn total(&self) -> f64 {
        self.votes.iter().sum()
    }
}

/// Majority vote: the raw vote fractions and their renormalized distribution.
pub fn fuse_majority(ensemble: &EnsembleSnapshot) -> (VoteVector, Distribution) {
    let m = ensemble.len() as f64;
    let mut counts = alloc::vec![0u32; ensemble.classes()];
    for member in ensemble.members() {
        for (c, hit) in counts.iter_mut().zip(majority_indicator(member)) {
            *c += u32::from(hit);
        }
    }
    let votes: Vec<f64> = counts.iter().map(|&c| f64::from(c) / m).collect();
    // every member votes for at least one class, so the mass is >= 1
    let dist = normalize(&votes).expect("vote mass is at least one");
    (VoteVector { votes }, dist)
}

/// Borda points of one member: a permutation of `1..=l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BordaPoints {
    points: Vec<usize>,
}

impl BordaPoints {
    pub fn points(&self) -> &[usize] {
        &self.points
    }
}

/// Class `k` earns `l` minus the number of classes ranked above it; among
/// equal probabilities the smaller index ranks higher.
pub fn borda_points(d: &Distribution) -> BordaPoints {
    let p = d.probs();
    let l = p.len();
    let points = (0..l)
        .map(|k| {
            let above = (0..l)
                .filter(|&i| p[i] > p[k] || (p[i] == p[k] && i < k))
                .count();
            l - above
        })
        .collect();
    BordaPoints { points }
}

/// Borda count, scaled by `2 / (m l (l + 1))` so the result is a distribution.
pub fn fuse_borda(ensemble: &EnsembleSnapshot) -> Distribution {
    let l = ensemble.classes();
    let mut totals = alloc::vec![0usize; l];
    for member in ensemble.members() {
        for (t, pts) in totals.iter_mut().zip(borda_points(member).points) {
            *t += pts;
        }
    }
    let scale = 2.0 / (ensemble.len() * l * (l + 1)) as f64;
    Distribution::from_normalized(totals.iter().map(|&t| t as f64 * scale).collect())
}
