//! Iterative support-weighted consensus.
//!
//! Each member distribution is repeatedly reweighted by the support it
//! receives from the other members. The class-`k` support that member `j`
//! grants member `i` is
//!
//! ```text
//! support(j -> i, k) = p_jk / (1 + D(p_ik, p_jk))
//! D(a, b)            = a * |ln((a + eps0) / (b + eps0))|
//! ```
//!
//! and the update is `p_ik <- p_ik * sum_{j != i} support(j -> i, k)`,
//! renormalized per member. All supports of an iteration are computed from the
//! previous iteration's state. Iteration stops once the summed Euclidean
//! movement of the members drops below `m * epsilon` or after `max_iter`
//! steps, and the final members are combined with the sum rule.

use alloc::vec::Vec;

use crate::baselines::mean_distribution;
use crate::distribution::{decide, Decision, Distribution, EnsembleSnapshot};
use crate::error::{FusionError, Result};

/// Stopping and smoothing parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YayamboParams {
    /// Convergence threshold, scaled by the member count.
    pub epsilon: f64,
    /// Smoothing term inside the dissimilarity logarithm.
    pub epsilon0: f64,
    /// Iteration cap.
    pub max_iter: usize,
}

impl YayamboParams {
    pub const DEFAULT_EPSILON: f64 = 1e-6;
    pub const DEFAULT_EPSILON0: f64 = 1e-3;
    pub const DEFAULT_MAX_ITER: usize = 100;

    pub fn new(epsilon: f64, epsilon0: f64, max_iter: usize) -> Result<Self> {
        let params = Self {
            epsilon,
            epsilon0,
            max_iter,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(FusionError::InvalidParams(
                "epsilon must be positive and finite",
            ));
        }
        if !(self.epsilon0 > 0.0 && self.epsilon0.is_finite()) {
            return Err(FusionError::InvalidParams(
                "epsilon0 must be positive and finite",
            ));
        }
        if self.max_iter == 0 {
            return Err(FusionError::InvalidParams("max_iter must be at least 1"));
        }
        Ok(())
    }
}

impl Default for YayamboParams {
    fn default() -> Self {
        Self {
            epsilon: Self::DEFAULT_EPSILON,
            epsilon0: Self::DEFAULT_EPSILON0,
            max_iter: Self::DEFAULT_MAX_ITER,
        }
    }
}

/// `p_ik * |ln((p_ik + eps0) / (p_jk + eps0))|`.
pub fn dissimilarity(p_ik: f64, p_jk: f64, epsilon0: f64) -> f64 {
    p_ik * libm::fabs(libm::log((p_ik + epsilon0) / (p_jk + epsilon0)))
}

/// Class-`k` support for `pi_i` from `pi_j`; never exceeds `pi_j[k]`.
pub fn class_support(pi_i: &Distribution, pi_j: &Distribution, k: usize, epsilon0: f64) -> f64 {
    let (a, b) = (pi_i.get(k), pi_j.get(k));
    b / (1.0 + dissimilarity(a, b, epsilon0))
}

/// The member distributions at some iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusState {
    distributions: Vec<Distribution>,
    iteration: usize,
    last_difference: Option<f64>,
}

impl ConsensusState {
    pub fn new(ensemble: &EnsembleSnapshot) -> Self {
        Self {
            distributions: ensemble.members().to_vec(),
            iteration: 0,
            last_difference: None,
        }
    }

    pub fn distributions(&self) -> &[Distribution] {
        &self.distributions
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Summed member movement of the step that produced this state.
    pub fn last_difference(&self) -> Option<f64> {
        self.last_difference
    }

    pub fn members(&self) -> usize {
        self.distributions.len()
    }

    pub fn classes(&self) -> usize {
        self.distributions[0].classes()
    }

    /// Sum-rule combination of the current members.
    pub fn sum_rule(&self) -> Distribution {
        mean_distribution(&self.distributions)
    }
}

/// All pairwise class supports of one state, indexed `(from j, to i, class k)`.
/// Diagonal entries are zero and unused.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportTensor {
    members: usize,
    classes: usize,
    supports: Vec<f64>,
}

impl SupportTensor {
    pub fn compute(state: &ConsensusState, epsilon0: f64) -> Self {
        let (m, l) = (state.members(), state.classes());
        let mut supports = alloc::vec![0.0; m * m * l];
        for (j, pj) in state.distributions.iter().enumerate() {
            for (i, pi) in state.distributions.iter().enumerate() {
                if i == j {
                    continue;
                }
                for k in 0..l {
                    supports[(j * m + i) * l + k] = class_support(pi, pj, k, epsilon0);
                }
            }
        }
        Self {
            members: m,
            classes: l,
            supports,
        }
    }

    pub fn get(&self, from: usize, to: usize, k: usize) -> f64 {
        self.supports[(from * self.members + to) * self.classes + k]
    }

    pub fn members(&self) -> usize {
        self.members
    }

    pub fn classes(&self) -> usize {
        self.classes
    }
}

/// Sum over members of the Euclidean distance between their two positions.
pub fn consensus_difference(prev: &ConsensusState, next: &ConsensusState) -> Result<f64> {
    if prev.members() != next.members() || prev.classes() != next.classes() {
        return Err(FusionError::DimensionMismatch);
    }
    Ok(prev
        .distributions
        .iter()
        .zip(&next.distributions)
        .map(|(a, b)| euclidean(a.probs(), b.probs()))
        .sum())
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// One synchronous consensus update. Needs at least two members.
pub fn yayambo_step(state: &ConsensusState, epsilon0: f64) -> Result<ConsensusState> {
    let (m, l) = (state.members(), state.classes());
    if m < 2 {
        return Err(FusionError::InvalidParams(
            "a consensus step needs at least two members",
        ));
    }
    let iteration = state.iteration + 1;
    // ln(p + eps0) once per entry; the pairwise log-ratio is a difference of these
    let logs: Vec<f64> = state
        .distributions
        .iter()
        .flat_map(|d| d.probs().iter().map(|&p| libm::log(p + epsilon0)))
        .collect();

    let mut next = Vec::with_capacity(m);
    let mut difference = 0.0;
    let mut raw = alloc::vec![0.0; l];
    for (i, pi) in state.distributions.iter().enumerate() {
        for (k, slot) in raw.iter_mut().enumerate() {
            let p_ik = pi.get(k);
            if p_ik == 0.0 {
                *slot = 0.0;
                continue;
            }
            let log_ik = logs[i * l + k];
            let support: f64 = (0..m)
                .filter(|&j| j != i)
                .map(|j| {
                    let p_jk = state.distributions[j].get(k);
                    p_jk / (1.0 + p_ik * libm::fabs(log_ik - logs[j * l + k]))
                })
                .sum();
            *slot = p_ik * support;
        }
        let mass: f64 = raw.iter().sum();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(FusionError::DegenerateUpdate {
                member: i,
                iteration,
            });
        }
        let updated: Vec<f64> = raw.iter().map(|v| v / mass).collect();
        difference += euclidean(pi.probs(), &updated);
        next.push(Distribution::from_normalized(updated));
    }
    Ok(ConsensusState {
        distributions: next,
        iteration,
        last_difference: Some(difference),
    })
}

/// Result of a full consensus run.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionOutcome {
    /// Sum-rule combination of the final member distributions.
    pub fused: Distribution,
    pub decision: Decision,
    pub iterations: usize,
    pub converged: bool,
    /// Movement of the last step, absent when no step ran.
    pub final_difference: Option<f64>,
    /// Every state from the input (iteration 0) to the final one, when requested.
    pub trajectory: Option<Vec<ConsensusState>>,
}

/// Runs consensus updates to convergence or the iteration cap.
///
/// A single-member ensemble is returned unchanged as converged after zero
/// iterations.
pub fn yayambo_fuse(
    ensemble: &EnsembleSnapshot,
    params: &YayamboParams,
    keep_trajectory: bool,
) -> Result<FusionOutcome> {
    params.validate()?;
    let mut state = ConsensusState::new(ensemble);
    let mut trajectory = keep_trajectory.then(|| alloc::vec![state.clone()]);
    let m = ensemble.len();
    let mut converged = m == 1;

    if m > 1 {
        let threshold = m as f64 * params.epsilon;
        while state.iteration < params.max_iter {
            state = yayambo_step(&state, params.epsilon0)?;
            if let Some(t) = trajectory.as_mut() {
                t.push(state.clone());
            }
            if state.last_difference.is_some_and(|d| d < threshold) {
                converged = true;
                break;
            }
        }
    }

    let fused = state.sum_rule();
    Ok(FusionOutcome {
        decision: decide(&fused),
        fused,
        iterations: state.iteration,
        converged,
        final_difference: state.last_difference,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(rows: &[&[f64]]) -> EnsembleSnapshot {
        EnsembleSnapshot::from_rows(rows).unwrap()
    }

    #[test]
    fn dissimilarity_examples() {
        for x in [0.0, 0.1, 0.5, 1.0] {
            assert_eq!(dissimilarity(x, x, 1e-6), 0.0);
            assert_eq!(dissimilarity(0.0, x, 1e-6), 0.0);
        }
        // 0.3 * |ln(0.300001 / 0.800001)|
        assert!((dissimilarity(0.3, 0.8, 1e-6) - 0.294_248_150_904_950_1).abs() < 1e-14);
    }

    #[test]
    fn class_support_examples() {
        let a = Distribution::uniform(3).unwrap();
        for k in 0..3 {
            assert_eq!(class_support(&a, &a, k, 1e-6), a.get(k));
        }
        let pi = crate::normalize(&[0.3, 0.7]).unwrap();
        let pj = crate::normalize(&[0.8, 0.2]).unwrap();
        // 0.8 / (1 + 0.2942481509...)
        assert!((class_support(&pi, &pj, 0, 1e-6) - 0.618_119_484_614_007_6).abs() < 1e-14);
        let zero = crate::normalize(&[0.0, 1.0]).unwrap();
        assert_eq!(class_support(&pi, &zero, 0, 1e-6), 0.0);
    }

    #[test]
    fn step_on_uniform_is_fixed_point() {
        let u = [0.25; 4];
        let state = ConsensusState::new(&snap(&[&u, &u, &u]));
        let next = yayambo_step(&state, 1e-3).unwrap();
        assert_eq!(next.last_difference(), Some(0.0));
        assert_eq!(next.iteration(), 1);
        for d in next.distributions() {
            assert_eq!(d.probs(), &u);
        }
    }

    #[test]
    fn step_on_identical_members_squares() {
        let state = ConsensusState::new(&snap(&[&[0.6, 0.4], &[0.6, 0.4]]));
        let next = yayambo_step(&state, 1e-6).unwrap();
        for d in next.distributions() {
            assert!((d.get(0) - 0.36 / 0.52).abs() < 1e-15);
            assert!((d.get(1) - 0.16 / 0.52).abs() < 1e-15);
        }
    }

    #[test]
    fn step_requires_two_members() {
        let state = ConsensusState::new(&snap(&[&[0.6, 0.4]]));
        assert!(matches!(
            yayambo_step(&state, 1e-6),
            Err(FusionError::InvalidParams(_))
        ));
    }

    #[test]
    fn disjoint_one_hots_are_degenerate() {
        let err = yayambo_fuse(
            &snap(&[&[1.0, 0.0], &[0.0, 1.0]]),
            &YayamboParams::default(),
            false,
        )
        .unwrap_err();
        assert_eq!(
            err,
            FusionError::DegenerateUpdate {
                member: 0,
                iteration: 1
            }
        );
    }

    #[test]
    fn single_member_passthrough() {
        let out = yayambo_fuse(&snap(&[&[0.3, 0.7]]), &YayamboParams::default(), true).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.converged);
        assert_eq!(out.fused.probs(), &[0.3, 0.7]);
        assert_eq!(out.decision.class_index(), 1);
        assert_eq!(out.trajectory.unwrap().len(), 1);
        assert_eq!(out.final_difference, None);
    }

    #[test]
    fn one_hot_unanimity_converges_in_one_step() {
        let e = [1.0, 0.0, 0.0];
        let out = yayambo_fuse(&snap(&[&e, &e, &e]), &YayamboParams::default(), false).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.fused.probs(), &e);
        assert_eq!(out.decision.class_index(), 0);
    }

    #[test]
    fn uniform_members_converge_and_tie_to_zero() {
        let u = [1.0 / 3.0; 3];
        let out = yayambo_fuse(&snap(&[&u, &u]), &YayamboParams::default(), false).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.decision.class_index(), 0);
    }

    #[test]
    fn iteration_cap_is_respected() {
        let params = YayamboParams {
            max_iter: 2,
            ..YayamboParams::default()
        };
        let out = yayambo_fuse(&snap(&[&[0.3, 0.7], &[0.8, 0.2]]), &params, true).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 2);
        assert_eq!(out.trajectory.unwrap().len(), 3);
    }

    #[test]
    fn params_validation() {
        assert!(YayamboParams::new(0.0, 1e-3, 10).is_err());
        assert!(YayamboParams::new(1e-6, -1.0, 10).is_err());
        assert!(YayamboParams::new(1e-6, 1e-3, 0).is_err());
        assert!(YayamboParams::new(1e-6, 1e-6, 1).is_ok());
    }

    #[test]
    fn consensus_difference_examples() {
        let s = ConsensusState::new(&snap(&[&[0.3, 0.7], &[0.8, 0.2]]));
        assert_eq!(consensus_difference(&s, &s).unwrap(), 0.0);
        let a = ConsensusState::new(&snap(&[&[1.0, 0.0]]));
        let b = ConsensusState::new(&snap(&[&[0.0, 1.0]]));
        assert!((consensus_difference(&a, &b).unwrap() - core::f64::consts::SQRT_2).abs() < 1e-15);
        let c = ConsensusState::new(&snap(&[&[0.5, 0.5], &[0.5, 0.5]]));
        assert_eq!(
            consensus_difference(&a, &c),
            Err(FusionError::DimensionMismatch)
        );
    }

    #[test]
    fn support_tensor_matches_class_support() {
        let s = ConsensusState::new(&snap(&[&[0.3, 0.7], &[0.8, 0.2], &[0.5, 0.5]]));
        let t = SupportTensor::compute(&s, 1e-3);
        let d = s.distributions();
        assert_eq!(t.get(1, 0, 0), class_support(&d[0], &d[1], 0, 1e-3));
        assert_eq!(t.get(2, 1, 1), class_support(&d[1], &d[2], 1, 1e-3));
        assert_eq!(t.get(0, 0, 0), 0.0);
    }
}
