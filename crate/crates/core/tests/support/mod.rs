#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use yayambo::{validate_distribution, Distribution, EnsembleSnapshot};

/// Straight-line transcription of the consensus update: build every support
/// `beta[j][i][k]` from the previous state, form `p_ik * sum_{j != i} beta`,
/// normalize by the component sum, and sum the Euclidean movements.
/// Kept deliberately naive and independent of the library's step.
pub fn oracle_step(prev: &[Vec<f64>], epsilon0: f64) -> (Vec<Vec<f64>>, f64) {
    let m = prev.len();
    let l = prev[0].len();
    let mut beta = vec![vec![vec![0.0; l]; m]; m];
    for i in 0..m {
        for j in 0..m {
            if j == i {
                continue;
            }
            for k in 0..l {
                let ratio = (prev[i][k] + epsilon0) / (prev[j][k] + epsilon0);
                let d = prev[i][k] * ratio.ln().abs();
                beta[j][i][k] = prev[j][k] / (1.0 + d);
            }
        }
    }
    let mut next = vec![vec![0.0; l]; m];
    let mut difference = 0.0;
    for i in 0..m {
        for k in 0..l {
            let mut s = 0.0;
            for j in 0..m {
                if j != i {
                    s += beta[j][i][k];
                }
            }
            next[i][k] = prev[i][k] * s;
        }
        let alpha: f64 = next[i].iter().sum();
        for k in 0..l {
            next[i][k] /= alpha;
        }
        let mut sq = 0.0;
        for k in 0..l {
            sq += (next[i][k] - prev[i][k]).powi(2);
        }
        difference += sq.sqrt();
    }
    (next, difference)
}

/// A point drawn from the flat distribution over the probability simplex.
pub fn flat_simplex(rng: &mut ChaCha8Rng, l: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..l)
        .map(|_| {
            let u: f64 = rng.gen();
            -(1.0 - u).ln()
        })
        .collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// Flat-simplex ensemble with `m` members over `l` classes.
pub fn random_ensemble(rng: &mut ChaCha8Rng, m: usize, l: usize) -> EnsembleSnapshot {
    let members = (0..m)
        .map(|_| validate_distribution(&flat_simplex(rng, l), 1e-9).unwrap())
        .collect();
    EnsembleSnapshot::new(members).unwrap()
}

/// Like [`random_ensemble`], but each entry is zeroed with probability 0.2
/// (keeping at least one positive entry per member).
pub fn sparse_ensemble(rng: &mut ChaCha8Rng, m: usize, l: usize) -> EnsembleSnapshot {
    let members = (0..m)
        .map(|_| {
            let mut row = flat_simplex(rng, l);
            let keep = rng.gen_range(0..l);
            for (k, p) in row.iter_mut().enumerate() {
                if k != keep && rng.gen_bool(0.2) {
                    *p = 0.0;
                }
            }
            yayambo::normalize(&row).unwrap()
        })
        .collect();
    EnsembleSnapshot::new(members).unwrap()
}

pub fn rows(members: &[Distribution]) -> Vec<Vec<f64>> {
    members.iter().map(|d| d.probs().to_vec()).collect()
}

pub fn has_ties(ensemble: &EnsembleSnapshot) -> bool {
    ensemble.members().iter().any(|d| {
        let p = d.probs();
        (0..p.len()).any(|a| (a + 1..p.len()).any(|b| p[a] == p[b]))
    })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// A random permutation of `0..n`.
pub fn permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}
