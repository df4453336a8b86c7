//! Full-exploration conditions.
//!
//! C1 asks for sign flips `sᵢ` making every pairwise inner product `⟨sᵢŷᵢ, sⱼŷⱼ⟩`
//! non-negative, i.e. `DGD` doubly non-negative. C2 asks the same of `Q = G⁻¹`.
//! Both reduce to 2-colouring the graph of nonzero entries, where a negative
//! entry demands opposite signs and a positive one equal signs.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::predictors::OptimalPredictors;
use crate::rng;
use crate::surfaces::{SignPattern, MAX_ENUMERATED_TASKS};

/// Entries with `|x| <= SIGN_ZERO_TOL * max|M|` are treated as uncorrelated.
pub const SIGN_ZERO_TOL: f64 = 1e-10;

/// Entrywise slack accepted by the brute-force check.
pub const NONNEG_SLACK: f64 = 1e-12;

/// A sign-constraint cycle whose product is `-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// The edge whose constraint contradicted the propagated signs.
    pub edge: (usize, usize),
    /// Closed walk `c₀ → c₁ → … → c₀` through `edge`; consecutive indices are
    /// joined by nonzero entries.
    pub cycle: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub holds: bool,
    pub certificate: Option<SignPattern>,
    pub witness: Option<Witness>,
}

fn sign_of(x: f64, zero: f64) -> i8 {
    if x.abs() <= zero {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

/// Sign matrix of `m` under the relative zero threshold.
pub fn sign_matrix(m: &DMatrix<f64>) -> Vec<Vec<i8>> {
    let zero = SIGN_ZERO_TOL * m.amax();
    let k = m.nrows();
    (0..k)
        .map(|i| (0..k).map(|j| sign_of(m[(i, j)], zero)).collect())
        .collect()
}

/// Propagates sign constraints of a symmetric matrix in ascending index order.
///
/// Each connected component of the nonzero pattern is rooted at its smallest
/// index with sign `+1`; undetermined signs therefore end up `+1`.
pub fn sign_propagation(m: &DMatrix<f64>) -> ConditionReport {
    let k = m.nrows();
    let sgn = sign_matrix(m);
    let mut signs: Vec<i8> = vec![0; k];
    let mut parent: Vec<Option<usize>> = vec![None; k];

    for root in 0..k {
        if signs[root] != 0 {
            continue;
        }
        signs[root] = 1;
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            for j in 0..k {
                let s = sgn[i][j];
                if j == i || s == 0 {
                    continue;
                }
                if signs[j] == 0 {
                    signs[j] = signs[i] * s;
                    parent[j] = Some(i);
                    queue.push_back(j);
                } else if signs[i] * signs[j] * s < 0 {
                    return ConditionReport {
                        holds: false,
                        certificate: None,
                        witness: Some(Witness {
                            edge: (i.min(j), i.max(j)),
                            cycle: close_cycle(&parent, i, j),
                        }),
                    };
                }
            }
        }
    }

    ConditionReport {
        holds: true,
        certificate: Some(SignPattern::new(signs).expect("every sign assigned")),
        witness: None,
    }
}

fn path_to_root(parent: &[Option<usize>], mut node: usize) -> Vec<usize> {
    let mut path = vec![node];
    while let Some(p) = parent[node] {
        path.push(p);
        node = p;
    }
    path
}

// Tree path i -> lca -> j, closed by the edge (j, i).
fn close_cycle(parent: &[Option<usize>], i: usize, j: usize) -> Vec<usize> {
    let pi = path_to_root(parent, i);
    let pj = path_to_root(parent, j);
    let lca = *pi
        .iter()
        .find(|x| pj.contains(x))
        .expect("both nodes lie in the same tree");
    let mut cycle: Vec<usize> = pi.iter().copied().take_while(|x| *x != lca).collect();
    cycle.push(lca);
    let down: Vec<usize> = pj.iter().copied().take_while(|x| *x != lca).collect();
    cycle.extend(down.into_iter().rev());
    cycle
}

/// Product of entry signs along the closed walk of `witness`.
pub fn cycle_sign(m: &DMatrix<f64>, witness: &Witness) -> i8 {
    let sgn = sign_matrix(m);
    let c = &witness.cycle;
    (0..c.len())
        .map(|e| sgn[c[e]][c[(e + 1) % c.len()]])
        .product()
}

/// C1: some sign flip makes the Gram matrix of the predictors entrywise
/// non-negative.
pub fn check_c1(preds: &OptimalPredictors) -> ConditionReport {
    sign_propagation(preds.gram())
}

/// Inverse of a symmetric positive-definite matrix via Cholesky, failing on
/// pivots below `1e-12 · trace / k`.
pub fn spd_inverse(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = g.nrows();
    let threshold = 1e-12 * g.trace() / k as f64;
    let mut l = DMatrix::<f64>::zeros(k, k);
    for j in 0..k {
        let mut d = g[(j, j)];
        for c in 0..j {
            d -= l[(j, c)] * l[(j, c)];
        }
        if !(d > threshold) {
            return Err(Error::SingularGram {
                pivot: d,
                threshold,
            });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..k {
            let mut s = g[(i, j)];
            for c in 0..j {
                s -= l[(i, c)] * l[(j, c)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    let linv = l
        .solve_lower_triangular(&DMatrix::identity(k, k))
        .expect("positive diagonal");
    let inv = linv.tr_mul(&linv);
    Ok((&inv + inv.transpose()) * 0.5)
}

/// C2: some sign flip makes `Q = G⁻¹` entrywise non-negative.
pub fn check_c2(preds: &OptimalPredictors) -> Result<ConditionReport> {
    let q = spd_inverse(preds.gram())?;
    Ok(sign_propagation(&q))
}

/// Exhaustive search over the `2^(k-1)` canonical sign patterns for one that
/// makes `D M D` entrywise `>= -1e-12`. Returns the lexicographically first.
pub fn brute_force_condition(m: &DMatrix<f64>) -> Result<ConditionReport> {
    let k = m.nrows();
    if k == 0 || m.ncols() != k {
        return Err(Error::InvalidInput("expected a non-empty square matrix".into()));
    }
    if k > MAX_ENUMERATED_TASKS {
        return Err(Error::TooManyTasks {
            k,
            cap: MAX_ENUMERATED_TASKS,
        });
    }
    for index in 0..1u64 << (k - 1) {
        let pattern = SignPattern::from_index(k, index);
        let s = pattern.signs();
        let ok = (0..k).all(|i| {
            (0..k).all(|j| m[(i, j)] * f64::from(s[i]) * f64::from(s[j]) >= -NONNEG_SLACK)
        });
        if ok {
            return Ok(ConditionReport {
                holds: true,
                certificate: Some(pattern),
                witness: None,
            });
        }
    }
    Ok(ConditionReport {
        holds: false,
        certificate: None,
        witness: None,
    })
}

/// Fraction of random predictor sets satisfying C1. Each trial draws `k`
/// standard Gaussian vectors in dimension `k + 2` from its own stream.
pub fn estimate_c1_probability(k: usize, trials: usize, seed: u64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidInput("k must be at least 2".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let n = k + 2;
    let hits: usize = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng::stream(seed, trial);
            let y = DMatrix::from_fn(n, k, |_, _| rng.sample::<f64, _>(StandardNormal));
            let g = y.tr_mul(&y);
            usize::from(sign_propagation(&g).holds)
        })
        .sum();
    Ok(hits as f64 / trials as f64)
}

/// Whether `D M D` is entrywise non-negative within the brute-force slack.
pub fn certifies(m: &DMatrix<f64>, pattern: &SignPattern) -> bool {
    let d = DVector::from_iterator(pattern.len(), pattern.signs().iter().map(|s| f64::from(*s)));
    let k = m.nrows();
    (0..k).all(|i| (0..k).all(|j| m[(i, j)] * d[i] * d[j] >= -NONNEG_SLACK))
}
