//! Scalarization sweeps: sample convex weights, evaluate the closed-form
//! optimum for each, and optionally mix pairs of optima at random.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::predictors::{optimal_projection, OptimalPredictors, WeightVector};
use crate::rng;

/// Uniform point of the probability simplex from `k - 1` sorted uniforms.
fn simplex_point<R: Rng>(k: usize, rng: &mut R) -> WeightVector {
    let mut cuts: Vec<f64> = (0..k - 1).map(|_| rng.random::<f64>()).collect();
    cuts.sort_by(f64::total_cmp);
    let mut lambda = Vec::with_capacity(k);
    let mut prev = 0.0;
    for c in cuts {
        lambda.push(c - prev);
        prev = c;
    }
    lambda.push(1.0 - prev);
    WeightVector::new(lambda).expect("spacings of [0, 1] lie on the simplex")
}

/// `count` weights uniform on the `(k-1)`-simplex. For `k = 3` this is
/// `(min(m₁,m₂), max - min, 1 - max)` with `m₁, m₂ ~ U(0, 1)`.
pub fn sample_simplex_weights(k: usize, count: usize, seed: u64) -> Result<Vec<WeightVector>> {
    if k < 2 {
        return Err(Error::InvalidInput("weight sampling needs k >= 2".into()));
    }
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| simplex_point(k, &mut rng::stream(seed, i)))
        .collect())
}

/// The second network of a randomized pair and the probability `t` of
/// using the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub partner: WeightVector,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub weights: Vec<WeightVector>,
    /// Present for randomized sweeps, aligned with `weights`.
    pub mixtures: Option<Vec<Mixture>>,
    /// Per-task losses.
    pub losses: Vec<DVector<f64>>,
    /// Per-task objective values `ŷᵢᵀ P ŷᵢ`.
    pub objectives: Vec<DVector<f64>>,
    /// Samples dropped because the weighted predictor matrix vanished.
    pub skipped: usize,
}

impl SweepResult {
    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }
}

fn check_offsets(preds: &OptimalPredictors, offsets: &DVector<f64>) -> Result<()> {
    if offsets.len() != preds.k() || offsets.iter().any(|o| !(*o >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "expected {} non-negative offsets",
            preds.k()
        )));
    }
    Ok(())
}

/// Evaluates the closed-form optimum for `count` uniformly sampled weights.
pub fn run_sweep(
    preds: &OptimalPredictors,
    offsets: &DVector<f64>,
    q: usize,
    count: usize,
    seed: u64,
) -> Result<SweepResult> {
    check_offsets(preds, offsets)?;
    let weights = sample_simplex_weights(preds.k(), count, seed)?;
    let evaluated: Vec<Option<DVector<f64>>> = weights
        .par_iter()
        .map(|w| match optimal_projection(preds, w, q) {
            Ok((obj, _)) => Ok(Some(obj)),
            Err(Error::DegenerateWeight) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;

    let t = preds.sq_norms();
    let mut out = SweepResult {
        weights: Vec::with_capacity(count),
        mixtures: None,
        losses: Vec::with_capacity(count),
        objectives: Vec::with_capacity(count),
        skipped: 0,
    };
    for (w, obj) in weights.into_iter().zip(evaluated) {
        match obj {
            Some(obj) => {
                out.losses.push(t - &obj + offsets);
                out.objectives.push(obj);
                out.weights.push(w);
            }
            None => out.skipped += 1,
        }
    }
    Ok(out)
}

/// `t·loss1 + (1 - t)·loss2`: the expected loss of a network that uses the
/// first model with probability `t`.
pub fn randomized_combination(loss1: &DVector<f64>, loss2: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
    if loss1.len() != loss2.len() {
        return Err(Error::InvalidInput("loss vectors differ in length".into()));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidInput(format!("mixing probability {t} outside [0, 1]")));
    }
    Ok(loss1 * t + loss2 * (1.0 - t))
}

/// Randomized scalarization: each sample draws two weights and `t ~ U(0, 1)`
/// and reports the mixture of the two closed-form optima.
pub fn run_randomized_sweep(
    preds: &OptimalPredictors,
    offsets: &DVector<f64>,
    q: usize,
    count: usize,
    seed: u64,
) -> Result<SweepResult> {
    check_offsets(preds, offsets)?;
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    let k = preds.k();
    if k < 2 {
        return Err(Error::InvalidInput("weight sampling needs k >= 2".into()));
    }
    type Sample = (WeightVector, WeightVector, f64, Option<DVector<f64>>);
    let samples: Vec<Sample> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i);
            let first = simplex_point(k, &mut rng);
            let second = simplex_point(k, &mut rng);
            let t = rng.random::<f64>();
            let a = optimal_projection(preds, &first, q);
            let b = optimal_projection(preds, &second, q);
            let mixed = match (a, b) {
                (Ok((oa, _)), Ok((ob, _))) => Some(randomized_combination(&oa, &ob, t)?),
                (Err(Error::DegenerateWeight), _) | (_, Err(Error::DegenerateWeight)) => None,
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            Ok((first, second, t, mixed))
        })
        .collect::<Result<_>>()?;

    let tvec = preds.sq_norms();
    let mut out = SweepResult {
        weights: Vec::with_capacity(count),
        mixtures: Some(Vec::with_capacity(count)),
        losses: Vec::with_capacity(count),
        objectives: Vec::with_capacity(count),
        skipped: 0,
    };
    for (first, second, t, mixed) in samples {
        let Some(obj) = mixed else {
            out.skipped += 1;
            continue;
        };
        // Losses are affine in the objective, so mixing commutes with the map.
        out.losses.push(tvec - &obj + offsets);
        out.objectives.push(obj);
        out.weights.push(first);
        if let Some(m) = out.mixtures.as_mut() {
            m.push(Mixture { partner: second, t });
        }
    }
    Ok(out)
}

/// Smallest Euclidean distance from `target` to `points`, with the first
/// index attaining it.
pub fn distance_to_point(points: &[DVector<f64>], target: &DVector<f64>) -> Result<(f64, usize)> {
    if points.is_empty() {
        return Err(Error::EmptyList);
    }
    let mut best = (f64::INFINITY, 0);
    for (i, p) in points.iter().enumerate() {
        if p.len() != target.len() {
            return Err(Error::InvalidInput("point dimension differs from target".into()));
        }
        let d = (p - target).norm();
        if d < best.0 {
            best = (d, i);
        }
    }
    Ok(best)
}
