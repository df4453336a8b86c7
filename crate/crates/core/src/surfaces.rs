//! Feasible-region geometry for the two extreme widths `q = 1` and `q = k - 1`.
//!
//! With `Q = G⁻¹` and a sign pattern `D`, the `q = 1` region is the union of
//! the surfaces `{v : √vᵀ (DQD) √v = 1}` over all `2^(k-1)` patterns (a
//! pattern and its negation give the same surface). The `q = k - 1` region is
//! its mirror image under `v ↦ t - v`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::predictors::OptimalPredictors;
use crate::rng;

/// Largest task count for which the `2^(k-1)` surfaces are enumerated.
pub const MAX_ENUMERATED_TASKS: usize = 20;

/// Default absolute residual accepted as "on the surface".
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-8;

/// Slack tolerated below zero before a coordinate counts as outside the orthant.
pub const ORTHANT_SLACK: f64 = 1e-12;

/// A `±1` flipping vector, stored in canonical form (`signs[0] == +1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignPattern {
    signs: Vec<i8>,
}

impl SignPattern {
    /// Canonicalizes `signs` by negating the whole vector if needed.
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() || signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidInput(format!("not a sign vector: {signs:?}")));
        }
        let flip = signs[0] == -1;
        Ok(Self {
            signs: signs.into_iter().map(|s| if flip { -s } else { s }).collect(),
        })
    }

    pub fn identity(k: usize) -> Self {
        Self { signs: vec![1; k] }
    }

    /// The `index`-th canonical pattern in lexicographic order (`+` before
    /// `-`, position 0 fixed to `+`). Position 1 is the most significant bit.
    pub fn from_index(k: usize, index: u64) -> Self {
        let mut signs = vec![1i8; k];
        for (j, s) in signs.iter_mut().enumerate().skip(1) {
            if (index >> (k - 1 - j)) & 1 == 1 {
                *s = -1;
            }
        }
        Self { signs }
    }

    /// All `2^(k-1)` canonical patterns in lexicographic order.
    pub fn enumerate(k: usize) -> Result<Vec<Self>> {
        if k == 0 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        if k > MAX_ENUMERATED_TASKS {
            return Err(Error::TooManyTasks {
                k,
                cap: MAX_ENUMERATED_TASKS,
            });
        }
        Ok((0..1u64 << (k - 1)).map(|m| Self::from_index(k, m)).collect())
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// Zero-based indices carrying `-1`.
    pub fn flipped(&self) -> Vec<usize> {
        self.signs
            .iter()
            .enumerate()
            .filter(|(_, s)| **s < 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// `D M D` for `D = diag(signs)`.
    pub fn conjugate(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let k = self.signs.len();
        DMatrix::from_fn(k, k, |i, j| {
            m[(i, j)] * f64::from(self.signs[i]) * f64::from(self.signs[j])
        })
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.flipped().iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", ids.join(","))
    }
}

/// `E` surfaces bound the `q = 1` region, `I` surfaces the `q = k - 1` one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SurfaceKind {
    E,
    I,
}

impl SurfaceKind {
    /// Kind matching hidden width `q` for `k` tasks; `q = 1` wins when `k = 2`.
    pub fn for_width(q: usize, k: usize) -> Result<Self> {
        if q == 1 {
            Ok(Self::E)
        } else if k >= 2 && q == k - 1 {
            Ok(Self::I)
        } else {
            Err(Error::InvalidInput(format!(
                "surface geometry covers q = 1 or q = k - 1 only (q = {q}, k = {k})"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SurfaceId {
    pub kind: SurfaceKind,
    pub pattern: SignPattern,
}

impl fmt::Display for SurfaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            SurfaceKind::E => "E",
            SurfaceKind::I => "I",
        };
        write!(f, "{tag}{}", self.pattern)
    }
}

/// A point of the feasible region.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasiblePoint {
    /// Per-task objective values `ŷᵢᵀ P ŷᵢ`.
    pub v: DVector<f64>,
    /// Unit direction that generated the point, in span coordinates.
    pub direction: Option<DVector<f64>>,
}

impl FeasiblePoint {
    /// The generating direction as an `n`-vector.
    pub fn source(&self, preds: &OptimalPredictors) -> Option<DVector<f64>> {
        self.direction.as_ref().map(|d| preds.span_basis() * d)
    }
}

/// All `2^(k-1)` surfaces of the given kind with their quadratic forms `DQD`.
pub fn enumerate_surfaces(
    preds: &OptimalPredictors,
    kind: SurfaceKind,
) -> Result<Vec<(SurfaceId, DMatrix<f64>)>> {
    let q = preds.gram_inv();
    Ok(SignPattern::enumerate(preds.k())?
        .into_iter()
        .map(|pattern| {
            let form = pattern.conjugate(q);
            (SurfaceId { kind, pattern }, form)
        })
        .collect())
}

fn orthant_root(u: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some((index, &value)) = u
        .iter()
        .enumerate()
        .find(|(_, x)| !(**x >= -ORTHANT_SLACK))
    {
        return Err(Error::OutOfOrthant { index, value });
    }
    Ok(u.map(|x| x.max(0.0).sqrt()))
}

fn quadratic_residual(form: &DMatrix<f64>, root: &DVector<f64>) -> f64 {
    root.dot(&(form * root)) - 1.0
}

fn surface_argument(kind: SurfaceKind, t: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    if v.len() != t.len() {
        return Err(Error::InvalidInput(format!(
            "point has {} coordinates, expected {}",
            v.len(),
            t.len()
        )));
    }
    orthant_root(v)?;
    match kind {
        SurfaceKind::E => Ok(v.clone()),
        SurfaceKind::I => Ok(t - v),
    }
}

/// `√uᵀ F √u - 1` with `u = v` (`E`) or `u = t - v` (`I`).
pub fn surface_residual(
    form: &DMatrix<f64>,
    kind: SurfaceKind,
    t: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<f64> {
    if form.nrows() != v.len() || form.ncols() != v.len() {
        return Err(Error::InvalidInput("form and point dimensions differ".into()));
    }
    let u = surface_argument(kind, t, v)?;
    let root = orthant_root(&u)?;
    Ok(quadratic_residual(form, &root))
}

/// Enumerated surfaces of one kind, reusable across many membership queries.
#[derive(Debug, Clone)]
pub struct SurfaceSet {
    kind: SurfaceKind,
    t: DVector<f64>,
    surfaces: Vec<(SurfaceId, DMatrix<f64>)>,
}

impl SurfaceSet {
    pub fn new(preds: &OptimalPredictors, kind: SurfaceKind) -> Result<Self> {
        Ok(Self {
            kind,
            t: preds.sq_norms().clone(),
            surfaces: enumerate_surfaces(preds, kind)?,
        })
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn surfaces(&self) -> &[(SurfaceId, DMatrix<f64>)] {
        &self.surfaces
    }

    /// Residual of `v` against every surface, in enumeration order.
    pub fn residuals(&self, v: &DVector<f64>) -> Result<Vec<f64>> {
        let u = surface_argument(self.kind, &self.t, v)?;
        let root = orthant_root(&u)?;
        Ok(self
            .surfaces
            .iter()
            .map(|(_, form)| quadratic_residual(form, &root))
            .collect())
    }

    /// Smallest `|residual|` over all surfaces.
    pub fn min_abs_residual(&self, v: &DVector<f64>) -> Result<f64> {
        Ok(self
            .residuals(v)?
            .into_iter()
            .map(f64::abs)
            .fold(f64::INFINITY, f64::min))
    }

    /// Surfaces whose residual at `v` is within `tol`.
    pub fn classify(&self, v: &DVector<f64>, tol: f64) -> Result<Vec<SurfaceId>> {
        let res = self.residuals(v)?;
        Ok(self
            .surfaces
            .iter()
            .zip(res)
            .filter(|(_, r)| r.abs() <= tol)
            .map(|((id, _), _)| id.clone())
            .collect())
    }
}

/// Canonical surfaces passing within `tol` of `v`; empty for points off the
/// boundary.
pub fn classify_point(
    preds: &OptimalPredictors,
    kind: SurfaceKind,
    v: &DVector<f64>,
    tol: f64,
) -> Result<Vec<SurfaceId>> {
    SurfaceSet::new(preds, kind)?.classify(v, tol)
}

/// Uniform unit direction in `span{ŷᵢ}` for sample `index`, in span coordinates.
fn sphere_direction(k: usize, seed: u64, index: u64) -> DVector<f64> {
    let mut rng = rng::stream(seed, index);
    loop {
        let z = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = z.norm();
        if norm > 0.0 {
            return z / norm;
        }
    }
}

/// Draws `count` points of the feasible region for the width matching `kind`.
///
/// Directions `s` are uniform on the unit sphere of `span{ŷᵢ}`; `E` returns
/// `vᵢ = ⟨ŷᵢ, s⟩²` and `I` returns `t - v`, the value of the complementary
/// `(k-1)`-dimensional projection.
pub fn sample_feasible_region(
    preds: &OptimalPredictors,
    kind: SurfaceKind,
    count: usize,
    seed: u64,
) -> Result<Vec<FeasiblePoint>> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    let k = preds.k();
    let coords = preds.span_coords();
    let t = preds.sq_norms();
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| {
            let s = sphere_direction(k, seed, i);
            let w = coords.tr_mul(&s);
            let v = DVector::from_iterator(k, w.iter().enumerate().map(|(j, x)| (x * x).min(t[j])));
            let v = match kind {
                SurfaceKind::E => v,
                SurfaceKind::I => (t - v).map(|x| x.max(0.0)),
            };
            FeasiblePoint {
                v,
                direction: Some(s),
            }
        })
        .collect())
}

/// Off-diagonal magnitudes below this fraction of the largest entry count as zero.
const TRIPLE_ZERO_TOL: f64 = 1e-12;

/// Common point of the three one-flip surfaces `E{1}`, `E{2}`, `E{3}` of the
/// canonicalized form of a `3 × 3` quadratic form.
///
/// Returns `v = (Q₂₃², Q₁₃², Q₁₂²) / r` with
/// `r = Q₁₁Q₂₃² + Q₂₂Q₁₃² + Q₃₃Q₁₂² - 2 Q₁₂Q₁₃Q₂₃`. For a form whose
/// off-diagonals are all negative the last term is `+2|Q₁₂Q₁₃Q₂₃|`.
pub fn triple_intersection_k3(q: &DMatrix<f64>) -> Result<DVector<f64>> {
    if q.shape() != (3, 3) {
        return Err(Error::InvalidInput(format!("expected a 3x3 form, got {:?}", q.shape())));
    }
    let scale = q.amax();
    let (q12, q13, q23) = (q[(0, 1)], q[(0, 2)], q[(1, 2)]);
    for (name, x) in [("q12", q12), ("q13", q13), ("q23", q23)] {
        if !(x.abs() > TRIPLE_ZERO_TOL * scale) {
            return Err(Error::PatternMismatch(format!("off-diagonal {name} = {x:e} is zero")));
        }
    }
    let r = q[(0, 0)] * q23 * q23 + q[(1, 1)] * q13 * q13 + q[(2, 2)] * q12 * q12
        - 2.0 * q12 * q13 * q23;
    if !(r > 0.0) {
        return Err(Error::PatternMismatch(format!("normalizer r = {r:e} is not positive")));
    }
    Ok(DVector::from_vec(vec![q23 * q23 / r, q13 * q13 / r, q12 * q12 / r]))
}

/// Optimization direction for [`pareto_filter`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

fn no_worse(a: f64, b: f64, sense: Sense) -> bool {
    match sense {
        Sense::Minimize => a <= b,
        Sense::Maximize => a >= b,
    }
}

/// `true` if `a` is at least as good everywhere and strictly better somewhere.
pub fn dominates(a: &DVector<f64>, b: &DVector<f64>, sense: Sense) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b.iter()) {
        if !no_worse(*x, *y, sense) {
            return false;
        }
        if x != y {
            strict = true;
        }
    }
    strict
}

/// Indices (ascending) of the non-dominated points. Duplicate points are
/// kept once, at their first occurrence.
pub fn pareto_filter(points: &[DVector<f64>], sense: Sense) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    let dim = points[0].len();
    assert!(
        points.iter().all(|p| p.len() == dim),
        "all points must share one dimension"
    );

    // After sorting best-first lexicographically, every dominator or earlier
    // duplicate of a point precedes it.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&points[i], &points[j]);
        let lex = a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| match sense {
                Sense::Minimize => x.total_cmp(y),
                Sense::Maximize => y.total_cmp(x),
            })
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal);
        lex.then(i.cmp(&j))
    });

    let mut front: Vec<usize> = Vec::new();
    for &i in &order {
        let p = &points[i];
        let beaten = front
            .iter()
            .any(|&f| dominates(&points[f], p, sense) || points[f] == *p);
        if !beaten {
            front.push(i);
        }
    }
    front.sort_unstable();
    front
}
