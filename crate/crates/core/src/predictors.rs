//! Least-squares geometry of linear MTL and closed-form scalarization optima.
//!
//! For a two-layer linear network `f(x) = aᵢᵀ Wᵀ x` the loss of task `i`
//! splits into an irreducible part `‖ŷᵢ - yᵢ‖²` (distance from the targets to
//! the column space of `X`) and an approximation part `‖XWaᵢ - ŷᵢ‖²`. The
//! weighted sum of the approximation parts is minimized by the best rank-`q`
//! approximation of `Ŷ·diag(√λ)`.

use nalgebra::{DMatrix, DVector, SVD};
use rand::distr::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::rng;

/// Singular values of `X` below this fraction of the largest are dropped when
/// forming the pseudo-inverse projection.
pub const PINV_CUTOFF: f64 = 1e-12;

/// Smallest admissible `σ_min(Ŷ) / σ_max(Ŷ)`.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Allowed deviation of `Σλᵢ` from one.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Inputs and per-task targets: `x` is `n × p`, `y` is `n × k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
}

impl TaskDataset {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        let (n, p) = x.shape();
        let k = y.ncols();
        if y.nrows() != n {
            return Err(Error::InvalidInput(format!(
                "x has {n} rows but y has {}",
                y.nrows()
            )));
        }
        if p == 0 || k == 0 {
            return Err(Error::InvalidInput("need at least one feature and one task".into()));
        }
        if n < k {
            return Err(Error::InvalidInput(format!("{n} samples cannot support {k} tasks")));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("dataset contains NaN or infinite entries".into()));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn k(&self) -> usize {
        self.y.ncols()
    }

    /// Divides every entry by `√n`, turning sums of squared residuals into
    /// mean squared errors.
    pub fn mean_scaled(&self) -> Self {
        let s = 1.0 / (self.n() as f64).sqrt();
        Self {
            x: &self.x * s,
            y: &self.y * s,
        }
    }

    /// Per-task sum of squared residuals `‖X W aᵢ - yᵢ‖²`.
    pub fn task_losses(&self, w: &DMatrix<f64>, a: &DMatrix<f64>) -> DVector<f64> {
        let resid = &self.x * w * a - &self.y;
        DVector::from_iterator(self.k(), resid.column_iter().map(|c| c.norm_squared()))
    }
}

/// The optimal linear predictors `ŷᵢ` together with their Gram matrix, its
/// inverse, and an orthonormal basis of their span.
#[derive(Debug, Clone)]
pub struct OptimalPredictors {
    yhat: DMatrix<f64>,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    sq_norms: DVector<f64>,
    // Ŷ = span_basis * span_coords, span_basis has orthonormal columns and
    // span_coords is upper triangular with a non-negative diagonal.
    span_basis: DMatrix<f64>,
    span_coords: DMatrix<f64>,
}

impl OptimalPredictors {
    /// Builds the geometry directly from predictor columns (`n × k`).
    pub fn from_predictions(yhat: DMatrix<f64>) -> Result<Self> {
        let (n, k) = yhat.shape();
        if k == 0 || n < k {
            return Err(Error::InvalidInput(format!(
                "need 1 <= k <= n predictors, got n = {n}, k = {k}"
            )));
        }
        if yhat.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("predictors contain NaN or infinite entries".into()));
        }

        let qr = yhat.clone().qr();
        let mut basis = qr.q();
        let mut coords = qr.r();
        for j in 0..k {
            if coords[(j, j)] < 0.0 {
                coords.row_mut(j).neg_mut();
                basis.column_mut(j).neg_mut();
            }
        }

        let sv = coords.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
        if !(ratio >= RANK_TOLERANCE) {
            return Err(Error::RankDeficient { ratio });
        }

        let gram = yhat.transpose() * &yhat;
        let sq_norms = gram.diagonal();

        // Q = R⁻¹ R⁻ᵀ
        let rinv = coords
            .clone()
            .solve_upper_triangular(&DMatrix::identity(k, k))
            .ok_or(Error::RankDeficient { ratio })?;
        let q = &rinv * rinv.transpose();
        let gram_inv = (&q + q.transpose()) * 0.5;

        Ok(Self {
            yhat,
            gram,
            gram_inv,
            sq_norms,
            span_basis: basis,
            span_coords: coords,
        })
    }

    pub fn k(&self) -> usize {
        self.yhat.ncols()
    }

    pub fn n(&self) -> usize {
        self.yhat.nrows()
    }

    /// Predictor matrix `Ŷ` (`n × k`).
    pub fn yhat(&self) -> &DMatrix<f64> {
        &self.yhat
    }

    /// `G = ŶᵀŶ`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `Q = G⁻¹`.
    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    /// `tᵢ = ‖ŷᵢ‖²`.
    pub fn sq_norms(&self) -> &DVector<f64> {
        &self.sq_norms
    }

    /// Orthonormal basis of `span{ŷᵢ}` (`n × k`).
    pub fn span_basis(&self) -> &DMatrix<f64> {
        &self.span_basis
    }

    /// Coordinates of the predictors in [`Self::span_basis`] (`k × k`).
    pub fn span_coords(&self) -> &DMatrix<f64> {
        &self.span_coords
    }
}

/// Orthogonal projection of the targets onto `range(X)`.
pub fn compute_optimal_predictors(data: &TaskDataset) -> Result<OptimalPredictors> {
    OptimalPredictors::from_predictions(project_onto_range(data.x(), data.y()))
}

pub(crate) fn project_onto_range(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = SVD::new(x.clone(), true, false);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > PINV_CUTOFF * smax)
        .map(|(i, _)| i)
        .collect();
    let ur = u.select_columns(&keep);
    &ur * ur.tr_mul(y)
}

/// `‖ŷᵢ - yᵢ‖²`, the part of each task loss no network can remove.
pub fn irreducible_losses(data: &TaskDataset, preds: &OptimalPredictors) -> DVector<f64> {
    let resid = preds.yhat() - data.y();
    DVector::from_iterator(data.k(), resid.column_iter().map(|c| c.norm_squared()))
}

/// Convex combination coefficients on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(DVector<f64>);

impl WeightVector {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidInput("weight vector is empty".into()));
        }
        if let Some(&bad) = lambda.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(format!("weight {bad} is not a finite non-negative number")));
        }
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidInput(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(DVector::from_vec(lambda)))
    }

    /// Rescales non-negative weights so they sum to one.
    pub fn from_unnormalized(raw: Vec<f64>) -> Result<Self> {
        let sum: f64 = raw.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidInput(format!("weights sum to {sum}")));
        }
        if raw.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidInput("negative weight".into()));
        }
        Self::new(raw.into_iter().map(|v| v / sum).collect())
    }

    pub fn uniform(k: usize) -> Self {
        Self(DVector::from_element(k, 1.0 / k as f64))
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Closed-form optimum of `Σ λᵢ Lᵢ` for hidden width `q`.
#[derive(Debug, Clone)]
pub struct ScalarizationSolution {
    pub weight: WeightVector,
    pub q: usize,
    /// `ŷᵢᵀ P ŷᵢ` per task.
    pub objective: DVector<f64>,
    /// Per-task training loss `‖X W aᵢ - yᵢ‖²`.
    pub mse: DVector<f64>,
    /// Basis of `range(P)` in span coordinates (`k × min(q, k)`).
    pub basis_coords: DMatrix<f64>,
}

impl ScalarizationSolution {
    /// Orthonormal `n × min(q, k)` basis of the optimal projection.
    pub fn basis(&self, preds: &OptimalPredictors) -> DMatrix<f64> {
        preds.span_basis() * &self.basis_coords
    }

    /// `Σ λᵢ mseᵢ`.
    pub fn weighted_loss(&self) -> f64 {
        self.weight.as_vector().dot(&self.mse)
    }
}

/// Left singular vectors of the square matrix `m`, sorted by descending
/// singular value (ties keep the routine's order), with each right singular
/// vector's first nonzero entry made positive.
pub(crate) fn sorted_left_singular_vectors(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));

    let mut out = DMatrix::zeros(u.nrows(), order.len());
    let mut values = DVector::zeros(order.len());
    for (dst, &src) in order.iter().enumerate() {
        let lead = vt.row(src).iter().copied().find(|x| *x != 0.0).unwrap_or(1.0);
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        out.set_column(dst, &(u.column(src) * sign));
        values[dst] = sv[src];
    }
    (out, values)
}

/// Objective vector and span-coordinate basis of the optimal rank-`q`
/// projection, without touching `n`-dimensional data.
pub(crate) fn optimal_projection(
    preds: &OptimalPredictors,
    weight: &WeightVector,
    q: usize,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let k = preds.k();
    if weight.len() != k {
        return Err(Error::InvalidInput(format!(
            "weight has {} entries for {k} tasks",
            weight.len()
        )));
    }
    if q == 0 {
        return Err(Error::InvalidInput("hidden width q must be at least 1".into()));
    }
    let coords = preds.span_coords();
    let mut scaled = coords.clone();
    for (j, lambda) in weight.as_slice().iter().enumerate() {
        scaled.column_mut(j).scale_mut(lambda.sqrt());
    }
    if scaled.iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateWeight);
    }
    if q >= k {
        return Ok((preds.sq_norms().clone(), DMatrix::identity(k, k)));
    }

    let (u, _) = sorted_left_singular_vectors(&scaled);
    let top = u.columns(0, q).into_owned();
    let proj = top.transpose() * coords;
    let t = preds.sq_norms();
    let objective = DVector::from_iterator(
        k,
        proj.column_iter()
            .enumerate()
            .map(|(i, c)| c.norm_squared().clamp(0.0, t[i])),
    );
    Ok((objective, top))
}

/// Closed-form optimum via the truncated SVD of `Ŷ·diag(√λ)`.
pub fn scalarization_optimum(
    preds: &OptimalPredictors,
    offsets: &DVector<f64>,
    weight: &WeightVector,
    q: usize,
) -> Result<ScalarizationSolution> {
    if offsets.len() != preds.k() {
        return Err(Error::InvalidInput(format!(
            "{} offsets for {} tasks",
            offsets.len(),
            preds.k()
        )));
    }
    if offsets.iter().any(|o| !(*o >= 0.0)) {
        return Err(Error::InvalidInput("offsets must be non-negative".into()));
    }
    let (objective, basis_coords) = optimal_projection(preds, weight, q)?;
    let mse = preds.sq_norms() - &objective + offsets;
    Ok(ScalarizationSolution {
        weight: weight.clone(),
        q,
        objective,
        mse,
        basis_coords,
    })
}

/// Result of [`train_scalarized_gd`].
#[derive(Debug, Clone)]
pub struct GdOutcome {
    /// Weighted loss after the final update.
    pub loss: f64,
    /// Per-task loss after the final update.
    pub mse: DVector<f64>,
    /// Weighted loss before each update, followed by the final loss
    /// (`epochs + 1` entries).
    pub history: Vec<f64>,
}

/// Uniform `[-0.1, 0.1]` initialization of a `p × q` shared layer and
/// `q × k` heads, drawn in that order from `seed`.
pub(crate) fn init_network(p: usize, q: usize, k: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut rng = rng::stream(seed, 0);
    let dist = Uniform::new_inclusive(-0.1, 0.1).expect("valid range");
    let w = DMatrix::from_fn(p, q, |_, _| dist.sample(&mut rng));
    let a = DMatrix::from_fn(q, k, |_, _| dist.sample(&mut rng));
    (w, a)
}

/// Full-batch gradient descent on `Σ λᵢ ‖X W aᵢ - yᵢ‖²` over both layers.
pub fn train_scalarized_gd(
    data: &TaskDataset,
    weight: &WeightVector,
    q: usize,
    lr: f64,
    epochs: usize,
    seed: u64,
) -> Result<GdOutcome> {
    let (w, a) = init_network(data.p(), q, data.k(), seed);
    train_scalarized_gd_from(data, weight, w, a, lr, epochs)
}

/// [`train_scalarized_gd`] from an explicit starting point.
pub fn train_scalarized_gd_from(
    data: &TaskDataset,
    weight: &WeightVector,
    mut w: DMatrix<f64>,
    mut a: DMatrix<f64>,
    lr: f64,
    epochs: usize,
) -> Result<GdOutcome> {
    if !(lr > 0.0) {
        return Err(Error::InvalidInput("learning rate must be positive".into()));
    }
    if epochs == 0 {
        return Err(Error::InvalidInput("epochs must be at least 1".into()));
    }
    if weight.len() != data.k() {
        return Err(Error::InvalidInput("weight length does not match task count".into()));
    }
    if w.nrows() != data.p() || a.ncols() != data.k() || w.ncols() != a.nrows() {
        return Err(Error::InvalidInput("network shape does not match dataset".into()));
    }
    let lambda = weight.as_vector();
    let x = data.x();
    let mut history = Vec::with_capacity(epochs + 1);

    for epoch in 0..epochs {
        let z = x * &w;
        let mut resid = &z * &a - data.y();
        let losses = DVector::from_iterator(data.k(), resid.column_iter().map(|c| c.norm_squared()));
        let loss = lambda.dot(&losses);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(loss);
        for (j, l) in lambda.iter().enumerate() {
            resid.column_mut(j).scale_mut(2.0 * l);
        }
        let grad_w = x.transpose() * &resid * a.transpose();
        let grad_a = z.transpose() * &resid;
        w -= grad_w * lr;
        a -= grad_a * lr;
    }

    let mse = data.task_losses(&w, &a);
    let loss = lambda.dot(&mse);
    if !loss.is_finite() || mse.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged { epoch: epochs });
    }
    history.push(loss);
    Ok(GdOutcome { loss, mse, history })
}
