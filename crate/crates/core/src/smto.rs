//! Specialized multi-task optimizers on the two-layer linear network.
//!
//! Both variants take, at every epoch, the min-norm element of the convex
//! hull of per-task gradients and step the shared layer against it. MGDA
//! uses gradients with respect to the shared weights `W`; MGDA-UB uses
//! gradients with respect to the representation `Z = XW` and maps the
//! combined direction back through `Xᵀ`.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::predictors::{init_network, project_onto_range, TaskDataset};

pub const DEFAULT_LR: f64 = 0.5;
pub const DEFAULT_EPOCHS: usize = 100;
pub const DEFAULT_STOP_TOL: f64 = 1e-3;
pub const DEFAULT_FW_MAX_ITER: usize = 250;
pub const DEFAULT_FW_TOL: f64 = 1e-12;

/// Shared layer `w` (`p × q`) and task heads `a` (`q × k`).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMtlNet {
    pub w: DMatrix<f64>,
    pub a: DMatrix<f64>,
}

impl LinearMtlNet {
    pub fn new(w: DMatrix<f64>, a: DMatrix<f64>) -> Result<Self> {
        if w.ncols() != a.nrows() {
            return Err(Error::InvalidInput(format!(
                "hidden widths differ: W has {} columns, A has {} rows",
                w.ncols(),
                a.nrows()
            )));
        }
        if w.iter().chain(a.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("network has non-finite entries".into()));
        }
        Ok(Self { w, a })
    }

    pub fn width(&self) -> usize {
        self.w.ncols()
    }

    fn check(&self, data: &TaskDataset) -> Result<()> {
        if self.w.nrows() != data.p() || self.a.ncols() != data.k() {
            return Err(Error::InvalidInput(format!(
                "network maps {} features to {} tasks, dataset has {} and {}",
                self.w.nrows(),
                self.a.ncols(),
                data.p(),
                data.k()
            )));
        }
        Ok(())
    }

    /// Per-task `‖XWaᵢ - yᵢ‖²`.
    pub fn task_losses(&self, data: &TaskDataset) -> DVector<f64> {
        data.task_losses(&self.w, &self.a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinNormResult {
    /// Convex coefficients.
    pub alpha: DVector<f64>,
    /// `Σ αᵢ gᵢ`.
    pub combined: DVector<f64>,
    /// `‖combined‖`.
    pub norm: f64,
    pub iterations: usize,
}

/// Minimizer of `βᵀ M β` over the affine hull `Σ β = 1` of the vertices in
/// `active`, from the KKT system.
fn affine_min_norm(gram: &DMatrix<f64>, active: &[usize]) -> Option<DVector<f64>> {
    let s = active.len();
    let mut kkt = DMatrix::zeros(s + 1, s + 1);
    for (a, &i) in active.iter().enumerate() {
        for (b, &j) in active.iter().enumerate() {
            kkt[(a, b)] = 2.0 * gram[(i, j)];
        }
        kkt[(a, s)] = 1.0;
        kkt[(s, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(s + 1);
    rhs[s] = 1.0;
    let eps = 1e-14 * kkt.amax().max(1.0);
    let sol = kkt.svd(true, true).solve(&rhs, eps).ok()?;
    let beta = sol.rows(0, s).into_owned();
    ((beta.sum() - 1.0).abs() < 1e-9 && beta.iter().all(|b| b.is_finite())).then_some(beta)
}

/// Minimum-norm point of the convex hull of the gradients,
/// `min_{α ∈ Δ} ‖Σ αᵢ gᵢ‖²`, by Wolfe's method.
///
/// Starts from the shortest gradient. Each major iteration is a
/// Frank–Wolfe step: it adds the vertex with the smallest inner product
/// against the current point `u` and then re-solves exactly over the active
/// vertices, moving back toward the feasible region and dropping vertices
/// whenever the affine solution leaves the simplex. With two active vertices
/// this is the closed-form line search `clip((u - w)ᵀu / ‖u - w‖², 0, 1)`.
/// Stops once the Frank–Wolfe gap `‖u‖² - minⱼ ⟨gⱼ, u⟩` drops below `tol`.
pub fn min_norm_element(gradients: &[DVector<f64>], max_iter: usize, tol: f64) -> Result<MinNormResult> {
    let k = gradients.len();
    if k == 0 {
        return Err(Error::EmptyGradients);
    }
    let d = gradients[0].len();
    if d == 0 || gradients.iter().any(|g| g.len() != d) {
        return Err(Error::InvalidInput("gradients must share a positive dimension".into()));
    }

    let gram = DMatrix::from_fn(k, k, |i, j| gradients[i].dot(&gradients[j]));
    let start = (0..k)
        .min_by(|&a, &b| gram[(a, a)].total_cmp(&gram[(b, b)]))
        .expect("non-empty");
    let mut alpha = DVector::zeros(k);
    alpha[start] = 1.0;
    let mut active = vec![start];

    let mut iterations = 0;
    while iterations < max_iter {
        let m_alpha = &gram * &alpha;
        let uu = alpha.dot(&m_alpha);
        let (toward, lin) = m_alpha
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        if uu - lin < tol || active.contains(&toward) {
            break;
        }
        active.push(toward);
        iterations += 1;

        loop {
            let Some(beta) = affine_min_norm(&gram, &active) else {
                // ‖u - w‖² and (u - w)ᵀu with w = g_toward
                let dist = uu - 2.0 * lin + gram[(toward, toward)];
                let gamma = if dist > 0.0 { ((uu - lin) / dist).clamp(0.0, 1.0) } else { 0.0 };
                alpha *= 1.0 - gamma;
                alpha[toward] += gamma;
                active.retain(|&i| alpha[i] > 0.0);
                break;
            };
            if beta.iter().all(|b| *b > 0.0) {
                for (b, &i) in beta.iter().zip(&active) {
                    alpha[i] = *b;
                }
                break;
            }
            let theta = active
                .iter()
                .zip(beta.iter())
                .filter(|(_, b)| **b <= 0.0)
                .map(|(&i, b)| alpha[i] / (alpha[i] - b))
                .fold(1.0f64, f64::min);
            let mut smallest = (f64::INFINITY, 0);
            for (b, &i) in beta.iter().zip(&active) {
                alpha[i] += theta * (b - alpha[i]);
                if alpha[i] < smallest.0 {
                    smallest = (alpha[i], i);
                }
            }
            alpha[smallest.1] = 0.0;
            for &i in &active {
                if alpha[i] <= 0.0 {
                    alpha[i] = 0.0;
                }
            }
            active.retain(|&i| alpha[i] > 0.0);
            let total = alpha.sum();
            alpha /= total;
        }
    }

    let mut combined = DVector::zeros(d);
    for (g, a) in gradients.iter().zip(alpha.iter()) {
        combined.axpy(*a, g, 1.0);
    }
    let norm = combined.norm();
    Ok(MinNormResult {
        alpha,
        combined,
        norm,
        iterations,
    })
}

fn flatten(m: DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

fn unflatten(v: &DVector<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// `∂Lᵢ/∂W = 2 Xᵀ(XWaᵢ - yᵢ)aᵢᵀ`, flattened column-major (`p·q` entries).
pub fn task_gradients_full(net: &LinearMtlNet, data: &TaskDataset) -> Result<Vec<DVector<f64>>> {
    net.check(data)?;
    let x = data.x();
    let z = x * &net.w;
    let resid = &z * &net.a - data.y();
    Ok((0..data.k())
        .map(|i| {
            let back = x.tr_mul(&resid.column(i)) * 2.0;
            flatten(back * net.a.column(i).transpose())
        })
        .collect())
}

/// `∂Lᵢ/∂Z = 2(Zaᵢ - yᵢ)aᵢᵀ` with `Z = XW`, flattened column-major (`n·q`
/// entries).
pub fn task_gradients_rep(net: &LinearMtlNet, data: &TaskDataset) -> Result<Vec<DVector<f64>>> {
    net.check(data)?;
    let z = data.x() * &net.w;
    let resid = &z * &net.a - data.y();
    Ok((0..data.k())
        .map(|i| flatten(resid.column(i) * net.a.column(i).transpose() * 2.0))
        .collect())
}

/// Least-squares heads `A = (ZᵀZ)† Zᵀ Y`.
pub fn optimal_heads(z: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let ztz = z.tr_mul(z);
    let svd = SVD::new(ztz, true, true);
    let cutoff = 1e-12 * svd.singular_values.max();
    let pinv = svd
        .pseudo_inverse(cutoff.max(f64::MIN_POSITIVE))
        .expect("both factors computed");
    pinv * z.tr_mul(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgdaVariant {
    /// Gradients with respect to the shared weights.
    Full,
    /// Gradients with respect to the shared representation (MGDA-UB), taken
    /// against the targets projected onto `range(X)` so that the stopping
    /// criterion is reachable when the data carry irreducible noise.
    Ub,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MgdaConfig {
    pub q: usize,
    pub variant: MgdaVariant,
    pub lr: f64,
    pub epochs: usize,
    pub stop_tol: f64,
    pub seed: u64,
    pub fw_max_iter: usize,
    pub fw_tol: f64,
}

impl MgdaConfig {
    pub fn new(q: usize, variant: MgdaVariant, seed: u64) -> Self {
        Self {
            q,
            variant,
            lr: DEFAULT_LR,
            epochs: DEFAULT_EPOCHS,
            stop_tol: DEFAULT_STOP_TOL,
            seed,
            fw_max_iter: DEFAULT_FW_MAX_ITER,
            fw_tol: DEFAULT_FW_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmtoTrace {
    /// Per-task loss after each epoch.
    pub iterate_losses: Vec<DVector<f64>>,
    /// Min-norm value computed in each epoch.
    pub min_norms: Vec<f64>,
    pub final_net: LinearMtlNet,
    pub converged: bool,
    pub epochs_run: usize,
}

impl SmtoTrace {
    pub fn final_losses(&self) -> Option<&DVector<f64>> {
        self.iterate_losses.last()
    }

    /// The post-processing filter that drops runs whose worst task loss
    /// exceeds `limit`.
    pub fn max_loss_within(&self, limit: f64) -> bool {
        self.final_losses().is_some_and(|l| l.max() <= limit)
    }
}

/// Runs MGDA or MGDA-UB from a seeded uniform `[-0.1, 0.1]` initialization.
///
/// Each epoch re-solves the heads in closed form, computes the min-norm
/// element of the task gradients, and stops early when its norm falls below
/// `stop_tol`; otherwise `W` moves by `-lr` times the combined direction.
pub fn run_mgda(data: &TaskDataset, config: &MgdaConfig) -> Result<SmtoTrace> {
    if config.q == 0 {
        return Err(Error::InvalidInput("hidden width q must be at least 1".into()));
    }
    if !(config.lr > 0.0) {
        return Err(Error::InvalidInput("learning rate must be positive".into()));
    }
    let (p, q, k) = (data.p(), config.q, data.k());
    let (w, _) = init_network(p, q, k, config.seed);
    let x = data.x();
    let a = optimal_heads(&(x * &w), data.y());
    let mut net = LinearMtlNet { w, a };
    let projected = match config.variant {
        MgdaVariant::Full => None,
        MgdaVariant::Ub => Some(TaskDataset::new(x.clone(), project_onto_range(x, data.y()))?),
    };

    let mut iterate_losses = Vec::with_capacity(config.epochs);
    let mut min_norms = Vec::with_capacity(config.epochs);
    let mut converged = false;

    for epoch in 0..config.epochs {
        let grads = match config.variant {
            MgdaVariant::Full => task_gradients_full(&net, data)?,
            MgdaVariant::Ub => task_gradients_rep(&net, projected.as_ref().unwrap_or(data))?,
        };
        let mn = min_norm_element(&grads, config.fw_max_iter, config.fw_tol)?;
        if !mn.norm.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        min_norms.push(mn.norm);
        if mn.norm < config.stop_tol {
            iterate_losses.push(net.task_losses(data));
            converged = true;
            break;
        }

        let step = match config.variant {
            MgdaVariant::Full => unflatten(&mn.combined, p, q),
            MgdaVariant::Ub => x.tr_mul(&unflatten(&mn.combined, data.n(), q)),
        };
        net.w -= step * config.lr;
        net.a = optimal_heads(&(x * &net.w), data.y());
        let losses = net.task_losses(data);
        if losses.iter().any(|l| !l.is_finite()) || net.w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        iterate_losses.push(losses);
    }

    let epochs_run = min_norms.len();
    Ok(SmtoTrace {
        iterate_losses,
        min_norms,
        final_net: net,
        converged,
        epochs_run,
    })
}
