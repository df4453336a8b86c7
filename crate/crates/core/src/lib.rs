//! Analysis toolkit for linear multi-task learning.
//!
//! A two-layer linear network `X -> XW -> XWA` shared by `k` regression tasks
//! reduces to choosing a rank-`q` projection inside the span of the per-task
//! least-squares predictors. This crate exposes that geometry:
//!
//! - [`predictors`]: optimal predictors, Gram matrix, closed-form optima of
//!   linearly scalarized objectives (truncated SVD).
//! - [`surfaces`]: the quadric surfaces whose union is the feasible region
//!   for `q = 1` and `q = k - 1`, sampling and membership tests.
//! - [`conditions`]: the sign-flip conditions deciding whether scalarization
//!   can reach the whole Pareto front.
//! - [`smto`]: min-norm point solver, MGDA and MGDA-UB on the linear network.
//! - [`explorer`]: simplex weight sweeps and randomized scalarization.

pub mod conditions;
pub mod error;
pub mod explorer;
pub mod predictors;
mod rng;
pub mod smto;
pub mod surfaces;

pub use conditions::{
    brute_force_condition, check_c1, check_c2, estimate_c1_probability, ConditionReport, Witness,
};
pub use error::{Error, Result};
pub use explorer::{
    distance_to_point, randomized_combination, Mixture, run_randomized_sweep, run_sweep,
    sample_simplex_weights, SweepResult,
};
pub use predictors::{
    compute_optimal_predictors, irreducible_losses, scalarization_optimum, train_scalarized_gd,
    GdOutcome, OptimalPredictors, ScalarizationSolution, TaskDataset, WeightVector,
};
pub use smto::{
    min_norm_element, run_mgda, task_gradients_full, task_gradients_rep, LinearMtlNet,
    MgdaConfig, MgdaVariant, MinNormResult, SmtoTrace,
};
pub use surfaces::{
    classify_point, dominates, enumerate_surfaces, pareto_filter, sample_feasible_region, surface_residual,
    triple_intersection_k3, FeasiblePoint, Sense, SignPattern, SurfaceId, SurfaceKind, SurfaceSet,
};

pub use nalgebra::{DMatrix, DVector};
