use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("optimal predictors are linearly dependent (sigma_min / sigma_max = {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("weighted predictor matrix is zero; the scalarized optimum is uninformative")]
    DegenerateWeight,

    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("{k} tasks exceeds the surface enumeration cap of {cap}")]
    TooManyTasks { k: usize, cap: usize },

    #[error("coordinate {index} = {value:e} lies outside the non-negative orthant")]
    OutOfOrthant { index: usize, value: f64 },

    #[error("triple-intersection formula does not apply: {0}")]
    PatternMismatch(String),

    #[error("Gram matrix is numerically singular (pivot {pivot:e} below {threshold:e})")]
    SingularGram { pivot: f64, threshold: f64 },

    #[error("gradient list is empty")]
    EmptyGradients,

    #[error("point list is empty")]
    EmptyList,
}
