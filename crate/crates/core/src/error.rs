use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point ({x}, {y}) lies outside the domain of metric `{metric}`")]
    Domain { metric: String, x: f64, y: f64 },
    #[error("metric is singular at ({x}, {y})")]
    SingularMetric { x: f64, y: f64 },
    #[error("geodesic left the chart after t = {last_t}")]
    DomainEscape { last_t: f64 },
    #[error("at least 2 steps are required, got {0}")]
    Step(usize),
    #[error("no convergence after {0} iterations")]
    Convergence(usize),
    #[error("radial profile is singular at r' = {r_prime}")]
    Singularity { r_prime: f64 },
    #[error("{value} lies outside the admissible range [0, {max}]")]
    Range { value: f64, max: f64 },
    #[error("mollifier support of radius {eps} leaves the chart")]
    SupportEscape { eps: f64 },
    #[error("metric `{0}` is not radially symmetric about the requested origin")]
    NotRadial(String),
    #[error("invalid manifold spec: {0}")]
    Spec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
