use thiserror::Error;

/// Errors produced by the numerics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("susceptibility pole: kappa = 0 and omega = delta = {omega}")]
    Singularity { omega: f64 },

    #[error("near-threshold singularity at omega = {omega}: prefactor denominator {denominator:e}")]
    NearThreshold { omega: f64, denominator: f64 },

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("Stokes suppression infeasible: |Z| = {rhs_modulus} >= 1")]
    InfeasibleSuppression { rhs_modulus: f64 },

    #[error("unstable drift: max Re(eig) = {max_real_eig:e}")]
    Unstable { max_real_eig: f64 },

    #[error("heating divergence: gamma + Gamma_opt = {net_damping:e} <= 0")]
    HeatingDivergence { net_damping: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no stable point in the search space")]
    EmptyFeasibleSet,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
