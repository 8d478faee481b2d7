use thiserror::Error;

/// Errors raised by state ingestion and the steering computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M - M^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("trace is not one: tr = {trace}")]
    TraceNotOne { trace: f64 },
    #[error("matrix is not positive semidefinite: smallest eigenvalue = {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("steered party has a pure reduced state: 1 - |b|^2 = {one_minus_b2:e}")]
    SteeredStateSingular { one_minus_b2: f64 },
    #[error("assemblage observable violates positivity by {excess:e}")]
    UnphysicalAssemblage { excess: f64 },
    #[error("sharp observable with nonzero bias: criterion diverges")]
    SharpBiasedDegenerate,
    #[error("negative radicand {radicand:e}")]
    DomainError { radicand: f64 },
    #[error("hidden-state weight denominator {denominator:e} is not positive")]
    DegenerateWeight { denominator: f64 },
    #[error("objective was non-finite at all {skipped} probed points")]
    NonFiniteObjective { skipped: usize },
    #[error("unknown state family `{0}`")]
    UnknownFamily(String),
    #[error("parameter `{name}` = {value} out of domain: {reason}")]
    ParamOutOfDomain {
        name: String,
        value: f64,
        reason: &'static str,
    },
    #[error("missing parameter `{0}`")]
    MissingParam(String),
    #[error("state is not an X-state in any local frame")]
    NotXState,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable identifier, used in the CLI error envelope.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "NotHermitian",
            Error::TraceNotOne { .. } => "TraceNotOne",
            Error::NotPositive { .. } => "NotPositive",
            Error::SteeredStateSingular { .. } => "SteeredStateSingular",
            Error::UnphysicalAssemblage { .. } => "UnphysicalAssemblage",
            Error::SharpBiasedDegenerate => "SharpBiasedDegenerate",
            Error::DomainError { .. } => "DomainError",
            Error::DegenerateWeight { .. } => "DegenerateWeight",
            Error::NonFiniteObjective { .. } => "NonFiniteObjective",
            Error::UnknownFamily(_) => "UnknownFamily",
            Error::ParamOutOfDomain { .. } => "ParamOutOfDomain",
            Error::MissingParam(_) => "MissingParam",
            Error::NotXState => "NotXState",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Parse(_) => "Parse",
        }
    }

    /// True for errors that describe a bad input state rather than a failed computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::TraceNotOne { .. }
                | Error::NotPositive { .. }
                | Error::UnknownFamily(_)
                | Error::ParamOutOfDomain { .. }
                | Error::MissingParam(_)
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
