use std::fmt;

use thiserror::Error;

/// Stage of one solver iteration, used to annotate propagated failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Schedule,
    ProxY,
    ProxZ,
    AverageV,
    AverageW,
    ResolventU,
    AverageK,
    AverageH,
    ProjectX,
    Diagnostics,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Schedule => "schedule",
            Stage::ProxY => "y (prox step)",
            Stage::ProxZ => "z (prox step)",
            Stage::AverageV => "v (resolvent average)",
            Stage::AverageW => "w (fixed-point average)",
            Stage::ResolventU => "u (resolvent)",
            Stage::AverageK => "k (fixed-point average)",
            Stage::AverageH => "h (anchored average)",
            Stage::ProjectX => "x (projection)",
            Stage::Diagnostics => "diagnostics",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point outside the domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("exponential overflow in conjugate gradient at component {index} (argument {argument})")]
    Overflow { index: usize, argument: f64 },

    #[error("invalid weights: {0}")]
    Weight(String),

    #[error("set has no point in the interior of the domain: {0}")]
    Infeasible(String),

    #[error("{what} did not converge within {iterations} iterations (last displacement {displacement:e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        displacement: f64,
    },

    #[error("Bregman distance {0:e} is below the roundoff floor")]
    NegativeDistance(f64),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("no feasible grid point")]
    EmptyGrid,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter schedule: {0}")]
    Schedule(String),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: Stage) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
