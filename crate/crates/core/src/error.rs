use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    /// The divisor table is too short for the requested argument.
    #[error("divisor table exhausted: need n_max >= {required}, have {n_max}")]
    TableExhausted { required: u64, n_max: u64 },

    /// The requested table size cannot be allocated or indexed.
    #[error("divisor table of size {n_max} exceeds addressable capacity")]
    Capacity { n_max: u64 },

    /// Adaptive quadrature hit its evaluation budget. `completed_to` and
    /// `integral` describe the finished prefix `[0, completed_to]`.
    #[error(
        "quadrature budget of {evaluations} evaluations exceeded at t = {completed_to} \
         (partial integral {integral})"
    )]
    QuadratureBudget {
        evaluations: usize,
        completed_to: f64,
        integral: f64,
    },

    /// Halving the integration step moved the result by too much.
    #[error("step refinement failed: coarse {coarse}, fine {fine} (relative change {relative})")]
    Refinement {
        coarse: f64,
        fine: f64,
        relative: f64,
    },

    /// Phase arguments are too large for double-precision reduction.
    #[error("precision guard: height {t} exceeds the supported limit {limit}")]
    PrecisionGuard { t: f64, limit: f64 },

    /// A problem size exceeds the algorithm's budget.
    #[error("{what} = {value} exceeds the budget {limit}")]
    Budget {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    /// A generic precondition violation.
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
}
