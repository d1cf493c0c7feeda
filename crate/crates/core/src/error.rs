use thiserror::Error;

/// Errors produced by the library.
///
/// Validation failures (bad payoffs, probabilities outside `[0, 1]`,
/// malformed arguments) are distinguished from runtime failures through
/// [`Error::is_validation`], which the command line uses to pick its exit
/// code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("payoff ordering violated: need T>R>P>S, got T={t}, R={r}, P={p}, S={s}")]
    OrderingViolation { t: f64, r: f64, p: f64, s: f64 },

    #[error("repeated-game condition violated: need 2R>T+S (equality allowed), got 2R={two_r} and T+S={t_plus_s}")]
    RepeatedGameViolation { two_r: f64, t_plus_s: f64 },

    #[error("{name} = {value} is not a probability in [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("degenerate strategy pair: 1-(xC-xD)(yC-yD) = {denominator:e}, stationary state is not unique")]
    DegenerateStrategyPair { denominator: f64 },

    #[error("degenerate strategy pair reached during integration at t={time}")]
    DegenerateEncountered { time: f64 },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("fixed point ({x_e}, {y_e}) maps to {component} = {value}, outside the strategy box")]
    OutOfStrategyBox {
        x_e: f64,
        y_e: f64,
        component: &'static str,
        value: f64,
    },

    #[error("eigenvalues do not split into two neutral and two classified values (gap ratio {gap_ratio:.3})")]
    AmbiguousZeroSplit { gap_ratio: f64 },

    #[error("payoff matrix is not submodular: T-R-P+S = {value} <= 0")]
    NotSubmodular { value: f64 },

    #[error("trajectory did not converge, case cannot be classified")]
    UnconvergedTrajectory,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed data: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by invalid user input rather than by a failure
    /// while computing or writing results.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::OrderingViolation { .. }
                | Error::RepeatedGameViolation { .. }
                | Error::InvalidProbability { .. }
                | Error::DegenerateStrategyPair { .. }
                | Error::OutOfStrategyBox { .. }
                | Error::NotSubmodular { .. }
                | Error::InvalidArgument(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
