use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is out of range [{min}, {max}]")]
    Range {
        what: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Input violates a structural precondition (unknown vertex, isolated
    /// vertex where degrees must be positive, disconnected graph, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    /// The iterative eigensolver ran out of iterations. `best` holds the
    /// Ritz values of the last iterate, `residual` the worst relative
    /// residual among the requested pairs.
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        iterations: usize,
        best: Vec<f64>,
        residual: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
