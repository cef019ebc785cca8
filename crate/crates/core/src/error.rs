use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown tag or entity: {0}")]
    NameResolution(String),

    #[error("tag `{0}` already exists")]
    Conflict(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("domain is empty: {0}")]
    EmptyDomain(String),

    #[error("operation not supported on this domain: {0}")]
    UnsupportedDomain(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("incompatible space definition: {0}")]
    Incompatible(String),

    #[error("dirichlet mask for tag {tag} has {got} entries, expected {expected}")]
    MaskArity {
        tag: String,
        got: usize,
        expected: usize,
    },

    #[error("got {got} dirichlet functions for {expected} dirichlet tags")]
    FunctionCount { got: usize, expected: usize },

    #[error("field has no registered gradient")]
    MissingGradient,

    #[error("value kind error: {0}")]
    Kind(String),

    #[error("arity error: {0}")]
    Arity(String),

    #[error("objects live on different models or domains: {0}")]
    DomainMismatch(String),

    #[error("trial and test spaces do not match: {0}")]
    SpaceMismatch(String),

    #[error("singular system: zero pivot at column {pivot}")]
    Singular { pivot: usize },

    #[error("iteration limit of {max_iters} reached, residual {residual:e}")]
    IterationLimit { max_iters: usize, residual: f64 },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("newton did not converge after {iterations} iterations, |r|_inf = {residual:e}")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("line search failed at newton iteration {iteration}: step underflow")]
    LineSearch { iteration: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
