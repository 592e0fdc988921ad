use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular parametrization at t = {t}: |x'(t)| below 1e-12")]
    SingularParametrization { t: f64 },

    #[error("reflection normal undefined: observation and incidence directions coincide")]
    UndefinedBisector,

    #[error("no Gauss-map preimage found for normal ({0}, {1}); parameter grid too coarse")]
    EmptyPreimage(f64, f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("curvature {kappa} is not positive; high-frequency leading term undefined")]
    ConcavePoint { kappa: f64 },

    #[error("mode series did not converge: tail residual {residual:e}")]
    Truncation { residual: f64 },

    #[error("quadrature size {given} below the required {required} nodes")]
    QuadratureTooCoarse { required: usize, given: usize },

    #[error("linear solve broke down: {0}")]
    SolverBreakdown(String),

    #[error("invalid direction set: {0}")]
    DirectionSet(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dataset integrity: {0}")]
    Integrity(String),

    #[error("no tangent detected: response is flat across the scan")]
    NoDetection,

    #[error("degenerate hull: {0}")]
    DegenerateHull(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("ill-posed impedance equation: {0}")]
    IllPosed(String),

    #[error("impedance recovery failed: {0}")]
    RecoveryFailure(String),

    #[error("missing record: {0}")]
    MissingRecord(String),

    #[error("every direction was skipped; indicator is empty")]
    EmptyIndicator,

    #[error("empty result: {0}")]
    EmptyResult(String),

    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },

    #[error("impedance profile is not positive: value {value} at t = {t}")]
    NonpositiveProfile { t: f64, value: f64 },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
