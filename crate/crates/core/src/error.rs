use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-arc at vertex {0}")]
    SelfArc(usize),

    #[error("graph must have at least one vertex")]
    EmptyGraph,

    #[error("invalid degree d={d} for n={n} (need 1 <= d < n)")]
    InvalidDegree { d: usize, n: usize },

    #[error("vertex {0} is not a root")]
    NotARoot(usize),

    #[error("graph is not rooted")]
    NotRooted,

    #[error("mask length {got} does not match {expected} out-active vertices")]
    MaskLength { expected: usize, got: usize },

    #[error("{count} out-active vertices exceed the enumeration limit of {limit}")]
    TooManyMasks { count: usize, limit: usize },

    #[error("layer {q} out of range 0..={q_star}")]
    LayerOutOfRange { q: usize, q_star: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("agent {0} is already at phase 1 and must jump first")]
    PendingFirer(usize),

    #[error("flow of {dt} overshoots the next firing at {limit}")]
    FlowOvershoot { dt: f64, limit: f64 },

    #[error("agent {0} is not at phase 1")]
    NotFiring(usize),

    #[error("trigger sequence exhausted after {0} jumps")]
    SequenceExhausted(u64),

    #[error("zeno guard: {count} jumps within one period at t={t} (bound {bound})")]
    ZenoGuard { count: usize, bound: usize, t: f64 },

    #[error("arc spans {span} but a window of {period} was requested")]
    ArcTooShort { span: f64, period: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Errors raised while a run is in progress, as opposed to bad input.
    pub fn is_runtime(&self) -> bool {
        matches!(
            self,
            Error::ZenoGuard { .. } | Error::SequenceExhausted(_) | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
