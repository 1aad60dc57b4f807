use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),
    #[error("mixed element types: {0}")]
    MixedElementTypes(String),
    #[error("element {element} references node {node} which is not defined")]
    DanglingVertexReference { element: usize, node: usize },
    #[error("malformed mesh file (line {line}): {message}")]
    MeshParse { line: usize, message: String },
    #[error("degenerate element {0}: zero straight Jacobian")]
    DegenerateElement(usize),
    #[error("projection onto the boundary failed at {point:?}")]
    ProjectionFailure { point: [f64; 3] },
    #[error("degenerate geometric map on element {element}: det J = {det:e}")]
    DegenerateMap { element: usize, det: f64 },
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("unsupported degree {degree} (max {max})")]
    UnsupportedDegree { degree: usize, max: usize },
    #[error("direction is not a unit vector (norm {0})")]
    NonUnitDirection(f64),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("iteration limit of {iterations} reached with relative residual {residual:e}")]
    MaxIterationsExceeded {
        iterations: usize,
        residual: f64,
        best: Box<Vec<f64>>,
    },
    #[error("problem has no exact solution")]
    MissingExactSolution,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("non-positive error value {0:e}")]
    NonpositiveError(f64),
    #[error("config error in field `{field}`: {message}")]
    ConfigParse { field: String, message: String },
    #[error("level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Strip level context.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLevel { source, .. } => source.root(),
            e => e,
        }
    }
}
