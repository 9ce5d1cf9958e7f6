use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("field descriptor mismatch: {0}")]
    DescriptorMismatch(String),
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not alternating")]
    NotAlternating,
    #[error("a denominator vanishes at the specialization point")]
    PoleAtPoint,
    #[error("numerator degree {0} exceeds the cap of {cap}", cap = crate::exactalg::DEGREE_CAP)]
    DegreeCapExceeded(usize),
    #[error("too many variables ({0}); at most {max} are supported", max = crate::exactalg::MAX_VARS)]
    TooManyVariables(usize),
    #[error("empty basis")]
    EmptyBasis,
    #[error("enumeration of {0} points exceeds the cap")]
    EnumerationTooLarge(u128),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("transform is singular")]
    SingularTransform,
    #[error("zero-block pattern violated: {0}")]
    PatternViolation(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("characteristic mismatch: {0}")]
    CharMismatch(String),
    #[error("undecided: {0}")]
    Undecided(String),
    #[error("axis is isotropic")]
    IsotropicAxis,
    #[error("axis lies inside the K^2 plane")]
    AxisInsideK2,
    #[error("incompatible values: {0}")]
    IncompatibleValues(String),
    #[error("degenerate plane")]
    DegeneratePlane,
    #[error("map is not an isometry")]
    NotAnIsometry,
    #[error("pairings do not compose to a scalar: {0}")]
    NotScalarComposite(String),
    #[error("polynomial is reducible: {0}")]
    ReducibilityDetected(String),
    #[error("norm form is isotropic: {0}")]
    IsotropicNorm(String),
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("alpha lies in the range of q: {0}")]
    AlphaInRange(String),
    #[error("missing certificate: {0}")]
    CertificateMissing(String),
    #[error("sampled closure did not stabilize: {0}")]
    NotStabilized(String),
    #[error("maps are not an equivalence: {0}")]
    NotAnEquivalence(String),
    #[error("identity violated: {0}")]
    IdentityViolated(String),
    #[error("strata check failed: {0}")]
    StrataCheckFailed(String),
    #[error("rank dichotomy violated: {0}")]
    DichotomyViolated(String),
    #[error("no witness found: {0}")]
    NoWitnessFound(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
