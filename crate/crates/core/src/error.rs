use thiserror::Error;

pub type Result<T, E = PlsError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlsError {
    #[error("column {0} has zero sample variance")]
    ZeroVarianceColumn(usize),
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("dimension too small: {0}")]
    DimensionTooSmall(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("csv parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("target column `{0}` not found in header")]
    MissingTarget(String),
    #[error("non-numeric cell at row {row}, column {col}")]
    NonNumericCell { row: usize, col: usize },
    #[error("i/o error: {0}")]
    Io(String),

    #[error("component {0} is degenerate (Krylov space exhausted)")]
    DegenerateComponent(usize),
    #[error("invalid component count: {0}")]
    InvalidComponentCount(String),
    #[error("component count {requested} out of range (fitted {available})")]
    ComponentOutOfRange { requested: usize, available: usize },
    #[error("negative degrees of freedom at m = {0}")]
    NumericalInstability(usize),
    #[error("jacobians were not retained during the run")]
    JacobiansNotRetained,
    #[error("krylov basis is numerically singular at m = {m} (condition {condition:.3e})")]
    SingularBasis { m: usize, condition: f64 },
    #[error("symmetric eigendecomposition failed")]
    EigFailure,
    #[error("non-finite value produced by {0}")]
    NumericalOverflow(String),

    #[error("zero gradient: sᵀSs = 0")]
    ZeroGradient,
    #[error("finite-difference fit is not deterministic")]
    NonDeterministicFit,

    #[error("trace((I-H)(I-H)ᵀ) is not positive")]
    DegenerateDenominator,
    #[error("degrees of freedom {dof} is not below n = {n}")]
    DofExceedsN { dof: f64, n: usize },
    #[error("fold too small: {0}")]
    FoldTooSmall(String),

    #[error("singular linear system")]
    SingularSystem,
    #[error("requested {requested} components but rank is {rank}")]
    RankExceeded { requested: usize, rank: usize },

    #[error("signal has zero variance")]
    DegenerateSignal,
    #[error("split of {requested} rows exceeds the {available} available")]
    SplitTooLarge { requested: usize, available: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl PlsError {
    /// Whether the error stems from malformed input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            PlsError::ZeroVarianceColumn(_)
                | PlsError::NonFiniteInput
                | PlsError::DimensionTooSmall(_)
                | PlsError::DimensionMismatch { .. }
                | PlsError::ParseError { .. }
                | PlsError::MissingTarget(_)
                | PlsError::NonNumericCell { .. }
                | PlsError::Io(_)
                | PlsError::InvalidComponentCount(_)
                | PlsError::ComponentOutOfRange { .. }
                | PlsError::FoldTooSmall(_)
                | PlsError::SplitTooLarge { .. }
                | PlsError::InvalidConfig(_)
        )
    }

    /// Variant name, used to label diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            PlsError::ZeroVarianceColumn(_) => "ZeroVarianceColumn",
            PlsError::NonFiniteInput => "NonFiniteInput",
            PlsError::DimensionTooSmall(_) => "DimensionTooSmall",
            PlsError::DimensionMismatch { .. } => "DimensionMismatch",
            PlsError::ParseError { .. } => "ParseError",
            PlsError::MissingTarget(_) => "MissingTarget",
            PlsError::NonNumericCell { .. } => "NonNumericCell",
            PlsError::Io(_) => "Io",
            PlsError::DegenerateComponent(_) => "DegenerateComponent",
            PlsError::InvalidComponentCount(_) => "InvalidComponentCount",
            PlsError::ComponentOutOfRange { .. } => "ComponentOutOfRange",
            PlsError::NumericalInstability(_) => "NumericalInstability",
            PlsError::JacobiansNotRetained => "JacobiansNotRetained",
            PlsError::SingularBasis { .. } => "SingularBasis",
            PlsError::EigFailure => "EigFailure",
            PlsError::NumericalOverflow(_) => "NumericalOverflow",
            PlsError::ZeroGradient => "ZeroGradient",
            PlsError::NonDeterministicFit => "NonDeterministicFit",
            PlsError::DegenerateDenominator => "DegenerateDenominator",
            PlsError::DofExceedsN { .. } => "DofExceedsN",
            PlsError::FoldTooSmall(_) => "FoldTooSmall",
            PlsError::SingularSystem => "SingularSystem",
            PlsError::RankExceeded { .. } => "RankExceeded",
            PlsError::DegenerateSignal => "DegenerateSignal",
            PlsError::SplitTooLarge { .. } => "SplitTooLarge",
            PlsError::InvalidConfig(_) => "InvalidConfig",
        }
    }
}
