use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything the engine can refuse to do.
///
/// Index sets in messages are 1-based, matching how characters are numbered in
/// presentation files.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("length mismatch in {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("characters span rank {rank} over Q, but the torus has rank {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("the semistable locus is empty for this stability character")]
    EmptySemistableLocus,
    #[error("semistable support {support} has an infinite stabilizer (stack is not Deligne-Mumford)")]
    InfiniteStabilizer { support: String },
    #[error("degree generator {generator} has theta-pairing {pairing} <= 0")]
    GeneratorNotPositive { generator: String, pairing: String },
    #[error("theta bound must be non-negative, got {0}")]
    NegativeBound(String),

    #[error("ring for sector {sector}: {reason}")]
    InvalidRing { sector: String, reason: String },
    #[error("ring for sector {sector} is not confluent at monomial {monomial}: {detail}")]
    NonConfluentRingSpec {
        sector: String,
        monomial: String,
        detail: String,
    },
    #[error("monomial {monomial} does not reduce to the basis of sector {sector}")]
    UnreducibleMonomial { sector: String, monomial: String },
    #[error("no cohomology ring configured for sector {0}")]
    MissingSectorRing(String),
    #[error("pairing matrix on the requested basis is singular")]
    SingularPairingMatrix,

    #[error("product of two twisted classes (sectors {a} and {b}) is not supported")]
    TwistedProductUnsupported { a: String, b: String },
    #[error("linear factor has zero z-coefficient")]
    ZeroZCoefficient,
    #[error("class {0} is not nilpotent in its sector ring")]
    NotNilpotent(String),
    #[error("unknown series direction {0}")]
    UnknownDirection(String),
    #[error("flow argument does not truncate: {0}")]
    NontruncatingArgument(String),
    #[error("degree {0} is not a linear combination of the Novikov generators")]
    OutsideChart(String),

    #[error("degree {0} is not effective")]
    NotEffective(String),
    #[error("no twisted class for degree {degree} (stratum: {stratum}); add a table entry")]
    MissingTwistedClass { degree: String, stratum: String },
    #[error("line bundle tau_{tau} pairs to {pairing} < 0 with effective degree {degree}; it is not semi-positive")]
    SemipositivityViolated {
        degree: String,
        tau: usize,
        pairing: String,
    },
    #[error("the hypersurface form needs exactly one line bundle, got {0}")]
    NotAHypersurface(usize),

    #[error("I-function coefficient at degree 0 is not the unit class")]
    NotUnital,
    #[error("positive z-powers remain after normalization at index {0}")]
    PositivePowersRemain(String),
    #[error("frame residual too low: {0}")]
    FrameResidualTooLow(String),
    #[error("frame is not flat in the requested directions: {0}")]
    FrameNotFlat(String),
}
