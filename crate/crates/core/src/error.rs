use thiserror::Error;

/// Errors shared by every layer of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("top and bottom rows are not orderings of the same alphabet")]
    NotABijection,
    /// The permutation datum is reducible; the payload is the witness `k < d`
    /// such that the first `k` letters are invariant.
    #[error("permutation datum is reducible at k = {0}")]
    Reducible(usize),
    #[error("point {0} lies outside the domain of the map")]
    OutOfDomain(String),
    /// Induction hit an exact tie (or a gap below the precision guard).
    /// `step` is the induction step at which the tie occurred.
    #[error("connection at step {step}: candidate lengths {top} and {bottom} tie")]
    Connection {
        step: usize,
        top: String,
        bottom: String,
    },
    #[error("move does not compose with the given map")]
    InconsistentMove,
    #[error("log-slope vector is not orthogonal to the length vector (defect {0})")]
    IncompatibleOmega(String),
    #[error("built map left the target cylinder after {matched} of {requested} moves")]
    PrefixMismatch { matched: usize, requested: usize },
    #[error("working precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("singular value gap too small to declare a dimension split: {0}")]
    SpectralGapNotResolved(String),
    #[error("cocycle block starting at step {0} is not positive")]
    NotBcTime(usize),
    #[error("orbit search exceeded its step budget ({0} steps)")]
    OrbitSearchOverflow(usize),
    #[error("the two maps do not share a rotation-number prefix to depth {0}")]
    PathMismatch(usize),
    #[error("lengths and slopes violate the closing condition (defect {0})")]
    ClosingCondition(String),
    #[error("invalid scalar or field description: {0}")]
    BadScalar(String),
    #[error("invalid map description: {0}")]
    BadSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
