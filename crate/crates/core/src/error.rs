//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("exp requires a zero constant term")]
    ExpNonzeroConstant,
    #[error("log requires constant term exactly 1")]
    LogConstantNotOne,
    #[error("exp/log argument is not topologically nilpotent: term {0} never truncates")]
    NotNilpotent(String),
    #[error("coefficient of {0} lies outside the series caps (unknown, not zero)")]
    CoefficientOutsideCaps(String),
    #[error("parameter window overflow: {0} falls below the {1} floor {2}")]
    WindowOverflow(String, &'static str, i32),
    #[error("truncation would widen caps: {0}")]
    CapsNotTighter(String),
    #[error("series in family {0:?} expected, found {1:?}")]
    FamilyMismatch(crate::series::Family, crate::series::Family),
    #[error("compositional inverse requires a unit linear term in z")]
    NonUnitLinearTerm,
    #[error("ramification profile is not admissible: m = {0} < 0")]
    ProfileNotAdmissible(i64),
    #[error("oracle enumeration limited to part sums <= {limit}, got {got}")]
    OracleTooLarge { got: u32, limit: u32 },
    #[error("insufficient caps: {0}")]
    InsufficientCaps(String),
    #[error("unstable moduli space: (g, n) = ({0}, {1})")]
    UnstableModuli(u32, u32),
    #[error("correlator system for (g, n) = ({0}, {1}) did not reach full rank")]
    SingularSystem(u32, u32),
    #[error("missing correlator <lambda_{j} tau_{ks:?}>_{genus}")]
    MissingCorrelator { j: u32, ks: Vec<u32>, genus: u32 },
    #[error("missing seed constant c_g for g = {0}")]
    MissingSeed(u32),
    #[error("wedge factor {0} is not normalized to z^-{0} + higher order")]
    BadWedgeFactor(usize),
    #[error("operator has unbounded diagonal support")]
    UnboundedDiagonal,
    #[error("input is not homogeneous in factor count")]
    NonHomogeneous,
    #[error("exponent of u is not a non-positive multiple of 3: cannot express in v ({0})")]
    NotAPowerSeriesInV(String),
}

pub type Result<T> = std::result::Result<T, Error>;
