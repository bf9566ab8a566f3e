use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operands live on different quadratic spaces")]
    MismatchedSpaces,
    #[error("expected a homogeneous one-form")]
    NotGradeOne,
    #[error("expected a homogeneous form of degree {0}")]
    WrongGrade(usize),
    #[error("invalid quadratic space: {0}")]
    InvalidSpace(String),
    #[error("no irreducible real Clifford module is built for signature ({p},{q})")]
    UnsupportedSignature { p: usize, q: usize },
    #[error("averaged pairing is degenerate")]
    DegeneratePairing,
    #[error("signature ({p},{q}) has no real chirality")]
    NoChirality { p: usize, q: usize },
    #[error("spinor is not chiral")]
    NotChiral,
    #[error("polyform is not a signed spinor square: {0}")]
    NotASquare(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("time {t} lies outside the maximal interval ({lo}, {hi})")]
    OutsideMaximalInterval { t: f64, lo: f64, hi: f64 },
    #[error("inadmissible initial data: {0}")]
    Inadmissible(String),
    #[error("optimizer did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
