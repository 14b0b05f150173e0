use thiserror::Error;

/// Errors surfaced by the exact and numeric engines.
///
/// Precondition violations map to CLI exit code 2; numerical failures
/// indicate a broken invariant rather than bad input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rank out of supported range: {0}")]
    RankOutOfRange(String),
    #[error("weight is not dominant: {0}")]
    NonDominant(String),
    #[error("basis is degenerate and does not span the ambient space")]
    DegenerateBasis,
    #[error("q must be > 1, got {0}")]
    QOutOfRange(f64),
    #[error("imaginary residue {0:.3e} exceeds tolerance; quadrature failure")]
    ImaginaryResidue(f64),
    #[error("delta must lie in (0,1), got {0}")]
    DeltaOutOfRange(f64),
    #[error("matrix size out of range: {0}")]
    MatrixSizeOutOfRange(usize),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("Satake parameter bound violated: |alpha| = {alpha} > p^theta = {bound}")]
    RamanujanViolation { alpha: f64, bound: f64 },
    #[error("digamma argument has Re(z) <= 0: {0}")]
    DigammaPole(f64),
    #[error("sieve limit out of range: {0}")]
    SieveLimitOutOfRange(u64),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("representation restricted to the dual group contains the trivial summand")]
    TrivialSummand,
    #[error("indicator must be in {{-1,0,1}}, got {0}")]
    IndicatorOutOfRange(i64),
    #[error("positive q-power in a moment expansion; transform invariant violated: {0}")]
    PositivePower(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
