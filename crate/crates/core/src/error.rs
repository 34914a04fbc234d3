use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// θ = 0: the process is reversible and produces no entropy.
    #[error("theta = 0 gives a reversible process with zero entropy production")]
    DegenerateTheta,
    #[error("theta = {0} lies outside (-pi/2, pi/2)")]
    OutOfRange(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("trajectory was produced by the exact sampler; the stored noise is not a Brownian increment")]
    SchemeMismatch,
    #[error("trajectory was generated with tilt lambda = {0}; the entropy production functional needs lambda = 0")]
    TiltMismatch(f64),
    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("argument {value} outside the domain: {what}")]
    Domain { value: f64, what: &'static str },
    #[error("no histogram bin pair reaches {min_count} samples on both sides")]
    InsufficientTailData { min_count: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
