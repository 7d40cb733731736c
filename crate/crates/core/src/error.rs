use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singularity at z = 0")]
    Singularity,
    #[error("no branch of arg(z) = {arg} lies in [{lo}, {hi}]")]
    Branch { arg: f64, lo: f64, hi: f64 },
    #[error("finite-difference stencil leaves the domain: {0}")]
    Stencil(String),
    #[error("expected {expected} roots of Im F on |z| = R, found {found}")]
    RootCountMismatch { expected: usize, found: usize },
    #[error("C = {c} is too small, need C > {required}")]
    CTooSmall { c: f64, required: f64 },
    #[error("continuation diverged at t = {t}")]
    ContinuationDiverged { t: f64 },
    #[error("lifted segment left sector {k} at t = {t}")]
    SectorMismatch { k: usize, t: f64 },
    #[error("lift endpoint is off l0: |Im F0| = {residual}")]
    NotOnL0 { residual: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("unstable solve: |xi| reached {value}")]
    Unstable { value: f64 },
    #[error("degenerate fit: {0}")]
    Degenerate(String),
    #[error("line {0} lies outside the solved strip")]
    OutOfStrip(f64),
    #[error("precondition failed: {0}")]
    PreconditionFail(String),
    #[error("meshing failed: {0}")]
    Meshing(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
