use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input data or inconsistent dimensions.
    Invariant,
    /// An algorithm ran out of options (no solvent, no complete set, ...).
    Algorithmic,
    /// Floating point trouble: singular solves, unstable systems, probes at poles.
    Numeric,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("leading coefficient is singular (condition {0:.3e})")]
    SingularLeadingCoefficient(f64),
    #[error("determinant interpolation failed: {0}")]
    InterpolationFailure(String),
    #[error("{root} is not a latent root (smallest singular value {sigma:.3e} exceeds {tol:.3e})")]
    NotALatentRoot {
        root: num_complex::Complex64,
        sigma: f64,
        tol: f64,
    },
    #[error("latent vectors are linearly dependent (condition {0:.3e})")]
    DependentVectors(f64),
    #[error("solvent is not real: imaginary residue {0:.3e}")]
    NonRealSolvent(f64),
    #[error("incomplete solvent set: {0}")]
    IncompleteSet(String),
    #[error("no complete solvent set found after {0} search nodes")]
    NoCompleteSetFound(usize),
    #[error("block Vandermonde matrix is singular (condition {0:.3e})")]
    SingularVandermonde(f64),
    #[error("denominator is not monic")]
    NotMonic,
    #[error("improper fraction: {0}")]
    ImproperFraction(String),
    #[error("system is not block controllable (condition {0:.3e})")]
    NotBlockControllable(f64),
    #[error("state dimension {n} is not divisible by input dimension {m}")]
    IndivisibleDimensions { n: usize, m: usize },
    #[error("block diagonalization failed: off-diagonal residue {residue:.3e} exceeds {tol:.3e}")]
    NotDecoupled { residue: f64, tol: f64 },
    #[error("probe point {0} is at (or numerically on) a pole")]
    ProbeAtPole(num_complex::Complex64),
    #[error("shift {0} coincides with an eigenvalue of A")]
    ShiftAtEigenvalue(num_complex::Complex64),
    #[error("transfer function is numerically singular at {0}")]
    SingularTransfer(num_complex::Complex64),
    #[error("left and right eigenvectors are (nearly) orthogonal")]
    DegenerateEigenvector,
    #[error("dominant pole iteration did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("transfer function is not square ({p} outputs, {m} inputs)")]
    NonSquareTransfer { p: usize, m: usize },
    #[error("no eliminable solvent: every candidate root grouping failed")]
    NoEliminableSolvent,
    #[error("denominator already has degree 1, nothing to eliminate")]
    AlreadyMinimal,
    #[error("block {0} is not diagonalizable")]
    NonDiagonalizableBlock(usize),
    #[error("eigenvalue selection is not closed under conjugation")]
    ConjugateBreak,
    #[error("system is not asymptotically stable")]
    UnstableSystem,
    #[error("H2 norm needs a zero feedthrough term")]
    NonzeroFeedthrough,
    #[error("feedthrough terms of the two systems differ")]
    FeedthroughMismatch,
    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            DimensionMismatch(_) | InvalidInput(_) | NotMonic | ImproperFraction(_)
            | IndivisibleDimensions { .. } | NonSquareTransfer { .. } | ConjugateBreak => {
                ErrorClass::Invariant
            }
            NoCompleteSetFound(_)
            | NoEliminableSolvent
            | AlreadyMinimal
            | DependentVectors(_)
            | IncompleteSet(_)
            | NotBlockControllable(_)
            | NoConvergence(_)
            | NotALatentRoot { .. }
            | NonDiagonalizableBlock(_) => ErrorClass::Algorithmic,
            _ => ErrorClass::Numeric,
        }
    }
}
