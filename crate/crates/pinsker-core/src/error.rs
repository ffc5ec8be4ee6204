//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sphere dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("degree {degree} exceeds kernel truncation degree {truncation}")]
    DegreeOutOfRange { degree: usize, truncation: usize },

    #[error("multiplicity N({d},{k}) overflows exact integer range")]
    MultiplicityOverflow { d: usize, k: usize },

    #[error("non-finite Funk-Hecke term at coefficient j={j}, degree k={k}, dimension d={d}")]
    NonFiniteEigenvalue { j: usize, k: usize, d: usize },

    #[error("degenerate spectrum: all eigenvalues are zero")]
    DegenerateSpectrum,

    #[error("spectrum too shallow: the filter cutoff reaches the last truncated block; raise k_max")]
    SpectrumTooShallow,

    #[error("sample too large for exact risk path: n={n} exceeds Gram cap {cap}")]
    SampleTooLarge { n: usize, cap: usize },

    #[error("empirical stats missing degree {0}")]
    MissingDegree(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
