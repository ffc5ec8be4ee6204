pub mod asymptotic;
pub mod error;
pub mod funk_hecke;
pub mod gegenbauer;
pub mod harmonics;
pub mod kernel;
pub mod pinsker;
pub mod quadrature;
pub mod rational;
pub mod sim;
pub mod special;
pub mod spectrum;

pub use asymptotic::AsymptoticBound;
pub use error::{Error, Result};
pub use kernel::KernelSpec;
pub use pinsker::{PinskerSolution, ProblemConfig};
pub use rational::Rational;
pub use spectrum::{SpectrumBlock, SpectrumTable};
