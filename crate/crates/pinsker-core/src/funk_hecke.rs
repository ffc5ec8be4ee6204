//! Closed-form Funk-Hecke integrals of monomials against Gegenbauer polynomials.
//!
//! The eigenvalue of the degree-k harmonic block for the kernel Φ(t) = Σ a_j t^j
//! is μ_k = Σ_j a_j · I(j,k,d), where
//!
//!   I(j,k,d) = ∫_{-1}^{1} t^j P_{k,d}(t) c_d (1-t²)^{(d-2)/2} dt
//!
//! with the projected sphere measure normalized to mass 1. Rodrigues' formula
//! plus k-fold integration by parts reduces the integral to a Beta function:
//!
//!   I(j,k,d) = Γ((d+1)/2)/√π · 2^{-k} · j!/(j-k)! · Γ((j-k+1)/2) / Γ((j+k+d+1)/2)
//!
//! for j ≥ k with j-k even, and I(j,k,d) = 0 otherwise. Every factor is
//! positive, so the product is evaluated as exp of a sum of log-Gamma terms;
//! this stays accurate for d in the thousands, where the weight concentrates
//! too sharply for naive quadrature.

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::special::{ln_gamma, KahanSum};

/// I(j,k,d): the normalized Funk-Hecke integral of t^j against P_{k,d}.
pub fn funk_hecke_integral(j: usize, k: usize, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    if j < k || (j - k) % 2 == 1 {
        return Ok(0.0);
    }
    let jf = j as f64;
    let kf = k as f64;
    let df = d as f64;
    let ln_value = ln_gamma((df + 1.0) / 2.0) - 0.5 * std::f64::consts::PI.ln()
        - kf * std::f64::consts::LN_2
        + ln_gamma(jf + 1.0)
        - ln_gamma(jf - kf + 1.0)
        + ln_gamma((jf - kf + 1.0) / 2.0)
        - ln_gamma((jf + kf + df + 1.0) / 2.0);
    let value = ln_value.exp();
    if !value.is_finite() {
        return Err(Error::NonFiniteEigenvalue { j, k, d });
    }
    Ok(value)
}

/// Eigenvalue μ_k of the degree-k harmonic block, summed term by term over
/// the kernel coefficients. Round-off negatives cannot occur (every term is
/// nonnegative); the degree must not exceed the kernel truncation.
pub fn eigenvalue(kernel: &KernelSpec, d: usize, k: usize) -> Result<f64> {
    if k > kernel.truncation_degree() {
        return Err(Error::DegreeOutOfRange {
            degree: k,
            truncation: kernel.truncation_degree(),
        });
    }
    let mut acc = KahanSum::new();
    for (j, &a) in kernel.coefficients().iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        acc.add(a * funk_hecke_integral(j, k, d)?);
    }
    Ok(acc.value().max(0.0))
}
