//! Gauss-Legendre quadrature and the quadrature route to Funk-Hecke integrals.
//!
//! The closed-form eigenvalue path in [`crate::funk_hecke`] is checked against
//! direct numerical integration of the weighted inner product
//!
//!   ∫_{-1}^{1} f(t) P_{k,d}(t) c_d (1-t²)^{(d-2)/2} dt,
//!
//! where c_d normalizes the weight to total mass 1. The substitution t = cos θ
//! turns the weight into sin^{d-1} θ, an analytic integrand on [0, π] on which
//! Gauss-Legendre converges to machine precision for moderate node counts.

use crate::error::Result;
use crate::special::{ln_gamma, KahanSum};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Newton iteration on the Legendre recurrence; standard construction,
/// accurate to ~1e-15 for n up to several hundred.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    // (1-x²) P'_n = n (P_{n-1} - x P_n)
    let d = n as f64 * (p0 - x * p1) / (1.0 - x * x);
    (p1, d)
}

/// ln of the normalizing constant c_d = Γ((d+1)/2) / (√π Γ(d/2)) of the
/// projected sphere measure on [-1,1].
pub fn ln_weight_norm(d: usize) -> f64 {
    let df = d as f64;
    ln_gamma((df + 1.0) / 2.0) - 0.5 * std::f64::consts::PI.ln() - ln_gamma(df / 2.0)
}

/// Normalized weighted integral ∫ f(t) c_d (1-t²)^{(d-2)/2} dt on [-1,1],
/// computed in the θ = arccos t variable with an n-node Gauss-Legendre rule.
pub fn weighted_integral<F: Fn(f64) -> f64>(f: F, d: usize, n_nodes: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n_nodes);
    let ln_cd = ln_weight_norm(d);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut acc = KahanSum::new();
    for (&u, &w) in nodes.iter().zip(&weights) {
        // θ = (u+1)·π/2 maps [-1,1] to [0,π]; dθ = π/2 du.
        let theta = (u + 1.0) * half_pi;
        let (sin_t, cos_t) = theta.sin_cos();
        // sin θ ≥ 0 on [0,π]; ln-space keeps sin^{d-1} stable at large d.
        let ln_sin_pow = (d as f64 - 1.0) * sin_t.max(f64::MIN_POSITIVE).ln();
        let factor = (ln_cd + ln_sin_pow).exp();
        acc.add(w * f(cos_t) * factor * half_pi);
    }
    acc.value()
}

/// Degree-k Funk-Hecke eigenvalue of t ↦ phi(t) by direct quadrature:
/// μ_k = ∫ phi(t) P_{k,d}(t) c_d (1-t²)^{(d-2)/2} dt.
pub fn eigenvalue_by_quadrature<F: Fn(f64) -> f64>(
    phi: F,
    d: usize,
    k: usize,
    n_nodes: usize,
) -> Result<f64> {
    // Probe once so dimension errors surface before integration.
    crate::gegenbauer::gegenbauer(k, d, 0.0)?;
    Ok(weighted_integral(
        |t| phi(t) * crate::gegenbauer::gegenbauer(k, d, t).expect("validated dimension"),
        d,
        n_nodes,
    ))
}
