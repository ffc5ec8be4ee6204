//! Gegenbauer (ultraspherical) polynomials normalized to P_{k,d}(1) = 1.
//!
//! These are the zonal polynomials of the sphere S^d ⊂ R^{d+1}: the degree-k
//! spherical harmonics satisfy the addition formula
//! Σ_j Y_{k,j}(x) Y_{k,j}(x') = N(d,k) · P_{k,d}(⟨x,x'⟩), and the P_{k,d} are
//! orthogonal on [-1,1] against the weight (1-t²)^{(d-2)/2}.

use crate::error::{Error, Result};

const CLAMP_TOL: f64 = 1e-12;

fn clamp_argument(t: f64) -> Result<f64> {
    if !t.is_finite() || t.abs() > 1.0 + CLAMP_TOL {
        return Err(Error::InvalidParameter(format!(
            "Gegenbauer argument {t} outside [-1, 1]"
        )));
    }
    Ok(t.clamp(-1.0, 1.0))
}

fn check_dimension(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    Ok(())
}

/// Evaluates P_{k,d}(t) by the three-term recurrence
/// P_{k+1}(t) = ((2k+d-1)·t·P_k(t) - k·P_{k-1}(t)) / (k+d-1),
/// with P_0 = 1 and P_1 = t. The normalization P_{k,d}(1) = 1 is exact
/// in the recurrence, and |P_{k,d}(t)| ≤ 1 on [-1,1].
pub fn gegenbauer(k: usize, d: usize, t: f64) -> Result<f64> {
    check_dimension(d)?;
    let t = clamp_argument(t)?;
    Ok(eval_unchecked(k, d, t))
}

/// Evaluates P_{0,d}(t), ..., P_{k_max,d}(t) in one recurrence pass.
pub fn gegenbauer_all(k_max: usize, d: usize, t: f64, out: &mut Vec<f64>) -> Result<()> {
    check_dimension(d)?;
    let t = clamp_argument(t)?;
    out.clear();
    out.push(1.0);
    if k_max == 0 {
        return Ok(());
    }
    out.push(t);
    let mut prev = 1.0;
    let mut cur = t;
    for k in 1..k_max {
        let kf = k as f64;
        let df = d as f64;
        let next = ((2.0 * kf + df - 1.0) * t * cur - kf * prev) / (kf + df - 1.0);
        out.push(next);
        prev = cur;
        cur = next;
    }
    Ok(())
}

fn eval_unchecked(k: usize, d: usize, t: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => t,
        _ => {
            let mut prev = 1.0;
            let mut cur = t;
            for m in 1..k {
                let mf = m as f64;
                let df = d as f64;
                let next = ((2.0 * mf + df - 1.0) * t * cur - mf * prev) / (mf + df - 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}
