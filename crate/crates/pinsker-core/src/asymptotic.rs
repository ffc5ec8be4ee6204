//! Large-d behavior of the minimax risk: the exact rate d^{-ζ} and the
//! Pinsker constant C*, as functions of the exponent γ and smoothness s.
//!
//! With p = ⌊γ/(s+1)⌋, each period [p(s+1), (p+1)(s+1)) splits in two:
//!
//! * p(s+1) ≤ γ < p(s+1)+s:  ζ = γ - p and
//!   C* = σ² / (α·p! + σ²/(R·a_p^s·(p!)^s)·1{γ = p(s+1)});
//! * p(s+1)+s ≤ γ < (p+1)(s+1):  ζ = (p+1)·s and
//!   C* = R·a_{p+1}^s·((p+1)!)^s + σ²/(α·p!)·1{γ = p(s+1)+s}.
//!
//! The boundary indicators fire only on exact equality, hence the exact
//! rational γ and s. The second regime is the plateau: ζ and C* stay constant
//! over the whole interval, so the minimax risk does not budge until the
//! sample size crosses the next threshold.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::rational::Rational;
use crate::special::ln_factorial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    CaseIInterior,
    CaseIBoundary,
    CaseIiInterior,
    CaseIiBoundary,
}

impl Regime {
    /// True on the plateau regime (case ii), where ζ is locally constant in γ.
    pub fn is_plateau(self) -> bool {
        matches!(self, Regime::CaseIiInterior | Regime::CaseIiBoundary)
    }
}

/// The asymptotic pair (ζ, C*) with its regime classification.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticBound {
    pub p: u32,
    pub zeta: Rational,
    pub cstar: f64,
    pub regime: Regime,
}

/// Case analysis at exact rational (γ, s). Requires a_k > 0 for k ≤ ⌊γ⌋+3.
pub fn asymptotic(
    gamma: Rational,
    s: Rational,
    alpha: f64,
    radius: f64,
    sigma: f64,
    kernel: &KernelSpec,
) -> Result<AsymptoticBound> {
    if !gamma.is_positive() {
        return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
    }
    if !s.is_positive() {
        return Err(Error::InvalidParameter(format!("s must be > 0, got {s}")));
    }
    let needed = gamma.floor_to_integer() as usize + 3;
    for k in 0..=needed {
        if kernel.coefficient(k) <= 0.0 {
            return Err(Error::InvalidKernel(format!(
                "a_{k} must be positive for the asymptotic regime (need a_k > 0 up to k = {needed})"
            )));
        }
    }

    let sf = s.to_f64();
    let sigma_sq = sigma * sigma;
    let period = s + Rational::one();
    let p = (gamma / period).floor_to_integer();
    let case_i_start = period * p; // p(s+1)
    let case_ii_start = case_i_start + s; // p(s+1)+s
    let p = p as u32;
    let p_fact = ln_factorial(p as usize).exp();

    let (zeta, cstar, regime) = if gamma < case_ii_start {
        // case (i): ζ = γ - p
        let zeta = gamma - Rational::from_integer(p as i64);
        let a_p = kernel.coefficient(p as usize);
        let boundary = gamma == case_i_start;
        let denom = if boundary {
            alpha * p_fact + sigma_sq / (radius * a_p.powf(sf) * p_fact.powf(sf))
        } else {
            alpha * p_fact
        };
        (
            zeta,
            sigma_sq / denom,
            if boundary { Regime::CaseIBoundary } else { Regime::CaseIInterior },
        )
    } else {
        // case (ii): ζ = (p+1)s
        let zeta = s * (p as i64 + 1);
        let a_next = kernel.coefficient(p as usize + 1);
        let next_fact = ln_factorial(p as usize + 1).exp();
        let boundary = gamma == case_ii_start;
        let mut cstar = radius * a_next.powf(sf) * next_fact.powf(sf);
        if boundary {
            cstar += sigma_sq / (alpha * p_fact);
        }
        (
            zeta,
            cstar,
            if boundary { Regime::CaseIiBoundary } else { Regime::CaseIiInterior },
        )
    };

    Ok(AsymptoticBound { p, zeta, cstar, regime })
}

/// Predicted top retained degree q for the block-aligned cutoff N = v_q:
/// q = p below the half-plateau point p(s+1)+s/2, q = p+1 above it, and
/// undetermined (None) exactly on it.
pub fn predicted_top_degree(gamma: Rational, s: Rational) -> Option<u32> {
    let period = s + Rational::one();
    let p = (gamma / period).floor_to_integer();
    let boundary = period * p + s / Rational::from_integer(2);
    match gamma.cmp(&boundary) {
        std::cmp::Ordering::Less => Some(p as u32),
        std::cmp::Ordering::Greater => Some(p as u32 + 1),
        std::cmp::Ordering::Equal => None,
    }
}

/// True exactly on the alignment-ambiguous boundary γ = p(s+1)+s/2.
pub fn alignment_boundary(gamma: Rational, s: Rational) -> bool {
    predicted_top_degree(gamma, s).is_none()
}

#[derive(Debug, Clone, Serialize)]
pub struct RatePoint {
    pub gamma: Rational,
    pub zeta: Rational,
}

/// Maximal run of consecutive grid points sharing one ζ value.
#[derive(Debug, Clone, Serialize)]
pub struct Plateau {
    pub start: Rational,
    pub end: Rational,
    pub zeta: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateCurve {
    pub s: Rational,
    pub points: Vec<RatePoint>,
    pub plateaus: Vec<Plateau>,
}

/// ζ over a γ grid, with plateau annotation. A plateau is a maximal run of
/// grid points in the case-(ii) regime, where ζ is locally constant; the
/// seam γ = (p+1)(s+1) is excluded even though ζ is continuous there, since
/// ζ resumes rising past it.
pub fn rate_curve(s: Rational, grid: &[Rational], kernel: &KernelSpec) -> Result<RateCurve> {
    let mut points = Vec::with_capacity(grid.len());
    let mut plateaus: Vec<Plateau> = Vec::new();
    for &gamma in grid {
        let bound = asymptotic(gamma, s, 1.0, 1.0, 1.0, kernel)?;
        if bound.regime.is_plateau() {
            match plateaus.last_mut() {
                Some(run) if run.zeta == bound.zeta => run.end = gamma,
                _ => plateaus.push(Plateau { start: gamma, end: gamma, zeta: bound.zeta }),
            }
        }
        points.push(RatePoint { gamma, zeta: bound.zeta });
    }
    Ok(RateCurve { s, points, plateaus })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantPoint {
    pub gamma: Rational,
    pub cstar: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantCurve {
    pub s: Rational,
    pub points: Vec<ConstantPoint>,
    /// γ values where C* jumps: the regime boundaries p(s+1) and p(s+1)+s
    /// contained in the grid range.
    pub jumps: Vec<Rational>,
}

/// C* over a γ grid with jump-discontinuity markers.
pub fn constant_curve(
    s: Rational,
    grid: &[Rational],
    alpha: f64,
    radius: f64,
    sigma: f64,
    kernel: &KernelSpec,
) -> Result<ConstantCurve> {
    let mut points = Vec::with_capacity(grid.len());
    for &gamma in grid {
        let bound = asymptotic(gamma, s, alpha, radius, sigma, kernel)?;
        points.push(ConstantPoint { gamma, cstar: bound.cstar, regime: bound.regime });
    }
    let mut jumps = Vec::new();
    if let (Some(first), Some(last)) = (grid.first(), grid.last()) {
        let period = s + Rational::one();
        let mut p = 0i64;
        loop {
            let lo = period * p;
            let hi = lo + s;
            if lo > *last {
                break;
            }
            for boundary in [lo, hi] {
                if boundary >= *first && boundary <= *last && boundary.is_positive() {
                    jumps.push(boundary);
                }
            }
            p += 1;
        }
    }
    Ok(ConstantCurve { s, points, jumps })
}
