//! Target regression functions in the radius-√R ball of the interpolation
//! space.
//!
//! Each target is zonal per block: the degree-k component is
//! θ_k·√N(d,k)·P_{k,d}(⟨x, u_k⟩) for a random direction u_k, which has unit
//! L² norm by the addition formula, so the block's L² mass is exactly θ_k²
//! and the interpolation-ball constraint reads Σ_k θ_k²·μ_k^{-s} ≤ R.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gegenbauer::gegenbauer;
use crate::pinsker::PinskerSolution;
use crate::sim::sample::random_direction;
use crate::spectrum::SpectrumTable;

/// How the ball norm R is split across the selected degrees.
#[derive(Debug, Clone, Copy)]
pub enum Allocation<'a> {
    /// The zero function.
    Zero,
    /// All mass on one block: θ_k² = R·μ_k^s.
    SingleBlock(usize),
    /// Ball norm split equally across the listed degrees.
    Uniform,
    /// Block masses proportional to the least-favorable prior variances
    /// N(d,k)·v_k² ∝ N(d,k)·ℓ_k·μ_k^{s/2}, rescaled to total ball norm R.
    Prior(&'a PinskerSolution),
}

/// One zonal block of a target.
#[derive(Debug, Clone)]
pub struct TargetComponent {
    pub degree: usize,
    /// Block amplitude θ_k (the L² norm of the block component).
    pub amplitude: f64,
    pub direction: Vec<f64>,
    sqrt_multiplicity: f64,
}

/// A target f*(x) = Σ_k θ_k·√N(d,k)·P_{k,d}(⟨x,u_k⟩).
#[derive(Debug, Clone)]
pub struct RegressionFunction {
    pub label: String,
    dimension: usize,
    components: Vec<TargetComponent>,
}

impl RegressionFunction {
    pub fn zero(dimension: usize) -> Self {
        Self {
            label: "zero".into(),
            dimension,
            components: Vec::new(),
        }
    }

    pub fn components(&self) -> &[TargetComponent] {
        &self.components
    }

    /// Degrees carrying target mass.
    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.components.iter().map(|c| c.degree)
    }

    /// θ_k of the given degree, zero when absent.
    pub fn amplitude(&self, degree: usize) -> f64 {
        self.components
            .iter()
            .find(|c| c.degree == degree)
            .map_or(0.0, |c| c.amplitude)
    }

    /// The degree-0 coefficient θ₀ (the mean of f*).
    pub fn mean(&self) -> f64 {
        self.amplitude(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .map(|c| c.eval(self.dimension, x))
            .sum()
    }

    /// The degree-k zonal component at x.
    pub fn eval_component(&self, degree: usize, x: &[f64]) -> f64 {
        self.components
            .iter()
            .find(|c| c.degree == degree)
            .map_or(0.0, |c| c.eval(self.dimension, x))
    }

    /// Σ_k θ_k² — the squared L² norm of f*.
    pub fn l2_norm_sq(&self) -> f64 {
        self.components.iter().map(|c| c.amplitude * c.amplitude).sum()
    }

    /// Σ_k θ_k²·μ_k^{-s} — the squared interpolation norm.
    pub fn ball_norm_sq(&self, spectrum: &SpectrumTable, s: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let mu = spectrum
                    .block(c.degree)
                    .map_or(f64::NAN, |b| b.eigenvalue);
                c.amplitude * c.amplitude * mu.powf(-s)
            })
            .sum()
    }
}

impl TargetComponent {
    fn eval(&self, d: usize, x: &[f64]) -> f64 {
        let dot: f64 = x.iter().zip(&self.direction).map(|(a, b)| a * b).sum();
        self.amplitude
            * self.sqrt_multiplicity
            * gegenbauer(self.degree, d, dot).expect("directions and points are unit vectors")
    }
}

/// Builds a target saturating Σθ²μ^{-s} = R over the given degrees (except
/// the zero allocation). Directions are drawn uniformly from the RNG.
pub fn make_target<R: Rng>(
    spectrum: &SpectrumTable,
    s: f64,
    radius: f64,
    allocation: Allocation<'_>,
    degrees: &[usize],
    rng: &mut R,
) -> Result<RegressionFunction> {
    let d = spectrum.dimension();
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let block = |k: usize| {
        spectrum
            .block(k)
            .filter(|b| b.eigenvalue > 0.0)
            .ok_or(Error::MissingDegree(k))
    };

    // (degree, θ²) pairs per allocation.
    let masses: Vec<(usize, f64)> = match allocation {
        Allocation::Zero => Vec::new(),
        Allocation::SingleBlock(k) => {
            let b = block(k)?;
            vec![(k, radius * b.eigenvalue.powf(s))]
        }
        Allocation::Uniform => {
            if degrees.is_empty() {
                return Err(Error::InvalidParameter(
                    "uniform allocation over an empty degree set".into(),
                ));
            }
            let share = radius / degrees.len() as f64;
            degrees
                .iter()
                .map(|&k| Ok((k, share * block(k)?.eigenvalue.powf(s))))
                .collect::<Result<_>>()?
        }
        Allocation::Prior(solution) => {
            if degrees.is_empty() {
                return Err(Error::InvalidParameter(
                    "prior allocation over an empty degree set".into(),
                ));
            }
            let mut raw = Vec::new();
            for &k in degrees {
                let b = block(k)?;
                let weight = solution
                    .blocks
                    .iter()
                    .find(|f| f.degree == k)
                    .map_or(0.0, |f| f.weight);
                if weight > 0.0 {
                    // ∝ N(d,k)·ℓ_k·μ_k^{s/2}
                    raw.push((k, b.multiplicity as f64 * weight * b.eigenvalue.powf(s / 2.0)));
                }
            }
            if raw.is_empty() {
                return Err(Error::InvalidParameter(
                    "prior allocation: no retained block in the degree set".into(),
                ));
            }
            // rescale so Σ θ²·μ^{-s} = R
            let denom: f64 = raw
                .iter()
                .map(|&(k, m)| m * spectrum.block(k).unwrap().eigenvalue.powf(-s))
                .sum();
            raw.into_iter()
                .map(|(k, m)| (k, radius * m / denom))
                .collect()
        }
    };

    let components = masses
        .into_iter()
        .map(|(degree, theta_sq)| {
            let mult = spectrum.block(degree).unwrap().multiplicity as f64;
            TargetComponent {
                degree,
                amplitude: theta_sq.sqrt(),
                direction: random_direction(d, rng),
                sqrt_multiplicity: mult.sqrt(),
            }
        })
        .collect();

    let label = match allocation {
        Allocation::Zero => "zero".to_string(),
        Allocation::SingleBlock(k) => format!("single_block:{k}"),
        Allocation::Uniform => "uniform".to_string(),
        Allocation::Prior(_) => "prior".to_string(),
    };
    Ok(RegressionFunction {
        label,
        dimension: d,
        components,
    })
}
