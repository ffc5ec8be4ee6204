//! The finite-dimensional Pinsker quantities: the water level κ*, the cutoff
//! N, the filter weights ℓ, and the exact minimax quantity D*.
//!
//! For eigenvalues λ_1 ≥ λ_2 ≥ ... (blocks expanded by multiplicity), κ* is
//! the unique solution of
//!
//!   (σ²/(nκ)) Σ_j λ_j^{-s/2} (1 - κ λ_j^{-s/2})₊ = R,
//!
//! with closed form κ* = σ² Σ_{j≤N} λ_j^{-s/2} / (nR + σ² Σ_{j≤N} λ_j^{-s})
//! and N = max{j : λ_j^{s/2} > κ*}. The weights are ℓ_j = (1-κ*λ_j^{-s/2})₊
//! and D* = (σ²/n) Σ_{j≤N} ℓ_j. Since λ is constant within a harmonic block,
//! the consistency window can only close at a block boundary, so the solver
//! scans block boundaries with multiplicity-weighted sums instead of
//! expanding coordinates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::special::KahanSum;
use crate::spectrum::SpectrumTable;

/// Problem-side constants: sphere dimension, sample-size exponent γ (with
/// n ≈ α·d^γ), smoothness s, ball radius R, and noise level σ.
///
/// The sample size is kept as an integer-valued f64: at γ of several units
/// and d in the thousands, round(α·d^γ) exceeds every machine integer, and
/// n only ever enters the quantities through σ²/n.
#[derive(Debug, Clone, Serialize)]
pub struct ProblemConfig {
    pub dimension: usize,
    pub gamma: Rational,
    pub smoothness: Rational,
    pub alpha: f64,
    pub sample_size: f64,
    pub radius: f64,
    pub noise_sigma: f64,
}

impl ProblemConfig {
    /// Builds a config; `sample_size` defaults to round(α·d^γ) unless overridden.
    pub fn new(
        dimension: usize,
        gamma: Rational,
        smoothness: Rational,
        alpha: f64,
        radius: f64,
        noise_sigma: f64,
        sample_size: Option<u64>,
    ) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::DimensionTooSmall(dimension));
        }
        if !gamma.is_positive() {
            return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
        }
        if !smoothness.is_positive() {
            return Err(Error::InvalidParameter(format!("s must be > 0, got {smoothness}")));
        }
        for (name, v) in [("alpha", alpha), ("radius", radius)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        // σ = 0 is allowed as the noiseless corner (κ* = 0, every weight 1).
        if !noise_sigma.is_finite() || noise_sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be >= 0, got {noise_sigma}"
            )));
        }
        let n = match sample_size {
            Some(n) => n as f64,
            None => {
                let target = alpha * (dimension as f64).powf(gamma.to_f64());
                if !target.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "derived sample size {target} out of range"
                    )));
                }
                target.round()
            }
        };
        if n < 1.0 {
            return Err(Error::InvalidParameter("sample size must be >= 1".into()));
        }
        Ok(Self {
            dimension,
            gamma,
            smoothness,
            alpha,
            sample_size: n,
            radius,
            noise_sigma,
        })
    }

    /// The sample size as a machine integer, for paths that draw actual
    /// samples; errors when n is too large to materialize.
    pub fn sample_size_int(&self) -> Result<usize> {
        if self.sample_size > (1u64 << 53) as f64 {
            return Err(Error::InvalidParameter(format!(
                "sample size {} too large to materialize",
                self.sample_size
            )));
        }
        Ok(self.sample_size as usize)
    }

    /// Noise level ε² = σ²/n of the equivalent sequence model.
    pub fn epsilon_sq(&self) -> f64 {
        self.noise_sigma * self.noise_sigma / self.sample_size
    }
}

/// One block of the solved filter, in non-increasing eigenvalue order.
#[derive(Debug, Clone, Serialize)]
pub struct FilterBlock {
    pub degree: usize,
    pub eigenvalue: f64,
    pub multiplicity: u128,
    /// Shrinkage weight ℓ ∈ \[0,1\]; zero past the cutoff.
    pub weight: f64,
}

/// The solved Pinsker quantities for one spectrum and problem configuration.
#[derive(Debug, Clone, Serialize)]
pub struct PinskerSolution {
    pub kappa_star: f64,
    /// Retained coordinate count N.
    #[serde(rename = "N")]
    pub cutoff: u128,
    /// Largest retained degree q; N = v_q when sorted and degree order agree.
    pub q: usize,
    pub dstar: f64,
    /// |R·κ*² + (σ²/n)·Σ ℓ_j² - D*| / D*, an exact-identity re-check.
    pub identity_residual: f64,
    pub blocks: Vec<FilterBlock>,
}

impl PinskerSolution {
    /// Blocks with positive weight.
    pub fn retained(&self) -> impl Iterator<Item = &FilterBlock> {
        self.blocks.iter().filter(|b| b.weight > 0.0)
    }

    /// Largest eigenvalue λ_1 of the spectrum.
    pub fn lambda_max(&self) -> f64 {
        self.blocks.first().map_or(0.0, |b| b.eigenvalue)
    }
}

/// Solves for (κ*, N, ℓ, D*) on the given spectrum.
///
/// The table is treated as the entire spectrum when it is complete; for a
/// truncated kernel table the retained set must stay clear of the last two
/// tabulated degrees — eigenvalue ratios μ_{k+2} ≤ μ_k then guarantee every
/// omitted eigenvalue lies below the water level, so the truncation is
/// invisible to the fixed point. Otherwise the table is too shallow.
pub fn solve_kappa(spectrum: &SpectrumTable, config: &ProblemConfig) -> Result<PinskerSolution> {
    let s = config.smoothness.to_f64();
    let n = config.sample_size;
    let sigma_sq = config.noise_sigma * config.noise_sigma;
    let radius = config.radius;

    let sorted: Vec<_> = spectrum.sorted_blocks().collect();
    let positive = sorted.iter().take_while(|b| b.eigenvalue > 0.0).count();
    if positive == 0 {
        return Err(Error::DegenerateSpectrum);
    }

    // Scan cutoff candidates at block boundaries. κ(m) is the closed form over
    // the first m blocks; the unique consistent m has
    // λ_m^{s/2} > κ(m) ≥ λ_{m+1}^{s/2} (λ past the table is zero).
    let mut sum_inv_half = KahanSum::new(); // Σ mult·λ^{-s/2}
    let mut sum_inv_full = KahanSum::new(); // Σ mult·λ^{-s}
    let mut chosen: Option<(usize, f64)> = None;
    for (idx, block) in sorted.iter().enumerate().take(positive) {
        let mult = block.multiplicity as f64;
        let lam_inv_half = block.eigenvalue.powf(-s / 2.0);
        sum_inv_half.add(mult * lam_inv_half);
        sum_inv_full.add(mult * lam_inv_half * lam_inv_half);
        let kappa =
            sigma_sq * sum_inv_half.value() / (n * radius + sigma_sq * sum_inv_full.value());
        let own = block.eigenvalue.powf(s / 2.0);
        let next = sorted
            .get(idx + 1)
            .map_or(0.0, |b| b.eigenvalue.powf(s / 2.0));
        if own > kappa && next <= kappa {
            chosen = Some((idx, kappa));
            break;
        }
    }
    let (cut_idx, kappa_star) =
        chosen.ok_or(Error::SpectrumTooShallow)?;

    if !spectrum.is_complete() {
        let guard = sorted.iter().map(|b| b.degree).max().unwrap_or(0);
        let touches_guard = sorted[..=cut_idx]
            .iter()
            .any(|b| b.degree + 1 >= guard);
        if touches_guard {
            return Err(Error::SpectrumTooShallow);
        }
    }

    let blocks: Vec<FilterBlock> = sorted
        .iter()
        .enumerate()
        .map(|(idx, b)| FilterBlock {
            degree: b.degree,
            eigenvalue: b.eigenvalue,
            multiplicity: b.multiplicity,
            weight: if idx <= cut_idx {
                filter_weight(kappa_star, b.eigenvalue, s)
            } else {
                0.0
            },
        })
        .collect();

    let cutoff: u128 = blocks[..=cut_idx].iter().map(|b| b.multiplicity).sum();
    let q = blocks[..=cut_idx].iter().map(|b| b.degree).max().unwrap();

    let dstar = dstar_from_weights(&blocks, config);
    let identity_residual = {
        let mut sq = KahanSum::new();
        for b in &blocks {
            sq.add(b.multiplicity as f64 * b.weight * b.weight);
        }
        let lhs = radius * kappa_star * kappa_star + sigma_sq / n * sq.value();
        if dstar > 0.0 {
            ((lhs - dstar) / dstar).abs()
        } else {
            lhs.abs()
        }
    };

    Ok(PinskerSolution {
        kappa_star,
        cutoff,
        q,
        dstar,
        identity_residual,
        blocks,
    })
}

/// The Pinsker shrinkage weight ℓ = (1 - κ·λ^{-s/2})₊ of one block.
///
/// Near the cutoff κ·λ^{-s/2} approaches 1 and the plain subtraction loses
/// every significant digit of a small weight, so the product is split with a
/// fused multiply-add and subtracted in two error-free steps.
pub fn filter_weight(kappa: f64, eigenvalue: f64, s: f64) -> f64 {
    if eigenvalue <= 0.0 {
        return 0.0;
    }
    let t = eigenvalue.powf(-s / 2.0);
    let p = kappa * t;
    if !(0.5..=1.5).contains(&p) {
        return (1.0 - p).max(0.0);
    }
    // p = κ·t + err exactly; 1 - p is exact by Sterbenz for p ∈ [0.5, 2].
    let err = kappa.mul_add(t, -p);
    ((1.0 - p) - err).max(0.0)
}

/// D* = (σ²/n) Σ_k N(d,k)·ℓ_k over the filter blocks.
pub fn dstar_from_weights(blocks: &[FilterBlock], config: &ProblemConfig) -> f64 {
    let mut acc = KahanSum::new();
    for b in blocks {
        acc.add(b.multiplicity as f64 * b.weight);
    }
    config.epsilon_sq() * acc.value()
}

/// max_{j≤N} ℓ_j/(n·λ_j^{s/2}·κ*), the filter-to-water-level ratio that
/// controls the lower bound's residual tail.
pub fn max_ell_ratio(solution: &PinskerSolution, config: &ProblemConfig) -> f64 {
    let s = config.smoothness.to_f64();
    let n = config.sample_size;
    solution
        .retained()
        .map(|b| b.weight / (n * b.eigenvalue.powf(s / 2.0) * solution.kappa_star))
        .fold(0.0, f64::max)
}

/// The least-favorable Gaussian prior of the lower bound: independent
/// coordinates with variances s_j² = (1-δ)·v_j², where
/// v_j² = σ²ℓ_j/(n·κ*·λ_j^{-s/2}).
#[derive(Debug, Clone, Serialize)]
pub struct PriorSpec {
    pub delta: f64,
    pub blocks: Vec<PriorBlock>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PriorBlock {
    pub degree: usize,
    pub eigenvalue: f64,
    pub multiplicity: u128,
    pub v_sq: f64,
    pub s_sq: f64,
}

impl PriorSpec {
    /// Σ_{j≤N} s_j²·λ_j^{-s}; equals (1-δ)·R by the κ* fixed point.
    pub fn mass(&self, s: f64) -> f64 {
        let mut acc = KahanSum::new();
        for b in &self.blocks {
            acc.add(b.multiplicity as f64 * b.s_sq * b.eigenvalue.powf(-s));
        }
        acc.value()
    }
}

/// Lower-bound diagnostics: the prior, the Bayes value (1-δ)·D*, and the
/// residual bound 6·λ_1^s·R·√P̄ with the Gaussian tail estimate
/// P̄ = exp(-δ²/(8(1-δ)²) · Σ s_j²λ_j^{-s} / max_j s_j²λ_j^{-s}).
#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundDiagnostics {
    pub prior: PriorSpec,
    pub bayes_value: f64,
    pub residual_bound: f64,
}

pub fn lower_bound_diagnostics(
    solution: &PinskerSolution,
    config: &ProblemConfig,
    delta: f64,
) -> Result<LowerBoundDiagnostics> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie strictly inside (0,1), got {delta}"
        )));
    }
    let s = config.smoothness.to_f64();
    let n = config.sample_size;
    let sigma_sq = config.noise_sigma * config.noise_sigma;

    let mut blocks = Vec::new();
    let mut bayes = KahanSum::new();
    let mut max_term: f64 = 0.0;
    for b in solution.retained() {
        let lam_half = b.eigenvalue.powf(s / 2.0);
        let v_sq = sigma_sq * b.weight * lam_half / (n * solution.kappa_star);
        let s_sq = (1.0 - delta) * v_sq;
        max_term = max_term.max(s_sq * b.eigenvalue.powf(-s));
        bayes.add(
            b.multiplicity as f64 * b.weight
                / (b.weight + solution.kappa_star / lam_half),
        );
        blocks.push(PriorBlock {
            degree: b.degree,
            eigenvalue: b.eigenvalue,
            multiplicity: b.multiplicity,
            v_sq,
            s_sq,
        });
    }
    let prior = PriorSpec { delta, blocks };
    let bayes_value = (1.0 - delta) * sigma_sq / n * bayes.value();
    let mass = prior.mass(s);
    let tail = (-delta * delta / (8.0 * (1.0 - delta) * (1.0 - delta)) * mass / max_term).exp();
    let residual_bound = 6.0 * solution.lambda_max().powf(s) * config.radius * tail.sqrt();
    Ok(LowerBoundDiagnostics {
        prior,
        bayes_value,
        residual_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_n(n: u64, radius: f64) -> ProblemConfig {
        ProblemConfig::new(
            2,
            Rational::one(),
            Rational::one(),
            1.0,
            radius,
            1.0,
            Some(n),
        )
        .unwrap()
    }

    #[test]
    fn single_block_closed_form() {
        let spectrum = SpectrumTable::synthetic(&[(1.0, 1)]).unwrap();
        let sol = solve_kappa(&spectrum, &config_n(100, 1.0)).unwrap();
        assert!((sol.kappa_star - 1.0 / 101.0).abs() < 1e-15);
        assert_eq!(sol.cutoff, 1);
        assert!((sol.dstar - 1.0 / 101.0).abs() < 1e-15);
        assert!(sol.identity_residual < 1e-12);
        // max-ell ratio: (100/101)/(100·(1/101)) = 1
        assert!((max_ell_ratio(&sol, &config_n(100, 1.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_block_example() {
        let spectrum = SpectrumTable::synthetic(&[(1.0, 1), (0.25, 2)]).unwrap();
        let cfg = config_n(10, 1.0);
        let sol = solve_kappa(&spectrum, &cfg).unwrap();
        assert!((sol.kappa_star - 5.0 / 19.0).abs() < 1e-15);
        assert_eq!(sol.cutoff, 3);
        assert!((sol.blocks[0].weight - 14.0 / 19.0).abs() < 1e-15);
        assert!((sol.blocks[1].weight - 9.0 / 19.0).abs() < 1e-15);
        assert!((sol.dstar - 16.0 / 95.0).abs() < 1e-15);
        assert!(sol.identity_residual < 1e-12);
        assert!((max_ell_ratio(&sol, &cfg) - 0.36).abs() < 1e-12);
    }

    #[test]
    fn huge_radius_drives_kappa_to_zero() {
        let spectrum = SpectrumTable::synthetic(&[(1.0, 1), (0.25, 2)]).unwrap();
        let sol = solve_kappa(&spectrum, &config_n(10, 1e6)).unwrap();
        assert!(sol.kappa_star < 1e-4);
        assert_eq!(sol.cutoff, 3);
        for b in sol.blocks.iter() {
            assert!(b.weight > 0.999);
        }
    }

    #[test]
    fn degenerate_spectrum_rejected() {
        let spectrum = SpectrumTable::synthetic(&[(0.0, 3)]).unwrap();
        assert!(matches!(
            solve_kappa(&spectrum, &config_n(10, 1.0)),
            Err(Error::DegenerateSpectrum)
        ));
    }

    #[test]
    fn truncated_table_guard() {
        // An RBF table with tiny k_max: at this sample size the water level
        // retains everything, including the guard degrees, so the truncated
        // table must be refused.
        let kernel = crate::kernel::KernelSpec::rbf(60);
        let spectrum = SpectrumTable::build(&kernel, 20, 2).unwrap();
        let cfg = ProblemConfig::new(
            20,
            Rational::new(5, 2),
            Rational::one(),
            1.0,
            1.0,
            1.0,
            None,
        )
        .unwrap();
        assert!(matches!(
            solve_kappa(&spectrum, &cfg),
            Err(Error::SpectrumTooShallow)
        ));
        // With enough degrees the same problem solves.
        let deep = SpectrumTable::build(&kernel, 20, 7).unwrap();
        let sol = solve_kappa(&deep, &cfg).unwrap();
        assert!(sol.kappa_star > 0.0);
        assert!(sol.blocks.iter().all(|b| (0.0..=1.0).contains(&b.weight)));
    }

    #[test]
    fn weights_non_increasing_along_sorted_order() {
        let spectrum =
            SpectrumTable::synthetic(&[(2.0, 3), (1.0, 4), (0.5, 2), (0.01, 5)]).unwrap();
        let sol = solve_kappa(&spectrum, &config_n(50, 2.0)).unwrap();
        for w in sol.blocks.windows(2) {
            assert!(w[0].weight >= w[1].weight - 1e-15);
        }
    }

    #[test]
    fn kappa_monotone_in_radius_and_sample_size() {
        let spectrum = SpectrumTable::synthetic(&[(1.0, 2), (0.3, 3), (0.05, 4)]).unwrap();
        let base = solve_kappa(&spectrum, &config_n(40, 1.0)).unwrap();
        let bigger_r = solve_kappa(&spectrum, &config_n(40, 2.0)).unwrap();
        let bigger_n = solve_kappa(&spectrum, &config_n(80, 1.0)).unwrap();
        assert!(bigger_r.kappa_star < base.kappa_star);
        assert!(bigger_n.kappa_star < base.kappa_star);
        assert!(bigger_n.dstar < base.dstar);
    }

    #[test]
    fn prior_and_bayes_identities() {
        let spectrum = SpectrumTable::synthetic(&[(1.0, 1), (0.25, 2)]).unwrap();
        let cfg = config_n(10, 1.0);
        let sol = solve_kappa(&spectrum, &cfg).unwrap();
        let diag = lower_bound_diagnostics(&sol, &cfg, 0.5).unwrap();
        // prior-mass identity: Σ s²λ^{-s} = (1-δ)R = 0.5
        assert!((diag.prior.mass(1.0) - 0.5).abs() < 1e-12);
        // Bayes value: (1-δ)·D*
        assert!((diag.bayes_value - 0.5 * sol.dstar).abs() < 1e-14);
        assert!(diag.residual_bound > 0.0);
        // δ → 1⁻ sends prior variances and the Bayes value to zero.
        let near_one = lower_bound_diagnostics(&sol, &cfg, 0.999_999).unwrap();
        assert!(near_one.bayes_value < 1e-5);
        assert!(near_one.prior.blocks.iter().all(|b| b.s_sq < 1e-5));
        assert!(lower_bound_diagnostics(&sol, &cfg, 0.0).is_err());
        assert!(lower_bound_diagnostics(&sol, &cfg, 1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ProblemConfig::new(1, Rational::one(), Rational::one(), 1.0, 1.0, 1.0, None).is_err());
        assert!(ProblemConfig::new(5, Rational::zero(), Rational::one(), 1.0, 1.0, 1.0, None).is_err());
        assert!(ProblemConfig::new(5, Rational::one(), Rational::one(), -1.0, 1.0, 1.0, None).is_err());
        // n = round(α·d^γ)
        let cfg = ProblemConfig::new(
            30,
            Rational::new(3, 2),
            Rational::one(),
            1.0,
            1.0,
            1.0,
            None,
        )
        .unwrap();
        let target = 30f64.powf(1.5);
        assert!((cfg.sample_size - target).abs() <= 0.5);
    }
}
