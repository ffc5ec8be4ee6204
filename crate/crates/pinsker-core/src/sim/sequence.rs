//! The Gaussian sequence model z_j = θ_j + ε·ξ_j and the one-parameter Bayes
//! risk lemma, as oracles for the kernel-side quantities.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::pinsker::{PinskerSolution, PriorSpec, ProblemConfig};
use crate::sim::rng::stream_rng;
use crate::special::{mean_stderr, KahanSum};

/// Exact risk of the linear filter θ̂_j = ℓ_j·z_j at a fixed θ:
/// Σ (1−ℓ_j)²θ_j² + ε² Σ ℓ_j².
pub fn sequence_exact_risk(theta: &[f64], weights: &[f64], epsilon: f64) -> f64 {
    let mut acc = KahanSum::new();
    for (j, &w) in weights.iter().enumerate() {
        let t = theta.get(j).copied().unwrap_or(0.0);
        acc.add((1.0 - w) * (1.0 - w) * t * t + epsilon * epsilon * w * w);
    }
    // θ mass beyond the filter support is passed through untouched.
    for &t in theta.iter().skip(weights.len()) {
        acc.add(t * t);
    }
    acc.value()
}

/// Monte Carlo risk of the same filter over `reps` noise draws.
pub fn sequence_mc_risk(
    theta: &[f64],
    weights: &[f64],
    epsilon: f64,
    reps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if reps < 2 {
        return Err(Error::InvalidParameter("need reps >= 2".into()));
    }
    let m = theta.len().max(weights.len());
    let mut risks = Vec::with_capacity(reps);
    for rep in 0..reps as u64 {
        let mut rng = stream_rng(seed, rep, 0);
        let mut acc = KahanSum::new();
        for j in 0..m {
            let t = theta.get(j).copied().unwrap_or(0.0);
            let w = weights.get(j).copied().unwrap_or(0.0);
            let z = t + epsilon * rng.sample::<f64, _>(StandardNormal);
            let err = w * z - t;
            acc.add(err * err);
        }
        risks.push(acc.value());
    }
    Ok(mean_stderr(&risks))
}

/// Worst-case risk of the Pinsker filter over the ellipsoid
/// Σ λ_j^{-s} θ_j² ≤ R: R·max_j (1−ℓ_j)²λ_j^s + ε² Σ ℓ_j². The worst θ
/// concentrates on any retained coordinate with θ_j² = R·λ_j^s, and for the
/// Pinsker weights the max equals κ*², making the sup exactly D*.
pub fn sequence_sup_risk(solution: &PinskerSolution, config: &ProblemConfig) -> f64 {
    let s = config.smoothness.to_f64();
    let eps_sq = config.epsilon_sq();
    let mut worst = 0.0f64;
    let mut ell_sq = KahanSum::new();
    for b in &solution.blocks {
        if b.eigenvalue > 0.0 {
            worst = worst.max((1.0 - b.weight) * (1.0 - b.weight) * b.eigenvalue.powf(s));
        }
        ell_sq.add(b.multiplicity as f64 * b.weight * b.weight);
    }
    config.radius * worst + eps_sq * ell_sq.value()
}

/// Simulated Bayes risk of the sequence model under the least-favorable
/// prior: θ_j ~ N(0, s_j²), z_j = θ_j + ε·ξ_j, posterior mean
/// θ̂_j = s_j²·z_j/(s_j² + ε²). The mean risk estimates
/// Σ_j s_j²ε²/(s_j²+ε²) ≥ (1−δ)·D*.
pub fn prior_bayes_mc(
    prior: &PriorSpec,
    epsilon: f64,
    reps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if reps < 2 {
        return Err(Error::InvalidParameter("need reps >= 2".into()));
    }
    let coords: usize = prior.blocks.iter().map(|b| b.multiplicity as usize).sum();
    if coords > 1_000_000 {
        return Err(Error::InvalidParameter(format!(
            "prior has {coords} coordinates; too many to simulate"
        )));
    }
    let eps_sq = epsilon * epsilon;
    let mut risks = Vec::with_capacity(reps);
    for rep in 0..reps as u64 {
        let mut rng = stream_rng(seed, rep, 0);
        let mut acc = KahanSum::new();
        for b in &prior.blocks {
            let sd = b.s_sq.sqrt();
            let shrink = b.s_sq / (b.s_sq + eps_sq);
            for _ in 0..b.multiplicity {
                let theta = sd * rng.sample::<f64, _>(StandardNormal);
                let z = theta + epsilon * rng.sample::<f64, _>(StandardNormal);
                let err = shrink * z - theta;
                acc.add(err * err);
            }
        }
        risks.push(acc.value());
    }
    Ok(mean_stderr(&risks))
}

/// Bayes risk of the posterior mean in the one-parameter Gaussian model
/// t_i = c_i·a + Δ_i + ε_i with prior a ~ N(0, c²):
/// σ'² = (1/c² + Σ c_i²/σ²)^{-1}.
pub fn bayes_risk(prior_sd: f64, designs: &[f64], sigma: f64) -> f64 {
    let mut acc = KahanSum::new();
    for &c in designs {
        acc.add(c * c / (sigma * sigma));
    }
    1.0 / (1.0 / (prior_sd * prior_sd) + acc.value())
}

/// Simulation oracle for [`bayes_risk`]: draws a ~ N(0,c²), simulates the
/// model with known offsets Δ_i, applies the posterior mean, and reports the
/// mean squared error with its standard error.
pub fn bayes_risk_mc(
    prior_sd: f64,
    designs: &[f64],
    offsets: &[f64],
    sigma: f64,
    reps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if reps < 2 {
        return Err(Error::InvalidParameter("need reps >= 2".into()));
    }
    if offsets.len() != designs.len() {
        return Err(Error::InvalidParameter(
            "offsets must align with designs".into(),
        ));
    }
    let post_var = bayes_risk(prior_sd, designs, sigma);
    let mut sq_errors = Vec::with_capacity(reps);
    for rep in 0..reps as u64 {
        let mut rng = stream_rng(seed, rep, 0);
        let a = prior_sd * rng.sample::<f64, _>(StandardNormal);
        let mut score = KahanSum::new();
        for (&c, &off) in designs.iter().zip(offsets) {
            let t = c * a + off + sigma * rng.sample::<f64, _>(StandardNormal);
            score.add(c * (t - off));
        }
        let a_hat = post_var / (sigma * sigma) * score.value();
        sq_errors.push((a_hat - a) * (a_hat - a));
    }
    Ok(mean_stderr(&sq_errors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pinsker::{lower_bound_diagnostics, solve_kappa};
    use crate::rational::Rational;
    use crate::spectrum::SpectrumTable;

    fn two_block() -> (SpectrumTable, ProblemConfig) {
        let spectrum = SpectrumTable::synthetic(&[(1.0, 1), (0.25, 2)]).unwrap();
        let cfg = ProblemConfig::new(
            2,
            Rational::one(),
            Rational::one(),
            1.0,
            1.0,
            1.0,
            Some(10),
        )
        .unwrap();
        (spectrum, cfg)
    }

    #[test]
    fn exact_risk_degenerate_filters() {
        // ℓ ≡ 0 passes θ through: risk = Σθ².
        assert_eq!(sequence_exact_risk(&[1.0, 2.0], &[0.0, 0.0], 0.3), 5.0);
        // θ = 0: risk = ε²Σℓ².
        let r = sequence_exact_risk(&[0.0, 0.0], &[0.5, 1.0], 0.5);
        assert!((r - 0.25 * 1.25).abs() < 1e-15);
    }

    #[test]
    fn sup_risk_equals_dstar_for_pinsker_filter() {
        let (spectrum, cfg) = two_block();
        let sol = solve_kappa(&spectrum, &cfg).unwrap();
        let sup = sequence_sup_risk(&sol, &cfg);
        assert!((sup - sol.dstar).abs() < 1e-14);
        assert!((sup - 16.0 / 95.0).abs() < 1e-14);
    }

    #[test]
    fn mc_risk_matches_exact() {
        let theta = [0.8, -0.2, 0.1];
        let weights = [0.9, 0.6, 0.2];
        let eps = 0.3;
        let exact = sequence_exact_risk(&theta, &weights, eps);
        let (mc, se) = sequence_mc_risk(&theta, &weights, eps, 20_000, 3).unwrap();
        assert!((mc - exact).abs() < 4.0 * se, "mc={mc} exact={exact} se={se}");
    }

    #[test]
    fn prior_bayes_risk_lower_bounds_dstar() {
        let (spectrum, cfg) = two_block();
        let sol = solve_kappa(&spectrum, &cfg).unwrap();
        let delta = 0.2;
        let diag = lower_bound_diagnostics(&sol, &cfg, delta).unwrap();
        let (mean, se) = prior_bayes_mc(&diag.prior, cfg.epsilon_sq().sqrt(), 4000, 5).unwrap();
        let floor = (1.0 - delta) * sol.dstar;
        assert!(
            mean >= floor - 4.0 * se,
            "mean={mean} floor={floor} se={se}"
        );
    }

    #[test]
    fn bayes_risk_formula_values() {
        // no observations → prior variance
        assert_eq!(bayes_risk(2.0, &[], 1.0), 4.0);
        // c = 1, one design c₁ = 1, σ = 1 → 1/2
        assert!((bayes_risk(1.0, &[1.0], 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bayes_risk_simulation_oracle() {
        let designs = [1.0, -0.5, 2.0];
        let offsets = [0.3, 0.0, -1.0];
        let formula = bayes_risk(0.8, &designs, 1.2);
        let (mc, se) = bayes_risk_mc(0.8, &designs, &offsets, 1.2, 30_000, 9).unwrap();
        assert!((mc - formula).abs() < 3.0 * se, "mc={mc} formula={formula} se={se}");
    }
}
