//! Replicated risk simulation of the filter estimator against D*.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gegenbauer::gegenbauer_all;
use crate::pinsker::{PinskerSolution, ProblemConfig};
use crate::rational::Rational;
use crate::sim::rng::stream_rng;
use crate::sim::sample::{sample_sphere, Points};
use crate::sim::stats::{excess_risk, DegreeStats, EmpiricalStats, DEFAULT_GRAM_CAP};
use crate::sim::target::RegressionFunction;
use crate::special::{mean_stderr, KahanSum};
use crate::spectrum::SpectrumTable;

/// Per-target Monte Carlo summary.
#[derive(Debug, Clone, Serialize)]
pub struct TargetReport {
    pub label: String,
    pub mean_risk: f64,
    pub stderr_risk: f64,
    pub ratio_to_dstar: f64,
    /// Mean of (z̄_1 − θ₀)² across replications.
    pub mean_term: f64,
    pub stderr_mean_term: f64,
}

/// Monte Carlo excess-risk statistics versus the exact quantity D*.
#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub replications: usize,
    pub seed: u64,
    pub sample_size: usize,
    pub dstar: f64,
    pub targets: Vec<TargetReport>,
    pub max_mean_risk: f64,
    /// max over targets of mean risk / D*.
    pub max_ratio: f64,
    pub worst_target: String,
}

/// Runs `reps` independent replications; each draws a fresh design and noise
/// from its own (seed, replication)-keyed stream, so the report is identical
/// for any worker-thread count. The reduction runs in replication order.
pub fn monte_carlo(
    config: &ProblemConfig,
    solution: &PinskerSolution,
    spectrum: &SpectrumTable,
    targets: &[RegressionFunction],
    reps: usize,
    seed: u64,
    gram_cap: Option<usize>,
) -> Result<SimReport> {
    if reps < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 replications, got {reps}"
        )));
    }
    if targets.is_empty() {
        return Err(Error::InvalidParameter("no targets given".into()));
    }
    let n = config.sample_size_int()?;
    let cap = gram_cap.unwrap_or(DEFAULT_GRAM_CAP);
    if n > cap {
        return Err(Error::SampleTooLarge { n, cap });
    }
    let d = spectrum.dimension();
    let sigma = config.noise_sigma;
    let p = degree_p(config);
    let degrees: Vec<usize> = solution
        .retained()
        .map(|b| b.degree)
        .filter(|&k| k >= 1)
        .collect();

    // (risk, mean-term) per target per replication.
    let per_rep: Vec<Result<Vec<(f64, f64)>>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let points = sample_sphere(n, d, &mut stream_rng(seed, rep, 0))?;
            let mut noise_rng = stream_rng(seed, rep, 1);
            let noise: Vec<f64> = (0..n)
                .map(|_| sigma * noise_rng.sample::<f64, _>(StandardNormal))
                .collect();
            let responses: Vec<Vec<f64>> = targets
                .iter()
                .map(|t| {
                    (0..n)
                        .map(|i| t.eval(points.row(i)) + noise[i])
                        .collect::<Vec<f64>>()
                })
                .collect();
            let stats = shared_gram_stats(&points, &responses, spectrum, targets, &degrees)?;
            targets
                .iter()
                .zip(&stats)
                .map(|(target, st)| {
                    let risk = excess_risk(solution, st, target, p)?;
                    let mean_err = st.mean_coeff - target.mean();
                    Ok((risk, mean_err * mean_err))
                })
                .collect()
        })
        .collect();

    let mut rows: Vec<Vec<(f64, f64)>> = Vec::with_capacity(reps);
    for rep in per_rep {
        rows.push(rep?);
    }

    let dstar = solution.dstar;
    let mut reports = Vec::with_capacity(targets.len());
    for (t_idx, target) in targets.iter().enumerate() {
        let risks: Vec<f64> = rows.iter().map(|r| r[t_idx].0).collect();
        let terms: Vec<f64> = rows.iter().map(|r| r[t_idx].1).collect();
        let (mean_risk, stderr_risk) = mean_stderr(&risks);
        let (mean_term, stderr_mean_term) = mean_stderr(&terms);
        reports.push(TargetReport {
            label: target.label.clone(),
            mean_risk,
            stderr_risk,
            ratio_to_dstar: if dstar > 0.0 { mean_risk / dstar } else { f64::NAN },
            mean_term,
            stderr_mean_term,
        });
    }
    let worst = reports
        .iter()
        .max_by(|a, b| a.mean_risk.total_cmp(&b.mean_risk))
        .expect("at least one target");
    Ok(SimReport {
        replications: reps,
        seed,
        sample_size: n,
        dstar,
        max_mean_risk: worst.mean_risk,
        max_ratio: worst.ratio_to_dstar,
        worst_target: worst.label.clone(),
        targets: reports,
    })
}

/// p = ⌊γ/(s+1)⌋ of the problem configuration.
pub fn degree_p(config: &ProblemConfig) -> u32 {
    (config.gamma / (config.smoothness + Rational::one())).floor_to_integer() as u32
}

/// One Gram pass shared by all targets: for every point pair the Gegenbauer
/// values are computed once and contracted against each target's responses.
fn shared_gram_stats(
    points: &Points,
    responses: &[Vec<f64>],
    spectrum: &SpectrumTable,
    targets: &[RegressionFunction],
    degrees: &[usize],
) -> Result<Vec<EmpiricalStats>> {
    let n = points.len();
    let d = spectrum.dimension();
    let n_targets = targets.len();

    let mut means = vec![KahanSum::new(); n_targets];
    for (t, resp) in responses.iter().enumerate() {
        for &y in resp {
            means[t].add(y);
        }
    }

    let mut wanted = degrees.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let mut mults = Vec::with_capacity(wanted.len());
    for &k in &wanted {
        mults.push(
            spectrum
                .block(k)
                .ok_or(Error::MissingDegree(k))?
                .multiplicity as f64,
        );
    }

    let mut s2 = vec![vec![KahanSum::new(); wanted.len()]; n_targets];
    if !wanted.is_empty() {
        let k_max = *wanted.last().unwrap();
        let mut poly = Vec::with_capacity(k_max + 1);
        for i in 0..n {
            for j in i..n {
                let dot = points.dot(i, j);
                gegenbauer_all(k_max, d, dot, &mut poly)?;
                let pair_scale = if i == j { 1.0 } else { 2.0 };
                for (t, resp) in responses.iter().enumerate() {
                    let w = resp[i] * resp[j] * pair_scale;
                    for (slot, &k) in wanted.iter().enumerate() {
                        s2[t][slot].add(w * mults[slot] * poly[k]);
                    }
                }
            }
        }
    }

    let nf = n as f64;
    let mut out = Vec::with_capacity(n_targets);
    for (t, target) in targets.iter().enumerate() {
        let mut per_degree = std::collections::BTreeMap::new();
        for (slot, &k) in wanted.iter().enumerate() {
            let mut s1 = KahanSum::new();
            if target.amplitude(k) != 0.0 {
                for (i, &y) in responses[t].iter().enumerate() {
                    s1.add(y * target.eval_component(k, points.row(i)));
                }
            }
            per_degree.insert(
                k,
                DegreeStats {
                    s2: s2[t][slot].value() / (nf * nf),
                    s1: s1.value() / nf,
                },
            );
        }
        out.push(EmpiricalStats {
            per_degree,
            mean_coeff: means[t].value() / nf,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::pinsker::solve_kappa;
    use crate::sim::target::{make_target, Allocation};

    fn setup(
        d: usize,
        gamma: &str,
        sigma: f64,
    ) -> (ProblemConfig, SpectrumTable, PinskerSolution) {
        let cfg = ProblemConfig::new(
            d,
            gamma.parse().unwrap(),
            Rational::one(),
            1.0,
            1.0,
            sigma,
            None,
        )
        .unwrap();
        let spectrum = SpectrumTable::build(&KernelSpec::rbf(30), d, 5).unwrap();
        let sol = solve_kappa(&spectrum, &cfg).unwrap();
        (cfg, spectrum, sol)
    }

    #[test]
    fn zero_target_zero_noise_zero_risk() {
        // σ = 0 sets the water level to zero and retains everything, so the
        // spectrum must be complete: use a polynomial kernel.
        let d = 8;
        let cfg = ProblemConfig::new(
            d,
            Rational::new(3, 2),
            Rational::one(),
            1.0,
            1.0,
            0.0,
            None,
        )
        .unwrap();
        let spectrum = SpectrumTable::build(&KernelSpec::polynomial(4), d, 4).unwrap();
        let sol = solve_kappa(&spectrum, &cfg).unwrap();
        assert_eq!(sol.kappa_star, 0.0);
        let targets = vec![RegressionFunction::zero(d)];
        let report = monte_carlo(&cfg, &sol, &spectrum, &targets, 5, 1, None).unwrap();
        assert_eq!(report.max_mean_risk, 0.0);
        for t in &report.targets {
            assert_eq!(t.mean_risk, 0.0);
            assert_eq!(t.stderr_risk, 0.0);
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let (cfg, spectrum, sol) = setup(6, "3/2", 1.0);
        let mut rng = stream_rng(3, 0, 0);
        let targets = vec![
            make_target(&spectrum, 1.0, 1.0, Allocation::SingleBlock(1), &[1], &mut rng).unwrap(),
        ];
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| monte_carlo(&cfg, &sol, &spectrum, &targets, 8, 99, None).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.max_mean_risk.to_bits(), b.max_mean_risk.to_bits());
        for (x, y) in a.targets.iter().zip(&b.targets) {
            assert_eq!(x.mean_risk.to_bits(), y.mean_risk.to_bits());
            assert_eq!(x.stderr_risk.to_bits(), y.stderr_risk.to_bits());
        }
    }

    #[test]
    fn consistency_trend_with_growing_n() {
        // zero noise, all weights ≈ 1 on target degrees: risk → 0 as n grows.
        let d = 6;
        let spectrum = SpectrumTable::build(&KernelSpec::polynomial(5), d, 5).unwrap();
        let mut rng = stream_rng(5, 0, 0);
        let target =
            make_target(&spectrum, 1.0, 1.0, Allocation::SingleBlock(1), &[1], &mut rng).unwrap();
        let mut risks = Vec::new();
        for n in [100u64, 400, 1600] {
            let cfg = ProblemConfig::new(
                d,
                Rational::one(),
                Rational::one(),
                1.0,
                1e6, // huge R drives every weight to 1
                0.0,
                Some(n),
            )
            .unwrap();
            let sol = solve_kappa(&spectrum, &cfg).unwrap();
            let report =
                monte_carlo(&cfg, &sol, &spectrum, std::slice::from_ref(&target), 20, 7, None)
                    .unwrap();
            risks.push(report.max_mean_risk);
        }
        assert!(risks[0] > risks[1] && risks[1] > risks[2], "risks={risks:?}");
        assert!(risks[2] < risks[0] / 4.0);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let (cfg, spectrum, sol) = setup(6, "3/2", 1.0);
        let targets = vec![RegressionFunction::zero(6)];
        assert!(monte_carlo(&cfg, &sol, &spectrum, &targets, 1, 0, None).is_err());
        assert!(monte_carlo(&cfg, &sol, &spectrum, &[], 5, 0, None).is_err());
        assert!(matches!(
            monte_carlo(&cfg, &sol, &spectrum, &targets, 5, 0, Some(3)),
            Err(Error::SampleTooLarge { .. })
        ));
    }
}
