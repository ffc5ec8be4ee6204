//! Monte Carlo diagnostics of the empirical Gram fluctuation
//! Δₙ(j,j') = (1/n)Σ_i φ_{j'}(x_i)φ_j(x_i) − δ_{jj'} against its closed-form
//! moments:
//!
//! * aggregate: Σ_{j,j'≤N} θ_{j'}²·E Δₙ(j,j')² = Σ_{j≤N} θ_j²·(N−1)/n,
//! * cross:     Σ_{j≤N} E[Δₙ(j,u)Δₙ(j,v)] = 0 for u ≠ v,
//! * diagonal:  E Δₙ(j,j)² = (E φ_j⁴ − 1)/n,
//!
//! where the fourth moments come from the exact sphere-moment oracle. These
//! identities require the φ's to span complete degree blocks (the addition
//! formula is what collapses the sums), so the basis list must cover degrees
//! 0..k_top with no gaps.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonics::HarmonicBasis;
use crate::sim::rng::stream_rng;
use crate::sim::sample::sample_sphere;
use crate::special::mean_stderr;

/// A Monte Carlo estimate with its closed-form target.
#[derive(Debug, Clone, Serialize)]
pub struct MomentEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
}

/// Estimate of Σ_j E[Δₙ(j,u)Δₙ(j,v)] for one pair u ≠ v (target 0).
#[derive(Debug, Clone, Serialize)]
pub struct CrossEstimate {
    pub u: usize,
    pub v: usize,
    pub estimate: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaDiagnostics {
    pub eigenfunctions: usize,
    pub sample_size: usize,
    pub replications: usize,
    pub aggregate: MomentEstimate,
    pub cross: Vec<CrossEstimate>,
    pub diagonal: Vec<MomentEstimate>,
}

/// Runs `reps` replications of n uniform points on S^d and estimates the Δₙ
/// moments for the concatenated explicit bases, with coefficients θ on the
/// N = Σ N(d,k) eigenfunctions.
pub fn delta_diagnostics(
    d: usize,
    n: usize,
    bases: &[HarmonicBasis],
    theta: &[f64],
    reps: usize,
    seed: u64,
) -> Result<DeltaDiagnostics> {
    if d > 10 {
        return Err(Error::InvalidParameter(format!(
            "delta diagnostics need explicit bases; d = {d} > 10"
        )));
    }
    if reps < 2 || n == 0 {
        return Err(Error::InvalidParameter(
            "delta diagnostics need n ≥ 1 and reps ≥ 2".into(),
        ));
    }
    for (k, basis) in bases.iter().enumerate() {
        if basis.degree != k || basis.dimension != d {
            return Err(Error::InvalidParameter(
                "bases must cover degrees 0..k_top on the same sphere, in order".into(),
            ));
        }
    }
    let functions: Vec<_> = bases.iter().flat_map(|b| b.functions.iter()).collect();
    let big_n = functions.len();
    if theta.len() != big_n {
        return Err(Error::InvalidParameter(format!(
            "theta has {} entries, expected N = {big_n}",
            theta.len()
        )));
    }

    // Per replication: aggregate, per-pair cross sums, per-j diagonal squares.
    type RepRow = (f64, Vec<f64>, Vec<f64>);
    let pairs: Vec<(usize, usize)> = (0..big_n)
        .flat_map(|u| ((u + 1)..big_n).map(move |v| (u, v)))
        .collect();
    let rows: Vec<Result<RepRow>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let points = sample_sphere(n, d, &mut stream_rng(seed, rep, 0))?;
            // φ matrix and Δ = (1/n)ΦᵀΦ − I
            let mut phi = vec![0.0; n * big_n];
            for i in 0..n {
                for (j, f) in functions.iter().enumerate() {
                    phi[i * big_n + j] = f.eval(points.row(i));
                }
            }
            let mut delta = vec![0.0; big_n * big_n];
            for a in 0..big_n {
                for b in a..big_n {
                    let mut acc = 0.0;
                    for i in 0..n {
                        acc += phi[i * big_n + a] * phi[i * big_n + b];
                    }
                    let v = acc / n as f64 - if a == b { 1.0 } else { 0.0 };
                    delta[a * big_n + b] = v;
                    delta[b * big_n + a] = v;
                }
            }
            let mut aggregate = 0.0;
            for j in 0..big_n {
                for (jp, &t) in theta.iter().enumerate() {
                    let dv = delta[j * big_n + jp];
                    aggregate += t * t * dv * dv;
                }
            }
            let cross: Vec<f64> = pairs
                .iter()
                .map(|&(u, v)| {
                    (0..big_n)
                        .map(|j| delta[j * big_n + u] * delta[j * big_n + v])
                        .sum()
                })
                .collect();
            let diag: Vec<f64> = (0..big_n)
                .map(|j| delta[j * big_n + j] * delta[j * big_n + j])
                .collect();
            Ok((aggregate, cross, diag))
        })
        .collect();

    let mut agg_samples = Vec::with_capacity(reps);
    let mut cross_samples = vec![Vec::with_capacity(reps); pairs.len()];
    let mut diag_samples = vec![Vec::with_capacity(reps); big_n];
    for row in rows {
        let (agg, cross, diag) = row?;
        agg_samples.push(agg);
        for (slot, v) in cross.into_iter().enumerate() {
            cross_samples[slot].push(v);
        }
        for (slot, v) in diag.into_iter().enumerate() {
            diag_samples[slot].push(v);
        }
    }

    let nf = n as f64;
    let theta_sq_sum: f64 = theta.iter().map(|t| t * t).sum();
    let (agg_mean, agg_se) = mean_stderr(&agg_samples);
    let aggregate = MomentEstimate {
        estimate: agg_mean,
        stderr: agg_se,
        target: theta_sq_sum * (big_n as f64 - 1.0) / nf,
    };

    let cross = pairs
        .iter()
        .zip(&cross_samples)
        .map(|(&(u, v), samples)| {
            let (estimate, stderr) = mean_stderr(samples);
            CrossEstimate { u, v, estimate, stderr }
        })
        .collect();

    let diagonal = functions
        .iter()
        .zip(&diag_samples)
        .map(|(f, samples)| {
            let (estimate, stderr) = mean_stderr(samples);
            let fourth = f.mul(f).inner(&f.mul(f), d);
            MomentEstimate {
                estimate,
                stderr,
                target: (fourth - 1.0) / nf,
            }
        })
        .collect();

    Ok(DeltaDiagnostics {
        eigenfunctions: big_n,
        sample_size: n,
        replications: reps,
        aggregate,
        cross,
        diagonal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::harmonic_basis;
    use crate::special::ls_slope;

    fn bases(d: usize, k_top: usize) -> Vec<HarmonicBasis> {
        (0..=k_top).map(|k| harmonic_basis(d, k).unwrap()).collect()
    }

    #[test]
    fn aggregate_identity_degrees_zero_one() {
        // d = 3, degrees {0,1}: N = 5, target Σθ²·4/n.
        let d = 3;
        let b = bases(d, 1);
        let theta = vec![1.0; 5];
        let diag = delta_diagnostics(d, 100, &b, &theta, 600, 11).unwrap();
        assert_eq!(diag.eigenfunctions, 5);
        let want = 5.0 * 4.0 / 100.0;
        assert!((diag.aggregate.target - want).abs() < 1e-14);
        assert!(
            (diag.aggregate.estimate - diag.aggregate.target).abs() < 4.0 * diag.aggregate.stderr,
            "estimate={} target={} se={}",
            diag.aggregate.estimate,
            diag.aggregate.target,
            diag.aggregate.stderr
        );
    }

    #[test]
    fn cross_terms_center_on_zero() {
        let d = 3;
        let b = bases(d, 1);
        let theta = vec![0.5; 5];
        let diag = delta_diagnostics(d, 60, &b, &theta, 600, 13).unwrap();
        for c in &diag.cross {
            assert!(
                c.estimate.abs() < 4.5 * c.stderr,
                "pair ({},{}): {} vs se {}",
                c.u,
                c.v,
                c.estimate,
                c.stderr
            );
        }
    }

    #[test]
    fn diagonal_variance_matches_fourth_moment() {
        let d = 3;
        let b = bases(d, 1);
        let theta = vec![1.0; 5];
        let diag = delta_diagnostics(d, 50, &b, &theta, 800, 17).unwrap();
        for (j, m) in diag.diagonal.iter().enumerate() {
            assert!(
                (m.estimate - m.target).abs() <= 4.5 * m.stderr + 1e-15,
                "j={j}: estimate={} target={} se={}",
                m.estimate,
                m.target,
                m.stderr
            );
        }
        // φ_1 ≡ 1 has zero diagonal fluctuation: E φ⁴ − 1 = 0.
        assert_eq!(diag.diagonal[0].target, 0.0);
        assert_eq!(diag.diagonal[0].estimate, 0.0);
    }

    #[test]
    fn second_moments_scale_as_inverse_n() {
        // log-log slope of the aggregate estimate against n is −1 ± 0.1.
        let d = 3;
        let b = bases(d, 1);
        let theta = vec![1.0; 5];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for n in [50usize, 200, 800] {
            let diag = delta_diagnostics(d, n, &b, &theta, 400, 23).unwrap();
            xs.push((n as f64).ln());
            ys.push(diag.aggregate.estimate.ln());
        }
        let slope = ls_slope(&xs, &ys);
        assert!((slope + 1.0).abs() < 0.1, "slope={slope}");
    }

    #[test]
    fn input_validation() {
        let b = bases(3, 1);
        assert!(delta_diagnostics(3, 10, &b, &[1.0; 4], 10, 0).is_err());
        assert!(delta_diagnostics(3, 10, &b, &[1.0; 5], 1, 0).is_err());
        assert!(delta_diagnostics(11, 10, &b, &[1.0; 5], 10, 0).is_err());
        // out-of-order bases rejected
        let wrong = vec![harmonic_basis(3, 1).unwrap()];
        assert!(delta_diagnostics(3, 10, &wrong, &[1.0; 4], 10, 0).is_err());
    }
}
