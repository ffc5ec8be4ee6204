//! Block-aggregated empirical coefficients and the exact excess risk of the
//! linear filter estimator.
//!
//! With z̄_j = (1/n) Σ_i y_i φ_j(x_i), the addition formula collapses the
//! per-block sums to Gram contractions that never touch individual harmonics:
//!
//!   S2_k = Σ_{j∈block k} z̄_j² = (1/n²)·yᵀ G_k y,  G_k[i,i'] = N(d,k)·P_{k,d}(⟨x_i,x_{i'}⟩),
//!   S1_k = Σ_{j∈block k} z̄_j·θ_j = (1/n)·Σ_i y_i·f*_k(x_i),
//!
//! where f*_k is the degree-k component of the target. The excess L² risk of
//! the filter is then exact by Parseval — no numerical integration anywhere.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gegenbauer::gegenbauer_all;
use crate::pinsker::PinskerSolution;
use crate::sim::sample::Points;
use crate::sim::target::RegressionFunction;
use crate::special::KahanSum;
use crate::spectrum::SpectrumTable;

/// Default cap on n for the O(n²) Gram path; larger samples are rejected
/// with guidance to raise the cap explicitly.
pub const DEFAULT_GRAM_CAP: usize = 5000;

/// Per-degree aggregates S2_k = Σ z̄_j² and S1_k = Σ z̄_j·θ_j.
#[derive(Debug, Clone, Copy, Default)]
pub struct DegreeStats {
    pub s2: f64,
    pub s1: f64,
}

/// Aggregated empirical statistics of one sample.
#[derive(Debug, Clone)]
pub struct EmpiricalStats {
    pub per_degree: BTreeMap<usize, DegreeStats>,
    /// z̄_1 = (1/n) Σ y_i, the degree-0 empirical coefficient.
    pub mean_coeff: f64,
}

impl EmpiricalStats {
    pub fn degree(&self, k: usize) -> Result<DegreeStats> {
        self.per_degree
            .get(&k)
            .copied()
            .ok_or(Error::MissingDegree(k))
    }
}

/// Computes S2/S1 for the requested degrees (k ≥ 1) in one streamed pass over
/// point pairs: O(n²·(d+k_max)) time, O(1) extra space.
pub fn empirical_block_stats(
    points: &Points,
    responses: &[f64],
    spectrum: &SpectrumTable,
    target: &RegressionFunction,
    degrees: &[usize],
    gram_cap: Option<usize>,
) -> Result<EmpiricalStats> {
    let n = points.len();
    let cap = gram_cap.unwrap_or(DEFAULT_GRAM_CAP);
    if n > cap {
        return Err(Error::SampleTooLarge { n, cap });
    }
    if n == 0 || responses.len() != n {
        return Err(Error::InvalidParameter(format!(
            "responses ({}) must align with points ({n})",
            responses.len()
        )));
    }
    let d = spectrum.dimension();

    let mut mean = KahanSum::new();
    for &y in responses {
        mean.add(y);
    }
    let mean_coeff = mean.value() / n as f64;

    let mut per_degree = BTreeMap::new();
    let mut wanted: Vec<usize> = degrees.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    if wanted.is_empty() {
        return Ok(EmpiricalStats {
            per_degree,
            mean_coeff,
        });
    }
    let k_max = *wanted.last().unwrap();
    let mut mults = Vec::with_capacity(wanted.len());
    for &k in &wanted {
        let block = spectrum.block(k).ok_or(Error::MissingDegree(k))?;
        mults.push(block.multiplicity as f64);
    }

    // S2 via the Gram contraction, streamed over pairs i ≤ i'.
    let mut s2: Vec<KahanSum> = vec![KahanSum::new(); wanted.len()];
    let mut poly = Vec::with_capacity(k_max + 1);
    for i in 0..n {
        for j in i..n {
            let t = points.dot(i, j);
            gegenbauer_all(k_max, d, t, &mut poly)?;
            let w = responses[i] * responses[j] * if i == j { 1.0 } else { 2.0 };
            for (slot, &k) in wanted.iter().enumerate() {
                s2[slot].add(w * mults[slot] * poly[k]);
            }
        }
    }

    // S1 directly from the degree components of the target.
    for (slot, &k) in wanted.iter().enumerate() {
        let mut s1 = KahanSum::new();
        if target.amplitude(k) != 0.0 {
            for (i, &y) in responses.iter().enumerate() {
                s1.add(y * target.eval_component(k, points.row(i)));
            }
        }
        per_degree.insert(
            k,
            DegreeStats {
                s2: s2[slot].value() / (n as f64 * n as f64),
                s1: s1.value() / n as f64,
            },
        );
    }

    Ok(EmpiricalStats {
        per_degree,
        mean_coeff,
    })
}

/// Exact excess L² risk of the filter estimator against the target, by
/// Parseval over degree blocks:
///
/// * degree 0: (w₀·z̄_1 − θ₀)² with w₀ = ℓ₀ when p = 0 and w₀ = 1 when p > 0;
/// * each retained degree k ≥ 1: ℓ_k²·S2_k − 2·ℓ_k·S1_k + θ_k²;
/// * each target degree past the cutoff: θ_k².
pub fn excess_risk(
    solution: &PinskerSolution,
    stats: &EmpiricalStats,
    target: &RegressionFunction,
    p: u32,
) -> Result<f64> {
    let ell_0 = solution
        .blocks
        .iter()
        .find(|b| b.degree == 0)
        .map_or(0.0, |b| b.weight);
    let w0 = if p == 0 { ell_0 } else { 1.0 };
    let mut risk = KahanSum::new();
    let mean_err = w0 * stats.mean_coeff - target.mean();
    risk.add(mean_err * mean_err);

    for block in solution.blocks.iter().filter(|b| b.weight > 0.0 && b.degree >= 1) {
        let st = stats.degree(block.degree)?;
        let theta = target.amplitude(block.degree);
        risk.add(block.weight * block.weight * st.s2 - 2.0 * block.weight * st.s1 + theta * theta);
    }

    for comp in target.components() {
        if comp.degree == 0 {
            continue;
        }
        let retained = solution
            .blocks
            .iter()
            .any(|b| b.degree == comp.degree && b.weight > 0.0);
        if !retained {
            risk.add(comp.amplitude * comp.amplitude);
        }
    }
    Ok(risk.value())
}
