//! Spherical-harmonic multiplicities and the sorted block eigen-sequence of a
//! kernel on S^d.
//!
//! The degree-k harmonic space on S^d has dimension
//! N(d,0) = 1, N(d,k) = (2k+d-1)/k · (k+d-2)!/((d-1)!(k-1)!),
//! and an inner-product kernel acts on it as the scalar μ_k. A
//! [`SpectrumTable`] holds the per-degree blocks plus a permutation sorting
//! them by non-increasing eigenvalue, which realizes the usual non-increasing
//! Mercer sequence λ_1 ≥ λ_2 ≥ ... block by block.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funk_hecke;
use crate::kernel::KernelSpec;
use crate::special::{binomial_u128, ln_factorial, KahanSum};

/// Exact dimension of the degree-k spherical-harmonic space on S^d.
///
/// Evaluated as the binomial difference C(d+k,k) - C(d+k-2,k-2), which equals
/// the factorial formula and avoids the intermediate division. Overflow is
/// reported, never wrapped.
pub fn multiplicity(d: usize, k: usize) -> Result<u128> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let overflow = || Error::MultiplicityOverflow { d, k };
    let n = (d + k) as u128;
    let full = binomial_u128(n, k as u128).ok_or_else(overflow)?;
    let inner = if k >= 2 {
        binomial_u128(n - 2, k as u128 - 2).ok_or_else(overflow)?
    } else {
        0
    };
    Ok(full - inner)
}

/// ln N(d,k), the floating log-scale companion of [`multiplicity`] for sums
/// at dimensions where the exact integer overflows.
pub fn ln_multiplicity(d: usize, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let df = d as f64;
    let kf = k as f64;
    ((2.0 * kf + df - 1.0) / kf).ln() + ln_factorial(k + d - 2)
        - ln_factorial(d - 1)
        - ln_factorial(k - 1)
}

/// One eigenvalue block: degree, eigenvalue, multiplicity, and the cumulative
/// count v_k = Σ_{k'≤k} N(d,k') in degree order.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumBlock {
    pub degree: usize,
    pub eigenvalue: f64,
    pub multiplicity: u128,
    pub cumulative: u128,
}

/// Per-degree blocks of a kernel spectrum plus the eigenvalue-sorted order.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    dimension: usize,
    blocks: Vec<SpectrumBlock>,
    /// Indices into `blocks`, non-increasing eigenvalue, ties by ascending degree.
    sorted: Vec<usize>,
    /// True when every eigenvalue beyond the table is exactly zero, i.e. the
    /// table is the whole spectrum rather than a truncation.
    complete: bool,
}

impl SpectrumTable {
    /// Builds the spectrum of `kernel` on S^d for degrees 0..=k_max.
    pub fn build(kernel: &KernelSpec, d: usize, k_max: usize) -> Result<Self> {
        if k_max > kernel.truncation_degree() {
            return Err(Error::DegreeOutOfRange {
                degree: k_max,
                truncation: kernel.truncation_degree(),
            });
        }
        let mut blocks = Vec::with_capacity(k_max + 1);
        let mut cumulative: u128 = 0;
        for k in 0..=k_max {
            let mult = multiplicity(d, k)?;
            cumulative = cumulative
                .checked_add(mult)
                .ok_or(Error::MultiplicityOverflow { d, k })?;
            blocks.push(SpectrumBlock {
                degree: k,
                eigenvalue: funk_hecke::eigenvalue(kernel, d, k)?,
                multiplicity: mult,
                cumulative,
            });
        }
        let complete = k_max >= kernel.max_active_degree();
        Ok(Self::from_blocks(d, blocks, complete))
    }

    /// Builds a synthetic spectrum from an explicit (eigenvalue, multiplicity)
    /// list; the list is taken to be the entire spectrum. Block "degrees" are
    /// the positions in the input list.
    pub fn synthetic(blocks: &[(f64, u128)]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidParameter("empty synthetic spectrum".into()));
        }
        let mut out = Vec::with_capacity(blocks.len());
        let mut cumulative: u128 = 0;
        for (i, &(eigenvalue, mult)) in blocks.iter().enumerate() {
            if !eigenvalue.is_finite() || eigenvalue < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "synthetic eigenvalue {eigenvalue} must be finite and nonnegative"
                )));
            }
            if mult == 0 {
                return Err(Error::InvalidParameter(
                    "synthetic multiplicity must be positive".into(),
                ));
            }
            cumulative += mult;
            out.push(SpectrumBlock {
                degree: i,
                eigenvalue,
                multiplicity: mult,
                cumulative,
            });
        }
        Ok(Self::from_blocks(0, out, true))
    }

    fn from_blocks(dimension: usize, blocks: Vec<SpectrumBlock>, complete: bool) -> Self {
        let mut sorted: Vec<usize> = (0..blocks.len()).collect();
        // Non-increasing eigenvalue; equal eigenvalues by ascending degree so
        // the λ_j sequence is deterministic.
        sorted.sort_by(|&a, &b| {
            blocks[b].eigenvalue.total_cmp(&blocks[a].eigenvalue)
                .then(blocks[a].degree.cmp(&blocks[b].degree))
        });
        Self {
            dimension,
            blocks,
            sorted,
            complete,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Blocks in degree order.
    pub fn blocks(&self) -> &[SpectrumBlock] {
        &self.blocks
    }

    /// Blocks in non-increasing eigenvalue order.
    pub fn sorted_blocks(&self) -> impl Iterator<Item = &SpectrumBlock> {
        self.sorted.iter().map(|&i| &self.blocks[i])
    }

    /// True when the table is the entire spectrum (polynomial kernel covered
    /// to its degree, or a synthetic list).
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn block(&self, degree: usize) -> Option<&SpectrumBlock> {
        self.blocks.iter().find(|b| b.degree == degree)
    }

    /// Σ_k μ_k·N(d,k); bounded by Φ(1), with equality for polynomial kernels
    /// fully covered by the table.
    pub fn trace(&self) -> f64 {
        let mut acc = KahanSum::new();
        for b in &self.blocks {
            acc.add(b.eigenvalue * b.multiplicity as f64);
        }
        acc.value()
    }

    /// True when the leading `count` blocks in degree order have strictly
    /// decreasing eigenvalues, the regime in which degree order and sorted
    /// order agree on the head of the sequence.
    pub fn leading_strictly_ordered(&self, count: usize) -> bool {
        let take = count.min(self.blocks.len());
        self.blocks[..take]
            .windows(2)
            .all(|w| w[0].eigenvalue > w[1].eigenvalue)
    }

    /// CSV with the documented schema `degree,eigenvalue,multiplicity,cumulative`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,eigenvalue,multiplicity,cumulative\n");
        for b in &self.blocks {
            out.push_str(&format!(
                "{},{:.17e},{},{}\n",
                b.degree, b.eigenvalue, b.multiplicity, b.cumulative
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicity_known_values() {
        assert_eq!(multiplicity(100, 0).unwrap(), 1);
        assert_eq!(multiplicity(9, 1).unwrap(), 10); // d+1
        assert_eq!(multiplicity(3, 2).unwrap(), 9);
        assert_eq!(multiplicity(2, 5).unwrap(), 11); // 2k+1 on S²
    }

    #[test]
    fn multiplicity_matches_factorial_formula() {
        // (2k+d-1)/k · (k+d-2)!/((d-1)!(k-1)!), evaluated in floating point.
        for d in [2usize, 3, 7, 19] {
            for k in 1..=8 {
                let exact = multiplicity(d, k).unwrap() as f64;
                let formula = (2.0 * k as f64 + d as f64 - 1.0) / k as f64
                    * ((ln_factorial(k + d - 2) - ln_factorial(d - 1) - ln_factorial(k - 1))
                        .exp());
                assert!(
                    ((exact - formula) / exact).abs() < 1e-12,
                    "d={d} k={k}: {exact} vs {formula}"
                );
                assert!(((ln_multiplicity(d, k) - exact.ln()) / exact.ln().abs().max(1.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn multiplicity_overflow_reported() {
        assert!(matches!(
            multiplicity(10_000, 60),
            Err(Error::MultiplicityOverflow { .. })
        ));
    }

    #[test]
    fn constant_kernel_single_block() {
        let t = SpectrumTable::build(&KernelSpec::constant(), 5, 0).unwrap();
        assert_eq!(t.blocks().len(), 1);
        assert_eq!(t.blocks()[0].multiplicity, 1);
        assert!((t.blocks()[0].eigenvalue - 1.0).abs() < 1e-15);
        assert!(t.is_complete());
    }

    #[test]
    fn quadratic_kernel_sorted_order() {
        let kernel = KernelSpec::new("t^2", vec![0.0, 0.0, 1.0]).unwrap();
        let t = SpectrumTable::build(&kernel, 3, 2).unwrap();
        let sorted: Vec<_> = t.sorted_blocks().map(|b| (b.degree, b.eigenvalue)).collect();
        assert_eq!(sorted[0].0, 0);
        assert!((sorted[0].1 - 0.25).abs() < 1e-15);
        assert_eq!(sorted[1].0, 2);
        assert!((sorted[1].1 - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(sorted[2].0, 1);
        assert_eq!(sorted[2].1, 0.0);
        // cumulative counts follow degree order: 1, 5, 14 on S³
        let cums: Vec<_> = t.blocks().iter().map(|b| b.cumulative).collect();
        assert_eq!(cums, vec![1, 5, 14]);
        assert!(t.is_complete());
    }

    #[test]
    fn trace_identity_polynomial_kernel() {
        for m in [2usize, 4, 6] {
            let kernel = KernelSpec::polynomial(m);
            for d in [2usize, 5, 12] {
                let t = SpectrumTable::build(&kernel, d, m).unwrap();
                let gap = (t.trace() - kernel.phi_one()).abs() / kernel.phi_one();
                assert!(gap < 1e-10, "poly:{m} d={d}: relative gap {gap}");
            }
        }
    }

    #[test]
    fn trace_bounded_and_tightening_for_rbf() {
        let kernel = KernelSpec::rbf(30);
        let d = 6;
        let mut last_gap = f64::INFINITY;
        for k_max in [2usize, 4, 8, 12] {
            let t = SpectrumTable::build(&kernel, d, k_max).unwrap();
            let gap = kernel.phi_one() - t.trace();
            assert!(gap > -1e-12, "trace exceeds Φ(1) at k_max={k_max}");
            assert!(gap <= last_gap + 1e-15);
            last_gap = gap;
        }
        assert!(last_gap < 1e-8);
    }

    #[test]
    fn rbf_leading_degrees_strictly_ordered() {
        let kernel = KernelSpec::rbf(20);
        let t = SpectrumTable::build(&kernel, 50, 8).unwrap();
        assert!(t.leading_strictly_ordered(8));
        // sorted order equals degree order for the RBF at large d
        let degs: Vec<_> = t.sorted_blocks().map(|b| b.degree).collect();
        assert_eq!(degs, (0..=8).collect::<Vec<_>>());
    }

    #[test]
    fn synthetic_table_and_csv() {
        let t = SpectrumTable::synthetic(&[(1.0, 1), (0.25, 2)]).unwrap();
        assert!(t.is_complete());
        assert_eq!(t.blocks()[1].cumulative, 3);
        let csv = t.to_csv();
        assert!(csv.starts_with("degree,eigenvalue,multiplicity,cumulative\n"));
        assert_eq!(csv.lines().count(), 3);
        assert!(SpectrumTable::synthetic(&[]).is_err());
        assert!(SpectrumTable::synthetic(&[(-1.0, 1)]).is_err());
        assert!(SpectrumTable::synthetic(&[(1.0, 0)]).is_err());
    }

    #[test]
    fn eigenvalue_ratio_monotone() {
        // μ_{k+2}/μ_k ≤ 1 for kernels with nonnegative coefficients.
        for kernel in [KernelSpec::rbf(30), KernelSpec::polynomial(8)] {
            for d in [2usize, 5, 20, 100] {
                let k_max = 8.min(kernel.truncation_degree());
                let t = SpectrumTable::build(&kernel, d, k_max).unwrap();
                for k in 0..=k_max - 2 {
                    let num = t.blocks()[k + 2].eigenvalue;
                    let den = t.blocks()[k].eigenvalue;
                    if den > 0.0 {
                        assert!(num / den <= 1.0 + 1e-12, "d={d} k={k}: {}", num / den);
                    }
                }
            }
        }
    }

    #[test]
    fn rbf_eigenvalue_asymptotics() {
        // μ_k ~ a_k·k!·d^{-k} = d^{-k}/e for the RBF; bracketed within 10% at
        // large d, within 5% at d = 1000 for k ≤ 3.
        let kernel = KernelSpec::rbf(60);
        let e_inv = (-1.0f64).exp();
        for d in [500usize, 1000, 2000] {
            let t = SpectrumTable::build(&kernel, d, 4).unwrap();
            for k in 0..=3usize {
                let scaled = t.blocks()[k].eigenvalue * (d as f64).powi(k as i32);
                assert!(
                    scaled >= 0.9 * e_inv && scaled <= 1.1 * e_inv,
                    "d={d} k={k}: μ_k·d^k = {scaled}"
                );
            }
        }
    }
}
