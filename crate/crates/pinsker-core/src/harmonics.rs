//! Explicit orthonormal spherical-harmonic bases for degrees 0-2 on S^d, plus
//! an exact moment oracle for the uniform sphere measure.
//!
//! Monomial moments over S^d ⊂ R^{d+1} have the closed form
//!
//!   E[Π x_i^{2a_i}] = Γ((d+1)/2) · Π Γ(a_i + 1/2) / (Γ(1/2)^m · Γ((d+1)/2 + Σ a_i)),
//!
//! zero whenever any exponent is odd. The oracle certifies orthonormality of
//! the bases exactly (no sampling), which is what makes the Δₙ moment
//! diagnostics trustworthy. Bases stop at degree 2: higher degrees are only
//! ever needed in block-aggregated form, which the addition formula supplies
//! without individual harmonics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gegenbauer::gegenbauer;
use crate::special::ln_gamma;
use crate::spectrum::multiplicity;

/// A multi-index of exponents over the coordinates of R^{d+1}; trailing
/// zeros are implicit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MomentIndex(Vec<u32>);

impl MomentIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        let mut e = exponents;
        while e.last() == Some(&0) {
            e.pop();
        }
        MomentIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// E[Π x_i^{e_i}] under the uniform measure on S^d.
pub fn sphere_moment(d: usize, index: &MomentIndex) -> f64 {
    assert!(
        index.0.len() <= d + 1,
        "moment index spans {} coordinates but S^{d} has {}",
        index.0.len(),
        d + 1
    );
    if index.0.iter().any(|&e| e % 2 == 1) {
        return 0.0;
    }
    let half_sum: f64 = index.0.iter().map(|&e| e as f64 / 2.0).sum();
    if half_sum == 0.0 {
        return 1.0;
    }
    let dh = (d as f64 + 1.0) / 2.0;
    let mut ln = ln_gamma(dh) - ln_gamma(dh + half_sum);
    for &e in &index.0 {
        if e > 0 {
            ln += ln_gamma(e as f64 / 2.0 + 0.5) - ln_gamma(0.5);
        }
    }
    ln.exp()
}

/// A polynomial on R^{d+1} as a sparse monomial map.
#[derive(Debug, Clone, Default)]
pub struct Poly {
    terms: BTreeMap<MomentIndex, f64>,
}

impl Poly {
    pub fn constant(c: f64) -> Self {
        let mut p = Poly::default();
        if c != 0.0 {
            p.terms.insert(MomentIndex::new(vec![]), c);
        }
        p
    }

    /// The monomial coeff · Π x_i^{e_i}.
    pub fn monomial(coeff: f64, exponents: Vec<u32>) -> Self {
        let mut p = Poly::default();
        if coeff != 0.0 {
            p.terms.insert(MomentIndex::new(exponents), coeff);
        }
        p
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (idx, &c) in other.terms.iter() {
            let entry = self.terms.entry(idx.clone()).or_insert(0.0);
            *entry += c;
            if *entry == 0.0 {
                self.terms.remove(idx);
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Poly {
        let mut out = Poly::default();
        if factor != 0.0 {
            for (idx, &c) in &self.terms {
                out.terms.insert(idx.clone(), c * factor);
            }
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (ia, &ca) in &self.terms {
            for (ib, &cb) in &other.terms {
                let mut e = ia.0.clone();
                if e.len() < ib.0.len() {
                    e.resize(ib.0.len(), 0);
                }
                for (slot, &eb) in e.iter_mut().zip(&ib.0) {
                    *slot += eb;
                }
                let idx = MomentIndex::new(e);
                let entry = out.terms.entry(idx).or_insert(0.0);
                *entry += ca * cb;
            }
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (idx, &c) in &self.terms {
            let mut term = c;
            for (i, &e) in idx.0.iter().enumerate() {
                if e > 0 {
                    term *= x[i].powi(e as i32);
                }
            }
            acc += term;
        }
        acc
    }

    /// E[self] under the uniform measure on S^d, term by term through the
    /// moment oracle.
    pub fn moment(&self, d: usize) -> f64 {
        self.terms
            .iter()
            .map(|(idx, &c)| c * sphere_moment(d, idx))
            .sum()
    }

    /// E[self · other] on S^d, the oracle-certified inner product.
    pub fn inner(&self, other: &Poly, d: usize) -> f64 {
        self.mul(other).moment(d)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MomentIndex, f64)> {
        self.terms.iter().map(|(i, &c)| (i, c))
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|i| i.total_degree()).max().unwrap_or(0)
    }
}

/// An orthonormal basis of the degree-k harmonic subspace on S^d, k ≤ 2.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub dimension: usize,
    pub degree: usize,
    pub functions: Vec<Poly>,
}

/// Builds the explicit basis:
/// degree 0 → {1}; degree 1 → {√(d+1)·x_i};
/// degree 2 → {√((d+1)(d+3))·x_i x_j, i<j} ∪ Gram-Schmidt over the traceless
/// diagonal polynomials x_i² − 1/(d+1), orthonormalized with the moment oracle.
pub fn harmonic_basis(d: usize, degree: usize) -> Result<HarmonicBasis> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let coords = d + 1;
    let functions = match degree {
        0 => vec![Poly::constant(1.0)],
        1 => {
            let scale = (coords as f64).sqrt();
            (0..coords)
                .map(|i| {
                    let mut e = vec![0u32; i + 1];
                    e[i] = 1;
                    Poly::monomial(scale, e)
                })
                .collect()
        }
        2 => {
            let mut fns = Vec::new();
            let cross_scale = ((coords as f64) * (coords as f64 + 2.0)).sqrt();
            for i in 0..coords {
                for j in (i + 1)..coords {
                    let mut e = vec![0u32; j + 1];
                    e[i] = 1;
                    e[j] = 1;
                    fns.push(Poly::monomial(cross_scale, e));
                }
            }
            // Traceless diagonal family x_i² − 1/(d+1); the d+1 of them sum
            // to zero on the sphere, so the first d span the subspace.
            // Fixed lexicographic order keeps the basis reproducible.
            let mut raw = Vec::new();
            for i in 0..d {
                let mut e = vec![0u32; i + 1];
                e[i] = 2;
                let mut p = Poly::monomial(1.0, e);
                p.add_assign(&Poly::constant(-1.0 / coords as f64));
                raw.push(p);
            }
            for i in 0..raw.len() {
                let mut v = raw[i].clone();
                for prev in &fns[fns.len() - i..] {
                    let proj = v.inner(prev, d);
                    v.add_assign(&prev.scaled(-proj));
                }
                let norm_sq = v.inner(&v, d);
                if norm_sq <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "degenerate Gram-Schmidt pivot in degree-2 basis".into(),
                    ));
                }
                fns.push(v.scaled(norm_sq.sqrt().recip()));
            }
            fns
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "explicit harmonic bases stop at degree 2, requested {degree}"
            )))
        }
    };
    let expected = multiplicity(d, degree)?;
    debug_assert_eq!(functions.len() as u128, expected);
    Ok(HarmonicBasis {
        dimension: d,
        degree,
        functions,
    })
}

impl HarmonicBasis {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Gram matrix computed by exact integration; identity for a valid basis.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let n = self.functions.len();
        let mut g = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = self.functions[i].inner(&self.functions[j], self.dimension);
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        g
    }

    pub fn eval_all(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.functions.iter().map(|f| f.eval(x)));
    }
}

/// |Σ_j Y_{k,j}(x)·Y_{k,j}(x') − N(d,k)·P_{k,d}(⟨x,x'⟩)|, the addition-formula
/// residual of the explicit basis at a pair of unit vectors.
pub fn addition_check(d: usize, degree: usize, x: &[f64], x_prime: &[f64]) -> Result<f64> {
    for point in [x, x_prime] {
        if point.len() != d + 1 {
            return Err(Error::InvalidParameter(format!(
                "point has {} coordinates, expected {}",
                point.len(),
                d + 1
            )));
        }
        let norm: f64 = point.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "addition_check requires unit vectors, got norm {norm}"
            )));
        }
    }
    let basis = harmonic_basis(d, degree)?;
    let lhs: f64 = basis
        .functions
        .iter()
        .map(|f| f.eval(x) * f.eval(x_prime))
        .sum();
    let dot: f64 = x.iter().zip(x_prime).map(|(a, b)| a * b).sum();
    let rhs = multiplicity(d, degree)? as f64 * gegenbauer(degree, d, dot)?;
    Ok((lhs - rhs).abs())
}
