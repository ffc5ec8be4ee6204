//! Inner-product kernels K(x,x') = Φ(⟨x,x'⟩) given by their Taylor coefficients.
//!
//! A kernel is positive-definite on spheres of every dimension exactly when
//! all Taylor coefficients of Φ are nonnegative, so the coefficient sequence
//! is the kernel's identity here. Entire kernels (RBF) are truncated at a
//! configurable degree with a reported tail bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default series cutoff for entire kernels like the RBF.
pub const DEFAULT_TRUNCATION: usize = 60;

/// An inner-product kernel, identified by the coefficients a_0..a_J of
/// Φ(t) = Σ a_j t^j.
#[derive(Debug, Clone, Serialize)]
pub struct KernelSpec {
    label: String,
    coefficients: Vec<f64>,
    /// Upper bound on Σ_{j>J} a_j, the part of Φ(1) lost to truncation.
    truncation_tail: f64,
}

impl KernelSpec {
    /// Builds a kernel from explicit coefficients. All coefficients must be
    /// nonnegative and finite, and at least one must be positive.
    pub fn new(label: impl Into<String>, coefficients: Vec<f64>) -> Result<Self> {
        Self::with_tail(label, coefficients, 0.0)
    }

    fn with_tail(label: impl Into<String>, coefficients: Vec<f64>, tail: f64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidKernel("no coefficients".into()));
        }
        if coefficients.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidKernel(
                "coefficients must be finite and nonnegative".into(),
            ));
        }
        if coefficients.iter().all(|&a| a == 0.0) {
            return Err(Error::InvalidKernel("all coefficients are zero".into()));
        }
        let sum: f64 = coefficients.iter().sum();
        if !sum.is_finite() {
            return Err(Error::InvalidKernel("coefficient sum overflows".into()));
        }
        Ok(Self {
            label: label.into(),
            coefficients,
            truncation_tail: tail,
        })
    }

    /// RBF kernel exp(-‖x-x'‖²/2) on the sphere: Φ(t) = e^{t-1}, a_j = 1/(e·j!).
    pub fn rbf(truncation_degree: usize) -> Self {
        let mut coeffs = Vec::with_capacity(truncation_degree + 1);
        let mut a = (-1.0f64).exp();
        for j in 0..=truncation_degree {
            if j > 0 {
                a /= j as f64;
            }
            coeffs.push(a);
        }
        // Σ_{j>J} 1/(e·j!) ≤ 2/(e·(J+1)!)
        let tail = 2.0 * a / (truncation_degree as f64 + 1.0);
        Self::with_tail("rbf", coeffs, tail).expect("rbf coefficients are positive")
    }

    /// Polynomial kernel Φ(t) = ((1+t)/2)^m with a_j = C(m,j)/2^m and Φ(1) = 1.
    pub fn polynomial(m: usize) -> Self {
        let scale = 0.5f64.powi(m as i32);
        let mut coeffs = Vec::with_capacity(m + 1);
        let mut c = 1.0;
        for j in 0..=m {
            if j > 0 {
                c = c * (m - j + 1) as f64 / j as f64;
            }
            coeffs.push(c * scale);
        }
        Self::new(format!("poly:{m}"), coeffs).expect("binomial coefficients are positive")
    }

    /// Linear kernel Φ(t) = t.
    pub fn linear() -> Self {
        Self::new("linear", vec![0.0, 1.0]).expect("valid")
    }

    /// Constant kernel Φ(t) = 1.
    pub fn constant() -> Self {
        Self::new("constant", vec![1.0]).expect("valid")
    }

    /// Resolves a preset name: "rbf", "poly:m", "linear", or "constant".
    pub fn preset(name: &str, truncation_degree: Option<usize>) -> Result<Self> {
        match name {
            "rbf" => Ok(Self::rbf(truncation_degree.unwrap_or(DEFAULT_TRUNCATION))),
            "linear" => Ok(Self::linear()),
            "constant" => Ok(Self::constant()),
            _ => {
                if let Some(m) = name.strip_prefix("poly:") {
                    let m: usize = m.parse().map_err(|_| {
                        Error::InvalidKernel(format!("bad polynomial degree in preset {name:?}"))
                    })?;
                    Ok(Self::polynomial(m))
                } else {
                    Err(Error::InvalidKernel(format!("unknown preset {name:?}")))
                }
            }
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// a_j, or 0 beyond the truncation degree.
    pub fn coefficient(&self, j: usize) -> f64 {
        self.coefficients.get(j).copied().unwrap_or(0.0)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Series cutoff J: coefficients a_0..a_J are stored.
    pub fn truncation_degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Upper bound on the coefficient mass dropped by truncation; this also
    /// bounds the error of every eigenvalue since |I(j,k,d)| ≤ 1.
    pub fn truncation_tail(&self) -> f64 {
        self.truncation_tail
    }

    /// Φ(t) by Horner evaluation of the stored coefficients.
    pub fn phi(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &a in self.coefficients.iter().rev() {
            acc = acc * t + a;
        }
        acc
    }

    /// Φ(1) = Σ a_j, the trace of the kernel (K_max on the sphere).
    pub fn phi_one(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    /// Largest j with a_j > 0.
    pub fn max_active_degree(&self) -> usize {
        self.coefficients
            .iter()
            .rposition(|&a| a > 0.0)
            .expect("at least one positive coefficient")
    }
}

/// Kernel section of a run configuration: either a preset name or an explicit
/// coefficient array.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub coefficients: Option<Vec<f64>>,
    #[serde(default)]
    pub truncation_degree: Option<usize>,
}

impl KernelConfig {
    pub fn build(&self) -> Result<KernelSpec> {
        let mut spec = match (&self.preset, &self.coefficients) {
            (Some(p), None) => KernelSpec::preset(p, self.truncation_degree)?,
            (None, Some(coeffs)) => {
                let mut coeffs = coeffs.clone();
                if let Some(j) = self.truncation_degree {
                    coeffs.truncate(j + 1);
                }
                KernelSpec::new("custom", coeffs)?
            }
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig(
                    "kernel: give either a preset or coefficients, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::InvalidConfig(
                    "kernel: missing preset or coefficients".into(),
                ))
            }
        };
        if let Some(label) = &self.label {
            spec.label = label.clone();
        }
        Ok(spec)
    }
}
