//! Run configuration: TOML or JSON documents with `[kernel]`/`[spectrum]`,
//! `[problem]`, `[simulation]`, `[curves]`, and `[output]` sections. Unknown
//! keys are rejected so typos fail loudly.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pinsker_core::kernel::KernelConfig;
use pinsker_core::pinsker::ProblemConfig;
use pinsker_core::rational::Rational;
use pinsker_core::{Error, KernelSpec, Result, SpectrumTable};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub kernel: Option<KernelConfig>,
    /// Synthetic spectrum injection: explicit `[eigenvalue, multiplicity]` rows.
    #[serde(default)]
    pub spectrum: Option<SyntheticSpectrum>,
    #[serde(default)]
    pub problem: Option<ProblemSection>,
    #[serde(default)]
    pub simulation: Option<SimulationSection>,
    #[serde(default)]
    pub curves: Option<CurvesSection>,
    #[serde(default)]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpectrum {
    pub blocks: Vec<(f64, u64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub dimension: usize,
    pub gamma: Rational,
    pub s: Rational,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "one")]
    pub sigma: f64,
    /// Optional sample-size override (default round(α·d^γ)).
    #[serde(default)]
    pub n: Option<u64>,
    /// Optional spectrum depth override (default p+5).
    #[serde(default)]
    pub k_max: Option<usize>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worst-case family by default: every retained block, the first dropped
    /// block, uniform, and prior.
    #[serde(default)]
    pub targets: Option<Vec<String>>,
    #[serde(default)]
    pub gram_cap: Option<usize>,
    /// δ of the lower-bound prior checks.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_reps() -> usize {
    200
}

fn default_delta() -> f64 {
    0.1
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            reps: default_reps(),
            seed: 0,
            targets: None,
            gram_cap: None,
            delta: default_delta(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesSection {
    /// One curve per smoothness value.
    pub s: Vec<Rational>,
    #[serde(default)]
    pub gamma_grid: Option<Vec<Rational>>,
    #[serde(default)]
    pub gamma_min: Option<Rational>,
    #[serde(default)]
    pub gamma_max: Option<Rational>,
    #[serde(default)]
    pub gamma_step: Option<Rational>,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "one")]
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub path: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e == "json")
            || text.trim_start().starts_with('{');
        let cfg: RunConfig = if is_json {
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidConfig(format!("bad JSON config: {e}")))?
        } else {
            toml::from_str(&text)
                .map_err(|e| Error::InvalidConfig(format!("bad TOML config: {e}")))?
        };
        Ok(cfg)
    }

    /// SHA-256 of the canonical JSON serialization, prefixed for readability.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canon.as_bytes());
        let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        format!("cfg-{hex}")
    }

    pub fn problem(&self) -> Result<&ProblemSection> {
        self.problem
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("missing [problem] section".into()))
    }

    pub fn build_problem(&self) -> Result<ProblemConfig> {
        let p = self.problem()?;
        ProblemConfig::new(
            p.dimension, p.gamma, p.s, p.alpha, p.radius, p.sigma, p.n,
        )
    }

    pub fn build_kernel(&self) -> Result<Option<KernelSpec>> {
        match (&self.kernel, &self.spectrum) {
            (Some(k), None) => Ok(Some(k.build()?)),
            (None, Some(_)) => Ok(None),
            (Some(_), Some(_)) => Err(Error::InvalidConfig(
                "give either [kernel] or [spectrum], not both".into(),
            )),
            (None, None) => Err(Error::InvalidConfig(
                "missing [kernel] or [spectrum] section".into(),
            )),
        }
    }

    /// The spectrum: synthetic when injected, otherwise built from the kernel
    /// to depth k_max (default p+5, clipped to the kernel truncation).
    pub fn build_spectrum(&self) -> Result<SpectrumTable> {
        if let Some(synth) = &self.spectrum {
            let blocks: Vec<(f64, u128)> = synth
                .blocks
                .iter()
                .map(|&(eig, mult)| (eig, mult as u128))
                .collect();
            return SpectrumTable::synthetic(&blocks);
        }
        let kernel = self
            .build_kernel()?
            .expect("kernel present when no synthetic spectrum");
        let p = self.problem()?;
        let degree_p =
            (p.gamma / (p.s + Rational::one())).floor_to_integer().max(0) as usize;
        let k_max = p
            .k_max
            .unwrap_or(degree_p + 5)
            .min(kernel.truncation_degree());
        SpectrumTable::build(&kernel, p.dimension, k_max)
    }

    pub fn simulation(&self) -> SimulationSection {
        self.simulation.clone().unwrap_or_default()
    }
}

/// Maps crate errors onto the documented exit codes: 2 for configuration
/// errors, 3 for numeric failures.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_)
        | Error::InvalidParameter(_)
        | Error::InvalidKernel(_)
        | Error::DimensionTooSmall(_)
        | Error::DegreeOutOfRange { .. } => 2,
        Error::MultiplicityOverflow { .. }
        | Error::NonFiniteEigenvalue { .. }
        | Error::DegenerateSpectrum
        | Error::SpectrumTooShallow
        | Error::SampleTooLarge { .. }
        | Error::MissingDegree(_) => 3,
    }
}
