//! Privacy layer: Laplace eigenvalue release, exponential-mechanism targets
//! on orbits and the two end-to-end mechanisms.

mod algorithms;
mod laplace;
mod tail;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectra::{frobenius_inner, Dataset, HermitianMatrix, OrbitPoint, Spectrum};

pub use algorithms::{algorithm1, algorithm2, exponential_release, Mechanism};
pub use laplace::{laplace_cdf, laplace_noise, privatize_eigenvalues, sort_clip_eigenvalues};
pub use tail::{utility_tail_bound, utility_tail_threshold};

const SPLIT_TOL: f64 = 1e-12;

/// Pure ε-DP budget and how it is divided across mechanism stages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub split: Vec<f64>,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, split: Vec<f64>) -> Result<Self> {
        let b = Self { epsilon, split };
        b.validate()?;
        Ok(b)
    }

    /// Whole budget spent in a single stage.
    pub fn single(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, vec![1.0])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || self.epsilon.is_nan() {
            return Err(invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.split.is_empty() || self.split.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return Err(invalid("each budget fraction must lie in (0, 1]"));
        }
        let total: f64 = self.split.iter().sum();
        if (total - 1.0).abs() > SPLIT_TOL {
            return Err(invalid(format!("budget fractions sum to {total}, not 1")));
        }
        Ok(())
    }

    /// ε assigned to `stage`.
    pub fn stage(&self, stage: usize) -> f64 {
        self.epsilon * self.split[stage]
    }

    /// Sum of the per-stage ε values.
    pub fn total_spent(&self) -> f64 {
        self.split.iter().map(|f| f * self.epsilon).sum()
    }
}

/// Score sensitivity of `⟨M, H⟩` over neighbouring inputs: `λ₁`.
pub fn sensitivity_bound(lambda: &Spectrum) -> f64 {
    lambda.top().max(0.0)
}

/// Density `∝ exp(coeff · ⟨M, H⟩)` on the orbit of `diag(lambda)`.
#[derive(Clone, Debug)]
pub struct ExponentialTarget {
    pub m: HermitianMatrix,
    pub lambda: Spectrum,
    pub inverse_temperature_coeff: f64,
    pub sensitivity: f64,
}

impl ExponentialTarget {
    /// Coefficient `ε_stage / (4 λ₁)`. A zero spectrum gives coefficient 0.
    pub fn new(m: HermitianMatrix, lambda: Spectrum, stage_epsilon: f64) -> Result<Self> {
        if m.dim() != lambda.dim() {
            return Err(Error::DimensionMismatch { expected: m.dim(), found: lambda.dim() });
        }
        if !lambda.is_orbit_target() {
            return Err(invalid("orbit spectrum must be non-negative with zeros past rank_k"));
        }
        let sensitivity = sensitivity_bound(&lambda);
        let coeff = if sensitivity > 0.0 { stage_epsilon / (4.0 * sensitivity) } else { 0.0 };
        Ok(Self { m, lambda, inverse_temperature_coeff: coeff, sensitivity })
    }

    /// Same as [`ExponentialTarget::new`] with an explicit coefficient.
    pub fn with_coeff(m: HermitianMatrix, lambda: Spectrum, coeff: f64) -> Result<Self> {
        let mut t = Self::new(m, lambda, 0.0)?;
        t.inverse_temperature_coeff = coeff;
        Ok(t)
    }

    /// Unnormalised log-density at `h`.
    pub fn log_density(&self, h: &HermitianMatrix) -> Result<f64> {
        Ok(self.inverse_temperature_coeff * frobenius_inner(&self.m, h)?)
    }
}

/// Input to [`algorithm2`].
#[derive(Clone, Debug)]
pub enum MechanismInput {
    Matrix(HermitianMatrix),
    Dataset(Dataset),
}

impl MechanismInput {
    pub fn to_matrix(&self) -> HermitianMatrix {
        match self {
            MechanismInput::Matrix(m) => m.clone(),
            MechanismInput::Dataset(d) => d.covariance(),
        }
    }
}

impl From<HermitianMatrix> for MechanismInput {
    fn from(m: HermitianMatrix) -> Self {
        MechanismInput::Matrix(m)
    }
}

impl From<Dataset> for MechanismInput {
    fn from(d: Dataset) -> Self {
        MechanismInput::Dataset(d)
    }
}

/// Everything a mechanism run released or measured. Field order is fixed so
/// serialized transcripts diff cleanly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MechanismTranscript {
    pub mechanism: Mechanism,
    pub seed: u64,
    pub budget: PrivacyBudget,
    pub noisy_eigenvalues: Option<Vec<f64>>,
    pub target_spectrum: Spectrum,
    pub inverse_temperature_coeff: f64,
    pub output: OrbitPoint,
    pub utility: f64,
    /// `Σ γ_i λ_i` for the spectrum actually targeted.
    pub optimum: f64,
    pub utility_gap: f64,
    /// `‖M − H‖_F²`.
    pub frobenius_error: f64,
    pub sampler: crate::sampler::SamplerMethod,
    pub acceptance_rate: f64,
    pub split_rhat: Option<f64>,
    pub flags: Vec<String>,
    pub warnings: Vec<String>,
}

impl MechanismTranscript {
    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }
}
