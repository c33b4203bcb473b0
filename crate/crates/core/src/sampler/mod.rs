//! Samplers on unitary orbits.
//!
//! Haar measure is the base measure of every orbit density. The exact
//! sampler covers rank-1 targets; everything else goes through the
//! Metropolis chain in [`mcmc`].

pub mod diagnostics;
pub mod exact;
pub mod haar;
pub mod mcmc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::OrbitRng;
use crate::spectra::{HermitianMatrix, OrbitPoint, Spectrum};

pub use diagnostics::{tilted_uniform_density, tv_distance_diagnostic};
pub use exact::{sample_rank1_exact, Rank1Sample};
pub use haar::{complete_to_unitary, haar_unit_vector, haar_unitary};
pub use mcmc::{sample_orbit_mcmc, OrbitChain};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub chain_length: usize,
    pub burn_in: usize,
    pub step_size: f64,
    pub diagnostics_on: bool,
    /// Robbins–Monro step-size tuning during burn-in only.
    pub adapt_step: bool,
    /// Use the exact sampler whenever the target has a single nonzero eigenvalue.
    pub exact_rank1: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { chain_length: 20_000, burn_in: 5_000, step_size: 0.3, diagnostics_on: false, adapt_step: true, exact_rank1: true }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chain_length == 0 || self.burn_in == 0 {
            return Err(invalid("chain_length and burn_in must be positive"));
        }
        if self.burn_in >= self.chain_length {
            return Err(invalid(format!(
                "burn_in ({}) must be smaller than chain_length ({})",
                self.burn_in, self.chain_length
            )));
        }
        if !(self.step_size > 0.0 && self.step_size <= std::f64::consts::PI) {
            return Err(invalid(format!("step_size must lie in (0, pi], got {}", self.step_size)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub acceptance_rate: f64,
    pub utility_trace: Vec<f64>,
    pub split_rhat: Option<f64>,
    pub final_step_size: f64,
    pub flags: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMethod {
    Zero,
    ExactRank1,
    Mcmc,
    ExactFallbackMcmc,
}

/// Output of [`sample_orbit`].
#[derive(Clone, Debug)]
pub struct OrbitSample {
    pub point: OrbitPoint,
    pub method: SamplerMethod,
    pub acceptance_rate: f64,
    pub diagnostics: Option<ChainDiagnostics>,
    pub flags: Vec<String>,
}

/// Samples `H = UΛU*` with density `∝ exp(coeff · ⟨M, H⟩)` against the
/// Haar push-forward on the orbit of `diag(lambda)`.
pub fn sample_orbit(
    m: &HermitianMatrix,
    lambda: &Spectrum,
    coeff: f64,
    cfg: &SamplerConfig,
    rng: &mut OrbitRng,
) -> Result<OrbitSample> {
    cfg.validate()?;
    if lambda.is_zero() {
        return Ok(OrbitSample {
            point: OrbitPoint::at_identity(lambda.clone()),
            method: SamplerMethod::Zero,
            acceptance_rate: 1.0,
            diagnostics: None,
            flags: vec!["zero_spectrum".into()],
        });
    }
    let rank1 = lambda.values()[1..].iter().all(|x| *x == 0.0);
    if cfg.exact_rank1 && rank1 && lambda.dim() == m.dim() {
        let s = sample_rank1_exact(m, coeff * lambda.top(), rng)?;
        let point = OrbitPoint::new(complete_to_unitary(&s.u), lambda.clone())?;
        let (method, flags) = if s.fell_back {
            (SamplerMethod::ExactFallbackMcmc, vec!["exact_sampler_fallback".to_string()])
        } else {
            (SamplerMethod::ExactRank1, Vec::new())
        };
        return Ok(OrbitSample { point, method, acceptance_rate: s.acceptance_rate(), diagnostics: None, flags });
    }
    let (point, diag) = sample_orbit_mcmc(m, lambda, coeff, cfg, rng)?;
    Ok(OrbitSample {
        point,
        method: SamplerMethod::Mcmc,
        acceptance_rate: diag.acceptance_rate,
        flags: diag.flags.clone(),
        diagnostics: Some(diag),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::default().validate().is_ok());
        let bad = SamplerConfig { burn_in: 20_000, ..SamplerConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SamplerConfig { step_size: 4.0, ..SamplerConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_defaults_fill_missing_json_fields() {
        let c: SamplerConfig = serde_json::from_str(r#"{"chain_length": 100, "burn_in": 10}"#).unwrap();
        assert_eq!(c.step_size, 0.3);
        assert!(c.adapt_step);
    }
}
