use serde::{Deserialize, Serialize};

use super::{privatize_eigenvalues, sort_clip_eigenvalues, ExponentialTarget, MechanismInput, MechanismTranscript, PrivacyBudget};
use crate::error::{invalid, Error, Result};
use crate::rng::{rng_from_seed, OrbitRng};
use crate::sampler::{sample_orbit, OrbitSample, SamplerConfig};
use crate::spectra::{eig_hermitian, frobenius_inner, schur_horn_optimum, HermitianMatrix, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    Algorithm1,
    Algorithm2,
}

/// Draws one orbit point from `target`.
pub fn exponential_release(target: &ExponentialTarget, cfg: &SamplerConfig, rng: &mut OrbitRng) -> Result<OrbitSample> {
    sample_orbit(&target.m, &target.lambda, target.inverse_temperature_coeff, cfg, rng)
}

struct Release {
    mechanism: Mechanism,
    seed: u64,
    budget: PrivacyBudget,
    noisy: Option<Vec<f64>>,
    warnings: Vec<String>,
}

fn transcript(m: &HermitianMatrix, gamma: &Spectrum, target: &ExponentialTarget, sample: OrbitSample, r: Release) -> Result<MechanismTranscript> {
    let h = sample.point.materialize();
    let utility = frobenius_inner(m, &h)?;
    let optimum = schur_horn_optimum(gamma, &target.lambda)?;
    let frobenius_error = m.sub(&h)?.frobenius_norm().powi(2);
    Ok(MechanismTranscript {
        mechanism: r.mechanism,
        seed: r.seed,
        budget: r.budget,
        noisy_eigenvalues: r.noisy,
        target_spectrum: target.lambda.clone(),
        inverse_temperature_coeff: target.inverse_temperature_coeff,
        output: sample.point,
        utility,
        optimum,
        utility_gap: optimum - utility,
        frobenius_error,
        sampler: sample.method,
        acceptance_rate: sample.acceptance_rate,
        split_rhat: sample.diagnostics.as_ref().and_then(|d| d.split_rhat),
        flags: sample.flags,
        warnings: r.warnings,
    })
}

fn check_input(m: &HermitianMatrix, epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || epsilon.is_nan() {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    m.ensure_psd()
}

/// Samples `H` from the orbit of `diag(lambda)` with density
/// `∝ exp((ε / 4λ₁) ⟨M, H⟩)`.
pub fn algorithm1(
    m: &HermitianMatrix,
    lambda: &Spectrum,
    epsilon: f64,
    cfg: &SamplerConfig,
    seed: u64,
) -> Result<MechanismTranscript> {
    check_input(m, epsilon)?;
    if lambda.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: lambda.dim() });
    }
    let budget = PrivacyBudget::single(epsilon)?;
    let mut warnings = Vec::new();
    if epsilon >= 1.0 {
        warnings.push(format!("epsilon {epsilon} is outside (0, 1); the utility guarantee assumes epsilon < 1"));
    }
    let (gamma, _) = eig_hermitian(m)?;
    let target = ExponentialTarget::new(m.clone(), lambda.clone(), budget.stage(0))?;
    let mut rng = rng_from_seed(seed);
    let sample = exponential_release(&target, cfg, &mut rng)?;
    let r = Release { mechanism: Mechanism::Algorithm1, seed, budget, noisy: None, warnings };
    transcript(m, &gamma, &target, sample, r)
}

/// Private rank-`k` approximation. Half the budget releases the top-`k`
/// eigenvalues with `Lap(4/ε)` noise; the other half samples from the orbit
/// of the sorted, clipped noisy spectrum with coefficient `ε / (8 λ̃₁)`.
pub fn algorithm2(
    input: impl Into<MechanismInput>,
    k: usize,
    epsilon: f64,
    cfg: &SamplerConfig,
    seed: u64,
) -> Result<MechanismTranscript> {
    let m = input.into().to_matrix();
    check_input(&m, epsilon)?;
    let d = m.dim();
    if k == 0 || k > d {
        return Err(invalid(format!("need 1 <= k <= d, got k={k} d={d}")));
    }
    let budget = PrivacyBudget::new(epsilon, vec![0.5, 0.5])?;
    let (gamma, _) = eig_hermitian(&m)?;
    let mut rng = rng_from_seed(seed);

    let top = Spectrum::new(gamma.values()[..k].to_vec())?;
    let noisy = privatize_eigenvalues(&top, budget.stage(0), &mut rng)?;
    let clipped = sort_clip_eigenvalues(&noisy, k)?;
    let lambda_tilde = Spectrum::orbit_target(clipped.values(), d)?;

    let target = ExponentialTarget::new(m.clone(), lambda_tilde, budget.stage(1))?;
    let mut sample = exponential_release(&target, cfg, &mut rng)?;
    if target.lambda.is_zero() {
        sample.flags.retain(|f| f != "zero_spectrum");
        sample.flags.push("zero_noisy_spectrum: all privatized eigenvalues clipped to 0".into());
    }
    debug_assert!((budget.total_spent() - epsilon).abs() <= 1e-12 * epsilon);
    let r = Release { mechanism: Mechanism::Algorithm2, seed, budget, noisy: Some(noisy), warnings: Vec::new() };
    transcript(&m, &gamma, &target, sample, r)
}
