use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::mcmc::sample_orbit_mcmc;
use super::SamplerConfig;
use crate::error::{invalid, Result};
use crate::rng::OrbitRng;
use crate::spectra::{eig_hermitian, CVector, HermitianMatrix, Spectrum, C64};

/// Attempt cap; hitting it means the envelope acceptance is below `1e-5`.
pub const MAX_ATTEMPTS: u64 = 100_000;

/// Result of [`sample_rank1_exact`].
#[derive(Clone, Debug)]
pub struct Rank1Sample {
    pub u: CVector,
    pub attempts: u64,
    /// Set when the rejection sampler gave up and the vector came from MCMC.
    pub fell_back: bool,
}

impl Rank1Sample {
    pub fn acceptance_rate(&self) -> f64 {
        1.0 / self.attempts as f64
    }
}

/// Exact sample from `∝ exp(coeff · u*Mu)` on the complex unit sphere.
///
/// In the eigenbasis of `M` the weights `t_i = |w_i|²` are uniform on the
/// simplex under Haar measure and the target is `∝ exp(−Σ a_i t_i)` with
/// `a_i = coeff (γ_max − γ_i) ≥ 0`. Proposals normalise independent
/// `Exp(d + a_i)` draws, whose simplex density is `∝ (d + a·t)^(−d)`, so the
/// acceptance ratio `(x/d)^d e^(d−x)` with `x = d + a·t` never exceeds 1.
pub fn sample_rank1_exact(m: &HermitianMatrix, coeff: f64, rng: &mut OrbitRng) -> Result<Rank1Sample> {
    if !(coeff >= 0.0 && coeff.is_finite()) {
        return Err(invalid(format!("coefficient must be finite and >= 0, got {coeff}")));
    }
    let (gamma, v) = eig_hermitian(m)?;
    let d = m.dim();
    let df = d as f64;
    let gmax = gamma.top();
    let a: Vec<f64> = gamma.values().iter().map(|g| coeff * (gmax - g)).collect();
    let b: Vec<f64> = a.iter().map(|ai| df + ai).collect();

    let mut t = vec![0.0; d];
    for attempt in 1..=MAX_ATTEMPTS {
        let mut sum = 0.0;
        for i in 0..d {
            let e: f64 = Exp1.sample(rng);
            t[i] = e / b[i];
            sum += t[i];
        }
        let mut x = 0.0;
        for i in 0..d {
            t[i] /= sum;
            x += b[i] * t[i];
        }
        let log_acc = df * (x / df).ln() + df - x;
        if rng.random::<f64>().ln() < log_acc {
            let w = CVector::from_iterator(
                d,
                t.iter().map(|ti| C64::from_polar(ti.sqrt(), rng.random::<f64>() * std::f64::consts::TAU)),
            );
            return Ok(Rank1Sample { u: &v * w, attempts: attempt, fell_back: false });
        }
    }

    let lambda = Spectrum::orbit_target(&[1.0], d)?;
    let (p, _) = sample_orbit_mcmc(m, &lambda, coeff, &SamplerConfig::default(), rng)?;
    Ok(Rank1Sample { u: p.u().column(0).clone_owned(), attempts: MAX_ATTEMPTS, fell_back: true })
}
