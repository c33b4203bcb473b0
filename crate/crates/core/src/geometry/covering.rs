use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{rng_from_seed, OrbitRng};
use crate::sampler::haar::haar_unitary;
use crate::spectra::{HermitianMatrix, OrbitPoint, Spectrum};

/// `log` of `(1 + 16 λ₁ / ζ)^(2dk)`, the ceiling asserted on greedy counts.
pub fn log_greedy_count_ceiling(lambda: &Spectrum, zeta: f64) -> f64 {
    2.0 * (lambda.dim() * lambda.rank_k()) as f64 * (16.0 * lambda.top() / zeta).ln_1p()
}

/// `log` of the covering bound `(1 + 8 λ₁ / ζ)^(2dk)` in spectral norm.
pub fn log_covering_upper(lambda: &Spectrum, zeta: f64) -> f64 {
    2.0 * (lambda.dim() * lambda.rank_k()) as f64 * (8.0 * lambda.top() / zeta).ln_1p()
}

fn spectral_distance(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    a.sub(b).expect("same dimension").spectral_norm()
}

/// Greedy `ζ`-separated set on the orbit of `diag(lambda)` in spectral norm.
///
/// Haar orbit points are proposed one at a time and kept when they are more
/// than `ζ` from every kept point. The run ends after `budget` consecutive
/// rejections. `initial` points are kept as given (they must already be
/// `ζ`-separated).
pub fn covering_extend(
    initial: Vec<OrbitPoint>,
    lambda: &Spectrum,
    zeta: f64,
    rng: &mut OrbitRng,
    budget: usize,
) -> Result<Vec<OrbitPoint>> {
    if !(zeta > 0.0) {
        return Err(invalid(format!("zeta must be positive, got {zeta}")));
    }
    if budget == 0 {
        return Err(invalid("budget must be positive"));
    }
    if !lambda.is_orbit_target() {
        return Err(invalid("orbit spectrum must be non-negative with zeros past rank_k"));
    }
    let mut mats: Vec<HermitianMatrix> = initial.iter().map(OrbitPoint::materialize).collect();
    for (s, a) in mats.iter().enumerate() {
        if mats[..s].iter().any(|b| spectral_distance(a, b) <= zeta) {
            return Err(invalid("initial centers are not zeta-separated"));
        }
    }
    let mut centers = initial;
    let mut rejections = 0;
    while rejections < budget {
        let cand = OrbitPoint::new(haar_unitary(lambda.dim(), rng), lambda.clone())?;
        let h = cand.materialize();
        if mats.iter().all(|c| spectral_distance(&h, c) > zeta) {
            mats.push(h);
            centers.push(cand);
            rejections = 0;
        } else {
            rejections += 1;
        }
    }
    let ceiling = log_greedy_count_ceiling(lambda, zeta);
    if (centers.len() as f64).ln() > ceiling + 1e-12 {
        return Err(Error::Violation(format!(
            "greedy count {} exceeds (1 + 16 lambda_1 / zeta)^(2dk) = exp({ceiling:.4})",
            centers.len()
        )));
    }
    Ok(centers)
}

/// [`covering_extend`] from an empty set.
pub fn covering_construct_orbit(lambda: &Spectrum, zeta: f64, rng: &mut OrbitRng, budget: usize) -> Result<Vec<OrbitPoint>> {
    covering_extend(Vec::new(), lambda, zeta, rng, budget)
}

/// Greedy counts at `2ζ` and `ζ` from one seed. The `ζ` run starts from the
/// `2ζ` centers, so `count_at_zeta ≥ count_at_2zeta` always.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringSandwich {
    pub zeta: f64,
    pub count_at_2zeta: usize,
    pub count_at_zeta: usize,
    pub log_count_ceiling_at_zeta: f64,
    pub ordered: bool,
}

pub fn covering_sandwich(lambda: &Spectrum, zeta: f64, seed: u64, budget: usize) -> Result<(CoveringSandwich, Vec<OrbitPoint>)> {
    let mut rng = rng_from_seed(seed);
    let coarse = covering_construct_orbit(lambda, 2.0 * zeta, &mut rng, budget)?;
    let n2 = coarse.len();
    let fine = covering_extend(coarse, lambda, zeta, &mut rng, budget)?;
    let report = CoveringSandwich {
        zeta,
        count_at_2zeta: n2,
        count_at_zeta: fine.len(),
        log_count_ceiling_at_zeta: log_greedy_count_ceiling(lambda, zeta),
        ordered: n2 <= fine.len(),
    };
    Ok((report, fine))
}
