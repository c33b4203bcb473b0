use crate::error::{invalid, Result};
use crate::spectra::OrbitPoint;
use crate::stats::{simpson, unit_histogram};

/// `t = |u₁₁|²` for a `d = 2` rank-1 orbit point.
pub fn rank1_marginal(p: &OrbitPoint) -> Result<f64> {
    if p.dim() != 2 || p.spectrum().values()[1] != 0.0 {
        return Err(invalid("marginal diagnostics need d = 2 and a rank-1 spectrum"));
    }
    Ok(p.u()[(0, 0)].norm_sqr())
}

/// Bin masses of an (unnormalised) density on `[0, 1]`.
pub fn oracle_bin_masses<F: Fn(f64) -> f64>(density: F, bins: usize) -> Vec<f64> {
    let w = 1.0 / bins as f64;
    let raw: Vec<f64> = (0..bins).map(|b| simpson(&density, b as f64 * w, (b + 1) as f64 * w, 64)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// `½ Σ |empirical − oracle|` over `bins` equal-width bins of the marginal.
pub fn tv_distance_marginals<F: Fn(f64) -> f64>(t: &[f64], oracle_density: F, bins: usize) -> Result<f64> {
    if bins == 0 || t.is_empty() {
        return Err(invalid("need at least one bin and one sample"));
    }
    let emp = unit_histogram(t, bins);
    let orc = oracle_bin_masses(oracle_density, bins);
    Ok(0.5 * emp.iter().zip(&orc).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Total-variation distance between the `t`-marginal of `samples` and an
/// oracle density on `[0, 1]`. Only defined for `d = 2` rank-1 orbits.
pub fn tv_distance_diagnostic<F: Fn(f64) -> f64>(samples: &[OrbitPoint], oracle_density: F, bins: usize) -> Result<f64> {
    let t = samples.iter().map(rank1_marginal).collect::<Result<Vec<_>>>()?;
    tv_distance_marginals(&t, oracle_density, bins)
}

/// Density `∝ exp(slope · t)` on `[0, 1]`: the `t`-marginal of the target when
/// `d = 2`, `Λ = diag(λ₁, 0)`, `M = diag(γ₁, γ₂)` and
/// `slope = coeff · λ₁ · (γ₁ − γ₂)`.
pub fn tilted_uniform_density(slope: f64) -> impl Fn(f64) -> f64 {
    move |t| (slope * (t - 1.0)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::Spectrum;

    #[test]
    fn uniform_oracle_masses() {
        let m = oracle_bin_masses(|_| 1.0, 4);
        for x in m {
            assert!((x - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_wrong_dimension() {
        let p = OrbitPoint::at_identity(Spectrum::orbit_target(&[1.0], 3).unwrap());
        assert!(tv_distance_diagnostic(&[p], |_| 1.0, 10).is_err());
    }

    #[test]
    fn grid_against_uniform_is_small() {
        let t: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(tv_distance_marginals(&t, |_| 1.0, 50).unwrap() < 1e-12);
    }
}
