use rand::Rng;

use crate::error::{invalid, Result};
use crate::spectra::Spectrum;

/// One draw from the Laplace distribution with density `(1/2b) e^(−|x|/b)`,
/// by inversion of the CDF.
pub fn laplace_noise<R: Rng + ?Sized>(scale_b: f64, rng: &mut R) -> Result<f64> {
    if !(scale_b > 0.0 && scale_b.is_finite()) {
        return Err(invalid(format!("Laplace scale must be positive and finite, got {scale_b}")));
    }
    loop {
        let u = rng.random::<f64>() - 0.5;
        let r = 1.0 - 2.0 * u.abs();
        if r > 0.0 {
            return Ok(-scale_b * u.signum() * r.ln());
        }
    }
}

/// `P(X ≤ x)` for `X ~ Lap(b)`.
pub fn laplace_cdf(x: f64, scale_b: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / scale_b).exp()
    } else {
        1.0 - 0.5 * (-x / scale_b).exp()
    }
}

/// Adds i.i.d. `Lap(2/ε)` noise to every value. The result is neither
/// sorted nor clipped.
pub fn privatize_eigenvalues<R: Rng + ?Sized>(spectrum: &Spectrum, epsilon: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(epsilon > 0.0) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let b = 2.0 / epsilon;
    spectrum.values().iter().map(|v| Ok(v + laplace_noise(b, rng)?)).collect()
}

/// Keeps the `k` largest entries in non-increasing order, clamps negatives
/// to zero and zeroes everything past `k`. The length is preserved.
pub fn sort_clip_eigenvalues(noisy: &[f64], k: usize) -> Result<Spectrum> {
    if k == 0 || noisy.len() < k {
        return Err(invalid(format!("need 1 <= k <= {}, got k={k}", noisy.len())));
    }
    if noisy.iter().any(|x| !x.is_finite()) {
        return Err(crate::error::Error::NonFinite);
    }
    let mut v = noisy.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    let top: Vec<f64> = v[..k].iter().map(|x| x.max(0.0)).collect();
    Spectrum::orbit_target(&top, noisy.len())
}
