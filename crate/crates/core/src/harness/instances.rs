use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sampler::haar::{ginibre, haar_unitary};
use crate::spectra::{HermitianMatrix, C64};

fn check_dims(d: usize, k: usize) -> Result<()> {
    if d == 0 || k == 0 || k > d {
        return Err(invalid(format!("need 1 <= k <= d, got k={k} d={d}")));
    }
    Ok(())
}

fn rotated<R: Rng + ?Sized>(diag: &[f64], rng: &mut R) -> HermitianMatrix {
    let u = haar_unitary(diag.len(), rng);
    HermitianMatrix::from_real_diagonal(diag).conjugate_by(&u)
}

/// `top_eig · P` for a Haar-random rank-`k` projection `P`.
pub fn gen_projection_instance<R: Rng + ?Sized>(d: usize, k: usize, top_eig: f64, rng: &mut R) -> Result<HermitianMatrix> {
    check_dims(d, k)?;
    if !(top_eig >= 0.0 && top_eig.is_finite()) {
        return Err(invalid(format!("top_eig must be finite and >= 0, got {top_eig}")));
    }
    if k == d {
        return Ok(HermitianMatrix::identity(d).scale(top_eig));
    }
    let diag: Vec<f64> = (0..d).map(|i| if i < k { top_eig } else { 0.0 }).collect();
    Ok(rotated(&diag, rng))
}

/// Normalisation of the sample covariance `X X* / n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WishartNorm {
    /// Divide by the sample count `m`.
    #[default]
    Samples,
    /// Divide by the dimension `d`.
    Dimension,
}

/// `(1/m) X X*` for a `d × m` matrix `X` of standard complex Gaussians
/// (`E|X_ij|² = 1`).
pub fn gen_wishart_instance<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Result<HermitianMatrix> {
    gen_wishart_instance_with(d, m, WishartNorm::Samples, rng)
}

pub fn gen_wishart_instance_with<R: Rng + ?Sized>(d: usize, m: usize, norm: WishartNorm, rng: &mut R) -> Result<HermitianMatrix> {
    if d == 0 || m == 0 {
        return Err(invalid(format!("need d >= 1 and m >= 1, got d={d} m={m}")));
    }
    let x = ginibre(d, m, rng);
    let n = match norm {
        WishartNorm::Samples => m,
        WishartNorm::Dimension => d,
    };
    let w = &x * x.adjoint() * C64::new(1.0 / n as f64, 0.0);
    Ok(HermitianMatrix::symmetrized(w))
}

/// Spectrum with buckets `top` for `i ≤ ⌈k/4⌉`, `top/2` for
/// `⌈k/4⌉ < i ≤ ⌈3k/4⌉`, `top/3` for `⌈3k/4⌉ < i ≤ k`, zero beyond.
pub fn conditioned_gap_spectrum(d: usize, k: usize, top_eig: f64) -> Result<Vec<f64>> {
    check_dims(d, k)?;
    if k < 4 {
        return Err(invalid(format!("conditioned-gap instances need k >= 4, got {k}")));
    }
    if !(top_eig >= 0.0 && top_eig.is_finite()) {
        return Err(invalid(format!("top_eig must be finite and >= 0, got {top_eig}")));
    }
    let q1 = k.div_ceil(4);
    let q3 = (3 * k).div_ceil(4);
    Ok((1..=d)
        .map(|i| match i {
            i if i <= q1 => top_eig,
            i if i <= q3 => top_eig / 2.0,
            i if i <= k => top_eig / 3.0,
            _ => 0.0,
        })
        .collect())
}

/// [`conditioned_gap_spectrum`] conjugated by a Haar unitary.
pub fn gen_conditioned_gap_instance<R: Rng + ?Sized>(d: usize, k: usize, top_eig: f64, rng: &mut R) -> Result<HermitianMatrix> {
    let diag = conditioned_gap_spectrum(d, k, top_eig)?;
    Ok(rotated(&diag, rng))
}
