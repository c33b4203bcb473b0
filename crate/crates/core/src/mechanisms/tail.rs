use crate::error::{invalid, Result};
use crate::spectra::Spectrum;

/// Natural log of the tail bound; `−∞` when `λ₁ = 0`.
fn log_tail_bound(gamma: &Spectrum, lambda: &Spectrum, epsilon: f64, t: f64) -> f64 {
    let l1 = lambda.top();
    if l1 <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let big_gamma = gamma.sum();
    let d = gamma.dim() as f64;
    let k = lambda.rank_k() as f64;
    2.0 * d * k * (16.0 * l1 * big_gamma / t).ln_1p() - epsilon * t / (4.0 * l1)
}

/// Upper bound on `P(Σγ_iλ_i − ⟨M, H⟩ > t)` for the first mechanism:
/// `(1 + 16 λ₁ Γ / t)^(2dk) · exp(−ε t / (4 λ₁))` with `Γ = Σ γ_i`.
///
/// The value is not capped at 1.
pub fn utility_tail_bound(gamma: &Spectrum, lambda: &Spectrum, epsilon: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    if !(epsilon > 0.0) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if gamma.dim() != lambda.dim() {
        return Err(crate::error::Error::DimensionMismatch { expected: gamma.dim(), found: lambda.dim() });
    }
    if gamma.sum() < 0.0 {
        return Err(invalid("the tail bound needs Σγ >= 0"));
    }
    Ok(log_tail_bound(gamma, lambda, epsilon, t).exp())
}

/// Smallest `t` with `utility_tail_bound(t) ≤ β`, by bisection. The bound is
/// strictly decreasing in `t`.
pub fn utility_tail_threshold(gamma: &Spectrum, lambda: &Spectrum, epsilon: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid(format!("beta must lie in (0, 1), got {beta}")));
    }
    utility_tail_bound(gamma, lambda, epsilon, 1.0)?;
    if lambda.top() <= 0.0 {
        return Ok(0.0);
    }
    let target = beta.ln();
    let f = |t: f64| log_tail_bound(gamma, lambda, epsilon, t) - target;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mid > 0.0 && f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}
