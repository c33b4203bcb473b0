use crate::error::{invalid, Error, Result};
use crate::spectra::{eig_hermitian, HermitianMatrix};

pub const SIN_THETA_TOL: f64 = 1e-8;

/// Checks `‖U₁U₁* − Û₁Û₁*‖_F ≤ ‖A − Â‖_F / Δ` where `U₁`, `Û₁` span the top-`i`
/// eigenvectors of `a` and `a_hat`. Returns `(lhs, rhs)`.
///
/// The hypothesis is two-sided: both `λ_i(A) − λ_{i+1}(Â) ≥ Δ` and
/// `λ_i(Â) − λ_{i+1}(A) ≥ Δ` must hold. With only one of them the Frobenius
/// form can fail by up to a factor `√2`. Hypothesis failures are reported as
/// [`Error::Hypothesis`], inequality failures as [`Error::Violation`].
pub fn sin_theta_check(a: &HermitianMatrix, a_hat: &HermitianMatrix, i: usize, delta: f64) -> Result<(f64, f64)> {
    let d = a.dim();
    if a_hat.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: a_hat.dim() });
    }
    if i == 0 || i > d {
        return Err(invalid(format!("need 1 <= i <= d, got i={i} d={d}")));
    }
    if !(delta > 0.0) {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    let (ga, ua) = eig_hermitian(a)?;
    let (gb, ub) = eig_hermitian(a_hat)?;
    if i < d {
        let (a_v, b_v) = (ga.values(), gb.values());
        let sep = (a_v[i - 1] - b_v[i]).min(b_v[i - 1] - a_v[i]);
        if sep < delta {
            return Err(Error::Hypothesis(format!("spectral separation {sep:.6e} is below delta {delta:.6e}")));
        }
    }
    let p = ua.columns(0, i) * ua.columns(0, i).adjoint();
    let q = ub.columns(0, i) * ub.columns(0, i).adjoint();
    let lhs = (p - q).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let rhs = a.sub(a_hat)?.frobenius_norm() / delta;
    if lhs > rhs + SIN_THETA_TOL {
        return Err(Error::Violation(format!("sin-theta: {lhs:.12e} > {rhs:.12e}")));
    }
    Ok((lhs, rhs))
}

/// Largest `Δ` satisfying the two-sided hypothesis of [`sin_theta_check`].
pub fn two_sided_separation(a: &HermitianMatrix, a_hat: &HermitianMatrix, i: usize) -> Result<f64> {
    let ga = a.eigenvalues();
    let gb = a_hat.eigenvalues();
    if ga.len() != gb.len() || i == 0 || i >= ga.len() {
        return Err(invalid("need matching dimensions and 1 <= i < d"));
    }
    Ok((ga[i - 1] - gb[i]).min(gb[i - 1] - ga[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{CMatrix, C64};

    fn rot(eta: f64) -> CMatrix {
        let (s, c) = eta.sin_cos();
        CMatrix::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)])
    }

    #[test]
    fn identical_matrices() {
        let a = HermitianMatrix::from_real_diagonal(&[2.0, 0.0]);
        assert_eq!(sin_theta_check(&a, &a, 1, 2.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn rotated_2x2() {
        let a = HermitianMatrix::from_real_diagonal(&[2.0, 0.0]);
        let b = a.conjugate_by(&rot(0.1));
        let (lhs, rhs) = sin_theta_check(&a, &b, 1, 2.0).unwrap();
        // Projections onto lines at angle η differ by √2 sin η; A − Â = 2(P − P̂).
        assert!((lhs - 2f64.sqrt() * 0.1f64.sin()).abs() < 1e-12);
        assert!((rhs - lhs).abs() < 1e-12);
    }

    #[test]
    fn one_sided_separation_is_rejected() {
        // Only λ₁(A) − λ₂(Â) ≥ Δ holds here; the Frobenius bound would fail.
        let a = HermitianMatrix::from_real_diagonal(&[1.0, 0.0]);
        let r = rot(std::f64::consts::FRAC_PI_4);
        let b = HermitianMatrix::from_real_diagonal(&[1.0, -0.1]).conjugate_by(&r);
        assert!(matches!(sin_theta_check(&a, &b, 1, 1.1), Err(Error::Hypothesis(_))));
    }
}
