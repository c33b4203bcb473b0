//! Randomised invariant suites. Each returns a [`SuiteResult`] counting
//! violations; none of them panics on a failed check.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    aligned_basis, covering_sandwich, packing_grassmann_dim, packing_lower_construct, packing_map_phi, sin_theta_check,
    two_sided_separation, verify_certificate, ProjectionPoint,
};
use crate::mechanisms::{laplace_cdf, privatize_eigenvalues};
use crate::rng::{derived_rng, OrbitRng};
use crate::sampler::haar::{ginibre, haar_unit_vector, haar_unitary};
use crate::sampler::sample_rank1_exact;
use crate::spectra::{frobenius_identity_check, frobenius_inner, CMatrix, CVector, Dataset, HermitianMatrix, OrbitPoint, Spectrum, C64};
use crate::stats::{ks_statistic, mean};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub violations: usize,
    /// Largest observed value of the checked statistic (suite-specific).
    pub worst: f64,
    pub detail: String,
    pub passed: bool,
}

impl SuiteResult {
    fn new(name: &str, cases: usize, violations: usize, worst: f64, detail: String) -> Self {
        Self { name: name.into(), cases, violations, worst, detail, passed: violations == 0 }
    }
}

fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Point drawn uniformly in direction with norm in `[0, 1]`.
fn ball_point<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    let r: f64 = if rng.random::<f64>() < 0.5 { 1.0 } else { rng.random() };
    haar_unit_vector(d, rng) * C64::new(r, 0.0)
}

/// Random non-negative non-increasing spectrum with `k` nonzero entries.
pub fn random_orbit_spectrum<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Spectrum {
    let mut top: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..3.0)).collect();
    top.sort_by(|a, b| b.total_cmp(a));
    Spectrum::orbit_target(&top, d).expect("valid")
}

/// Random Hermitian matrix with a prescribed spectrum.
fn hermitian_with<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> HermitianMatrix {
    HermitianMatrix::from_real_diagonal(values).conjugate_by(&haar_unitary(values.len(), rng))
}

fn gue<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    let g = ginibre(d, d, rng);
    let h = HermitianMatrix::symmetrized((&g + g.adjoint()) * C64::new(0.5, 0.0));
    let n = h.frobenius_norm();
    h.scale(1.0 / n)
}

/// `|⟨A, H⟩ − ⟨A′, H⟩| ≤ λ₁ + 1e-9` over neighbouring datasets and orbit
/// points (`d ≤ 8`, rank `≤ 4`). Half the cases use the worst-case swap
/// (remove a point in the kernel of `H`, add one along its top eigenvector).
pub fn sensitivity_suite(cases: usize, rng: &mut OrbitRng) -> Result<SuiteResult> {
    let mut violations = 0;
    let mut worst = 0.0f64;
    for c in 0..cases {
        let d = rng.random_range(2..=8);
        let k = rng.random_range(1..=d.min(4));
        let lambda = random_orbit_spectrum(d, k, rng);
        let u = haar_unitary(d, rng);
        let h = OrbitPoint::new(u.clone(), lambda.clone())?.materialize();
        let n = rng.random_range(1..=6);
        let mut pts: Vec<CVector> = (0..n).map(|_| ball_point(d, rng)).collect();
        let replacement = if c % 2 == 0 {
            if k < d {
                pts[0] = u.column(d - 1).into_owned();
            }
            u.column(0).into_owned()
        } else {
            ball_point(d, rng)
        };
        let ds = Dataset::new(d, pts)?;
        let nb = ds.neighbor(0, replacement)?;
        let diff = (frobenius_inner(&ds.covariance(), &h)? - frobenius_inner(&nb.covariance(), &h)?).abs();
        let ratio = diff / lambda.top();
        worst = worst.max(ratio);
        if diff > lambda.top() + 1e-9 {
            violations += 1;
        }
    }
    Ok(SuiteResult::new("sensitivity", cases, violations, worst, "max |<A,H>-<A',H>| / lambda_1".into()))
}

/// `Σ_i (λ_i(M) − λ_i(M − vv*)) = ‖v‖²` within `1e-8` and
/// `λ_i(M) ≥ λ_i(M − vv*)` for every `i`, `d ≤ 8`.
pub fn eigen_stability_suite(cases: usize, rng: &mut OrbitRng) -> Result<SuiteResult> {
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let d = rng.random_range(1..=8);
        let n = rng.random_range(0..=2 * d);
        let pts: Vec<CVector> = (0..n).map(|_| ball_point(d, rng)).collect();
        let a = Dataset::new(d, pts)?.covariance();
        let v = ball_point(d, rng);
        let m = a.add(&HermitianMatrix::rank_one(&v))?;
        let lm = m.eigenvalues();
        let la = a.eigenvalues();
        let total: f64 = lm.iter().zip(&la).map(|(x, y)| x - y).sum();
        let err = (total - v.norm_squared()).abs();
        worst = worst.max(err);
        let monotone = lm.iter().zip(&la).all(|(x, y)| x - y >= -1e-10);
        if err > 1e-8 || !monotone {
            violations += 1;
        }
    }
    Ok(SuiteResult::new("eigenvalue_l1_stability", cases, violations, worst, "max |sum of shifts - |v|^2|".into()))
}

/// Laplace release calibration: mean absolute deviation `2/ε` within 2% and
/// KS distance to the Laplace CDF at most `0.01`.
pub fn laplace_suite(trials: usize, epsilon: f64, rng: &mut OrbitRng) -> Result<SuiteResult> {
    let base = Spectrum::new(vec![5.0])?;
    let mut noise = Vec::with_capacity(trials);
    for _ in 0..trials {
        noise.push(privatize_eigenvalues(&base, epsilon, rng)?[0] - 5.0);
    }
    let b = 2.0 / epsilon;
    let mad = mean(&noise.iter().map(|x| x.abs()).collect::<Vec<_>>());
    let rel = (mad / b - 1.0).abs();
    let ks = ks_statistic(&noise, |x| laplace_cdf(x, b));
    let violations = usize::from(rel > 0.02) + usize::from(ks > 0.01);
    Ok(SuiteResult::new(
        "laplace_calibration",
        trials,
        violations,
        ks,
        format!("mad {mad:.5} vs {b:.5} (rel {rel:.4}), ks {ks:.5}"),
    ))
}

/// sin-Θ inequality on gap-verified pairs (`d ≤ 6`). Pairs failing the
/// two-sided hypothesis are redrawn.
pub fn sin_theta_suite(cases: usize, rng: &mut OrbitRng) -> Result<SuiteResult> {
    let mut violations = 0;
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < cases {
        let d = rng.random_range(2..=6);
        let i = rng.random_range(1..d);
        let mut vals: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        vals.sort_by(|a, b| b.total_cmp(a));
        let a = hermitian_with(&vals, rng);
        let size = rng.random_range(0.0..1.0) * (vals[i - 1] - vals[i]);
        let a_hat = a.add(&gue(d, rng).scale(size))?;
        let delta = two_sided_separation(&a, &a_hat, i)?;
        if delta <= 1e-6 {
            continue;
        }
        done += 1;
        match sin_theta_check(&a, &a_hat, i, delta) {
            Ok((lhs, rhs)) => worst = worst.max(if rhs > 0.0 { lhs / rhs } else { 0.0 }),
            Err(Error::Violation(_)) => violations += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(SuiteResult::new("sin_theta", cases, violations, worst, "max lhs/rhs".into()))
}

fn haar_projection(d: usize, rng: &mut OrbitRng) -> ProjectionPoint {
    let i = rng.random_range(1..d);
    ProjectionPoint::haar(d, i, rng)
}

/// `‖Ŵ − Î_i‖_F ≤ ‖p − I_i‖_F + 1e-8` with `ŴŴ* = p` and orthonormal
/// columns, `d ≤ 8`.
pub fn alignment_suite(cases: usize, rng: &mut OrbitRng) -> Result<SuiteResult> {
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let d = rng.random_range(2..=8);
        let p = haar_projection(d, rng);
        let i = p.rank();
        let w = aligned_basis(&p);
        let e = crate::geometry::coordinate_frame(d, i);
        let lhs = frob(&(&w - &e));
        let rhs = p.distance(&ProjectionPoint::coordinate(d, i));
        let spans = frob(&(&w * w.adjoint() - p.matrix().matrix())) < 1e-10;
        let ortho = frob(&(w.adjoint() * &w - CMatrix::identity(i, i))) < 1e-10;
        worst = worst.max(lhs - rhs);
        if lhs > rhs + 1e-8 || !spans || !ortho {
            violations += 1;
        }
    }
    Ok(SuiteResult::new("aligned_basis", cases, violations, worst, "max lhs - rhs".into()))
}

/// Packing map bounds (`d ≤ 6`):
/// `‖φ(p) − φ(p′)‖_F ≥ (λ_i − λ_j) ‖p − p′‖_F − 1e-8` and
/// `‖φ(p) − Λ‖_F ≤ 4λ₁ ‖p − I_i‖_F + 1e-8`.
pub fn phi_map_suite(cases: usize, rng: &mut OrbitRng) -> Result<SuiteResult> {
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let d = rng.random_range(2..=6);
        let i = rng.random_range(1..d);
        let j = rng.random_range(i + 1..=d);
        let k = rng.random_range(1..=d);
        let lambda = random_orbit_spectrum(d, k, rng);
        let v = lambda.values();
        if v[i - 1] - v[j - 1] <= 1e-9 {
            continue;
        }
        let n = packing_grassmann_dim(d, i, j)?;
        let p = ProjectionPoint::haar(n, i, rng);
        let q = ProjectionPoint::haar(n, i, rng);
        let hp = packing_map_phi(&p, &lambda, i, j)?.materialize();
        let hq = packing_map_phi(&q, &lambda, i, j)?.materialize();
        let big = HermitianMatrix::from_real_diagonal(v);
        let lower = (v[i - 1] - v[j - 1]) * p.distance(&q);
        let dist = hp.sub(&hq)?.frobenius_norm();
        let to_center = hp.sub(&big)?.frobenius_norm();
        let upper = 4.0 * lambda.top() * p.distance(&ProjectionPoint::coordinate(n, i));
        worst = worst.max(lower - dist).max(to_center - upper);
        if dist < lower - 1e-8 || to_center > upper + 1e-8 {
            violations += 1;
        }
    }
    Ok(SuiteResult::new("phi_map", cases, violations, worst, "max bound excess".into()))
}

/// `‖UΛU* − VΛV*‖² = 2⟨UΛU*, UΛU* − VΛV*⟩` to relative `1e-8`.
pub fn frobenius_identity_suite(cases: usize, rng: &mut OrbitRng) -> Result<SuiteResult> {
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        // d = 1 orbits are single points, where both sides are pure rounding.
        let d = rng.random_range(2..=8);
        let k = rng.random_range(1..=d);
        let lambda = random_orbit_spectrum(d, k, rng);
        let u = OrbitPoint::new(haar_unitary(d, rng), lambda.clone())?;
        let v = OrbitPoint::new(haar_unitary(d, rng), lambda)?;
        let (lhs, rhs) = frobenius_identity_check(&u, &v)?;
        let scale = lhs.abs().max(rhs.abs());
        let rel = if scale > 0.0 { (lhs - rhs).abs() / scale } else { 0.0 };
        worst = worst.max(rel);
        if rel > 1e-8 {
            violations += 1;
        }
    }
    Ok(SuiteResult::new("frobenius_identity", cases, violations, worst, "max relative error".into()))
}

/// `‖P − P′‖_F ≤ √(2 min(k, d − k)) + 1e-8` over Haar pairs in `G(d, k)`.
pub fn grassmann_diameter_suite(cases: usize, rng: &mut OrbitRng) -> Result<SuiteResult> {
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let d = rng.random_range(2..=8);
        let k = rng.random_range(1..d);
        let p = ProjectionPoint::haar(d, k, rng);
        let q = ProjectionPoint::haar(d, k, rng);
        let cap = (2.0 * k.min(d - k) as f64).sqrt();
        let dist = p.distance(&q);
        worst = worst.max(dist / cap);
        if dist > cap + 1e-8 {
            violations += 1;
        }
    }
    Ok(SuiteResult::new("grassmann_diameter", cases, violations, worst, "max distance / cap".into()))
}

/// `(top eigenvalues, d, i, j, ζ, ω)`.
type PackingCase = (&'static [f64], usize, usize, usize, f64, Option<f64>);

/// Builds packing certificates on a fixed menu of instances and re-verifies
/// each one independently.
pub fn packing_suite(budget: usize, rng: &mut OrbitRng) -> Result<SuiteResult> {
    let menu: [PackingCase; 4] = [
        (&[1.0], 2, 1, 2, 0.1, None),
        (&[3.0, 2.0, 1.0], 4, 1, 4, 0.5, Some(2.0)),
        (&[2.0, 1.0], 3, 1, 3, 0.3, None),
        (&[2.0, 2.0, 1.0], 5, 2, 5, 0.4, Some(1.5)),
    ];
    let mut violations = 0;
    let mut points = Vec::new();
    for (top, d, i, j, zeta, omega) in menu {
        let lambda = Spectrum::orbit_target(top, d)?;
        let cert = packing_lower_construct(&lambda, i, j, zeta, omega, rng, budget)?;
        points.push(cert.points.len());
        if verify_certificate(&cert).is_err() {
            violations += 1;
        }
    }
    Ok(SuiteResult::new("packing_certificates", 4, violations, 0.0, format!("points per certificate {points:?}")))
}

/// Greedy covering counts at `2ζ` and `ζ` are ordered.
pub fn covering_suite(seed: u64, budget: usize) -> Result<SuiteResult> {
    let menu: [(&[f64], usize, f64); 3] = [(&[1.0], 2, 0.25), (&[1.0], 3, 0.4), (&[2.0, 1.0], 3, 0.8)];
    let mut violations = 0;
    let mut counts = Vec::new();
    for (s, (top, d, zeta)) in menu.into_iter().enumerate() {
        let lambda = Spectrum::orbit_target(top, d)?;
        let (rep, _) = covering_sandwich(&lambda, zeta, crate::rng::derive_seed(seed, s as u64), budget)?;
        counts.push((rep.count_at_2zeta, rep.count_at_zeta));
        if !rep.ordered {
            violations += 1;
        }
    }
    Ok(SuiteResult::new("covering_sandwich", 3, violations, 0.0, format!("(count at 2 zeta, count at zeta) {counts:?}")))
}

/// `E|u₁|²` of the exact sampler at `d = 2`, `M = diag(2, 0)`, coefficient 1
/// against `(e² + 1) / (2(e² − 1))`.
pub fn exact_sampler_suite(samples: usize, tol: f64, rng: &mut OrbitRng) -> Result<SuiteResult> {
    let m = HermitianMatrix::from_real_diagonal(&[2.0, 0.0]);
    let mut acc = 0.0;
    for _ in 0..samples {
        acc += sample_rank1_exact(&m, 1.0, rng)?.u[0].norm_sqr();
    }
    let e2 = std::f64::consts::E.powi(2);
    let want = (e2 + 1.0) / (2.0 * (e2 - 1.0));
    let got = acc / samples as f64;
    let err = (got - want).abs();
    Ok(SuiteResult::new(
        "exact_sampler_mean",
        samples,
        usize::from(err > tol),
        err,
        format!("mean {got:.5} vs {want:.5}"),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

/// Reduced-size versions of every suite, each on its own stream of `seed`.
pub fn selftest(seed: u64) -> Result<SelftestReport> {
    let mut s = 0u64;
    let mut next = || {
        s += 1;
        derived_rng(seed, s)
    };
    let suites = vec![
        sensitivity_suite(1000, &mut next())?,
        eigen_stability_suite(300, &mut next())?,
        laplace_suite(20_000, 1.0, &mut next())?,
        sin_theta_suite(100, &mut next())?,
        alignment_suite(200, &mut next())?,
        phi_map_suite(100, &mut next())?,
        frobenius_identity_suite(200, &mut next())?,
        grassmann_diameter_suite(1000, &mut next())?,
        packing_suite(100, &mut next())?,
        covering_suite(seed, 50)?,
        exact_sampler_suite(20_000, 0.01, &mut next())?,
    ];
    let passed = suites.iter().all(|r| r.passed);
    Ok(SelftestReport { seed, suites, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn small_suites_pass() {
        let mut rng = rng_from_seed(1);
        assert!(sensitivity_suite(200, &mut rng).unwrap().passed);
        assert!(eigen_stability_suite(100, &mut rng).unwrap().passed);
        assert!(sin_theta_suite(50, &mut rng).unwrap().passed);
        assert!(alignment_suite(50, &mut rng).unwrap().passed);
        assert!(phi_map_suite(50, &mut rng).unwrap().passed);
        assert!(frobenius_identity_suite(50, &mut rng).unwrap().passed);
    }

    #[test]
    fn worst_case_swap_attains_lambda_1() {
        let mut rng = rng_from_seed(2);
        let r = sensitivity_suite(50, &mut rng).unwrap();
        assert!(r.worst > 0.999, "{}", r.worst);
    }
}
