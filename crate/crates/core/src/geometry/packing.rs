use rand::Rng;
use serde::{Deserialize, Serialize};

use super::projection::{coordinate_frame, packing_grassmann_dim, packing_map_phi, ProjectionPoint};
use crate::error::{invalid, Error, Result};
use crate::rng::OrbitRng;
use crate::sampler::haar::ginibre;
use crate::spectra::{unitarity_defect, CMatrix, OrbitPoint, Spectrum, UNITARY_TOL};

/// Relative slack demanded by the constructor on top of the checked bounds,
/// so that an independent recomputation never lands on the other side.
const MARGIN: f64 = 1e-9;

/// Construction stops once this many points are kept. Any separated subset
/// is still a valid certificate.
pub const MAX_PACKING_POINTS: usize = 1000;

/// Explicit `ζ`-packing of the orbit of `diag(lambda)` (Frobenius norm),
/// optionally inside the ball `B(Λ, ω)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PackingCertificate {
    pub lambda: Spectrum,
    pub i: usize,
    pub j: usize,
    pub target_separation: f64,
    /// `None` means the whole orbit.
    pub radius: Option<f64>,
    pub grassmann_dim: usize,
    pub grassmann_separation: f64,
    pub grassmann_radius: Option<f64>,
    pub center: OrbitPoint,
    pub points: Vec<OrbitPoint>,
    /// `None` for a single point.
    pub min_pairwise_dist: Option<f64>,
    pub max_center_dist: f64,
    pub proposals: usize,
    /// Set when the run stopped at [`MAX_PACKING_POINTS`].
    pub truncated: bool,
}

fn frob_dist(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Rank-`i` projection near `I_i`: range of `Î_i + σG` for Gaussian `G`.
fn local_proposal<R: Rng + ?Sized>(n: usize, i: usize, radius: f64, rng: &mut R) -> ProjectionPoint {
    let g = ginibre(n, i, rng);
    let spread = ((n - i) * i) as f64;
    let sigma = 1.5 * radius * rng.random::<f64>() / (2.0 * spread).sqrt();
    let m = coordinate_frame(n, i) + g * crate::spectra::C64::new(sigma, 0.0);
    let q = m.qr().q();
    ProjectionPoint::from_basis(q.columns(0, i).into_owned()).expect("QR columns are orthonormal")
}

/// Greedy packing through the map `φ`.
///
/// Points of `G(n, i)` with `n = d − j + i + 1` are proposed (Haar proposals
/// for the whole orbit, local ones inside `‖P − I_i‖_F < ω/(4λ₁)` otherwise)
/// and kept when they are `ζ/(λ_i − λ_j)`-separated from every kept point in
/// the Grassmannian and their images are `ζ`-separated (and within `ω` of
/// `Λ`) on the orbit. Whole-orbit runs start from `I_i`. The run ends
/// after `budget` consecutive rejections or at [`MAX_PACKING_POINTS`]
/// points. `i` and `j` are 1-based.
pub fn packing_lower_construct(
    lambda: &Spectrum,
    i: usize,
    j: usize,
    zeta: f64,
    omega: Option<f64>,
    rng: &mut OrbitRng,
    budget: usize,
) -> Result<PackingCertificate> {
    let d = lambda.dim();
    let n = packing_grassmann_dim(d, i, j)?;
    if !(zeta > 0.0) {
        return Err(invalid(format!("zeta must be positive, got {zeta}")));
    }
    if let Some(w) = omega {
        if !(w > 0.0) {
            return Err(invalid(format!("omega must be positive, got {w}")));
        }
    }
    if budget == 0 {
        return Err(invalid("budget must be positive"));
    }
    if !lambda.is_orbit_target() {
        return Err(invalid("orbit spectrum must be non-negative with zeros past rank_k"));
    }
    let gap = lambda.values()[i - 1] - lambda.values()[j - 1];
    if gap <= 0.0 {
        return Err(Error::DegenerateGap { i, j });
    }
    let zeta_g = zeta / gap;
    let radius_g = omega.map(|w| w / (4.0 * lambda.top()));

    let center = OrbitPoint::at_identity(lambda.clone());
    let center_m = center.materialize().into_inner();
    let start = ProjectionPoint::coordinate(n, i);
    // Inside a ball the separation equals the Grassmannian radius, so `I_i`
    // would exclude every other candidate; it only seeds whole-orbit runs.
    let mut grass = Vec::new();
    let mut points = Vec::new();
    let mut mats = Vec::new();
    if omega.is_none() {
        let h = packing_map_phi(&start, lambda, i, j)?;
        mats.push(h.materialize().into_inner());
        points.push(h);
        grass.push(start.clone());
    }
    let mut min_pair = f64::INFINITY;
    let mut max_center = 0.0f64;

    let mut rejections = 0;
    let mut proposals = 0;
    while rejections < budget && points.len() < MAX_PACKING_POINTS {
        proposals += 1;
        let p = match radius_g {
            Some(r) => local_proposal(n, i, r, rng),
            None => ProjectionPoint::haar(n, i, rng),
        };
        let keep = (|| {
            if let Some(r) = radius_g {
                if p.distance(&start) >= r {
                    return None;
                }
            }
            if grass.iter().any(|q| p.distance(q) < zeta_g) {
                return None;
            }
            let h = packing_map_phi(&p, lambda, i, j).ok()?;
            let hm = h.materialize().into_inner();
            let cd = frob_dist(&hm, &center_m);
            if let Some(w) = omega {
                if cd > w * (1.0 - MARGIN) {
                    return None;
                }
            }
            let mut nearest = f64::INFINITY;
            for m in &mats {
                nearest = nearest.min(frob_dist(&hm, m));
                if nearest < zeta * (1.0 + MARGIN) {
                    return None;
                }
            }
            Some((h, hm, cd, nearest))
        })();
        match keep {
            Some((h, hm, cd, nearest)) => {
                grass.push(p);
                points.push(h);
                mats.push(hm);
                min_pair = min_pair.min(nearest);
                max_center = max_center.max(cd);
                rejections = 0;
            }
            None => rejections += 1,
        }
    }

    let truncated = points.len() >= MAX_PACKING_POINTS;
    Ok(PackingCertificate {
        lambda: lambda.clone(),
        i,
        j,
        target_separation: zeta,
        radius: omega,
        grassmann_dim: n,
        grassmann_separation: zeta_g,
        grassmann_radius: radius_g,
        center,
        points,
        min_pairwise_dist: min_pair.is_finite().then_some(min_pair),
        max_center_dist: max_center,
        proposals,
        truncated,
    })
}

/// Outcome of [`verify_certificate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub points: usize,
    pub pairs_checked: usize,
    pub min_pairwise_dist: Option<f64>,
    pub max_center_dist: f64,
    pub separation_ok: bool,
    pub containment_ok: bool,
    pub spectrum_ok: bool,
}

impl CertificateCheck {
    pub fn passed(&self) -> bool {
        self.separation_ok && self.containment_ok && self.spectrum_ok
    }
}

// U diag(λ) U*, written out entry by entry.
fn rebuild(u: &CMatrix, lambda: &[f64]) -> CMatrix {
    let d = u.nrows();
    let mut h = CMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            let mut acc = crate::spectra::C64::new(0.0, 0.0);
            for (k, l) in lambda.iter().enumerate() {
                acc += u[(r, k)] * u[(c, k)].conj() * *l;
            }
            h[(r, c)] = acc;
        }
    }
    h
}

/// Independent re-verification of every claim in a certificate: unitarity
/// and spectrum of each point, all pairwise separations, and containment in
/// the ball when a radius is given. Fails with [`Error::Violation`].
pub fn verify_certificate(cert: &PackingCertificate) -> Result<CertificateCheck> {
    let lambda = cert.lambda.values();
    let spectrum_ok = cert.center.spectrum() == &cert.lambda
        && cert.points.iter().all(|p| p.spectrum() == &cert.lambda && unitarity_defect(p.u()) <= UNITARY_TOL);
    let mats: Vec<CMatrix> = cert.points.iter().map(|p| rebuild(p.u(), lambda)).collect();
    let center = rebuild(cert.center.u(), lambda);

    let mut pairs = 0;
    let mut min_pair = f64::INFINITY;
    for s in 0..mats.len() {
        for t in 0..s {
            pairs += 1;
            min_pair = min_pair.min(frob_dist(&mats[s], &mats[t]));
        }
    }
    let max_center = mats.iter().map(|m| frob_dist(m, &center)).fold(0.0, f64::max);
    let check = CertificateCheck {
        points: mats.len(),
        pairs_checked: pairs,
        min_pairwise_dist: min_pair.is_finite().then_some(min_pair),
        max_center_dist: max_center,
        separation_ok: mats.is_empty() || min_pair >= cert.target_separation,
        containment_ok: cert.radius.is_none_or(|r| max_center <= r),
        spectrum_ok,
    };
    if !check.passed() {
        return Err(Error::Violation(format!("packing certificate failed re-verification: {check:?}")));
    }
    Ok(check)
}
