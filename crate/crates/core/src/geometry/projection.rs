use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::sampler::haar::haar_unitary;
use crate::spectra::{eig_hermitian, CMatrix, HermitianMatrix, OrbitPoint, Spectrum, C64};

pub const IDEMPOTENT_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;

/// Rank-`i` orthogonal projection in `C^d`, stored with an orthonormal basis
/// of its range.
#[derive(Clone, Debug)]
pub struct ProjectionPoint {
    p: HermitianMatrix,
    rank: usize,
    basis: CMatrix,
}

fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// First `i` columns of the `n × n` identity.
pub fn coordinate_frame(n: usize, i: usize) -> CMatrix {
    CMatrix::from_fn(n, i, |r, c| if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// Last `m` columns of the `n × n` identity.
pub fn trailing_frame(n: usize, m: usize) -> CMatrix {
    CMatrix::from_fn(n, m, |r, c| if r == n - m + c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

impl ProjectionPoint {
    pub fn new(p: HermitianMatrix) -> Result<Self> {
        let sq = p.matrix() * p.matrix();
        let defect = frob(&(sq - p.matrix()));
        if defect > IDEMPOTENT_TOL {
            return Err(invalid(format!("matrix is not idempotent (defect {defect:.3e})")));
        }
        let tr = p.trace();
        let rank = tr.round();
        if (tr - rank).abs() > TRACE_TOL || rank < 0.0 {
            return Err(invalid(format!("projection trace {tr} is not an integer")));
        }
        let rank = rank as usize;
        let (_, u) = eig_hermitian(&p)?;
        let basis = u.columns(0, rank).into_owned();
        Ok(Self { p, rank, basis })
    }

    /// `Q Q*` for a matrix `Q` with orthonormal columns.
    pub fn from_basis(q: CMatrix) -> Result<Self> {
        let i = q.ncols();
        let gram = q.adjoint() * &q - CMatrix::identity(i, i);
        let defect = frob(&gram);
        if defect > IDEMPOTENT_TOL {
            return Err(invalid(format!("columns are not orthonormal (defect {defect:.3e})")));
        }
        let p = HermitianMatrix::symmetrized(&q * q.adjoint());
        Ok(Self { p, rank: i, basis: q })
    }

    /// `I_i`: the projection onto the first `i` coordinates of `C^d`.
    pub fn coordinate(d: usize, i: usize) -> Self {
        let basis = coordinate_frame(d, i);
        let diag: Vec<f64> = (0..d).map(|r| if r < i { 1.0 } else { 0.0 }).collect();
        Self { p: HermitianMatrix::from_real_diagonal(&diag), rank: i, basis }
    }

    /// Haar-random point of `G(d, i)`.
    pub fn haar<R: Rng + ?Sized>(d: usize, i: usize, rng: &mut R) -> Self {
        let u = haar_unitary(d, rng);
        Self::from_basis(u.columns(0, i).into_owned()).expect("Haar columns are orthonormal")
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.p
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// `I − p`.
    pub fn complement(&self) -> Self {
        let d = self.dim();
        let q = HermitianMatrix::symmetrized(CMatrix::identity(d, d) - self.p.matrix());
        let (_, u) = eig_hermitian(&q).expect("finite projection");
        let m = d - self.rank;
        Self { p: q, rank: m, basis: u.columns(0, m).into_owned() }
    }

    /// `‖self − other‖_F`.
    pub fn distance(&self, other: &ProjectionPoint) -> f64 {
        frob(&(self.p.matrix() - other.p.matrix()))
    }

    /// True when this is exactly the coordinate projection `I_i`.
    pub fn is_coordinate(&self) -> bool {
        let d = self.dim();
        (0..d).all(|r| {
            (0..d).all(|c| {
                let want = if r == c && r < self.rank { 1.0 } else { 0.0 };
                self.p.matrix()[(r, c)] == C64::new(want, 0.0)
            })
        })
    }
}

/// Principal angles `θ₁ ≤ … ≤ θ_i` and matching principal vectors.
#[derive(Clone, Debug)]
pub struct PrincipalAngles {
    pub angles: Vec<f64>,
    /// Principal vectors spanning the range of the first projection.
    pub u_basis: CMatrix,
    /// Principal vectors spanning the range of the second projection.
    pub v_basis: CMatrix,
}

/// SVD `a = Y Σ Z*` with singular values in non-increasing order.
fn sorted_svd(a: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let svd = a.clone().svd(true, true);
    let y = svd.u.expect("requested U");
    let z = svd.v_t.expect("requested V*").adjoint();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&p, &q| svd.singular_values[q].total_cmp(&svd.singular_values[p]));
    let s = order.iter().map(|&k| svd.singular_values[k]).collect();
    let y = CMatrix::from_fn(y.nrows(), order.len(), |r, c| y[(r, order[c])]);
    let z = CMatrix::from_fn(z.nrows(), order.len(), |r, c| z[(r, order[c])]);
    (y, s, z)
}

pub fn principal_angles(a: &ProjectionPoint, b: &ProjectionPoint) -> Result<PrincipalAngles> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    if a.rank() != b.rank() {
        return Err(invalid(format!("rank mismatch: {} vs {}", a.rank(), b.rank())));
    }
    if a.rank() == 0 {
        return Ok(PrincipalAngles { angles: vec![], u_basis: a.basis.clone(), v_basis: b.basis.clone() });
    }
    let cross = a.basis.adjoint() * &b.basis;
    let (y, s, z) = sorted_svd(&cross);
    let angles = s.iter().map(|x| x.clamp(-1.0, 1.0).acos()).collect();
    Ok(PrincipalAngles { angles, u_basis: &a.basis * y, v_basis: &b.basis * z })
}

/// Orthonormal basis `Ŵ` of `range(p)` closest to the frame `e` in Frobenius
/// norm: with `e* Q = Y Σ Z*`, `Ŵ = Q Z Y*`.
pub fn aligned_basis_to(p: &ProjectionPoint, e: &CMatrix) -> Result<CMatrix> {
    if e.nrows() != p.dim() || e.ncols() != p.rank() {
        return Err(Error::DimensionMismatch { expected: p.rank(), found: e.ncols() });
    }
    if p.rank() == 0 {
        return Ok(p.basis.clone());
    }
    let (y, _, z) = sorted_svd(&(e.adjoint() * &p.basis));
    Ok(&p.basis * z * y.adjoint())
}

/// [`aligned_basis_to`] against the first `i` coordinate vectors.
pub fn aligned_basis(p: &ProjectionPoint) -> CMatrix {
    if p.is_coordinate() {
        return coordinate_frame(p.dim(), p.rank());
    }
    aligned_basis_to(p, &coordinate_frame(p.dim(), p.rank())).expect("shapes agree")
}

fn aligned_complement(p: &ProjectionPoint) -> CMatrix {
    let n = p.dim();
    let m = n - p.rank();
    if p.is_coordinate() {
        return trailing_frame(n, m);
    }
    aligned_basis_to(&p.complement(), &trailing_frame(n, m)).expect("shapes agree")
}

/// Dimension `n = d − j + i + 1` of the Grassmannian feeding the packing map.
pub fn packing_grassmann_dim(d: usize, i: usize, j: usize) -> Result<usize> {
    if !(1 <= i && i < j && j <= d) {
        return Err(invalid(format!("need 1 <= i < j <= d, got i={i} j={j} d={d}")));
    }
    Ok(d - j + i + 1)
}

/// The `d × d` unitary `Ψ(p)` for `p ∈ G(n, i)`. Coordinates `1..i` and
/// `j..d` (1-based) carry `ψ(p) = [ψ₁ | ψ₂]`; the `j − i − 1` middle
/// coordinates are left fixed.
pub fn packing_unitary(p: &ProjectionPoint, d: usize, i: usize, j: usize) -> Result<CMatrix> {
    let n = packing_grassmann_dim(d, i, j)?;
    if p.dim() != n || p.rank() != i {
        return Err(invalid(format!("expected a rank-{i} projection in dimension {n}")));
    }
    let psi1 = aligned_basis(p);
    let psi2 = aligned_complement(p);
    let slot = |r: usize| if r < i { r } else { r - i + (j - 1) };
    let mut u = CMatrix::identity(d, d);
    for c in 0..n {
        let dst = slot(c);
        for r in 0..n {
            u[(slot(r), dst)] = if c < i { psi1[(r, c)] } else { psi2[(r, c - i)] };
        }
    }
    Ok(u)
}

/// `φ(p) = Ψ(p) Λ Ψ(p)*` as an orbit point of `diag(lambda)`.
pub fn packing_map_phi(p: &ProjectionPoint, lambda: &Spectrum, i: usize, j: usize) -> Result<OrbitPoint> {
    let u = packing_unitary(p, lambda.dim(), i, j)?;
    OrbitPoint::new(u, lambda.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::spectra::{unitarity_defect, CVector};

    fn line(v: &[C64]) -> ProjectionPoint {
        let q = CVector::from_vec(v.to_vec());
        let n = q.norm();
        ProjectionPoint::from_basis(CMatrix::from_column_slice(v.len(), 1, q.unscale(n).as_slice())).unwrap()
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn angles_examples() {
        let mut rng = rng_from_seed(1);
        let a = ProjectionPoint::haar(4, 2, &mut rng);
        assert!(principal_angles(&a, &a).unwrap().angles.iter().all(|t| t.abs() < 1e-7));

        let e1 = line(&[c(1.0), c(0.0)]);
        let e2 = line(&[c(0.0), c(1.0)]);
        let t = principal_angles(&e1, &e2).unwrap().angles[0];
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-12);

        let a = line(&[c(1.0), c(0.0), c(0.0)]);
        let b = line(&[c(1.0), c(1.0), c(0.0)]);
        let t = principal_angles(&a, &b).unwrap().angles[0];
        assert!((t - std::f64::consts::FRAC_PI_4).abs() < 1e-10);
    }

    #[test]
    fn rank_mismatch_is_an_error() {
        let a = ProjectionPoint::coordinate(3, 1);
        let b = ProjectionPoint::coordinate(3, 2);
        assert!(principal_angles(&a, &b).is_err());
    }

    #[test]
    fn new_rejects_non_projection() {
        assert!(ProjectionPoint::new(HermitianMatrix::from_real_diagonal(&[1.0, 0.5])).is_err());
        let p = ProjectionPoint::new(HermitianMatrix::from_real_diagonal(&[0.0, 1.0, 1.0])).unwrap();
        assert_eq!(p.rank(), 2);
    }

    #[test]
    fn aligned_basis_of_coordinate_projection_is_exact() {
        let p = ProjectionPoint::coordinate(4, 2);
        assert_eq!(aligned_basis(&p), coordinate_frame(4, 2));
    }

    #[test]
    fn aligned_basis_spans_projection() {
        let mut rng = rng_from_seed(2);
        let p = ProjectionPoint::haar(5, 2, &mut rng);
        let w = aligned_basis(&p);
        assert!(frob(&(&w * w.adjoint() - p.matrix().matrix())) < 1e-10);
        let gram = w.adjoint() * &w - CMatrix::identity(2, 2);
        assert!(frob(&gram) < 1e-12);
    }

    #[test]
    fn phi_of_coordinate_projection_is_lambda() {
        let l = Spectrum::orbit_target(&[3.0, 2.0, 1.0], 5).unwrap();
        let p = ProjectionPoint::coordinate(packing_grassmann_dim(5, 2, 4).unwrap(), 2);
        let h = packing_map_phi(&p, &l, 2, 4).unwrap();
        assert_eq!(h.materialize(), HermitianMatrix::from_real_diagonal(l.values()));
    }

    #[test]
    fn packing_unitary_is_unitary() {
        let mut rng = rng_from_seed(3);
        let p = ProjectionPoint::haar(4, 2, &mut rng);
        let u = packing_unitary(&p, 5, 2, 4).unwrap();
        assert!(unitarity_defect(&u) < 1e-11);
        assert!(packing_unitary(&p, 5, 3, 3).is_err());
    }
}
