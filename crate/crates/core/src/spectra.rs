//! Hermitian and unitary linear algebra: matrix types, eigendecomposition,
//! unitary orbits, Frobenius geometry and the neighbouring-dataset relation.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Inputs further than this from Hermitian (max-norm) are rejected.
pub const HERMITIAN_REJECT_TOL: f64 = 1e-8;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;
/// Allowed unitarity defect `‖UU* − I‖_F` for orbit points.
pub const UNITARY_TOL: f64 = 1e-10;

const NORM_SLACK: f64 = 1e-12;

/// Dense complex Hermitian matrix. Symmetrized on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

/// Largest entrywise deviation `|m_ij − conj(m_ji)|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(invalid("matrix dimension must be positive"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let dev = hermitian_deviation(&m);
        if dev > HERMITIAN_REJECT_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self::symmetrized(m))
    }

    /// Wraps `(m + m*)/2` without the rejection test. Used internally for
    /// products that are Hermitian up to round-off.
    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let adj = m.adjoint();
        Self { m: (m + adj).scale(0.5) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let m = CMatrix::from_fn(d, d, |i, j| if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) });
        Self { m }
    }

    pub fn identity(d: usize) -> Self {
        Self { m: CMatrix::identity(d, d) }
    }

    pub fn zeros(d: usize) -> Self {
        Self { m: CMatrix::zeros(d, d) }
    }

    /// `v v*`.
    pub fn rank_one(v: &CVector) -> Self {
        Self::symmetrized(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_inner(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Operator 2-norm, i.e. the largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    /// Eigenvalues in non-increasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.m.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("dimension is positive")
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= PSD_TOL
    }

    pub fn ensure_psd(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(())
    }

    /// `u · self · u*`.
    pub fn conjugate_by(&self, u: &CMatrix) -> HermitianMatrix {
        Self::symmetrized(u * &self.m * u.adjoint())
    }

    pub fn scale(&self, c: f64) -> HermitianMatrix {
        Self { m: self.m.map(|z| z * c) }
    }

    pub fn add(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self { m: &self.m + &other.m })
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self { m: &self.m - &other.m })
    }

    /// Real quadratic form `v* self v`.
    pub fn quadratic_form(&self, v: &CVector) -> f64 {
        (v.adjoint() * &self.m * v)[(0, 0)].re
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Real eigenvalue list. Orbit targets additionally carry a rank `k`: entries
/// past `k` are zero and all entries are non-negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumRepr")]
pub struct Spectrum {
    values: Vec<f64>,
    rank_k: usize,
}

#[derive(Deserialize)]
struct SpectrumRepr {
    values: Vec<f64>,
    rank_k: usize,
}

impl TryFrom<SpectrumRepr> for Spectrum {
    type Error = Error;

    fn try_from(r: SpectrumRepr) -> Result<Self> {
        let mut s = Spectrum::new(r.values)?;
        if r.rank_k == 0 || r.rank_k > s.values.len() {
            return Err(invalid(format!("rank_k {} out of range", r.rank_k)));
        }
        s.rank_k = r.rank_k;
        Ok(s)
    }
}

impl Spectrum {
    /// A non-increasing spectrum with `rank_k = len`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("spectrum must be non-empty"));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid("spectrum must be non-increasing"));
        }
        let rank_k = values.len();
        Ok(Self { values, rank_k })
    }

    /// Sorts `values` into non-increasing order first.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Self::new(values)
    }

    /// Orbit target `(top_1, …, top_k, 0, …, 0)` of length `dim`.
    pub fn orbit_target(top: &[f64], dim: usize) -> Result<Self> {
        if top.is_empty() || top.len() > dim {
            return Err(invalid(format!("need 1 <= k <= d, got k={} d={}", top.len(), dim)));
        }
        if top.iter().any(|x| *x < 0.0) {
            return Err(invalid("orbit eigenvalues must be non-negative"));
        }
        let mut values = top.to_vec();
        values.resize(dim, 0.0);
        let mut s = Self::new(values)?;
        s.rank_k = top.len();
        Ok(s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn rank_k(&self) -> usize {
        self.rank_k
    }

    /// Largest value (`λ₁`).
    pub fn top(&self) -> f64 {
        self.values[0]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|x| *x == 0.0)
    }

    /// Non-negative with zeros past `rank_k`.
    pub fn is_orbit_target(&self) -> bool {
        self.values.iter().all(|x| *x >= 0.0) && self.values[self.rank_k..].iter().all(|x| *x == 0.0)
    }

    pub fn diag_matrix(&self) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |i, j| if i == j { C64::new(self.values[i], 0.0) } else { C64::new(0.0, 0.0) })
    }
}

/// `‖UU* − I‖_F`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let d = u.nrows();
    let g = u * u.adjoint() - CMatrix::identity(d, d);
    g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Modified Gram–Schmidt on the columns of `u`, keeping each column's phase.
pub fn reorthonormalize(u: &mut CMatrix) {
    let n = u.ncols();
    for j in 0..n {
        for i in 0..j {
            let proj: C64 = u.column(i).dotc(&u.column(j));
            let ci = u.column(i).clone_owned();
            let mut cj = u.column_mut(j);
            cj -= ci * proj;
        }
        let norm = u.column(j).norm();
        u.column_mut(j).unscale_mut(norm);
    }
}

/// A point `U Λ U*` of the unitary orbit of `Λ = diag(spectrum)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitPoint {
    u: CMatrix,
    spectrum: Spectrum,
}

impl OrbitPoint {
    pub fn new(u: CMatrix, spectrum: Spectrum) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::DimensionMismatch { expected: u.nrows(), found: u.ncols() });
        }
        check_dims(spectrum.dim(), u.nrows())?;
        let defect = unitarity_defect(&u);
        if !(defect <= UNITARY_TOL) {
            return Err(invalid(format!("matrix is not unitary (defect {defect:.3e})")));
        }
        Ok(Self { u, spectrum })
    }

    /// The point `diag(spectrum)` itself.
    pub fn at_identity(spectrum: Spectrum) -> Self {
        let d = spectrum.dim();
        Self { u: CMatrix::identity(d, d), spectrum }
    }

    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// `U · diag(spectrum) · U*`.
    pub fn materialize(&self) -> HermitianMatrix {
        let scaled = CMatrix::from_fn(self.dim(), self.dim(), |i, j| self.u[(i, j)] * self.spectrum.values[j]);
        HermitianMatrix::symmetrized(scaled * self.u.adjoint())
    }
}

/// Finite collection of user vectors with `‖x_i‖₂ ≤ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    dim: usize,
    points: Vec<CVector>,
}

fn check_unit_ball(v: &CVector) -> Result<()> {
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = v.norm();
    if n > 1.0 + NORM_SLACK {
        return Err(Error::NormViolation(n));
    }
    Ok(())
}

impl Dataset {
    pub fn new(dim: usize, points: Vec<CVector>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dataset dimension must be positive"));
        }
        for p in &points {
            check_dims(dim, p.len())?;
            check_unit_ball(p)?;
        }
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[CVector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Σ x_i x_i*`.
    pub fn covariance(&self) -> HermitianMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for p in &self.points {
            acc += p * p.adjoint();
        }
        HermitianMatrix::symmetrized(acc)
    }

    /// Replaces point `index` with `replacement`.
    pub fn neighbor(&self, index: usize, replacement: CVector) -> Result<Dataset> {
        if index >= self.points.len() {
            return Err(invalid(format!("index {index} out of range for {} points", self.points.len())));
        }
        check_dims(self.dim, replacement.len())?;
        check_unit_ball(&replacement)?;
        let mut points = self.points.clone();
        points[index] = replacement;
        Ok(Dataset { dim: self.dim, points })
    }
}

/// Eigendecomposition `m = U diag(γ) U*` with `γ` non-increasing. Ties keep the
/// decomposition's own order; degenerate eigenvectors are not canonicalized.
pub fn eig_hermitian(m: &HermitianMatrix) -> Result<(Spectrum, CMatrix)> {
    if m.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let eig = SymmetricEigen::new(m.matrix().clone());
    let d = m.dim();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let u = CMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((Spectrum::new(values)?, u))
}

/// Full complex `Tr(a* b)`.
pub fn trace_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `Re Tr(a* b)`. For Hermitian inputs the imaginary part vanishes.
pub fn frobenius_inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let z = trace_inner(a.matrix(), b.matrix());
    debug_assert!(z.im.abs() <= 1e-10 * (1.0 + z.re.abs()), "imaginary part {}", z.im);
    Ok(z.re)
}

/// `Σ λ_i γ_i`, the maximum of `⟨M, H⟩` over the orbit of `diag(λ)` when `M`
/// has spectrum `γ`.
pub fn schur_horn_optimum(gamma: &Spectrum, lambda: &Spectrum) -> Result<f64> {
    check_dims(gamma.dim(), lambda.dim())?;
    Ok(gamma.values().iter().zip(lambda.values()).map(|(g, l)| g * l).sum())
}

/// The orbit point aligned with the eigenbasis of `m`.
pub fn optimal_orbit_point(m: &HermitianMatrix, lambda: &Spectrum) -> Result<OrbitPoint> {
    check_dims(m.dim(), lambda.dim())?;
    let (_, u) = eig_hermitian(m)?;
    Ok(OrbitPoint { u, spectrum: lambda.clone() })
}

/// Both sides of `‖UΛU* − VΛV*‖_F² = 2⟨UΛU*, UΛU* − VΛV*⟩`.
pub fn frobenius_identity_check(u: &OrbitPoint, v: &OrbitPoint) -> Result<(f64, f64)> {
    if u.spectrum() != v.spectrum() {
        return Err(invalid("orbit points carry different spectra"));
    }
    let a = u.materialize();
    let b = v.materialize();
    let diff = a.sub(&b)?;
    let lhs = diff.frobenius_norm().powi(2);
    let rhs = 2.0 * frobenius_inner(&a, &diff)?;
    Ok((lhs, rhs))
}
