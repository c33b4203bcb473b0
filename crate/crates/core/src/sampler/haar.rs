use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::spectra::{CMatrix, CVector, C64};

/// Standard complex Gaussian: real and imaginary parts each `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows × cols` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    // Column-major fill order so the stream layout is stable.
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// Haar-distributed `d × d` unitary: QR of a Ginibre matrix with the phases
/// of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    assert!(d >= 1, "dimension must be positive");
    let qr = ginibre(d, d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        let phase = if n > 0.0 { rjj / n } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Uniform unit vector on the complex sphere in `C^d`.
pub fn haar_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_iterator(d, (0..d).map(|_| complex_gaussian(rng)));
        let n = v.norm();
        if n > 1e-300 {
            return v.unscale(n);
        }
    }
}

/// A unitary whose first column is the unit vector `u` (a scaled
/// Householder reflection).
pub fn complete_to_unitary(u: &CVector) -> CMatrix {
    let d = u.len();
    let u1 = u[0];
    let a1 = u1.norm();
    let alpha = if a1 > 0.0 { u1 / a1 } else { C64::new(1.0, 0.0) };
    let mut v = u.clone();
    v[0] -= alpha;
    let vv = v.norm_squared();
    let mut h = CMatrix::identity(d, d);
    if vv > 1e-28 {
        h -= (&v * v.adjoint()) * C64::new(2.0 / vv, 0.0);
    }
    h * alpha
}
