//! Differentially private optimization over unitary orbits of Hermitian
//! matrices.
//!
//! The crate is split the same way the workflow is:
//!
//! * [`spectra`]: Hermitian matrices, spectra, orbit points and datasets.
//! * [`mechanisms`]: Laplace eigenvalue release and the two orbit mechanisms.
//! * [`sampler`]: Haar, exact rank-1 and Metropolis samplers on orbits.
//! * [`geometry`]: principal angles, alignment, covering/packing and bound formulas.
//! * [`harness`]: instance generators, experiments, privacy audit and self-test.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod mechanisms;
pub mod rng;
pub mod sampler;
pub mod spectra;
pub mod stats;

pub use error::{Error, Result};
pub use mechanisms::{
    algorithm1, algorithm2, laplace_noise, privatize_eigenvalues, sensitivity_bound, sort_clip_eigenvalues,
    utility_tail_bound, ExponentialTarget, MechanismInput, MechanismTranscript, PrivacyBudget,
};
pub use rng::{derive_seed, derived_rng, rng_from_seed, OrbitRng};
pub use sampler::{haar_unitary, sample_orbit_mcmc, sample_rank1_exact, ChainDiagnostics, SamplerConfig};
pub use spectra::{
    eig_hermitian, frobenius_identity_check, frobenius_inner, optimal_orbit_point, schur_horn_optimum, CMatrix,
    CVector, Dataset, HermitianMatrix, OrbitPoint, Spectrum, C64,
};
