//! Orbit and Grassmannian geometry: principal angles, sin-Θ checks, greedy
//! coverings, packing certificates and closed-form bound evaluators.

pub mod bounds;
pub mod covering;
pub mod packing;
pub mod projection;
pub mod sin_theta;

pub use bounds::{evaluate_bounds, explicit_tau, lower_bound_maximand, log_packing_lower_ball, log_packing_lower_orbit, BoundConstants, BoundReport};
pub use covering::{covering_construct_orbit, covering_extend, covering_sandwich, log_covering_upper, log_greedy_count_ceiling, CoveringSandwich};
pub use packing::{packing_lower_construct, verify_certificate, CertificateCheck, PackingCertificate};
pub use projection::{
    aligned_basis, aligned_basis_to, coordinate_frame, packing_grassmann_dim, packing_map_phi, packing_unitary, principal_angles,
    PrincipalAngles, ProjectionPoint,
};
pub use sin_theta::{sin_theta_check, two_sided_separation};
