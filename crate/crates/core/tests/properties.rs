use orbitdp_core::geometry::{
    aligned_basis, explicit_tau, packing_map_phi, principal_angles, verify_certificate, packing_lower_construct,
    ProjectionPoint,
};
use orbitdp_core::harness::suites::random_orbit_spectrum;
use orbitdp_core::sampler::haar_unit_vector;
use orbitdp_core::*;
use proptest::prelude::*;

fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn haar_is_unitary(d in 1usize..=8, seed in any::<u64>()) {
        let u = haar_unitary(d, &mut rng_from_seed(seed));
        prop_assert!(spectra::unitarity_defect(&u) < 1e-10);
    }

    #[test]
    fn derived_streams_are_reproducible(base in any::<u64>(), i in any::<u64>()) {
        prop_assert_eq!(derive_seed(base, i), derive_seed(base, i));
        if i != u64::MAX {
            prop_assert_ne!(derive_seed(base, i), derive_seed(base, i + 1));
        }
    }

    #[test]
    fn orbit_points_keep_their_spectrum(d in 1usize..=6, k in 1usize..=4, seed in any::<u64>()) {
        let k = k.min(d);
        let mut rng = rng_from_seed(seed);
        let lambda = random_orbit_spectrum(d, k, &mut rng);
        let h = OrbitPoint::new(haar_unitary(d, &mut rng), lambda.clone()).unwrap().materialize();
        for (a, b) in h.eigenvalues().iter().zip(lambda.values()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn orbit_score_bounded_by_schur_horn(d in 1usize..=6, k in 1usize..=4, seed in any::<u64>()) {
        let k = k.min(d);
        let mut rng = rng_from_seed(seed);
        let g = sampler::haar::ginibre(d, d, &mut rng);
        let m = HermitianMatrix::new(&g * g.adjoint()).unwrap();
        let lambda = random_orbit_spectrum(d, k, &mut rng);
        let (gamma, _) = eig_hermitian(&m).unwrap();
        let opt = schur_horn_optimum(&gamma, &lambda).unwrap();
        let h = OrbitPoint::new(haar_unitary(d, &mut rng), lambda).unwrap().materialize();
        prop_assert!(frobenius_inner(&m, &h).unwrap() <= opt + 1e-9 * (1.0 + opt));
    }

    #[test]
    fn neighbour_score_change_at_most_lambda1(d in 1usize..=8, k in 1usize..=4, seed in any::<u64>()) {
        let k = k.min(d);
        let mut rng = rng_from_seed(seed);
        let lambda = random_orbit_spectrum(d, k, &mut rng);
        let h = OrbitPoint::new(haar_unitary(d, &mut rng), lambda.clone()).unwrap().materialize();
        let pts: Vec<CVector> = (0..3).map(|_| haar_unit_vector(d, &mut rng)).collect();
        let ds = Dataset::new(d, pts).unwrap();
        let nb = ds.neighbor(0, haar_unit_vector(d, &mut rng)).unwrap();
        let delta = frobenius_inner(&ds.covariance(), &h).unwrap() - frobenius_inner(&nb.covariance(), &h).unwrap();
        prop_assert!(delta.abs() <= sensitivity_bound(&lambda) + 1e-9);
    }

    #[test]
    fn rank_one_removal_is_l1_stable(d in 1usize..=8, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let v = haar_unit_vector(d, &mut rng);
        let g = sampler::haar::ginibre(d, d, &mut rng);
        let a = HermitianMatrix::new(&g * g.adjoint()).unwrap();
        let m = a.add(&HermitianMatrix::rank_one(&v)).unwrap();
        let (em, ea) = (m.eigenvalues(), a.eigenvalues());
        let total: f64 = em.iter().zip(&ea).map(|(x, y)| x - y).sum();
        prop_assert!((total - v.norm_squared()).abs() < 1e-8 * (1.0 + m.trace()));
        for (x, y) in em.iter().zip(&ea) {
            prop_assert!(x + 1e-9 >= *y);
        }
    }

    #[test]
    fn sort_clip_output_is_valid(noisy in prop::collection::vec(-10.0f64..10.0, 1..8), k in 1usize..8) {
        let k = k.min(noisy.len());
        let s = sort_clip_eigenvalues(&noisy, k).unwrap();
        prop_assert_eq!(s.dim(), noisy.len());
        prop_assert!(s.values().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.values().iter().all(|x| *x >= 0.0));
        prop_assert!(s.values()[k..].iter().all(|x| *x == 0.0));
    }

    #[test]
    fn tail_bound_decreases(t in 0.1f64..100.0, eps in 0.05f64..5.0) {
        let g = Spectrum::new(vec![2.0, 1.0, 0.0]).unwrap();
        let l = Spectrum::new(vec![1.0, 0.0, 0.0]).unwrap();
        let a = utility_tail_bound(&g, &l, eps, t).unwrap();
        let b = utility_tail_bound(&g, &l, eps, t * 1.5).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn tau_exceeds_lambda1(l1 in 0.01f64..50.0, extra in 0.0f64..50.0, d in 1usize..10, eps in 0.01f64..4.0, beta in 0.001f64..0.99) {
        let tau = explicit_tau(l1 + extra, l1, d, 1, eps, beta);
        prop_assert!(tau.is_finite() && tau > l1);
        prop_assert!(explicit_tau(l1 + extra, l1, d, 1, 2.0 * eps, beta) < tau);
    }

    #[test]
    fn principal_angles_in_range(d in 2usize..=8, i in 1usize..=4, seed in any::<u64>()) {
        let i = i.min(d - 1);
        let mut rng = rng_from_seed(seed);
        let a = ProjectionPoint::haar(d, i, &mut rng);
        let b = ProjectionPoint::haar(d, i, &mut rng);
        let pa = principal_angles(&a, &b).unwrap();
        prop_assert!(pa.angles.iter().all(|t| (0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(t)));
        prop_assert!(pa.angles.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let s: f64 = pa.angles.iter().map(|t| t.sin().powi(2)).sum();
        prop_assert!((a.distance(&b) - (2.0 * s).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn aligned_basis_within_projection_distance(d in 2usize..=8, i in 1usize..=4, seed in any::<u64>()) {
        let i = i.min(d - 1);
        let p = ProjectionPoint::haar(d, i, &mut rng_from_seed(seed));
        let w = aligned_basis(&p);
        let e = geometry::coordinate_frame(d, i);
        prop_assert!(frob(&(w - e)) <= p.distance(&ProjectionPoint::coordinate(d, i)) + 1e-9);
    }

    #[test]
    fn phi_map_is_bi_lipschitz(i in 1usize..=2, gap in 1usize..=3, extra in 0usize..=2, seed in any::<u64>()) {
        let j = i + gap;
        let d = j + extra;
        let mut rng = rng_from_seed(seed);
        let lambda = random_orbit_spectrum(d, d, &mut rng);
        let n = geometry::packing_grassmann_dim(d, i, j).unwrap();
        let v = lambda.values();
        let (li, lj) = (v[i - 1], v[j - 1]);
        let p = ProjectionPoint::haar(n, i, &mut rng);
        let q = ProjectionPoint::haar(n, i, &mut rng);
        let hp = packing_map_phi(&p, &lambda, i, j).unwrap().materialize();
        let hq = packing_map_phi(&q, &lambda, i, j).unwrap().materialize();
        let dist = hp.sub(&hq).unwrap().frobenius_norm();
        prop_assert!(dist + 1e-9 >= (li - lj) * p.distance(&q));
        let centre = HermitianMatrix::from_real_diagonal(v);
        let to_centre = hp.sub(&centre).unwrap().frobenius_norm();
        prop_assert!(to_centre <= 4.0 * lambda.top() * p.distance(&ProjectionPoint::coordinate(n, i)) + 1e-9);
    }

    #[test]
    fn frobenius_identity_holds(d in 2usize..=8, k in 1usize..=4, seed in any::<u64>()) {
        let k = k.min(d);
        let mut rng = rng_from_seed(seed);
        let lambda = random_orbit_spectrum(d, k, &mut rng);
        let a = OrbitPoint::new(haar_unitary(d, &mut rng), lambda.clone()).unwrap();
        let b = OrbitPoint::new(haar_unitary(d, &mut rng), lambda).unwrap();
        let (lhs, rhs) = frobenius_identity_check(&a, &b).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * lhs.max(1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn packing_certificates_verify(zeta in 0.2f64..1.0, seed in any::<u64>(), ball in any::<bool>()) {
        let lambda = Spectrum::new(vec![2.0, 1.0, 0.0]).unwrap();
        let omega = if ball { Some(4.0 * zeta) } else { None };
        let cert = packing_lower_construct(&lambda, 1, 3, zeta, omega, &mut rng_from_seed(seed), 60).unwrap();
        let check = verify_certificate(&cert).unwrap();
        prop_assert!(check.passed());
        prop_assert_eq!(check.points, cert.points.len());
    }

    #[test]
    fn algorithm1_stays_on_orbit(seed in any::<u64>(), eps in 0.1f64..4.0) {
        let mut rng = rng_from_seed(seed);
        let m = harness::gen_projection_instance(3, 1, 2.0, &mut rng).unwrap();
        let lambda = Spectrum::new(vec![1.0, 0.5, 0.0]).unwrap();
        let cfg = SamplerConfig { chain_length: 2000, burn_in: 500, ..Default::default() };
        let t = algorithm1(&m, &lambda, eps, &cfg, seed).unwrap();
        let ev = t.output.materialize().eigenvalues();
        for (a, b) in ev.iter().zip(lambda.values()) {
            prop_assert!((a - b).abs() < 1e-8);
        }
        prop_assert!(t.utility_gap >= -1e-9);
        prop_assert!(t.utility <= t.optimum + 1e-9);
    }
}
