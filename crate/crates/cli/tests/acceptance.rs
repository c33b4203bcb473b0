//! End-to-end acceptance checks. Each test prints one `criterion N: PASS|FAIL`
//! line before asserting.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use orbitdp_core::geometry::{packing_lower_construct, verify_certificate, PackingCertificate};
use orbitdp_core::harness::suites::{
    alignment_suite, eigen_stability_suite, exact_sampler_suite, frobenius_identity_suite, laplace_suite, phi_map_suite,
    sensitivity_suite, sin_theta_suite,
};
use orbitdp_core::harness::{audit_privacy, run_experiment, AuditSpec, ExperimentSpec, Scenario};
use orbitdp_core::sampler::diagnostics::tv_distance_marginals;
use orbitdp_core::sampler::{tilted_uniform_density, OrbitChain};
use orbitdp_core::stats::linear_regression;
use orbitdp_core::*;

fn report(n: u32, name: &str, pass: bool, detail: &str, elapsed: Duration, limit: Duration) {
    let in_time = elapsed <= limit;
    let ok = pass && in_time;
    println!(
        "criterion {n}: {} {name} ({detail}; {:.2}s of {}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(pass, "criterion {n} failed: {detail}");
    assert!(in_time, "criterion {n} exceeded its {}s budget", limit.as_secs());
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

#[test]
fn criterion_01_sensitivity() {
    let t0 = Instant::now();
    let r = sensitivity_suite(10_000, &mut derived_rng(101, 0)).unwrap();
    let detail = format!("{} cases, {} violations, max |Δ|/λ₁ {:.6}", r.cases, r.violations, r.worst);
    report(1, "sensitivity", r.passed, &detail, t0.elapsed(), secs(30));
}

#[test]
fn criterion_02_eigenvalue_stability() {
    let t0 = Instant::now();
    let r = eigen_stability_suite(1000, &mut derived_rng(102, 0)).unwrap();
    let detail = format!("{} cases, {} violations, worst {:.3e}", r.cases, r.violations, r.worst);
    report(2, "eigenvalue l1 stability", r.passed, &detail, t0.elapsed(), secs(10));
}

#[test]
fn criterion_03_exact_sampler() {
    let t0 = Instant::now();
    let r = exact_sampler_suite(100_000, 0.005, &mut derived_rng(103, 0)).unwrap();
    report(3, "exact sampler mean", r.passed, &r.detail, t0.elapsed(), secs(20));
}

#[test]
fn criterion_04_mcmc_vs_oracle() {
    let t0 = Instant::now();
    let m = HermitianMatrix::from_real_diagonal(&[1.0, 0.0]);
    let lambda = Spectrum::orbit_target(&[1.0], 2).unwrap();
    let cfg = SamplerConfig::default();
    let mut tvs = Vec::new();
    for (s, coeff) in [0.0, 1.0, 4.0].into_iter().enumerate() {
        let mut rng = derived_rng(104, s as u64);
        let mut chain = OrbitChain::from_haar(&m, &lambda, coeff, cfg.step_size, &mut rng).unwrap();
        for _ in 0..cfg.burn_in {
            chain.step(&mut rng);
        }
        let mut t = Vec::with_capacity(10_000);
        while t.len() < 10_000 {
            for _ in 0..100 {
                chain.step(&mut rng);
            }
            t.push(chain.u()[(0, 0)].norm_sqr());
        }
        tvs.push(tv_distance_marginals(&t, tilted_uniform_density(coeff), 20).unwrap());
    }
    let pass = tvs.iter().all(|x| *x < 0.05);
    let detail = format!("TV at coeff 0/1/4 = {:.4}/{:.4}/{:.4}, need < 0.05", tvs[0], tvs[1], tvs[2]);
    report(4, "mcmc vs oracle", pass, &detail, t0.elapsed(), secs(60));
}

#[test]
fn criterion_05_privacy_audit() {
    let t0 = Instant::now();
    let honest = audit_privacy(&AuditSpec { epsilon: 1.0, seed: 105, ..Default::default() }).unwrap();
    let mutant = audit_privacy(&AuditSpec { epsilon: 0.25, mutant: true, seed: 105, ..Default::default() }).unwrap();
    let failing = mutant.pairs.iter().filter(|p| !p.passed).count();
    let pass = honest.passed && !mutant.passed;
    let detail = format!(
        "honest max ratio {:.4} (lcr {:.4}) vs e^1 = {:.4}; mutant fails {failing}/{} pairs, max ratio {:.4} vs e^0.25 = {:.4}",
        honest.max_ratio,
        honest.max_lower_confidence_ratio,
        honest.bound,
        mutant.pairs.len(),
        mutant.max_ratio,
        mutant.bound
    );
    report(5, "privacy audit", pass, &detail, t0.elapsed(), secs(300));
}

#[test]
fn criterion_06_utility_tail() {
    let t0 = Instant::now();
    let projection = ExperimentSpec::new(Scenario::Projection, 4, 2, 1.0, 200, 106);
    let wishart = ExperimentSpec { wishart_m: Some(6), ..ExperimentSpec::new(Scenario::Wishart, 6, 3, 1.0, 200, 106) };
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, spec) in [("projection", projection), ("wishart", wishart)] {
        assert_eq!(spec.beta, 0.1);
        let r = run_experiment(&spec).unwrap();
        let q = r.quantiles.utility_gap_upper;
        let tau = r.bounds.upper_utility_bound;
        pass &= q <= tau;
        parts.push(format!("{name} 0.9-quantile {q:.4} <= tau {tau:.4}"));
    }
    report(6, "utility tail domination", pass, &parts.join(", "), t0.elapsed(), secs(600));
}

#[test]
fn criterion_07_laplace_calibration() {
    let t0 = Instant::now();
    let r = laplace_suite(100_000, 1.0, &mut derived_rng(107, 0)).unwrap();
    report(7, "laplace calibration", r.passed, &r.detail, t0.elapsed(), secs(20));
}

#[test]
fn criterion_08_geometry() {
    let t0 = Instant::now();
    let runs = [
        sin_theta_suite(500, &mut derived_rng(108, 0)).unwrap(),
        alignment_suite(1000, &mut derived_rng(108, 1)).unwrap(),
        phi_map_suite(500, &mut derived_rng(108, 2)).unwrap(),
        frobenius_identity_suite(1000, &mut derived_rng(108, 3)).unwrap(),
    ];
    let pass = runs.iter().all(|r| r.passed);
    let detail = runs.iter().map(|r| format!("{} {}/{}", r.name, r.violations, r.cases)).collect::<Vec<_>>().join(", ");
    report(8, "geometry suites", pass, &detail, t0.elapsed(), secs(120));
}

/// Rebuilds every point from its unitary and spectrum and checks separation
/// and containment directly.
fn independent_check(cert: &PackingCertificate) -> bool {
    let lambda = cert.lambda.values();
    let d = lambda.len();
    let build = |u: &CMatrix| {
        CMatrix::from_fn(d, d, |r, c| (0..d).map(|l| u[(r, l)] * u[(c, l)].conj() * C64::new(lambda[l], 0.0)).sum())
    };
    let mats: Vec<CMatrix> = cert.points.iter().map(|p| build(p.u())).collect();
    let centre = CMatrix::from_fn(d, d, |r, c| C64::new(if r == c { lambda[r] } else { 0.0 }, 0.0));
    let dist = |a: &CMatrix, b: &CMatrix| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    for (s, a) in mats.iter().enumerate() {
        if let Some(w) = cert.radius {
            if dist(a, &centre) > w {
                return false;
            }
        }
        if mats[..s].iter().any(|b| dist(a, b) < cert.target_separation) {
            return false;
        }
    }
    true
}

/// `(top eigenvalues, d, i, j, ζ, ω)`.
type PackingCase = (&'static [f64], usize, usize, usize, f64, Option<f64>);

#[test]
fn criterion_09_packing_certificates() {
    let t0 = Instant::now();
    let menu: [PackingCase; 6] = [
        (&[1.0], 2, 1, 2, 0.1, None),
        (&[3.0, 2.0, 1.0], 4, 1, 4, 0.5, Some(2.0)),
        (&[2.0, 1.0], 3, 1, 3, 0.3, None),
        (&[2.0, 2.0, 1.0], 5, 2, 5, 0.4, Some(1.5)),
        (&[3.0, 2.0, 2.0, 1.0], 6, 2, 5, 0.5, Some(2.5)),
        (&[1.0, 1.0, 1.0], 6, 3, 4, 0.6, None),
    ];
    let mut rng = derived_rng(109, 0);
    let mut pass = true;
    let mut counts = Vec::new();
    for (top, d, i, j, zeta, omega) in menu {
        let lambda = Spectrum::orbit_target(top, d).unwrap();
        let cert = packing_lower_construct(&lambda, i, j, zeta, omega, &mut rng, 200).unwrap();
        let ok = verify_certificate(&cert).map(|c| c.passed()).unwrap_or(false) && independent_check(&cert);
        pass &= ok;
        counts.push(cert.points.len());
    }
    let detail = format!("{} certificates, points {counts:?}", counts.len());
    report(9, "packing certificates", pass, &detail, t0.elapsed(), secs(120));
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_orbitdp")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn artifact(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let p = path.to_str().unwrap();
    let mut full = vec!["--quiet", "--out", p];
    full.extend_from_slice(args);
    run_cli(&full);
    std::fs::read(&path).unwrap()
}

#[test]
fn criterion_10_determinism() {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let m = harness::gen_wishart_instance(4, 4, &mut rng_from_seed(110)).unwrap();
    let input = dir.path().join("m.json");
    io::write_matrix(&input, &m).unwrap();
    let spec = dir.path().join("spec.json");
    let mut bench = ExperimentSpec::new(Scenario::Projection, 4, 2, 1.0, 20, 3);
    bench.sampler.chain_length = 4000;
    bench.sampler.burn_in = 1000;
    io::write_json(&spec, &bench).unwrap();
    let (m_path, spec_path) = (input.to_str().unwrap(), spec.to_str().unwrap());

    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("selftest", vec!["selftest"]),
        ("selftest_csv", vec!["--format", "csv", "selftest"]),
        ("bounds", vec!["bounds", "--gamma", "3,2,1,0", "--lambda", "3,2,1,0", "--k", "2", "--eps", "1", "--beta", "0.1"]),
        ("privatize", vec!["privatize", "--in", m_path, "--k", "2", "--eps", "1", "--seed", "7"]),
        ("sample_orbit", vec!["sample-orbit", "--in", m_path, "--lambda", "1,0.5", "--eps", "1", "--seed", "7"]),
        ("pack", vec!["pack", "--lambda", "2,1,0", "--i", "1", "--j", "3", "--zeta", "0.3"]),
        ("cover", vec!["cover", "--lambda", "1,0", "--zeta", "0.5"]),
        ("audit", vec!["audit", "--pairs", "2", "--runs", "5000", "--bins", "6", "--min-count", "100"]),
        ("bench", vec!["--format", "csv", "bench", "--spec", spec_path]),
    ];
    let mut diffs = Vec::new();
    for (name, args) in &cases {
        let a = artifact(dir.path(), &format!("{name}_a"), args);
        let b = artifact(dir.path(), &format!("{name}_b"), args);
        if a.is_empty() || a != b {
            diffs.push(*name);
        }
    }
    let stdout_same = run_cli(&["--quiet", "selftest"]) == run_cli(&["--quiet", "selftest"]);
    let pass = diffs.is_empty() && stdout_same;
    let detail = format!("{} commands run twice, differing: {diffs:?}", cases.len());
    report(10, "determinism", pass, &detail, t0.elapsed(), secs(60));
}

#[test]
fn criterion_11_epsilon_scaling() {
    let t0 = Instant::now();
    let eps = [0.5, 1.0, 2.0, 4.0];
    let medians: Vec<f64> = eps
        .iter()
        .map(|e| run_experiment(&ExperimentSpec::projection_benchmark(*e, 200, 111)).unwrap().quantiles.utility_gap_median)
        .collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
    let slope = linear_regression(&x, &y).slope;
    let pass = decreasing && (-2.0..=-0.5).contains(&slope);
    let detail = format!("medians {medians:.3?}, log-log slope {slope:.3}");
    report(11, "epsilon scaling", pass, &detail, t0.elapsed(), secs(600));
}
