use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::haar::haar_unitary;
use super::{ChainDiagnostics, SamplerConfig};
use crate::error::{invalid, Error, Result};
use crate::rng::OrbitRng;
use crate::spectra::{reorthonormalize, CMatrix, HermitianMatrix, OrbitPoint, Spectrum, C64};
use crate::stats::split_rhat;

/// Steps between Gram–Schmidt passes and exact score refreshes.
pub const REORTH_INTERVAL: u64 = 256;
/// Number of chains run when diagnostics are on.
pub const DIAGNOSTIC_CHAINS: usize = 4;
/// Maximum stored length of a utility trace.
pub const TRACE_CAP: usize = 4096;
pub const RHAT_THRESHOLD: f64 = 1.1;
pub const TARGET_ACCEPTANCE: f64 = 0.35;

const MIN_STEP: f64 = 1e-3;

/// Metropolis chain on `U(d)` targeting `exp(coeff · Σ_j λ_j u_j* M u_j)`
/// against Haar measure. Moves rotate a pair of columns `(p, q)` with
/// `λ_p ≠ λ_q`; rotations inside an eigenspace of `Λ` would not move `H`.
pub struct OrbitChain {
    m: CMatrix,
    lambda: Vec<f64>,
    coeff: f64,
    u: CMatrix,
    // `m * u`, kept in sync with `u`.
    w: CMatrix,
    score: f64,
    pairs: Vec<(usize, usize)>,
    step_size: f64,
    steps: u64,
    accepted: u64,
}

impl OrbitChain {
    pub fn new(m: &HermitianMatrix, lambda: &Spectrum, coeff: f64, u0: CMatrix, step_size: f64) -> Result<Self> {
        let d = m.dim();
        if lambda.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: lambda.dim() });
        }
        if u0.nrows() != d || u0.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: u0.nrows() });
        }
        if !(coeff >= 0.0 && coeff.is_finite()) {
            return Err(invalid(format!("coefficient must be finite and >= 0, got {coeff}")));
        }
        if !(step_size > 0.0 && step_size <= std::f64::consts::PI) {
            return Err(invalid(format!("step_size must lie in (0, pi], got {step_size}")));
        }
        let lambda = lambda.values().to_vec();
        let mut pairs = Vec::new();
        for p in 0..d {
            for q in p + 1..d {
                if lambda[p] != lambda[q] {
                    pairs.push((p, q));
                }
            }
        }
        let m = m.matrix().clone();
        let w = &m * &u0;
        let mut chain = Self { m, lambda, coeff, u: u0, w, score: 0.0, pairs, step_size, steps: 0, accepted: 0 };
        chain.score = chain.exact_score();
        Ok(chain)
    }

    /// Starts from a Haar-random unitary.
    pub fn from_haar<R: Rng + ?Sized>(
        m: &HermitianMatrix,
        lambda: &Spectrum,
        coeff: f64,
        step_size: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let u0 = haar_unitary(m.dim(), rng);
        Self::new(m, lambda, coeff, u0, step_size)
    }

    fn exact_score(&self) -> f64 {
        let mut s = 0.0;
        for (j, l) in self.lambda.iter().enumerate() {
            if *l != 0.0 {
                s += l * self.u.column(j).dotc(&self.w.column(j)).re;
            }
        }
        s
    }

    /// `⟨M, U Λ U*⟩` at the current state.
    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    pub fn set_step_size(&mut self, s: f64) {
        self.step_size = s.clamp(MIN_STEP, std::f64::consts::PI);
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    /// True when no move can change `H` (all `λ_i` equal).
    pub fn is_frozen(&self) -> bool {
        self.pairs.is_empty()
    }

    /// One Metropolis step. Returns whether the proposal was accepted.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        self.steps += 1;
        if self.pairs.is_empty() {
            self.accepted += 1;
            return true;
        }
        let (p, q) = self.pairs[rng.random_range(0..self.pairs.len())];
        let theta = Normal::new(0.0, self.step_size).expect("positive step").sample(rng);
        let phi = rng.random::<f64>() * std::f64::consts::TAU;
        let (s, c) = theta.sin_cos();
        let e = C64::from_polar(1.0, phi);

        let a_pp = self.u.column(p).dotc(&self.w.column(p)).re;
        let a_qq = self.u.column(q).dotc(&self.w.column(q)).re;
        let a_pq = self.u.column(p).dotc(&self.w.column(q));
        let d_pp = s * s * (a_qq - a_pp) + 2.0 * c * s * (e * a_pq).re;
        let delta = (self.lambda[p] - self.lambda[q]) * d_pp;

        let log_alpha = self.coeff * delta;
        let accept = log_alpha >= 0.0 || rng.random::<f64>().ln() < log_alpha;
        if accept {
            rotate_columns(&mut self.u, p, q, c, s, e);
            rotate_columns(&mut self.w, p, q, c, s, e);
            self.score += delta;
            self.accepted += 1;
        }
        if self.steps.is_multiple_of(REORTH_INTERVAL) {
            self.refresh();
        }
        accept
    }

    /// Re-orthonormalizes `U` and recomputes `MU` and the score exactly.
    pub fn refresh(&mut self) {
        reorthonormalize(&mut self.u);
        self.w = &self.m * &self.u;
        self.score = self.exact_score();
    }

    /// Current state as an orbit point (after a refresh).
    pub fn orbit_point(&mut self, spectrum: &Spectrum) -> Result<OrbitPoint> {
        self.refresh();
        OrbitPoint::new(self.u.clone(), spectrum.clone())
    }
}

// U ← U G with G = [[c, −ē s], [e s, c]] acting on columns p, q.
fn rotate_columns(u: &mut CMatrix, p: usize, q: usize, c: f64, s: f64, e: C64) {
    for i in 0..u.nrows() {
        let up = u[(i, p)];
        let uq = u[(i, q)];
        u[(i, p)] = up * c + uq * (e * s);
        u[(i, q)] = uq * c - up * (e.conj() * s);
    }
}

struct ChainRun {
    point: OrbitPoint,
    acceptance_rate: f64,
    final_step_size: f64,
    trace: Vec<f64>,
}

fn run_chain<R: Rng + ?Sized>(
    m: &HermitianMatrix,
    lambda: &Spectrum,
    coeff: f64,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<ChainRun> {
    let mut chain = OrbitChain::from_haar(m, lambda, coeff, cfg.step_size, rng)?;
    let mut log_step = cfg.step_size.ln();
    for it in 0..cfg.burn_in {
        let acc = chain.step(rng);
        if cfg.adapt_step {
            let gain = 1.0 / ((it + 10) as f64).powf(0.6);
            log_step += gain * (if acc { 1.0 } else { 0.0 } - TARGET_ACCEPTANCE);
            chain.set_step_size(log_step.exp());
            log_step = chain.step_size().ln();
        }
    }
    let sampling = cfg.chain_length - cfg.burn_in;
    let before = chain.accepted();
    let mut trace = Vec::with_capacity(sampling);
    for _ in 0..sampling {
        chain.step(rng);
        trace.push(chain.score());
    }
    let acceptance_rate = (chain.accepted() - before) as f64 / sampling as f64;
    let point = chain.orbit_point(lambda)?;
    Ok(ChainRun { point, acceptance_rate, final_step_size: chain.step_size(), trace })
}

/// Every `stride`-th element so that at most `cap` remain.
pub fn downsample(trace: &[f64], cap: usize) -> Vec<f64> {
    if trace.len() <= cap {
        return trace.to_vec();
    }
    let stride = trace.len().div_ceil(cap);
    trace.iter().step_by(stride).copied().collect()
}

/// Runs the Metropolis sampler and returns the final state of chain 0.
///
/// With `diagnostics_on`, [`DIAGNOSTIC_CHAINS`] independent chains are run in
/// parallel from seeds drawn off `rng` and split-R̂ is computed on their
/// utility traces.
pub fn sample_orbit_mcmc(
    m: &HermitianMatrix,
    lambda: &Spectrum,
    coeff: f64,
    cfg: &SamplerConfig,
    rng: &mut OrbitRng,
) -> Result<(OrbitPoint, ChainDiagnostics)> {
    cfg.validate()?;
    if lambda.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: lambda.dim() });
    }
    if lambda.is_zero() {
        let diag = ChainDiagnostics {
            acceptance_rate: 1.0,
            utility_trace: Vec::new(),
            split_rhat: None,
            final_step_size: cfg.step_size,
            flags: vec!["zero_spectrum".into()],
        };
        return Ok((OrbitPoint::at_identity(lambda.clone()), diag));
    }

    let (run, rhat) = if cfg.diagnostics_on {
        let seeds: Vec<u64> = (0..DIAGNOSTIC_CHAINS).map(|_| rng.random()).collect();
        let runs = seeds
            .par_iter()
            .map(|s| run_chain(m, lambda, coeff, cfg, &mut OrbitRng::seed_from_u64(*s)))
            .collect::<Result<Vec<_>>>()?;
        let traces: Vec<Vec<f64>> = runs.iter().map(|r| r.trace.clone()).collect();
        let rhat = split_rhat(&traces);
        (runs.into_iter().next().expect("at least one chain"), Some(rhat))
    } else {
        (run_chain(m, lambda, coeff, cfg, rng)?, None)
    };

    let mut flags = Vec::new();
    if let Some(r) = rhat {
        if !(r <= RHAT_THRESHOLD) {
            flags.push(format!("convergence_warning: split_rhat {r:.4} > {RHAT_THRESHOLD}"));
        }
    }
    let frozen = lambda.values().windows(2).all(|w| w[0] == w[1]);
    if !frozen && !(0.1..=0.9).contains(&run.acceptance_rate) {
        flags.push(format!("acceptance_rate {:.3} outside [0.1, 0.9]", run.acceptance_rate));
    }
    let eigs = run.point.materialize().eigenvalues();
    let drift = eigs.iter().zip(lambda.values()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    if drift > 1e-8 * lambda.top().max(1.0) {
        flags.push(format!("spectrum drift {drift:.3e}"));
    }

    let diag = ChainDiagnostics {
        acceptance_rate: run.acceptance_rate,
        utility_trace: downsample(&run.trace, TRACE_CAP),
        split_rhat: rhat,
        final_step_size: run.final_step_size,
        flags,
    };
    Ok((run.point, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::spectra::frobenius_inner;

    #[test]
    fn incremental_score_tracks_exact() {
        let mut rng = rng_from_seed(3);
        let g = haar_unitary(5, &mut rng);
        let m = HermitianMatrix::from_real_diagonal(&[4.0, 3.0, 2.0, 1.0, 0.5]).conjugate_by(&g);
        let l = Spectrum::orbit_target(&[2.0, 1.0, 1.0], 5).unwrap();
        let mut chain = OrbitChain::from_haar(&m, &l, 1.5, 0.5, &mut rng).unwrap();
        for _ in 0..1000 {
            chain.step(&mut rng);
        }
        let incremental = chain.score();
        let p = chain.orbit_point(&l).unwrap();
        let exact = frobenius_inner(&m, &p.materialize()).unwrap();
        assert!((incremental - exact).abs() < 1e-9);
        assert!((chain.score() - exact).abs() < 1e-9);
    }

    #[test]
    fn zero_spectrum_short_circuits() {
        let mut rng = rng_from_seed(4);
        let m = HermitianMatrix::identity(3);
        let l = Spectrum::orbit_target(&[0.0], 3).unwrap();
        let (p, d) = sample_orbit_mcmc(&m, &l, 1.0, &SamplerConfig::default(), &mut rng).unwrap();
        assert_eq!(p.materialize(), HermitianMatrix::zeros(3));
        assert!(d.flags.iter().any(|f| f == "zero_spectrum"));
    }

    #[test]
    fn downsample_caps_length() {
        let t: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        let s = downsample(&t, TRACE_CAP);
        assert!(s.len() <= TRACE_CAP);
        assert_eq!(s[0], 0.0);
    }

    #[test]
    fn diagnostics_report_rhat() {
        let mut rng = rng_from_seed(5);
        let m = HermitianMatrix::from_real_diagonal(&[2.0, 1.0, 0.0]);
        let l = Spectrum::orbit_target(&[1.0], 3).unwrap();
        let cfg = SamplerConfig { diagnostics_on: true, ..SamplerConfig::default() };
        let (_, d) = sample_orbit_mcmc(&m, &l, 1.0, &cfg, &mut rng).unwrap();
        let r = d.split_rhat.unwrap();
        assert!((1.0 - 1e-6..1.1).contains(&r), "rhat {r}");
        assert!(d.utility_trace.len() <= TRACE_CAP);
    }
}
