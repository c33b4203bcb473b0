use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::mechanisms::{exponential_release, ExponentialTarget};
use crate::rng::{derive_seed, derived_rng};
use crate::sampler::SamplerConfig;
use crate::spectra::{HermitianMatrix, Spectrum, C64};

/// Two-sided 95% normal quantile for the binomial half-widths.
const Z95: f64 = 1.96;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditSpec {
    pub epsilon: f64,
    /// How many of the shipped adversarial pairs to audit.
    pub pairs: usize,
    pub runs_per_pair: usize,
    pub bins: usize,
    /// Bins where either side has fewer hits are excluded.
    pub min_count: u64,
    /// Swap in the broken coefficient `ε/λ₁` (instead of `ε/(4λ₁)`).
    pub mutant: bool,
    pub seed: u64,
}

impl Default for AuditSpec {
    fn default() -> Self {
        Self { epsilon: 1.0, pairs: 10, runs_per_pair: 100_000, bins: 24, min_count: 200, mutant: false, seed: 0 }
    }
}

/// Neighbouring inputs `M` and `M′ = M − e₁e₁* + e₂e₂*` (one data point
/// swapped) with `M = a e₁e₁* + b e₂e₂*`.
fn diagonal_pair(a: f64, b: f64) -> (HermitianMatrix, HermitianMatrix) {
    (HermitianMatrix::from_real_diagonal(&[a, b]), HermitianMatrix::from_real_diagonal(&[a - 1.0, b + 1.0]))
}

/// The shipped adversarial pairs for `Λ = diag(1, 0)`: nine diagonal pairs
/// with slopes `a − b ∈ {1, 0, −1, −2, −4, …, −12}` and one pair whose swap
/// is along a rotated basis.
pub fn adversarial_pairs() -> Vec<(HermitianMatrix, HermitianMatrix)> {
    let mut out: Vec<_> = [1.0, 0.0, -1.0, -2.0, -4.0, -6.0, -8.0, -10.0, -12.0]
        .iter()
        .map(|s| diagonal_pair(1.0, 1.0 - s))
        .collect();
    let (c, s) = (0.6f64, 0.8f64);
    let x = crate::spectra::CVector::from_vec(vec![C64::new(c, 0.0), C64::new(0.0, s)]);
    let y = crate::spectra::CVector::from_vec(vec![C64::new(0.0, s), C64::new(c, 0.0)]);
    let base = HermitianMatrix::rank_one(&y).scale(2.0);
    let m = base.add(&HermitianMatrix::rank_one(&x)).expect("same dim");
    let m2 = base.add(&HermitianMatrix::rank_one(&y)).expect("same dim");
    out.push((m, m2));
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinAudit {
    pub bin: usize,
    pub count_m: u64,
    pub count_m_prime: u64,
    /// `max(c/c′, c′/c)`.
    pub ratio: f64,
    pub half_width: f64,
    pub threshold: f64,
    /// `exp(ln ratio − 3 √(1/c + 1/c′))`.
    pub lower_confidence_ratio: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairAudit {
    pub pair: usize,
    pub bins: Vec<BinAudit>,
    pub excluded_bins: Vec<usize>,
    pub max_ratio: f64,
    pub max_lower_confidence_ratio: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub spec: AuditSpec,
    pub bound: f64,
    pub pairs: Vec<PairAudit>,
    pub max_ratio: f64,
    pub max_lower_confidence_ratio: f64,
    pub excluded_bins: usize,
    pub passed: bool,
}

fn orbit_lambda() -> Spectrum {
    Spectrum::orbit_target(&[1.0], 2).expect("valid")
}

fn release_counts(m: &HermitianMatrix, spec: &AuditSpec, stream: u64) -> Result<Vec<u64>> {
    let lambda = orbit_lambda();
    let target = if spec.mutant {
        ExponentialTarget::with_coeff(m.clone(), lambda.clone(), spec.epsilon / lambda.top())?
    } else {
        ExponentialTarget::new(m.clone(), lambda, spec.epsilon)?
    };
    let cfg = SamplerConfig::default();
    let mut rng = derived_rng(spec.seed, stream);
    let mut counts = vec![0u64; spec.bins];
    for _ in 0..spec.runs_per_pair {
        let s = exponential_release(&target, &cfg, &mut rng)?;
        let t = s.point.u()[(0, 0)].norm_sqr();
        let b = ((t * spec.bins as f64) as usize).min(spec.bins - 1);
        counts[b] += 1;
    }
    Ok(counts)
}

fn half_width(count: u64, n: usize) -> f64 {
    let p = count as f64 / n as f64;
    Z95 * (p * (1.0 - p) / n as f64).sqrt()
}

fn audit_bins(pair: usize, cm: &[u64], cp: &[u64], spec: &AuditSpec) -> PairAudit {
    let bound = spec.epsilon.exp();
    let mut bins = Vec::new();
    let mut excluded = Vec::new();
    for b in 0..spec.bins {
        let (x, y) = (cm[b], cp[b]);
        if x < spec.min_count || y < spec.min_count {
            excluded.push(b);
            continue;
        }
        let ratio = (x as f64 / y as f64).max(y as f64 / x as f64);
        let hw = half_width(x, spec.runs_per_pair).max(half_width(y, spec.runs_per_pair));
        let threshold = bound * (1.0 + 4.0 * hw);
        let lcr = (ratio.ln() - 3.0 * (1.0 / x as f64 + 1.0 / y as f64).sqrt()).exp();
        bins.push(BinAudit {
            bin: b,
            count_m: x,
            count_m_prime: y,
            ratio,
            half_width: hw,
            threshold,
            lower_confidence_ratio: lcr,
            passed: ratio <= threshold,
        });
    }
    let max_ratio = bins.iter().map(|b| b.ratio).fold(0.0, f64::max);
    let max_lcr = bins.iter().map(|b| b.lower_confidence_ratio).fold(0.0, f64::max);
    let passed = bins.iter().all(|b| b.passed);
    PairAudit { pair, bins, excluded_bins: excluded, max_ratio, max_lower_confidence_ratio: max_lcr, passed }
}

/// Discretised likelihood-ratio audit at `d = 2`, `Λ = diag(1, 0)` over the
/// given neighbour pairs. The output `t = |u₁₁|²` is binned into `bins`
/// equal-width bins, which are equal-measure under Haar. A bin passes when
/// `max(c/c′, c′/c) ≤ e^ε (1 + 4·hw)` with `hw` the larger 95% binomial
/// half-width of the two bin frequencies.
pub fn audit_pairs(spec: &AuditSpec, pairs: &[(HermitianMatrix, HermitianMatrix)]) -> Result<AuditReport> {
    if !(spec.epsilon > 0.0) || !spec.epsilon.is_finite() {
        return Err(invalid(format!("epsilon must be positive, got {}", spec.epsilon)));
    }
    if spec.bins == 0 || spec.runs_per_pair == 0 {
        return Err(invalid("bins and runs_per_pair must be positive"));
    }
    for (m, mp) in pairs {
        if m.dim() != 2 || mp.dim() != 2 {
            return Err(invalid("the audit is defined for d = 2 only"));
        }
        m.ensure_psd()?;
        mp.ensure_psd()?;
    }
    let jobs: Vec<(usize, usize)> = (0..pairs.len()).flat_map(|p| [(p, 0), (p, 1)]).collect();
    let counts = jobs
        .par_iter()
        .map(|&(p, side)| {
            let m = if side == 0 { &pairs[p].0 } else { &pairs[p].1 };
            release_counts(m, spec, derive_seed(p as u64, side as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<PairAudit> = (0..pairs.len()).map(|p| audit_bins(p, &counts[2 * p], &counts[2 * p + 1], spec)).collect();
    Ok(AuditReport {
        spec: spec.clone(),
        bound: spec.epsilon.exp(),
        max_ratio: reports.iter().map(|r| r.max_ratio).fold(0.0, f64::max),
        max_lower_confidence_ratio: reports.iter().map(|r| r.max_lower_confidence_ratio).fold(0.0, f64::max),
        excluded_bins: reports.iter().map(|r| r.excluded_bins.len()).sum(),
        passed: reports.iter().all(|r| r.passed),
        pairs: reports,
    })
}

/// [`audit_pairs`] on the first `spec.pairs` shipped adversarial pairs.
pub fn audit_privacy(spec: &AuditSpec) -> Result<AuditReport> {
    let all = adversarial_pairs();
    if spec.pairs == 0 || spec.pairs > all.len() {
        return Err(invalid(format!("pairs must lie in 1..={}, got {}", all.len(), spec.pairs)));
    }
    audit_pairs(spec, &all[..spec.pairs])
}
