use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::covering::log_covering_upper;
use crate::error::{invalid, Error, Result};
use crate::mechanisms::utility_tail_threshold;
use crate::spectra::{schur_horn_optimum, Spectrum};

/// Placeholders for the unspecified universal constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundConstants {
    /// Multiplies the lower-bound and packing expressions.
    pub c: f64,
    /// Multiplies the `Õ(·)` upper-bound expressions.
    pub big_c: f64,
    /// Separation `ζ` for the covering/packing pair.
    pub zeta: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self { c: 1.0, big_c: 1.0, zeta: 1.0 }
    }
}

pub const CONSTANTS_NOTE: &str = "universal constants c and C are unknown and set to the values listed; \
only upper_utility_bound (explicit tau) and tail_threshold are absolute, every other entry is an order-of-magnitude reference";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub d: usize,
    pub k: usize,
    pub epsilon: f64,
    pub beta: f64,
    /// `Σ γ_i λ_i`.
    pub optimum: f64,
    /// Explicit `τ = (2λ₁/ε) log(e + (2 + 8Γ)^(4dk)/β) + λ₁`, `Γ = Σγ`.
    pub upper_utility_bound: f64,
    /// `optimum − τ`.
    pub utility_lower_bound: f64,
    /// Smallest `t` at which the utility tail bound drops to `β`.
    pub tail_threshold: f64,
    pub rank_k_error_bound: f64,
    /// Error lower bound evaluated on `lambda`.
    pub lower_error_bound: f64,
    /// Same expression evaluated on `gamma`.
    pub lower_error_bound_gamma: f64,
    /// 1-based `i` attaining the lower-bound maximand on `lambda` (0 if none).
    pub lower_bound_maximizer: usize,
    pub log_covering_upper: f64,
    pub covering_upper: Option<f64>,
    /// Log packing lower bound at separation `2ζ`, clamped at 0.
    pub log_packing_lower: f64,
    pub packing_lower: Option<f64>,
    /// `log_packing_lower(2ζ) ≤ log_covering_upper(ζ)`.
    pub sandwich_consistent: bool,
    /// Prior iterative-eigenvector bound `d/ε₀² + Σ d λ_i/ε_i` with the budget
    /// split evenly over `d + 1` stages.
    pub prior_work_rank_k_error: f64,
    pub constants: BoundConstants,
    pub constants_note: String,
}

fn finite_exp(x: f64) -> Option<f64> {
    let v = x.exp();
    v.is_finite().then_some(v)
}

/// `ln(e^a + e^b)`.
fn log_add_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

/// `τ`, evaluated in log space so that `(2 + 8Γ)^(4dk)` never overflows.
pub fn explicit_tau(gamma_sum: f64, lambda_1: f64, d: usize, k: usize, epsilon: f64, beta: f64) -> f64 {
    if lambda_1 <= 0.0 {
        return 0.0;
    }
    let log_term = 4.0 * (d * k) as f64 * (2.0 + 8.0 * gamma_sum).ln() - beta.ln();
    2.0 * lambda_1 / epsilon * log_add_exp(1.0, log_term) + lambda_1
}

/// `max_{1 ≤ i ≤ d/2} i (v_i − v_{d−i+1})²` and its 1-based maximizer.
pub fn lower_bound_maximand(v: &[f64]) -> (f64, usize) {
    let d = v.len();
    let mut best = (0.0, 0);
    for i in 1..=d / 2 {
        let g = v[i - 1] - v[d - i];
        let val = i as f64 * g * g;
        if val > best.0 {
            best = (val, i);
        }
    }
    best
}

fn lower_error(v: &[f64], k: usize, epsilon: f64, c: f64) -> (f64, usize) {
    let d = v.len();
    let tail: f64 = v[k..].iter().map(|x| x * x).sum();
    let denom = (v[0] * epsilon.sqrt()).max((d as f64).sqrt()).powi(2);
    let (m, i) = lower_bound_maximand(v);
    (c * (tail + d as f64 / denom * m), i)
}

/// `max_{i<j} 2i(d−j+1) log(c · min(√i, √(d−j+1)) · (λ_i − λ_j) / s)`, never
/// below 0.
pub fn log_packing_lower_orbit(lambda: &Spectrum, separation: f64, c: f64) -> f64 {
    let v = lambda.values();
    let d = v.len();
    let mut best = 0.0f64;
    for i in 1..=d {
        for j in i + 1..=d {
            let gap = v[i - 1] - v[j - 1];
            if gap <= 0.0 {
                continue;
            }
            let tail = d - j + 1;
            let arg = c * (i.min(tail) as f64).sqrt() * gap / separation;
            best = best.max(2.0 * (i * tail) as f64 * arg.ln());
        }
    }
    best
}

/// Log packing lower bound inside `B(Λ, ω)`:
/// `max_{i<j} 2i(d−j+1) log(min(ω, λ₁√i, λ₁√(d−j+1)) (λ_i − λ_j) / (2 C λ₁ ζ))`,
/// never below 0.
pub fn log_packing_lower_ball(lambda: &Spectrum, zeta: f64, omega: f64, big_c: f64) -> f64 {
    let v = lambda.values();
    let d = v.len();
    let l1 = lambda.top();
    if l1 <= 0.0 {
        return 0.0;
    }
    let mut best = 0.0f64;
    for i in 1..=d {
        for j in i + 1..=d {
            let gap = v[i - 1] - v[j - 1];
            if gap <= 0.0 {
                continue;
            }
            let tail = d - j + 1;
            let r = omega.min(l1 * (i as f64).sqrt()).min(l1 * (tail as f64).sqrt());
            let arg = r * gap / (2.0 * big_c * l1 * zeta);
            best = best.max(2.0 * (i * tail) as f64 * arg.ln());
        }
    }
    best
}

/// Evaluates the upper, lower and covering/packing bound expressions for input
/// spectrum `gamma` and orbit spectrum `lambda` (both length `d`).
pub fn evaluate_bounds(
    gamma: &Spectrum,
    lambda: &Spectrum,
    d: usize,
    k: usize,
    epsilon: f64,
    beta: f64,
    constants: BoundConstants,
) -> Result<BoundReport> {
    if gamma.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: gamma.dim() });
    }
    if lambda.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: lambda.dim() });
    }
    if k == 0 || k > d {
        return Err(invalid(format!("need 1 <= k <= d, got k={k} d={d}")));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid(format!("beta must lie in (0, 1), got {beta}")));
    }
    let BoundConstants { c, big_c, zeta } = constants;
    if !(c > 0.0 && big_c > 0.0 && zeta > 0.0) {
        return Err(invalid("constants c, C and zeta must be positive"));
    }
    if gamma.values().iter().any(|x| *x < 0.0) || lambda.values().iter().any(|x| *x < 0.0) {
        return Err(invalid("spectra must be non-negative"));
    }

    let g = gamma.values();
    let l1 = lambda.top();
    let optimum = schur_horn_optimum(gamma, lambda)?;
    let tau = explicit_tau(gamma.sum(), l1, d, k, epsilon, beta);
    let tail_threshold = utility_tail_threshold(gamma, lambda, epsilon, beta)?;

    let tail_sq: f64 = g[k..].iter().map(|x| x * x).sum();
    let top_sum: f64 = g[..k].iter().sum();
    let log_factor = (std::f64::consts::E * k as f64 / beta).ln() + (std::f64::consts::E + top_sum).ln();
    let kf = k as f64;
    let rank_k_error_bound = tail_sq
        + big_c * (kf / (epsilon * epsilon) * log_factor * log_factor + (d as f64) * kf / epsilon * (g[0] + 1.0 / epsilon) * log_factor);

    let (lower_error_bound, lower_bound_maximizer) = lower_error(lambda.values(), k, epsilon, c);
    let (lower_error_bound_gamma, _) = lower_error(g, k, epsilon, c);

    let log_cov = log_covering_upper(&Spectrum::orbit_target(&lambda.values()[..k], d)?, zeta);
    let log_pack = log_packing_lower_orbit(lambda, 2.0 * zeta, c);

    let df = d as f64;
    let eps_i = epsilon / (df + 1.0);
    let prior = big_c * (df / (eps_i * eps_i) + g.iter().map(|x| df * x / eps_i).sum::<f64>());

    Ok(BoundReport {
        d,
        k,
        epsilon,
        beta,
        optimum,
        upper_utility_bound: tau,
        utility_lower_bound: optimum - tau,
        tail_threshold,
        rank_k_error_bound,
        lower_error_bound,
        lower_error_bound_gamma,
        lower_bound_maximizer,
        log_covering_upper: log_cov,
        covering_upper: finite_exp(log_cov),
        log_packing_lower: log_pack,
        packing_lower: finite_exp(log_pack),
        sandwich_consistent: log_pack <= log_cov,
        prior_work_rank_k_error: prior,
        constants,
        constants_note: CONSTANTS_NOTE.to_string(),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "overflow".to_string(), |x| format!("{x:.6e}"))
}

impl BoundReport {
    /// Aligned two-column text rendering.
    pub fn to_table(&self) -> String {
        let rows: Vec<(&str, String)> = vec![
            ("d", self.d.to_string()),
            ("k", self.k.to_string()),
            ("epsilon", format!("{}", self.epsilon)),
            ("beta", format!("{}", self.beta)),
            ("optimum", format!("{:.6}", self.optimum)),
            ("upper_utility_bound (tau)", format!("{:.6}", self.upper_utility_bound)),
            ("utility_lower_bound", format!("{:.6}", self.utility_lower_bound)),
            ("tail_threshold", format!("{:.6}", self.tail_threshold)),
            ("rank_k_error_bound", format!("{:.6}", self.rank_k_error_bound)),
            ("lower_error_bound", format!("{:.6}", self.lower_error_bound)),
            ("lower_error_bound_gamma", format!("{:.6}", self.lower_error_bound_gamma)),
            ("lower_bound_maximizer", self.lower_bound_maximizer.to_string()),
            ("log_covering_upper", format!("{:.6}", self.log_covering_upper)),
            ("covering_upper", opt(self.covering_upper)),
            ("log_packing_lower", format!("{:.6}", self.log_packing_lower)),
            ("packing_lower", opt(self.packing_lower)),
            ("sandwich_consistent", self.sandwich_consistent.to_string()),
            ("prior_work_rank_k_error", format!("{:.6}", self.prior_work_rank_k_error)),
            ("c", format!("{}", self.constants.c)),
            ("C", format!("{}", self.constants.big_c)),
            ("zeta", format!("{}", self.constants.zeta)),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        let _ = writeln!(out, "note: {}", self.constants_note);
        out
    }
}
