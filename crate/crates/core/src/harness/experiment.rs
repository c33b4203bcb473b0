use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::instances::{gen_conditioned_gap_instance, gen_projection_instance, gen_wishart_instance_with, WishartNorm};
use crate::error::{invalid, Result};
use crate::geometry::{evaluate_bounds, BoundConstants, BoundReport};
use crate::io::{read_matrix_or_dataset, MatrixOrDataset};
use crate::mechanisms::{algorithm1, algorithm2, Mechanism, MechanismTranscript};
use crate::rng::{derive_seed, derived_rng};
use crate::sampler::{SamplerConfig, SamplerMethod};
use crate::spectra::{eig_hermitian, HermitianMatrix, Spectrum};
use crate::stats::quantile_nearest_rank;

/// Stream index reserved for instance generation; trials use `0..trials`.
const INSTANCE_STREAM: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Projection,
    ConditionedGap,
    Wishart,
    CustomFile,
}

fn default_top_eig() -> f64 {
    1.0
}

fn default_mechanism() -> Mechanism {
    Mechanism::Algorithm1
}

/// JSON spec files use these field names. Everything after `output_path`
/// is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub d: usize,
    pub k: usize,
    pub epsilon: f64,
    pub beta: f64,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default = "default_mechanism")]
    pub mechanism: Mechanism,
    /// Top eigenvalue of projection and conditioned-gap instances.
    #[serde(default = "default_top_eig")]
    pub top_eig: f64,
    /// Wishart sample count; defaults to `d`.
    #[serde(default)]
    pub wishart_m: Option<usize>,
    #[serde(default)]
    pub wishart_norm: WishartNorm,
    /// Matrix or dataset file for `custom_file`.
    #[serde(default)]
    pub input_path: Option<PathBuf>,
    #[serde(default)]
    pub bound_constants: BoundConstants,
    /// Record wall-clock times. Off by default so that artifacts are
    /// reproducible byte for byte.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(scenario: Scenario, d: usize, k: usize, epsilon: f64, trials: usize, seed: u64) -> Self {
        Self {
            scenario,
            d,
            k,
            epsilon,
            beta: 0.1,
            trials,
            seed,
            sampler: SamplerConfig::default(),
            output_path: None,
            mechanism: Mechanism::Algorithm1,
            top_eig: 1.0,
            wishart_m: None,
            wishart_norm: WishartNorm::Samples,
            input_path: None,
            bound_constants: BoundConstants::default(),
            timing: false,
        }
    }

    /// Fixed projection benchmark: `d = 4`, `k = 2`, top eigenvalue 100.
    pub fn projection_benchmark(epsilon: f64, trials: usize, seed: u64) -> Self {
        Self { top_eig: 100.0, ..Self::new(Scenario::Projection, 4, 2, epsilon, trials, seed) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.k == 0 || self.k > self.d {
            return Err(invalid(format!("need 1 <= k <= d, got k={} d={}", self.k, self.d)));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(invalid(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if self.scenario == Scenario::CustomFile && self.input_path.is_none() {
            return Err(invalid("custom_file scenario needs input_path"));
        }
        self.sampler.validate()
    }

    /// Builds the input matrix from the instance stream of `seed`.
    pub fn instance(&self) -> Result<HermitianMatrix> {
        let mut rng = derived_rng(self.seed, INSTANCE_STREAM);
        let m = match self.scenario {
            Scenario::Projection => gen_projection_instance(self.d, self.k, self.top_eig, &mut rng)?,
            Scenario::ConditionedGap => gen_conditioned_gap_instance(self.d, self.k, self.top_eig, &mut rng)?,
            Scenario::Wishart => gen_wishart_instance_with(self.d, self.wishart_m.unwrap_or(self.d), self.wishart_norm, &mut rng)?,
            Scenario::CustomFile => {
                let path = self.input_path.as_ref().expect("validated");
                match read_matrix_or_dataset(path)? {
                    MatrixOrDataset::Matrix(m) => m,
                    MatrixOrDataset::Dataset(ds) => ds.covariance(),
                }
            }
        };
        if m.dim() != self.d {
            return Err(crate::error::Error::DimensionMismatch { expected: self.d, found: m.dim() });
        }
        Ok(m)
    }
}

/// One row of the per-trial table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub utility: f64,
    pub utility_gap: f64,
    pub frob_err_sq: f64,
    /// Top `k` of the spectrum the sampler targeted.
    pub lambda_tilde: Vec<f64>,
    pub acceptance_rate: f64,
    pub rhat: Option<f64>,
    pub wall_ms: f64,
    pub sampler: SamplerMethod,
    pub flags: Vec<String>,
}

impl TrialRecord {
    fn from_transcript(trial: usize, k: usize, t: &MechanismTranscript, wall_ms: f64) -> Self {
        Self {
            trial,
            seed: t.seed,
            utility: t.utility,
            utility_gap: t.utility_gap,
            frob_err_sq: t.frobenius_error,
            lambda_tilde: t.target_spectrum.values()[..k].to_vec(),
            acceptance_rate: t.acceptance_rate,
            rhat: t.split_rhat,
            wall_ms,
            sampler: t.sampler,
            flags: t.flags.clone(),
        }
    }
}

/// Nearest-rank quantiles at `0.5` and `1 − β`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileSummary {
    pub upper_level: f64,
    pub utility_gap_median: f64,
    pub utility_gap_upper: f64,
    pub frob_err_median: f64,
    pub frob_err_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub instance_eigenvalues: Vec<f64>,
    pub per_trial: Vec<TrialRecord>,
    pub quantiles: QuantileSummary,
    pub bounds: BoundReport,
    pub flagged_trials: usize,
    pub wall_clock_seconds: f64,
}

fn clamp_spectrum(s: &Spectrum) -> Result<Spectrum> {
    Spectrum::new(s.values().iter().map(|x| x.max(0.0)).collect())
}

/// Runs `spec.trials` independent mechanism runs on one instance. Trial `i`
/// draws from `derive_seed(spec.seed, i)`; trials run in parallel and are
/// reported in index order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let started = Instant::now();
    let m = spec.instance()?;
    let (gamma, _) = eig_hermitian(&m)?;
    let gamma = clamp_spectrum(&gamma)?;
    let lambda = Spectrum::orbit_target(&gamma.values()[..spec.k], spec.d)?;

    let per_trial = (0..spec.trials)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(spec.seed, i as u64);
            let t0 = Instant::now();
            let t = match spec.mechanism {
                Mechanism::Algorithm1 => algorithm1(&m, &lambda, spec.epsilon, &spec.sampler, seed)?,
                Mechanism::Algorithm2 => algorithm2(m.clone(), spec.k, spec.epsilon, &spec.sampler, seed)?,
            };
            let wall = if spec.timing { t0.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
            Ok(TrialRecord::from_transcript(i, spec.k, &t, wall))
        })
        .collect::<Result<Vec<_>>>()?;

    let gaps: Vec<f64> = per_trial.iter().map(|r| r.utility_gap).collect();
    let errs: Vec<f64> = per_trial.iter().map(|r| r.frob_err_sq).collect();
    let hi = 1.0 - spec.beta;
    let quantiles = QuantileSummary {
        upper_level: hi,
        utility_gap_median: quantile_nearest_rank(&gaps, 0.5),
        utility_gap_upper: quantile_nearest_rank(&gaps, hi),
        frob_err_median: quantile_nearest_rank(&errs, 0.5),
        frob_err_upper: quantile_nearest_rank(&errs, hi),
    };
    let bounds = evaluate_bounds(&gamma, &lambda, spec.d, spec.k, spec.epsilon, spec.beta, spec.bound_constants)?;
    let flagged_trials = per_trial.iter().filter(|r| !r.flags.is_empty()).count();
    Ok(ExperimentResult {
        spec: spec.clone(),
        instance_eigenvalues: gamma.values().to_vec(),
        per_trial,
        quantiles,
        bounds,
        flagged_trials,
        wall_clock_seconds: if spec.timing { started.elapsed().as_secs_f64() } else { 0.0 },
    })
}

impl ExperimentResult {
    /// Per-trial rows: `trial, utility, utility_gap, frob_err_sq,
    /// lambda_tilde_1..k, acceptance_rate, rhat, wall_ms`.
    pub fn to_csv(&self) -> Result<String> {
        let k = self.spec.k;
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["trial".to_string(), "utility".into(), "utility_gap".into(), "frob_err_sq".into()];
        header.extend((1..=k).map(|i| format!("lambda_tilde_{i}")));
        header.extend(["acceptance_rate".into(), "rhat".into(), "wall_ms".into()]);
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.per_trial {
            let mut row = vec![r.trial.to_string(), r.utility.to_string(), r.utility_gap.to_string(), r.frob_err_sq.to_string()];
            row.extend(r.lambda_tilde.iter().map(f64::to_string));
            row.push(r.acceptance_rate.to_string());
            row.push(r.rhat.map(|x| x.to_string()).unwrap_or_default());
            row.push(r.wall_ms.to_string());
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| invalid(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?)?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    invalid(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(spec: ExperimentSpec) -> ExperimentSpec {
        ExperimentSpec { sampler: SamplerConfig { chain_length: 400, burn_in: 100, ..Default::default() }, ..spec }
    }

    #[test]
    fn deterministic_and_ordered() {
        let spec = quick(ExperimentSpec::new(Scenario::Projection, 3, 2, 1.0, 6, 9));
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.per_trial.iter().enumerate().all(|(i, r)| r.trial == i));
        assert_eq!(a.wall_clock_seconds, 0.0);
    }

    #[test]
    fn csv_header_and_rows() {
        let spec = quick(ExperimentSpec::new(Scenario::Wishart, 3, 2, 1.0, 3, 1));
        let csv = run_experiment(&spec).unwrap().to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "trial,utility,utility_gap,frob_err_sq,lambda_tilde_1,lambda_tilde_2,acceptance_rate,rhat,wall_ms"
        );
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn huge_epsilon_gap_is_small() {
        let mut spec = quick(ExperimentSpec::new(Scenario::Projection, 2, 1, 1e6, 1, 4));
        spec.beta = 0.5;
        let r = run_experiment(&spec).unwrap();
        assert!(r.quantiles.utility_gap_median.abs() < 1e-3, "{}", r.quantiles.utility_gap_median);
    }

    #[test]
    fn rejects_invalid_spec() {
        let spec = ExperimentSpec::new(Scenario::Projection, 2, 3, 1.0, 1, 0);
        assert!(run_experiment(&spec).is_err());
        let spec = ExperimentSpec::new(Scenario::CustomFile, 2, 1, 1.0, 1, 0);
        assert!(run_experiment(&spec).is_err());
    }
}
