//! `orbitdp`: private orbit optimisation from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input, 3 flagged
//! diagnostics under `--strict` (a failing `selftest` always exits 3).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use orbitdp_core::geometry::{
    covering_sandwich, evaluate_bounds, log_covering_upper, packing_lower_construct, verify_certificate, BoundConstants,
    BoundReport, CoveringSandwich,
};
use orbitdp_core::harness::{audit_privacy, run_experiment, selftest, AuditReport, AuditSpec, ExperimentSpec, SelftestReport};
use orbitdp_core::io::{read_json, read_matrix_or_dataset, to_json_string, MatrixOrDataset};
use orbitdp_core::{algorithm1, algorithm2, rng_from_seed, HermitianMatrix, MechanismInput, MechanismTranscript, OrbitPoint, SamplerConfig, Spectrum};

#[derive(Parser, Debug)]
#[command(name = "orbitdp", version, about = "Differentially private optimisation over unitary orbits")]
struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Suppress the summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Exit 3 when the result carries diagnostic flags.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct SamplerArgs {
    /// JSON sampler configuration; the flags below override it.
    #[arg(long)]
    sampler_config: Option<PathBuf>,
    #[arg(long)]
    chain_length: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    step_size: Option<f64>,
    /// Run parallel chains and report split R-hat.
    #[arg(long)]
    diagnostics: bool,
}

impl SamplerArgs {
    fn config(&self) -> anyhow::Result<SamplerConfig> {
        let mut cfg: SamplerConfig = match &self.sampler_config {
            Some(p) => read_json(p).with_context(|| format!("reading sampler config {}", p.display()))?,
            None => SamplerConfig::default(),
        };
        if let Some(v) = self.chain_length {
            cfg.chain_length = v;
        }
        if let Some(v) = self.burn_in {
            cfg.burn_in = v;
        }
        if let Some(v) = self.step_size {
            cfg.step_size = v;
        }
        cfg.diagnostics_on |= self.diagnostics;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Private rank-k approximation of a matrix or dataset file.
    Privatize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
    /// Exponential-mechanism sample from the orbit of a public spectrum.
    SampleOrbit {
        #[arg(long = "in")]
        input: PathBuf,
        /// Leading orbit eigenvalues, comma separated; padded with zeros.
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
    /// Packing certificate for the orbit of a spectrum.
    Pack {
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        zeta: f64,
        /// Ball radius around diag(lambda); whole orbit when absent.
        #[arg(long)]
        omega: Option<f64>,
        /// Orbit dimension when --lambda lists fewer entries.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 200)]
        budget: usize,
    },
    /// Greedy spectral-norm cover of an orbit, with the 2-zeta sandwich.
    Cover {
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        #[arg(long)]
        zeta: f64,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 200)]
        budget: usize,
    },
    /// Evaluate the utility, error and covering/packing bounds.
    Bounds {
        #[arg(long, value_delimiter = ',', required = true)]
        gamma: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long = "big-c", default_value_t = 1.0)]
        big_c: f64,
        #[arg(long, default_value_t = 1.0)]
        zeta: f64,
        /// Aligned text table instead of JSON.
        #[arg(long)]
        table: bool,
    },
    /// Discretised likelihood-ratio privacy audit at d = 2.
    Audit {
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 10)]
        pairs: usize,
        #[arg(long, default_value_t = 100_000)]
        runs: usize,
        #[arg(long, default_value_t = 24)]
        bins: usize,
        #[arg(long, default_value_t = 200)]
        min_count: u64,
        /// Audit the broken coefficient eps/lambda_1 instead.
        #[arg(long)]
        mutant: bool,
    },
    /// Run an experiment spec file.
    Bench {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Reduced invariant suites.
    Selftest,
}

struct Outcome {
    body: String,
    summary: String,
    flagged: bool,
    /// Exit 3 even without `--strict`.
    failed: bool,
}

fn parse_spectrum(values: &[f64], dim: Option<usize>) -> anyhow::Result<Spectrum> {
    let d = dim.unwrap_or(values.len());
    if values.len() > d {
        bail!("--lambda has {} entries but the dimension is {d}", values.len());
    }
    let mut top = values.to_vec();
    while top.len() > 1 && top.last() == Some(&0.0) {
        top.pop();
    }
    Ok(Spectrum::orbit_target(&top, d)?)
}

fn read_matrix(path: &Path) -> anyhow::Result<MechanismInput> {
    let m = read_matrix_or_dataset(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(match m {
        MatrixOrDataset::Matrix(m) => MechanismInput::Matrix(m),
        MatrixOrDataset::Dataset(d) => MechanismInput::Dataset(d),
    })
}

fn csv_rows(rows: &[Vec<String>]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))?)?)
}

fn json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(to_json_string(v)?)
}

fn transcript_outcome(t: &MechanismTranscript, format: Format) -> anyhow::Result<Outcome> {
    let body = match format {
        Format::Json => json(t)?,
        Format::Csv => {
            let k = t.target_spectrum.rank_k();
            let mut header: Vec<String> = ["mechanism", "seed", "utility", "utility_gap", "frob_err_sq"].map(String::from).to_vec();
            header.extend((1..=k).map(|i| format!("lambda_tilde_{i}")));
            header.extend(["acceptance_rate", "rhat"].map(String::from));
            let mut row = vec![
                serde_json::to_value(t.mechanism)?.as_str().unwrap_or_default().to_string(),
                t.seed.to_string(),
                t.utility.to_string(),
                t.utility_gap.to_string(),
                t.frobenius_error.to_string(),
            ];
            row.extend(t.target_spectrum.values()[..k].iter().map(f64::to_string));
            row.push(t.acceptance_rate.to_string());
            row.push(t.split_rhat.map(|r| r.to_string()).unwrap_or_default());
            csv_rows(&[header, row])?
        }
    };
    let mut summary = format!(
        "utility {:.6} (optimum {:.6}, gap {:.6}), sampler {:?}, acceptance {:.3}",
        t.utility, t.optimum, t.utility_gap, t.sampler, t.acceptance_rate
    );
    for f in t.flags.iter().chain(&t.warnings) {
        summary.push_str(&format!("\n  {f}"));
    }
    Ok(Outcome { body, summary, flagged: t.is_flagged(), failed: false })
}

fn no_csv(format: Format, cmd: &str) -> anyhow::Result<()> {
    if format == Format::Csv {
        bail!("--format csv is not available for {cmd}");
    }
    Ok(())
}

fn bounds_csv(r: &BoundReport) -> anyhow::Result<String> {
    let v = serde_json::to_value(r)?;
    let mut rows = vec![vec!["field".to_string(), "value".to_string()]];
    if let serde_json::Value::Object(map) = v {
        for (k, val) in map {
            if k == "constants" {
                continue;
            }
            let s = match val {
                serde_json::Value::String(s) => s,
                serde_json::Value::Null => String::new(),
                other => other.to_string(),
            };
            rows.push(vec![k, s]);
        }
    }
    csv_rows(&rows)
}

fn audit_csv(r: &AuditReport) -> anyhow::Result<String> {
    let mut rows = vec![["pair", "bin", "count_m", "count_m_prime", "ratio", "half_width", "threshold", "lower_confidence_ratio", "passed"]
        .map(String::from)
        .to_vec()];
    for p in &r.pairs {
        for b in &p.bins {
            rows.push(vec![
                p.pair.to_string(),
                b.bin.to_string(),
                b.count_m.to_string(),
                b.count_m_prime.to_string(),
                b.ratio.to_string(),
                b.half_width.to_string(),
                b.threshold.to_string(),
                b.lower_confidence_ratio.to_string(),
                b.passed.to_string(),
            ]);
        }
    }
    csv_rows(&rows)
}

fn selftest_csv(r: &SelftestReport) -> anyhow::Result<String> {
    let mut rows = vec![["suite", "cases", "violations", "worst", "passed", "detail"].map(String::from).to_vec()];
    for s in &r.suites {
        rows.push(vec![s.name.clone(), s.cases.to_string(), s.violations.to_string(), s.worst.to_string(), s.passed.to_string(), s.detail.clone()]);
    }
    csv_rows(&rows)
}

#[derive(Serialize)]
struct CoverOutput {
    lambda: Spectrum,
    zeta: f64,
    count: usize,
    log_covering_upper: f64,
    sandwich: CoveringSandwich,
    centers: Vec<OrbitPoint>,
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let seed = cli.seed;
    let format = cli.format;
    let out = match &cli.command {
        Command::Privatize { input, k, eps, sampler } => {
            let m = read_matrix(input)?;
            let t = algorithm2(m, *k, *eps, &sampler.config()?, seed)?;
            transcript_outcome(&t, format)?
        }
        Command::SampleOrbit { input, lambda, eps, sampler } => {
            let m: HermitianMatrix = read_matrix(input)?.to_matrix();
            let l = parse_spectrum(lambda, Some(m.dim()))?;
            let t = algorithm1(&m, &l, *eps, &sampler.config()?, seed)?;
            transcript_outcome(&t, format)?
        }
        Command::Pack { lambda, i, j, zeta, omega, dim, budget } => {
            no_csv(format, "pack")?;
            let l = parse_spectrum(lambda, *dim)?;
            let mut rng = rng_from_seed(seed);
            let cert = packing_lower_construct(&l, *i, *j, *zeta, *omega, &mut rng, *budget)?;
            let check = verify_certificate(&cert)?;
            let mut summary = format!(
                "{} points, min pairwise distance {}, max distance to center {:.6}, {} proposals",
                check.points,
                check.min_pairwise_dist.map_or("n/a".to_string(), |x| format!("{x:.6}")),
                check.max_center_dist,
                cert.proposals
            );
            if cert.truncated {
                summary.push_str(" (stopped at the point cap)");
            }
            Outcome { body: json(&cert)?, summary, flagged: false, failed: false }
        }
        Command::Cover { lambda, zeta, dim, budget } => {
            no_csv(format, "cover")?;
            let l = parse_spectrum(lambda, *dim)?;
            let (sandwich, centers) = covering_sandwich(&l, *zeta, seed, *budget)?;
            let summary = format!("{} centers at zeta, {} at 2 zeta", sandwich.count_at_zeta, sandwich.count_at_2zeta);
            let flagged = !sandwich.ordered;
            let o = CoverOutput {
                log_covering_upper: log_covering_upper(&l, *zeta),
                lambda: l,
                zeta: *zeta,
                count: centers.len(),
                sandwich,
                centers,
            };
            Outcome { body: json(&o)?, summary, flagged, failed: false }
        }
        Command::Bounds { gamma, lambda, k, eps, beta, c, big_c, zeta, table } => {
            let g = Spectrum::from_unsorted(gamma.clone())?;
            let l = parse_spectrum(lambda, Some(g.dim()))?;
            let constants = BoundConstants { c: *c, big_c: *big_c, zeta: *zeta };
            let r = evaluate_bounds(&g, &l, g.dim(), *k, *eps, *beta, constants)?;
            let body = match (table, format) {
                (true, _) => r.to_table(),
                (false, Format::Json) => json(&r)?,
                (false, Format::Csv) => bounds_csv(&r)?,
            };
            let summary = format!("tau {:.6}, tail threshold {:.6}", r.upper_utility_bound, r.tail_threshold);
            Outcome { body, summary, flagged: !r.sandwich_consistent, failed: false }
        }
        Command::Audit { eps, pairs, runs, bins, min_count, mutant } => {
            let spec = AuditSpec {
                epsilon: *eps,
                pairs: *pairs,
                runs_per_pair: *runs,
                bins: *bins,
                min_count: *min_count,
                mutant: *mutant,
                seed,
            };
            let r = audit_privacy(&spec)?;
            let body = match format {
                Format::Json => json(&r)?,
                Format::Csv => audit_csv(&r)?,
            };
            let summary = format!(
                "audit {}: max ratio {:.4}, max lower-confidence ratio {:.4}, bound {:.4}, {} bins excluded",
                if r.passed { "passed" } else { "FAILED" },
                r.max_ratio,
                r.max_lower_confidence_ratio,
                r.bound,
                r.excluded_bins
            );
            Outcome { body, summary, flagged: !r.passed, failed: false }
        }
        Command::Bench { spec } => {
            let mut s: ExperimentSpec = read_json(spec).with_context(|| format!("reading spec {}", spec.display()))?;
            if let Some(base) = spec.parent() {
                if let Some(p) = &s.input_path {
                    if p.is_relative() {
                        s.input_path = Some(base.join(p));
                    }
                }
            }
            let r = run_experiment(&s)?;
            let body = match format {
                Format::Json => json(&r)?,
                Format::Csv => r.to_csv()?,
            };
            let summary = format!(
                "{} trials: utility gap median {:.6}, {:.3}-quantile {:.6} (tau {:.6}), {} flagged",
                r.per_trial.len(),
                r.quantiles.utility_gap_median,
                r.quantiles.upper_level,
                r.quantiles.utility_gap_upper,
                r.bounds.upper_utility_bound,
                r.flagged_trials
            );
            let mut o = Outcome { body, summary, flagged: r.flagged_trials > 0, failed: false };
            if cli.out.is_none() {
                if let Some(p) = &r.spec.output_path {
                    o.summary.push_str(&format!("\n  written to {}", p.display()));
                    std::fs::write(p, &o.body).with_context(|| format!("writing {}", p.display()))?;
                    o.body.clear();
                }
            }
            o
        }
        Command::Selftest => {
            let r = selftest(seed)?;
            let body = match format {
                Format::Json => json(&r)?,
                Format::Csv => selftest_csv(&r)?,
            };
            let failing: Vec<&str> = r.suites.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect();
            let summary = if failing.is_empty() {
                format!("selftest passed ({} suites)", r.suites.len())
            } else {
                format!("selftest FAILED: {}", failing.join(", "))
            };
            Outcome { body, summary, flagged: !r.passed, failed: !r.passed }
        }
    };
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(o) => {
            if let Some(p) = &cli.out {
                if let Err(e) = std::fs::write(p, &o.body) {
                    eprintln!("error: writing {}: {e}", p.display());
                    return ExitCode::from(2);
                }
            } else if !o.body.is_empty() {
                let mut stdout = std::io::stdout().lock();
                let _ = stdout.write_all(o.body.as_bytes());
            }
            if !cli.quiet {
                eprintln!("{}", o.summary);
            }
            if o.failed || (cli.strict && o.flagged) {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
