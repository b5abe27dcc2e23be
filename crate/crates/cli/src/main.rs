use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use outlier_core::batch_file;
use outlier_core::detectors::{DetectorKind, DEFAULT_SUBSET_BUDGET};
use outlier_core::exponents::{
    hoeffding_mean_bound, hoeffding_median_bound, mean_exponent_grid, optimal_exponent, ProbabilityGrid,
};
use outlier_core::harness::{
    format_sig12, run_detector, run_experiment, write_outputs, ErrorMetric, ExperimentConfig, ExperimentKind,
    TrialParams,
};
use outlier_core::probability::{bhattacharyya, kl_divergence, Distribution};

/// Directory used for experiment outputs when neither `--output` nor the config names one.
const OUTPUT_DIR_VAR: &str = "OUTLIER_OUTPUT_DIR";
const DEFAULT_OUTPUT_DIR: &str = "results";

#[derive(Parser)]
#[command(name = "outlier", version, about = "Universal outlier hypothesis testing on discrete sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// KL divergences and Bhattacharyya distance between two laws, in bits
    Divergence {
        /// Comma-separated probabilities
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
    },
    /// Optimal exponent 2B(π,μ) and the grid-minimized mean-test exponent
    Exponent(ExponentArgs),
    /// Run one detector on a batch file and print the chosen indices
    Detect(DetectArgs),
    /// Run an experiment described by a JSON config
    Experiment(ExperimentArgs),
    /// Hoeffding bounds, or a bound-check simulation with --params
    Bound(BoundArgs),
}

#[derive(Args)]
struct LawArgs {
    /// Typical law as comma-separated probabilities
    #[arg(long, allow_hyphen_values = true, conflicts_with = "theta_pi")]
    pi: Option<String>,
    /// Outlier law as comma-separated probabilities
    #[arg(long, allow_hyphen_values = true, conflicts_with = "theta_mu")]
    mu: Option<String>,
    /// Bernoulli typical law: probability of symbol 1
    #[arg(long, allow_hyphen_values = true)]
    theta_pi: Option<f64>,
    /// Bernoulli outlier law: probability of symbol 1
    #[arg(long, allow_hyphen_values = true)]
    theta_mu: Option<f64>,
}

#[derive(Args)]
struct ExponentArgs {
    #[command(flatten)]
    laws: LawArgs,
    /// Contamination fraction; prints the grid exponent when given
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Grid step (Bernoulli step, or 1/N for larger alphabets)
    #[arg(long, allow_hyphen_values = true)]
    grid_step: Option<f64>,
}

#[derive(Args)]
struct DetectArgs {
    /// Batch file: `M n |Y|`, M rows of symbols, optional `outliers:` line
    #[arg(long)]
    input: PathBuf,
    /// mean, median1, median2, glrt or ml
    #[arg(long = "test")]
    test: String,
    /// Number of outliers to report
    #[arg(long)]
    t: usize,
    /// Split fraction for median2
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    rho: f64,
    /// Maximum number of subsets the GLRT may enumerate
    #[arg(long, default_value_t = DEFAULT_SUBSET_BUDGET)]
    budget: u64,
    /// True laws, required by the ml test
    #[command(flatten)]
    laws: LawArgs,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this
    #[arg(long)]
    threads: Option<usize>,
    /// CSV path; the SVG is written next to it
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    /// bound-check config to simulate
    #[arg(long, conflicts_with_all = ["alphabet_size", "m", "t", "n", "eps"])]
    params: Option<PathBuf>,
    #[arg(long)]
    alphabet_size: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// A problem with the flags or config: exit code 1.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_probs(field: &str, text: &str) -> Result<Distribution> {
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| usage(format!("--{field}: expected comma-separated numbers, got {text:?}")))?;
    Distribution::new(values).map_err(|e| usage(format!("--{field}: {e}")))
}

fn bernoulli(field: &str, theta: f64) -> Result<Distribution> {
    Distribution::bernoulli(theta).map_err(|e| usage(format!("--{field}: {e}")))
}

impl LawArgs {
    fn given(&self) -> bool {
        self.pi.is_some() || self.mu.is_some() || self.theta_pi.is_some() || self.theta_mu.is_some()
    }

    /// `(π, μ)`, rejecting equal laws.
    fn resolve(&self) -> Result<(Distribution, Distribution)> {
        let pi = match (&self.pi, self.theta_pi) {
            (Some(p), None) => parse_probs("pi", p)?,
            (None, Some(theta)) => bernoulli("theta-pi", theta)?,
            _ => return Err(usage("give the typical law with --pi or --theta-pi")),
        };
        let mu = match (&self.mu, self.theta_mu) {
            (Some(m), None) => parse_probs("mu", m)?,
            (None, Some(theta)) => bernoulli("theta-mu", theta)?,
            _ => return Err(usage("give the outlier law with --mu or --theta-mu")),
        };
        if pi.alphabet_size() != mu.alphabet_size() {
            return Err(usage(format!(
                "--pi has {} entries but --mu has {}",
                pi.alphabet_size(),
                mu.alphabet_size()
            )));
        }
        if pi == mu {
            return Err(usage("π ≠ μ required"));
        }
        Ok((pi, mu))
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format_sig12(*v)).collect::<Vec<_>>().join(",")
}

fn divergence(p: &str, q: &str) -> Result<()> {
    let p = parse_probs("p", p)?;
    let q = parse_probs("q", q)?;
    if p.alphabet_size() != q.alphabet_size() {
        return Err(usage("--p and --q need the same number of entries"));
    }
    let b = bhattacharyya(&p, &q)?;
    println!("D(p||q) = {}", format_sig12(kl_divergence(&p, &q)?));
    println!("D(q||p) = {}", format_sig12(kl_divergence(&q, &p)?));
    println!("B(p,q) = {}", format_sig12(b));
    println!("2B(p,q) = {}", format_sig12(2.0 * b));
    Ok(())
}

fn exponent(args: &ExponentArgs) -> Result<()> {
    let (pi, mu) = args.laws.resolve()?;
    if let Some(c) = args.c {
        if !(0.0..=1.0).contains(&c) {
            return Err(usage(format!("--c: {c} must lie in [0, 1]")));
        }
    }
    let grid = ProbabilityGrid::with_step(pi.alphabet_size(), args.grid_step)
        .map_err(|e| usage(format!("--grid-step: {e}")))?;
    println!("2B(pi,mu) = {}", format_sig12(optimal_exponent(&pi, &mu)?));
    if let Some(c) = args.c {
        let r = mean_exponent_grid(&pi, &mu, c, &grid)?;
        println!("alpha_mean(c={}) = {}", format_sig12(c), format_sig12(r.value));
        println!("grid_resolution = {}", format_sig12(r.grid_resolution));
        println!("q1 = {}", join(r.q1.probs()));
        println!("q2 = {}", join(r.q2.probs()));
    }
    Ok(())
}

fn detect(args: &DetectArgs) -> Result<()> {
    let kind = DetectorKind::from_name(&args.test).ok_or_else(|| {
        usage(format!(
            "--test: unknown detector {:?}; expected mean, median1, median2, glrt or ml",
            args.test
        ))
    })?;
    let known = if kind == DetectorKind::MlKnown {
        Some(args.laws.resolve()?)
    } else {
        if args.laws.given() {
            return Err(usage("--pi/--mu and --theta-pi/--theta-mu are only used by --test ml"));
        }
        None
    };
    let batch = batch_file::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    if args.t == 0 || 2 * args.t >= batch.m() {
        return Err(usage(format!("--t: need 1 ≤ t < M/2 with M = {}", batch.m())));
    }
    if let Some((pi, _)) = &known {
        if pi.alphabet_size() != batch.alphabet_size() {
            return Err(usage(format!(
                "the laws have {} entries but the batch alphabet has {} symbols",
                pi.alphabet_size(),
                batch.alphabet_size()
            )));
        }
    }
    let params = TrialParams {
        t: args.t,
        rho: args.rho,
        subset_budget: args.budget,
        known,
        metric: ErrorMetric::ExactSet,
    };
    let decision = run_detector(kind, &batch, &params)?;
    let line: Vec<String> = decision.indices().iter().map(|i| i.to_string()).collect();
    println!("{}", line.join(" "));
    Ok(())
}

fn output_path(explicit: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    if let Some(p) = explicit.or(config.output.as_deref()) {
        return p.to_path_buf();
    }
    let dir = std::env::var_os(OUTPUT_DIR_VAR)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    dir.join(format!("{}.csv", config.experiment.name()))
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentConfig::from_json(&text).map_err(|e| match e {
        outlier_core::Error::BudgetExceeded { .. } => anyhow::Error::new(e).context(path.display().to_string()),
        e => usage(format!("{}: {e}", path.display())),
    })
}

fn run_and_write(
    mut config: ExperimentConfig,
    seed: Option<u64>,
    threads: Option<usize>,
    output: Option<&Path>,
) -> Result<()> {
    if threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let path = output_path(output, &config);
    println!("seed: {}", config.seed);
    let start = std::time::Instant::now();
    let result = run_experiment(&config, threads)?;
    let (csv, svg) = write_outputs(&result, &path)?;
    println!("rows: {}", result.rows.len());
    println!("wall_time_s: {:.3}", start.elapsed().as_secs_f64());
    println!("csv: {}", csv.display());
    println!("svg: {}", svg.display());
    Ok(())
}

fn experiment(args: &ExperimentArgs) -> Result<()> {
    let config = load_config(&args.config)?;
    run_and_write(config, args.seed, args.threads, args.output.as_deref())
}

fn bound(args: &BoundArgs) -> Result<()> {
    if let Some(path) = &args.params {
        let config = load_config(path)?;
        if config.experiment != ExperimentKind::BoundCheck {
            return Err(usage(format!(
                "{}: expected a bound-check config, found {}",
                path.display(),
                config.experiment.name()
            )));
        }
        return run_and_write(config, args.seed, args.threads, args.output.as_deref());
    }
    let (Some(k), Some(m), Some(t), Some(n), Some(eps)) = (args.alphabet_size, args.m, args.t, args.n, args.eps)
    else {
        return Err(usage("give --params, or all of --alphabet-size, --m, --t, --n and --eps"));
    };
    if args.seed.is_some() || args.threads.is_some() || args.output.is_some() {
        return Err(usage("--seed, --threads and --output only apply with --params"));
    }
    let median = hoeffding_median_bound(k, m, t, n, eps).map_err(|e| usage(e.to_string()))?;
    let mean = hoeffding_mean_bound(k, m, t, eps).map_err(|e| usage(e.to_string()))?;
    println!("median_bound = {}", format_sig12(median));
    println!(
        "mean_bound = {}{}",
        format_sig12(mean.value),
        if mean.vacuous { " (vacuous: eps*M < T)" } else { "" }
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Divergence { p, q } => divergence(p, q),
        Command::Exponent(args) => exponent(args),
        Command::Detect(args) => detect(args),
        Command::Experiment(args) => experiment(args),
        Command::Bound(args) => bound(args),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let is_usage = err.chain().any(|cause| {
        cause.is::<UsageError>()
            || matches!(
                cause.downcast_ref::<outlier_core::Error>(),
                Some(outlier_core::Error::Config(_))
            )
    });
    if is_usage {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_lists() {
        assert_eq!(parse_probs("pi", "0.25, 0.75").unwrap().probs(), &[0.25, 0.75]);
        let err = parse_probs("pi", "0.5,x").unwrap_err();
        assert!(err.to_string().starts_with("--pi"), "{err}");
        assert!(parse_probs("mu", "0.5,0.6").unwrap_err().to_string().starts_with("--mu"));
    }

    #[test]
    fn usage_errors_map_to_one() {
        assert_eq!(exit_code(&usage("x")), 1);
        assert_eq!(exit_code(&outlier_core::Error::Config("x".into()).into()), 1);
        assert_eq!(exit_code(&outlier_core::Error::DegenerateMedian.into()), 2);
    }
}
