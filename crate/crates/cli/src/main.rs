mod config;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bsc::codelen::lnml_complexity;
use bsc::metrics::{benefit_auc, compression_at, mean_sd, type_errors, TrialScores};
use bsc::{
    generate_stream, load_stream, reports_to_csv, run, write_stream, BetaLuckiness, BscConfig,
    GroundTruth, InferenceOptions, SynthConfig,
};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "bsc",
    version,
    about = "Graph-stream summarization and MDL change detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic streams and their ground truth.
    Generate(GenerateArgs),
    /// Run the detector over one or more streams and write report CSVs.
    Run(RunArgs),
    /// Aggregate report CSVs into error rates, AUC and code-lengths.
    Eval(EvalArgs),
    /// Print the LNML parametric complexity table as CSV.
    Complexity(ComplexityArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stream JSONL path (with --trials > 1, a `.trialI` suffix is added).
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth JSON path.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long = "n", default_value_t = 200)]
    n_nodes: usize,
    #[arg(long, default_value_t = 2)]
    k_true: usize,
    #[arg(long, default_value_t = 15)]
    t_change: usize,
    #[arg(long, default_value_t = 30)]
    t_max: usize,
    #[arg(long, default_value_t = 0.05)]
    regen_prob: f64,
    #[arg(long, default_value_t = 0.1)]
    jitter: f64,
    #[arg(long, default_value_t = 0.001)]
    tau_clip: f64,
    /// Number of trials; trial i uses seed + i.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
}

#[derive(Args)]
struct RunArgs {
    /// Stream file (.jsonl or edge-list manifest); repeat for several.
    #[arg(long, required = true)]
    stream: Vec<PathBuf>,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    kset: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    prior_a: f64,
    #[arg(long, default_value_t = 0.5)]
    prior_b: f64,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long, default_value_t = 50)]
    sweeps: usize,
    #[arg(long)]
    anneal: bool,
    /// Report CSV path; a directory when several streams are given.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Report CSVs, one per trial.
    #[arg(long, required = true, num_args = 1..)]
    reports: Vec<PathBuf>,
    /// Ground-truth JSON (provides the change time).
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value_t = 1)]
    tau: usize,
    #[arg(long, default_value_t = 1)]
    tb: usize,
}

#[derive(Args)]
struct ComplexityArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    kmax: u64,
    #[arg(long, value_delimiter = ',', required = true)]
    lambdas: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    a: f64,
    #[arg(long, default_value_t = 0.5)]
    b: f64,
}

/// Flag values rejected after parsing; reported with the usage exit code.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl std::fmt::Display) -> anyhow::Error {
    Usage(e.to_string()).into()
}

#[derive(Serialize)]
struct EvalSummary {
    type1: f64,
    type2: f64,
    auc_mean: f64,
    auc_sd: f64,
    codelen_mean: f64,
    codelen_sd: f64,
}

fn trial_path(base: &Path, trial: u64, trials: u64) -> PathBuf {
    if trials == 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match base.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}.trial{trial}.{ext}"),
        None => format!("{stem}.trial{trial}"),
    };
    base.with_file_name(name)
}

fn generate(args: GenerateArgs) -> Result<()> {
    let base = SynthConfig {
        n_nodes: args.n_nodes,
        k_true: args.k_true,
        t_change: args.t_change,
        t_max: args.t_max,
        regen_prob: args.regen_prob,
        jitter: args.jitter,
        tau_clip: args.tau_clip,
        seed: args.seed,
    };
    base.validate().map_err(usage)?;
    let configs: Vec<SynthConfig> = (0..args.trials)
        .map(|i| SynthConfig {
            seed: args.seed + i,
            ..base.clone()
        })
        .collect();
    configs
        .par_iter()
        .enumerate()
        .try_for_each(|(i, cfg)| -> Result<()> {
            let (stream, truth) = generate_stream(cfg)?;
            write_stream(trial_path(&args.out, i as u64, args.trials), &stream)?;
            let truth_path = trial_path(&args.truth, i as u64, args.trials);
            fs::write(&truth_path, serde_json::to_string(&truth)? + "\n")
                .with_context(|| format!("writing {}", truth_path.display()))?;
            Ok(())
        })?;
    println!("{}", serde_json::to_string(&base)?);
    Ok(())
}

fn run_streams(args: RunArgs) -> Result<()> {
    let cfg = BscConfig {
        lambda: args.lambda,
        delta: args.delta,
        kset: args.kset,
        prior_a: args.prior_a,
        prior_b: args.prior_b,
        seed: args.seed,
        inference: InferenceOptions {
            seed: args.seed,
            n_restarts: args.restarts,
            max_sweeps: args.sweeps,
            anneal: args.anneal,
            exhaustive: false,
        },
    };
    cfg.validate().map_err(usage)?;
    let several = args.stream.len() > 1;
    if several {
        fs::create_dir_all(&args.out)
            .with_context(|| format!("creating {}", args.out.display()))?;
    }
    args.stream.par_iter().try_for_each(|path| -> Result<()> {
        let stream = load_stream(path)?;
        if stream.is_empty() {
            bail!("{}: stream has no snapshots", path.display());
        }
        let reports = run(&stream, &cfg).with_context(|| format!("stream {}", path.display()))?;
        let out = if several {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("stream");
            args.out.join(format!("{stem}.csv"))
        } else {
            args.out.clone()
        };
        fs::write(&out, reports_to_csv(&reports))
            .with_context(|| format!("writing {}", out.display()))
    })
}

fn evaluate(args: EvalArgs) -> Result<()> {
    if args.tau == 0 || args.tb == 0 {
        return Err(usage("--tau and --tb must be >= 1"));
    }
    let text = fs::read_to_string(&args.truth)
        .with_context(|| format!("reading {}", args.truth.display()))?;
    let truth: GroundTruth =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", args.truth.display()))?;
    let t_star = truth.t_star;

    let all: Vec<_> = args
        .reports
        .iter()
        .map(|p| report::read_reports(p))
        .collect::<Result<_>>()?;
    let times = |r: &[bsc::ChangeReport]| r.iter().map(|x| x.t).collect::<Vec<_>>();
    let reference = times(&all[0]);
    for (path, reports) in args.reports.iter().zip(&all).skip(1) {
        if times(reports) != reference {
            bail!(
                "{}: time range differs from {}",
                path.display(),
                args.reports[0].display()
            );
        }
    }
    if !reference.contains(&t_star) {
        bail!("change time t*={t_star} is not covered by the reports");
    }

    let margins: Vec<_> = all
        .iter()
        .map(|r| TrialScores::margins(r, t_star))
        .collect();
    let (type1, type2) = type_errors(&margins, 0.0, args.tau)?;
    let aucs = all
        .iter()
        .map(|r| benefit_auc(&TrialScores::phis(r, t_star), t_star, args.tb))
        .collect::<bsc::Result<Vec<_>>>()?;
    let lengths = all
        .iter()
        .map(|r| compression_at(r, t_star))
        .collect::<bsc::Result<Vec<_>>>()?;
    let (auc_mean, auc_sd) = mean_sd(&aucs);
    let (codelen_mean, codelen_sd) = mean_sd(&lengths);
    let summary = EvalSummary {
        type1,
        type2,
        auc_mean,
        auc_sd,
        codelen_mean,
        codelen_sd,
    };
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

fn complexity(args: ComplexityArgs) -> Result<()> {
    let priors = args
        .lambdas
        .iter()
        .map(|&l| BetaLuckiness::new(args.a, args.b, l))
        .collect::<bsc::Result<Vec<_>>>()
        .map_err(usage)?;
    let mut out = String::from("k,lambda,log2_complexity\n");
    for k in 1..=args.kmax {
        for (lambda, prior) in args.lambdas.iter().zip(&priors) {
            out.push_str(&format!(
                "{k},{lambda},{:.6}\n",
                lnml_complexity(k * k, prior)
            ));
        }
    }
    print!("{out}");
    Ok(())
}

fn main() -> ExitCode {
    let args = match config::merge_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Run(a) => run_streams(a),
        Command::Eval(a) => evaluate(a),
        Command::Complexity(a) => complexity(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.downcast_ref::<Usage>().is_some() {
                2
            } else {
                1
            })
        }
    }
}
