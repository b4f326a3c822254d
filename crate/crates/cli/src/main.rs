use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bht_core::harness::{run, ExitStatus, Experiment, RunConfig};
use clap::{Args, Parser, Subcommand};

/// Numerical experiments on the bilinear Hilbert transform.
#[derive(Parser)]
#[command(name = "bht", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run whatever experiment the config names.
    Eval(RunArgs),
    /// Product recovery from the regularized and truncated transforms.
    Invert(RunArgs),
    /// Lemma 6 gap, Poisson residual or mollifier sweeps over the eps ladder.
    Sweep(RunArgs),
    /// Lebesgue-point profiles and the A^inf surrogate.
    Lebesgue(RunArgs),
    /// Nesting and product lemmas.
    Lemmas(RunArgs),
    /// Leibniz rule and weak-limit checks.
    Dual(RunArgs),
    /// Empirical norm ratio of H_alpha.
    Probe(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Report directory; overrides `output_path` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
    /// Log progress to stderr.
    #[arg(long)]
    verbose: bool,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl Command {
    fn parts(&self) -> (&RunArgs, &'static [Experiment]) {
        use Experiment::*;
        match self {
            Command::Eval(a) => (
                a,
                &[
                    Invert,
                    SweepGap,
                    SweepPoisson,
                    Mollifier,
                    Lebesgue,
                    ProductLemmas,
                    Dual,
                    NormProbe,
                ],
            ),
            Command::Invert(a) => (a, &[Invert]),
            Command::Sweep(a) => (a, &[SweepGap, SweepPoisson, Mollifier]),
            Command::Lebesgue(a) => (a, &[Lebesgue]),
            Command::Lemmas(a) => (a, &[ProductLemmas]),
            Command::Dual(a) => (a, &[Dual]),
            Command::Probe(a) => (a, &[NormProbe]),
        }
    }
}

fn execute(args: &RunArgs, allowed: &[Experiment]) -> ExitStatus {
    let config = match RunConfig::from_path(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitStatus::from_error(&e);
        }
    };
    if !allowed.contains(&config.experiment) {
        let names: Vec<_> = allowed.iter().map(|e| e.as_str()).collect();
        eprintln!(
            "error: config names experiment {}, but this subcommand runs {}",
            config.experiment.as_str(),
            names.join(", ")
        );
        return ExitStatus::Config;
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.output_path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("out").join(config.experiment.as_str()));

    let output = match run(&config, args.jobs) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitStatus::from_error(&e);
        }
    };
    if let Err(e) = output.write(&out_dir) {
        eprintln!("error: cannot write reports to {}: {e}", out_dir.display());
        return ExitStatus::Config;
    }
    let counts = &output.summary.counts;
    let status = output.exit_status();
    println!(
        "{}: {}/{} cells passed, {} failed, {} errors -> {}",
        config.experiment.as_str(),
        counts.passed,
        counts.cells,
        counts.failed,
        counts.errors,
        out_dir.display()
    );
    status
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, allowed) = cli.command.parts();
    let level = if args.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    ExitCode::from(execute(args, allowed).code() as u8)
}
