use std::path::PathBuf;
use std::process::ExitCode;

use caviar::commands::{cmd_evaluate, cmd_generate, cmd_report, cmd_train};
use caviar::config::{self, ExperimentConfig, CONFIG_HELP};
use caviar::CliError;
use clap::{Args, Parser, Subcommand};

/// UAV beam-selection simulator: dataset generation, Q-learning training,
/// policy evaluation and trace reports.
#[derive(Parser)]
#[command(name = "caviar", version, after_long_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing
    #[arg(long)]
    out: PathBuf,
    /// Master seed, replaces the config's `seed`
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config value, e.g. --set channel.nlos_sigma=0.6
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        config::load(&self.config, &self.set, self.seed)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a dataset: manifest.json and one JSON-lines file per episode
    Generate(RunArgs),
    /// Train the Q-learning agent; writes policy.json and learning_curve.csv
    Train(RunArgs),
    /// Compare oracle, baseline and (with --policy) the trained agent;
    /// writes trace.csv and summary.json
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        /// Trained policy file from `caviar train`
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Summarize a trace.csv (or a directory containing one)
    Report { trace: PathBuf },
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate(args) => {
            let counts = cmd_generate(&args.load()?, &args.out)?;
            println!(
                "episodes: {}  scenes: {}  valid channels: {}",
                counts.episodes, counts.scenes, counts.valid_channels
            );
        }
        Command::Train(args) => {
            let outcome = cmd_train(&args.load()?, &args.out)?;
            match outcome.curve.last() {
                Some(s) => println!(
                    "trained {} episodes; final mean reward {:.4} (epsilon {:.3})",
                    outcome.curve.len(),
                    s.mean_reward,
                    s.epsilon
                ),
                None => println!("trained 0 episodes"),
            }
        }
        Command::Evaluate { run, policy } => {
            let s = cmd_evaluate(&run.load()?, policy.as_deref(), &run.out)?;
            println!("{:<10} {:>9} {:>9} {:>9}", "policy", "mean", "LOS", "NLOS");
            for m in std::iter::once(&s.optimum).chain(&s.policies) {
                println!("{:<10} {:>9.4} {:>9} {:>9}", m.name, m.mean, fmt_opt(m.mean_los), fmt_opt(m.mean_nlos));
            }
        }
        Command::Report { trace } => match cmd_report(&trace)? {
            Some(r) => println!("{r}"),
            None => println!("no steps"),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
