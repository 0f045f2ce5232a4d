use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;
use upsilon_core::run::{cmd_check, cmd_solve, cmd_verify, RunConfig, Status, DEFAULT_SEED};

/// Υ-fixed point solver for Hammerstein integral equations.
#[derive(Parser, Debug)]
#[command(name = "upsilon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the problem assumptions and print a JSON report.
    Check(Common),
    /// Solve and write solution.csv, trace.csv and report.json.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Solve even if the assumption checks fail.
        #[arg(long)]
        force: bool,
    },
    /// Run the seeded contraction and monotonicity sampling checks.
    Verify(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON problem config. Without it the built-in example is used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Example shortcut; overrides the config file.
    #[arg(long)]
    alpha: Option<f64>,
    /// Example shortcut; overrides the config file.
    #[arg(long = "T", id = "T")]
    t_end: Option<f64>,
}

impl Common {
    fn config(&self) -> upsilon_core::Result<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::paper_example(2.0, 2.0),
        };
        Ok(base.with_overrides(self.alpha, self.t_end))
    }
}

fn run(cli: &Cli) -> Status {
    let result = match &cli.command {
        Command::Check(c) => c
            .config()
            .and_then(|cfg| cmd_check(&cfg, c.seed, &mut io::stdout())),
        Command::Solve { common, out, force } => common
            .config()
            .and_then(|cfg| cmd_solve(&cfg, out, *force, common.seed)),
        Command::Verify(c) => c
            .config()
            .and_then(|cfg| cmd_verify(&cfg, c.seed, &mut io::stdout())),
    };
    result.unwrap_or_else(|e| {
        error!("{e}");
        Status::ConfigError
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    ExitCode::from(run(&cli).code() as u8)
}
