use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use frsr_cli::{commands, exit, CliError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "frsr", version, about = "Fixed-return versus profit-sharing contract analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the indifference share and rate for each scenario
    Solve(Common),
    /// Check the ordering claims over a scenario grid
    Verify(Common),
    /// Tabulate FR and SR payoffs, variances and utilities
    Compare(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mc_samples: Option<usize>,
    /// Worker threads; 0 picks one per core
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Raise the cap on the number of expanded scenarios
    #[arg(long)]
    max_scenarios: Option<usize>,
    /// Print the effective config and exit
    #[arg(long)]
    dump_config: bool,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                RunConfig::parse(&text)?
            }
            None if self.dump_config => RunConfig::default(),
            None => return Err(CliError::Config("--config <path> is required".into())),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(n) = self.mc_samples {
            cfg.mc_samples = n;
        }
        if let Some(n) = self.max_scenarios {
            cfg.max_scenarios = n;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.display().to_string());
        }
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let common = match &cli.command {
        Command::Solve(c) | Command::Verify(c) | Command::Compare(c) => c,
    };
    let cfg = common.load()?;
    if common.dump_config {
        print!("{}", cfg.dump());
        return Ok(exit::OK);
    }
    let out = PathBuf::from(cfg.out.clone().unwrap_or_else(|| "out".into()));
    match &cli.command {
        Command::Solve(_) => commands::solve(&cfg, &out),
        Command::Verify(c) => commands::verify(&cfg, &out, c.jobs),
        Command::Compare(_) => commands::compare(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { exit::OK as u8 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
