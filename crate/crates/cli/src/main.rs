use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qedyn_cli::{run, RunConfig};

#[derive(Parser)]
#[command(
    name = "qedyn",
    version,
    about = "Non-Markovian spontaneous emission near a structured reservoir"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Verb {
    /// Write λ(ω) on the configured grid (and the conductivity table).
    Spectrum(Common),
    /// Tabulate the memory kernel K(τ).
    Kernel(Common),
    /// Fit Lorentzians to the spectrum.
    Fit(Common),
    /// Propagate one configuration point.
    Simulate(Common),
    /// Propagate every point of the sweep axis.
    Sweep(Common),
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn load(common: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::from_path(&common.config)?;
    if let Some(out) = &common.output {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = (|| -> anyhow::Result<()> {
        match &cli.verb {
            Verb::Spectrum(c) => {
                for p in run::spectrum(&load(c)?)? {
                    println!("{}", p.display());
                }
            }
            Verb::Kernel(c) => println!("{}", run::kernel(&load(c)?, c.jobs)?.display()),
            Verb::Fit(c) => println!("{}", run::fit(&load(c)?)?.display()),
            Verb::Simulate(c) => report(&run::simulate(&load(c)?, c.jobs)?),
            Verb::Sweep(c) => report(&run::sweep(&load(c)?, c.jobs)?),
        }
        Ok(())
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn report(rows: &[run::SummaryRow]) {
    println!("{}", run::SUMMARY_HEADER);
    for r in rows {
        println!("{}", r.to_csv_line());
    }
}
