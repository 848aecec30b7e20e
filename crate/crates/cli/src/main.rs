use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use lrfhss_core::analytic::DataRate;
use lrfhss_core::channel::Environment;
use lrfhss_lab::selftest::run_selftest;
use lrfhss_lab::{parse_config, run, write_figure, ExperimentConfig, FigureId, Mode};

#[derive(Parser)]
#[command(
    name = "lrfhss-lab",
    version,
    about = "Outage experiments for direct-to-satellite LR-FHSS"
)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form outage over the configured sweep.
    Analytic,
    /// Monte-Carlo outage over the configured sweep.
    Simulate,
    /// Joins the analytic and simulate CSVs in the output directory.
    Compare,
    /// Writes the data of one figure recipe (fig4 to fig10).
    Figure { id: FigureId },
    /// Runs quick internal consistency checks.
    Selftest,
}

#[derive(Args)]
struct Overrides {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    realizations: Option<usize>,
    #[arg(long, global = true)]
    area_scale: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    dr: Option<DataRate>,
    #[arg(long, global = true)]
    env: Option<Environment>,
    /// Ten-term series and alpha factor 3.9999.
    #[arg(long, global = true)]
    paper_mode: bool,
}

impl Overrides {
    fn apply(&self, mut cfg: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.realizations {
            cfg.realizations = v;
        }
        if let Some(v) = self.area_scale {
            cfg.area_scale = v;
        }
        if let Some(v) = &self.out {
            cfg.output_path = v.clone();
        }
        if let Some(v) = self.dr {
            cfg.data_rate = v;
        }
        if let Some(v) = self.env {
            cfg.environment = v;
            cfg.fading = None;
        }
        cfg.paper_mode |= self.paper_mode;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("LRFHSS_LAB_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("LRFHSS_LAB_THREADS must be a positive integer, got '{v}'"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn main_inner() -> Result<ExitCode> {
    let cli = Cli::parse();
    init_threads()?;
    let base = match &cli.overrides.config {
        Some(p) => parse_config(p)?,
        None => ExperimentConfig::default(),
    };
    let mut cfg = cli.overrides.apply(base)?;
    match cli.command {
        Command::Analytic | Command::Simulate | Command::Compare => {
            cfg.mode = match cli.command {
                Command::Analytic => Mode::Analytic,
                Command::Simulate => Mode::Simulate,
                _ => Mode::Compare,
            };
            let out = run(&cfg)?;
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if let Some(r) = out.report {
                println!("{r}");
                if r.ends_with("FAIL") {
                    return Ok(ExitCode::from(1));
                }
            }
        }
        Command::Figure { id } => {
            let path = write_figure(id, &cfg)?;
            println!("wrote {}", path.display());
        }
        Command::Selftest => {
            let checks = run_selftest()?;
            let mut ok = true;
            for c in &checks {
                println!("{:<24} {}  {}", c.name, if c.pass { "PASS" } else { "FAIL" }, c.detail);
                ok &= c.pass;
            }
            if !ok {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
