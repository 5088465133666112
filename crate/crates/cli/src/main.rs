use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use beamkf::beamspace::BeamformerKind;
use beamkf::harness::{emit, final_epoch_summary, run_experiment, ExperimentConfig};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "beamkf", version, about = "Reduced-rank Kalman channel estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Paper,
    Desk,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSV results.
    Run {
        /// TOML configuration; overrides the preset when both are given.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated dimensions, e.g. 2,4,6.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// Comma-separated beamformers: geb-seq, geb-fixed, dft, identity.
        #[arg(long, value_delimiter = ',')]
        beamformer: Option<Vec<String>>,
        /// Also write plot.py next to the CSV files.
        #[arg(long)]
        plot: bool,
    },
    /// Print a preset configuration as TOML.
    Config {
        #[arg(long, value_enum, default_value = "desk")]
        preset: Preset,
    },
}

fn preset(p: Preset) -> ExperimentConfig {
    match p {
        Preset::Paper => ExperimentConfig::paper(),
        Preset::Desk => ExperimentConfig::desk(),
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Config { preset: p } => {
            print!("{}", preset(p).to_toml()?);
        }
        Command::Run {
            config,
            out,
            preset: p,
            seed,
            trials,
            dims,
            beamformer,
            plot,
        } => {
            let mut cfg = match (&config, p) {
                (Some(path), _) => ExperimentConfig::load(path)
                    .with_context(|| format!("loading {}", path.display()))?,
                (None, Some(p)) => preset(p),
                (None, None) => bail!("either --config or --preset is required"),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(d) = dims {
                cfg.dimensions = d;
            }
            if let Some(kinds) = beamformer {
                cfg.beamformers = kinds
                    .iter()
                    .map(|k| BeamformerKind::parse(k.trim()))
                    .collect::<Result<_, _>>()?;
            }
            cfg.plot_script |= plot;
            cfg.validate()?;

            let start = Instant::now();
            let output = run_experiment(&cfg)?;
            let paths = emit(&output, &out, cfg.plot_script)?;
            eprintln!(
                "{} rows in {:.1} s",
                output.rows.len(),
                start.elapsed().as_secs_f64()
            );
            for s in final_epoch_summary(&output.rows) {
                eprintln!(
                    "{:>9} D={:<3} mse={:.6e} empirical={:.6e}",
                    s.kind.label(),
                    s.dimension,
                    s.mse_mean,
                    s.empirical_mean
                );
            }
            for p in paths {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}
