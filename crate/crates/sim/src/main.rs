use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use urllc_core::duplexing::{CellSchedule, DuplexMode};
use urllc_core::latency::{dl_timeline, ul_timeline};
use urllc_core::traffic::generate_arrivals;
use urllc_sim::export::{trace_csv, write_atomic};
use urllc_sim::{presets, run_experiment, Experiment, RunOptions, SimError};

#[derive(Parser)]
#[command(name = "urllc-sim", version, about = "Multi-cell 5G NR duplexing latency simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Source {
    /// Config or experiment file (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment (see `presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Set a config key, e.g. `duplex.mode=fdd`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Source {
    fn load(&self, default_preset: Option<&str>) -> anyhow::Result<Experiment> {
        let mut exp = match (&self.config, self.preset.as_deref().or(default_preset)) {
            (Some(path), _) => Experiment::load(path)?,
            (None, Some(name)) => {
                let text = presets::get(name).with_context(|| {
                    format!("unknown preset `{name}` (available: {})", presets::names().collect::<Vec<_>>().join(", "))
                })?;
                Experiment::from_toml(text, Path::new("."))?
            }
            (None, None) => bail!("give --config PATH or --preset NAME"),
        };
        for o in &self.overrides {
            exp.apply_override(o)?;
        }
        if let Some(seed) = self.seed {
            exp.apply_override(&format!("seed={seed}"))?;
        }
        Ok(exp)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a config or sweep and write CSV artifacts.
    Run {
        #[command(flatten)]
        src: Source,
        /// Replications per sweep point.
        #[arg(long)]
        replications: Option<u32>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Concurrent runs (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Skip per-packet records and schedule logs.
        #[arg(long)]
        summary_only: bool,
    },
    /// Check a config and print it with every default filled in.
    Validate {
        #[command(flatten)]
        src: Source,
    },
    /// Print the single-packet timeline of a fixed-schedule config.
    Timeline {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_enum, default_value_t = Dir::Dl)]
        dir: Dir,
        /// Arrival symbol.
        #[arg(long, default_value_t = urllc_core::latency::REFERENCE_ARRIVAL)]
        arrival: u64,
        /// Failed attempts before the successful one.
        #[arg(long, default_value_t = 1)]
        failures: u32,
    },
    /// List built-in presets, or print one.
    Presets {
        /// Preset to print.
        name: Option<String>,
    },
    /// Write the generated arrival trace of a config as CSV.
    Traffic {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value = "arrivals.csv")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Dl,
    Ul,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.downcast_ref::<SimError>() {
                Some(SimError::Config(errs)) => {
                    eprintln!("error: invalid configuration");
                    for f in &errs.0 {
                        eprintln!("  {f}");
                    }
                }
                _ => eprintln!("error: {e:#}"),
            }
            ExitCode::FAILURE
        }
    }
}

fn single_point(exp: &Experiment) -> anyhow::Result<urllc_sim::experiment::Point> {
    let mut points = exp.points().map_err(SimError::from)?;
    if points.len() != 1 {
        bail!("this command needs a single configuration; the experiment sweeps {} points", points.len());
    }
    Ok(points.remove(0))
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Run { src, replications, out, jobs, summary_only } => {
            let mut exp = src.load(None)?;
            if let Some(r) = replications {
                exp.spec.replications = r;
            }
            if summary_only {
                exp.spec.records = false;
            }
            let m = run_experiment(&exp, &RunOptions { out: out.clone(), jobs })?;
            println!("{}: {} files written to {}", m.experiment, m.files.len() + 1, out.display());
        }
        Cmd::Validate { src } => {
            let exp = src.load(None)?;
            let points = exp.points().map_err(SimError::from)?;
            print!("{}", exp.to_toml().map_err(SimError::from)?);
            eprintln!("ok: {} sweep point(s)", points.len());
        }
        Cmd::Timeline { src, dir, arrival, failures } => {
            let p = single_point(&src.load(Some("fig2"))?)?;
            let sim = &p.resolved.sim;
            let sched = match &sim.duplex {
                DuplexMode::StaticTdd { pattern } => CellSchedule::repeating(sim.tti(), pattern.clone()),
                DuplexMode::Fdd { .. } => CellSchedule::paired(sim.tti()),
                _ => bail!("timelines need a fixed schedule (duplex.mode = \"static_tdd\" or \"fdd\")"),
            };
            let t = match dir {
                Dir::Dl => dl_timeline(&sim.delays, &sched, arrival, failures),
                Dir::Ul => ul_timeline(&sim.delays, &sched, arrival, failures, sim.ul_scheme),
            }?;
            print!("{t}");
            println!("total: {:.2} us", sim.numerology().symbols_to_us(t.breakdown.total_symbols));
        }
        Cmd::Presets { name: None } => {
            for (name, text) in presets::PRESETS {
                println!("{name:8} {}", presets::description(text));
            }
        }
        Cmd::Presets { name: Some(name) } => {
            print!("{}", presets::get(&name).with_context(|| format!("unknown preset `{name}`"))?);
        }
        Cmd::Traffic { src, out } => {
            let p = single_point(&src.load(None)?)?;
            let sim = &p.resolved.sim;
            let arrivals = match &p.resolved.arrivals {
                Some(a) => a.clone(),
                None => generate_arrivals(&sim.traffic, sim.n_cells, &sim.numerology(), sim.horizon_symbols, sim.seed),
            };
            write_atomic(&out, &trace_csv(&arrivals)).map_err(|e| SimError::io(&out, e))?;
            println!("{} packets written to {}", arrivals.len(), out.display());
        }
    }
    Ok(())
}
