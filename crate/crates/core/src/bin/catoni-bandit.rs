use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use catoni_bandits::harness::{
    self, concentration_experiment, output, parse_trace_csv, sweep_to_csv, Emit, RunSpec,
};
use catoni_bandits::hypothesis::HypothesisClass;
use catoni_bandits::Error;

#[derive(Parser)]
#[command(name = "catoni-bandit", version, about = "Robust contextual bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured agent over every seed and write traces.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Repeat a run over the config's `sweep` grid.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Monte-Carlo check of the Catoni deviation bound.
    Concentration {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Realized eluder dimension of a recorded trace.
    Eluder {
        class_file: PathBuf,
        trace_file: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Args)]
struct Common {
    /// Comma-separated seeds, replacing the config's list.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Output directory, replacing the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Multiplier applied to every agent's log factors and radii.
    #[arg(long)]
    constant_scale: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for Emit {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => Emit::Csv,
            Format::Json => Emit::Json,
        }
    }
}

fn load_spec(path: &Path, common: &Common) -> Result<(RunSpec, PathBuf, Emit), Error> {
    let mut spec = RunSpec::load(path)?;
    if let Some(seeds) = &common.seeds {
        spec.seeds = seeds.clone();
    }
    if let Some(c) = common.constant_scale {
        spec.override_constant_scale(c);
    }
    if let Some(f) = common.format {
        spec.emit = f.into();
    }
    spec.validate()?;
    let out = common.out.clone().or_else(|| spec.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let emit = spec.emit;
    Ok((spec, out, emit))
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, common } => {
            let (spec, out, emit) = load_spec(&config, &common)?;
            let runs = harness::run_experiment(&spec)?;
            for run in &runs {
                let last = run.summary.final_row().expect("nonempty summary");
                println!(
                    "{}: final regret {} ± {} over {} seeds",
                    run.label,
                    output::format_g12(last.mean_cum_regret),
                    output::format_g12(last.std_cum_regret),
                    run.traces.len()
                );
            }
            for p in harness::write_runs(&runs, &out, emit)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Sweep { config, common } => {
            let (spec, out, emit) = load_spec(&config, &common)?;
            let parameter = spec
                .sweep
                .as_ref()
                .ok_or_else(|| Error::Config("config has no `sweep` section".into()))?
                .parameter;
            let points = harness::run_sweep(&spec)?;
            let (name, body) = match emit {
                Emit::Csv => ("sweep.csv", sweep_to_csv(parameter, &points)),
                Emit::Json => ("sweep.json", output::to_json(&points)?),
            };
            let p = out.join(name);
            output::write_file(&p, &body)?;
            println!("wrote {}", p.display());
        }
        Command::Concentration { config, common } => {
            let (spec, out, emit) = load_spec(&config, &common)?;
            let cs = spec
                .concentration
                .as_ref()
                .ok_or_else(|| Error::Config("config has no `concentration` section".into()))?;
            let report = concentration_experiment(cs)?;
            println!(
                "theta* = {}, failure fraction = {} over {} trials",
                output::format_g12(report.theta_star),
                output::format_g12(report.failure_fraction),
                report.trials
            );
            let (name, body) = match emit {
                Emit::Csv => {
                    let mut s = String::from("quantile,catoni_error,mean_error\n");
                    for i in 0..report.quantile_levels.len() {
                        s.push_str(&format!(
                            "{},{},{}\n",
                            output::format_g12(report.quantile_levels[i]),
                            output::format_g12(report.catoni_quantiles[i]),
                            output::format_g12(report.mean_quantiles[i])
                        ));
                    }
                    ("concentration.csv", s)
                }
                Emit::Json => ("concentration.json", output::to_json(&report)?),
            };
            let p = out.join(name);
            output::write_file(&p, &body)?;
            println!("wrote {}", p.display());
        }
        Command::Eluder { class_file, trace_file, lambda, out, format } => {
            let class = HypothesisClass::load(&class_file)?;
            let text = std::fs::read_to_string(&trace_file).map_err(|e| Error::Io { path: trace_file.clone(), source: e })?;
            let rows = parse_trace_csv(&text, &trace_file)?;
            let report = harness::eluder_report(&class, &rows, lambda)?;
            println!(
                "{} rounds, realized eluder dimension {}",
                report.rounds,
                output::format_g12(report.dimension)
            );
            if let Some(dir) = out {
                let (name, body) = match format {
                    Format::Csv => ("eluder.csv", harness::eluder_to_csv(&rows, &report)),
                    Format::Json => ("eluder.json", output::to_json(&report)?),
                };
                let p = dir.join(name);
                output::write_file(&p, &body)?;
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io { .. } => 3,
                Error::Config(_) | Error::Parse { .. } | Error::InvalidInput(_) => 2,
                _ => 1,
            })
        }
    }
}
