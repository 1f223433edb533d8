use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use vsp_cli::{load, run, Experiment, Preset, Request};

/// Smith-Purcell radiation from vortex electron packets.
#[derive(Debug, Parser)]
#[command(name = "vsp", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Experiment,
    /// TOML file with flat dotted keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Figure preset applied before the config file.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG plot.
    #[arg(long)]
    plot: bool,
    /// Worker threads for parameter sweeps.
    #[arg(long, env = "VSP_WORKERS")]
    workers: Option<usize>,
    /// Override a key, e.g. `--set grating.strips=500`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let req = Request {
        config_file: args.config,
        preset: args.preset,
        overrides: args.set,
        out: args.out,
        plot: args.plot,
    };
    let workers = args.workers.unwrap_or_else(vsp_cli::sweep::default_workers);
    let result = load(args.experiment, &req).and_then(|cfg| run(&cfg, workers));
    match result {
        Ok(out) => {
            for note in &out.outcome.notes {
                println!("{note}");
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
