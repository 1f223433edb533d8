//! Command-line front end: configuration, presets, parallel sweeps, CSV and
//! SVG output, and run manifests.

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod plot;
pub mod presets;
pub mod sweep;
pub mod table;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use toml::Value;

pub use config::{Experiment, RunConfig};
pub use error::{CliError, Result};
pub use experiments::Outcome;
pub use manifest::RunManifest;
pub use presets::Preset;

/// Command-line inputs before layering.
#[derive(Debug, Clone, Default)]
pub struct Request {
    pub config_file: Option<PathBuf>,
    pub preset: Option<Preset>,
    pub overrides: Vec<String>,
    pub out: Option<PathBuf>,
    pub plot: bool,
}

/// Layers defaults, preset, file and overrides, then validates.
pub fn load(experiment: Experiment, req: &Request) -> Result<RunConfig> {
    let mut layer = config::defaults();
    if let Some(p) = req.preset {
        config::overlay(&mut layer, &p.layer());
    }
    if let Some(path) = &req.config_file {
        config::overlay(&mut layer, &config::read_config_file(path)?);
    }
    config::overlay(&mut layer, &config::parse_overrides(&req.overrides)?);
    if let Some(out) = &req.out {
        layer.insert("output.dir".into(), Value::String(out.display().to_string()));
    }
    if req.plot {
        layer.insert("output.plot".into(), Value::Boolean(true));
    }
    config::build(experiment, req.preset, layer)
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub outcome: Outcome,
    pub manifest: RunManifest,
    pub files: Vec<PathBuf>,
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(CliError::io(path))
}

/// Runs the experiment and writes `<experiment>.csv`, `manifest.json` and,
/// when requested, `<experiment>.svg` into the output directory.
pub fn run(cfg: &RunConfig, workers: usize) -> Result<RunOutput> {
    let start = Instant::now();
    let mut outcome = experiments::execute(cfg, workers)?;
    let dir = &cfg.out_dir;
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;

    let name = cfg.experiment.name();
    let mut checksums = BTreeMap::new();
    let mut files = Vec::new();
    let csv = outcome.table.to_csv()?;
    let csv_name = format!("{name}.csv");
    write(&dir.join(&csv_name), &csv)?;
    checksums.insert(csv_name.clone(), manifest::sha256_hex(&csv));
    files.push(dir.join(csv_name));

    if cfg.plot {
        match &outcome.plot {
            Some(plot) => {
                let svg = plot.to_svg()?;
                let svg_name = format!("{name}.svg");
                write(&dir.join(&svg_name), svg.as_bytes())?;
                checksums.insert(svg_name.clone(), manifest::sha256_hex(svg.as_bytes()));
                files.push(dir.join(svg_name));
            }
            None => outcome.notes.push(format!("the {name} experiment has no plot")),
        }
    }

    let config = cfg
        .echo
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::to_value(v).unwrap_or(serde_json::Value::Null)))
        .collect();
    let manifest = RunManifest {
        artifact: "vsp".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: name.into(),
        preset: cfg.preset.map(|p| p.name().to_string()),
        config,
        constants: manifest::Constants {
            lambda_c_m: vsp_core::kinematics::LAMBDA_C,
            c_mu: vsp_core::farfield::C_MU,
            c_q1: vsp_core::farfield::C_Q1,
            margin: cfg.physics.margin,
            spectral_exponent: vsp_core::farfield::SPECTRAL_EXPONENT,
            beam_nodes: vsp_core::prewave::BEAM_NODES,
        },
        seed: cfg.seed,
        workers,
        wall_time_s: start.elapsed().as_secs_f64(),
        files: checksums,
        summary: outcome.summary.clone(),
    };
    let mut json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io {
        path: dir.join("manifest.json"),
        source: std::io::Error::other(e),
    })?;
    json.push('\n');
    let manifest_path = dir.join("manifest.json");
    write(&manifest_path, json.as_bytes())?;
    files.push(manifest_path);
    Ok(RunOutput {
        outcome,
        manifest,
        files,
    })
}
