//! Run configuration.
//!
//! Keys are flat and dotted (`grating.period`, `detector.theta_deg`). Values
//! are layered: built-in defaults, then a preset, then the config file, then
//! `--set key=value` overrides. Lengths are in metres, angles in degrees.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use toml::Value;
use vsp_core::kinematics::{DetectorGeometry, ElectronKinematics, Grating};
use vsp_core::prewave::{BeamProfile, ScanDistance};
use vsp_core::wavepacket::{make_gaussian_packet, make_vortex_packet, mean_momentum_along_z, PacketModel};

use crate::error::{CliError, Result};
use crate::presets::Preset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Azimuthal,
    Polar,
    Nscan,
    Spectrum,
    Feasibility,
    Wigner,
    Moments,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Azimuthal => "azimuthal",
            Experiment::Polar => "polar",
            Experiment::Nscan => "nscan",
            Experiment::Spectrum => "spectrum",
            Experiment::Feasibility => "feasibility",
            Experiment::Wigner => "wigner",
            Experiment::Moments => "moments",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Flat key/value layer.
pub type Layer = BTreeMap<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElectronSpec {
    Beta(f64),
    KineticKev(f64),
}

/// Inclusive angle grid in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl AngleGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.min + step * i as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Physics {
    pub electron: ElectronSpec,
    pub ell: i32,
    pub sigma_perp: f64,
    pub period: f64,
    pub strips: usize,
    pub impact: f64,
    /// `(min, max, step)` for the strip-count scan.
    pub strips_scan: (usize, usize, usize),
    pub sigma_b: f64,
    pub count_nb: f64,
    pub theta: f64,
    pub phi: f64,
    pub order: u32,
    pub polar: AngleGrid,
    pub azimuthal: AngleGrid,
    pub distances: Vec<ScanDistance>,
    pub spectrum_points: usize,
    pub spectrum_lobes: f64,
    pub margin: f64,
    pub wigner_points: usize,
    /// Largest transverse momentum in units of `delta_p`.
    pub wigner_p_max: f64,
}

impl Physics {
    pub fn kinematics(&self) -> vsp_core::Result<ElectronKinematics> {
        match self.electron {
            ElectronSpec::Beta(b) => ElectronKinematics::from_beta(b),
            ElectronSpec::KineticKev(t) => ElectronKinematics::from_kinetic_kev(t),
        }
    }

    pub fn grating(&self) -> vsp_core::Result<Grating> {
        Grating::new(self.period, self.strips, self.impact)
    }

    pub fn packet(&self) -> vsp_core::Result<PacketModel> {
        let p0 = mean_momentum_along_z(&self.kinematics()?);
        if self.ell == 0 {
            make_gaussian_packet(p0, 1.0 / self.sigma_perp)
        } else {
            make_vortex_packet(p0, 1.0 / self.sigma_perp, self.ell)
        }
    }

    pub fn detector(&self) -> vsp_core::Result<DetectorGeometry> {
        DetectorGeometry::far_field(self.theta, self.phi)
    }

    pub fn beam(&self) -> vsp_core::Result<BeamProfile> {
        BeamProfile::new(self.sigma_b, self.count_nb)
    }

    pub fn strip_counts(&self) -> Vec<usize> {
        let (lo, hi, step) = self.strips_scan;
        (lo..=hi).step_by(step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub preset: Option<Preset>,
    pub physics: Physics,
    pub out_dir: PathBuf,
    pub plot: bool,
    /// Recorded in the manifest; every computation is deterministic
    /// quadrature, so it does not change any output.
    pub seed: i64,
    /// Final flat key/value set, echoed into the manifest.
    pub echo: Layer,
}

/// Built-in values for every key.
pub fn defaults() -> Layer {
    let mut l = Layer::new();
    let mut put = |k: &str, v: Value| {
        l.insert(k.to_string(), v);
    };
    put("electron.beta", Value::Float(0.5));
    put("packet.ell", Value::Integer(10));
    put("packet.sigma_perp", Value::Float(100e-9));
    put("grating.period", Value::Float(10e-6));
    put("grating.strips", Value::Integer(100));
    put("grating.impact", Value::Float(2.7e-6));
    put("scan.strips_min", Value::Integer(100));
    put("scan.strips_max", Value::Integer(3500));
    put("scan.strips_step", Value::Integer(100));
    put("beam.sigma_b", Value::Float(300e-6));
    put("beam.count", Value::Float(1.0));
    put("detector.theta_deg", Value::Float(90.0));
    put("detector.phi_deg", Value::Float(90.0));
    put("detector.order", Value::Integer(1));
    put("polar.theta_min_deg", Value::Float(1.0));
    put("polar.theta_max_deg", Value::Float(179.0));
    put("polar.points", Value::Integer(179));
    put("azimuthal.phi_min_deg", Value::Float(0.0));
    put("azimuthal.phi_max_deg", Value::Float(180.0));
    put("azimuthal.points", Value::Integer(181));
    put(
        "azimuthal.distances",
        Value::Array(vec![Value::Float(0.3), Value::Float(0.5), Value::String("far".into())]),
    );
    put("spectrum.points", Value::Integer(401));
    put("spectrum.lobes", Value::Float(3.0));
    put("feasibility.margin", Value::Float(vsp_core::farfield::DEFAULT_MARGIN));
    put("wigner.points", Value::Integer(41));
    put("wigner.p_perp_max", Value::Float(3.0));
    put("run.seed", Value::Integer(0));
    put("output.dir", Value::String("out".into()));
    put("output.plot", Value::Boolean(false));
    l
}

/// Overlays `top` on `base`. Setting either electron energy key clears the
/// other so that the last layer decides.
pub fn overlay(base: &mut Layer, top: &Layer) {
    for (k, v) in top {
        match k.as_str() {
            "electron.beta" => {
                base.remove("electron.kinetic_kev");
            }
            "electron.kinetic_kev" => {
                base.remove("electron.beta");
            }
            _ => {}
        }
        base.insert(k.clone(), v.clone());
    }
}

/// Flattens a parsed TOML document into dotted keys.
pub fn flatten(table: &toml::Table) -> Layer {
    fn walk(prefix: &str, table: &toml::Table, out: &mut Layer) {
        for (k, v) in table {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            match v {
                Value::Table(t) => walk(&key, t, out),
                other => {
                    out.insert(key, other.clone());
                }
            }
        }
    }
    let mut out = Layer::new();
    walk("", table, &mut out);
    out
}

pub fn read_config_file(path: &Path) -> Result<Layer> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(vec![format!("{}: {}", path.display(), e.message())]))?;
    Ok(flatten(&table))
}

/// Parses `key=value` overrides. Values are read as TOML literals, falling
/// back to a bare string.
pub fn parse_overrides(items: &[String]) -> Result<Layer> {
    let mut out = Layer::new();
    let mut errors = Vec::new();
    for item in items {
        let Some((k, v)) = item.split_once('=') else {
            errors.push(format!("override `{item}` is not of the form key=value"));
            continue;
        };
        let k = k.trim();
        let v = v.trim();
        let value = format!("v = {v}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(v.to_string()));
        out.insert(k.to_string(), value);
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(CliError::Config(errors))
    }
}

struct Reader<'a> {
    layer: &'a Layer,
    errors: Vec<String>,
}

impl Reader<'_> {
    fn float(&mut self, key: &str) -> f64 {
        match self.layer.get(key) {
            Some(Value::Float(x)) => *x,
            Some(Value::Integer(i)) => *i as f64,
            Some(other) => {
                self.errors.push(format!("{key}: expected a number, got {other}"));
                f64::NAN
            }
            None => {
                self.errors.push(format!("{key}: missing"));
                f64::NAN
            }
        }
    }

    fn int(&mut self, key: &str) -> i64 {
        match self.layer.get(key) {
            Some(Value::Integer(i)) => *i,
            Some(other) => {
                self.errors.push(format!("{key}: expected an integer, got {other}"));
                0
            }
            None => {
                self.errors.push(format!("{key}: missing"));
                0
            }
        }
    }

    fn count(&mut self, key: &str, min: i64) -> usize {
        let v = self.int(key);
        if v < min {
            self.errors.push(format!("{key}: must be at least {min}, got {v}"));
            return min.max(0) as usize;
        }
        v as usize
    }

    fn positive(&mut self, key: &str) -> f64 {
        let v = self.float(key);
        if !(v > 0.0 && v.is_finite()) && !v.is_nan() {
            self.errors.push(format!("{key}: must be positive and finite, got {v}"));
        }
        v
    }

    fn angle(&mut self, key: &str, lo: f64, hi: f64) -> f64 {
        let v = self.float(key);
        if !(lo..=hi).contains(&v) && !v.is_nan() {
            self.errors.push(format!("{key}: must lie in [{lo}, {hi}] degrees, got {v}"));
        }
        v.to_radians()
    }

    fn string(&mut self, key: &str) -> String {
        match self.layer.get(key) {
            Some(Value::String(s)) => s.clone(),
            Some(other) => {
                self.errors.push(format!("{key}: expected a string, got {other}"));
                String::new()
            }
            None => {
                self.errors.push(format!("{key}: missing"));
                String::new()
            }
        }
    }

    fn boolean(&mut self, key: &str) -> bool {
        match self.layer.get(key) {
            Some(Value::Boolean(b)) => *b,
            Some(other) => {
                self.errors.push(format!("{key}: expected true or false, got {other}"));
                false
            }
            None => {
                self.errors.push(format!("{key}: missing"));
                false
            }
        }
    }

    fn distances(&mut self, key: &str) -> Vec<ScanDistance> {
        let Some(Value::Array(items)) = self.layer.get(key) else {
            self.errors.push(format!("{key}: expected an array of multiples of r_pw or \"far\""));
            return Vec::new();
        };
        let mut out = Vec::new();
        for item in items {
            match item {
                Value::String(s) if s == "far" => out.push(ScanDistance::FarField),
                Value::Float(f) if *f > 0.0 => out.push(ScanDistance::RelativeToPrewave(*f)),
                Value::Integer(i) if *i > 0 => out.push(ScanDistance::RelativeToPrewave(*i as f64)),
                other => self.errors.push(format!("{key}: bad entry {other}")),
            }
        }
        if out.is_empty() {
            self.errors.push(format!("{key}: needs at least one distance"));
        }
        out
    }
}

const KNOWN_KEYS: &[&str] = &[
    "electron.beta",
    "electron.kinetic_kev",
    "packet.ell",
    "packet.sigma_perp",
    "grating.period",
    "grating.strips",
    "grating.impact",
    "scan.strips_min",
    "scan.strips_max",
    "scan.strips_step",
    "beam.sigma_b",
    "beam.count",
    "detector.theta_deg",
    "detector.phi_deg",
    "detector.order",
    "polar.theta_min_deg",
    "polar.theta_max_deg",
    "polar.points",
    "azimuthal.phi_min_deg",
    "azimuthal.phi_max_deg",
    "azimuthal.points",
    "azimuthal.distances",
    "spectrum.points",
    "spectrum.lobes",
    "feasibility.margin",
    "wigner.points",
    "wigner.p_perp_max",
    "run.seed",
    "output.dir",
    "output.plot",
];

/// Validates the merged layer against every module precondition and
/// reports all violations together.
pub fn build(experiment: Experiment, preset: Option<Preset>, layer: Layer) -> Result<RunConfig> {
    let mut r = Reader {
        layer: &layer,
        errors: Vec::new(),
    };
    for k in layer.keys() {
        if !KNOWN_KEYS.contains(&k.as_str()) {
            r.errors.push(format!("{k}: unknown key"));
        }
    }

    let electron = if layer.contains_key("electron.kinetic_kev") {
        ElectronSpec::KineticKev(r.positive("electron.kinetic_kev"))
    } else {
        ElectronSpec::Beta(r.float("electron.beta"))
    };
    let ell = r.int("packet.ell");
    let ell = i32::try_from(ell).unwrap_or_else(|_| {
        r.errors.push(format!("packet.ell: {ell} is out of range"));
        0
    });
    let physics = Physics {
        electron,
        ell,
        sigma_perp: r.positive("packet.sigma_perp"),
        period: r.positive("grating.period"),
        strips: r.count("grating.strips", 1),
        impact: r.positive("grating.impact"),
        strips_scan: (
            r.count("scan.strips_min", 1),
            r.count("scan.strips_max", 1),
            r.count("scan.strips_step", 1),
        ),
        sigma_b: r.positive("beam.sigma_b"),
        count_nb: r.float("beam.count"),
        theta: r.angle("detector.theta_deg", 0.0, 180.0),
        phi: r.angle("detector.phi_deg", -360.0, 360.0),
        order: r.count("detector.order", 1) as u32,
        polar: AngleGrid {
            min: r.angle("polar.theta_min_deg", 0.0, 180.0),
            max: r.angle("polar.theta_max_deg", 0.0, 180.0),
            points: r.count("polar.points", 3),
        },
        azimuthal: AngleGrid {
            min: r.angle("azimuthal.phi_min_deg", -360.0, 360.0),
            max: r.angle("azimuthal.phi_max_deg", -360.0, 360.0),
            points: r.count("azimuthal.points", 3),
        },
        distances: r.distances("azimuthal.distances"),
        spectrum_points: r.count("spectrum.points", 3),
        spectrum_lobes: r.positive("spectrum.lobes"),
        margin: r.float("feasibility.margin"),
        wigner_points: r.count("wigner.points", 1),
        wigner_p_max: r.positive("wigner.p_perp_max"),
    };
    let seed = r.int("run.seed");
    let out_dir = PathBuf::from(r.string("output.dir"));
    let plot = r.boolean("output.plot");
    let mut errors = r.errors;

    // physics preconditions, checked through the library constructors
    let mut check = |what: &str, res: vsp_core::Result<()>| {
        if let Err(e) = res {
            errors.push(format!("{what}: {e}"));
        }
    };
    check("electron", physics.kinematics().map(drop));
    check("grating", physics.grating().map(drop));
    if physics.kinematics().is_ok() {
        check("packet", physics.packet().map(drop));
    }
    check("detector", physics.detector().map(drop));
    check("beam", physics.beam().map(drop));
    let (lo, hi, _) = physics.strips_scan;
    if lo > hi {
        check(
            "scan",
            Err(vsp_core::Error::Domain(format!("strips_min {lo} exceeds strips_max {hi}"))),
        );
    }
    if !(physics.polar.min < physics.polar.max) {
        check("polar", Err(vsp_core::Error::Domain("theta_min must be below theta_max".into())));
    }
    if !(physics.azimuthal.min < physics.azimuthal.max) {
        check("azimuthal", Err(vsp_core::Error::Domain("phi_min must be below phi_max".into())));
    }
    if !(0.1..=0.2).contains(&physics.margin) {
        check(
            "feasibility.margin",
            Err(vsp_core::Error::Domain(format!("must lie in [0.1, 0.2], got {}", physics.margin))),
        );
    }
    let needs_vortex = matches!(experiment, Experiment::Feasibility | Experiment::Moments);
    if needs_vortex && physics.ell == 0 {
        errors.push(format!("packet.ell: the {experiment} experiment needs a vortex packet (ell != 0)"));
    }

    if !errors.is_empty() {
        return Err(CliError::Config(errors));
    }
    Ok(RunConfig {
        experiment,
        preset,
        physics,
        out_dir,
        plot,
        seed,
        echo: layer,
    })
}
