//! Named parameter sets for the three reproduced figures.
//!
//! Figure captions omit some inputs. fig3 uses beta = 0.5 and ell = 10 and
//! fig4 uses beta = 0.676; both are recovered from the quoted Rayleigh
//! lengths. fig1 puts the detector on the first-order line at lambda = d.

use clap::ValueEnum;
use toml::Value;

use crate::config::Layer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig1,
    Fig3,
    Fig4,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
        }
    }

    pub fn layer(self) -> Layer {
        let mut l = Layer::new();
        let mut f = |k: &str, v: f64| {
            l.insert(k.to_string(), Value::Float(v));
        };
        match self {
            Preset::Fig1 => {
                let beta = 0.7;
                f("electron.beta", beta);
                f("grating.period", 416e-9);
                f("grating.impact", 100e-9);
                f("beam.sigma_b", 300e-6);
                f("beam.count", 1.0);
                // lambda = d(1/beta - cos theta) = d on the first line
                f("detector.theta_deg", (1.0 / beta - 1.0).acos().to_degrees());
                f("detector.phi_deg", 90.0);
            }
            Preset::Fig3 => {
                f("electron.beta", 0.5);
                f("packet.sigma_perp", 100e-9);
                f("grating.period", 10e-6);
                f("grating.impact", 2.7e-6);
                f("detector.theta_deg", 90.0);
                f("detector.phi_deg", 90.0);
                f("feasibility.margin", 0.135);
            }
            Preset::Fig4 => {
                f("electron.beta", 0.676);
                f("packet.sigma_perp", 20e-9);
                f("grating.period", 100e-6);
                f("grating.impact", 33e-6);
                f("detector.theta_deg", 90.0);
                f("detector.phi_deg", 90.0);
                f("feasibility.margin", 0.154);
            }
        }
        let mut i = |k: &str, v: i64| {
            l.insert(k.to_string(), Value::Integer(v));
        };
        match self {
            Preset::Fig1 => {
                i("grating.strips", 100);
                i("azimuthal.points", 181);
            }
            Preset::Fig3 => {
                i("packet.ell", 10);
                i("grating.strips", 3500);
                i("scan.strips_min", 100);
                i("scan.strips_max", 3500);
                i("scan.strips_step", 100);
            }
            Preset::Fig4 => {
                i("packet.ell", 10);
                i("grating.strips", 800);
                i("scan.strips_min", 100);
                i("scan.strips_max", 800);
                i("scan.strips_step", 100);
            }
        }
        if self == Preset::Fig1 {
            l.insert(
                "azimuthal.distances".into(),
                Value::Array(vec![Value::Float(0.3), Value::Float(0.5), Value::String("far".into())]),
            );
        }
        l
    }
}
