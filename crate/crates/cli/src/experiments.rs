//! Experiment drivers. Each turns a validated configuration into a fixed
//! schema table plus an optional plot and a few summary numbers.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use vsp_core::farfield::{
    charge_intensity_line, charge_intensity_spectral, feasibility_window_with_margin, polar_peaks,
    quadrupole_spreading_ratio, total_line_intensity,
};
use vsp_core::kinematics::{sp_frequency, sp_wavelength, DetectorGeometry};
use vsp_core::numerics::{oracle_moment_quadrature, MomentKind, MomentOracle};
use vsp_core::prewave::{beam_averaged_intensity, fwhm, ScanDistance};
use vsp_core::wavepacket::{packet_moments, rayleigh_length, wigner};

use crate::config::{Experiment, Physics, RunConfig};
use crate::error::{CliError, Result};
use crate::plot::{Axes, Plot, Series};
use crate::sweep::sweep;
use crate::table::{Cell, Table};

pub const NSCAN_COLUMNS: &[&str] = &["N", "W_e", "W_eQ2", "total"];
pub const POLAR_COLUMNS: &[&str] = &["row", "theta", "W_e", "W_eQ1", "W_eQ2", "total"];
pub const AZIMUTHAL_COLUMNS: &[&str] = &["series", "r_over_rpw", "phi", "intensity"];
pub const SPECTRUM_COLUMNS: &[&str] = &["omega", "lambda", "intensity"];
pub const FEASIBILITY_COLUMNS: &[&str] = &["n_min", "n_max", "L_max", "z_R", "ratio_Q2_at_n_max", "window_empty"];
pub const WIGNER_COLUMNS: &[&str] = &["p_perp", "wigner", "density", "ratio"];
pub const MOMENTS_COLUMNS: &[&str] = &["quantity", "closed_form", "quadrature", "rel_diff"];

pub fn columns(e: Experiment) -> &'static [&'static str] {
    match e {
        Experiment::Nscan => NSCAN_COLUMNS,
        Experiment::Polar => POLAR_COLUMNS,
        Experiment::Azimuthal => AZIMUTHAL_COLUMNS,
        Experiment::Spectrum => SPECTRUM_COLUMNS,
        Experiment::Feasibility => FEASIBILITY_COLUMNS,
        Experiment::Wigner => WIGNER_COLUMNS,
        Experiment::Moments => MOMENTS_COLUMNS,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub plot: Option<Plot>,
    pub summary: BTreeMap<String, f64>,
    /// Human-readable remarks printed after the run.
    pub notes: Vec<String>,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Self {
            table,
            plot: None,
            summary: BTreeMap::new(),
            notes: Vec::new(),
        }
    }
}

pub fn execute(cfg: &RunConfig, workers: usize) -> Result<Outcome> {
    let p = &cfg.physics;
    match cfg.experiment {
        Experiment::Nscan => nscan(p, workers),
        Experiment::Polar => polar(p, workers),
        Experiment::Azimuthal => azimuthal(p, workers),
        Experiment::Spectrum => spectrum(p, workers),
        Experiment::Feasibility => feasibility(p),
        Experiment::Wigner => wigner_table(p, workers),
        Experiment::Moments => moments(p),
    }
}

/// `W_e(N = 100, theta = phi = pi/2)`, the unit of every intensity column.
pub fn anchor(p: &Physics) -> Result<f64> {
    let at = CliError::at("normalisation anchor (N = 100, theta = phi = 90 deg)");
    let g = p.grating().and_then(|g| g.with_strips(100)).map_err(CliError::at("anchor grating"))?;
    let kin = p.kinematics().map_err(CliError::at("kinematics"))?;
    let det = DetectorGeometry::far_field(FRAC_PI_2, FRAC_PI_2).map_err(CliError::at("anchor detector"))?;
    charge_intensity_line(&g, &kin, &det, p.order).map_err(at)
}

fn nscan(p: &Physics, workers: usize) -> Result<Outcome> {
    let unit = anchor(p)?;
    let kin = p.kinematics().map_err(CliError::at("kinematics"))?;
    let packet = p.packet().map_err(CliError::at("packet"))?;
    let det = p.detector().map_err(CliError::at("detector"))?;
    let base = p.grating().map_err(CliError::at("grating"))?;
    let counts = p.strip_counts();
    let rows = sweep(&counts, workers, |&n| {
        let at = CliError::at(format!("N = {n}"));
        let g = base.with_strips(n).map_err(CliError::at(format!("N = {n}")))?;
        total_line_intensity(&g, &packet, &kin, &det, p.order).map_err(at)
    })?;
    let mut t = Table::new(NSCAN_COLUMNS);
    for (n, li) in counts.iter().zip(&rows) {
        t.push(vec![
            Cell::Int(*n as i64),
            Cell::Num(li.w_e / unit),
            Cell::Num(li.w_eq2 / unit),
            Cell::Num(li.total / unit),
        ]);
    }
    let mut out = Outcome::new(t);
    let series = |name: &str, f: &dyn Fn(usize) -> f64| Series {
        name: name.into(),
        points: counts.iter().enumerate().map(|(i, &n)| (n as f64, f(i))).collect(),
    };
    out.plot = Some(Plot {
        title: "Line intensity against strip count".into(),
        x_label: "N".into(),
        y_label: "W / W_e(N=100)".into(),
        axes: Axes::LogLog,
        series: vec![
            series("W_e", &|i| rows[i].w_e / unit),
            series("W_eQ2", &|i| rows[i].w_eq2 / unit),
            series("total", &|i| rows[i].total / unit),
        ],
        marks: Vec::new(),
    });
    if counts.len() >= 2 {
        let xs: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
        out.summary.insert("slope_W_e".into(), loglog_slope(&xs, &rows.iter().map(|r| r.w_e).collect::<Vec<_>>()));
        if rows.iter().all(|r| r.w_eq2 > 0.0) {
            out.summary
                .insert("slope_W_eQ2".into(), loglog_slope(&xs, &rows.iter().map(|r| r.w_eq2).collect::<Vec<_>>()));
        }
    }
    Ok(out)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn polar(p: &Physics, workers: usize) -> Result<Outcome> {
    let unit = anchor(p)?;
    let kin = p.kinematics().map_err(CliError::at("kinematics"))?;
    let packet = p.packet().map_err(CliError::at("packet"))?;
    let g = p.grating().map_err(CliError::at("grating"))?;
    let thetas = p.polar.values();
    let rows = sweep(&thetas, workers, |&theta| {
        let at = format!("theta = {:.6} deg", theta.to_degrees());
        let det = DetectorGeometry::far_field(theta, p.phi).map_err(CliError::at(at.clone()))?;
        total_line_intensity(&g, &packet, &kin, &det, p.order).map_err(CliError::at(at))
    })?;
    let mut t = Table::new(POLAR_COLUMNS);
    for (theta, li) in thetas.iter().zip(&rows) {
        t.push(vec![
            Cell::Text("grid".into()),
            Cell::Num(*theta),
            Cell::Num(li.w_e / unit),
            Cell::Num(li.w_eq1 / unit),
            Cell::Num(li.w_eq2 / unit),
            Cell::Num(li.total / unit),
        ]);
    }
    let peaks = polar_peaks(&g, &packet, &kin, p.phi, p.order).map_err(CliError::at("polar peak search"))?;
    let e = Cell::Empty;
    t.push(vec![
        Cell::Text("peak_W_e".into()),
        Cell::Num(peaks.theta_w_e),
        Cell::Num(peaks.w_e_max / unit),
        e.clone(),
        e.clone(),
        e.clone(),
    ]);
    t.push(vec![
        Cell::Text("peak_total".into()),
        Cell::Num(peaks.theta_total),
        e.clone(),
        e.clone(),
        e.clone(),
        Cell::Num(peaks.total_max / unit),
    ]);
    t.push(vec![Cell::Text("shift".into()), Cell::Num(peaks.shift()), e.clone(), e.clone(), e.clone(), e]);

    let mut out = Outcome::new(t);
    let deg: Vec<f64> = thetas.iter().map(|t| t.to_degrees()).collect();
    out.plot = Some(Plot {
        title: "Polar distribution of the first line".into(),
        x_label: "theta (deg)".into(),
        y_label: "W / W_e(N=100)".into(),
        axes: Axes::Linear,
        series: vec![
            Series {
                name: "W_e".into(),
                points: deg.iter().zip(&rows).map(|(&x, r)| (x, r.w_e / unit)).collect(),
            },
            Series {
                name: "total".into(),
                points: deg.iter().zip(&rows).map(|(&x, r)| (x, r.total / unit)).collect(),
            },
        ],
        marks: vec![
            (peaks.theta_w_e.to_degrees(), peaks.w_e_max / unit),
            (peaks.theta_total.to_degrees(), peaks.total_max / unit),
        ],
    });
    out.summary.insert("theta_peak_W_e_deg".into(), peaks.theta_w_e.to_degrees());
    out.summary.insert("theta_peak_total_deg".into(), peaks.theta_total.to_degrees());
    out.summary.insert("shift_deg".into(), peaks.shift().to_degrees());
    out.notes.push(format!(
        "polar maximum moves from {:.3} deg to {:.3} deg (shift {:+.3} deg)",
        peaks.theta_w_e.to_degrees(),
        peaks.theta_total.to_degrees(),
        peaks.shift().to_degrees()
    ));
    Ok(out)
}

fn distance_label(d: ScanDistance) -> (String, Cell) {
    match d {
        ScanDistance::FarField => ("far".into(), Cell::Text("inf".into())),
        ScanDistance::RelativeToPrewave(f) => (format!("r={f}r_pw"), Cell::Num(f)),
    }
}

fn azimuthal(p: &Physics, workers: usize) -> Result<Outcome> {
    let kin = p.kinematics().map_err(CliError::at("kinematics"))?;
    let g = p.grating().map_err(CliError::at("grating"))?;
    let beam = p.beam().map_err(CliError::at("beam"))?;
    let omega = sp_frequency(&g, &kin, p.theta, p.order).map_err(CliError::at("line frequency"))?;
    let lambda = 2.0 * PI / omega;
    let r_pw = beam.prewave_radius(lambda).map_err(CliError::at("pre-wave radius"))?;
    let phis = p.azimuthal.values();
    let points: Vec<(usize, f64)> = (0..p.distances.len())
        .flat_map(|s| phis.iter().map(move |&phi| (s, phi)))
        .collect();
    let values = sweep(&points, workers, |&(s, phi)| {
        let at = format!("{} phi = {:.6} deg", distance_label(p.distances[s]).0, phi.to_degrees());
        let det = match p.distances[s] {
            ScanDistance::FarField => DetectorGeometry::far_field(p.theta, phi),
            ScanDistance::RelativeToPrewave(f) => DetectorGeometry::at_distance(p.theta, phi, f * r_pw),
        }
        .map_err(CliError::at(at.clone()))?;
        beam_averaged_intensity(&beam, &g, &kin, &det, omega).map_err(CliError::at(at))
    })?;

    let mut t = Table::new(AZIMUTHAL_COLUMNS);
    let mut out_series = Vec::new();
    let mut summary = BTreeMap::new();
    let mut notes = Vec::new();
    for (s, chunk) in values.chunks(phis.len()).enumerate() {
        let (label, r_cell) = distance_label(p.distances[s]);
        let peak = chunk.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(peak > 0.0) {
            return Err(CliError::Numerical {
                point: label,
                source: vsp_core::Error::Numerical {
                    message: "azimuthal profile has no positive intensity".into(),
                    estimate: peak,
                    error: f64::NAN,
                },
            });
        }
        let norm: Vec<f64> = chunk.iter().map(|v| v / peak).collect();
        for (phi, v) in phis.iter().zip(&norm) {
            t.push(vec![Cell::Text(label.clone()), r_cell.clone(), Cell::Num(*phi), Cell::Num(*v)]);
        }
        match fwhm(&phis, &norm) {
            Ok(w) => {
                summary.insert(format!("fwhm_deg[{label}]"), w.to_degrees());
                notes.push(format!("{label}: FWHM {:.6} deg", w.to_degrees()));
            }
            Err(e) => notes.push(format!("{label}: no FWHM inside the grid ({e})")),
        }
        out_series.push(Series {
            name: label,
            points: phis.iter().zip(&norm).map(|(&x, &y)| (x.to_degrees(), y)).collect(),
        });
    }
    summary.insert("prewave_radius_m".into(), r_pw);
    let mut out = Outcome::new(t);
    out.summary = summary;
    out.notes = notes;
    out.plot = Some(Plot {
        title: "Azimuthal distribution".into(),
        x_label: "phi (deg)".into(),
        y_label: "intensity (peak = 1)".into(),
        axes: Axes::Linear,
        series: out_series,
        marks: Vec::new(),
    });
    Ok(out)
}

fn spectrum(p: &Physics, workers: usize) -> Result<Outcome> {
    let unit = anchor(p)?;
    let kin = p.kinematics().map_err(CliError::at("kinematics"))?;
    let g = p.grating().map_err(CliError::at("grating"))?;
    let det = p.detector().map_err(CliError::at("detector"))?;
    let omega_n = sp_frequency(&g, &kin, p.theta, p.order).map_err(CliError::at("line frequency"))?;
    // comb zeros sit omega_n / (n N) apart
    let half = p.spectrum_lobes * omega_n / (p.order as f64 * g.strips() as f64);
    let m = p.spectrum_points;
    let omegas: Vec<f64> = (0..m)
        .map(|i| omega_n - half + 2.0 * half * i as f64 / (m - 1) as f64)
        .collect();
    if omegas[0] <= 0.0 {
        return Err(CliError::Config(vec![format!(
            "spectrum.lobes: window reaches non-positive frequency ({:e} rad/m)",
            omegas[0]
        )]));
    }
    let values = sweep(&omegas, workers, |&w| {
        charge_intensity_spectral(&g, &kin, w, &det).map_err(CliError::at(format!("omega = {w:e} rad/m")))
    })?;
    let mut t = Table::new(SPECTRUM_COLUMNS);
    for (w, v) in omegas.iter().zip(&values) {
        t.push(vec![Cell::Num(*w), Cell::Num(2.0 * PI / w), Cell::Num(v / unit)]);
    }
    let mut out = Outcome::new(t);
    out.plot = Some(Plot {
        title: format!("Spectrum around line n = {}", p.order),
        x_label: "omega (rad/m)".into(),
        y_label: "dW/domega (a.u.)".into(),
        axes: Axes::Linear,
        series: vec![Series {
            name: "W_e".into(),
            points: omegas.iter().zip(&values).map(|(&x, &y)| (x, y / unit)).collect(),
        }],
        marks: Vec::new(),
    });
    out.summary.insert("omega_line".into(), omega_n);
    Ok(out)
}

fn feasibility(p: &Physics) -> Result<Outcome> {
    let kin = p.kinematics().map_err(CliError::at("kinematics"))?;
    let packet = p.packet().map_err(CliError::at("packet"))?;
    let g = p.grating().map_err(CliError::at("grating"))?;
    let lambda = sp_wavelength(&g, &kin, p.theta, p.order).map_err(CliError::at("line wavelength"))?;
    let w = feasibility_window_with_margin(&packet, lambda, p.margin).map_err(CliError::at("feasibility window"))?;
    let z_r = rayleigh_length(&packet, &kin).map_err(CliError::at("Rayleigh length"))?;
    let l_max = w.n_max * g.period();
    let n_top = (w.n_max.floor() as usize).max(1);
    let at_top = g.with_strips(n_top).map_err(CliError::at(format!("N = {n_top}")))?;
    let ratio = quadrupole_spreading_ratio(&at_top, &packet, &kin, p.theta)
        .map_err(CliError::at(format!("spreading ratio at N = {n_top}")))?;
    let mut t = Table::new(FEASIBILITY_COLUMNS);
    t.push(vec![
        Cell::Num(w.n_min),
        Cell::Num(w.n_max),
        Cell::Num(l_max),
        Cell::Num(z_r),
        Cell::Num(ratio),
        Cell::Int(w.is_empty() as i64),
    ]);
    let mut out = Outcome::new(t);
    out.summary.insert("n_min".into(), w.n_min);
    out.summary.insert("n_max".into(), w.n_max);
    out.summary.insert("L_max_m".into(), l_max);
    out.summary.insert("z_R_m".into(), z_r);
    out.notes.push(format!(
        "window {:.1} << N << {:.1} (margin {}), L_max = {:.4e} m, z_R = {:.4e} m, W_eQ2/W_e at N_max = {:.4}",
        w.n_min, w.n_max, p.margin, l_max, z_r, ratio
    ));
    if w.is_empty() {
        out.notes.push(
            "the window is empty: the packet is too narrow for this wavelength, so no grating length \
             separates the coherent regime from the onset of spreading"
                .into(),
        );
    }
    Ok(out)
}

fn wigner_table(p: &Physics, workers: usize) -> Result<Outcome> {
    let packet = p.packet().map_err(CliError::at("packet"))?;
    let dp = packet.delta_p();
    let p0 = packet.mean_momentum();
    let m = p.wigner_points;
    // cell centres keep the vortex node at p_perp = 0 off the grid
    let s: Vec<f64> = (0..m).map(|i| p.wigner_p_max * (i as f64 + 0.5) / m as f64).collect();
    let rows = sweep(&s, workers, |&si| {
        let pp = p0 + Vector3::new(si * dp, 0.0, 0.0);
        let n = wigner(&packet, &Vector3::zeros(), &pp, 0.0)
            .map_err(CliError::at(format!("p_perp = {si} delta_p")))?;
        Ok((n, packet.density(&pp)))
    })?;
    let mut t = Table::new(WIGNER_COLUMNS);
    for (si, (n, rho)) in s.iter().zip(&rows) {
        t.push(vec![Cell::Num(si * dp), Cell::Num(*n), Cell::Num(*rho), Cell::Num(n / rho)]);
    }
    let mut out = Outcome::new(t);
    let ratios: Vec<f64> = rows.iter().map(|(n, r)| n / r).collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    out.summary.insert("ratio_variation".into(), (hi - lo) / hi.abs().max(lo.abs()));
    out.plot = Some(Plot {
        title: "Wigner function at x = 0 against |psi(p)|^2".into(),
        x_label: "p_perp / delta_p".into(),
        y_label: "n(0, p, 0)".into(),
        axes: Axes::Linear,
        series: vec![Series {
            name: "n".into(),
            points: s.iter().zip(&rows).map(|(&x, (n, _))| (x, *n)).collect(),
        }],
        marks: Vec::new(),
    });
    Ok(out)
}

fn rel_diff(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / a.abs().max(scale)
}

/// Closed-form moments against brute-force quadrature of `psi(p)`.
///
/// The quadrature quadrupole is divided by `|ell|`: the closed form uses the
/// width parameter `sigma_perp`, while the r.m.s. transverse radius of the
/// vortex profile is `sqrt(|ell|) sigma_perp`.
fn moments(p: &Physics) -> Result<Outcome> {
    let packet = p.packet().map_err(CliError::at("packet"))?;
    let closed = packet_moments(&packet, 0.0).map_err(CliError::at("closed-form moments"))?;
    let oracle = |k| oracle_moment_quadrature(&packet, k).map_err(CliError::at(format!("{k:?} quadrature")));
    let MomentOracle::Normalization(norm) = oracle(MomentKind::Normalization)? else {
        unreachable!()
    };
    let MomentOracle::Dipole(d) = oracle(MomentKind::Dipole)? else {
        unreachable!()
    };
    let MomentOracle::Quadrupole(q) = oracle(MomentKind::Quadrupole)? else {
        unreachable!()
    };
    let MomentOracle::MagneticMoment(mu) = oracle(MomentKind::MagneticMoment)? else {
        unreachable!()
    };
    let l = packet.ell().unsigned_abs() as f64;
    let q = q / l;
    let sigma = packet.sigma_perp();
    let s2 = sigma * sigma;
    let rows: Vec<(&str, f64, f64, f64)> = vec![
        ("normalization", 1.0, norm, 0.0),
        ("d_x", closed.d_mean.x, d.x, sigma),
        ("d_y", closed.d_mean.y, d.y, sigma),
        ("d_z", closed.d_mean.z, d.z, sigma),
        ("mu_z", closed.mu.z, mu.z, 0.0),
        ("Q_xx", closed.q[(0, 0)], q[(0, 0)], 0.0),
        ("Q_yy", closed.q[(1, 1)], q[(1, 1)], 0.0),
        ("Q_zz", closed.q[(2, 2)], q[(2, 2)], 0.0),
        ("Q_xy", closed.q[(0, 1)], q[(0, 1)], s2),
        ("Q_trace", closed.q.trace(), q.trace(), s2),
        ("Q_anisotropy", closed.q[(2, 2)] / closed.q[(0, 0)], q[(2, 2)] / q[(0, 0)], 0.0),
    ];
    let mut t = Table::new(MOMENTS_COLUMNS);
    let mut out_summary = BTreeMap::new();
    let mut worst: f64 = 0.0;
    for (name, a, b, scale) in rows {
        let r = rel_diff(a, b, scale);
        worst = worst.max(r);
        t.push(vec![Cell::Text(name.into()), Cell::Num(a), Cell::Num(b), Cell::Num(r)]);
    }
    out_summary.insert("worst_rel_diff".into(), worst);
    let mut out = Outcome::new(t);
    out.summary = out_summary;
    Ok(out)
}
