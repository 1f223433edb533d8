//! Far-field Smith-Purcell lines of a point charge and the multipole
//! corrections carried by a vortex packet.
//!
//! The point-charge spectrum at fixed direction is
//! `(omega d / 2pi)^s exp{-(4 pi h / beta gamma lambda) sqrt(1 + b^2 g^2 cos^2 phi sin^2 theta)} F_N(psi)`
//! with `psi = omega d (1/beta - cos theta)` and the grating comb
//! `F_N = sin^2(N psi/2) / sin^2(psi/2)`. The spectral exponent `s` sets the
//! single-strip emission strength; the evanescent envelope and the comb are
//! the only other angular structure.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::kinematics::{
    cos_snapped, electron_mass, sp_wavelength, DetectorGeometry, ElectronKinematics, Grating, LAMBDA_C,
};
use crate::numerics::{find_peak, gauss_hermite, integrate_adaptive, QuadratureSpec, Region};
use crate::wavepacket::PacketModel;

/// Exponent `s` of the single-strip spectral weight `(omega d / 2 pi)^s`.
pub const SPECTRAL_EXPONENT: i32 = 4;

/// Coefficient of the magnetic-moment ratio.
pub const C_MU: f64 = 1.0;

/// Coefficient of the static quadrupole ratio.
pub const C_Q1: f64 = 1.0;

/// Default fraction of `sigma_perp / (lambda_c |ell|)` kept as the upper
/// strip count.
pub const DEFAULT_MARGIN: f64 = 0.15;

/// Half-width of the integration window around a line, in comb lobes.
pub const LINE_LOBES: u32 = 3;

/// Product Gauss-Hermite order per axis for the momentum average, and the
/// coarser order it is checked against.
const AVERAGE_NODES: usize = 24;
const AVERAGE_CHECK_NODES: usize = 16;
const AVERAGE_TOL: f64 = 1e-3;

const MAX_SEGMENTS: usize = 4000;

fn line_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-10,
        abs_tol: 1e-300,
        max_subdivisions: 2000,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineIntensity {
    pub w_e: f64,
    pub w_emu: f64,
    pub w_eq1: f64,
    pub w_eq2: f64,
    pub total: f64,
    pub order_n: u32,
    pub lambda_line: f64,
    /// False for orders above the first, where the spreading term is not
    /// defined and `w_eq2` is set to zero.
    pub eq2_defined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityWindow {
    pub n_min: f64,
    pub n_max: f64,
    pub margin_factor: f64,
}

impl FeasibilityWindow {
    pub fn is_empty(&self) -> bool {
        !(self.n_min < self.n_max)
    }
}

/// Line summary of a momentum-averaged spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineProfile {
    /// Frequency-integrated intensity over the common window.
    pub integrated: f64,
    /// Mean frequency, rad/m.
    pub centre: f64,
    /// R.m.s. width about the centre, rad/m.
    pub rms_width: f64,
}

/// Grating comb with the removable singularity at `psi = 2 pi n` handled by
/// its series.
pub fn grating_comb(strips: usize, psi: f64) -> f64 {
    let x = psi - 2.0 * PI * (psi / (2.0 * PI)).round();
    let n = strips as f64;
    let s = (0.5 * x).sin();
    if s.abs() < 1e-6 {
        n * n * (1.0 - (n * n - 1.0) * x * x / 12.0)
    } else {
        let t = (0.5 * n * x).sin();
        t * t / (s * s)
    }
}

/// Spectrum of one plane-wave component.
///
/// `c` maps frequency to the phase per period, `psi = omega c`; `root` is
/// `sqrt(1 + b^2 g^2 cos^2 phi sin^2 theta)` in the component's frame.
#[derive(Debug, Clone, Copy)]
struct Component {
    c: f64,
    beta_gamma: f64,
    root: f64,
}

impl Component {
    fn for_kinematics(grating: &Grating, kin: &ElectronKinematics, det: &DetectorGeometry) -> Self {
        let bg = kin.beta_gamma();
        let proj = det.theta().sin() * cos_snapped(det.phi());
        Self {
            c: grating.period() * (1.0 / kin.beta() - det.theta().cos()),
            beta_gamma: bg,
            root: (1.0 + bg * bg * proj * proj).sqrt(),
        }
    }

    /// Component of momentum `p` seen from direction `n`: the strips are
    /// crossed at intervals `d / v_z`, the emitter moves along `p`.
    fn for_momentum(grating: &Grating, p: &Vector3<f64>, n: &Vector3<f64>) -> Result<Self> {
        let m = electron_mass();
        let pm = p.norm();
        let eps = (pm * pm + m * m).sqrt();
        let v = p / eps;
        if !(v.z > 0.0) {
            return Err(Error::domain("plane-wave component does not move along +z"));
        }
        let axis = p / pm;
        let x = Vector3::x() - axis * axis.x;
        let x = x / x.norm();
        let bg = pm / m;
        let proj = n.dot(&x);
        Ok(Self {
            c: grating.period() * (1.0 - n.dot(&v)) / v.z,
            beta_gamma: bg,
            root: (1.0 + bg * bg * proj * proj).sqrt(),
        })
    }

    fn spectrum(&self, grating: &Grating, omega: f64, exponent: i32) -> f64 {
        // 4 pi h / (beta gamma lambda) = 2 h omega / (beta gamma)
        let env = (-2.0 * grating.impact() * omega / self.beta_gamma * self.root).exp();
        let weight = (omega * grating.period() / (2.0 * PI)).powi(exponent);
        weight * env * grating_comb(grating.strips(), omega * self.c)
    }
}

fn require_far_field(det: &DetectorGeometry) -> Result<()> {
    if det.is_far_field() {
        Ok(())
    } else {
        Err(Error::domain("far-field intensity requested for a finite detector distance"))
    }
}

/// `psi` window of `LINE_LOBES` comb lobes either side of order `n`.
fn line_window(strips: usize, n: u32) -> (f64, f64) {
    let centre = 2.0 * PI * n as f64;
    let half = LINE_LOBES as f64 * 2.0 * PI / strips as f64;
    ((centre - half).max(0.0), centre + half)
}

/// Splits `[a, b]` at the comb zeros `2 pi j / N`, merging when there would
/// be more than `MAX_SEGMENTS` pieces.
fn lobe_breaks(strips: usize, a: f64, b: f64) -> Vec<f64> {
    let lobe = 2.0 * PI / strips as f64;
    let first = (a / lobe).floor() as i64 + 1;
    let last = (b / lobe).ceil() as i64 - 1;
    let count = (last - first + 1).max(0) as usize;
    let stride = count.div_ceil(MAX_SEGMENTS).max(1);
    let mut breaks = vec![a];
    let mut j = first;
    while j <= last {
        let z = j as f64 * lobe;
        if z > a && z < b {
            breaks.push(z);
        }
        j += stride as i64;
    }
    breaks.push(b);
    breaks
}

/// Integrates `f(psi)` over `[a, b]` lobe by lobe.
///
/// Far wings are resolved to an absolute floor set by a midpoint estimate
/// of the whole window, not to full relative accuracy each.
fn integrate_lobes<F: Fn(f64) -> f64>(strips: usize, a: f64, b: f64, f: F) -> Result<f64> {
    let breaks = lobe_breaks(strips, a, b);
    let scale: f64 = breaks
        .windows(2)
        .map(|w| (f(0.5 * (w[0] + w[1])) * (w[1] - w[0])).abs())
        .sum();
    let spec = line_spec().with_abs_tol((1e-13 * scale).max(1e-300));
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += integrate_adaptive(|s| f(s[0]), &Region::interval(w[0], w[1])?, &spec)?.value;
    }
    Ok(total)
}

fn line_of(grating: &Grating, comp: &Component, n: u32, exponent: i32) -> Result<f64> {
    let (a, b) = line_window(grating.strips(), n);
    let v = integrate_lobes(grating.strips(), a, b, |psi| comp.spectrum(grating, psi / comp.c, exponent))?;
    Ok(v / comp.c)
}

/// Point-charge spectral intensity per unit solid angle at frequency `omega`.
pub fn charge_intensity_spectral(
    grating: &Grating,
    kin: &ElectronKinematics,
    omega: f64,
    det: &DetectorGeometry,
) -> Result<f64> {
    charge_intensity_spectral_with(grating, kin, omega, det, SPECTRAL_EXPONENT)
}

/// As [`charge_intensity_spectral`] with an explicit spectral exponent; `0`
/// leaves the bare envelope times comb.
pub fn charge_intensity_spectral_with(
    grating: &Grating,
    kin: &ElectronKinematics,
    omega: f64,
    det: &DetectorGeometry,
    exponent: i32,
) -> Result<f64> {
    require_far_field(det)?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::domain(format!("frequency must be positive, got {omega}")));
    }
    Ok(Component::for_kinematics(grating, kin, det).spectrum(grating, omega, exponent))
}

/// Spectral intensity integrated over the `n`-th line.
pub fn charge_intensity_line(grating: &Grating, kin: &ElectronKinematics, det: &DetectorGeometry, n: u32) -> Result<f64> {
    charge_intensity_line_with(grating, kin, det, n, SPECTRAL_EXPONENT)
}

pub fn charge_intensity_line_with(
    grating: &Grating,
    kin: &ElectronKinematics,
    det: &DetectorGeometry,
    n: u32,
    exponent: i32,
) -> Result<f64> {
    require_far_field(det)?;
    if n == 0 {
        return Err(Error::domain("diffraction order must be at least 1"));
    }
    line_of(grating, &Component::for_kinematics(grating, kin, det), n, exponent)
}

/// `c_mu ell cos(phi) lambda_c / lambda`.
pub fn magnetic_ratio_at_wavelength(ell: i32, phi: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("wavelength must be positive, got {lambda}")));
    }
    Ok(C_MU * ell as f64 * cos_snapped(phi) * LAMBDA_C / lambda)
}

/// Magnetic-moment interference ratio `dW_emu / dW_e` on line `n`.
pub fn magnetic_ratio(
    kin: &ElectronKinematics,
    ell: i32,
    det: &DetectorGeometry,
    n: u32,
    grating: &Grating,
) -> Result<f64> {
    let lambda = sp_wavelength(grating, kin, det.theta(), n)?;
    magnetic_ratio_at_wavelength(ell, det.phi(), lambda)
}

fn vortex_factor(packet: &PacketModel, what: &str) -> Result<f64> {
    if packet.ell() == 0 {
        return Err(Error::domain(format!("{what} needs a vortex packet")));
    }
    let l = packet.ell() as f64;
    Ok(l * l * (LAMBDA_C / packet.sigma_perp()).powi(2))
}

/// Static quadrupole ratio `c_Q1 ell^2 lambda_c^2 / sigma_perp^2`.
pub fn quadrupole_static_ratio(packet: &PacketModel) -> Result<f64> {
    Ok(C_Q1 * vortex_factor(packet, "static quadrupole ratio")?)
}

fn spreading_prefactor(kin: &ElectronKinematics) -> f64 {
    2.0 * PI * PI / kin.beta_gamma().powi(4)
}

/// Closed-form spreading ratio on the first line,
/// `N^2 ell^2 (lambda_c/sigma)^2 (2 pi^2 / 3 beta^4 gamma^4) d^2 / lambda^2`.
pub fn quadrupole_spreading_ratio(
    grating: &Grating,
    packet: &PacketModel,
    kin: &ElectronKinematics,
    theta: f64,
) -> Result<f64> {
    let lv = vortex_factor(packet, "spreading ratio")?;
    let lambda = sp_wavelength(grating, kin, theta, 1)?;
    let n = grating.strips() as f64;
    Ok(n * n * lv * spreading_prefactor(kin) / 3.0 * (grating.period() / lambda).powi(2))
}

/// Spreading ratio with the strip positions summed exactly,
/// `<z^2> = (1/N) sum_m (m d - z0)^2`.
pub fn quadrupole_spreading_ratio_discrete(
    grating: &Grating,
    packet: &PacketModel,
    kin: &ElectronKinematics,
    theta: f64,
    waist_z0: f64,
) -> Result<f64> {
    let lv = vortex_factor(packet, "spreading ratio")?;
    let lambda = sp_wavelength(grating, kin, theta, 1)?;
    let n = grating.strips() as f64;
    let d = grating.period();
    let mean = d * (n - 1.0) / 2.0;
    let var = d * d * (n * n - 1.0) / 12.0;
    let z2 = var + (mean - waist_z0).powi(2);
    Ok(spreading_prefactor(kin) * lv * z2 / (lambda * lambda))
}

/// Line intensity with the magnetic and quadrupole corrections.
pub fn total_line_intensity(
    grating: &Grating,
    packet: &PacketModel,
    kin: &ElectronKinematics,
    det: &DetectorGeometry,
    n: u32,
) -> Result<LineIntensity> {
    let w_e = charge_intensity_line(grating, kin, det, n)?;
    let lambda_line = sp_wavelength(grating, kin, det.theta(), n)?;
    let (r_mu, r_q1, r_q2) = if packet.ell() == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let r_q2 = if n == 1 {
            quadrupole_spreading_ratio_discrete(grating, packet, kin, det.theta(), 0.0)?
        } else {
            0.0
        };
        (
            magnetic_ratio(kin, packet.ell(), det, n, grating)?,
            quadrupole_static_ratio(packet)?,
            r_q2,
        )
    };
    let (w_emu, w_eq1, w_eq2) = (r_mu * w_e, r_q1 * w_e, r_q2 * w_e);
    Ok(LineIntensity {
        w_e,
        w_emu,
        w_eq1,
        w_eq2,
        total: w_e + w_emu + w_eq1 + w_eq2,
        order_n: n,
        lambda_line,
        eq2_defined: n == 1,
    })
}

/// `(dW(l) - dW(-l)) / (dW(l) + dW(-l))`.
pub fn oam_asymmetry(
    grating: &Grating,
    packet: &PacketModel,
    kin: &ElectronKinematics,
    det: &DetectorGeometry,
    n: u32,
) -> Result<f64> {
    let plus = total_line_intensity(grating, packet, kin, det, n)?.total;
    let minus = total_line_intensity(grating, &packet.with_opposite_ell(), kin, det, n)?.total;
    Ok((plus - minus) / (plus + minus))
}

/// Nodes `(p, weight)` of the product rule for `|psi(p)|^2`, weights summing
/// to one.
fn momentum_nodes(packet: &PacketModel, order: usize) -> Result<Vec<(Vector3<f64>, f64)>> {
    let gh = gauss_hermite(order)?;
    let dp = packet.delta_p();
    let l = packet.ell().unsigned_abs() as i32;
    let p0 = packet.mean_momentum();
    let mut nodes = Vec::with_capacity(order * order * order);
    for (&sx, &wx) in gh.nodes.iter().zip(&gh.weights) {
        for (&sy, &wy) in gh.nodes.iter().zip(&gh.weights) {
            // the vortex factor (p_perp / dp)^{2|l|}; the Gaussian is the rule's weight
            let perp = ((p0.x / dp + sx).powi(2) + (p0.y / dp + sy).powi(2)).powi(l);
            for (&sz, &wz) in gh.nodes.iter().zip(&gh.weights) {
                let w = wx * wy * wz * perp;
                if w > 0.0 {
                    nodes.push((p0 + Vector3::new(sx, sy, sz) * dp, w));
                }
            }
        }
    }
    let total: f64 = nodes.iter().map(|n| n.1).sum();
    for n in nodes.iter_mut() {
        n.1 /= total;
    }
    Ok(nodes)
}

fn averaged_line_at_order(
    packet: &PacketModel,
    grating: &Grating,
    det: &DetectorGeometry,
    n: u32,
    order: usize,
) -> Result<(f64, f64)> {
    let dir = det.direction();
    let mut mean = 0.0;
    let mut second = 0.0;
    for (p, w) in momentum_nodes(packet, order)? {
        let comp = Component::for_momentum(grating, &p, &dir)?;
        let v = line_of(grating, &comp, n, SPECTRAL_EXPONENT)?;
        mean += w * v;
        second += w * v * v;
    }
    Ok((mean, (second - mean * mean).max(0.0).sqrt()))
}

fn check_average_inputs(packet: &PacketModel, kin: &ElectronKinematics, det: &DetectorGeometry, n: u32) -> Result<()> {
    require_far_field(det)?;
    if n == 0 {
        return Err(Error::domain("diffraction order must be at least 1"));
    }
    let mean = packet.mean_kinematics()?;
    if (mean.beta() - kin.beta()).abs() > 1e-9 * kin.beta() {
        return Err(Error::domain(format!(
            "packet mean velocity {} does not match the supplied beta {}",
            mean.beta(),
            kin.beta()
        )));
    }
    Ok(())
}

/// Line intensity of an incoherent superposition of plane waves weighted
/// by the packet's momentum density: every component radiates with its own
/// velocity and its own angles to the detector.
pub fn wigner_averaged_line(
    packet: &PacketModel,
    grating: &Grating,
    kin: &ElectronKinematics,
    det: &DetectorGeometry,
    n: u32,
) -> Result<f64> {
    check_average_inputs(packet, kin, det, n)?;
    let (fine, spread) = averaged_line_at_order(packet, grating, det, n, AVERAGE_NODES)?;
    let (coarse, _) = averaged_line_at_order(packet, grating, det, n, AVERAGE_CHECK_NODES)?;
    let diff = (fine - coarse).abs();
    if diff > AVERAGE_TOL * fine.abs() {
        return Err(Error::numerical(
            format!(
                "momentum average not converged ({AVERAGE_CHECK_NODES}^3 vs {AVERAGE_NODES}^3 nodes); \
                 component line intensities spread by {spread:e}"
            ),
            fine,
            diff,
        ));
    }
    Ok(fine)
}

/// Integrated intensity, centre and r.m.s. width of the momentum-averaged
/// spectrum over the union of the components' line windows.
pub fn wigner_averaged_profile(
    packet: &PacketModel,
    grating: &Grating,
    kin: &ElectronKinematics,
    det: &DetectorGeometry,
    n: u32,
) -> Result<LineProfile> {
    check_average_inputs(packet, kin, det, n)?;
    let dir = det.direction();
    let nodes = momentum_nodes(packet, AVERAGE_NODES)?;
    let comps = nodes
        .iter()
        .map(|(p, w)| Ok((Component::for_momentum(grating, p, &dir)?, *w)))
        .collect::<Result<Vec<_>>>()?;
    let (a, b) = line_window(grating.strips(), n);
    let lo = comps.iter().map(|(c, _)| a / c.c).fold(f64::INFINITY, f64::min);
    let hi = comps.iter().map(|(c, _)| b / c.c).fold(f64::NEG_INFINITY, f64::max);
    let omega0 = Component::for_kinematics(grating, kin, det);
    let omega0 = 2.0 * PI * n as f64 / omega0.c;

    let mut m = [0.0; 3];
    for (comp, w) in &comps {
        for (k, mk) in m.iter_mut().enumerate() {
            let v = integrate_lobes(grating.strips(), lo * comp.c, hi * comp.c, |psi| {
                let omega = psi / comp.c;
                let u = omega / omega0 - 1.0;
                comp.spectrum(grating, omega, SPECTRAL_EXPONENT) * u.powi(k as i32)
            })?;
            *mk += w * v / comp.c;
        }
    }
    let u_mean = m[1] / m[0];
    let u_var = (m[2] / m[0] - u_mean * u_mean).max(0.0);
    Ok(LineProfile {
        integrated: m[0],
        centre: omega0 * (1.0 + u_mean),
        rms_width: omega0 * u_var.sqrt(),
    })
}

/// Strip-count window `sqrt(lambda_c/lambda) S << N << margin S` with
/// `S = sigma_perp / (lambda_c |ell|)` and the default margin.
pub fn feasibility_window(packet: &PacketModel, lambda: f64) -> Result<FeasibilityWindow> {
    feasibility_window_with_margin(packet, lambda, DEFAULT_MARGIN)
}

pub fn feasibility_window_with_margin(packet: &PacketModel, lambda: f64, margin: f64) -> Result<FeasibilityWindow> {
    if packet.ell() == 0 {
        return Err(Error::domain("feasibility window needs a vortex packet"));
    }
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("wavelength must be positive, got {lambda}")));
    }
    if !(0.1..=0.2).contains(&margin) {
        return Err(Error::domain(format!("margin must lie in [0.1, 0.2], got {margin}")));
    }
    let scale = packet.sigma_perp() / (LAMBDA_C * packet.ell().unsigned_abs() as f64);
    Ok(FeasibilityWindow {
        n_min: (LAMBDA_C / lambda).sqrt() * scale,
        n_max: margin * scale,
        margin_factor: margin,
    })
}

/// Polar maxima of the point-charge line and of the corrected total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPeaks {
    pub theta_w_e: f64,
    pub w_e_max: f64,
    pub theta_total: f64,
    pub total_max: f64,
}

impl PolarPeaks {
    /// `theta_total - theta_w_e`, radians.
    pub fn shift(&self) -> f64 {
        self.theta_total - self.theta_w_e
    }
}

const POLAR_SCAN: usize = 90;
const POLAR_TOL: f64 = 1e-6;

fn polar_max<F: Fn(f64) -> Result<f64>>(f: F, what: &str) -> Result<(f64, f64)> {
    let grid: Vec<f64> = (0..POLAR_SCAN)
        .map(|i| PI * (i as f64 + 0.5) / POLAR_SCAN as f64)
        .collect();
    let values = grid.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
    let (imax, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    if imax == 0 || imax + 1 == POLAR_SCAN {
        return Err(Error::numerical(
            format!("{what} has no interior polar maximum (largest at theta = {})", grid[imax]),
            values[imax],
            f64::NAN,
        ));
    }
    let mut failure = None;
    let peak = find_peak(
        |t| match f(t) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        (grid[imax - 1], grid[imax + 1]),
        POLAR_TOL,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((peak.argmax, peak.max))
}

pub fn polar_peaks(
    grating: &Grating,
    packet: &PacketModel,
    kin: &ElectronKinematics,
    phi: f64,
    n: u32,
) -> Result<PolarPeaks> {
    let line = |theta: f64| total_line_intensity(grating, packet, kin, &DetectorGeometry::far_field(theta, phi)?, n);
    let (theta_w_e, w_e_max) = polar_max(|t| Ok(line(t)?.w_e), "point-charge line")?;
    let (theta_total, total_max) = polar_max(|t| Ok(line(t)?.total), "corrected line")?;
    Ok(PolarPeaks {
        theta_w_e,
        w_e_max,
        theta_total,
        total_max,
    })
}

/// Shift of the polar maximum caused by the corrections, radians.
pub fn polar_peak_shift(
    grating: &Grating,
    packet: &PacketModel,
    kin: &ElectronKinematics,
    phi: f64,
    n: u32,
) -> Result<f64> {
    Ok(polar_peaks(grating, packet, kin, phi, n)?.shift())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::kinematics_from_beta;
    use crate::wavepacket::{make_gaussian_packet, make_vortex_packet, mean_momentum_along_z};
    use approx::assert_relative_eq;

    const HALF_PI: f64 = PI / 2.0;

    fn fig3(strips: usize) -> (Grating, ElectronKinematics, PacketModel) {
        let kin = kinematics_from_beta(0.5).unwrap();
        let g = Grating::new(10e-6, strips, 2.7e-6).unwrap();
        let v = make_vortex_packet(mean_momentum_along_z(&kin), 1.0 / 100e-9, 10).unwrap();
        (g, kin, v)
    }

    #[test]
    fn comb_at_resonance_and_away() {
        assert_eq!(grating_comb(50, 2.0 * PI), 2500.0);
        assert_eq!(grating_comb(1, 1.234), 1.0);
        let psi = 2.0 * PI + 1e-7;
        let direct = (50.0 * psi / 2.0).sin().powi(2) / (psi / 2.0).sin().powi(2);
        assert_relative_eq!(grating_comb(50, psi), direct, max_relative = 1e-6);
        assert_relative_eq!(grating_comb(7, 0.3), grating_comb(7, 0.3 + 8.0 * PI), max_relative = 1e-12);
    }

    #[test]
    fn envelope_example() {
        let (g, kin, _) = fig3(1);
        let det = DetectorGeometry::far_field(HALF_PI, HALF_PI).unwrap();
        let omega = 2.0 * PI / 20e-6;
        let v = charge_intensity_spectral_with(&g, &kin, omega, &det, 0).unwrap();
        let expect = (-4.0 * PI * 2.7e-6 / (kin.beta_gamma() * 20e-6)).exp();
        assert_relative_eq!(v, expect, max_relative = 1e-12);
        assert_relative_eq!(v, 0.0530, max_relative = 2e-3);
        let flat = Grating::new(10e-6, 1, 0.0).unwrap();
        assert_eq!(charge_intensity_spectral_with(&flat, &kin, omega, &det, 0).unwrap(), 1.0);
    }

    #[test]
    fn resonance_gives_n_squared() {
        let kin = kinematics_from_beta(0.7).unwrap();
        let g = Grating::new(416e-9, 40, 0.0).unwrap();
        let det = DetectorGeometry::far_field(1.1, 0.4).unwrap();
        let omega = crate::kinematics::sp_frequency(&g, &kin, 1.1, 1).unwrap();
        let v = charge_intensity_spectral_with(&g, &kin, omega, &det, 0).unwrap();
        assert_relative_eq!(v, 1600.0, max_relative = 1e-9);
    }

    #[test]
    fn line_is_linear_in_strips() {
        let det = DetectorGeometry::far_field(HALF_PI, HALF_PI).unwrap();
        for n in [100, 400, 1600] {
            let (g, kin, _) = fig3(n);
            let one = charge_intensity_line(&g, &kin, &det, 1).unwrap();
            let two = charge_intensity_line(&g.with_strips(2 * n).unwrap(), &kin, &det, 1).unwrap();
            assert!(one > 0.0);
            assert_relative_eq!(two / one, 2.0, max_relative = 2e-2);
        }
    }

    #[test]
    fn single_strip_is_broadband() {
        let (g, kin, _) = fig3(1);
        let det = DetectorGeometry::far_field(1.2, 0.7).unwrap();
        let line = charge_intensity_line(&g, &kin, &det, 1).unwrap();
        let c = g.period() * (1.0 / kin.beta() - 1.2f64.cos());
        let (a, b) = (0.0, 8.0 * PI / c);
        let direct = integrate_adaptive(
            |w| charge_intensity_spectral(&g, &kin, w[0].max(1e-300), &det).unwrap(),
            &Region::interval(a, b).unwrap(),
            &QuadratureSpec::default().with_rel_tol(1e-10),
        )
        .unwrap()
        .value;
        assert_relative_eq!(line, direct, max_relative = 1e-8);
    }

    #[test]
    fn magnetic_ratio_examples() {
        assert_relative_eq!(magnetic_ratio_at_wavelength(1000, 0.0, 1e-6).unwrap(), 3.8616e-4, max_relative = 1e-12);
        assert_eq!(magnetic_ratio_at_wavelength(1000, HALF_PI, 1e-6).unwrap(), 0.0);
        assert_eq!(
            magnetic_ratio_at_wavelength(-7, 0.3, 2e-6).unwrap(),
            -magnetic_ratio_at_wavelength(7, 0.3, 2e-6).unwrap()
        );
    }

    #[test]
    fn static_ratio_examples() {
        let kin = kinematics_from_beta(0.5).unwrap();
        let p0 = mean_momentum_along_z(&kin);
        let v = make_vortex_packet(p0, 1.0 / 20e-9, 10).unwrap();
        assert_relative_eq!(quadrupole_static_ratio(&v).unwrap(), 3.728e-8, max_relative = 1e-3);
        let v = make_vortex_packet(p0, 1.0 / 100e-9, -10).unwrap();
        assert_relative_eq!(quadrupole_static_ratio(&v).unwrap(), 1.491e-9, max_relative = 1e-3);
        assert!(quadrupole_static_ratio(&make_gaussian_packet(p0, 1e7).unwrap()).is_err());
    }

    #[test]
    fn spreading_ratio_examples() {
        let (g, kin, v) = fig3(3500);
        assert_relative_eq!(quadrupole_spreading_ratio(&g, &v, &kin, HALF_PI).unwrap(), 0.2704, max_relative = 1e-3);
        let (g2, _, _) = fig3(7000);
        assert_relative_eq!(
            quadrupole_spreading_ratio(&g2, &v, &kin, HALF_PI).unwrap(),
            4.0 * quadrupole_spreading_ratio(&g, &v, &kin, HALF_PI).unwrap(),
            max_relative = 1e-12
        );
        let kin = kinematics_from_beta(0.68).unwrap();
        let r0 = quadrupole_spreading_ratio(&g, &v, &kin, 0.0).unwrap();
        let r90 = quadrupole_spreading_ratio(&g, &v, &kin, HALF_PI).unwrap();
        assert_relative_eq!(r0 / r90, 1.0 / (0.32f64 * 0.32), max_relative = 1e-12);
    }

    #[test]
    fn discrete_spreading_ratio() {
        let (g, kin, v) = fig3(100);
        let closed = quadrupole_spreading_ratio(&g, &v, &kin, 1.0).unwrap();
        let discrete = quadrupole_spreading_ratio_discrete(&g, &v, &kin, 1.0, 0.0).unwrap();
        assert!((discrete / closed - 1.0).abs() < 2e-2);
        let (g1, _, _) = fig3(1);
        assert_eq!(quadrupole_spreading_ratio_discrete(&g1, &v, &kin, 1.0, 0.0).unwrap(), 0.0);
        let centred = quadrupole_spreading_ratio_discrete(&g, &v, &kin, 1.0, 0.5 * 99.0 * 10e-6).unwrap();
        assert_relative_eq!(centred / discrete, 0.25, max_relative = 2e-2);
    }

    #[test]
    fn total_at_perpendicular_plane() {
        let (g, kin, v) = fig3(3500);
        let det = DetectorGeometry::far_field(HALF_PI, HALF_PI).unwrap();
        let t = total_line_intensity(&g, &v, &kin, &det, 1).unwrap();
        assert_eq!(t.w_emu, 0.0);
        assert_relative_eq!(t.total, t.w_e + t.w_eq1 + t.w_eq2, max_relative = 1e-15);
        assert_relative_eq!(t.w_eq2 / t.w_e, 0.2704, max_relative = 2e-3);
        let second = total_line_intensity(&g, &v, &kin, &det, 2).unwrap();
        assert!(!second.eq2_defined);
        assert_eq!(second.w_eq2, 0.0);
    }

    #[test]
    fn asymmetry() {
        let (g, kin, v) = fig3(200);
        let det = DetectorGeometry::far_field(1.0, 0.3).unwrap();
        let a = oam_asymmetry(&g, &v, &kin, &det, 1).unwrap();
        let b = oam_asymmetry(&g, &v.with_opposite_ell(), &kin, &det, 1).unwrap();
        assert_relative_eq!(a, -b, max_relative = 1e-12);
        let t = total_line_intensity(&g, &v, &kin, &det, 1).unwrap();
        assert_relative_eq!(a, t.w_emu / (t.w_e + t.w_eq1 + t.w_eq2), max_relative = 1e-9);
        let perp = DetectorGeometry::far_field(1.0, HALF_PI).unwrap();
        assert_eq!(oam_asymmetry(&g, &v, &kin, &perp, 1).unwrap(), 0.0);
    }

    #[test]
    fn feasibility_examples() {
        let (_, _, v) = fig3(1);
        let w = feasibility_window_with_margin(&v, 20e-6, 0.135).unwrap();
        assert_relative_eq!(w.n_max, 3496.0, max_relative = 1e-3);
        assert_relative_eq!(w.n_min, 3.6, max_relative = 2e-2);
        assert!(!w.is_empty());
        assert!(feasibility_window_with_margin(&v, 20e-6, 0.3).is_err());
    }

    #[test]
    fn gaussian_has_no_shift() {
        let kin = kinematics_from_beta(0.676).unwrap();
        let g = Grating::new(100e-6, 200, 33e-6).unwrap();
        let p = make_gaussian_packet(mean_momentum_along_z(&kin), 1.0 / 20e-9).unwrap();
        assert_eq!(polar_peak_shift(&g, &p, &kin, HALF_PI, 1).unwrap(), 0.0);
    }

    #[test]
    fn plane_wave_limit() {
        let kin = kinematics_from_beta(0.5).unwrap();
        let g = Grating::new(10e-6, 100, 2.7e-6).unwrap();
        let p0 = mean_momentum_along_z(&kin);
        let det = DetectorGeometry::far_field(HALF_PI, HALF_PI).unwrap();
        let point = charge_intensity_line(&g, &kin, &det, 1).unwrap();
        let narrow = make_gaussian_packet(p0, 1e-6 * p0.z).unwrap();
        let avg = wigner_averaged_line(&narrow, &g, &kin, &det, 1).unwrap();
        assert_relative_eq!(avg, point, max_relative = 1e-4);
    }
}
