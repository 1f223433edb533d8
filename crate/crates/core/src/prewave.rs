//! Finite-distance angular distributions: strip sources summed coherently
//! with exact spherical distances, and the incoherent average over a
//! Gaussian beam of transverse offsets.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::farfield::{charge_intensity_spectral, SPECTRAL_EXPONENT};
use crate::kinematics::{prewave_radius, DetectorGeometry, Distance, ElectronKinematics, Grating};
use crate::numerics::gauss_hermite;

/// Default Gauss-Hermite order per transverse axis for beam averages.
pub const BEAM_NODES: usize = 32;

/// Gaussian transverse beam distribution normalised to `count_nb` electrons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamProfile {
    sigma_b: f64,
    count_nb: f64,
}

impl BeamProfile {
    pub fn new(sigma_b: f64, count_nb: f64) -> Result<Self> {
        if !(sigma_b > 0.0 && sigma_b.is_finite()) {
            return Err(Error::domain(format!("beam width must be positive, got {sigma_b}")));
        }
        if !(count_nb >= 1.0 && count_nb.is_finite()) {
            return Err(Error::domain(format!("electron count must be at least 1, got {count_nb}")));
        }
        Ok(Self { sigma_b, count_nb })
    }

    pub fn sigma_b(&self) -> f64 {
        self.sigma_b
    }

    pub fn count_nb(&self) -> f64 {
        self.count_nb
    }

    /// `rho_b(r_T) = N_b / (2 pi sigma_b^2) exp(-r_T^2 / 2 sigma_b^2)`.
    pub fn density(&self, offset: [f64; 2]) -> f64 {
        let s2 = self.sigma_b * self.sigma_b;
        let r2 = offset[0] * offset[0] + offset[1] * offset[1];
        self.count_nb / (2.0 * PI * s2) * (-r2 / (2.0 * s2)).exp()
    }

    pub fn prewave_radius(&self, lambda: f64) -> Result<f64> {
        prewave_radius(self.sigma_b, lambda)
    }
}

/// Single-electron intensity at a finite detector, with the electron line
/// displaced transversely by `source_offset`.
///
/// Strip `m` sits at `z_m = m d`; its field carries the arrival phase
/// `omega z_m / beta`, the propagation phase `omega R_m`, the amplitude
/// `r / R_m`, and the square root of the evanescent envelope evaluated at
/// its own angles to the detector. As `r -> inf` this reproduces
/// [`charge_intensity_spectral`]. A far-field detector is passed through to
/// that function.
pub fn prewave_intensity(
    grating: &Grating,
    kin: &ElectronKinematics,
    det: &DetectorGeometry,
    omega: f64,
    source_offset: [f64; 2],
) -> Result<f64> {
    let r = match det.distance() {
        Distance::FarField => return charge_intensity_spectral(grating, kin, omega, det),
        Distance::Finite(r) => r,
    };
    det.check_against(grating)?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::domain(format!("frequency must be positive, got {omega}")));
    }
    let n_hat = det.direction();
    let target = n_hat * r;
    let bg = kin.beta_gamma();
    let decay = 2.0 * grating.impact() * omega / bg;
    let d = grating.period();

    let mut sum = Complex64::new(0.0, 0.0);
    for m in 0..grating.strips() {
        let z = m as f64 * d;
        let s = Vector3::new(source_offset[0], source_offset[1], z);
        let ns = n_hat.dot(&s);
        let r_m = (r * r - 2.0 * r * ns + s.norm_squared()).sqrt();
        // R_m - r without cancellation
        let excess = (s.norm_squared() - 2.0 * r * ns) / (r_m + r);
        let ux = (target.x - s.x) / r_m;
        let root = (1.0 + bg * bg * ux * ux).sqrt();
        let amp = (-0.5 * decay * root).exp() * r / r_m;
        sum += Complex64::from_polar(amp, omega * (z / kin.beta() + excess));
    }
    let weight = (omega * d / (2.0 * PI)).powi(SPECTRAL_EXPONENT);
    Ok(weight * sum.norm_sqr())
}

/// Beam-averaged intensity with the default node count.
pub fn beam_averaged_intensity(
    beam: &BeamProfile,
    grating: &Grating,
    kin: &ElectronKinematics,
    det: &DetectorGeometry,
    omega: f64,
) -> Result<f64> {
    beam_averaged_intensity_with(beam, grating, kin, det, omega, BEAM_NODES)
}

/// `int d^2 r_T rho_b(r_T) dW(r_T)` by an `nodes x nodes` Gauss-Hermite rule.
pub fn beam_averaged_intensity_with(
    beam: &BeamProfile,
    grating: &Grating,
    kin: &ElectronKinematics,
    det: &DetectorGeometry,
    omega: f64,
    nodes: usize,
) -> Result<f64> {
    let gh = gauss_hermite(nodes)?;
    let scale = std::f64::consts::SQRT_2 * beam.sigma_b;
    let mut total = 0.0;
    for (&x, &wx) in gh.nodes.iter().zip(&gh.weights) {
        let mut row = 0.0;
        for (&y, &wy) in gh.nodes.iter().zip(&gh.weights) {
            row += wy * prewave_intensity(grating, kin, det, omega, [scale * x, scale * y])?;
        }
        total += wx * row;
    }
    Ok(beam.count_nb * total / PI)
}

/// Detector distance for an azimuthal scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanDistance {
    FarField,
    /// Multiple of the pre-wave radius `sigma_b^2 / lambda`.
    RelativeToPrewave(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AzimuthalScan {
    pub phi: Vec<f64>,
    /// Beam-averaged intensity normalised to a peak of one.
    pub intensity: Vec<f64>,
    /// Full width at half maximum around the peak, radians.
    pub fwhm: f64,
    /// Detector distance used, `None` in the far field.
    pub distance: Option<f64>,
}

/// Full width at half maximum of a sampled profile, with the half-maximum
/// crossings located by linear interpolation.
pub fn fwhm(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::domain("FWHM needs at least three matching samples"));
    }
    let (imax, &ymax) = y
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
    let half = 0.5 * ymax;
    let cross = |i: usize, j: usize| x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
    let left = (1..=imax).rev().find(|&i| y[i - 1] < half).map(|i| cross(i - 1, i));
    let right = (imax..x.len() - 1).find(|&i| y[i + 1] < half).map(|i| cross(i, i + 1));
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(Error::numerical(
            "profile does not fall to half maximum inside the grid",
            ymax,
            f64::NAN,
        )),
    }
}

/// Normalised azimuthal distribution at fixed `omega` and `theta`.
#[allow(clippy::too_many_arguments)]
pub fn azimuthal_scan(
    beam: &BeamProfile,
    grating: &Grating,
    kin: &ElectronKinematics,
    distance: ScanDistance,
    omega: f64,
    theta: f64,
    phi_grid: &[f64],
) -> Result<AzimuthalScan> {
    if phi_grid.is_empty() {
        return Err(Error::domain("azimuthal grid is empty"));
    }
    if phi_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("azimuthal grid must be strictly increasing"));
    }
    if !(omega > 0.0) {
        return Err(Error::domain(format!("frequency must be positive, got {omega}")));
    }
    let r = match distance {
        ScanDistance::FarField => None,
        ScanDistance::RelativeToPrewave(f) => {
            if !(f > 0.0) {
                return Err(Error::domain(format!("distance factor must be positive, got {f}")));
            }
            Some(f * beam.prewave_radius(2.0 * PI / omega)?)
        }
    };
    let values = phi_grid
        .iter()
        .map(|&phi| {
            let det = match r {
                None => DetectorGeometry::far_field(theta, phi)?,
                Some(r) => DetectorGeometry::at_distance(theta, phi, r)?,
            };
            beam_averaged_intensity(beam, grating, kin, &det, omega)
        })
        .collect::<Result<Vec<_>>>()?;
    let peak = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(Error::numerical("azimuthal profile has no positive intensity", peak, f64::NAN));
    }
    let intensity: Vec<f64> = values.iter().map(|v| v / peak).collect();
    let fwhm = fwhm(phi_grid, &intensity)?;
    Ok(AzimuthalScan {
        phi: phi_grid.to_vec(),
        intensity,
        fwhm,
        distance: r,
    })
}
