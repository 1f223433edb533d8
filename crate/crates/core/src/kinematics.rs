//! Constants, electron kinematics and the Smith-Purcell geometry.
//!
//! Public quantities are SI (metres, radians). Internally `hbar = c = 1`:
//! frequencies and momenta are wavenumbers in rad/m, times are lengths.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Reduced Compton wavelength of the electron, metres.
pub const LAMBDA_C: f64 = 3.8616e-13;

/// Electron rest energy used by the keV input path.
pub const ELECTRON_REST_KEV: f64 = 511.0;

/// Electron mass as an inverse length (rad/m).
#[inline]
pub fn electron_mass() -> f64 {
    1.0 / LAMBDA_C
}

/// Cosine that returns an exact zero when the angle sits on a node within
/// floating-point resolution, so that `cos(pi/2)` is `0.0` rather than `6e-17`.
#[inline]
pub fn cos_snapped(angle: f64) -> f64 {
    let c = angle.cos();
    if c.abs() < 1e-15 {
        0.0
    } else {
        c
    }
}

#[inline]
pub fn sin_snapped(angle: f64) -> f64 {
    let s = angle.sin();
    if s.abs() < 1e-15 {
        0.0
    } else {
        s
    }
}

/// Mean motion of a monoenergetic electron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectronKinematics {
    beta: f64,
    gamma: f64,
    beta_gamma: f64,
}

impl ElectronKinematics {
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::domain(format!("beta must lie in (0, 1), got {beta}")));
        }
        // 1 - beta^2 as (1 - beta)(1 + beta) keeps precision near beta -> 1
        let gamma = 1.0 / ((1.0 - beta) * (1.0 + beta)).sqrt();
        Ok(Self {
            beta,
            gamma,
            beta_gamma: beta * gamma,
        })
    }

    /// Kinetic energy in keV, converted through `gamma = 1 + T / m`.
    pub fn from_kinetic_kev(kinetic_kev: f64) -> Result<Self> {
        if !(kinetic_kev > 0.0 && kinetic_kev.is_finite()) {
            return Err(Error::domain(format!(
                "kinetic energy must be positive and finite, got {kinetic_kev} keV"
            )));
        }
        let gamma = 1.0 + kinetic_kev / ELECTRON_REST_KEV;
        let beta = (1.0 - 1.0 / (gamma * gamma)).sqrt();
        Self::from_beta(beta)
    }

    /// Kinematics of a plane-wave component with momentum `p` (rad/m).
    pub fn from_momentum(p: &Vector3<f64>) -> Result<Self> {
        let m = electron_mass();
        let pm = p.norm();
        let eps = (pm * pm + m * m).sqrt();
        Self::from_beta(pm / eps)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta_gamma(&self) -> f64 {
        self.beta_gamma
    }

    /// Momentum magnitude `m * beta * gamma` in rad/m.
    pub fn momentum(&self) -> f64 {
        self.beta_gamma / LAMBDA_C
    }
}

/// Free-function form of [`ElectronKinematics::from_beta`].
pub fn kinematics_from_beta(beta: f64) -> Result<ElectronKinematics> {
    ElectronKinematics::from_beta(beta)
}

/// A strip grating: period `d`, `N` strips, impact parameter `h` (all SI).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grating {
    period: f64,
    strips: usize,
    impact: f64,
}

impl Grating {
    pub fn new(period: f64, strips: usize, impact: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::domain(format!("grating period must be positive, got {period}")));
        }
        if strips == 0 {
            return Err(Error::domain("grating needs at least one strip"));
        }
        if !(impact >= 0.0 && impact.is_finite()) {
            return Err(Error::domain(format!(
                "impact parameter must be non-negative, got {impact}"
            )));
        }
        Ok(Self {
            period,
            strips,
            impact,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn strips(&self) -> usize {
        self.strips
    }

    pub fn impact(&self) -> f64 {
        self.impact
    }

    /// Total length `L = N d`.
    pub fn length(&self) -> f64 {
        self.strips as f64 * self.period
    }

    pub fn with_strips(&self, strips: usize) -> Result<Self> {
        Self::new(self.period, strips, self.impact)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    FarField,
    Finite(f64),
}

/// Observation direction (polar `theta` from the beam axis, azimuth `phi`
/// from the strip direction) and detector distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorGeometry {
    theta: f64,
    phi: f64,
    distance: Distance,
}

impl DetectorGeometry {
    pub fn new(theta: f64, phi: f64, distance: Distance) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::domain(format!("theta must lie in [0, pi], got {theta}")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::domain(format!("phi must lie in [0, 2pi), got {phi}")));
        }
        if let Distance::Finite(r) = distance {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::domain(format!("detector distance must be positive, got {r}")));
            }
        }
        Ok(Self {
            theta,
            phi,
            distance,
        })
    }

    pub fn far_field(theta: f64, phi: f64) -> Result<Self> {
        Self::new(theta, phi, Distance::FarField)
    }

    pub fn at_distance(theta: f64, phi: f64, r: f64) -> Result<Self> {
        Self::new(theta, phi, Distance::Finite(r))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn distance(&self) -> Distance {
        self.distance
    }

    pub fn is_far_field(&self) -> bool {
        matches!(self.distance, Distance::FarField)
    }

    pub fn with_angles(&self, theta: f64, phi: f64) -> Result<Self> {
        Self::new(theta, phi, self.distance)
    }

    /// Unit vector towards the detector.
    pub fn direction(&self) -> Vector3<f64> {
        let (st, ct) = (sin_snapped(self.theta), cos_snapped(self.theta));
        Vector3::new(st * cos_snapped(self.phi), st * sin_snapped(self.phi), ct)
    }

    /// Rejects finite distances that do not clear the grating length.
    pub fn check_against(&self, grating: &Grating) -> Result<()> {
        match self.distance {
            Distance::Finite(r) if r <= grating.length() => Err(Error::domain(format!(
                "detector distance {r} m must exceed the grating length {} m",
                grating.length()
            ))),
            _ => Ok(()),
        }
    }
}

/// Smith-Purcell wavelength `d (1/beta - cos theta) / n`.
pub fn sp_wavelength(grating: &Grating, kin: &ElectronKinematics, theta: f64, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("diffraction order must be at least 1"));
    }
    Ok(grating.period() * (1.0 / kin.beta() - theta.cos()) / n as f64)
}

/// Resonant angular frequency (rad/m) of order `n` at polar angle `theta`.
pub fn sp_frequency(grating: &Grating, kin: &ElectronKinematics, theta: f64, n: u32) -> Result<f64> {
    Ok(2.0 * PI / sp_wavelength(grating, kin, theta, n)?)
}

/// Transverse coherence width `beta gamma lambda` of the virtual photon.
pub fn photon_coherence_width(kin: &ElectronKinematics, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("wavelength must be positive, got {lambda}")));
    }
    Ok(kin.beta_gamma() * lambda)
}

/// Radius `sigma_b^2 / lambda` inside which far-field formulas fail.
pub fn prewave_radius(sigma_b: f64, lambda: f64) -> Result<f64> {
    if !(sigma_b > 0.0) || !(lambda > 0.0) {
        return Err(Error::domain(format!(
            "beam width and wavelength must be positive, got {sigma_b}, {lambda}"
        )));
    }
    Ok(sigma_b * sigma_b / lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn half_light_speed() {
        let k = kinematics_from_beta(0.5).unwrap();
        assert_relative_eq!(k.gamma(), 1.154_700_538_379_251_5, max_relative = 1e-12);
        assert_relative_eq!(k.beta_gamma(), 0.577_350_269_189_625_8, max_relative = 1e-12);
    }

    #[test]
    fn rest_limit() {
        let k = kinematics_from_beta(1e-9).unwrap();
        assert_relative_eq!(k.gamma(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn beta_068_against_high_precision() {
        // 1/sqrt(1 - 0.68^2) = 1/sqrt(0.5376), evaluated with 30-digit arithmetic
        let k = kinematics_from_beta(0.68).unwrap();
        assert_relative_eq!(k.gamma(), 1.363_861_813_974_952_4, max_relative = 1e-12);
    }

    #[test]
    fn beta_out_of_range() {
        for b in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(matches!(kinematics_from_beta(b), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn kev_path() {
        // 511 keV kinetic -> gamma = 2
        let k = ElectronKinematics::from_kinetic_kev(511.0).unwrap();
        assert_relative_eq!(k.gamma(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn wavelength_examples() {
        let kin = kinematics_from_beta(0.7).unwrap();
        let g = Grating::new(416e-9, 10, 0.0).unwrap();
        let lam = sp_wavelength(&g, &kin, PI / 2.0, 1).unwrap();
        assert_relative_eq!(lam, 594.2857e-9, max_relative = 1e-6);

        let kin = kinematics_from_beta(0.5).unwrap();
        let g = Grating::new(10e-6, 10, 0.0).unwrap();
        let lam1 = sp_wavelength(&g, &kin, PI / 2.0, 1).unwrap();
        assert_relative_eq!(lam1, 20e-6, max_relative = 1e-12);
        let lam2 = sp_wavelength(&g, &kin, PI / 2.0, 2).unwrap();
        assert_relative_eq!(lam2, lam1 / 2.0, max_relative = 1e-15);
        assert!(sp_wavelength(&g, &kin, 0.3, 0).is_err());
    }

    #[test]
    fn coherence_width() {
        let kin = kinematics_from_beta(0.5).unwrap();
        assert_relative_eq!(photon_coherence_width(&kin, 20e-6).unwrap(), 11.547e-6, max_relative = 1e-4);
        let kin = kinematics_from_beta(0.7).unwrap();
        let w = photon_coherence_width(&kin, 594e-9).unwrap();
        assert_relative_eq!(w, 582e-9, max_relative = 1e-3);
        assert!(w < 594e-9);
    }

    #[test]
    fn prewave_radii() {
        assert_relative_eq!(prewave_radius(300e-6, 594.2857e-9).unwrap(), 0.1514, max_relative = 1e-3);
        assert_relative_eq!(prewave_radius(2e-3, 594.2857e-9).unwrap(), 6.7308, max_relative = 1e-3);
        assert!(prewave_radius(0.0, 1e-6).is_err());
    }

    #[test]
    fn detector_validation() {
        assert!(DetectorGeometry::far_field(-0.1, 0.0).is_err());
        assert!(DetectorGeometry::far_field(0.1, 2.0 * PI).is_err());
        assert!(DetectorGeometry::at_distance(0.1, 0.0, 0.0).is_err());
        let g = Grating::new(1e-3, 100, 0.0).unwrap();
        let det = DetectorGeometry::at_distance(1.0, 1.0, 0.05).unwrap();
        assert!(det.check_against(&g).is_err());
        let det = DetectorGeometry::at_distance(1.0, 1.0, 0.2).unwrap();
        assert!(det.check_against(&g).is_ok());
    }

    #[test]
    fn snapped_direction_on_axis() {
        let det = DetectorGeometry::far_field(PI / 2.0, PI / 2.0).unwrap();
        let n = det.direction();
        assert_eq!(n.x, 0.0);
        assert_eq!(n.z, 0.0);
        assert_eq!(n.y, 1.0);
    }
}
