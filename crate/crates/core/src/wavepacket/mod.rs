//! Momentum-space models of Gaussian and vortex electron packets.
//!
//! A packet is stored through its mean momentum `<p>`, width `delta_p`, OAM
//! `ell` and an accumulated position offset `x0` (the phase factor
//! `exp(-i x0.p)`). Amplitudes are evaluated in log space and in coordinates
//! relative to `<p>`, which keeps large `ell` and large `<p> / delta_p`
//! ratios well conditioned. The global phase `exp(-i x0.<p>)` is dropped.

mod moments;
mod wigner;

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::{electron_mass, ElectronKinematics};
use crate::numerics::{integrate_adaptive_vec, QuadratureSpec, Region, VecEstimate};

pub use moments::{
    curvature_matrix, mean_dipole, packet_moments, rayleigh_length, remove_mean_dipole,
    sigma_perp_at, spreading_time, EnergyLaw, PacketMoments,
};
pub use wigner::{
    marginal_nodes, wigner, wigner_momentum_marginal, wigner_position_marginal, wigner_q_cut,
    wigner_with, WignerSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketKind {
    Gaussian,
    Vortex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketModel {
    kind: PacketKind,
    mean_momentum: Vector3<f64>,
    delta_p: f64,
    ell: i32,
    phase_offset_x0: Vector3<f64>,
    ln_norm: f64,
}

/// `ln(n!)` by direct summation.
fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

impl PacketModel {
    fn build(kind: PacketKind, mean_momentum: Vector3<f64>, delta_p: f64, ell: i32) -> Result<Self> {
        if !(delta_p > 0.0 && delta_p.is_finite()) {
            return Err(Error::domain(format!("momentum width must be positive, got {delta_p}")));
        }
        if !mean_momentum.iter().all(|c| c.is_finite()) {
            return Err(Error::domain("mean momentum must be finite"));
        }
        let l = ell.unsigned_abs();
        // |psi|^2 = A^2 (p_perp/dp)^(2|l|) exp(-(p-<p>)^2/dp^2) integrates to
        // A^2 pi^(3/2) dp^3 |l|! over d^3p, which must equal (2 pi)^3
        let ln_norm = 0.5
            * (3.0 * (2.0 * PI).ln() - 1.5 * PI.ln() - 3.0 * delta_p.ln() - ln_factorial(l));
        Ok(Self {
            kind,
            mean_momentum,
            delta_p,
            ell,
            phase_offset_x0: Vector3::zeros(),
            ln_norm,
        })
    }

    pub fn kind(&self) -> PacketKind {
        self.kind
    }

    pub fn mean_momentum(&self) -> Vector3<f64> {
        self.mean_momentum
    }

    pub fn delta_p(&self) -> f64 {
        self.delta_p
    }

    pub fn ell(&self) -> i32 {
        self.ell
    }

    pub fn phase_offset_x0(&self) -> Vector3<f64> {
        self.phase_offset_x0
    }

    /// Transverse coherence length `1 / delta_p`.
    pub fn sigma_perp(&self) -> f64 {
        1.0 / self.delta_p
    }

    pub fn is_vortex(&self) -> bool {
        self.kind == PacketKind::Vortex
    }

    /// Kinematics of the mean momentum.
    pub fn mean_kinematics(&self) -> Result<ElectronKinematics> {
        ElectronKinematics::from_momentum(&self.mean_momentum)
    }

    /// Same packet with the offset `x0` replaced.
    pub fn with_phase_offset(&self, x0: Vector3<f64>) -> Self {
        Self {
            phase_offset_x0: x0,
            ..self.clone()
        }
    }

    /// Applies `psi(p) -> psi(p) exp(-i r.p)`, a rigid shift by `r`.
    pub fn shifted(&self, r: Vector3<f64>) -> Self {
        self.with_phase_offset(self.phase_offset_x0 + r)
    }

    /// The packet with opposite OAM.
    pub fn with_opposite_ell(&self) -> Self {
        Self {
            ell: -self.ell,
            ..self.clone()
        }
    }

    /// `ln |psi|` at momentum `k` relative to the mean.
    pub(crate) fn ln_amplitude_rel(&self, k: &Vector3<f64>) -> f64 {
        let s2 = k.norm_squared() / (self.delta_p * self.delta_p);
        let mut v = self.ln_norm - 0.5 * s2;
        if self.ell != 0 {
            let p_perp = (self.mean_momentum.x + k.x).hypot(self.mean_momentum.y + k.y);
            v += self.ell.unsigned_abs() as f64 * (p_perp / self.delta_p).ln();
        }
        v
    }

    pub(crate) fn amplitude_rel(&self, k: &Vector3<f64>) -> f64 {
        self.ln_amplitude_rel(k).exp()
    }

    /// Phase `ell * atan2(p_y, p_x) - x0.k`.
    pub(crate) fn phase_rel(&self, k: &Vector3<f64>) -> f64 {
        let mut phi = -self.phase_offset_x0.dot(k);
        if self.ell != 0 {
            let px = self.mean_momentum.x + k.x;
            let py = self.mean_momentum.y + k.y;
            phi += self.ell as f64 * py.atan2(px);
        }
        phi
    }

    pub(crate) fn psi_rel(&self, k: &Vector3<f64>) -> Complex64 {
        Complex64::from_polar(self.amplitude_rel(k), self.phase_rel(k))
    }

    pub(crate) fn density_rel(&self, k: &Vector3<f64>) -> f64 {
        (2.0 * self.ln_amplitude_rel(k)).exp()
    }

    /// `ln(eps(<p> + k) / eps(<p>))` without cancellation.
    pub(crate) fn ln_energy_ratio(&self, k: &Vector3<f64>, law: EnergyLaw) -> f64 {
        let m = electron_mass();
        let p0 = self.mean_momentum;
        let dp2 = 2.0 * p0.dot(k) + k.norm_squared();
        match law {
            EnergyLaw::Relativistic => {
                let eps0_sq = p0.norm_squared() + m * m;
                0.5 * (dp2 / eps0_sq).ln_1p()
            }
            EnergyLaw::NonRelativistic => {
                let eps0 = m + p0.norm_squared() / (2.0 * m);
                (dp2 / (2.0 * m * eps0)).ln_1p()
            }
        }
    }

    pub fn amplitude(&self, p: &Vector3<f64>) -> f64 {
        self.amplitude_rel(&(p - self.mean_momentum))
    }

    pub fn phase(&self, p: &Vector3<f64>) -> f64 {
        self.phase_rel(&(p - self.mean_momentum))
    }

    /// `psi(p)`, up to the dropped global phase.
    pub fn psi(&self, p: &Vector3<f64>) -> Complex64 {
        self.psi_rel(&(p - self.mean_momentum))
    }

    /// `|psi(p)|^2`, normalised so that `int d^3p/(2 pi)^3 |psi|^2 = 1`.
    pub fn density(&self, p: &Vector3<f64>) -> f64 {
        self.density_rel(&(p - self.mean_momentum))
    }

    /// Half-widths, in units of `delta_p`, of a box holding all but ~1e-13
    /// of the probability: (transverse, longitudinal).
    pub fn support_half_widths(&self) -> (f64, f64) {
        let l = self.ell.unsigned_abs() as f64;
        let transverse = (l + 10.0 * (l + 1.0).sqrt() + 30.0).sqrt();
        (transverse, 7.0)
    }

    /// Integrates `f(k)` against `d^3k / (2 pi)^3` over the packet support.
    ///
    /// The integrand receives the momentum relative to the mean; the
    /// integration runs in units of `delta_p`.
    pub fn momentum_integral<const K: usize, F>(&self, f: F, spec: &QuadratureSpec) -> Result<VecEstimate<K>>
    where
        F: Fn(&Vector3<f64>) -> [f64; K],
    {
        let (st, sl) = self.support_half_widths();
        let region = Region::new(&[(-st, st), (-st, st), (-sl, sl)])?;
        let dp = self.delta_p;
        let jac = (dp / (2.0 * PI)).powi(3);
        // the Jacobian goes inside so that absolute tolerances see O(1) values
        integrate_adaptive_vec(
            |s| {
                let k = Vector3::new(s[0] * dp, s[1] * dp, s[2] * dp);
                f(&k).map(|v| v * jac)
            },
            &region,
            spec,
        )
    }
}

/// Mean momentum `m beta gamma z` for the given kinematics.
pub fn mean_momentum_along_z(kin: &ElectronKinematics) -> Vector3<f64> {
    Vector3::new(0.0, 0.0, kin.momentum())
}

/// Normalised Gaussian packet with `|psi|^2 ~ exp(-(p - <p>)^2 / dp^2)`.
pub fn make_gaussian_packet(mean_momentum: Vector3<f64>, delta_p: f64) -> Result<PacketModel> {
    PacketModel::build(PacketKind::Gaussian, mean_momentum, delta_p, 0)
}

/// Normalised vortex packet with `|psi| ~ (p_perp/dp)^|ell| exp(-(p-<p>)^2/2dp^2)`
/// and phase `ell * atan2(p_y, p_x)`. The vortex axis is `z`, so the mean
/// momentum must point along it.
pub fn make_vortex_packet(mean_momentum: Vector3<f64>, delta_p: f64, ell: i32) -> Result<PacketModel> {
    if ell == 0 {
        return Err(Error::domain(
            "ell = 0 has no vortex; construct a Gaussian packet instead",
        ));
    }
    if mean_momentum.x != 0.0 || mean_momentum.y != 0.0 {
        return Err(Error::domain("vortex mean momentum must lie along the z axis"));
    }
    PacketModel::build(PacketKind::Vortex, mean_momentum, delta_p, ell)
}
