//! Spreading, multipole moments, intrinsic-dipole removal and the amplitude
//! curvature matrix of a packet.

use nalgebra::{Matrix3, Vector3};

use super::PacketModel;
use crate::error::{Error, Result};
use crate::kinematics::{ElectronKinematics, LAMBDA_C};
use crate::numerics::{central_hessian, wrap_phase, QuadratureSpec};

/// Relative finite-difference step, in units of `delta_p`.
const FD_STEP: f64 = 1e-4;

/// Mean phase gradients below this fraction of `sigma_perp` are quadrature
/// noise and are treated as zero.
const DIPOLE_NOISE_FLOOR: f64 = 1e-12;

/// Amplitudes below this are outside the resolved support.
const AMPLITUDE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyLaw {
    /// `eps = sqrt(p^2 + m^2)`
    Relativistic,
    /// `eps = m + p^2 / 2m`
    NonRelativistic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketMoments {
    /// Magnetic moment divided by the charge, `ell / 2m` along z, in metres.
    pub mu: Vector3<f64>,
    /// Electric quadrupole tensor, m^2.
    pub q: Matrix3<f64>,
    /// Mean electric dipole (position offset), m.
    pub d_mean: Vector3<f64>,
}

fn require_vortex(packet: &PacketModel, what: &str) -> Result<u32> {
    match packet.ell.unsigned_abs() {
        0 => Err(Error::domain(format!(
            "{what} is defined for vortex packets only (ell != 0)"
        ))),
        l => Ok(l),
    }
}

/// `t_d = (lambda_c / |ell|) (sigma_perp / lambda_c)^2`, as a length.
pub fn spreading_time(packet: &PacketModel) -> Result<f64> {
    let l = require_vortex(packet, "spreading time")?;
    let s = packet.sigma_perp();
    Ok(s * s / (l as f64 * LAMBDA_C))
}

/// `z_R = beta t_d`.
pub fn rayleigh_length(packet: &PacketModel, kin: &ElectronKinematics) -> Result<f64> {
    Ok(kin.beta() * spreading_time(packet)?)
}

/// `sigma_perp(t) = sigma_perp sqrt(1 + t^2 / t_d^2)`.
pub fn sigma_perp_at(packet: &PacketModel, t: f64) -> Result<f64> {
    let td = spreading_time(packet)?;
    let x = t / td;
    Ok(packet.sigma_perp() * (1.0 + x * x).sqrt())
}

/// Closed-form moments: `mu = ell lambda_c / 2 z`,
/// `Q(t) = sigma_perp(t)^2 diag{1/2, 1/2, -1}`, and the dipole carried by the
/// position offset.
pub fn packet_moments(packet: &PacketModel, t: f64) -> Result<PacketMoments> {
    let sigma = sigma_perp_at(packet, t)?;
    let s2 = sigma * sigma;
    Ok(PacketMoments {
        mu: Vector3::new(0.0, 0.0, packet.ell as f64 * LAMBDA_C / 2.0),
        q: Matrix3::from_diagonal(&Vector3::new(0.5 * s2, 0.5 * s2, -s2)),
        d_mean: packet.phase_offset_x0,
    })
}

/// Phase gradient by central differences with the difference wrapped into
/// `(-pi, pi]`, so the `atan2` branch cut never leaks in.
pub(crate) fn phase_gradient_rel(packet: &PacketModel, k: &Vector3<f64>) -> Vector3<f64> {
    let h = FD_STEP * packet.delta_p;
    let mut g = Vector3::zeros();
    for i in 0..3 {
        let mut kp = *k;
        let mut km = *k;
        kp[i] += h;
        km[i] -= h;
        g[i] = wrap_phase(packet.phase_rel(&kp) - packet.phase_rel(&km)) / (2.0 * h);
    }
    g
}

/// `<d phi / d p>` as a ratio of two integrals evaluated on shared nodes.
fn mean_phase_gradient(packet: &PacketModel, spec: &QuadratureSpec) -> Result<Vector3<f64>> {
    let dp = packet.delta_p;
    let est = packet.momentum_integral(
        |k| {
            let w = packet.density_rel(k);
            if w == 0.0 {
                return [0.0; 4];
            }
            // gradient in units of sigma_perp keeps components O(1)
            let g = phase_gradient_rel(packet, k) * dp;
            [w, w * g.x, w * g.y, w * g.z]
        },
        spec,
    )?;
    let [norm, gx, gy, gz] = est.value;
    if !(norm > 0.0) {
        return Err(Error::numerical("packet density integrates to zero", norm, est.error));
    }
    let mut g = Vector3::new(gx, gy, gz) / norm;
    for c in g.iter_mut() {
        if c.abs() < DIPOLE_NOISE_FLOOR {
            *c = 0.0;
        }
    }
    Ok(g / dp)
}

/// Mean electric dipole `d = -<d phi / d p>`, by quadrature.
pub fn mean_dipole(packet: &PacketModel) -> Result<Vector3<f64>> {
    Ok(-mean_phase_gradient(packet, &QuadratureSpec::default())?)
}

/// Cancels the mean dipole with the phase rotation `exp(-i x0.p)`,
/// `x0 = <d phi / d p>`.
pub fn remove_mean_dipole(packet: &PacketModel) -> Result<PacketModel> {
    let g = mean_phase_gradient(packet, &QuadratureSpec::default())?;
    if g == Vector3::zeros() {
        return Ok(packet.clone());
    }
    Ok(packet.shifted(g))
}

/// `D_ij = 2 eps (|Psi| d_i d_j |Psi| - d_i |Psi| d_j |Psi|)` with
/// `Psi = psi / sqrt(2 eps)`, evaluated at absolute momentum `p`.
///
/// Uses the identity `|Psi| d2|Psi| - d|Psi| d|Psi| = |Psi|^2 d2 ln|Psi|`, so
/// the finite differences act on a smooth logarithm.
pub fn curvature_matrix(packet: &PacketModel, p: &Vector3<f64>, law: EnergyLaw) -> Result<Matrix3<f64>> {
    let k = p - packet.mean_momentum;
    let ln_amp = packet.ln_amplitude_rel(&k);
    if !(ln_amp > AMPLITUDE_FLOOR.ln()) {
        return Err(Error::domain(format!(
            "momentum lies outside the resolved packet support (|psi| = {:e})",
            ln_amp.exp()
        )));
    }
    let dp = packet.delta_p;
    // ln|Psi| minus constants, as a function of k in units of delta_p
    let shape = |s: &Vector3<f64>| {
        let kk = s * dp;
        packet.ln_amplitude_rel(&kk) - packet.ln_norm - 0.5 * packet.ln_energy_ratio(&kk, law)
    };
    let hess = central_hessian(shape, &(k / dp), FD_STEP) / (dp * dp);
    // 2 eps |Psi|^2 = |psi|^2
    Ok(hess * (2.0 * ln_amp).exp())
}
