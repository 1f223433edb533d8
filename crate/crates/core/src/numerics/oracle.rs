//! Brute-force cross-checks for the closed-form packet physics.
//!
//! Everything here works from `psi(p)` directly: position moments come from
//! `x = i d/dp` acting on the complex amplitude, with no use of the phase
//! model or of the closed forms being tested.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::LAMBDA_C;
use crate::numerics::QuadratureSpec;
use crate::wavepacket::PacketModel;

const FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentKind {
    Normalization,
    Dipole,
    Quadrupole,
    /// Axial magnetic moment from `<L_z>`.
    MagneticMoment,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MomentOracle {
    Normalization(f64),
    /// Mean position, m.
    Dipole(Vector3<f64>),
    /// `<3 x_i x_j - r^2 delta_ij>` about the mean position, m^2.
    Quadrupole(Matrix3<f64>),
    /// `<L_z> lambda_c / 2` along z, m.
    MagneticMoment(Vector3<f64>),
}

/// Central-difference gradient of `psi`, in units of `1 / delta_p`.
fn psi_gradient(packet: &PacketModel, k: &Vector3<f64>) -> [Complex64; 3] {
    let h = FD_STEP * packet.delta_p();
    let mut g = [Complex64::new(0.0, 0.0); 3];
    for (i, gi) in g.iter_mut().enumerate() {
        let mut kp = *k;
        let mut km = *k;
        kp[i] += h;
        km[i] -= h;
        *gi = (packet.psi_rel(&kp) - packet.psi_rel(&km)) / (2.0 * FD_STEP);
    }
    g
}

fn checked_norm(norm: f64, error: f64) -> Result<f64> {
    if norm > 0.0 {
        Ok(norm)
    } else {
        Err(Error::numerical("packet density integrates to zero", norm, error))
    }
}

/// Computes the requested moment by 3-D quadrature over the packet support.
pub fn oracle_moment_quadrature(packet: &PacketModel, kind: MomentKind) -> Result<MomentOracle> {
    let spec = QuadratureSpec::default();
    let sigma = packet.sigma_perp();
    match kind {
        MomentKind::Normalization => {
            let est = packet.momentum_integral(|k| [packet.density_rel(k)], &spec)?;
            Ok(MomentOracle::Normalization(est.value[0]))
        }
        MomentKind::Dipole => {
            let est = packet.momentum_integral(
                |k| {
                    let psi = packet.psi_rel(k);
                    let g = psi_gradient(packet, k);
                    // <x> = int psi* i grad psi
                    let x = |c: Complex64| -(psi.conj() * c).im;
                    [psi.norm_sqr(), x(g[0]), x(g[1]), x(g[2])]
                },
                &spec,
            )?;
            let [n, x, y, z] = est.value;
            let n = checked_norm(n, est.error)?;
            Ok(MomentOracle::Dipole(Vector3::new(x, y, z) * (sigma / n)))
        }
        MomentKind::Quadrupole => {
            let est = packet.momentum_integral(
                |k| {
                    let psi = packet.psi_rel(k);
                    let g = psi_gradient(packet, k);
                    let x = |c: Complex64| -(psi.conj() * c).im;
                    // <x_i x_j> = int (d_i psi)* (d_j psi)
                    let xx = |i: usize, j: usize| (g[i].conj() * g[j]).re;
                    [
                        psi.norm_sqr(),
                        x(g[0]),
                        x(g[1]),
                        x(g[2]),
                        xx(0, 0),
                        xx(1, 1),
                        xx(2, 2),
                        xx(0, 1),
                        xx(0, 2),
                        xx(1, 2),
                    ]
                },
                &spec,
            )?;
            let v = est.value;
            let n = checked_norm(v[0], est.error)?;
            let mean = Vector3::new(v[1], v[2], v[3]) / n;
            let second = Matrix3::new(v[4], v[7], v[8], v[7], v[5], v[9], v[8], v[9], v[6]) / n;
            let cov = second - mean * mean.transpose();
            let q = cov * 3.0 - Matrix3::identity() * cov.trace();
            Ok(MomentOracle::Quadrupole(q * (sigma * sigma)))
        }
        MomentKind::MagneticMoment => {
            let p0 = packet.mean_momentum();
            let dp = packet.delta_p();
            let est = packet.momentum_integral(
                |k| {
                    let psi = packet.psi_rel(k);
                    let g = psi_gradient(packet, k);
                    let px = (p0.x + k.x) / dp;
                    let py = (p0.y + k.y) / dp;
                    // L_z = i (p_y d/dp_x - p_x d/dp_y)
                    let lz = (psi.conj() * Complex64::i() * (g[0] * py - g[1] * px)).re;
                    [psi.norm_sqr(), lz]
                },
                &spec,
            )?;
            let [n, lz] = est.value;
            let n = checked_norm(n, est.error)?;
            Ok(MomentOracle::MagneticMoment(Vector3::new(0.0, 0.0, lz / n * LAMBDA_C / 2.0)))
        }
    }
}

/// `|psi(x, 0)|^2` from the Fourier transform
/// `psi(x) = int d^3p/(2pi)^3 psi(p) e^{i p.x}` by direct quadrature, up to
/// the global phase `e^{i <p>.x}`.
pub fn oracle_position_density(packet: &PacketModel, x: &Vector3<f64>) -> Result<f64> {
    // psi(x) scales as delta_p^{3/2}; inner integrals can cancel, so the
    // floor is set against that scale rather than left to the relative target
    let spec = QuadratureSpec::default().with_abs_tol(1e-10 * packet.delta_p().powf(1.5));
    let est = packet.momentum_integral(
        |k| {
            let v = packet.psi_rel(k) * Complex64::from_polar(1.0, k.dot(x));
            [v.re, v.im]
        },
        &spec,
    )?;
    let [re, im] = est.value;
    Ok(re * re + im * im)
}

/// Discrete strip average `(1/N) sum (m d)^2 / z_R^2` with `d = z_max / N`,
/// against the continuum `(1/z_max) int_0^z_max z^2 / z_R^2 dz`.
pub fn oracle_dense_z_average(z_max: f64, z_r: f64, n_strips: usize) -> Result<(f64, f64)> {
    if !(z_max > 0.0) || !(z_r > 0.0) || n_strips == 0 {
        return Err(Error::domain(format!(
            "need z_max > 0, z_R > 0 and at least one strip, got {z_max}, {z_r}, {n_strips}"
        )));
    }
    let d = z_max / n_strips as f64;
    let sum: f64 = (0..n_strips).map(|m| (m as f64 * d / z_r).powi(2)).sum();
    let discrete = sum / n_strips as f64;
    let continuum = (z_max / z_r).powi(2) / 3.0;
    Ok((discrete, continuum))
}
