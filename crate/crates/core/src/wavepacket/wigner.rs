//! Wigner function of a packet,
//! `n(x, p, t) = int d^3q/(2pi)^3 psi*(p - q/2) psi(p + q/2) e^{i q.x} e^{-i t (eps+ - eps-)}`.
//!
//! The q integral runs over a ball of radius `q_cut` in spherical
//! coordinates, in units of `delta_p`, so the result is dimensionless.

use std::f64::consts::PI;

use nalgebra::Vector3;

use super::PacketModel;
use crate::error::{Error, Result};
use crate::kinematics::electron_mass;
use crate::numerics::{gauss_hermite, integrate_adaptive_vec, QuadratureSpec, Region};

/// Floor on the cutoff radius, in units of `delta_p`.
const MIN_Q_CUT: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerSpec {
    /// Cutoff radius in units of `delta_p`; `None` picks [`wigner_q_cut`].
    pub q_cut: Option<f64>,
    pub quadrature: QuadratureSpec,
    /// Largest accepted `|Im n| / |Re n|` beyond the quadrature error.
    pub imag_tol: f64,
}

impl Default for WignerSpec {
    fn default() -> Self {
        Self {
            q_cut: None,
            // |n| <= 8 in these units, so an absolute floor of 1e-8 is
            // already far below any resolvable structure
            quadrature: QuadratureSpec::default().with_abs_tol(1e-8),
            imag_tol: 1e-8,
        }
    }
}

/// Cutoff `q_cut / delta_p`.
///
/// The integrand carries `(p_perp/dp)^{2|l|} exp(-q^2/4dp^2)`, whose radial
/// weight peaks near `q ~ 2 sqrt|l|`; the cutoff clears that peak by several
/// widths and never drops below 8.
pub fn wigner_q_cut(packet: &PacketModel) -> f64 {
    let l = packet.ell.unsigned_abs() as f64;
    MIN_Q_CUT.max(2.0 * (l + 6.0 * l.sqrt() + 16.0).sqrt())
}

/// `n(x, p, t)` with default accuracy.
pub fn wigner(packet: &PacketModel, x: &Vector3<f64>, p: &Vector3<f64>, t: f64) -> Result<f64> {
    wigner_with(packet, x, p, t, &WignerSpec::default())
}

pub fn wigner_with(
    packet: &PacketModel,
    x: &Vector3<f64>,
    p: &Vector3<f64>,
    t: f64,
    spec: &WignerSpec,
) -> Result<f64> {
    let q_cut = spec.q_cut.unwrap_or_else(|| wigner_q_cut(packet));
    if !(q_cut > 0.0) {
        return Err(Error::domain(format!("Wigner cutoff must be positive, got {q_cut}")));
    }
    let dp = packet.delta_p;
    let k = p - packet.mean_momentum;
    let m2 = electron_mass().powi(2);
    // psi~ = psi dp^{3/2} makes the integrand dimensionless
    let ln_scale = 3.0 * dp.ln();
    let pref = 1.0 / (2.0 * PI).powi(3);
    let region = Region::new(&[(0.0, q_cut), (-1.0, 1.0), (0.0, 2.0 * PI)])?;

    let est = integrate_adaptive_vec(
        |s| {
            let (r, u, az) = (s[0], s[1], s[2]);
            let st = (1.0 - u * u).max(0.0).sqrt();
            let q = Vector3::new(st * az.cos(), st * az.sin(), u) * (r * dp);
            let kp = k + q * 0.5;
            let km = k - q * 0.5;
            let ln_amp = packet.ln_amplitude_rel(&kp) + packet.ln_amplitude_rel(&km) + ln_scale;
            if ln_amp < -700.0 {
                return [0.0, 0.0];
            }
            let mut phase = packet.phase_rel(&kp) - packet.phase_rel(&km) + q.dot(x);
            if t != 0.0 {
                let pp = packet.mean_momentum + kp;
                let pm = packet.mean_momentum + km;
                let eps_sum = (pp.norm_squared() + m2).sqrt() + (pm.norm_squared() + m2).sqrt();
                // eps+ - eps- = (p+^2 - p-^2) / (eps+ + eps-), with p+^2 - p-^2 = 2 p.q
                let p_mid = packet.mean_momentum + k;
                phase -= t * 2.0 * p_mid.dot(&q) / eps_sum;
            }
            let w = pref * r * r * ln_amp.exp();
            [w * phase.cos(), w * phase.sin()]
        },
        &region,
        &spec.quadrature,
    )?;
    let [re, im] = est.value;
    if im.abs() > (spec.imag_tol * re.abs()).max(est.error) {
        return Err(Error::numerical(
            format!("Wigner function has an imaginary residue {im:e}"),
            re,
            est.error,
        ));
    }
    Ok(re)
}

/// Gauss-Hermite order per axis that integrates `n` exactly at `t = 0`,
/// where it is a Gaussian times a polynomial of degree `2|l|` per axis.
pub fn marginal_nodes(packet: &PacketModel) -> usize {
    packet.ell.unsigned_abs() as usize + 1
}

/// `int d^3x n(x, p, t)`, which should reproduce `|psi(p)|^2`.
///
/// The grid is centred on the classical position `x0 + v t` with spacing
/// in units of `1/delta_p`.
pub fn wigner_position_marginal(
    packet: &PacketModel,
    p: &Vector3<f64>,
    t: f64,
    nodes: usize,
    spec: &WignerSpec,
) -> Result<f64> {
    let dp = packet.delta_p;
    let eps = (p.norm_squared() + electron_mass().powi(2)).sqrt();
    let centre = packet.phase_offset_x0 + p * (t / eps);
    let sum = hermite_cube(nodes, |s| {
        wigner_with(packet, &(centre + s / dp), p, t, spec)
    })?;
    Ok(sum / dp.powi(3))
}

/// `int d^3p/(2pi)^3 n(x, p, 0)`, which should reproduce `|psi(x)|^2`.
pub fn wigner_momentum_marginal(
    packet: &PacketModel,
    x: &Vector3<f64>,
    nodes: usize,
    spec: &WignerSpec,
) -> Result<f64> {
    let dp = packet.delta_p;
    let p0 = packet.mean_momentum;
    let sum = hermite_cube(nodes, |s| wigner_with(packet, x, &(p0 + s * dp), 0.0, spec))?;
    Ok(sum * (dp / (2.0 * PI)).powi(3))
}

/// `int d^3s f(s)` on the product Gauss-Hermite grid, with the weight
/// `exp(-s^2)` divided back out.
fn hermite_cube<F>(nodes: usize, mut f: F) -> Result<f64>
where
    F: FnMut(Vector3<f64>) -> Result<f64>,
{
    let gh = gauss_hermite(nodes)?;
    let mut sum = 0.0;
    for (&a, &wa) in gh.nodes.iter().zip(&gh.weights) {
        for (&b, &wb) in gh.nodes.iter().zip(&gh.weights) {
            for (&c, &wc) in gh.nodes.iter().zip(&gh.weights) {
                let s = Vector3::new(a, b, c);
                sum += wa * wb * wc * s.norm_squared().exp() * f(s)?;
            }
        }
    }
    Ok(sum)
}
