//! Central finite differences in three dimensions.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

/// Maps a phase difference into `(-pi, pi]`.
#[inline]
pub fn wrap_phase(dphi: f64) -> f64 {
    let mut r = dphi.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

pub fn central_gradient<F: Fn(&Vector3<f64>) -> f64>(f: F, x: &Vector3<f64>, h: f64) -> Vector3<f64> {
    let mut g = Vector3::zeros();
    for i in 0..3 {
        let mut xp = *x;
        let mut xm = *x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(&xp) - f(&xm)) / (2.0 * h);
    }
    g
}

/// Symmetric Hessian; mixed partials use the four-point stencil.
pub fn central_hessian<F: Fn(&Vector3<f64>) -> f64>(f: F, x: &Vector3<f64>, h: f64) -> Matrix3<f64> {
    let f0 = f(x);
    let mut hess = Matrix3::zeros();
    for i in 0..3 {
        let mut xp = *x;
        let mut xm = *x;
        xp[i] += h;
        xm[i] -= h;
        hess[(i, i)] = (f(&xp) - 2.0 * f0 + f(&xm)) / (h * h);
        for j in (i + 1)..3 {
            let shift = |si: f64, sj: f64| {
                let mut y = *x;
                y[i] += si * h;
                y[j] += sj * h;
                f(&y)
            };
            let v = (shift(1.0, 1.0) - shift(1.0, -1.0) - shift(-1.0, 1.0) + shift(-1.0, -1.0))
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}
