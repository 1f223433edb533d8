//! Golden-section maximisation on a bracketing interval.

use crate::error::{Error, Result};

pub const DEFAULT_PEAK_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub argmax: f64,
    pub max: f64,
}

/// Locates a local maximum of `f` inside `[a, b]` to `|d argmax| < tol`.
///
/// This is a local search: for multimodal functions the caller supplies a
/// bracket that contains the peak of interest. Functions whose sampled
/// variation is below `1e-14` of their magnitude are rejected as flat.
pub fn find_peak<F: FnMut(f64) -> f64>(mut f: F, interval: (f64, f64), tol: f64) -> Result<Peak> {
    let (mut a, mut b) = interval;
    if !(a < b) || !(tol > 0.0) {
        return Err(Error::domain(format!(
            "peak search needs a < b and tol > 0, got [{a}, {b}], tol {tol}"
        )));
    }
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let fa = f(a);
    let fb = f(b);
    for v in [fa, fb, fc, fd] {
        if !v.is_finite() {
            return Err(Error::numerical("non-finite function value in peak search", v, f64::NAN));
        }
    }
    let hi = fa.max(fb).max(fc).max(fd);
    let lo = fa.min(fb).min(fc).min(fd);
    if hi - lo <= 1e-14 * hi.abs().max(lo.abs()) {
        return Err(Error::DegeneratePeak(format!(
            "function is flat on [{a}, {b}] (variation {:e})",
            hi - lo
        )));
    }

    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let (argmax, max) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok(Peak { argmax, max })
}
