//! Globally adaptive Gauss-Kronrod (10/21) quadrature, nested for boxes of
//! up to three dimensions.
//!
//! Errors from inner integrations are carried outward: each outer node adds
//! its inner error estimate weighted by the Kronrod weight, so the reported
//! error bounds the whole nested computation rather than the outer rule only.
//! Subdivision is driven by the outer rule's own error; the carried part
//! cannot shrink by splitting outer intervals and is only reported.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_931_883_226,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights paired with XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_146,
];

/// Accuracy targets for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || !(abs_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if max_subdivisions < 10 {
            return Err(Error::domain("max_subdivisions must be at least 10"));
        }
        Ok(Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        })
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    /// Targets for an inner integral nested under an outer interval of
    /// length `width`; inner errors are integrated over that interval.
    fn inner(&self, width: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * 0.1,
            abs_tol: self.abs_tol * 0.1 / width.abs().max(1.0),
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// Axis-aligned box in one to three dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    bounds: Vec<(f64, f64)>,
}

impl Region {
    pub fn new(bounds: &[(f64, f64)]) -> Result<Self> {
        if bounds.is_empty() || bounds.len() > 3 {
            return Err(Error::domain(format!(
                "integration box must have 1 to 3 dimensions, got {}",
                bounds.len()
            )));
        }
        for &(a, b) in bounds {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::domain(format!("invalid integration interval [{a}, {b}]")));
            }
        }
        Ok(Self {
            bounds: bounds.to_vec(),
        })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(&[(a, b)])
    }

    pub fn cube(half_width: f64, dims: usize) -> Result<Self> {
        Self::new(&vec![(-half_width, half_width); dims])
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecEstimate<const K: usize> {
    pub value: [f64; K],
    pub error: f64,
}

/// Integrates a scalar field over `region`.
pub fn integrate_adaptive<F>(f: F, region: &Region, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64,
{
    let est = integrate_adaptive_vec(|x| [f(x)], region, spec)?;
    Ok(Estimate {
        value: est.value[0],
        error: est.error,
    })
}

/// Integrates a `K`-component field. Components share nodes, which keeps
/// ratios of components free of independent quadrature noise; the error
/// target applies to the max-norm of the result.
pub fn integrate_adaptive_vec<const K: usize, F>(
    f: F,
    region: &Region,
    spec: &QuadratureSpec,
) -> Result<VecEstimate<K>>
where
    F: Fn(&[f64]) -> [f64; K],
{
    let mut point = [0.0; 3];
    let (value, error) = nested(&f, &region.bounds, 0, &mut point, spec)?;
    Ok(VecEstimate { value, error })
}

fn nested<const K: usize, F>(
    f: &F,
    bounds: &[(f64, f64)],
    dim: usize,
    point: &mut [f64; 3],
    spec: &QuadratureSpec,
) -> Result<([f64; K], f64)>
where
    F: Fn(&[f64]) -> [f64; K],
{
    let dims = bounds.len();
    let (a, b) = bounds[dim];
    if dim + 1 == dims {
        let mut g = |t: f64| {
            point[dim] = t;
            Ok((f(&point[..dims]), 0.0))
        };
        adapt(&mut g, a, b, spec)
    } else {
        let inner = spec.inner(b - a);
        let mut g = |t: f64| {
            point[dim] = t;
            nested(f, bounds, dim + 1, point, &inner)
        };
        adapt(&mut g, a, b, spec)
    }
}

struct Segment<const K: usize> {
    a: f64,
    b: f64,
    value: [f64; K],
    error: f64,
    carried: f64,
}

impl<const K: usize> PartialEq for Segment<K> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl<const K: usize> Eq for Segment<K> {}

impl<const K: usize> PartialOrd for Segment<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<const K: usize> Ord for Segment<K> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

type Sample<const K: usize> = Result<([f64; K], f64)>;

fn kronrod<const K: usize, G>(g: &mut G, a: f64, b: f64) -> Result<Segment<K>>
where
    G: FnMut(f64) -> Sample<K>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [[0.0; K]; 21];
    let mut inner_err = 0.0;
    for (i, &x) in XGK.iter().enumerate() {
        if i == 10 {
            let (v, e) = g(center)?;
            fv[20] = v;
            inner_err += WGK[10] * e;
        } else {
            let (v1, e1) = g(center - half * x)?;
            let (v2, e2) = g(center + half * x)?;
            fv[2 * i] = v1;
            fv[2 * i + 1] = v2;
            inner_err += WGK[i] * (e1 + e2);
        }
    }

    let mut value = [0.0; K];
    let mut error: f64 = 0.0;
    for c in 0..K {
        let mut res_k = WGK[10] * fv[20][c];
        let mut res_g = 0.0;
        let mut res_abs = WGK[10] * fv[20][c].abs();
        for i in 0..10 {
            let pair = fv[2 * i][c] + fv[2 * i + 1][c];
            res_k += WGK[i] * pair;
            res_abs += WGK[i] * (fv[2 * i][c].abs() + fv[2 * i + 1][c].abs());
            if i % 2 == 1 {
                res_g += WG[i / 2] * pair;
            }
        }
        let mean = 0.5 * res_k;
        let mut res_asc = WGK[10] * (fv[20][c] - mean).abs();
        for i in 0..10 {
            res_asc += WGK[i] * ((fv[2 * i][c] - mean).abs() + (fv[2 * i + 1][c] - mean).abs());
        }
        res_k *= half;
        res_abs *= half.abs();
        res_asc *= half.abs();
        let mut err = ((res_k - res_g * half).abs()).max(0.0);
        if res_asc != 0.0 && err != 0.0 {
            err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
        }
        if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * res_abs);
        }
        value[c] = res_k;
        error = error.max(err);
    }
    Ok(Segment {
        a,
        b,
        value,
        error,
        carried: half.abs() * inner_err,
    })
}

fn norm<const K: usize>(v: &[f64; K]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn adapt<const K: usize, G>(g: &mut G, a: f64, b: f64, spec: &QuadratureSpec) -> Sample<K>
where
    G: FnMut(f64) -> Sample<K>,
{
    let first = kronrod(g, a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut carried = first.carried;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    let min_width = (b - a).abs() * 1e-13;
    let mut subdivisions = 0;
    loop {
        let target = spec.abs_tol.max(spec.rel_tol * norm(&total));
        if total_err <= target {
            return Ok((total, total_err + carried));
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::numerical(
                format!("subdivision budget of {} exhausted", spec.max_subdivisions),
                total[0],
                total_err + carried,
            ));
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if (worst.b - worst.a).abs() < min_width {
            return Err(Error::numerical(
                "interval collapsed below resolution; integrand may be singular",
                total[0],
                total_err + carried,
            ));
        }
        let left = kronrod(g, worst.a, mid)?;
        let right = kronrod(g, mid, worst.b)?;
        for c in 0..K {
            total[c] += left.value[c] + right.value[c] - worst.value[c];
        }
        total_err += left.error + right.error - worst.error;
        carried += left.carried + right.carried - worst.carried;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;

        // refresh the running sums occasionally so cancellation in the
        // incremental updates cannot drift
        if subdivisions % 64 == 0 {
            total = [0.0; K];
            total_err = 0.0;
            carried = 0.0;
            for s in heap.iter() {
                for c in 0..K {
                    total[c] += s.value[c];
                }
                total_err += s.error;
                carried += s.carried;
            }
        }
    }
}
