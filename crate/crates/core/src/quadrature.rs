//! One-dimensional rules and tensor-product drivers.
//!
//! Every driver returns a [`QuadResult`] carrying an error estimate obtained
//! from a second, coarser evaluation of the same integral.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Absolute difference to the coarser companion rule.
    pub abs_error: f64,
}

impl QuadResult {
    pub fn rel_error(&self) -> f64 {
        if self.value == 0.0 {
            self.abs_error
        } else {
            self.abs_error / self.value.abs()
        }
    }

    /// Fails unless the estimated relative error is within `rel_tol`.
    pub fn require(self, rel_tol: f64) -> Result<Self> {
        let achieved = self.rel_error();
        if achieved.is_finite() && achieved <= rel_tol {
            Ok(self)
        } else {
            Err(Error::QuadratureNotConverged {
                achieved,
                requested: rel_tol,
            })
        }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = x;
            nodes[n - 1 - i] = -x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Composite rule on [lo, hi] with `panels` equal sub-intervals.
    pub fn composite(&self, lo: f64, hi: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let width = (hi - lo) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.nodes.len());
        let mut ws = Vec::with_capacity(xs.capacity());
        for p in 0..panels {
            let mid = lo + (p as f64 + 0.5) * width;
            for (t, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + 0.5 * width * t);
                ws.push(0.5 * width * w);
            }
        }
        (xs, ws)
    }
}

/// Legendre polynomial P_n(x) and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) integration on a finite interval.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate is below `rel_tol * |value|` (or an absolute floor of 1e-300).
pub fn adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(
            "integration limits must be finite".into(),
        ));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
        });
    }
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let value: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= rel_tol * value.abs() || err < 1e-300 {
            return Ok(QuadResult {
                value,
                abs_error: err,
            });
        }
        if intervals.len() >= max_intervals {
            return Err(Error::QuadratureNotConverged {
                achieved: err / value.abs(),
                requested: rel_tol,
            });
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty interval list");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Sums `f` over the tensor product of one axis rule repeated `dim` times.
pub fn tensor_sum<F: FnMut(&[f64]) -> f64>(
    dim: usize,
    nodes: &[f64],
    weights: &[f64],
    mut f: F,
) -> f64 {
    if dim == 0 {
        return f(&[]);
    }
    let n = nodes.len();
    let mut idx = vec![0usize; dim];
    let mut point: Vec<f64> = vec![nodes[0]; dim];
    let mut total = 0.0;
    loop {
        let w: f64 = idx.iter().map(|&i| weights[i]).product();
        if w != 0.0 {
            total += w * f(&point);
        }
        let mut axis = 0;
        loop {
            idx[axis] += 1;
            if idx[axis] < n {
                point[axis] = nodes[idx[axis]];
                break;
            }
            idx[axis] = 0;
            point[axis] = nodes[0];
            axis += 1;
            if axis == dim {
                return total;
            }
        }
    }
}

/// Periodic trapezoid rule on the torus (-pi, pi]^dim with `n` nodes per axis.
///
/// Nodes sit at -pi + (k+1) 2pi/n. The error estimate compares against the
/// sub-grid of every second node. `n` must be even.
pub fn periodic_torus<F: FnMut(&[f64]) -> f64>(
    dim: usize,
    n: usize,
    mut f: F,
) -> Result<QuadResult> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "periodic node count must be even and >= 2, got {n}"
        )));
    }
    let h = 2.0 * PI / n as f64;
    let nodes: Vec<f64> = (0..n).map(|k| -PI + (k + 1) as f64 * h).collect();
    let mut fine = 0.0;
    let mut coarse = 0.0;
    let ones = vec![1.0; n];
    tensor_sum_indexed(dim, &nodes, &ones, |idx, x| {
        let v = f(x);
        fine += v;
        if idx.iter().all(|&i| i % 2 == 1) {
            coarse += v;
        }
        0.0
    });
    let fine = fine * h.powi(dim as i32);
    let coarse = coarse * (2.0 * h).powi(dim as i32);
    Ok(QuadResult {
        value: fine,
        abs_error: (fine - coarse).abs(),
    })
}

fn tensor_sum_indexed<F: FnMut(&[usize], &[f64]) -> f64>(
    dim: usize,
    nodes: &[f64],
    weights: &[f64],
    mut f: F,
) -> f64 {
    if dim == 0 {
        return f(&[], &[]);
    }
    let n = nodes.len();
    let mut idx = vec![0usize; dim];
    let mut point: Vec<f64> = vec![nodes[0]; dim];
    let mut total = 0.0;
    loop {
        let w: f64 = idx.iter().map(|&i| weights[i]).product();
        total += w * f(&idx, &point);
        let mut axis = 0;
        loop {
            idx[axis] += 1;
            if idx[axis] < n {
                point[axis] = nodes[idx[axis]];
                break;
            }
            idx[axis] = 0;
            point[axis] = nodes[0];
            axis += 1;
            if axis == dim {
                return total;
            }
        }
    }
}

/// Composite Gauss–Legendre on the box [lo, hi]^dim.
///
/// Uses `panels` sub-intervals per axis with a 16-point rule; the error
/// estimate comes from repeating the sum with a 12-point rule.
pub fn gl_box<F: FnMut(&[f64]) -> f64>(
    dim: usize,
    lo: f64,
    hi: f64,
    panels: usize,
    mut f: F,
) -> QuadResult {
    let fine_rule = GaussLegendre::new(16);
    let coarse_rule = GaussLegendre::new(12);
    let (xf, wf) = fine_rule.composite(lo, hi, panels);
    let (xc, wc) = coarse_rule.composite(lo, hi, panels);
    let fine = tensor_sum(dim, &xf, &wf, &mut f);
    let coarse = tensor_sum(dim, &xc, &wc, &mut f);
    QuadResult {
        value: fine,
        abs_error: (fine - coarse).abs(),
    }
}
