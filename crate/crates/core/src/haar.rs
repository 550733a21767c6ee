//! Haar measure on U(N)/SU(N): Weyl eigenvalue densities, quadrature of
//! class functions, and Monte Carlo over Haar samples.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::group::{haar_sample, wrap_angle, GroupKind, UnitaryMatrix, C64};
use crate::mc::{self, sample_rng, MeanAccumulator};
use crate::quadrature::{gl_box, tensor_sum, QuadResult};

/// CUE eigenvalue density prod_{j<k} 2(1 - cos(lambda_j - lambda_k)),
/// evaluated as prod 4 sin^2((lambda_j - lambda_k)/2) to keep relative
/// accuracy for nearly coincident phases.
pub fn cue_density(lambda: &[f64]) -> f64 {
    let mut rho = 1.0;
    for j in 0..lambda.len() {
        for k in j + 1..lambda.len() {
            let s = (0.5 * (lambda[j] - lambda[k])).sin();
            rho *= 4.0 * s * s;
        }
    }
    rho
}

/// 2(1 - cos x) computed as 4 sin^2(x/2).
pub fn chord_sqr(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    4.0 * s * s
}

/// The same density as |det V|^2 with V_jk = exp(i k lambda_j).
pub fn cue_density_vandermonde(lambda: &[f64]) -> f64 {
    let n = lambda.len();
    let v = DMatrix::<C64>::from_fn(n, n, |j, k| C64::from_polar(1.0, k as f64 * lambda[j]));
    v.determinant().norm_sqr()
}

/// GUE density prod_{j<k} (y_j - y_k)^2.
pub fn gue_density(y: &[f64]) -> f64 {
    let mut rho = 1.0;
    for j in 0..y.len() {
        for k in j + 1..y.len() {
            let d = y[j] - y[k];
            rho *= d * d;
        }
    }
    rho
}

/// N_C = (2 pi)^N N!, the integral of the CUE density over the torus.
pub fn cue_normalization(n: usize) -> f64 {
    (2.0 * PI).powi(n as i32) * factorial(n)
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Node count and tolerance for eigenvalue quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylSpec {
    pub nodes: usize,
    pub rel_tol: f64,
}

impl WeylSpec {
    /// 256 nodes per axis up to two integration variables, 96 for three.
    pub fn default_for(dim: usize) -> Result<Self> {
        match dim {
            0..=2 => Ok(Self {
                nodes: 256,
                rel_tol: 1e-10,
            }),
            3 => Ok(Self {
                nodes: 96,
                rel_tol: 1e-8,
            }),
            _ => Err(Error::Unsupported(format!(
                "eigenvalue quadrature in {dim} variables; use Monte Carlo"
            ))),
        }
    }
}

/// Number of independent eigenphases integrated over.
pub fn weyl_dim(kind: GroupKind, n: usize) -> usize {
    match kind {
        GroupKind::U => n,
        GroupKind::SU => n - 1,
    }
}

/// Haar expectation of a class function via the Weyl integration formula.
///
/// `f` receives all N eigenphases. For SU(N) the last phase is fixed by the
/// determinant, lambda_N = -(lambda_1 + ... + lambda_{N-1}) mod 2pi, and the
/// prefactor is 1/(N! (2pi)^{N-1}). The periodic trapezoid rule is used, with
/// the error estimated from the half-density sub-grid relative to the
/// integral of |f| rho.
pub fn weyl_integrate<F: Fn(&[f64]) -> f64>(
    kind: GroupKind,
    n: usize,
    spec: WeylSpec,
    f: F,
) -> Result<QuadResult> {
    if n == 0 || (kind == GroupKind::SU && n < 2) {
        return Err(Error::InvalidParameter(format!(
            "no Weyl formula for {}",
            kind.label(n)
        )));
    }
    let dim = weyl_dim(kind, n);
    if dim > 3 {
        return Err(Error::Unsupported(format!(
            "eigenvalue quadrature for {}; use Monte Carlo",
            kind.label(n)
        )));
    }
    let m = spec.nodes;
    if m < 4 || !m.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "node count must be even and >= 4, got {m}"
        )));
    }
    let h = 2.0 * PI / m as f64;
    let nodes: Vec<f64> = (0..m).map(|k| -PI + (k + 1) as f64 * h).collect();
    let odd: Vec<f64> = (0..m).map(|k| if k % 2 == 1 { 1.0 } else { 0.0 }).collect();
    let mut lambda = vec![0.0; n];
    let mut eval = |x: &[f64]| {
        lambda[..dim].copy_from_slice(x);
        if kind == GroupKind::SU {
            lambda[n - 1] = wrap_angle(-x.iter().sum::<f64>());
        }
        f(&lambda) * cue_density(&lambda)
    };
    let ones = vec![1.0; m];
    let mut fine = 0.0;
    let mut abs = 0.0;
    tensor_sum(dim, &nodes, &ones, |x| {
        let v = eval(x);
        fine += v;
        abs += v.abs();
        0.0
    });
    let coarse = tensor_sum(dim, &nodes, &odd, eval);
    let norm = factorial(n) * (2.0 * PI).powi(dim as i32);
    let cell = h.powi(dim as i32);
    let value = fine * cell / norm;
    let coarse = coarse * (2.0 * h).powi(dim as i32) / norm;
    let scale = abs * cell / norm;
    let abs_error = (value - coarse).abs();
    let achieved = if scale > 0.0 { abs_error / scale } else { 0.0 };
    if !(achieved <= spec.rel_tol) {
        return Err(Error::QuadratureNotConverged {
            achieved,
            requested: spec.rel_tol,
        });
    }
    Ok(QuadResult { value, abs_error })
}

/// Weyl-normalized integral of `f` rho over the box [-h, h]^dim of free
/// eigenphases, by composite Gauss–Legendre with `panels` panels per axis.
///
/// Meant for integrands concentrated near the identity, where the box is
/// chosen so that the neglected region is below double precision; with
/// h = pi it covers the whole torus.
pub fn weyl_box_integral<F: Fn(&[f64]) -> f64>(
    kind: GroupKind,
    n: usize,
    half_width: f64,
    panels: usize,
    f: F,
) -> Result<QuadResult> {
    if n == 0 || (kind == GroupKind::SU && n < 2) {
        return Err(Error::InvalidParameter(format!(
            "no Weyl formula for {}",
            kind.label(n)
        )));
    }
    if !(half_width > 0.0 && half_width <= PI) || panels == 0 {
        return Err(Error::InvalidParameter(format!(
            "box half-width must lie in (0, pi], got {half_width}"
        )));
    }
    let dim = weyl_dim(kind, n);
    if dim > 3 {
        return Err(Error::Unsupported(format!(
            "eigenvalue quadrature for {}; use Monte Carlo",
            kind.label(n)
        )));
    }
    let mut lambda = vec![0.0; n];
    let r = gl_box(dim, -half_width, half_width, panels, |x| {
        lambda[..dim].copy_from_slice(x);
        if kind == GroupKind::SU {
            lambda[n - 1] = wrap_angle(-x.iter().sum::<f64>());
        }
        f(&lambda) * cue_density(&lambda)
    });
    let norm = factorial(n) * (2.0 * PI).powi(dim as i32);
    Ok(QuadResult {
        value: r.value / norm,
        abs_error: r.abs_error / norm,
    })
}

/// Monte Carlo Haar average of `f` with counter-based streams.
pub fn haar_mean<F>(
    kind: GroupKind,
    n: usize,
    n_samples: u64,
    seed: u64,
    workers: usize,
    f: F,
) -> Result<MeanAccumulator>
where
    F: Fn(&UnitaryMatrix) -> f64 + Sync + Send,
{
    haar_sample(kind, n, &mut sample_rng(seed, 0))?;
    mc::mean(n_samples, workers, |i| {
        let u = haar_sample(kind, n, &mut sample_rng(seed, i)).expect("validated group");
        f(&u)
    })
}
