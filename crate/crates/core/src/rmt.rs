//! Small-beta limit of CUE integrals with Gaussian-like weights and the GUE
//! normalizations they converge to.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::GroupKind;
use crate::haar::{chord_sqr, cue_normalization, gue_density, ln_factorial};
use crate::partition::{z_single_bond, SingleBond};
use crate::quadrature::{gl_box, QuadResult};

/// Largest N handled by tensor quadrature.
pub const MAX_N: usize = 3;

fn panels(n: usize) -> usize {
    if n <= 2 {
        16
    } else {
        12
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("N must be positive"));
    }
    if n > MAX_N {
        return Err(Error::Unsupported(format!(
            "eigenvalue quadrature for N = {n} > {MAX_N}"
        )));
    }
    Ok(())
}

/// I(u) = int_{(-u, u]^N} exp(-|y|^2) prod_{j<k} (y_j - y_k)^2 d^N y.
/// `u = f64::INFINITY` gives the full GUE normalization N_G.
pub fn gue_integral(u: f64, n: usize) -> Result<QuadResult> {
    check_n(n)?;
    if !(u > 0.0) {
        return Err(invalid(format!("GUE cutoff must be positive, got {u}")));
    }
    let h = u.min(11.0);
    Ok(gl_box(n, -h, h, panels(n), |y| {
        (-y.iter().map(|v| v * v).sum::<f64>()).exp() * gue_density(y)
    }))
}

/// (2 pi)^{N/2} 2^{-N^2/2} prod_{j=1}^{N} j!, the closed form of N_G.
pub fn gue_normalization_closed_form(n: usize) -> f64 {
    let nf = n as f64;
    let log = 0.5 * nf * (2.0 * PI).ln() - 0.5 * nf * nf * 2f64.ln()
        + (1..=n).map(ln_factorial).sum::<f64>();
    log.exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConstants {
    pub n: usize,
    pub n_c: f64,
    pub n_g: f64,
    pub n_g_closed_form: f64,
    /// N_G / N_C, the small-beta limit of w(beta) / beta^{N^2/2}.
    pub ratio: f64,
}

pub fn ensemble_constants(n: usize) -> Result<EnsembleConstants> {
    let n_g = gue_integral(f64::INFINITY, n)?.require(1e-10)?.value;
    let n_c = cue_normalization(n);
    Ok(EnsembleConstants {
        n,
        n_c,
        n_g,
        n_g_closed_form: gue_normalization_closed_form(n),
        ratio: n_g / n_c,
    })
}

/// Weight function L(lambda) in w(beta).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weight {
    /// ||1 - g||_HS^2 = sum_j 2(1 - cos lambda_j).
    Wilson,
    /// sum_j lambda_j^2.
    Quadratic,
}

impl Weight {
    pub fn eval(self, lambda: &[f64]) -> f64 {
        match self {
            Weight::Wilson => lambda.iter().map(|&x| chord_sqr(x)).sum(),
            Weight::Quadratic => lambda.iter().map(|x| x * x).sum(),
        }
    }
}

/// w(beta) / beta^{N^2/2} with w(beta) = N_C^{-1} int exp(-L/beta) rho_CUE.
///
/// Computed in the variables y = lambda / sqrt(beta), where the CUE density
/// becomes beta^{N(N-1)/2} prod chord^2(sqrt(beta) dy) / beta; the y box is
/// cut where (4/pi^2) |y|^2 exceeds 40.
pub fn w_ratio(beta: f64, n: usize, weight: Weight) -> Result<QuadResult> {
    check_n(n)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    let sb = beta.sqrt();
    let h = (PI / sb).min(PI * 10f64.sqrt());
    let r = gl_box(n, -h, h, panels(n), |y| {
        let lambda: Vec<f64> = y.iter().map(|v| v * sb).collect();
        let mut rho = 1.0;
        for j in 0..n {
            for k in j + 1..n {
                rho *= chord_sqr(lambda[j] - lambda[k]) / beta;
            }
        }
        (-weight.eval(&lambda) / beta).exp() * rho
    });
    let nc = cue_normalization(n);
    Ok(QuadResult {
        value: r.value / nc,
        abs_error: r.abs_error / nc,
    })
}

pub fn w_of_beta(beta: f64, n: usize, weight: Weight) -> Result<f64> {
    Ok(w_ratio(beta, n, weight)?.require(1e-9)?.value * beta.powf(0.5 * (n * n) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitPoint {
    /// beta for the CUE sweep, a for the free-energy sweep.
    pub x: f64,
    pub value: f64,
    pub target: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSweep {
    pub n: usize,
    pub target: f64,
    pub points: Vec<LimitPoint>,
    /// Fitted exponent p in |value - target| ~ x^p over the last points.
    pub rate: Option<f64>,
    /// Whether L(lambda) >= (4/pi^2) |lambda|^2 held on the check grid.
    pub weight_hypothesis: bool,
}

fn fit_rate(points: &[LimitPoint]) -> Option<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.abs_err > 0.0 && p.x > 0.0)
        .map(|p| (p.x.ln(), p.abs_err.ln()))
        .collect();
    if usable.len() < 2 {
        return None;
    }
    let tail = &usable[usable.len().saturating_sub(4)..];
    let n = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn weight_hypothesis(weight: Weight) -> bool {
    (0..=2000).all(|i| {
        let x = -PI + 2.0 * PI * i as f64 / 2000.0;
        weight.eval(&[x]) >= 4.0 / (PI * PI) * x * x * (1.0 - 1e-12)
    })
}

/// w(beta) / beta^{N^2/2} on a grid of beta, ordered by decreasing beta.
pub fn cue_gue_limit(n: usize, betas: &[f64], weight: Weight) -> Result<LimitSweep> {
    let target = ensemble_constants(n)?.ratio;
    let mut sorted = betas.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let points = sorted
        .iter()
        .map(|&beta| {
            let v = w_ratio(beta, n, weight)?.require(1e-9)?.value;
            Ok(LimitPoint {
                x: beta,
                value: v,
                target,
                abs_err: (v - target).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitSweep {
        n,
        target,
        rate: fit_rate(&points),
        points,
        weight_hypothesis: weight_hypothesis(weight),
    })
}

/// Normalized d = 2 free energy f(a) = ln z(a) - N^2 ln(g a) for U(N),
/// ordered by decreasing a; the target is ln(N_G / N_C).
pub fn d2_free_energy(n: usize, a_grid: &[f64], g2: f64) -> Result<LimitSweep> {
    if !(g2 > 0.0) {
        return Err(invalid("g^2 must be positive"));
    }
    let target = ensemble_constants(n)?.ratio.ln();
    let mut sorted = a_grid.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let points = sorted
        .iter()
        .map(|&a| {
            let z = z_single_bond(SingleBond::Wilson, GroupKind::U, n, 2, a, g2)?;
            let v = z.log_value - (n * n) as f64 * (g2.sqrt() * a).ln();
            Ok(LimitPoint {
                x: a,
                value: v,
                target,
                abs_err: (v - target).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitSweep {
        n,
        target,
        rate: fit_rate(&points),
        points,
        weight_hypothesis: weight_hypothesis(Weight::Wilson),
    })
}

/// N^2 [-ln sqrt 2 - ln(2 pi)/(2N) + N^{-2} sum_{j<N} ln j!], which equals
/// ln(N_G / N_C).
pub fn d2_limit_closed_form(n: usize) -> f64 {
    let nf = n as f64;
    nf * nf
        * (-(2f64.sqrt().ln()) - (2.0 * PI).ln() / (2.0 * nf)
            + (1..n).map(ln_factorial).sum::<f64>() / (nf * nf))
}
