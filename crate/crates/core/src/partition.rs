//! Partition-function estimators: exact Gaussian determinants for the Bose
//! part, eigenvalue quadrature and Monte Carlo for the Wilson part, the
//! Holmgren kernel norm and the real Bose chain.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::action::{
    quadratic_form, scaling_factors, wilson_action, GaugeConfig, ModelParams, QuadraticForm,
};
use crate::error::{invalid, Error, Result};
use crate::group::{haar_orthogonal, haar_sample, GroupKind, UnitaryMatrix, C64};
use crate::haar::{chord_sqr, cue_normalization, gue_density, weyl_box_integral, weyl_dim};
use crate::lattice::{GaugeFixing, Lattice};
use crate::mc::{self, sample_rng, LogMeanAccumulator};
use crate::quadrature::{gl_box, periodic_torus, GaussLegendre, QuadResult};

/// Relative standard error above which a Monte Carlo estimate is flagged.
pub const HIGH_VARIANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactDeterminant,
    Quadrature,
    MonteCarlo,
}

/// A partition function value kept in the log domain.
///
/// `value` and `std_error` are present only when exp(log_value) is
/// representable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub log_value: f64,
    pub value: Option<f64>,
    pub std_error: Option<f64>,
    pub rel_std_error: f64,
    pub n_samples: u64,
    pub seed: Option<u64>,
    pub method: Method,
}

impl Estimate {
    pub fn deterministic(log_value: f64, rel_error: f64, method: Method) -> Self {
        Self::build(log_value, rel_error, 0, None, method)
    }

    pub fn from_log_mean(acc: &LogMeanAccumulator, seed: u64) -> Self {
        Self::build(
            acc.log_mean(),
            acc.rel_std_error(),
            acc.n(),
            Some(seed),
            Method::MonteCarlo,
        )
    }

    fn build(
        log_value: f64,
        rel_std_error: f64,
        n_samples: u64,
        seed: Option<u64>,
        method: Method,
    ) -> Self {
        let value = (log_value.abs() < 700.0).then(|| log_value.exp());
        Self {
            log_value,
            value,
            std_error: value.map(|v| v * rel_std_error),
            rel_std_error,
            n_samples,
            seed,
            method,
        }
    }

    pub fn high_variance(&self) -> bool {
        !(self.rel_std_error <= HIGH_VARIANCE)
    }

    /// Multiplies by exp(log_factor) exactly.
    pub fn scaled_by_log(&self, log_factor: f64) -> Self {
        Self::build(
            self.log_value + log_factor,
            self.rel_std_error,
            self.n_samples,
            self.seed,
            self.method,
        )
    }
}

/// ln Z_B = -1/2 ln det Q (real) or -ln det Q (complex).
pub fn log_z_gaussian(q: &QuadraticForm) -> Result<f64> {
    let ld = q.log_det()?;
    Ok(match q {
        QuadraticForm::Real(_) => -0.5 * ld,
        QuadraticForm::Complex(_) => -ld,
    })
}

/// Bose partition function at fixed bonds, Z_B = det(Q)^{-1/2} (real) or
/// det(Q)^{-1} (complex), with the normalized Gaussian measure.
pub fn z_bose_exact(
    lattice: &Lattice,
    cfg: &GaugeConfig,
    params: &ModelParams,
    scaled: bool,
) -> Result<Estimate> {
    params.validate()?;
    let q = quadratic_form(lattice, cfg, params, scaled)?;
    Ok(Estimate::deterministic(
        log_z_gaussian(&q)?,
        0.0,
        Method::ExactDeterminant,
    ))
}

/// Number of real Bose components on the lattice, the exponent of s_B in
/// Z_B = s_B^n Z_B^u.
pub fn bose_real_dim(lattice: &Lattice, params: &ModelParams) -> usize {
    params.components_per_site() * lattice.n_sites()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingIdentityReport {
    pub log_z_scaled: f64,
    pub log_z_unscaled: f64,
    pub log_factor: f64,
    pub rel_error: f64,
}

/// Compares ln Z_B with ln(s_B^n Z_B^u).
pub fn z_bose_scaling_identity(
    lattice: &Lattice,
    cfg: &GaugeConfig,
    params: &ModelParams,
) -> Result<ScalingIdentityReport> {
    let scaled = z_bose_exact(lattice, cfg, params, true)?.log_value;
    let unscaled = z_bose_exact(lattice, cfg, params, false)?.log_value;
    let log_factor = bose_real_dim(lattice, params) as f64 * scaling_factors(params).s_b.ln();
    let rel_error = ((scaled - unscaled - log_factor).exp_m1()).abs();
    Ok(ScalingIdentityReport {
        log_z_scaled: scaled,
        log_z_unscaled: unscaled,
        log_factor,
        rel_error,
    })
}

/// Single-bond integrals over Haar measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingleBond {
    /// z = int exp(-c ||1 - g||^2) dg with c = a^{d-4}/g^2.
    Wilson,
    /// z1 = int exp(-c 2(d-1) 4N |lambda|^2) dg (upper comparison).
    Quadratic,
    /// z~ = N_C^{-1} (4/pi^2)^{N(N-1)/2} int_{|lambda_k| <= pi/2}
    ///      exp(-c 2(d-1) 4N |lambda|^2) prod (lambda_j - lambda_k)^2 dlambda.
    Restricted,
}

/// Panels per axis for eigenphase box quadrature (16-point rule per panel).
fn box_panels(dim: usize) -> usize {
    match dim {
        0..=2 => 16,
        _ => 6,
    }
}

/// Weight exponent k with ||1 - g_p||^2 summed over a bond's plaquettes
/// bounded by k |lambda|^2.
pub fn quadratic_weight(d: usize, n: usize) -> f64 {
    2.0 * (d as f64 - 1.0) * 4.0 * n as f64
}

/// Evaluates a single-bond integral by eigenphase quadrature on a box that
/// contains everything above exp(-40) of the peak.
pub fn z_single_bond(
    variant: SingleBond,
    kind: GroupKind,
    n: usize,
    d: usize,
    a: f64,
    g2: f64,
) -> Result<Estimate> {
    if !(a > 0.0 && g2 > 0.0) {
        return Err(invalid(format!(
            "a and g^2 must be positive, got a={a}, g^2={g2}"
        )));
    }
    let c = a.powi(d as i32 - 4) / g2;
    let dim = weyl_dim(kind, n);
    let panels = box_panels(dim);
    let r = match variant {
        SingleBond::Wilson => {
            // 2(1 - cos x) >= (4/pi^2) x^2 bounds the weight by exp(-c (4/pi^2) |lambda|^2).
            let h = (PI * (10.0 / c).sqrt()).min(PI);
            weyl_box_integral(kind, n, h, panels, |l| {
                (-c * l.iter().map(|&x| chord_sqr(x)).sum::<f64>()).exp()
            })?
        }
        SingleBond::Quadratic | SingleBond::Restricted => {
            if kind != GroupKind::U {
                return Err(Error::Unsupported(
                    "quadratic single-bond integrals are implemented for U(N)".into(),
                ));
            }
            if d < 2 {
                return Err(invalid("quadratic single-bond integrals need d >= 2"));
            }
            let k = c * quadratic_weight(d, n);
            let limit = if variant == SingleBond::Quadratic {
                PI
            } else {
                PI / 2.0
            };
            let h = (40.0 / k).sqrt().min(limit);
            let weight = |l: &[f64]| (-k * l.iter().map(|x| x * x).sum::<f64>()).exp();
            if variant == SingleBond::Quadratic {
                weyl_box_integral(kind, n, h, panels, weight)?
            } else {
                let raw = gl_box(n, -h, h, panels, |l| weight(l) * gue_density(l));
                let pre = (4.0 / (PI * PI)).powi((n * (n - 1) / 2) as i32) / cue_normalization(n);
                QuadResult {
                    value: pre * raw.value,
                    abs_error: pre * raw.abs_error,
                }
            }
        }
    };
    let r = r.require(1e-9)?;
    Ok(Estimate::deterministic(
        r.value.ln(),
        r.rel_error(),
        Method::Quadrature,
    ))
}

/// Exact d = 2 Wilson partition function: gauge fixing decouples the
/// plaquettes, so Z^w = z^{Lambda_r}.
pub fn z_wilson_exact_d2(lattice: &Lattice, params: &ModelParams) -> Result<Estimate> {
    if lattice.d() != 2 {
        return Err(Error::Unsupported(
            "the product formula for Z^w holds only in d = 2".into(),
        ));
    }
    let z = z_single_bond(
        SingleBond::Wilson,
        params.group,
        params.n,
        2,
        params.a,
        params.g2,
    )?;
    let r = lattice.n_retained() as f64;
    Ok(Estimate::deterministic(
        r * z.log_value,
        r * z.rel_std_error,
        Method::Quadrature,
    ))
}

fn sample_config(
    lattice: &Lattice,
    fixing: Option<&GaugeFixing>,
    kind: GroupKind,
    n: usize,
    seed: u64,
    index: u64,
) -> GaugeConfig {
    let mut rng = sample_rng(seed, index);
    match fixing {
        Some(f) => GaugeConfig::random_gauge_fixed(lattice, f, kind, n, &mut rng),
        None => GaugeConfig::random(lattice, kind, n, &mut rng),
    }
    .expect("group validated by caller")
}

/// Monte Carlo estimate of Z^w = E_Haar[exp(-S^w)] with independent Haar
/// bonds, optionally only on the retained bonds of the temporal gauge.
pub fn z_wilson_mc(
    lattice: &Lattice,
    params: &ModelParams,
    n_samples: u64,
    seed: u64,
    gauge_fixed: bool,
    workers: usize,
) -> Result<Estimate> {
    params.validate()?;
    haar_sample(params.group, params.n, &mut sample_rng(seed, 0))?;
    let fixing = gauge_fixed.then(|| GaugeFixing::enhanced_temporal(lattice));
    let acc = mc::log_mean(n_samples, workers, |i| {
        let cfg = sample_config(lattice, fixing.as_ref(), params.group, params.n, seed, i);
        -wilson_action(lattice, &cfg, params).expect("configuration matches lattice")
    })?;
    Ok(Estimate::from_log_mean(&acc, seed))
}

/// Monte Carlo estimate of the complete unscaled Z^u = E_Haar[Z_B^u(g) exp(-S^w(g))].
pub fn z_complete_mc(
    lattice: &Lattice,
    params: &ModelParams,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<Estimate> {
    params.validate()?;
    haar_sample(params.group, params.n, &mut sample_rng(seed, 0))?;
    let fixing = GaugeFixing::enhanced_temporal(lattice);
    let first = sample_config(lattice, Some(&fixing), params.group, params.n, seed, 0);
    log_z_gaussian(&quadratic_form(lattice, &first, params, false)?)?;
    let failure = std::sync::Mutex::new(None);
    let acc = mc::log_mean(n_samples, workers, |i| {
        let cfg = sample_config(lattice, Some(&fixing), params.group, params.n, seed, i);
        let zb = quadratic_form(lattice, &cfg, params, false).and_then(|q| log_z_gaussian(&q));
        match zb {
            Ok(zb) => {
                zb - wilson_action(lattice, &cfg, params).expect("configuration matches lattice")
            }
            Err(e) => {
                failure.lock().expect("poisoned").get_or_insert(e);
                f64::NEG_INFINITY
            }
        }
    })?;
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(Estimate::from_log_mean(&acc, seed))
}

/// U(1) Wilson partition function by trapezoid quadrature over bond angles:
/// all bonds (`gauge_fixed = false`) or only the retained ones.
pub fn z_wilson_u1_quadrature(
    lattice: &Lattice,
    params: &ModelParams,
    nodes: usize,
    gauge_fixed: bool,
) -> Result<QuadResult> {
    if params.group != GroupKind::U || params.n != 1 {
        return Err(Error::Unsupported(
            "angle quadrature is implemented for U(1)".into(),
        ));
    }
    let fixing = GaugeFixing::enhanced_temporal(lattice);
    let free: Vec<usize> = if gauge_fixed {
        fixing.retained().to_vec()
    } else {
        (0..lattice.n_bonds()).collect()
    };
    let evals = (nodes as f64).powi(free.len() as i32);
    if evals > 5e7 {
        return Err(Error::Unsupported(format!(
            "{} bond angles at {nodes} nodes is too many points",
            free.len()
        )));
    }
    let c = params.plaquette_coupling();
    let mut theta = vec![0.0; lattice.n_bonds()];
    let plaqs = lattice.plaquettes().to_vec();
    let r = periodic_torus(free.len(), nodes, |x| {
        for (&b, &t) in free.iter().zip(x) {
            theta[b] = t;
        }
        let s: f64 = plaqs
            .iter()
            .map(|p| {
                chord_sqr(
                    theta[p.bonds[0]] + theta[p.bonds[1]] - theta[p.bonds[2]] - theta[p.bonds[3]],
                )
            })
            .sum();
        (-c * s).exp()
    })?;
    let vol = (2.0 * PI).powi(free.len() as i32);
    Ok(QuadResult {
        value: r.value / vol,
        abs_error: r.abs_error / vol,
    })
}

/// Complete unscaled Z^u for U(1), d = 2, by quadrature in plaquette angles.
///
/// In the temporal gauge the map from retained bond angles to plaquette
/// angles is unimodular, so Haar measure is preserved and the plaquette
/// weights factorize; Z_B^u is evaluated exactly at each node. Returns the
/// estimate together with the smallest and largest ln Z_B^u seen at nodes.
pub fn z_complete_u1_d2(
    lattice: &Lattice,
    params: &ModelParams,
    nodes_per_axis: usize,
) -> Result<(Estimate, f64, f64)> {
    params.validate()?;
    if lattice.d() != 2 || params.group != GroupKind::U || params.n != 1 {
        return Err(Error::Unsupported(
            "plaquette-angle quadrature needs d = 2 and U(1)".into(),
        ));
    }
    let fixing = GaugeFixing::enhanced_temporal(lattice);
    let retained = fixing.retained();
    let np = lattice.n_plaquettes();
    if np != retained.len() {
        return Err(Error::Linalg(
            "plaquette and retained-bond counts differ".into(),
        ));
    }
    let col = |b: usize| retained.iter().position(|&r| r == b);
    let mut p = DMatrix::<f64>::zeros(np, np);
    for (i, plaq) in lattice.plaquettes().iter().enumerate() {
        for (slot, &b) in plaq.bonds.iter().enumerate() {
            if let Some(j) = col(b) {
                p[(i, j)] += if slot < 2 { 1.0 } else { -1.0 };
            }
        }
    }
    let det = p.determinant();
    if (det.abs() - 1.0).abs() > 1e-9 {
        return Err(Error::Linalg(format!(
            "plaquette map is not unimodular (det {det})"
        )));
    }
    let p_inv = p
        .try_inverse()
        .ok_or_else(|| Error::Linalg("singular plaquette map".into()))?;

    let c = params.plaquette_coupling();
    // For |x| <= 1.1, 2(1 - cos x) >= 0.9 x^2, which gives a tighter box at strong peaking.
    let h = if c >= 50.0 {
        (44.5 / c).sqrt()
    } else {
        (PI * (10.0 / c).sqrt()).min(PI)
    };
    let z1_exact = z_single_bond(SingleBond::Wilson, GroupKind::U, 1, 2, params.a, params.g2)?;
    // Refine the one-dimensional rule until it reproduces the single-bond integral.
    let mut order = nodes_per_axis.max(8);
    let (xs, weights, quad_err) = loop {
        let (xs, ws) = GaussLegendre::new(order).composite(-h, h, 1);
        let weights: Vec<f64> = xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| w * (-c * chord_sqr(x)).exp() / (2.0 * PI))
            .collect();
        let err = (weights.iter().sum::<f64>().ln() - z1_exact.log_value).abs();
        if err <= 1e-10 || order >= 96 {
            break (xs, weights, err);
        }
        order = order * 3 / 2;
    };
    if quad_err > 1e-8 {
        return Err(Error::QuadratureNotConverged {
            achieved: quad_err,
            requested: 1e-8,
        });
    }
    if xs.len().pow(np as u32) > 4_000_000 {
        return Err(Error::Unsupported(format!(
            "{np} plaquettes at {} nodes is too many points",
            xs.len()
        )));
    }

    let mut cfg = GaugeConfig::identity(lattice, 1);
    let mut min_zb = f64::INFINITY;
    let mut max_zb = f64::NEG_INFINITY;
    let mut logs = Vec::new();
    let mut idx = vec![0usize; np];
    loop {
        let theta_p: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
        let theta_r = &p_inv * nalgebra::DVector::from_vec(theta_p);
        for (k, &b) in retained.iter().enumerate() {
            cfg.links[b] = UnitaryMatrix::from_phases(&[theta_r[k]]);
        }
        let zb = log_z_gaussian(&quadratic_form(lattice, &cfg, params, false)?)?;
        min_zb = min_zb.min(zb);
        max_zb = max_zb.max(zb);
        let lw: f64 = idx.iter().map(|&i| weights[i].ln()).sum();
        logs.push(zb + lw);
        let mut axis = 0;
        loop {
            if axis == np {
                let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = logs.iter().map(|l| (l - shift).exp()).sum();
                let est = Estimate::deterministic(shift + sum.ln(), quad_err, Method::Quadrature);
                return Ok((est, min_zb, max_zb));
            }
            idx[axis] += 1;
            if idx[axis] < xs.len() {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

/// Unscaled inputs to the scaled partition functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnscaledPartitions {
    pub z_w: Estimate,
    pub z_b_u: Option<Estimate>,
    pub z_u: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledPartitions {
    /// Z_Y = s_Y^{d(N) Lambda_r} Z^w.
    pub z_y: Estimate,
    /// Z_B = s_B^n Z_B^u.
    pub z_b: Option<Estimate>,
    /// Z = s_B^n s_Y^{d(N) Lambda_r} Z^u.
    pub z: Option<Estimate>,
}

pub fn log_s_y_factor(lattice: &Lattice, params: &ModelParams) -> f64 {
    (params.group.algebra_dim(params.n) * lattice.n_retained()) as f64
        * scaling_factors(params).s_y.ln()
}

pub fn log_s_b_factor(lattice: &Lattice, params: &ModelParams) -> f64 {
    bose_real_dim(lattice, params) as f64 * scaling_factors(params).s_b.ln()
}

/// Applies the scale factors to unscaled estimates.
pub fn assemble_scaled(
    params: &ModelParams,
    lattice: &Lattice,
    unscaled: &UnscaledPartitions,
) -> Result<ScaledPartitions> {
    params.validate()?;
    let ly = log_s_y_factor(lattice, params);
    let lb = log_s_b_factor(lattice, params);
    Ok(ScaledPartitions {
        z_y: unscaled.z_w.scaled_by_log(ly),
        z_b: unscaled.z_b_u.as_ref().map(|e| e.scaled_by_log(lb)),
        z: unscaled.z_u.as_ref().map(|e| e.scaled_by_log(lb + ly)),
    })
}

/// Real Bose chain of length L with hopping d kappa^2 through orthogonal
/// bond matrices O_j: ln Z_c = -1/2 ln det(1 - d kappa^2 K(O)).
pub fn chain_partition(
    l: usize,
    n: usize,
    d: usize,
    kappa_sq: f64,
    gauges: &[DMatrix<f64>],
) -> Result<f64> {
    if gauges.len() + 1 != l {
        return Err(invalid(format!(
            "a chain of length {l} has {} bonds, got {}",
            l - 1,
            gauges.len()
        )));
    }
    let t = d as f64 * kappa_sq;
    let mut q = DMatrix::<f64>::identity(l * n, l * n);
    for (j, o) in gauges.iter().enumerate() {
        if o.nrows() != n || o.ncols() != n {
            return Err(invalid("gauge matrix has the wrong size"));
        }
        for r in 0..n {
            for s in 0..n {
                q[(j * n + r, (j + 1) * n + s)] -= t * o[(r, s)];
                q[((j + 1) * n + s, j * n + r)] -= t * o[(r, s)];
            }
        }
    }
    log_z_gaussian(&QuadraticForm::Real(q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub log_z_identity: f64,
    pub log_z_random: f64,
    pub rel_difference: f64,
}

/// Chain partition function with identity bonds against random O(N) bonds.
pub fn chain_gauge_independence(
    l: usize,
    n: usize,
    d: usize,
    kappa_sq: f64,
    seed: u64,
) -> Result<ChainReport> {
    let id = vec![DMatrix::<f64>::identity(n, n); l - 1];
    let mut rng = sample_rng(seed, 0);
    let random: Vec<_> = (0..l - 1).map(|_| haar_orthogonal(n, &mut rng)).collect();
    let a = chain_partition(l, n, d, kappa_sq, &id)?;
    let b = chain_partition(l, n, d, kappa_sq, &random)?;
    Ok(ChainReport {
        log_z_identity: a,
        log_z_random: b,
        rel_difference: (a - b).exp_m1().abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolmgrenReport {
    pub grid_points: usize,
    pub cutoff: f64,
    pub d_kappa_sq: f64,
    /// Largest singular value of the discretized real kernel (N = 1).
    pub real_sigma_max: f64,
    /// sqrt(4 pi).
    pub real_bound: f64,
    /// Same for the complex kernel with normalized measure d^2 psi / (2 pi).
    pub complex_sigma_max: f64,
    /// 2^N with N = 1.
    pub complex_bound: f64,
    /// max ||L^T L - 4||, L twice the real embedding of a random unitary.
    pub embedding_defect: f64,
    pub holds: bool,
}

/// Operator norm of T(x, y) = exp(-x^2/4 + d kappa^2 x g y - y^2/4) on a
/// truncated grid, real and complex N = 1, compared to the Holmgren bound.
pub fn holmgren_bound_check(
    grid_points: usize,
    cutoff: f64,
    d_kappa_sq: f64,
    seed: u64,
) -> Result<HolmgrenReport> {
    if grid_points < 2 || !(cutoff > 0.0) || !(0.0..=0.5).contains(&d_kappa_sq) {
        return Err(invalid(
            "need >= 2 grid points, positive cutoff and d kappa^2 in [0, 1/2]",
        ));
    }
    let h = 2.0 * cutoff / grid_points as f64;
    let xs: Vec<f64> = (0..grid_points)
        .map(|i| -cutoff + (i as f64 + 0.5) * h)
        .collect();
    let mut rng = sample_rng(seed, 0);
    let mut real_sigma_max: f64 = 0.0;
    for g in [1.0, -1.0] {
        let a = DMatrix::<f64>::from_fn(grid_points, grid_points, |i, j| {
            h * (-0.25 * xs[i] * xs[i] + d_kappa_sq * xs[i] * g * xs[j] - 0.25 * xs[j] * xs[j])
                .exp()
        });
        real_sigma_max = real_sigma_max.max(a.singular_values().max());
    }

    let m = 24.min(grid_points);
    let hc = 2.0 * cutoff.min(6.0) / m as f64;
    let cs: Vec<f64> = (0..m)
        .map(|i| -cutoff.min(6.0) + (i as f64 + 0.5) * hc)
        .collect();
    let pts: Vec<C64> = cs
        .iter()
        .flat_map(|&re| cs.iter().map(move |&im| C64::new(re, im)))
        .collect();
    let g = haar_sample(GroupKind::U, 1, &mut rng)?.matrix()[(0, 0)];
    let w = hc * hc / (2.0 * PI);
    let kernel = |gg: C64| {
        DMatrix::<f64>::from_fn(pts.len(), pts.len(), |i, j| {
            let (p, q) = (pts[i], pts[j]);
            w * (-0.25 * p.norm_sqr() + d_kappa_sq * (p.conj() * gg * q).re - 0.25 * q.norm_sqr())
                .exp()
        })
    };
    let complex_sigma_max = kernel(g)
        .singular_values()
        .max()
        .max(kernel(C64::new(1.0, 0.0)).singular_values().max());

    let mut embedding_defect: f64 = 0.0;
    for _ in 0..8 {
        let u = haar_sample(GroupKind::U, 2, &mut rng)?;
        let n = u.n();
        let mut l = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = u.matrix()[(i, j)];
                l[(i, j)] = 2.0 * z.re;
                l[(i, j + n)] = -2.0 * z.im;
                l[(i + n, j)] = 2.0 * z.im;
                l[(i + n, j + n)] = 2.0 * z.re;
            }
        }
        let dev = (l.transpose() * &l - DMatrix::<f64>::identity(2 * n, 2 * n) * 4.0).norm();
        embedding_defect = embedding_defect.max(dev);
    }
    let real_bound = (4.0 * PI).sqrt();
    let complex_bound = 2.0;
    let holds = real_sigma_max <= real_bound * (1.0 + 1e-3)
        && complex_sigma_max <= complex_bound * (1.0 + 1e-3)
        && embedding_defect < 1e-12;
    Ok(HolmgrenReport {
        grid_points,
        cutoff,
        d_kappa_sq,
        real_sigma_max,
        real_bound,
        complex_sigma_max,
        complex_bound,
        embedding_defect,
        holds,
    })
}
