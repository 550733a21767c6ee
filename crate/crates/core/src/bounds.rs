//! Bound constants and verification reports for the Bose, gauge and combined
//! partition functions, the quadratic plaquette lemma and the elementary
//! inequalities.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::action::{
    elementary_bounds_check, quadratic_bound_from_links, quadratic_form, GaugeConfig, ModelParams,
};
use crate::error::{Error, Result};
use crate::group::{haar_sample, GroupKind, UnitaryMatrix};
use crate::haar::cue_normalization;
use crate::lattice::Lattice;
use crate::mc::{self, sample_rng};
use crate::partition::{
    log_s_b_factor, log_s_y_factor, log_z_gaussian, quadratic_weight, z_complete_mc,
    z_complete_u1_d2, z_single_bond, z_wilson_exact_d2, z_wilson_mc, Estimate, Method, SingleBond,
};
use crate::rmt::gue_integral;
use crate::su2::{capital_e, SU2_C_SQ};

/// Relative tolerance for deterministic comparisons.
pub const DET_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Per-site and per-bond constants of the stability bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    /// Bose lower constant, 0.
    pub c_b_lower: f64,
    /// Bose upper constant n (1 - 1/L) ln 2 / 2, n real components per site.
    pub c_b_upper: f64,
    /// Gauge constants per retained bond.
    pub c_y_lower: f64,
    pub c_y_upper: f64,
    /// Single-bond upper constant from the direct change of variables,
    /// ln((pi/2)^{N^2} N_G/N_C); only for U(N).
    pub c_y_upper_single_bond: Option<f64>,
    /// c_B + c_Y Lambda_r / Lambda_s.
    pub c_lower: f64,
    pub c_upper: f64,
    /// L-independent majorants c_B + d min(c_Y,l, 0) and c_B + d max(c_Y,u, 0).
    pub c_lower_uniform: f64,
    pub c_upper_uniform: f64,
}

/// Evaluates the constants for U(N), N <= 3, and SU(2).
pub fn bound_constants(params: &ModelParams, lattice: &Lattice) -> Result<BoundConstants> {
    params.validate()?;
    let n = params.n;
    let nf = n as f64;
    let d = params.d as f64;
    let c_b_upper =
        params.components_per_site() as f64 * (1.0 - 1.0 / params.l as f64) * LN_2 / 2.0;
    let (c_y_lower, c_y_upper, single) = match (params.group, n) {
        (GroupKind::U, 1..=3) => {
            let n_g = gue_integral(f64::INFINITY, n)?.value;
            let n_c = cue_normalization(n);
            let k = quadratic_weight(params.d, n);
            let upper = nf * nf * (PI / (2.0 * 2f64.sqrt())).ln() + n_g.ln();
            let i_low = gue_integral((k / params.g0_sq).sqrt() * PI / 2.0, n)?.value;
            let lower = -n_c.ln() + (n * (n - 1) / 2) as f64 * (4.0 / (PI * PI)).ln()
                - 0.5 * nf * nf * k.ln()
                + i_low.ln();
            (
                lower,
                upper,
                Some(nf * nf * (PI / 2.0).ln() + (n_g / n_c).ln()),
            )
        }
        (GroupKind::SU, 2) => {
            let upper = (PI * PI / 4.0 * capital_e(f64::INFINITY)?).ln();
            let root = SU2_C_SQ.sqrt() * (2.0 * (d - 1.0)).sqrt();
            let e0 = capital_e(PI * root / (2.0 * params.g0_sq.sqrt()))?;
            let lower = 3.0 * (2.0 / (PI * root)).ln() + e0.ln();
            (lower, upper, None)
        }
        (kind, n) => {
            return Err(Error::Unsupported(format!(
                "gauge bound constants for {}",
                kind.label(n)
            )));
        }
    };
    if params.d < 2 {
        return Err(Error::Unsupported("gauge bounds need d >= 2".into()));
    }
    let ratio = lattice.n_retained() as f64 / lattice.n_sites() as f64;
    Ok(BoundConstants {
        c_b_lower: 0.0,
        c_b_upper,
        c_y_lower,
        c_y_upper,
        c_y_upper_single_bond: single,
        c_lower: c_y_lower * ratio,
        c_upper: c_b_upper + c_y_upper * ratio,
        c_lower_uniform: d * c_y_lower.min(0.0),
        c_upper_uniform: c_b_upper + d * c_y_upper.max(0.0),
    })
}

/// Outcome of one bound verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: String,
    pub params: Option<ModelParams>,
    pub method: Option<Method>,
    pub n_checks: u64,
    pub violations: u64,
    /// Smallest and largest log value checked (equal for a single value).
    pub log_value_min: f64,
    pub log_value_max: f64,
    pub log_lower: f64,
    pub log_upper: f64,
    /// Distance to the nearest bound in log units; negative on violation.
    pub margin: f64,
    /// Log-domain standard error of the checked value (0 if deterministic).
    pub log_std_error: f64,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Deterministic values pass within a relative tolerance of DET_TOL; Monte
/// Carlo values fail only beyond three standard errors and are
/// inconclusive when the estimate is noisy or within those three errors.
pub fn classify(
    lo: f64,
    hi: f64,
    lower: f64,
    upper: f64,
    log_std_error: f64,
    high_variance: bool,
) -> Verdict {
    if log_std_error == 0.0 {
        let tl = DET_TOL * lower.abs().max(1.0);
        let tu = DET_TOL * upper.abs().max(1.0);
        return if lo >= lower - tl && hi <= upper + tu {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
    }
    let s = 3.0 * log_std_error;
    if !(hi + s >= lower && lo - s <= upper) {
        Verdict::Fail
    } else if !high_variance && lo >= lower && hi <= upper {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    }
}

#[allow(clippy::too_many_arguments)]
fn report(
    theorem: &str,
    params: Option<&ModelParams>,
    method: Option<Method>,
    n_checks: u64,
    violations: u64,
    (lo, hi): (f64, f64),
    (lower, upper): (f64, f64),
    log_std_error: f64,
    high_variance: bool,
    notes: Vec<String>,
) -> BoundReport {
    let mut verdict = classify(lo, hi, lower, upper, log_std_error, high_variance);
    if violations > 0 {
        verdict = Verdict::Fail;
    }
    BoundReport {
        theorem: theorem.to_string(),
        params: params.cloned(),
        method,
        n_checks,
        violations,
        log_value_min: lo,
        log_value_max: hi,
        log_lower: lower,
        log_upper: upper,
        margin: (lo - lower).min(upper - hi),
        log_std_error,
        verdict,
        notes,
    }
}

/// Bose bounds 1 <= Z_B <= exp(c_B,u Lambda_s) and det Q <= 1 over random
/// Haar bond configurations.
pub fn verify_theorem1(params: &ModelParams, n_configs: u64, seed: u64) -> Result<BoundReport> {
    params.validate()?;
    let lattice = params.lattice()?;
    let c_b_upper =
        params.components_per_site() as f64 * (1.0 - 1.0 / params.l as f64) * LN_2 / 2.0;
    let upper = c_b_upper * lattice.n_sites() as f64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut violations = 0;
    for i in 0..n_configs {
        let cfg = GaugeConfig::random(&lattice, params.group, params.n, &mut sample_rng(seed, i))?;
        let q = quadratic_form(&lattice, &cfg, params, true)?;
        let log_z = log_z_gaussian(&q)?;
        if q.log_det()? > DET_TOL {
            violations += 1;
        }
        if log_z < -DET_TOL || log_z > upper + DET_TOL * upper.max(1.0) {
            violations += 1;
        }
        lo = lo.min(log_z);
        hi = hi.max(log_z);
    }
    Ok(report(
        "bose",
        Some(params),
        Some(Method::ExactDeterminant),
        n_configs,
        violations,
        (lo, hi),
        (0.0, upper),
        0.0,
        false,
        vec![format!("c_B,u = {c_b_upper:.17e}")],
    ))
}

/// Gauge bounds c_Y,l Lambda_r <= ln Z_Y <= c_Y,u Lambda_r. Exact in d = 2,
/// gauge-fixed Monte Carlo otherwise.
pub fn verify_theorem2(
    params: &ModelParams,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<BoundReport> {
    params.validate()?;
    let lattice = params.lattice()?;
    let consts = bound_constants(params, &lattice)?;
    let z_w = if params.d == 2 {
        z_wilson_exact_d2(&lattice, params)?
    } else {
        z_wilson_mc(&lattice, params, n_samples, seed, true, workers)?
    };
    let log_z_y = z_w.log_value + log_s_y_factor(&lattice, params);
    let r = lattice.n_retained() as f64;
    let mut notes = vec![format!(
        "ln Z_Y = {log_z_y:.17e}; c_Y,l = {:.17e}; c_Y,u = {:.17e}",
        consts.c_y_lower, consts.c_y_upper
    )];
    let mut violations = 0;
    if let (2, Some(single)) = (params.d, consts.c_y_upper_single_bond) {
        let z = z_single_bond(
            SingleBond::Wilson,
            params.group,
            params.n,
            2,
            params.a,
            params.g2,
        )?;
        let scaled =
            z.log_value + 0.5 * (params.n * params.n) as f64 * params.plaquette_coupling().ln();
        let ok = scaled <= single + DET_TOL * single.abs().max(1.0);
        notes.push(format!(
            "single bond: ln(c^(N^2/2) z) = {scaled:.17e} <= {single:.17e}: {ok}"
        ));
        if !ok {
            violations += 1;
        }
    }
    let sigma = if z_w.method == Method::MonteCarlo {
        z_w.rel_std_error
    } else {
        0.0
    };
    Ok(report(
        "gauge",
        Some(params),
        Some(z_w.method),
        1,
        violations,
        (log_z_y, log_z_y),
        (consts.c_y_lower * r, consts.c_y_upper * r),
        sigma,
        z_w.method == Method::MonteCarlo && z_w.high_variance(),
        notes,
    ))
}

/// Combined bounds c_l Lambda_s <= ln Z <= c_u Lambda_s with the L-uniform
/// constants, plus the sandwich min Z_B Z_Y <= Z <= max Z_B Z_Y when the
/// complete integral is done by quadrature.
pub fn verify_theorem3(
    params: &ModelParams,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<BoundReport> {
    params.validate()?;
    let lattice = params.lattice()?;
    let consts = bound_constants(params, &lattice)?;
    let ls = lattice.n_sites() as f64;
    let factor = log_s_b_factor(&lattice, params) + log_s_y_factor(&lattice, params);
    let mut notes = vec![format!(
        "c_l = {:.6e}, c_u = {:.6e} (exact ratio); uniform c_l = {:.6e}, c_u = {:.6e}",
        consts.c_lower, consts.c_upper, consts.c_lower_uniform, consts.c_upper_uniform
    )];
    let mut violations = 0;
    let quadrature = if params.d == 2
        && params.group == GroupKind::U
        && params.n == 1
        && lattice.n_plaquettes() <= 4
    {
        let nodes = if lattice.n_plaquettes() == 1 { 64 } else { 16 };
        Some(z_complete_u1_d2(&lattice, params, nodes)?)
    } else {
        None
    };
    let z_u: Estimate = match &quadrature {
        Some((est, min_zb, max_zb)) => {
            let z_w = z_wilson_exact_d2(&lattice, params)?.log_value;
            let (lo, hi) = (min_zb + z_w, max_zb + z_w);
            let tol = 1e-6;
            let ok = est.log_value >= lo - tol && est.log_value <= hi + tol;
            notes.push(format!(
                "sandwich: {lo:.12e} <= ln Z^u = {:.12e} <= {hi:.12e}: {ok}",
                est.log_value
            ));
            if !ok {
                violations += 1;
            }
            est.clone()
        }
        None => z_complete_mc(&lattice, params, n_samples, seed, workers)?,
    };
    let log_z = z_u.log_value + factor;
    let per_site = log_z / ls;
    notes.push(format!("ln Z / Lambda_s = {per_site:.17e}"));
    if per_site < consts.c_lower - DET_TOL || per_site > consts.c_upper + DET_TOL {
        notes.push("exact-ratio constants violated".into());
    }
    let sigma = if z_u.method == Method::MonteCarlo {
        z_u.rel_std_error
    } else {
        0.0
    };
    Ok(report(
        "combined",
        Some(params),
        Some(z_u.method),
        1,
        violations,
        (log_z, log_z),
        (consts.c_lower_uniform * ls, consts.c_upper_uniform * ls),
        sigma,
        z_u.method == Method::MonteCarlo && z_u.high_variance(),
        notes,
    ))
}

/// Quadratic plaquette lemma: A_p <= k N sum |lambda_j|^2 for plaquettes
/// with k random retained links (the rest identity), and A_p <= 4N. Adds a
/// deterministic scan over diagonal links with phases on a grid that
/// includes +-pi.
pub fn verify_quadratic_lemma(
    kind: GroupKind,
    n: usize,
    k: usize,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<BoundReport> {
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "retained link count k must be in 1..=4, got {k}"
        )));
    }
    haar_sample(kind, n, &mut sample_rng(seed, 0))?;
    let cap = 4.0 * n as f64;
    let violates = |links: &[UnitaryMatrix; 4]| {
        let b = quadratic_bound_from_links(links, k);
        !b.holds || b.action > cap * (1.0 + 1e-12)
    };
    let random = mc::count(n_samples, workers, |i| {
        let mut rng = sample_rng(seed, i);
        let links: [UnitaryMatrix; 4] = std::array::from_fn(|j| {
            if j < k {
                haar_sample(kind, n, &mut rng).expect("validated group")
            } else {
                UnitaryMatrix::identity(n)
            }
        });
        violates(&links)
    })?;
    let grid: Vec<f64> = (0..=20).map(|i| -PI + 2.0 * PI * i as f64 / 20.0).collect();
    let diag = |t: f64| {
        let mut phases = vec![0.0; n];
        phases[0] = t;
        if kind == GroupKind::SU {
            phases[n - 1] = -t;
        }
        UnitaryMatrix::from_phases(&phases)
    };
    let mut scanned = 0u64;
    let mut scan_violations = 0u64;
    let mut idx = vec![0usize; k];
    'scan: loop {
        let links: [UnitaryMatrix; 4] = std::array::from_fn(|j| {
            if j < k {
                diag(grid[idx[j]])
            } else {
                UnitaryMatrix::identity(n)
            }
        });
        scanned += 1;
        if violates(&links) {
            scan_violations += 1;
        }
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < grid.len() {
                continue 'scan;
            }
            *slot = 0;
        }
        break;
    }
    let violations = random + scan_violations;
    Ok(report(
        "quadratic-plaquette",
        None,
        None,
        n_samples + scanned,
        violations,
        (0.0, 0.0),
        (0.0, 0.0),
        0.0,
        false,
        vec![format!(
            "{} k={k}: {random} random and {scan_violations} grid violations",
            kind.label(n)
        )],
    ))
}

/// Scalar inequalities, norm equivalence and the eigenphase distance bound.
pub fn verify_elementary(
    n_samples: u64,
    n: usize,
    seed: u64,
    workers: usize,
) -> Result<BoundReport> {
    let r = elementary_bounds_check(n_samples, n, seed, workers)?;
    Ok(report(
        "elementary",
        None,
        None,
        r.samples,
        r.violations(),
        (0.0, 0.0),
        (0.0, 0.0),
        0.0,
        false,
        vec![format!(
            "cosine lower {}, cosine upper {}, sinc lower {}, norm equivalence {}, unitary distance {}",
            r.cosine_lower, r.cosine_upper, r.sinc_lower, r.norm_equivalence, r.unitary_distance
        )],
    ))
}
