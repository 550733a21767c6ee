//! Library values against closed forms and brute-force integrals that do
//! not share code with the implementation.

use std::f64::consts::PI;

use gaugelab::action::{quadratic_form, FieldKind, GaugeConfig, ModelParams};
use gaugelab::group::{angular_eigenvalues, haar_sample};
use gaugelab::haar::{haar_mean, weyl_integrate, WeylSpec};
use gaugelab::lattice::Boundary;
use gaugelab::mc::sample_rng;
use gaugelab::partition::{
    chain_gauge_independence, log_z_gaussian, z_complete_mc, z_complete_u1_d2, z_single_bond,
    z_wilson_u1_quadrature, SingleBond,
};
use gaugelab::rmt::{ensemble_constants, gue_normalization_closed_form};
use gaugelab::su2::{capital_e, su2_z_gluon, su2_z_weyl};
use gaugelab::{GaugeFixing, GroupKind, Lattice, UnitaryMatrix, C64};
use nalgebra::DMatrix;

/// Modified Bessel function I_n(x) from its power series.
fn bessel_i(n: i32, x: f64) -> f64 {
    let n = n.unsigned_abs() as i32;
    let h = 0.5 * x;
    let mut term = (1..=n).fold(1.0, |t, k| t * h / k as f64);
    let mut sum = term;
    for k in 1..400 {
        term *= h * h / (k as f64 * (k + n) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// int_{U(N)} exp(-c ||1 - U||^2) dU = e^{-2Nc} det[I_{j-k}(2c)], summed over
/// det shifts m for SU(N).
fn toeplitz_single_bond(kind: GroupKind, n: usize, c: f64) -> f64 {
    let shifts: Vec<i32> = match kind {
        GroupKind::U => vec![0],
        GroupKind::SU => (-30..=30).collect(),
    };
    let total: f64 = shifts
        .iter()
        .map(|&m| {
            DMatrix::from_fn(n, n, |j, k| bessel_i(j as i32 - k as i32 + m, 2.0 * c)).determinant()
        })
        .sum();
    (-2.0 * n as f64 * c).exp() * total
}

#[test]
fn single_bond_matches_toeplitz_determinants() {
    for (kind, n) in [
        (GroupKind::U, 1),
        (GroupKind::U, 2),
        (GroupKind::U, 3),
        (GroupKind::SU, 2),
        (GroupKind::SU, 3),
    ] {
        for c in [0.25, 1.0, 3.0] {
            let z = z_single_bond(SingleBond::Wilson, kind, n, 4, 1.0, 1.0 / c)
                .unwrap()
                .log_value
                .exp();
            let oracle = toeplitz_single_bond(kind, n, c);
            assert!(
                (z / oracle - 1.0).abs() < 1e-9,
                "{} c={c}: {z} vs {oracle}",
                kind.label(n)
            );
        }
    }
}

#[test]
fn su2_single_bond_bessel_form() {
    // (2/pi) int_0^pi sin^2 t e^{-4c(1 - cos t)} dt = e^{-4c} I_1(4c) / (2c).
    for (a, g2) in [(1.0f64, 1.0), (0.5, 2.0), (0.2, 0.7)] {
        let c = a.powi(-1) / g2;
        let oracle = (-4.0 * c).exp() * bessel_i(1, 4.0 * c) / (2.0 * c);
        assert!((su2_z_weyl(a, g2, 3).unwrap() / oracle - 1.0).abs() < 1e-10);
        assert!((su2_z_gluon(a, g2, 3).unwrap() / oracle - 1.0).abs() < 1e-9);
    }
}

#[test]
fn e_of_gamma_closed_form() {
    // E(gamma) = (sqrt(pi)/4) erf(gamma) - gamma e^{-gamma^2} / 2.
    let erf1 = 0.842_700_792_949_714_9;
    let e1 = PI.sqrt() / 4.0 * erf1 - 0.5 * (-1.0f64).exp();
    assert!((capital_e(1.0).unwrap() - e1).abs() < 1e-13);
    assert!((capital_e(f64::INFINITY).unwrap() - PI.sqrt() / 4.0).abs() < 1e-13);
}

/// Three-point Gauss–Hermite is exact for the degree-4-per-variable GUE
/// integrand exp(-|y|^2) prod (y_j - y_k)^2 when N = 3.
#[test]
fn gue_normalization_by_gauss_hermite() {
    let nodes = [-(1.5f64).sqrt(), 0.0, 1.5f64.sqrt()];
    let weights = [PI.sqrt() / 6.0, 2.0 * PI.sqrt() / 3.0, PI.sqrt() / 6.0];
    let mut total = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let (x, y, z) = (nodes[i], nodes[j], nodes[k]);
                let vdm = ((x - y) * (x - z) * (y - z)).powi(2);
                total += weights[i] * weights[j] * weights[k] * vdm;
            }
        }
    }
    let c = ensemble_constants(3).unwrap();
    assert!((c.n_g / total - 1.0).abs() < 1e-10, "{} vs {total}", c.n_g);
    assert!((gue_normalization_closed_form(3) / total - 1.0).abs() < 1e-13);
}

fn trapezoid_2d<F: Fn(f64, f64) -> f64>(half: f64, m: usize, f: F) -> f64 {
    let h = 2.0 * half / m as f64;
    let mut s = 0.0;
    for i in 0..=m {
        for j in 0..=m {
            s += f(-half + i as f64 * h, -half + j as f64 * h);
        }
    }
    s * h * h
}

#[test]
fn single_bond_bose_by_direct_integration() {
    // Two sites joined by one U(1) bond e^{i theta}, real N = 1 field:
    // Z = (2 pi)^{-1} int exp(-(x^2 + y^2)/2 + kappa^2 cos(theta) x y).
    let p = ModelParams {
        d: 1,
        l: 2,
        ..ModelParams::default()
    };
    let lat = p.lattice().unwrap();
    let k2 = p.scaling().kappa_sq;
    for theta in [0.0, 0.7, 2.0] {
        let cfg = GaugeConfig::new(&lat, vec![UnitaryMatrix::from_phases(&[theta])]).unwrap();
        let lz = log_z_gaussian(&quadratic_form(&lat, &cfg, &p, true).unwrap()).unwrap();
        let t = k2 * theta.cos();
        let oracle =
            trapezoid_2d(14.0, 560, |x, y| (-(x * x + y * y) / 2.0 + t * x * y).exp()) / (2.0 * PI);
        assert!(
            (lz.exp() / oracle - 1.0).abs() < 1e-10,
            "theta={theta}: {} vs {oracle}",
            lz.exp()
        );
        assert!((lz - -0.5 * (1.0 - t * t).ln()).abs() < 1e-13);
        let pc = ModelParams {
            field: FieldKind::Complex,
            ..p.clone()
        };
        let lzc = log_z_gaussian(&quadratic_form(&lat, &cfg, &pc, true).unwrap()).unwrap();
        assert!(
            (lzc - -(1.0 - k2 * k2).ln()).abs() < 1e-13,
            "complex field couples through |g| = 1"
        );
    }
}

#[test]
fn haar_marginals_pass_kolmogorov_smirnov() {
    let n = 20_000;
    let ks = |mut xs: Vec<f64>, cdf: &dyn Fn(f64) -> f64| {
        xs.sort_by(f64::total_cmp);
        let m = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
            })
            .fold(0.0, f64::max)
    };
    // 1% critical value of the one-sample statistic.
    let crit = 1.63 / (n as f64).sqrt();
    let uniform = |x: f64| (x + PI) / (2.0 * PI);
    for (kind, k) in [(GroupKind::U, 1), (GroupKind::U, 2), (GroupKind::U, 3)] {
        // The marginal of an eigenphase picked independently of its value is uniform.
        let xs: Vec<f64> = (0..n as u64)
            .map(|i| {
                angular_eigenvalues(&haar_sample(kind, k, &mut sample_rng(11, i)).unwrap())
                    [i as usize % k]
            })
            .collect();
        let d = ks(xs, &uniform);
        assert!(d < crit, "U({k}) phases: D = {d}");
    }
    // SU(2) half-angle t in [0, pi] has density (2/pi) sin^2 t.
    let xs: Vec<f64> = (0..n as u64)
        .map(|i| {
            angular_eigenvalues(&haar_sample(GroupKind::SU, 2, &mut sample_rng(12, i)).unwrap())[0]
        })
        .collect();
    let d = ks(xs, &|t: f64| (t - t.sin() * t.cos()) / PI);
    assert!(d < crit, "SU(2) angle: D = {d}");
}

fn trace_power(l: &[f64]) -> C64 {
    l.iter().map(|&x| C64::from_polar(1.0, x)).sum()
}

#[test]
fn trace_moments_by_weyl_and_haar() {
    // E|Tr U|^{2k} = k! for k <= N on U(N); E (Tr U)^3 = 1 on SU(3).
    let spec = WeylSpec::default_for(3).unwrap();
    let r = weyl_integrate(GroupKind::U, 3, spec, |l| trace_power(l).norm_sqr().powi(3)).unwrap();
    assert!((r.value - 6.0).abs() < 1e-9);
    let r = weyl_integrate(GroupKind::SU, 3, WeylSpec::default_for(2).unwrap(), |l| {
        trace_power(l).powi(3).re
    })
    .unwrap();
    assert!((r.value - 1.0).abs() < 1e-10);
    let m = haar_mean(GroupKind::SU, 3, 40_000, 5, 1, |u| u.trace().powi(3).re).unwrap();
    assert!(
        (m.mean - 1.0).abs() < 4.0 * m.std_error(),
        "{} +- {}",
        m.mean,
        m.std_error()
    );
    let m = haar_mean(GroupKind::U, 3, 40_000, 6, 1, |u| {
        u.trace().norm_sqr().powi(2)
    })
    .unwrap();
    assert!(
        (m.mean - 2.0).abs() < 4.0 * m.std_error(),
        "{} +- {}",
        m.mean,
        m.std_error()
    );
}

#[test]
fn d2_wilson_factorizes() {
    for (l, a) in [(2, 1.0), (3, 1.0), (3, 0.7)] {
        let p = ModelParams {
            l,
            a,
            ..ModelParams::default()
        };
        let lat = p.lattice().unwrap();
        let z = z_single_bond(SingleBond::Wilson, GroupKind::U, 1, 2, a, 1.0).unwrap();
        let q = z_wilson_u1_quadrature(&lat, &p, 48, true).unwrap();
        let expected = (lat.n_plaquettes() as f64 * z.log_value).exp();
        assert!((q.value / expected - 1.0).abs() < 1e-10, "L={l}, a={a}");
    }
}

#[test]
fn complete_partition_single_plaquette() {
    // L = 2: one retained bond; integrate its angle directly.
    for field in [FieldKind::Real, FieldKind::Complex] {
        let p = ModelParams {
            l: 2,
            a: 0.8,
            field,
            ..ModelParams::default()
        };
        let lat = p.lattice().unwrap();
        let fixing = GaugeFixing::enhanced_temporal(&lat);
        let [b] = fixing.retained() else {
            panic!("one retained bond expected")
        };
        let c = p.plaquette_coupling();
        let m = 512;
        let mut cfg = GaugeConfig::identity(&lat, 1);
        let sum: f64 = (0..m)
            .map(|i| {
                let t = -PI + 2.0 * PI * i as f64 / m as f64;
                cfg.links[*b] = UnitaryMatrix::from_phases(&[t]);
                let zb = log_z_gaussian(&quadratic_form(&lat, &cfg, &p, false).unwrap()).unwrap();
                (zb - 2.0 * c * (1.0 - t.cos())).exp()
            })
            .sum();
        let oracle = (sum / m as f64).ln();
        let (est, _, _) = z_complete_u1_d2(&lat, &p, 16).unwrap();
        assert!(
            (est.log_value - oracle).abs() < 1e-9,
            "{field:?}: {} vs {oracle}",
            est.log_value
        );
        let mc = z_complete_mc(&lat, &p, 20_000, 3, 1).unwrap();
        assert!(
            (mc.log_value - oracle).abs() < 4.0 * mc.rel_std_error,
            "{field:?} MC"
        );
    }
}

#[test]
fn bose_chain_is_gauge_independent() {
    for n in 1..=3 {
        let r = chain_gauge_independence(6, n, 2, 0.25, 17).unwrap();
        assert!(r.rel_difference < 1e-12, "N={n}: {}", r.rel_difference);
    }
}

#[test]
fn three_dimensional_two_site_lattice() {
    let lat = Lattice::new(3, 2, Boundary::Free).unwrap();
    let c = lat.counts();
    assert_eq!(
        (c.sites, c.bonds, c.plaquettes, c.retained_bonds),
        (8, 12, 6, 5)
    );
    // Only the (1, 2) plane is horizontal: two of the six plaquettes.
    assert_eq!(lat.horizontal_plaquettes().len(), 2);
}
