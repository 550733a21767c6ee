//! SU(2) in exponential (gluon) coordinates: w = exp(i A.sigma) with A in
//! the ball |A| <= pi, its Haar density, and the single-bond Wilson integral
//! computed both over A and over eigenphases.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{CMatrix, GroupKind, UnitaryMatrix, C64};
use crate::haar::{cue_density, weyl_integrate, WeylSpec};
use crate::quadrature::adaptive;

/// Below this |A| (or |w|) the sinc and arcsin ratios use Taylor series.
const SERIES_CUTOFF: f64 = 1e-4;

/// Gluon field A in R^3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Su2Vector(pub [f64; 3]);

impl Su2Vector {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// Unit quaternion (w0, w) with w0^2 + |w|^2 = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Su2GroupPoint {
    pub w0: f64,
    pub w: [f64; 3],
}

impl Su2GroupPoint {
    pub fn new(w0: f64, w: [f64; 3]) -> Result<Self> {
        let n = w0 * w0 + w.iter().map(|x| x * x).sum::<f64>();
        if (n - 1.0).abs() > 1e-12 {
            return Err(invalid(format!(
                "SU(2) point must have unit norm, got |w|^2 = {n}"
            )));
        }
        Ok(Self { w0, w })
    }

    /// The matrix [[w0 + i w3, w2 + i w1], [-w2 + i w1, w0 - i w3]].
    pub fn to_matrix(&self) -> UnitaryMatrix {
        let [w1, w2, w3] = self.w;
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(self.w0, w3),
                C64::new(w2, w1),
                C64::new(-w2, w1),
                C64::new(self.w0, -w3),
            ],
        );
        UnitaryMatrix::from_trusted(m)
    }

    pub fn from_matrix(u: &UnitaryMatrix) -> Result<Self> {
        if u.n() != 2 {
            return Err(invalid("SU(2) point needs a 2x2 matrix"));
        }
        let m = UnitaryMatrix::new(u.matrix().clone(), GroupKind::SU)?.into_matrix();
        let w0 = 0.5 * (m[(0, 0)] + m[(1, 1)]).re;
        let w3 = 0.5 * (m[(0, 0)] - m[(1, 1)]).im;
        let w1 = 0.5 * (m[(0, 1)] + m[(1, 0)]).im;
        let w2 = 0.5 * (m[(0, 1)] - m[(1, 0)]).re;
        Ok(Self {
            w0,
            w: [w1, w2, w3],
        })
    }
}

fn sinc(r: f64) -> f64 {
    if r < SERIES_CUTOFF {
        let r2 = r * r;
        1.0 - r2 / 6.0 + r2 * r2 / 120.0
    } else {
        r.sin() / r
    }
}

/// exp(i A.sigma) = (cos|A|, sin|A| A/|A|).
pub fn su2_exp(a: &Su2Vector) -> Su2GroupPoint {
    let r = a.norm();
    let s = sinc(r);
    Su2GroupPoint {
        w0: r.cos(),
        w: a.0.map(|x| s * x),
    }
}

/// Inverse of [`su2_exp`] on the open ball |A| < pi.
///
/// B = (theta/|w|) w with theta = arcsin|w| for w0 > 0, pi - arcsin|w| for
/// w0 < 0 and pi/2 at w0 = 0; theta is evaluated as atan2(|w|, w0), which
/// agrees on all three branches. Undefined at w = -1.
pub fn su2_log(p: &Su2GroupPoint) -> Result<Su2Vector> {
    let s = p.w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if p.w0 < 0.0 && s < 1e-15 {
        return Err(Error::LogUndefined);
    }
    let ratio = if p.w0 > 0.0 && s < SERIES_CUTOFF {
        let s2 = s * s;
        1.0 + s2 / 6.0 + 3.0 * s2 * s2 / 40.0
    } else {
        s.atan2(p.w0) / s
    };
    Ok(Su2Vector(p.w.map(|x| ratio * x)))
}

/// Haar density on the ball, sin^2|A| / (2 pi^2 |A|^2).
pub fn su2_haar_density(a: &Su2Vector) -> f64 {
    let s = sinc(a.norm());
    s * s / (2.0 * PI * PI)
}

/// Coupling c = a^{d-4}/g^2 multiplying plaquette actions.
pub fn coupling(a: f64, g2: f64, d: usize) -> f64 {
    a.powi(d as i32 - 4) / g2
}

fn check_params(a: f64, g2: f64, d: usize) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) || !(g2 > 0.0 && g2.is_finite()) {
        return Err(invalid(format!(
            "lattice spacing and coupling must be positive, got a={a}, g^2={g2}"
        )));
    }
    if !(1..=4).contains(&d) {
        return Err(invalid(format!("dimension must be in 1..=4, got {d}")));
    }
    Ok(())
}

/// Single-bond integral over the gluon ball, radially reduced:
/// 4 pi int_0^pi r^2 rho(r) exp(-c ||1 - exp(i r sigma_3)||_HS^2) dr.
pub fn su2_z_gluon(a: f64, g2: f64, d: usize) -> Result<f64> {
    check_params(a, g2, d)?;
    let c = coupling(a, g2, d);
    let integrand = |r: f64| {
        let w = su2_exp(&Su2Vector([0.0, 0.0, r]));
        let action = 2.0 * (2.0 - 2.0 * w.w0);
        4.0 * PI * r * r * su2_haar_density(&Su2Vector([0.0, 0.0, r])) * (-c * action).exp()
    };
    Ok(adaptive(integrand, 0.0, PI, 1e-12, 20_000)?.value)
}

/// The same integral through the SU(2) Weyl formula with eigenphases (l, -l).
pub fn su2_z_weyl(a: f64, g2: f64, d: usize) -> Result<f64> {
    check_params(a, g2, d)?;
    let c = coupling(a, g2, d);
    let weight = move |l: f64| (-c * 4.0 * (1.0 - l.cos())).exp() * cue_density(&[l, -l]);
    // Integrand is even; (1 / (2! 2pi)) int_{-pi}^{pi} = (1 / 2pi) int_0^pi.
    let peak = if c > 1.0 {
        (40.0 / c).sqrt().min(PI)
    } else {
        PI
    };
    let inner = adaptive(weight, 0.0, peak, 1e-12, 20_000)?.value;
    let tail = if peak < PI {
        adaptive(weight, peak, PI, 1e-12, 20_000)?.value
    } else {
        0.0
    };
    Ok((inner + tail) / (2.0 * PI))
}

/// The Weyl integral by the generic periodic trapezoid driver (smooth regime).
pub fn su2_z_weyl_trapezoid(a: f64, g2: f64, d: usize) -> Result<f64> {
    check_params(a, g2, d)?;
    let c = coupling(a, g2, d);
    let spec = WeylSpec::default_for(1)?;
    Ok(weyl_integrate(GroupKind::SU, 2, spec, |l| {
        (-c * 2.0 * l.iter().map(|x| 1.0 - x.cos()).sum::<f64>()).exp()
    })?
    .value)
}

/// E(gamma) = int_0^gamma exp(-r^2) r^2 dr; gamma = infinity gives sqrt(pi)/4.
pub fn capital_e(gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(invalid(format!("E(gamma) needs gamma >= 0, got {gamma}")));
    }
    let upper = gamma.min(40.0);
    Ok(adaptive(|r| (-r * r).exp() * r * r, 0.0, upper, 1e-13, 5000)?.value)
}

/// Outcome of the SU(2) single-bond bound checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Su2BoundCheck {
    pub a: f64,
    pub g2: f64,
    pub d: usize,
    pub z_gluon: f64,
    pub z_weyl: f64,
    /// c^{3/2} z, compared against (pi^2/4) E(infinity).
    pub scaled_z: f64,
    pub scaled_upper: f64,
    /// Lower single-bond integral z~ (restricted ball, quadratic action).
    pub z_tilde: f64,
    pub z_tilde_closed_form: f64,
    /// c^{3/2} z~, compared against the a-independent constant with E_0.
    pub scaled_z_tilde: f64,
    pub scaled_lower: f64,
    pub holds: bool,
}

/// C^2 = 4N in the plaquette bound ||1 - g_p||^2 <= C^2 sum |A|^2.
pub const SU2_C_SQ: f64 = 8.0;

/// Checks the SU(2) single-bond upper and lower bounds at (a, g^2) with
/// reference coupling g0^2 (at which E_0 is evaluated with a = 1).
pub fn su2_bounds_check(a: f64, g2: f64, d: usize, g0_sq: f64) -> Result<Su2BoundCheck> {
    check_params(a, g2, d)?;
    if d < 2 {
        return Err(invalid("SU(2) plaquette bounds need d >= 2"));
    }
    if !(g2 <= g0_sq) {
        return Err(invalid(format!(
            "bounds assume g^2 <= g0^2, got g^2={g2}, g0^2={g0_sq}"
        )));
    }
    let c = coupling(a, g2, d);
    let z_gluon = su2_z_gluon(a, g2, d)?;
    let z_weyl = su2_z_weyl(a, g2, d)?;
    let scaled_z = c.powf(1.5) * z_gluon;
    let scaled_upper = PI * PI / 4.0 * capital_e(f64::INFINITY)?;

    // z~ = int_{|A| <= pi/2} (4/(pi^2 2pi^2)) exp(-c 2(d-1) C^2 |A|^2) d^3A.
    let k = 2.0 * (d as f64 - 1.0) * SU2_C_SQ;
    let density_floor = 4.0 / (PI * PI) / (2.0 * PI * PI);
    let z_tilde = adaptive(
        |r| 4.0 * PI * r * r * density_floor * (-c * k * r * r).exp(),
        0.0,
        PI / 2.0,
        1e-12,
        20_000,
    )?
    .value;
    let prefactor = (2.0 / (PI * SU2_C_SQ.sqrt() * (2.0 * (d as f64 - 1.0)).sqrt())).powi(3);
    let gamma = |cc: f64| (cc * k).sqrt() * PI / 2.0;
    let z_tilde_closed_form = c.powf(-1.5) * prefactor * capital_e(gamma(c))?;
    let scaled_z_tilde = c.powf(1.5) * z_tilde;
    let scaled_lower = prefactor * capital_e(gamma(coupling(1.0, g0_sq, d).min(c)))?;

    let tol = 1e-9;
    let holds = scaled_z <= scaled_upper * (1.0 + tol)
        && scaled_z_tilde >= scaled_lower * (1.0 - tol)
        && z_tilde <= z_gluon * (1.0 + tol)
        && (z_tilde - z_tilde_closed_form).abs() <= tol * z_tilde_closed_form
        && (z_gluon - z_weyl).abs() <= tol * z_weyl;
    Ok(Su2BoundCheck {
        a,
        g2,
        d,
        z_gluon,
        z_weyl,
        scaled_z,
        scaled_upper,
        z_tilde,
        z_tilde_closed_form,
        scaled_z_tilde,
        scaled_lower,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_small_and_pi() {
        let p = su2_exp(&Su2Vector([0.0, 0.0, 0.0]));
        assert_eq!((p.w0, p.w), (1.0, [0.0; 3]));
        let p = su2_exp(&Su2Vector([PI, 0.0, 0.0]));
        assert!((p.w0 + 1.0).abs() < 1e-15);
        assert!(matches!(
            su2_log(&Su2GroupPoint {
                w0: -1.0,
                w: [0.0; 3]
            }),
            Err(Error::LogUndefined)
        ));
    }

    #[test]
    fn log_branches() {
        for r in [1e-6, 0.5, PI / 2.0, 2.5, 3.1] {
            let a = Su2Vector([0.0, r, 0.0]);
            let back = su2_log(&su2_exp(&a)).unwrap();
            assert!((back.0[1] - r).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn matrix_roundtrip() {
        let p = su2_exp(&Su2Vector([0.3, -0.7, 1.1]));
        let m = p.to_matrix();
        assert!(m.defect() < 1e-14);
        assert!((m.det() - C64::new(1.0, 0.0)).norm() < 1e-14);
        let q = Su2GroupPoint::from_matrix(&m).unwrap();
        assert!(
            (q.w0 - p.w0).abs() < 1e-15 && q.w.iter().zip(&p.w).all(|(a, b)| (a - b).abs() < 1e-15)
        );
    }

    #[test]
    fn density_normalized() {
        let total = adaptive(
            |r| 4.0 * PI * r * r * su2_haar_density(&Su2Vector([r, 0.0, 0.0])),
            0.0,
            PI,
            1e-13,
            1000,
        )
        .unwrap()
        .value;
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn e_infinity() {
        assert!((capital_e(f64::INFINITY).unwrap() - PI.sqrt() / 4.0).abs() < 1e-13);
        let g = 1e-2;
        assert!((capital_e(g).unwrap() - (g.powi(3) / 3.0 - g.powi(5) / 5.0)).abs() < 1e-15);
    }

    #[test]
    fn gluon_and_weyl_agree() {
        for (a, g2) in [(1.0, 1.0), (0.1, 2.0), (1.0, 0.5)] {
            let zg = su2_z_gluon(a, g2, 3).unwrap();
            let zw = su2_z_weyl(a, g2, 3).unwrap();
            assert!((zg - zw).abs() < 1e-10 * zw, "{zg} vs {zw}");
        }
        let zt = su2_z_weyl_trapezoid(1.0, 1.0, 4).unwrap();
        assert!((zt - su2_z_gluon(1.0, 1.0, 4).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn bounds_hold_on_sample_points() {
        for a in [1.0, 0.1, 0.01] {
            let r = su2_bounds_check(a, 1.0, 3, 4.0).unwrap();
            assert!(r.holds, "{r:?}");
        }
    }
}
