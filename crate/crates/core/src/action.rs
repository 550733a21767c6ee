//! Model parameters, gauge and scalar field configurations, the Bose and
//! Wilson actions, and the scale transformations relating unscaled and
//! scaled variables.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{
    angular_eigenvalues, haar_sample, hs_norm, log_map_spectral, op_norm, CMatrix, GroupKind,
    LieAlgebraElement, UnitaryMatrix, C64,
};
use crate::lattice::{GaugeFixing, Lattice};
use crate::mc::{self, sample_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Real,
    Complex,
}

impl std::str::FromStr for FieldKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "real" => Ok(FieldKind::Real),
            "complex" => Ok(FieldKind::Complex),
            other => Err(invalid(format!(
                "unknown field kind '{other}' (expected real or complex)"
            ))),
        }
    }
}

impl FieldKind {
    /// Real components per colour/flavour entry.
    pub fn real_factor(self) -> usize {
        match self {
            FieldKind::Real => 1,
            FieldKind::Complex => 2,
        }
    }
}

/// Physical and lattice parameters of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub a: f64,
    pub g2: f64,
    pub g0_sq: f64,
    pub kappa_u_sq: f64,
    pub m_u: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub n_f: usize,
    pub group: GroupKind,
    pub field: FieldKind,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            d: 2,
            l: 3,
            a: 1.0,
            g2: 1.0,
            g0_sq: 4.0,
            kappa_u_sq: 1.0,
            m_u: 0.0,
            n: 1,
            n_f: 1,
            group: GroupKind::U,
            field: FieldKind::Real,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.d) {
            return Err(invalid(format!("d must be in 1..=4, got {}", self.d)));
        }
        if self.l < 2 {
            return Err(invalid(format!("L must be at least 2, got {}", self.l)));
        }
        if !(self.a > 0.0 && self.a <= 1.0) {
            return Err(invalid(format!(
                "lattice spacing a must lie in (0, 1], got {}",
                self.a
            )));
        }
        if !(self.g0_sq > 0.0 && self.g0_sq.is_finite()) {
            return Err(invalid(format!(
                "g0^2 must be positive, got {}",
                self.g0_sq
            )));
        }
        if !(self.g2 > 0.0 && self.g2 <= self.g0_sq) {
            return Err(invalid(format!(
                "g^2 must lie in (0, g0^2 = {}], got {}",
                self.g0_sq, self.g2
            )));
        }
        if !(self.kappa_u_sq > 0.0 && self.kappa_u_sq.is_finite()) {
            return Err(invalid(format!(
                "kappa_u^2 must be positive, got {}",
                self.kappa_u_sq
            )));
        }
        if !(self.m_u >= 0.0 && self.m_u.is_finite()) {
            return Err(invalid(format!(
                "m_u must be non-negative, got {}",
                self.m_u
            )));
        }
        if self.n == 0 || self.n_f == 0 {
            return Err(invalid("N and N_f must be positive"));
        }
        if self.group == GroupKind::SU && self.n < 2 {
            return Err(invalid("SU(N) needs N >= 2"));
        }
        Ok(())
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.d, self.l, crate::lattice::Boundary::Free)
    }

    pub fn scaling(&self) -> ScalingFactors {
        scaling_factors(self)
    }

    /// Real components of the Bose field per site.
    pub fn components_per_site(&self) -> usize {
        self.n * self.n_f * self.field.real_factor()
    }

    /// Gauge coupling factor a^{d-4}/g^2 multiplying each plaquette action.
    pub fn plaquette_coupling(&self) -> f64 {
        self.a.powi(self.d as i32 - 4) / self.g2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFactors {
    pub s_b: f64,
    pub s_y: f64,
    pub kappa_sq: f64,
}

/// s_B = [a^{d-2}(m_u^2 a^2 + 2d kappa_u^2)]^{1/2}, s_Y = a^{(d-4)/2}/g and
/// kappa^2 = [2d + (m_u a / kappa_u)^2]^{-1}, which is 1/(2d) at m_u = 0.
pub fn scaling_factors(p: &ModelParams) -> ScalingFactors {
    let d = p.d as f64;
    let s_b =
        (p.a.powi(p.d as i32 - 2) * (p.m_u * p.m_u * p.a * p.a + 2.0 * d * p.kappa_u_sq)).sqrt();
    let s_y = p.a.powf((d - 4.0) / 2.0) / p.g2.sqrt();
    let kappa_sq = 1.0 / (2.0 * d + p.m_u * p.m_u * p.a * p.a / p.kappa_u_sq);
    ScalingFactors { s_b, s_y, kappa_sq }
}

/// Scaled gluon fields from bond variables X: A = X/(a g) and
/// y = a^{(d-2)/2} A.
pub fn gluon_scaling(
    x: &LieAlgebraElement,
    a: f64,
    g: f64,
    d: usize,
) -> (LieAlgebraElement, LieAlgebraElement) {
    let to_a = 1.0 / (a * g);
    let to_y = a.powf((d as f64 - 2.0) / 2.0);
    let big_a = LieAlgebraElement {
        coeffs: x.coeffs.iter().map(|c| c * to_a).collect(),
        ..x.clone()
    };
    let y = LieAlgebraElement {
        coeffs: big_a.coeffs.iter().map(|c| c * to_y).collect(),
        ..x.clone()
    };
    (big_a, y)
}

/// Bond variables g_b indexed like the lattice bonds.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeConfig {
    d: usize,
    l: usize,
    pub links: Vec<UnitaryMatrix>,
}

impl GaugeConfig {
    pub fn new(lattice: &Lattice, links: Vec<UnitaryMatrix>) -> Result<Self> {
        if links.len() != lattice.n_bonds() {
            return Err(Error::LatticeMismatch(format!(
                "{} links for {} bonds",
                links.len(),
                lattice.n_bonds()
            )));
        }
        let n = links.first().map(|u| u.n()).unwrap_or(1);
        if links.iter().any(|u| u.n() != n) {
            return Err(invalid("all links must have the same rank"));
        }
        Ok(Self {
            d: lattice.d(),
            l: lattice.side(),
            links,
        })
    }

    pub fn identity(lattice: &Lattice, n: usize) -> Self {
        Self {
            d: lattice.d(),
            l: lattice.side(),
            links: vec![UnitaryMatrix::identity(n); lattice.n_bonds()],
        }
    }

    /// Independent Haar links on every bond.
    pub fn random<R: Rng + ?Sized>(
        lattice: &Lattice,
        kind: GroupKind,
        n: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let links = (0..lattice.n_bonds())
            .map(|_| haar_sample(kind, n, rng))
            .collect::<Result<_>>()?;
        Self::new(lattice, links)
    }

    /// Haar links on the retained bonds and the identity on the tree.
    pub fn random_gauge_fixed<R: Rng + ?Sized>(
        lattice: &Lattice,
        fixing: &GaugeFixing,
        kind: GroupKind,
        n: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut cfg = Self::identity(lattice, n);
        for &b in fixing.retained() {
            cfg.links[b] = haar_sample(kind, n, rng)?;
        }
        Ok(cfg)
    }

    pub fn n(&self) -> usize {
        self.links.first().map(|u| u.n()).unwrap_or(1)
    }

    pub fn check(&self, lattice: &Lattice) -> Result<()> {
        if self.d != lattice.d()
            || self.l != lattice.side()
            || self.links.len() != lattice.n_bonds()
        {
            return Err(Error::LatticeMismatch(format!(
                "configuration for d={}, L={} used on lattice d={}, L={}",
                self.d,
                self.l,
                lattice.d(),
                lattice.side()
            )));
        }
        Ok(())
    }

    /// g_b -> R_x g_b R_{x+mu}^dag for site matrices R.
    pub fn gauge_transform(&self, lattice: &Lattice, r: &[UnitaryMatrix]) -> Result<Self> {
        self.check(lattice)?;
        if r.len() != lattice.n_sites() {
            return Err(Error::LatticeMismatch(format!(
                "{} gauge matrices for {} sites",
                r.len(),
                lattice.n_sites()
            )));
        }
        let links = self
            .links
            .iter()
            .enumerate()
            .map(|(b, g)| {
                let (x, y) = lattice.endpoints(b);
                &(&r[x] * g) * &r[y].adjoint()
            })
            .collect();
        Ok(Self {
            links,
            ..self.clone()
        })
    }

    /// Holonomy g_p = g1 g2 g3^-1 g4^-1 of plaquette `p`.
    pub fn holonomy(&self, lattice: &Lattice, p: usize) -> UnitaryMatrix {
        let [b1, b2, b3, b4] = lattice.plaquettes()[p].bonds;
        let m = self.links[b1].matrix()
            * self.links[b2].matrix()
            * self.links[b3].matrix().adjoint()
            * self.links[b4].matrix().adjoint();
        UnitaryMatrix::from_trusted(m)
    }
}

/// A_p = ||1 - g_p||_HS^2 = 2 Re Tr(1 - g_p).
pub fn plaquette_action(g_p: &UnitaryMatrix) -> f64 {
    2.0 * (g_p.n() as f64 - g_p.trace().re)
}

/// S^w = (a^{d-4}/g^2) sum_p A_p.
pub fn wilson_action(lattice: &Lattice, cfg: &GaugeConfig, params: &ModelParams) -> Result<f64> {
    cfg.check(lattice)?;
    let total: f64 = (0..lattice.n_plaquettes())
        .map(|p| plaquette_action(&cfg.holonomy(lattice, p)))
        .sum();
    Ok(params.plaquette_coupling() * total)
}

/// Site-indexed Bose field; each site holds N x N_f entries (colour major).
/// Real fields store zero imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub kind: FieldKind,
    pub n: usize,
    pub n_f: usize,
    pub values: Vec<C64>,
}

impl ScalarField {
    pub fn new(kind: FieldKind, n: usize, n_f: usize, values: Vec<C64>) -> Result<Self> {
        if !values.len().is_multiple_of(n * n_f) {
            return Err(invalid("field length must be a multiple of N * N_f"));
        }
        if kind == FieldKind::Real && values.iter().any(|z| z.im != 0.0) {
            return Err(invalid("real field has a nonzero imaginary part"));
        }
        Ok(Self {
            kind,
            n,
            n_f,
            values,
        })
    }

    pub fn random<R: Rng + ?Sized>(
        lattice: &Lattice,
        kind: FieldKind,
        n: usize,
        n_f: usize,
        rng: &mut R,
    ) -> Self {
        let len = lattice.n_sites() * n * n_f;
        let values = (0..len)
            .map(|_| {
                let re: f64 = rng.sample(rand_distr::StandardNormal);
                let im: f64 = if kind == FieldKind::Complex {
                    rng.sample(rand_distr::StandardNormal)
                } else {
                    0.0
                };
                C64::new(re, im)
            })
            .collect();
        Self {
            kind,
            n,
            n_f,
            values,
        }
    }

    fn site(&self, x: usize) -> &[C64] {
        let w = self.n * self.n_f;
        &self.values[x * w..(x + 1) * w]
    }

    fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }

    /// phi_x -> R_x phi_x with colour acting on each flavour.
    pub fn gauge_transform(&self, r: &[UnitaryMatrix]) -> Self {
        let w = self.n * self.n_f;
        let mut out = self.values.clone();
        for (x, rx) in r.iter().enumerate() {
            for f in 0..self.n_f {
                for i in 0..self.n {
                    out[x * w + i * self.n_f + f] = (0..self.n)
                        .map(|j| rx.matrix()[(i, j)] * self.values[x * w + j * self.n_f + f])
                        .sum();
                }
            }
        }
        Self {
            values: out,
            ..self.clone()
        }
    }

    /// phi^u = phi / s_B.
    pub fn unscale(&self, s_b: f64) -> Self {
        Self {
            values: self.values.iter().map(|z| z / s_b).collect(),
            ..self.clone()
        }
    }
}

/// sum_b Re(phi_x^dag g_b phi_{x+mu}), summed over flavours.
fn hopping(lattice: &Lattice, phi: &ScalarField, cfg: &GaugeConfig) -> f64 {
    let (n, nf) = (phi.n, phi.n_f);
    let mut total = 0.0;
    for (b, g) in cfg.links.iter().enumerate() {
        let (x, y) = lattice.endpoints(b);
        let (px, py) = (phi.site(x), phi.site(y));
        for f in 0..nf {
            for i in 0..n {
                let gy: C64 = (0..n).map(|j| g.matrix()[(i, j)] * py[j * nf + f]).sum();
                total += (px[i * nf + f].conj() * gy).re;
            }
        }
    }
    total
}

/// Bose action.
///
/// Scaled: S = 1/2 sum_x |phi_x|^2 - kappa^2 sum_b Re(phi_x^dag g_b phi_{x+mu}).
/// Unscaled: S = 1/2 s_B^2 sum_x |phi_x|^2 - kappa_u^2 a^{d-2} sum_b Re(...).
/// For real fields the hopping term is phi_x^T Re(g_b) phi_{x+mu}.
pub fn bose_action(
    lattice: &Lattice,
    phi: &ScalarField,
    cfg: &GaugeConfig,
    params: &ModelParams,
    scaled: bool,
) -> Result<f64> {
    cfg.check(lattice)?;
    if phi.values.len() != lattice.n_sites() * phi.n * phi.n_f {
        return Err(Error::LatticeMismatch(
            "field length does not match the lattice".into(),
        ));
    }
    if phi.n != cfg.n() {
        return Err(Error::LatticeMismatch(format!(
            "field colour {} vs link rank {}",
            phi.n,
            cfg.n()
        )));
    }
    let sf = scaling_factors(params);
    let (mass, hop) = if scaled {
        (1.0, sf.kappa_sq)
    } else {
        (
            sf.s_b * sf.s_b,
            params.kappa_u_sq * params.a.powi(params.d as i32 - 2),
        )
    };
    Ok(0.5 * mass * phi.norm_sqr() - hop * hopping(lattice, phi, cfg))
}

/// Result of the quadratic plaquette bound for one plaquette.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaquetteBound {
    pub action: f64,
    pub bound: f64,
    pub retained: usize,
    pub holds: bool,
}

/// A_p <= k N sum_j |x_j|^2 over the k retained bonds of the plaquette,
/// with x_j = log g_j by spectral logarithm. Requires tree bonds equal to 1.
pub fn quadratic_plaquette_bound(
    lattice: &Lattice,
    cfg: &GaugeConfig,
    fixing: &GaugeFixing,
    p: usize,
) -> Result<PlaquetteBound> {
    cfg.check(lattice)?;
    let n = cfg.n();
    let plaq = lattice
        .plaquettes()
        .get(p)
        .ok_or_else(|| invalid(format!("no plaquette {p}")))?;
    let mut sum_sq = 0.0;
    let mut k = 0;
    for &b in &plaq.bonds {
        if fixing.is_tree_bond(b) {
            if cfg.links[b].distance(&UnitaryMatrix::identity(n)) > 1e-12 {
                return Err(invalid(format!(
                    "tree bond {b} is not gauge-fixed to the identity"
                )));
            }
        } else {
            k += 1;
            sum_sq += log_map_spectral(&cfg.links[b])?.norm_sqr();
        }
    }
    let action = plaquette_action(&cfg.holonomy(lattice, p));
    let bound = (k * n) as f64 * sum_sq;
    Ok(PlaquetteBound {
        action,
        bound,
        retained: k,
        holds: action <= bound * (1.0 + 1e-12) + 1e-12,
    })
}

/// Same bound for a plaquette with links g1..g4 where the first `k` are
/// retained and the rest are identity, evaluated from eigenphases.
pub fn quadratic_bound_from_links(links: &[UnitaryMatrix; 4], k: usize) -> PlaquetteBound {
    let n = links[0].n();
    let m = links[0].matrix()
        * links[1].matrix()
        * links[2].matrix().adjoint()
        * links[3].matrix().adjoint();
    let action = plaquette_action(&UnitaryMatrix::from_trusted(m));
    let sum_sq: f64 = links[..k]
        .iter()
        .map(|g| angular_eigenvalues(g).iter().map(|l| l * l).sum::<f64>())
        .sum();
    let bound = (k * n) as f64 * sum_sq;
    PlaquetteBound {
        action,
        bound,
        retained: k,
        holds: action <= bound * (1.0 + 1e-12) + 1e-12,
    }
}

/// Violation counts of the elementary inequalities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementaryReport {
    pub samples: u64,
    /// 1 - cos x >= (2/pi^2) x^2 on [-pi, pi].
    pub cosine_lower: u64,
    /// sin^2 x / x^2 >= (2/pi)^2 on [-pi/2, pi/2].
    pub sinc_lower: u64,
    /// 1 - cos x <= x^2 / 2.
    pub cosine_upper: u64,
    /// N^{-1/2} ||A||_HS <= ||A|| <= ||A||_HS.
    pub norm_equivalence: u64,
    /// ||1 - g||_HS^2 = sum_j |1 - e^{i lambda_j}|^2 <= sum_j lambda_j^2.
    pub unitary_distance: u64,
}

impl ElementaryReport {
    pub fn violations(&self) -> u64 {
        self.cosine_lower
            + self.sinc_lower
            + self.cosine_upper
            + self.norm_equivalence
            + self.unitary_distance
    }
}

/// Random checks of the scalar inequalities, matrix norm equivalence for
/// random complex N x N matrices and the eigenphase distance bound on Haar U(N).
pub fn elementary_bounds_check(
    n_samples: u64,
    n: usize,
    seed: u64,
    workers: usize,
) -> Result<ElementaryReport> {
    if n == 0 {
        return Err(invalid("matrix size must be positive"));
    }
    let counts = mc::run_blocks(n_samples, workers, |range| {
        let mut r = ElementaryReport::default();
        for i in range {
            let mut rng = sample_rng(seed, i);
            r.samples += 1;
            let x: f64 = rng.random_range(-PI..=PI);
            let one_minus_cos = 2.0 * (0.5 * x).sin().powi(2);
            if one_minus_cos < 2.0 / (PI * PI) * x * x * (1.0 - 1e-12) {
                r.cosine_lower += 1;
            }
            if one_minus_cos > 0.5 * x * x * (1.0 + 1e-12) {
                r.cosine_upper += 1;
            }
            let y = 0.5 * x;
            if y != 0.0 && (y.sin() / y).powi(2) < (2.0 / PI).powi(2) * (1.0 - 1e-12) {
                r.sinc_lower += 1;
            }
            let m = CMatrix::from_fn(n, n, |_, _| {
                C64::new(
                    rng.sample(rand_distr::StandardNormal),
                    rng.sample(rand_distr::StandardNormal),
                )
            });
            let (hs, op) = (hs_norm(&m), op_norm(&m));
            if hs / (n as f64).sqrt() > op * (1.0 + 1e-12) || op > hs * (1.0 + 1e-12) {
                r.norm_equivalence += 1;
            }
            let g = haar_sample(GroupKind::U, n, &mut rng).expect("valid rank");
            let dist = hs_norm(&(CMatrix::identity(n, n) - g.matrix())).powi(2);
            let lam: f64 = angular_eigenvalues(&g).iter().map(|l| l * l).sum();
            if dist > lam * (1.0 + 1e-10) + 1e-12 {
                r.unitary_distance += 1;
            }
        }
        r
    })?;
    Ok(counts
        .iter()
        .fold(ElementaryReport::default(), |acc, c| ElementaryReport {
            samples: acc.samples + c.samples,
            cosine_lower: acc.cosine_lower + c.cosine_lower,
            sinc_lower: acc.sinc_lower + c.sinc_lower,
            cosine_upper: acc.cosine_upper + c.cosine_upper,
            norm_equivalence: acc.norm_equivalence + c.norm_equivalence,
            unitary_distance: acc.unitary_distance + c.unitary_distance,
        }))
}

/// Real symmetric (real fields) or Hermitian (complex fields) matrix of the
/// Bose action, S = 1/2 phi^dag Q phi.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadraticForm {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

impl QuadraticForm {
    pub fn dim(&self) -> usize {
        match self {
            QuadraticForm::Real(m) => m.nrows(),
            QuadraticForm::Complex(m) => m.nrows(),
        }
    }

    /// min_i (Q_ii - sum_{j != i} |Q_ij|); positive implies positive definite.
    pub fn gershgorin_lower_bound(&self) -> f64 {
        fn bound<T: nalgebra::ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
            (0..m.nrows())
                .map(|i| {
                    let off: f64 = (0..m.ncols())
                        .filter(|&j| j != i)
                        .map(|j| m[(i, j)].clone().modulus())
                        .sum();
                    m[(i, i)].clone().real() - off
                })
                .fold(f64::INFINITY, f64::min)
        }
        match self {
            QuadraticForm::Real(m) => bound(m),
            QuadraticForm::Complex(m) => bound(m),
        }
    }

    /// ln det Q via Cholesky; fails with the offending pivot if Q is not
    /// positive definite.
    pub fn log_det(&self) -> Result<f64> {
        let gersh = self.gershgorin_lower_bound();
        match self {
            QuadraticForm::Real(m) => cholesky_log_det(m, gersh),
            QuadraticForm::Complex(m) => cholesky_log_det(m, gersh),
        }
    }
}

fn cholesky_log_det<T: nalgebra::ComplexField<RealField = f64>>(
    m: &DMatrix<T>,
    gershgorin: f64,
) -> Result<f64> {
    let n = m.nrows();
    let mut l = DMatrix::<T>::zeros(n, n);
    let mut log_det = 0.0;
    for j in 0..n {
        let mut diag = m[(j, j)].clone().real();
        for k in 0..j {
            diag -= l[(j, k)].clone().modulus_squared();
        }
        if !(diag > 0.0) {
            return Err(Error::NotPositiveDefinite {
                pivot: diag,
                row: j,
                gershgorin,
            });
        }
        let ljj = diag.sqrt();
        log_det += 2.0 * ljj.ln();
        l[(j, j)] = T::from_real(ljj);
        for i in j + 1..n {
            let mut s = m[(i, j)].clone();
            for k in 0..j {
                s -= l[(i, k)].clone() * l[(j, k)].clone().conjugate();
            }
            l[(i, j)] = s.unscale(ljj);
        }
    }
    Ok(log_det)
}

/// Assembles Q for the bond configuration.
///
/// Scaled: diagonal 1 and blocks -kappa^2 g (real fields: -kappa^2 Re g) at
/// (x, x+mu), with the adjoint block at (x+mu, x). Unscaled multiplies the
/// whole matrix by s_B^2, which is the same as diagonal s_B^2 and hopping
/// kappa_u^2 a^{d-2}.
pub fn quadratic_form(
    lattice: &Lattice,
    cfg: &GaugeConfig,
    params: &ModelParams,
    scaled: bool,
) -> Result<QuadraticForm> {
    cfg.check(lattice)?;
    let n = cfg.n();
    if n != params.n {
        return Err(Error::LatticeMismatch(format!(
            "links have rank {n}, parameters say N={}",
            params.n
        )));
    }
    let nf = params.n_f;
    let sf = scaling_factors(params);
    let (diag, hop) = if scaled {
        (1.0, sf.kappa_sq)
    } else {
        (
            sf.s_b * sf.s_b,
            params.kappa_u_sq * params.a.powi(params.d as i32 - 2),
        )
    };
    let w = n * nf;
    let dim = lattice.n_sites() * w;
    let mut q = DMatrix::<C64>::identity(dim, dim) * C64::new(diag, 0.0);
    for (b, g) in cfg.links.iter().enumerate() {
        let (x, y) = lattice.endpoints(b);
        for i in 0..n {
            for j in 0..n {
                let gij = match params.field {
                    FieldKind::Real => C64::new(g.matrix()[(i, j)].re, 0.0),
                    FieldKind::Complex => g.matrix()[(i, j)],
                };
                for f in 0..nf {
                    let (r, c) = (x * w + i * nf + f, y * w + j * nf + f);
                    q[(r, c)] -= gij * hop;
                    q[(c, r)] -= gij.conj() * hop;
                }
            }
        }
    }
    Ok(match params.field {
        FieldKind::Real => QuadraticForm::Real(q.map(|z| z.re)),
        FieldKind::Complex => QuadraticForm::Complex(q),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;

    fn lat(d: usize, l: usize) -> Lattice {
        Lattice::new(d, l, Boundary::Free).unwrap()
    }

    #[test]
    fn kappa_at_zero_mass() {
        for d in 1..=4 {
            let p = ModelParams {
                d,
                m_u: 0.0,
                a: 0.3,
                ..Default::default()
            };
            assert!((scaling_factors(&p).kappa_sq - 1.0 / (2.0 * d as f64)).abs() < 1e-15);
        }
    }

    #[test]
    fn single_bond_action_example() {
        // d=1, L=2, U(1), g=1: S = 1/2 (phi1^2 + phi2^2) - kappa^2 phi1 phi2.
        let lattice = lat(1, 2);
        let p = ModelParams {
            d: 1,
            l: 2,
            ..Default::default()
        };
        let k2 = scaling_factors(&p).kappa_sq;
        let cfg = GaugeConfig::identity(&lattice, 1);
        let phi = ScalarField::new(
            FieldKind::Real,
            1,
            1,
            vec![C64::new(0.7, 0.0), C64::new(-1.3, 0.0)],
        )
        .unwrap();
        let s = bose_action(&lattice, &phi, &cfg, &p, true).unwrap();
        assert!((s - (0.5 * (0.49 + 1.69) + k2 * 0.7 * 1.3)).abs() < 1e-14);
    }

    #[test]
    fn action_matches_quadratic_form() {
        let lattice = lat(2, 3);
        for field in [FieldKind::Real, FieldKind::Complex] {
            let p = ModelParams {
                n: 2,
                n_f: 2,
                group: GroupKind::SU,
                field,
                a: 0.5,
                ..Default::default()
            };
            let mut rng = sample_rng(3, 0);
            let cfg = GaugeConfig::random(&lattice, GroupKind::SU, 2, &mut rng).unwrap();
            let phi = ScalarField::random(&lattice, field, 2, 2, &mut rng);
            let q = quadratic_form(&lattice, &cfg, &p, false).unwrap();
            let v = nalgebra::DVector::from_vec(phi.values.clone());
            let quad = match &q {
                QuadraticForm::Real(m) => {
                    0.5 * (v.map(|z| z.re).transpose() * m * v.map(|z| z.re))[(0, 0)]
                }
                QuadraticForm::Complex(m) => 0.5 * (v.adjoint() * m * &v)[(0, 0)].re,
            };
            let s = bose_action(&lattice, &phi, &cfg, &p, false).unwrap();
            assert!((quad - s).abs() < 1e-12 * s.abs().max(1.0));
        }
    }

    #[test]
    fn wilson_action_of_identity_is_zero() {
        let lattice = lat(3, 2);
        let cfg = GaugeConfig::identity(&lattice, 2);
        assert_eq!(
            wilson_action(&lattice, &cfg, &ModelParams::default()).unwrap(),
            0.0
        );
        let other = GaugeConfig::identity(&lat(2, 2), 2);
        assert!(matches!(
            wilson_action(&lattice, &other, &ModelParams::default()),
            Err(Error::LatticeMismatch(_))
        ));
    }

    #[test]
    fn cholesky_reports_pivot() {
        let q = QuadraticForm::Real(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]));
        match q.log_det() {
            Err(Error::NotPositiveDefinite { row, pivot, .. }) => {
                assert_eq!(row, 1);
                assert!((pivot + 3.0).abs() < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn elementary_small_run() {
        let r = elementary_bounds_check(2000, 3, 1, 1).unwrap();
        assert_eq!(r.samples, 2000);
        assert_eq!(r.violations(), 0);
    }
}
