//! Unitary group kernels: validated matrices, the Hermitian Lie basis,
//! exponential and spectral logarithm, norms and Haar sampling.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Default tolerance on ||U^dag U - 1||_HS accepted by [`UnitaryMatrix::new`].
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    U,
    SU,
}

impl GroupKind {
    /// Real dimension of the Lie algebra, d(N).
    pub fn algebra_dim(self, n: usize) -> usize {
        match self {
            GroupKind::U => n * n,
            GroupKind::SU => n * n - 1,
        }
    }

    pub fn label(self, n: usize) -> String {
        match self {
            GroupKind::U => format!("U({n})"),
            GroupKind::SU => format!("SU({n})"),
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::U => "u",
            GroupKind::SU => "su",
        })
    }
}

impl std::str::FromStr for GroupKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "u" => Ok(GroupKind::U),
            "su" => Ok(GroupKind::SU),
            other => Err(invalid(format!(
                "unknown group kind '{other}' (expected u or su)"
            ))),
        }
    }
}

/// Hilbert–Schmidt norm.
pub fn hs_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator norm (largest singular value).
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.len() == 1 {
        return m[(0, 0)].norm();
    }
    m.clone().singular_values().max()
}

/// A square matrix known to be unitary up to [`UNITARITY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    /// Validates unitarity, and for `SU` a unit determinant.
    pub fn new(m: CMatrix, kind: GroupKind) -> Result<Self> {
        Self::with_tolerance(m, kind, UNITARITY_TOL)
    }

    pub fn with_tolerance(m: CMatrix, kind: GroupKind, tol: f64) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(invalid(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let deviation = unitarity_defect(&m);
        if !(deviation <= tol) {
            return Err(Error::NotUnitary {
                deviation,
                tolerance: tol,
            });
        }
        if kind == GroupKind::SU {
            let det = m.determinant();
            if (det - C64::new(1.0, 0.0)).norm() > tol.max(1e-12) * m.nrows() as f64 {
                return Err(invalid(format!(
                    "SU matrix must have unit determinant, got {det}"
                )));
            }
        }
        Ok(Self(m))
    }

    /// Wraps a matrix whose unitarity is guaranteed by construction.
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        Self(m)
    }

    /// Nearest unitary matrix in Hilbert–Schmidt norm (polar factor).
    pub fn repair(m: &CMatrix) -> Result<Self> {
        let svd = m.clone().svd(true, true);
        let (u, vt) = svd
            .u
            .zip(svd.v_t)
            .ok_or_else(|| Error::Linalg("SVD did not return singular vectors".into()))?;
        Ok(Self(u * vt))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn from_phases(phases: &[f64]) -> Self {
        let diag: Vec<C64> = phases.iter().map(|&t| C64::from_polar(1.0, t)).collect();
        Self(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn det(&self) -> C64 {
        self.0.determinant()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn defect(&self) -> f64 {
        unitarity_defect(&self.0)
    }

    /// ||U - V||_HS.
    pub fn distance(&self, other: &Self) -> f64 {
        hs_norm(&(&self.0 - &other.0))
    }
}

impl std::ops::Mul for &UnitaryMatrix {
    type Output = UnitaryMatrix;
    fn mul(self, rhs: Self) -> UnitaryMatrix {
        UnitaryMatrix(&self.0 * &rhs.0)
    }
}

fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    hs_norm(&(m.adjoint() * m - CMatrix::identity(n, n)))
}

/// Orthonormal Hermitian basis with Tr(theta_a theta_b) = delta_ab.
///
/// Off-diagonal pairs (j<k) contribute a symmetric and an antisymmetric
/// element, followed by the N-1 traceless diagonal elements; for `U` the
/// scaled identity 1/sqrt(N) is appended last. For SU(2) this is sigma/sqrt(2).
#[derive(Debug, Clone)]
pub struct LieBasis {
    pub kind: GroupKind,
    pub n: usize,
    pub elements: Vec<CMatrix>,
}

impl LieBasis {
    pub fn new(kind: GroupKind, n: usize) -> Result<Self> {
        if n == 0 || (kind == GroupKind::SU && n < 2) {
            return Err(invalid(format!("no Lie basis for {}", kind.label(n))));
        }
        let s = 1.0 / 2f64.sqrt();
        let mut elements = Vec::with_capacity(kind.algebra_dim(n));
        for j in 0..n {
            for k in j + 1..n {
                let mut sym = CMatrix::zeros(n, n);
                sym[(j, k)] = C64::new(s, 0.0);
                sym[(k, j)] = C64::new(s, 0.0);
                let mut anti = CMatrix::zeros(n, n);
                anti[(j, k)] = C64::new(0.0, -s);
                anti[(k, j)] = C64::new(0.0, s);
                elements.push(sym);
                elements.push(anti);
            }
        }
        for l in 1..n {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut h = CMatrix::zeros(n, n);
            for j in 0..l {
                h[(j, j)] = C64::new(norm, 0.0);
            }
            h[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
            elements.push(h);
        }
        if kind == GroupKind::U {
            elements.push(CMatrix::identity(n, n) * C64::new(1.0 / (n as f64).sqrt(), 0.0));
        }
        Ok(Self { kind, n, elements })
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// sum_a x_a theta_a.
    pub fn combine(&self, coeffs: &[f64]) -> Result<CMatrix> {
        if coeffs.len() != self.dim() {
            return Err(invalid(format!(
                "expected {} coefficients, got {}",
                self.dim(),
                coeffs.len()
            )));
        }
        let mut m = CMatrix::zeros(self.n, self.n);
        for (c, e) in coeffs.iter().zip(&self.elements) {
            m += e * C64::new(*c, 0.0);
        }
        Ok(m)
    }

    /// Coefficients x_a = Tr(X theta_a) of a Hermitian matrix.
    pub fn coefficients(&self, x: &CMatrix) -> Vec<f64> {
        self.elements.iter().map(|e| (x * e).trace().re).collect()
    }
}

/// Element X = sum_a x_a theta_a of the Lie algebra, stored by coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraElement {
    pub kind: GroupKind,
    pub n: usize,
    pub coeffs: Vec<f64>,
}

impl LieAlgebraElement {
    pub fn new(kind: GroupKind, n: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != kind.algebra_dim(n) {
            return Err(invalid(format!(
                "{} algebra has dimension {}, got {} coefficients",
                kind.label(n),
                kind.algebra_dim(n),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("Lie algebra coefficients must be finite"));
        }
        Ok(Self { kind, n, coeffs })
    }

    /// Projects a Hermitian matrix onto the algebra of `kind`.
    pub fn from_hermitian(x: &CMatrix, kind: GroupKind) -> Result<Self> {
        let basis = LieBasis::new(kind, x.nrows())?;
        Ok(Self {
            kind,
            n: x.nrows(),
            coeffs: basis.coefficients(x),
        })
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        LieBasis::new(self.kind, self.n)?.combine(&self.coeffs)
    }

    /// |x|^2 = sum_a x_a^2 = Tr X^2.
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

/// e^{iX} for Hermitian X, via the Hermitian eigendecomposition.
pub fn exp_hermitian(x: &CMatrix) -> Result<UnitaryMatrix> {
    let n = x.nrows();
    if !x.is_square() || n == 0 {
        return Err(invalid("exp_map needs a non-empty square matrix"));
    }
    let herm_defect = hs_norm(&(x - x.adjoint()));
    if herm_defect > 1e-10 * (1.0 + hs_norm(x)) {
        return Err(invalid(format!(
            "generator is not Hermitian (defect {herm_defect:.3e})"
        )));
    }
    if n == 1 {
        return Ok(UnitaryMatrix(CMatrix::from_element(
            1,
            1,
            C64::from_polar(1.0, x[(0, 0)].re),
        )));
    }
    let sym = (x + x.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let v = eig.eigenvectors;
    let phases: Vec<C64> = eig
        .eigenvalues
        .iter()
        .map(|&l| C64::from_polar(1.0, l))
        .collect();
    let mut vd = v.clone();
    for (j, p) in phases.iter().enumerate() {
        let mut col = vd.column_mut(j);
        col *= *p;
    }
    Ok(UnitaryMatrix(vd * v.adjoint()))
}

/// e^{iX} for X = sum x_a theta_a.
pub fn exp_map(x: &LieAlgebraElement) -> Result<UnitaryMatrix> {
    exp_hermitian(&x.to_matrix()?)
}

/// Maps an angle into (-pi, pi], sending -pi to +pi.
pub fn wrap_angle(t: f64) -> f64 {
    let mut r = t.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    if r <= -PI + 1e-12 {
        r += 2.0 * PI;
    }
    r
}

/// Eigenphases lambda_j in (-pi, pi], sorted descending.
///
/// Closed forms for N <= 2, Schur decomposition otherwise. An eigenvalue at
/// -1 is reported as +pi.
pub fn angular_eigenvalues(u: &UnitaryMatrix) -> Vec<f64> {
    let m = &u.0;
    let mut phases = match m.nrows() {
        1 => vec![wrap_angle(m[(0, 0)].arg())],
        2 => two_by_two_phases(m).to_vec(),
        _ => {
            let (_, t) = m.clone().schur().unpack();
            (0..t.nrows())
                .map(|i| wrap_angle(t[(i, i)].arg()))
                .collect()
        }
    };
    phases.sort_by(|a, b| b.total_cmp(a));
    phases
}

/// Writes a 2x2 unitary as e^{i phi} (a + i b.sigma) and reads off phases
/// phi +- atan2(|b|, a); stable for nearly degenerate spectra.
fn two_by_two_phases(m: &CMatrix) -> [f64; 2] {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let phi = 0.5 * det.arg();
    let rot = C64::from_polar(1.0, -phi);
    let v00 = m[(0, 0)] * rot;
    let v11 = m[(1, 1)] * rot;
    let v01 = m[(0, 1)] * rot;
    let v10 = m[(1, 0)] * rot;
    let a = 0.5 * (v00 + v11).re;
    let b3 = 0.5 * (v00 - v11).im;
    let off = 0.5 * (v01 - v10.conj());
    let b = (b3 * b3 + off.norm_sqr()).sqrt();
    let theta = b.atan2(a);
    [wrap_angle(phi + theta), wrap_angle(phi - theta)]
}

/// Spectral logarithm X = V diag(lambda) V^dag with lambda in (-pi, pi].
///
/// The result is expressed in the U(N) basis: for an SU(N) input whose
/// eigenphases hit the cut, Tr X may be a nonzero multiple of 2pi. X does not
/// depend on the choice of eigenvectors inside degenerate eigenspaces.
pub fn log_map_spectral(u: &UnitaryMatrix) -> Result<LieAlgebraElement> {
    let deviation = u.defect();
    if deviation > UNITARITY_TOL {
        return Err(Error::NotUnitary {
            deviation,
            tolerance: UNITARITY_TOL,
        });
    }
    let n = u.n();
    let x = if n == 1 {
        CMatrix::from_element(1, 1, C64::new(wrap_angle(u.0[(0, 0)].arg()), 0.0))
    } else {
        let (q, t) = u.0.clone().schur().unpack();
        let lambdas: Vec<C64> = (0..n)
            .map(|i| C64::new(wrap_angle(t[(i, i)].arg()), 0.0))
            .collect();
        let mut ql = q.clone();
        for (j, l) in lambdas.iter().enumerate() {
            let mut col = ql.column_mut(j);
            col *= *l;
        }
        let x = ql * q.adjoint();
        (&x + x.adjoint()) * C64::new(0.5, 0.0)
    };
    LieAlgebraElement::from_hermitian(&x, GroupKind::U)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-distributed element of U(N) or SU(N).
///
/// Gram–Schmidt on the columns of a complex Ginibre matrix gives the Q factor
/// with positive diagonal R, which is Haar on U(N). For SU(N) the first row
/// is multiplied by the conjugate determinant phase; right invariance is
/// preserved, so the result is Haar on SU(N).
pub fn haar_sample<R: Rng + ?Sized>(
    kind: GroupKind,
    n: usize,
    rng: &mut R,
) -> Result<UnitaryMatrix> {
    if n == 0 || (kind == GroupKind::SU && n < 2) {
        return Err(invalid(format!("cannot sample {}", kind.label(n))));
    }
    if n == 1 {
        let t = rng.random_range(-PI..PI);
        return Ok(UnitaryMatrix(CMatrix::from_element(
            1,
            1,
            C64::from_polar(1.0, t),
        )));
    }
    let mut q = CMatrix::from_fn(n, n, |_, _| complex_normal(rng));
    for j in 0..n {
        for k in 0..j {
            let proj: C64 = (0..n).map(|i| q[(i, k)].conj() * q[(i, j)]).sum();
            for i in 0..n {
                let qik = q[(i, k)];
                q[(i, j)] -= proj * qik;
            }
        }
        let norm = (0..n).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            q[(i, j)] /= norm;
        }
    }
    if kind == GroupKind::SU {
        let det = q.determinant();
        let phase = C64::from_polar(1.0, -det.arg());
        for j in 0..n {
            q[(0, j)] *= phase;
        }
    }
    Ok(UnitaryMatrix(q))
}

/// Haar-distributed real orthogonal matrix, used for gauge lists of real
/// Bose chains.
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let mut q = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    for j in 0..n {
        for k in 0..j {
            let proj = q.column(k).dot(&q.column(j));
            let ck = q.column(k).clone_owned();
            q.column_mut(j).axpy(-proj, &ck, 1.0);
        }
        let norm = q.column(j).norm();
        q.column_mut(j).unscale_mut(norm);
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::sample_rng;

    #[test]
    fn basis_is_orthonormal() {
        for (kind, n) in [
            (GroupKind::U, 1),
            (GroupKind::U, 3),
            (GroupKind::SU, 2),
            (GroupKind::SU, 3),
        ] {
            let b = LieBasis::new(kind, n).unwrap();
            assert_eq!(b.dim(), kind.algebra_dim(n));
            for (i, x) in b.elements.iter().enumerate() {
                assert!(hs_norm(&(x - x.adjoint())) < 1e-15);
                for (j, y) in b.elements.iter().enumerate() {
                    let t = (x * y).trace();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((t.re - expect).abs() < 1e-14 && t.im.abs() < 1e-14);
                }
            }
        }
        assert!(LieBasis::new(GroupKind::SU, 1).is_err());
    }

    #[test]
    fn su2_basis_is_scaled_pauli() {
        let b = LieBasis::new(GroupKind::SU, 2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((b.elements[0][(0, 1)] - C64::new(s, 0.0)).norm() < 1e-15);
        assert!((b.elements[1][(1, 0)] - C64::new(0.0, s)).norm() < 1e-15);
        assert!((b.elements[2][(1, 1)] - C64::new(-s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn wrap_angle_boundary() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn minus_identity_has_phases_pi() {
        let m = UnitaryMatrix::new(-CMatrix::identity(3, 3), GroupKind::U).unwrap();
        assert!(angular_eigenvalues(&m)
            .iter()
            .all(|&l| (l - PI).abs() < 1e-12));
        let two = UnitaryMatrix::new(-CMatrix::identity(2, 2), GroupKind::U).unwrap();
        assert!(angular_eigenvalues(&two)
            .iter()
            .all(|&l| (l - PI).abs() < 1e-12));
        let x = log_map_spectral(&two).unwrap();
        assert!((x.norm_sqr() - 2.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_unitary() {
        let m = CMatrix::identity(2, 2) * C64::new(1.1, 0.0);
        assert!(matches!(
            UnitaryMatrix::new(m.clone(), GroupKind::U),
            Err(Error::NotUnitary { .. })
        ));
        let fixed = UnitaryMatrix::repair(&m).unwrap();
        assert!(fixed.defect() < 1e-14);
        let diag = UnitaryMatrix::from_phases(&[0.3, 0.2]);
        assert!(UnitaryMatrix::new(diag.into_matrix(), GroupKind::SU).is_err());
    }

    #[test]
    fn log_exp_roundtrip_random() {
        for i in 0..50 {
            let mut rng = sample_rng(5, i);
            let u = haar_sample(GroupKind::U, 3, &mut rng).unwrap();
            let x = log_map_spectral(&u).unwrap();
            let back = exp_map(&x).unwrap();
            assert!(u.distance(&back) < 1e-11);
            let phases = angular_eigenvalues(&u);
            let norm: f64 = phases.iter().map(|l| l * l).sum();
            assert!((norm - x.norm_sqr()).abs() < 1e-10);
        }
    }

    #[test]
    fn two_by_two_phases_match_schur() {
        for i in 0..50 {
            let mut rng = sample_rng(9, i);
            let u = haar_sample(GroupKind::U, 2, &mut rng).unwrap();
            let (_, t) = u.matrix().clone().schur().unpack();
            let mut schur: Vec<f64> = (0..2).map(|i| wrap_angle(t[(i, i)].arg())).collect();
            schur.sort_by(|a, b| b.total_cmp(a));
            let fast = angular_eigenvalues(&u);
            for (a, b) in schur.iter().zip(&fast) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn haar_samples_are_in_group() {
        let mut rng = sample_rng(1, 0);
        for (kind, n) in [
            (GroupKind::U, 1),
            (GroupKind::U, 4),
            (GroupKind::SU, 2),
            (GroupKind::SU, 3),
        ] {
            let u = haar_sample(kind, n, &mut rng).unwrap();
            assert!(u.defect() < 1e-13);
            if kind == GroupKind::SU {
                assert!((u.det() - C64::new(1.0, 0.0)).norm() < 1e-13);
            }
        }
        let o = haar_orthogonal(3, &mut rng);
        assert!((o.transpose() * &o - DMatrix::<f64>::identity(3, 3)).norm() < 1e-13);
    }

    #[test]
    fn norm_equivalence_example() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(3.0, 0.0),
            C64::new(0.0, 4.0),
        ]));
        assert!((op_norm(&m) - 4.0).abs() < 1e-14);
        assert!((hs_norm(&m) - 5.0).abs() < 1e-14);
    }
}
