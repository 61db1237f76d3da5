//! Dense complex linear algebra for one- and two-qubit unitaries.
//!
//! Matrices here are at most 4x4, so everything is stored as a flat
//! row-major `Vec` and multiplied naively.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a square.
    pub fn from_row_major(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(Self { dim, data: entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_of_product(&self, other: &CMatrix) -> C64 {
        let n = self.dim;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry of `|U†U - I|`.
    pub fn unitarity_error(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    fn check_same_dim(&self, other: &CMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// A matrix verified to be Hermitian to within 1e-12 entrywise.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let err = m.hermiticity_error();
        if !(err <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian(err));
        }
        Ok(Self(m))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    /// Real linear combination `sum_k c_k H_k`; stays Hermitian.
    pub fn linear_combination<'a>(
        dim: usize,
        terms: impl IntoIterator<Item = (f64, &'a HermitianMatrix)>,
    ) -> Self {
        let mut out = CMatrix::zeros(dim);
        for (c, h) in terms {
            if c == 0.0 {
                continue;
            }
            for (o, &v) in out.data.iter_mut().zip(&h.0.data) {
                *o += v * c;
            }
        }
        Self(out)
    }

    /// Eigenvalues (ascending order not guaranteed) and unitary eigenvector
    /// matrix `V` with `H = V diag(λ) V†`.
    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        jacobi_eigh(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli(axis: Axis) -> CMatrix {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let entries = match axis {
        Axis::X => vec![o, one, one, o],
        Axis::Y => vec![o, -i, i, o],
        Axis::Z => vec![one, o, o, -one],
    };
    CMatrix { dim: 2, data: entries }
}

pub fn kron2(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    for m in [a, b] {
        if m.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: m.dim,
            });
        }
    }
    let mut out = CMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// `exp(-i s H)` by eigendecomposition.
pub fn expm_hermitian(h: &HermitianMatrix, s: f64) -> CMatrix {
    let (evals, v) = h.eigh();
    let phases: Vec<C64> = evals.iter().map(|&l| C64::from_polar(1.0, -s * l)).collect();
    reassemble(&v, &phases)
}

/// `V diag(d) V†`.
pub(crate) fn reassemble(v: &CMatrix, d: &[C64]) -> CMatrix {
    let n = v.dim;
    let mut out = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for (m, &dm) in d.iter().enumerate() {
                acc += v[(i, m)] * dm * v[(j, m)].conj();
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// `1 - |Tr(U†V)|² / h²`, clamped to `[0, 1]`.
pub fn gate_infidelity(u: &CMatrix, v: &CMatrix, h: usize) -> Result<f64> {
    u.check_same_dim(v)?;
    if u.dim != h {
        return Err(Error::DimensionMismatch {
            expected: h,
            got: u.dim,
        });
    }
    let overlap = u.adjoint().trace_of_product(v);
    let f = overlap.norm_sqr() / (h * h) as f64;
    Ok((1.0 - f).clamp(0.0, 1.0))
}

/// Cyclic complex Jacobi diagonalization of a Hermitian matrix.
fn jacobi_eigh(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.dim;
    let mut a = h.clone();
    let mut v = CMatrix::identity(n);
    // Symmetrize away rounding noise on the diagonal.
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }

    let scale: f64 = a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }

    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let r = b.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = b / r; // e^{iφ}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // J mixes columns p and q:
                //   J_pp = c, J_pq = s, J_qp = -s e^{-iφ}, J_qq = c e^{-iφ}
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }
    let evals = (0..n).map(|i| a[(i, i)].re).collect();
    (evals, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn herm(m: CMatrix) -> HermitianMatrix {
        HermitianMatrix::new(m).unwrap()
    }

    fn xx() -> CMatrix {
        kron2(&pauli(Axis::X), &pauli(Axis::X)).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pauli_basics() {
        assert_eq!(pauli(Axis::Z), CMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]));
        let x = pauli(Axis::X);
        assert_eq!(&x * &x, CMatrix::identity(2));
        assert_eq!(pauli(Axis::Y).trace(), c(0.0, 0.0));
        for a in [Axis::X, Axis::Y, Axis::Z] {
            let p = pauli(a);
            assert_eq!(p.hermiticity_error(), 0.0);
            assert_eq!(p.unitarity_error(), 0.0);
        }
    }

    #[test]
    fn kron_products() {
        let i2 = CMatrix::identity(2);
        let x = pauli(Axis::X);
        assert_eq!(kron2(&i2, &i2).unwrap(), CMatrix::identity(4));
        let lhs = &kron2(&x, &i2).unwrap() * &kron2(&i2, &x).unwrap();
        assert_eq!(lhs, xx());
        let zz = kron2(&pauli(Axis::Z), &pauli(Axis::Z)).unwrap();
        let one = c(1.0, 0.0);
        assert_eq!(zz, CMatrix::diag(&[one, -one, -one, one]));
        assert!(matches!(
            kron2(&i2, &CMatrix::identity(4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expm_known_values() {
        let zero = HermitianMatrix::zeros(4);
        assert!(expm_hermitian(&zero, 1.3).max_abs_diff(&CMatrix::identity(4)) < 1e-15);

        let u = expm_hermitian(&herm(pauli(Axis::Z)), PI / 2.0);
        let want = CMatrix::diag(&[C64::from_polar(1.0, -PI / 2.0), C64::from_polar(1.0, PI / 2.0)]);
        assert!(u.max_abs_diff(&want) < 1e-14);

        // exp(-iθXX) = cosθ I - i sinθ XX, θ = π gives -I.
        let u = expm_hermitian(&herm(xx()), PI);
        assert!(u.max_abs_diff(&CMatrix::identity(4).scale(c(-1.0, 0.0))) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::zeros(2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn infidelity_values() {
        let i4 = CMatrix::identity(4);
        assert_eq!(gate_infidelity(&i4, &i4, 4).unwrap(), 0.0);
        // Tr = 4 cos(π/4) = 2√2, infidelity 1 - 8/16.
        let u = expm_hermitian(&herm(xx()), PI / 4.0);
        assert!((gate_infidelity(&i4, &u, 4).unwrap() - 0.5).abs() < 1e-14);
        assert!(gate_infidelity(&i4, &CMatrix::identity(2), 4).is_err());
        assert!(gate_infidelity(&i4, &i4, 2).is_err());
    }

    #[test]
    fn eigh_handles_degenerate_spectrum() {
        let i4 = herm(CMatrix::identity(4));
        let (evals, v) = i4.eigh();
        assert!(evals.iter().all(|&l| (l - 1.0).abs() < 1e-15));
        assert!(v.unitarity_error() < 1e-15);
        let zz = herm(kron2(&pauli(Axis::Z), &pauli(Axis::Z)).unwrap());
        let (evals, _) = zz.eigh();
        let mut sorted = evals.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(sorted, vec![-1.0, -1.0, 1.0, 1.0]);
    }

    fn hermitian_strategy(dim: usize) -> impl Strategy<Value = HermitianMatrix> {
        proptest::collection::vec(-2.0f64..2.0, dim * dim).prop_map(move |vals| {
            let mut m = CMatrix::zeros(dim);
            for i in 0..dim {
                m[(i, i)] = c(vals[i * dim + i], 0.0);
                for j in (i + 1)..dim {
                    let z = c(vals[i * dim + j], vals[j * dim + i]);
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                }
            }
            HermitianMatrix::new(m).unwrap()
        })
    }

    fn unitary_strategy(dim: usize) -> impl Strategy<Value = CMatrix> {
        (hermitian_strategy(dim), -3.0f64..3.0).prop_map(|(h, s)| expm_hermitian(&h, s))
    }

    proptest! {
        #[test]
        fn expm_is_unitary(h in hermitian_strategy(4), s in -4.0f64..4.0) {
            prop_assert!(expm_hermitian(&h, s).unitarity_error() < 1e-10);
        }

        #[test]
        fn eigh_reconstructs(h in hermitian_strategy(4)) {
            let (evals, v) = h.eigh();
            let d: Vec<C64> = evals.iter().map(|&l| c(l, 0.0)).collect();
            prop_assert!(reassemble(&v, &d).max_abs_diff(h.matrix()) < 1e-12);
        }

        #[test]
        fn expm_group_law(h in hermitian_strategy(4), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let lhs = expm_hermitian(&h, a + b);
            let rhs = &expm_hermitian(&h, a) * &expm_hermitian(&h, b);
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
        }

        #[test]
        fn infidelity_self_and_symmetric(u in unitary_strategy(4), v in unitary_strategy(4), phi in 0.0f64..6.3) {
            prop_assert!(gate_infidelity(&u, &u, 4).unwrap() < 1e-14);
            let phased = u.scale(C64::from_polar(1.0, phi));
            prop_assert!(gate_infidelity(&u, &phased, 4).unwrap() < 1e-14);
            let f = gate_infidelity(&u, &v, 4).unwrap();
            let g = gate_infidelity(&v, &u, 4).unwrap();
            prop_assert!((f - g).abs() < 1e-14);
        }
    }
}
