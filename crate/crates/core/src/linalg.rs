//! Complex matrix helpers: float routines on top of nalgebra and a small
//! exact matrix over the Gaussian rationals.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::exact::{self, Rational};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type QComplex = Complex<Rational>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn projector(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Largest absolute eigenvalue; the operator norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    hermitian_eigen(m).eigenvalues.amax()
}

/// Eigen-decomposition of the Hermitian part, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> SymmetricEigen<C64, nalgebra::Dyn> {
    let h = (m + m.adjoint()) * real(0.5);
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = DVector::from_fn(n, |k, _| eig.eigenvalues[order[k]]);
    let eigenvectors = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    SymmetricEigen {
        eigenvalues,
        eigenvectors,
    }
}

pub fn max_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).eigenvalues.max()
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).iter().all(|z| z.norm() <= tol)
}

pub fn is_projection(m: &CMat, tol: f64) -> bool {
    is_hermitian(m, tol) && (m * m - m).iter().all(|z| z.norm() <= tol)
}

/// Eigenvalues of `m` that exceed `tol`.
pub fn numeric_rank(m: &CMat, tol: f64) -> usize {
    hermitian_eigen(m).eigenvalues.iter().filter(|&&l| l > tol).count()
}

pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.dotc(b)
}

/// `|⟨a|b⟩|²` for normalized vectors.
pub fn fidelity(a: &CVec, b: &CVec) -> f64 {
    inner(a, b).norm_sqr()
}

/// Singular values of the `d1 × d2` coefficient matrix of a bipartite
/// vector, descending.
pub fn schmidt_coefficients(v: &CVec, d1: usize, d2: usize) -> Vec<f64> {
    let m = CMat::from_fn(d1, d2, |i, j| v[i * d2 + j]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Frobenius norm of `a − b`.
pub fn distance(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm()
}

/// Exact square matrix over `Q[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    n: usize,
    data: Vec<QComplex>,
}

pub fn qc(re: Rational, im: Rational) -> QComplex {
    Complex::new(re, im)
}

pub fn qreal(re: Rational) -> QComplex {
    Complex::new(re, Rational::zero())
}

impl QMatrix {
    pub fn zeros(n: usize) -> Self {
        QMatrix {
            n,
            data: vec![qreal(Rational::zero()); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = qreal(Rational::one());
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> QComplex) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        QMatrix { n, data }
    }

    /// `v v†` for an exact vector.
    pub fn outer(v: &[QComplex]) -> Self {
        Self::from_fn(v.len(), |i, j| &v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &QComplex {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: QComplex) {
        self.data[i * self.n + j] = v;
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        QMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        QMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> QMatrix {
        QMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * qreal(s.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        let n = self.n;
        Self::from_fn(n, |i, j| {
            (0..n).fold(qreal(Rational::zero()), |acc, k| {
                let a = self.get(i, k);
                let b = other.get(k, j);
                if a.is_zero() || b.is_zero() {
                    acc
                } else {
                    acc + a * b
                }
            })
        })
    }

    pub fn adjoint(&self) -> QMatrix {
        Self::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> QComplex {
        (0..self.n).fold(qreal(Rational::zero()), |acc, i| acc + self.get(i, i))
    }

    pub fn kron(&self, other: &QMatrix) -> QMatrix {
        let (n, m) = (self.n, other.n);
        Self::from_fn(n * m, |i, j| self.get(i / m, j / m) * other.get(i % m, j % m))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Real part of `Tr(self · other)`.
    pub fn trace_product(&self, other: &QMatrix) -> Rational {
        let n = self.n;
        let mut acc = Rational::zero();
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                let b = other.get(k, i);
                if !a.is_zero() && !b.is_zero() {
                    acc += (a * b).re;
                }
            }
        }
        acc
    }

    pub fn to_f64(&self) -> CMat {
        CMat::from_fn(self.n, self.n, |i, j| {
            let z = self.get(i, j);
            c(exact::to_f64(&z.re), exact::to_f64(&z.im))
        })
    }

    /// `Tr_{first}` of a matrix on `C^{d1} ⊗ C^{d2}`.
    pub fn trace_out_first(&self, d1: usize) -> QMatrix {
        let d2 = self.n / d1;
        Self::from_fn(d2, |i, j| {
            (0..d1).fold(qreal(Rational::zero()), |acc, k| acc + self.get(k * d2 + i, k * d2 + j))
        })
    }
}

/// `Tr_{first}` of a matrix on `C^{d1} ⊗ C^{d2}`.
pub fn trace_out_first(m: &CMat, d1: usize) -> CMat {
    let d2 = m.nrows() / d1;
    CMat::from_fn(d2, d2, |i, j| (0..d1).map(|k| m[(k * d2 + i, k * d2 + j)]).sum())
}

/// `Tr_{second}` of a matrix on `C^{d1} ⊗ C^{d2}`.
pub fn trace_out_second(m: &CMat, d1: usize) -> CMat {
    let d2 = m.nrows() / d1;
    CMat::from_fn(d1, d1, |i, j| (0..d2).map(|k| m[(i * d2 + k, j * d2 + k)]).sum())
}
