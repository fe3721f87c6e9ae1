//! Finite-dimensional linear operators `A(t, v)` acting on discretized states.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::state::StateVector;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tridiagonal matrix stored by diagonals; `lower[j]` is entry (j+1, j), `upper[j]` is (j, j+1).
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<Complex64>,
    pub diag: Vec<Complex64>,
    pub upper: Vec<Complex64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<Complex64>, diag: Vec<Complex64>, upper: Vec<Complex64>) -> Self {
        assert!(!diag.is_empty());
        assert_eq!(lower.len() + 1, diag.len());
        assert_eq!(upper.len() + 1, diag.len());
        Self { lower, diag, upper }
    }

    pub fn diagonal(diag: Vec<Complex64>) -> Self {
        let n = diag.len();
        Self::new(vec![ZERO; n - 1], diag, vec![ZERO; n - 1])
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &StateVector) -> StateVector {
        let n = self.dim();
        let mut y = StateVector::zeros(n);
        for j in 0..n {
            let mut acc = self.diag[j] * x[j];
            if j > 0 {
                acc += self.lower[j - 1] * x[j - 1];
            }
            if j + 1 < n {
                acc += self.upper[j] * x[j + 1];
            }
            y[j] = acc;
        }
        y
    }

    /// Thomas elimination; `None` when a pivot vanishes.
    fn solve(&self, rhs: &StateVector) -> Option<StateVector> {
        let n = self.dim();
        let scale = self.diag.iter().map(|d| d.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut c = vec![ZERO; n];
        let mut d = vec![ZERO; n];
        let mut pivot = self.diag[0];
        if pivot.norm() <= 1e-14 * scale {
            return None;
        }
        d[0] = rhs[0] / pivot;
        for j in 1..n {
            c[j - 1] = self.upper[j - 1] / pivot;
            pivot = self.diag[j] - self.lower[j - 1] * c[j - 1];
            if pivot.norm() <= 1e-14 * scale {
                return None;
            }
            d[j] = (rhs[j] - self.lower[j - 1] * d[j - 1]) / pivot;
        }
        for j in (0..n - 1).rev() {
            let next = d[j + 1];
            d[j] -= c[j] * next;
        }
        let x = StateVector::from_vec(d);
        x.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Tridiagonal(Tridiagonal),
    Dense(DMatrix<Complex64>),
}

impl Operator {
    pub fn dim(&self) -> usize {
        match self {
            Operator::Tridiagonal(t) => t.dim(),
            Operator::Dense(m) => m.nrows(),
        }
    }

    pub fn apply(&self, x: &StateVector) -> StateVector {
        match self {
            Operator::Tridiagonal(t) => t.apply(x),
            Operator::Dense(m) => m * x,
        }
    }

    /// Conjugate transpose, the adjoint under a uniformly weighted inner product.
    pub fn adjoint(&self) -> Operator {
        match self {
            Operator::Tridiagonal(t) => Operator::Tridiagonal(Tridiagonal {
                lower: t.upper.iter().map(|z| z.conj()).collect(),
                diag: t.diag.iter().map(|z| z.conj()).collect(),
                upper: t.lower.iter().map(|z| z.conj()).collect(),
            }),
            Operator::Dense(m) => Operator::Dense(m.adjoint()),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match self {
            Operator::Dense(m) => m.clone(),
            Operator::Tridiagonal(t) => {
                let n = t.dim();
                let mut m = DMatrix::from_element(n, n, ZERO);
                for j in 0..n {
                    m[(j, j)] = t.diag[j];
                    if j + 1 < n {
                        m[(j + 1, j)] = t.lower[j];
                        m[(j, j + 1)] = t.upper[j];
                    }
                }
                m
            }
        }
    }

    /// `a·self + b·other`; tridiagonal structure is kept when both operands have it.
    pub fn combine(&self, a: Complex64, other: &Operator, b: Complex64) -> Operator {
        assert_eq!(self.dim(), other.dim());
        match (self, other) {
            (Operator::Tridiagonal(x), Operator::Tridiagonal(y)) => {
                let mix = |p: &[Complex64], q: &[Complex64]| -> Vec<Complex64> {
                    p.iter().zip(q).map(|(p, q)| a * p + b * q).collect()
                };
                Operator::Tridiagonal(Tridiagonal {
                    lower: mix(&x.lower, &y.lower),
                    diag: mix(&x.diag, &y.diag),
                    upper: mix(&x.upper, &y.upper),
                })
            }
            _ => Operator::Dense(self.to_dense() * a + other.to_dense() * b),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Operator {
        match self {
            Operator::Tridiagonal(t) => Operator::Tridiagonal(Tridiagonal {
                lower: t.lower.iter().map(|z| c * z).collect(),
                diag: t.diag.iter().map(|z| c * z).collect(),
                upper: t.upper.iter().map(|z| c * z).collect(),
            }),
            Operator::Dense(m) => Operator::Dense(m * c),
        }
    }

    /// `I + c·self`.
    pub fn identity_plus(&self, c: Complex64) -> Operator {
        let mut out = self.scaled(c);
        match &mut out {
            Operator::Tridiagonal(t) => t.diag.iter_mut().for_each(|d| *d += ONE),
            Operator::Dense(m) => {
                for j in 0..m.nrows() {
                    m[(j, j)] += ONE;
                }
            }
        }
        out
    }

    /// Solves `self · x = rhs`; `None` for a singular or ill-posed system.
    pub fn solve(&self, rhs: &StateVector) -> Option<StateVector> {
        match self {
            Operator::Tridiagonal(t) => t.solve(rhs),
            Operator::Dense(m) => m.clone().lu().solve(rhs),
        }
    }
}
