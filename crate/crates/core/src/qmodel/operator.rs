use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::Zero;

use crate::scalar::Real;

/// Column vector on the four-dimensional single-particle space.
pub type Ket<T> = [Complex<T>; 4];

/// `⟨a|b⟩`.
pub fn inner<T: Real>(a: &Ket<T>, b: &Ket<T>) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm<T: Real>(a: &Ket<T>) -> T {
    a.iter().fold(T::zero(), |acc, x| acc + x.norm_sqr()).sqrt()
}

pub fn scale_ket<T: Real>(a: &Ket<T>, z: Complex<T>) -> Ket<T> {
    [a[0] * z, a[1] * z, a[2] * z, a[3] * z]
}

/// Dense 4×4 complex matrix in the basis `|L↑⟩, |L↓⟩, |R↑⟩, |R↓⟩`.
#[derive(Clone, Copy, PartialEq)]
pub struct Operator4<T> {
    pub entries: [[Complex<T>; 4]; 4],
}

impl<T: Real> Operator4<T> {
    pub fn zero() -> Self {
        Self {
            entries: [[Complex::zero(); 4]; 4],
        }
    }

    pub fn identity() -> Self {
        Self::from_diagonal([T::one(); 4])
    }

    pub fn from_diagonal(d: [T; 4]) -> Self {
        let mut m = Self::zero();
        for (k, v) in d.into_iter().enumerate() {
            m.entries[k][k] = Complex::new(v, T::zero());
        }
        m
    }

    pub fn from_complex_diagonal(d: [Complex<T>; 4]) -> Self {
        let mut m = Self::zero();
        for (k, v) in d.into_iter().enumerate() {
            m.entries[k][k] = v;
        }
        m
    }

    /// Builds the matrix whose k-th column is `columns[k]`.
    pub fn from_columns(columns: &[Ket<T>; 4]) -> Self {
        let mut m = Self::zero();
        for (k, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.entries[i][k] = *v;
            }
        }
        m
    }

    pub fn column(&self, k: usize) -> Ket<T> {
        [
            self.entries[0][k],
            self.entries[1][k],
            self.entries[2][k],
            self.entries[3][k],
        ]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.entries[i][j] = self.entries[j][i].conj();
            }
        }
        m
    }

    pub fn scale(&self, z: Complex<T>) -> Self {
        let mut m = *self;
        m.entries.iter_mut().flatten().for_each(|x| *x *= z);
        m
    }

    pub fn scale_real(&self, x: T) -> Self {
        self.scale(Complex::new(x, T::zero()))
    }

    pub fn apply(&self, v: &Ket<T>) -> Ket<T> {
        let mut out = [Complex::zero(); 4];
        for (i, row) in self.entries.iter().enumerate() {
            out[i] = row
                .iter()
                .zip(v)
                .fold(Complex::zero(), |acc, (a, b)| acc + a * b);
        }
        out
    }

    /// `⟨v|A|v⟩`.
    pub fn expectation(&self, v: &Ket<T>) -> Complex<T> {
        inner(v, &self.apply(v))
    }

    pub fn trace(&self) -> Complex<T> {
        (0..4).fold(Complex::zero(), |acc, k| acc + self.entries[k][k])
    }

    pub fn max_abs(&self) -> T {
        self.entries
            .iter()
            .flatten()
            .fold(T::zero(), |acc, x| acc.max(x.norm_sqr()))
            .sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        (*self - *other).max_abs()
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries
            .iter()
            .flatten()
            .fold(T::zero(), |acc, x| acc + x.norm_sqr())
            .sqrt()
    }

    /// `max |A - A†|`.
    pub fn hermiticity_deviation(&self) -> T {
        self.max_abs_diff(&self.adjoint())
    }

    /// Hermitian to within `1e-12 · max|A|` (or the scalar's precision floor).
    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_deviation() <= T::floor_tol(1e-12) * self.max_abs()
    }

    /// `max |U†U - 1|`.
    pub fn unitarity_deviation(&self) -> T {
        (self.adjoint() * *self - Self::identity()).max_abs()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }
}

impl<T> Index<(usize, usize)> for Operator4<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.entries[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Operator4<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.entries[i][j]
    }
}

impl<T: Real> Add for Operator4<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.entries.iter_mut().flatten().zip(rhs.entries.iter().flatten()) {
            *a += b;
        }
        self
    }
}

impl<T: Real> Sub for Operator4<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.entries.iter_mut().flatten().zip(rhs.entries.iter().flatten()) {
            *a -= b;
        }
        self
    }
}

impl<T: Real> Neg for Operator4<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_real(-T::one())
    }
}

impl<T: Real> Mul for Operator4<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = Complex::zero();
                for k in 0..4 {
                    acc += self.entries[i][k] * rhs.entries[k][j];
                }
                m.entries[i][j] = acc;
            }
        }
        m
    }
}

impl<T: Real> fmt::Debug for Operator4<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator4 [")?;
        for row in &self.entries {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:>12.5e}{:+.5e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
