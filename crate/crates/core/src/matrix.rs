//! Dense matrices over the Gaussian rationals ℚ[i].
//!
//! Every quantity produced by Pauli words and their spectral projections lies in
//! ℚ[i], so verdict-critical checks (edge signs, joint-projection support) are
//! decided here without any tolerance.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};

/// A complex number with exact rational real and imaginary parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussRational {
    pub re: Rational64,
    pub im: Rational64,
}

impl GaussRational {
    pub const fn new(re: Rational64, im: Rational64) -> Self {
        Self { re, im }
    }

    pub fn from_integers(re: i64, im: i64) -> Self {
        Self::new(Rational64::from_integer(re), Rational64::from_integer(im))
    }

    pub fn zero() -> Self {
        Self::from_integers(0, 0)
    }

    pub fn one() -> Self {
        Self::from_integers(1, 0)
    }

    pub fn i() -> Self {
        Self::from_integers(0, 1)
    }

    pub fn half() -> Self {
        Self::new(Rational64::new(1, 2), Rational64::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Add for GaussRational {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for GaussRational {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Mul for GaussRational {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}

impl Neg for GaussRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                if self.im < Rational64::zero() {
                    write!(f, "{}-{}i", self.re, -self.im)
                } else {
                    write!(f, "{}+{}i", self.re, self.im)
                }
            }
        }
    }
}

/// Square matrix with exact Gaussian-rational entries, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<GaussRational>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            entries: vec![GaussRational::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.set(k, k, GaussRational::one());
        }
        m
    }

    /// Builds a matrix from row-major entries. Panics if the length is not a
    /// nonzero perfect square.
    pub fn from_rows(dim: usize, entries: Vec<GaussRational>) -> Self {
        assert!(dim > 0 && entries.len() == dim * dim, "inconsistent dimensions");
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> GaussRational {
        self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: GaussRational) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[GaussRational] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(GaussRational::is_zero)
    }

    pub fn scale(&self, factor: GaussRational) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&e| e * factor).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        *self == self.adjoint()
    }

    pub fn is_unitary(&self) -> bool {
        &self.adjoint() * self == Self::identity(self.dim)
    }

    pub fn trace(&self) -> GaussRational {
        (0..self.dim).fold(GaussRational::zero(), |acc, k| acc + self.get(k, k))
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let dim = self.dim * rhs.dim;
        let mut out = Self::zeros(dim);
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self.get(r1, c1);
                if a.is_zero() {
                    continue;
                }
                for r2 in 0..rhs.dim {
                    for c2 in 0..rhs.dim {
                        out.set(r1 * rhs.dim + r2, c1 * rhs.dim + c2, a * rhs.get(r2, c2));
                    }
                }
            }
        }
        out
    }

    pub fn commutator_is_zero(&self, rhs: &Self) -> bool {
        self * rhs == rhs * self
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| self.get(r, c).to_complex64())
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix product");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let b = rhs.get(k, c);
                    if !b.is_zero() {
                        let cur = out.get(r, c);
                        out.set(r, c, cur + a * b);
                    }
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix sum");
        ComplexMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix difference");
        ComplexMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl One for GaussRational {
    fn one() -> Self {
        GaussRational::one()
    }
}

impl Zero for GaussRational {
    fn zero() -> Self {
        GaussRational::zero()
    }

    fn is_zero(&self) -> bool {
        GaussRational::is_zero(self)
    }
}
