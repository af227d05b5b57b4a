//! Truncated Fock space, dense operators on it, and the canonical ladder pair.
//!
//! The truncation keeps `c` and `c†` exact adjoints of each other: `c†`
//! annihilates the top level instead of wrapping around. All of the
//! truncation error of the canonical commutation relation is then confined
//! to the single corner entry `[c, c†]_{d-1,d-1} = -(d-1)`.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<Complex64>;
pub type StateVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
#[cfg(test)]
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Conjugate-linear in the first argument: `<f, g> = sum conj(f_k) g_k`.
pub fn inner(f: &StateVector, g: &StateVector) -> Complex64 {
    f.dotc(g)
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Truncation of the Fock space to levels `0..dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FockSpace {
    dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Canonical unit vector `e_n`.
    ///
    /// # Panics
    /// If `n >= dim`.
    pub fn basis_vector(&self, n: usize) -> StateVector {
        assert!(n < self.dim, "level {n} outside a {}-level space", self.dim);
        let mut v = StateVector::zeros(self.dim);
        v[n] = ONE;
        v
    }

    pub fn zero_vector(&self) -> StateVector {
        StateVector::zeros(self.dim)
    }

    pub(crate) fn check_vector(&self, v: &StateVector) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }
}

pub fn make_space(dim: usize) -> Result<FockSpace> {
    FockSpace::new(dim)
}

/// Dense complex `d x d` matrix acting on a [`FockSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: FockSpace,
    entries: Matrix,
}

impl Operator {
    /// Wraps a matrix, checking its shape and that every entry is finite.
    pub fn from_matrix(space: FockSpace, entries: Matrix) -> Result<Self> {
        let d = space.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: if entries.nrows() != d {
                    entries.nrows()
                } else {
                    entries.ncols()
                },
            });
        }
        for col in 0..d {
            for row in 0..d {
                let z = entries[(row, col)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        Ok(Self { space, entries })
    }

    // Shape already guaranteed by construction; finiteness is the caller's
    // business (products of finite operators).
    pub(crate) fn from_matrix_unchecked(space: FockSpace, entries: Matrix) -> Self {
        debug_assert_eq!(entries.nrows(), space.dim());
        debug_assert_eq!(entries.ncols(), space.dim());
        Self { space, entries }
    }

    pub fn identity(space: FockSpace) -> Self {
        Self::from_matrix_unchecked(space, Matrix::identity(space.dim(), space.dim()))
    }

    pub fn zeros(space: FockSpace) -> Self {
        Self::from_matrix_unchecked(space, Matrix::zeros(space.dim(), space.dim()))
    }

    /// `|f><g|`, i.e. `h -> <g, h> f`.
    pub fn outer(space: FockSpace, f: &StateVector, g: &StateVector) -> Result<Self> {
        space.check_vector(f)?;
        space.check_vector(g)?;
        Ok(Self::from_matrix_unchecked(space, f * g.adjoint()))
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_matrix_unchecked(self.space, self.entries.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_matrix_unchecked(self.space, &self.entries * s)
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        &self.entries * v
    }

    pub fn try_mul(&self, rhs: &Operator) -> Result<Self> {
        self.same_space(rhs)?;
        Ok(Self::from_matrix_unchecked(self.space, &self.entries * &rhs.entries))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.space);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        spectral_norm(&self.entries)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    pub(crate) fn same_space(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;

    /// # Panics
    /// On dimension mismatch; use [`Operator::try_mul`] for a checked product.
    fn mul(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator::from_matrix_unchecked(self.space, &self.entries * &rhs.entries)
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn add(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator::from_matrix_unchecked(self.space, &self.entries + &rhs.entries)
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn sub(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator::from_matrix_unchecked(self.space, &self.entries - &rhs.entries)
    }
}

/// Span of `e_0, ..., e_{cutoff-1}`: the levels far enough from the
/// truncation edge for the ladder identities to hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SafeSubspace {
    space: FockSpace,
    cutoff: usize,
}

impl SafeSubspace {
    pub fn new(space: FockSpace, cutoff: usize) -> Result<Self> {
        if cutoff == 0 || cutoff >= space.dim() {
            return Err(Error::CutoffOutOfRange {
                cutoff,
                dim: space.dim(),
            });
        }
        Ok(Self { space, cutoff })
    }

    /// Everything but the top level.
    pub fn below_top(space: FockSpace) -> Self {
        Self {
            space,
            cutoff: space.dim() - 1,
        }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }
}

/// Lowering operator: `c e_n = sqrt(n) e_{n-1}`, `c e_0 = 0`.
pub fn ladder_c(space: FockSpace) -> Operator {
    let d = space.dim();
    let mut m = Matrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Operator::from_matrix_unchecked(space, m)
}

/// Raising operator: `c† e_n = sqrt(n+1) e_{n+1}`, with `c† e_{d-1} = 0`.
pub fn ladder_c_dag(space: FockSpace) -> Operator {
    ladder_c(space).adjoint()
}

/// `AB - BA`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.same_space(b)?;
    Ok(&(a * b) - &(b * a))
}

/// Top-left `cutoff x cutoff` block of `a`.
pub fn restrict(a: &Operator, sub: &SafeSubspace) -> Result<Matrix> {
    if sub.space().dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: sub.space().dim(),
        });
    }
    let k = sub.cutoff();
    Ok(a.matrix().view((0, 0), (k, k)).into_owned())
}
