//! Finite-dimensional complex operator algebra: construction, composition,
//! tensor products, adjoints, (anti)commutators, and numerical property
//! checks used by every other module.

use alloc::format;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

pub type C64 = Complex64;

/// Default tolerance wherever one is optional.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Hard cap on Hilbert-space dimension for tensor products and joint spaces.
pub const DIM_LIMIT: usize = 4096;

/// A dense operator on a finite-dimensional Hilbert space.
///
/// Immutable after construction; all operations are pure functions returning
/// fresh values, so concurrent use needs no coordination.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: CMatrix,
}

impl Operator {
    /// Builds an operator from row-major entries; `dim²` entries required,
    /// all finite.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape {
                message: "operator dimension must be positive".into(),
            });
        }
        if entries.len() != dim * dim {
            return Err(Error::Shape {
                message: format!(
                    "operator of dimension {dim} needs {} entries, got {}",
                    dim * dim,
                    entries.len()
                ),
            });
        }
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, entries[i * dim + j]);
            }
        }
        let op = Operator { mat: m };
        if !op.mat.is_finite() {
            return Err(Error::NonFinite {
                context: "operator entries",
            });
        }
        Ok(op)
    }

    /// Builds from nested rows; rejects ragged or non-square input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape {
                message: "operator rows must form a square matrix".into(),
            });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            entries.extend_from_slice(row);
        }
        Operator::new(dim, entries)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Operator {
            mat: CMatrix::from_fn(dim, dim, f),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            mat: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Operator {
            mat: CMatrix::identity(dim),
        }
    }

    /// 1×1 operator holding a single complex number.
    pub fn scalar(z: C64) -> Self {
        Operator::from_fn(1, |_, _| z)
    }

    pub(crate) fn from_cmatrix(mat: CMatrix) -> Self {
        debug_assert_eq!(mat.rows(), mat.cols());
        Operator { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat.get(i, j)
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.mat.set(i, j, v);
    }

    pub fn entries(&self) -> &[C64] {
        self.mat.data()
    }

    pub fn is_zero(&self) -> bool {
        self.entries().iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Operator {
        Operator {
            mat: self.mat.dagger(),
        }
    }

    pub fn scale(&self, z: C64) -> Operator {
        Operator {
            mat: self.mat.scale(z),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.mat.max_abs()
    }

    /// Kronecker product with `self` as the slow index.
    pub fn tensor(&self, other: &Operator) -> Result<Operator> {
        self.tensor_capped(other, DIM_LIMIT)
    }

    /// [`Operator::tensor`] with a caller-chosen dimension cap.
    pub fn tensor_capped(&self, other: &Operator, limit: usize) -> Result<Operator> {
        let (da, db) = (self.dim(), other.dim());
        let dim = da.saturating_mul(db);
        if dim > limit {
            return Err(Error::DimensionLimit {
                requested: dim,
                limit,
            });
        }
        Ok(Operator::from_fn(dim, |i, j| {
            self.get(i / db, j / db) * other.get(i % db, j % db)
        }))
    }

    /// `‖A − A†‖` in max-abs.
    pub fn hermitian_deviation(&self) -> f64 {
        (self - &self.dagger()).max_abs()
    }

    /// `‖A†A − I‖` in max-abs.
    pub fn unitary_deviation(&self) -> f64 {
        let d = self.dim();
        (&(&self.dagger() * self) - &Operator::identity(d)).max_abs()
    }

    /// `(A − A†)/(2i)`, the Hermitian part of the anti-Hermitian component.
    pub fn im_part(&self) -> Operator {
        (self - &self.dagger()).scale(C64::new(0.0, -0.5))
    }

    /// Smallest eigenvalue of the (symmetrized) operator.
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.mat)
    }

    /// Fast check that all eigenvalues are ≥ `-tol`; falls back to the exact
    /// eigensolver only when the cheap Cholesky certificate fails.
    pub fn is_psd_within(&self, tol: f64) -> bool {
        linalg::psd_certificate(&self.mat, tol) || self.min_eigenvalue() >= -tol
    }

    /// LU inverse with 1-norm condition estimate; `None` when singular.
    pub fn try_inverse(&self) -> Option<(Operator, f64)> {
        linalg::try_inverse(&self.mat).map(|(m, cond)| (Operator { mat: m }, cond))
    }

    /// Runs one numerical property check and reports the residual.
    pub fn check(&self, property: MatrixProperty, tol: f64) -> PropertyReport {
        let deviation = match property {
            MatrixProperty::Hermitian => self.hermitian_deviation(),
            MatrixProperty::Unitary => self.unitary_deviation(),
            MatrixProperty::PositiveSemidefinite => {
                let lam = self.min_eigenvalue();
                let herm = self.hermitian_deviation();
                (-lam).max(0.0).max(herm)
            }
            MatrixProperty::UnitTrace => {
                let t = self.trace() - C64::new(1.0, 0.0);
                libm::sqrt(t.norm_sqr())
            }
        };
        PropertyReport {
            property,
            deviation,
            tol,
            passed: deviation <= tol,
        }
    }

    pub fn approx_eq(&self, other: &Operator, tol: f64) -> bool {
        self.dim() == other.dim() && (self - other).max_abs() <= tol
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            mat: self.mat.add(&rhs.mat),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            mat: self.mat.sub(&rhs.mat),
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator {
            mat: self.mat.matmul(&rhs.mat),
        }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Commutator or anticommutator selector for [`bracket`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BracketKind {
    Commutator,
    Anticommutator,
}

/// `AB − BA` or `AB + BA`.
pub fn bracket(kind: BracketKind, a: &Operator, b: &Operator) -> Result<Operator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
            context: "bracket",
        });
    }
    let ab = a * b;
    let ba = b * a;
    Ok(match kind {
        BracketKind::Commutator => &ab - &ba,
        BracketKind::Anticommutator => &ab + &ba,
    })
}

pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    bracket(BracketKind::Commutator, a, b)
}

pub fn anticommutator(a: &Operator, b: &Operator) -> Result<Operator> {
    bracket(BracketKind::Anticommutator, a, b)
}

/// Property selector for [`Operator::check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixProperty {
    Hermitian,
    Unitary,
    PositiveSemidefinite,
    UnitTrace,
}

/// Outcome of a numerical property check.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    pub property: MatrixProperty,
    /// Max-abs residual of the defining identity.
    pub deviation: f64,
    pub tol: f64,
    /// `deviation <= tol`.
    pub passed: bool,
}

// Standard small operators. Qubit convention: excited state is index 0,
// so sigma_z = |e><e| - |g><g| = diag(1, -1) and sigma_minus = |g><e|.

pub fn sigma_x() -> Operator {
    Operator::from_fn(2, |i, j| {
        if i != j {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn sigma_y() -> Operator {
    Operator::from_fn(2, |i, j| match (i, j) {
        (0, 1) => C64::new(0.0, -1.0),
        (1, 0) => C64::new(0.0, 1.0),
        _ => C64::new(0.0, 0.0),
    })
}

pub fn sigma_z() -> Operator {
    Operator::from_fn(2, |i, j| match (i, j) {
        (0, 0) => C64::new(1.0, 0.0),
        (1, 1) => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 0.0),
    })
}

/// Qubit lowering operator `|g><e|`.
pub fn sigma_minus() -> Operator {
    Operator::from_fn(2, |i, j| {
        if i == 1 && j == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Truncated bosonic annihilation operator on an `dim`-level ladder.
pub fn annihilator(dim: usize) -> Operator {
    Operator::from_fn(dim, |i, j| {
        if j == i + 1 {
            C64::new(libm::sqrt(j as f64), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}
