//! Dense complex matrices and the few factorizations the calculus needs:
//! LU inversion with a condition estimate, cyclic Jacobi eigenvalues for
//! Hermitian matrices, and a Cholesky-based positive-semidefiniteness
//! certificate.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

/// Rectangular complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds from row vectors; `None` if the rows are ragged or empty.
    pub fn from_rows(rows: &[Vec<C64>]) -> Option<Self> {
        let r = rows.len();
        if r == 0 {
            return None;
        }
        let c = rows[0].len();
        if c == 0 || rows.iter().any(|row| row.len() != c) {
            return None;
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            data.extend_from_slice(row);
        }
        Some(CMatrix {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = k * rhs.cols;
                let orow = i * rhs.cols;
                for j in 0..rhs.cols {
                    out.data[orow + j] += a * rhs.data[row + j];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert!(
            self.rows == rhs.rows && self.cols == rhs.cols,
            "add shape mismatch"
        );
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert!(
            self.rows == rhs.rows && self.cols == rhs.cols,
            "sub shape mismatch"
        );
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, z: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * z).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        let m = self
            .data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(0.0_f64, f64::max);
        libm::sqrt(m)
    }

    /// Induced 1-norm (max column absolute sum).
    pub fn norm1(&self) -> f64 {
        let mut best = 0.0_f64;
        for j in 0..self.cols {
            let mut s = 0.0;
            for i in 0..self.rows {
                s += abs_c(self.get(i, j));
            }
            best = best.max(s);
        }
        best
    }
}

#[inline]
fn abs_c(z: C64) -> f64 {
    libm::sqrt(z.norm_sqr())
}

/// LU inversion with partial pivoting.
///
/// Returns the inverse together with the 1-norm condition estimate
/// `‖A‖₁‖A⁻¹‖₁`, or `None` when a pivot vanishes outright.
#[allow(clippy::needless_range_loop)] // triangular in-place updates
pub fn try_inverse(a: &CMatrix) -> Option<(CMatrix, f64)> {
    assert_eq!(a.rows, a.cols, "inverse of a non-square matrix");
    let n = a.rows;
    let mut lu = a.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        // pivot search
        let mut best = col;
        let mut best_mag = lu[col * n + col].norm_sqr();
        for row in col + 1..n {
            let mag = lu[row * n + col].norm_sqr();
            if mag > best_mag {
                best_mag = mag;
                best = row;
            }
        }
        if best_mag == 0.0 {
            return None;
        }
        if best != col {
            for j in 0..n {
                lu.swap(col * n + j, best * n + j);
            }
            perm.swap(col, best);
        }
        let pivot = lu[col * n + col];
        for row in col + 1..n {
            let factor = lu[row * n + col] / pivot;
            lu[row * n + col] = factor;
            for j in col + 1..n {
                let upper = lu[col * n + j];
                lu[row * n + j] -= factor * upper;
            }
        }
    }

    // Solve A X = I column by column.
    let mut inv = CMatrix::zeros(n, n);
    let mut x = vec![C64::new(0.0, 0.0); n];
    for rhs_col in 0..n {
        for (xi, &p) in x.iter_mut().zip(&perm) {
            *xi = if p == rhs_col {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
        }
        // forward substitution (unit lower factor)
        for i in 1..n {
            for k in 0..i {
                let l = lu[i * n + k];
                let xk = x[k];
                x[i] -= l * xk;
            }
        }
        // back substitution
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = lu[i * n + k];
                let xk = x[k];
                x[i] -= u * xk;
            }
            x[i] /= lu[i * n + i];
        }
        for i in 0..n {
            inv.set(i, rhs_col, x[i]);
        }
    }

    if !inv.is_finite() {
        return None;
    }
    let cond = a.norm1() * inv.norm1();
    Some((inv, cond))
}

/// Eigenvalues of a Hermitian matrix via cyclic Jacobi rotations.
///
/// The input is symmetrized first, so a matrix that is Hermitian only up to
/// rounding is fine. Returned in ascending order.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    assert_eq!(a.rows, a.cols, "eigenvalues of a non-square matrix");
    let n = a.rows;
    if n == 1 {
        return vec![a.get(0, 0).re];
    }
    // symmetrize: m = (a + a†)/2
    let mut m = CMatrix::from_fn(n, n, |i, j| (a.get(i, j) + a.get(j, i).conj()) * 0.5);
    let scale = m.max_abs().max(1e-300);
    let stop = 1e-15 * scale;

    for _sweep in 0..100 {
        let mut largest = 0.0_f64;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let zpq = m.get(p, q);
                let mag = abs_c(zpq);
                largest = largest.max(mag);
                if mag <= stop {
                    continue;
                }
                let alpha = m.get(p, p).re;
                let beta = m.get(q, q).re;
                let phase = zpq / mag; // unimodular
                                       // smaller-magnitude root of t² − 2τt − 1 = 0
                let tau = (beta - alpha) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    -1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                } else {
                    1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;

                // Apply U = [[c, -s e^{iφ}], [s e^{-iφ}, c]] on columns (right)
                // and U† on rows (left); φ = arg(m[p][q]).
                for r in 0..n {
                    let mrp = m.get(r, p);
                    let mrq = m.get(r, q);
                    m.set(r, p, mrp * c + mrq * s * phase.conj());
                    m.set(r, q, mrq * c - mrp * s * phase);
                }
                for r in 0..n {
                    let mpr = m.get(p, r);
                    let mqr = m.get(q, r);
                    m.set(p, r, mpr * c + mqr * s * phase);
                    m.set(q, r, mqr * c - mpr * s * phase.conj());
                }
                // clean the rotated pair against rounding drift
                m.set(p, q, C64::new(0.0, 0.0));
                m.set(q, p, C64::new(0.0, 0.0));
            }
        }
        if largest <= stop {
            break;
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    eig
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a)[0]
}

/// Cheap certificate that the Hermitian part of `a` has no eigenvalue below
/// `-tol`: attempts a Cholesky factorization of `a + tol·I`.
///
/// `false` means "not certified", not "indefinite"; callers fall back to
/// [`min_eigenvalue`] for an exact answer.
pub fn psd_certificate(a: &CMatrix, tol: f64) -> bool {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut l = CMatrix::zeros(n, n);
    let scale = a.max_abs().max(1.0);
    let floor = -1e-14 * scale;
    for j in 0..n {
        let mut d = (a.get(j, j) + a.get(j, j).conj()).re * 0.5 + tol;
        for k in 0..j {
            d -= l.get(j, k).norm_sqr();
        }
        if d < floor {
            return false;
        }
        if d <= 0.0 {
            // semidefinite edge: accept only if the rest of the column is
            // numerically empty
            for i in j + 1..n {
                let mut v = (a.get(i, j) + a.get(j, i).conj()) * 0.5;
                for k in 0..j {
                    v -= l.get(i, k) * l.get(j, k).conj();
                }
                if abs_c(v) > 1e-12 * scale {
                    return false;
                }
            }
            continue;
        }
        let dj = libm::sqrt(d);
        l.set(j, j, C64::new(dj, 0.0));
        for i in j + 1..n {
            let mut v = (a.get(i, j) + a.get(j, i).conj()) * 0.5;
            for k in 0..j {
                v -= l.get(i, k) * l.get(j, k).conj();
            }
            l.set(i, j, v / dj);
        }
    }
    true
}
