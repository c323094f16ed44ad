//! Small fixed-dimension linear algebra.
//!
//! Everything here is sized for ambient dimension at most [`MAX_DIM`] = 4 and
//! implemented directly (cofactor determinants, Gaussian elimination, cyclic
//! Jacobi, Durand-Kerner root finding). Hot loops iterate millions of
//! matrix-vector products on 2x2 and 3x3 matrices, so there is no reason to
//! pull in a general linear algebra dependency.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::torus::{TangentVector, MAX_DIM};

/// A dense `d x d` real matrix with `d <= 4`, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallMatrix {
    dim: usize,
    m: [[f64; MAX_DIM]; MAX_DIM],
}

impl SmallMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "unsupported dimension");
        SmallMatrix { dim, m: [[0.0; MAX_DIM]; MAX_DIM] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut a = SmallMatrix::zeros(dim);
        for i in 0..dim {
            a.m[i][i] = 1.0;
        }
        a
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut a = SmallMatrix::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "matrix must be square");
            a.m[i][..dim].copy_from_slice(row);
        }
        a
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut a = SmallMatrix::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            a.m[i][i] = x;
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.m[i][j] = x;
    }

    #[inline]
    pub fn apply(&self, v: &TangentVector) -> TangentVector {
        debug_assert_eq!(v.dim(), self.dim);
        let mut out = TangentVector::zero(self.dim);
        for i in 0..self.dim {
            let mut s = 0.0;
            for j in 0..self.dim {
                s += self.m[i][j] * v.comp(j);
            }
            out.set_comp(i, s);
        }
        out
    }

    pub fn matmul(&self, rhs: &SmallMatrix) -> SmallMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = SmallMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for k in 0..self.dim {
                let a = self.m[i][k];
                if a != 0.0 {
                    for j in 0..self.dim {
                        out.m[i][j] += a * rhs.m[k][j];
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> SmallMatrix {
        let mut out = SmallMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.m[j][i] = self.m[i][j];
            }
        }
        out
    }

    pub fn add_scaled(&self, s: f64, rhs: &SmallMatrix) -> SmallMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.m[i][j] += s * rhs.m[i][j];
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.m[i][i]).sum()
    }

    pub fn det(&self) -> f64 {
        match self.dim {
            1 => self.m[0][0],
            2 => self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0],
            3 => {
                let m = &self.m;
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            }
            4 => {
                let mut s = 0.0;
                for j in 0..4 {
                    let minor = self.minor(0, j);
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    s += sign * self.m[0][j] * minor.det();
                }
                s
            }
            _ => unreachable!(),
        }
    }

    fn minor(&self, row: usize, col: usize) -> SmallMatrix {
        let mut out = SmallMatrix::zeros(self.dim - 1);
        let mut r = 0;
        for i in 0..self.dim {
            if i == row {
                continue;
            }
            let mut c = 0;
            for j in 0..self.dim {
                if j == col {
                    continue;
                }
                out.m[r][c] = self.m[i][j];
                c += 1;
            }
            r += 1;
        }
        out
    }

    /// Solve `self * x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &TangentVector) -> Result<TangentVector> {
        let n = self.dim;
        let mut a = self.m;
        let mut rhs = [0.0; MAX_DIM];
        rhs[..n].copy_from_slice(b.components());
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if a[r][col].abs() > a[piv][col].abs() {
                    piv = r;
                }
            }
            if a[piv][col].abs() < 1e-300 {
                return Err(Error::SingularMatrix { det: self.det() });
            }
            a.swap(col, piv);
            rhs.swap(col, piv);
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    rhs[r] -= f * rhs[col];
                }
            }
        }
        let mut x = [0.0; MAX_DIM];
        for row in (0..n).rev() {
            let mut s = rhs[row];
            for c in row + 1..n {
                s -= a[row][c] * x[c];
            }
            x[row] = s / a[row][row];
        }
        Ok(TangentVector::new(&x[..n]))
    }

    pub fn inverse(&self) -> Result<SmallMatrix> {
        let n = self.dim;
        let mut out = SmallMatrix::zeros(n);
        for j in 0..n {
            let col = self.solve(&TangentVector::basis(n, j))?;
            for i in 0..n {
                out.m[i][j] = col.comp(i);
            }
        }
        Ok(out)
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        let sv = self.singular_values();
        sv[0]
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> [f64; MAX_DIM] {
        let at_a = self.transpose().matmul(self);
        let (mut ev, _) = jacobi_symmetric(&at_a.m, self.dim);
        for x in ev.iter_mut().take(self.dim) {
            *x = x.max(0.0).sqrt();
        }
        ev[..self.dim].sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
        ev
    }

    /// Eigenvalues as complex numbers, via the characteristic polynomial.
    pub fn eigenvalues(&self) -> Vec<Complex> {
        let coeffs = self.char_poly();
        poly_roots(&coeffs[..=self.dim])
    }

    /// Monic characteristic polynomial coefficients `c[0] + c[1] x + ... +
    /// c[n] x^n` with `c[n] = 1`, by the Faddeev-LeVerrier recursion.
    pub fn char_poly(&self) -> [f64; MAX_DIM + 1] {
        let n = self.dim;
        let mut c = [0.0; MAX_DIM + 1];
        c[n] = 1.0;
        let mut m = SmallMatrix::zeros(n);
        for k in 1..=n {
            // M_k = A * M_{k-1} + c_{n-k+1} I
            m = self.matmul(&m);
            for i in 0..n {
                m.m[i][i] += c[n - k + 1];
            }
            c[n - k] = -self.matmul(&m).trace() / k as f64;
        }
        c
    }
}

/// Minimal complex number for eigenvalue moduli.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    pub fn modulus(&self) -> f64 {
        (self.re * self.re + self.im * self.im).sqrt()
    }

    fn mul(self, o: Complex) -> Complex {
        Complex::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }

    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }

    fn div(self, o: Complex) -> Complex {
        let d = o.re * o.re + o.im * o.im;
        Complex::new((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)
    }
}

fn poly_eval(coeffs: &[f64], z: Complex) -> Complex {
    let mut acc = Complex::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc.mul(z);
        acc.re += c;
    }
    acc
}

/// All complex roots of a real polynomial (Durand-Kerner iteration).
/// `coeffs[k]` multiplies `x^k`; the leading coefficient must be nonzero.
pub fn poly_roots(coeffs: &[f64]) -> Vec<Complex> {
    let n = coeffs.len() - 1;
    assert!(n >= 1 && coeffs[n] != 0.0);
    let monic: Vec<f64> = coeffs.iter().map(|c| c / coeffs[n]).collect();
    // Initial guesses on a spiral that is not a symmetry axis of the roots.
    let mut z: Vec<Complex> = Vec::with_capacity(n);
    let mut w = Complex::new(1.0, 0.0);
    let rot = Complex::new(0.4, 0.9);
    for _ in 0..n {
        w = w.mul(rot);
        z.push(w);
    }
    for _ in 0..200 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = Complex::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom = denom.mul(z[i].sub(z[j]));
                }
            }
            let step = poly_eval(&monic, z[i]).div(denom);
            z[i] = z[i].sub(step);
            max_step = max_step.max(step.modulus());
        }
        if max_step < 1e-14 {
            break;
        }
    }
    // Collapse conjugate noise: a root with tiny imaginary part is real.
    for r in z.iter_mut() {
        if r.im.abs() < 1e-9 * (1.0 + r.re.abs()) {
            r.im = 0.0;
        }
    }
    z.sort_unstable_by(|a, b| b.modulus().partial_cmp(&a.modulus()).unwrap());
    z
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns `(eigenvalues, v)` with `v`'s *columns* the eigenvectors, in
/// unsorted order matching the eigenvalue array.
pub fn jacobi_symmetric(m: &[[f64; MAX_DIM]; MAX_DIM], n: usize) -> ([f64; MAX_DIM], [[f64; MAX_DIM]; MAX_DIM]) {
    let mut a = *m;
    let mut v = [[0.0; MAX_DIM]; MAX_DIM];
    for (i, row) in v.iter_mut().enumerate().take(n) {
        row[i] = 1.0;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut().take(n) {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut ev = [0.0; MAX_DIM];
    for i in 0..n {
        ev[i] = a[i][i];
    }
    (ev, v)
}

/// Operator norm of a rectangular block `a[0..rows][0..cols]`.
pub fn op_norm_rect(a: &[[f64; MAX_DIM]; MAX_DIM], rows: usize, cols: usize) -> f64 {
    // Largest eigenvalue of A^T A (cols x cols).
    let mut ata = [[0.0; MAX_DIM]; MAX_DIM];
    for i in 0..cols {
        for j in 0..cols {
            let mut s = 0.0;
            for row in a.iter().take(rows) {
                s += row[i] * row[j];
            }
            ata[i][j] = s;
        }
    }
    let (ev, _) = jacobi_symmetric(&ata, cols);
    let mut best = 0.0f64;
    for &e in ev.iter().take(cols) {
        best = best.max(e);
    }
    best.max(0.0).sqrt()
}

/// Orthonormalize `vectors` in place by modified Gram-Schmidt with one
/// re-orthogonalization pass, preserving the span and orientation order.
/// Fails if the family is numerically rank-deficient.
pub fn gram_schmidt(vectors: &mut [TangentVector]) -> Result<()> {
    let k = vectors.len();
    for i in 0..k {
        let mut v = vectors[i];
        for _pass in 0..2 {
            for j in 0..i {
                let proj = v.dot(&vectors[j]);
                v = v.axpy(-proj, &vectors[j]);
            }
        }
        let n = v.norm();
        if n < 1e-12 {
            return Err(Error::NumericalFailure { what: "gram_schmidt rank deficiency", value: n });
        }
        v.scale_mut(1.0 / n);
        vectors[i] = v;
    }
    Ok(())
}
