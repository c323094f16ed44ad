//! Subspaces of the tangent space as orthonormal frames, and determinants of
//! linear maps restricted to them.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt, SmallMatrix};
use crate::torus::{TangentVector, MAX_DIM};

/// Orthonormality tolerance for subspace frames. Frames drifting past this
/// are rejected rather than silently repaired; re-orthonormalization is an
/// explicit operation ([`Subspace::orthonormalized`]).
pub const ORTHO_TOL: f64 = 1e-10;

/// A `d`-dimensional subspace of `R^{amb}` given by an orthonormal basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subspace {
    amb: usize,
    dim: usize,
    basis: [TangentVector; MAX_DIM],
}

impl Subspace {
    /// Wrap an already-orthonormal frame; rejects frames whose Gram defect
    /// exceeds [`ORTHO_TOL`].
    pub fn new(vectors: &[TangentVector]) -> Result<Self> {
        if vectors.is_empty() || vectors.len() > MAX_DIM {
            return Err(Error::InvalidInput("subspace dimension out of range"));
        }
        let amb = vectors[0].dim();
        if vectors.len() > amb || vectors.iter().any(|v| v.dim() != amb) {
            return Err(Error::DimensionMismatch { expected: amb, got: vectors.len() });
        }
        let mut defect = 0.0f64;
        for (i, vi) in vectors.iter().enumerate() {
            for (j, vj) in vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((vi.dot(vj) - target).abs());
            }
        }
        if defect > ORTHO_TOL {
            return Err(Error::NotOrthonormal { defect, tol: ORTHO_TOL });
        }
        let mut basis = [TangentVector::zero(amb); MAX_DIM];
        basis[..vectors.len()].copy_from_slice(vectors);
        Ok(Subspace { amb, dim: vectors.len(), basis })
    }

    /// Explicit Gram-Schmidt repair: orthonormalize a spanning family.
    pub fn orthonormalized(vectors: &[TangentVector]) -> Result<Self> {
        let mut vs: Vec<TangentVector> = vectors.to_vec();
        gram_schmidt(&mut vs)?;
        Subspace::new(&vs)
    }

    /// The full space `R^dim` with the standard basis.
    pub fn full(dim: usize) -> Self {
        let vs: Vec<TangentVector> = (0..dim).map(|i| TangentVector::basis(dim, i)).collect();
        Subspace::new(&vs).expect("standard basis is orthonormal")
    }

    /// The line spanned by `v`.
    pub fn line(v: &TangentVector) -> Result<Self> {
        let n = v.norm();
        if n < 1e-12 {
            return Err(Error::InvalidInput("cannot span a line with the zero vector"));
        }
        Subspace::new(&[v.scaled(1.0 / n)])
    }

    pub fn ambient_dim(&self) -> usize {
        self.amb
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[TangentVector] {
        &self.basis[..self.dim]
    }

    pub fn basis_vector(&self, i: usize) -> &TangentVector {
        &self.basis[i]
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &TangentVector) -> TangentVector {
        let mut out = TangentVector::zero(self.amb);
        for b in self.basis() {
            out = out.axpy(v.dot(b), b);
        }
        out
    }

    /// Linear combination of the basis with the given coefficients.
    pub fn combination(&self, coeffs: &[f64]) -> TangentVector {
        debug_assert_eq!(coeffs.len(), self.dim);
        let mut out = TangentVector::zero(self.amb);
        for (c, b) in coeffs.iter().zip(self.basis()) {
            out = out.axpy(*c, b);
        }
        out
    }

    /// Image of the subspace under `m`, re-orthonormalized to a frame of the
    /// same span.
    pub fn pushforward(&self, m: &SmallMatrix) -> Result<Subspace> {
        let images: Vec<TangentVector> = self.basis().iter().map(|b| m.apply(b)).collect();
        Subspace::orthonormalized(&images)
    }

    /// Frobenius distance between the orthogonal projectors of two spans.
    /// Zero iff the subspaces coincide; basis-independent.
    pub fn span_distance(&self, other: &Subspace) -> f64 {
        debug_assert_eq!(self.amb, other.amb);
        let mut s = 0.0;
        for i in 0..self.amb {
            let e = TangentVector::basis(self.amb, i);
            let d = self.project(&e).sub(&other.project(&e));
            s += d.dot(&d);
        }
        s.sqrt()
    }
}

/// `|det(m restricted to span(basis))|`: the norm of the wedge of the image
/// vectors, computed from the `d x d` minors of the image frame. Equals the
/// square root of the Gram determinant of the images.
pub fn wedge_determinant(m: &SmallMatrix, basis: &Subspace) -> Result<f64> {
    if m.dim() != basis.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), got: basis.ambient_dim() });
    }
    // Re-validate orthonormality: frames that drifted must be repaired
    // explicitly by the caller.
    Subspace::new(basis.basis())?;
    let amb = basis.ambient_dim();
    let d = basis.dim();
    // Image matrix, amb x d, column k = m * b_k.
    let mut g = [[0.0; MAX_DIM]; MAX_DIM];
    for (k, b) in basis.basis().iter().enumerate() {
        let img = m.apply(b);
        for i in 0..amb {
            g[i][k] = img.comp(i);
        }
    }
    let mut sum_sq = 0.0;
    for mask in 0u32..(1 << amb) {
        if mask.count_ones() as usize != d {
            continue;
        }
        let mut rows = [0usize; MAX_DIM];
        let mut r = 0;
        for i in 0..amb {
            if mask & (1 << i) != 0 {
                rows[r] = i;
                r += 1;
            }
        }
        let mut sq = SmallMatrix::zeros(d);
        for (ri, &row) in rows[..d].iter().enumerate() {
            for k in 0..d {
                sq.set(ri, k, g[row][k]);
            }
        }
        let minor = sq.det();
        sum_sq += minor * minor;
    }
    Ok(sum_sq.sqrt())
}
