//! Points and tangent vectors on the flat torus `T^d = (R/Z)^d`.
//!
//! The torus is flat, so the tangent space is identified with `R^d` at every
//! point and parallel transport is the identity on components. Dimensions up
//! to [`MAX_DIM`] are supported with statically sized storage; the built-in
//! models live on `T^2` and `T^3`.


#[allow(unused_imports)]
use num_traits::Float;
use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 4;

/// Reduce a coordinate to `[0, 1)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let y = x - x.floor();
    // x slightly below an integer can round to 1.0 exactly.
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Reduce a displacement to the nearest lift in `[-1/2, 1/2)`.
#[inline]
pub fn wrap_half(x: f64) -> f64 {
    let y = wrap(x);
    if y >= 0.5 {
        y - 1.0
    } else {
        y
    }
}

/// A point of `T^d`, coordinates always reduced to `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    dim: usize,
    c: [f64; MAX_DIM],
}

impl TorusPoint {
    /// Build a point from arbitrary real coordinates, reducing mod 1.
    pub fn new(coords: &[f64]) -> Self {
        assert!((1..=MAX_DIM).contains(&coords.len()), "unsupported dimension");
        let mut c = [0.0; MAX_DIM];
        for (slot, &x) in c.iter_mut().zip(coords) {
            *slot = wrap(x);
        }
        TorusPoint { dim: coords.len(), c }
    }

    pub fn origin(dim: usize) -> Self {
        TorusPoint::new(&[0.0; MAX_DIM][..dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..self.dim]
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.c[i]
    }

    /// Translate by a tangent vector and reduce mod 1.
    pub fn offset(&self, v: &TangentVector) -> TorusPoint {
        let mut c = [0.0; MAX_DIM];
        for i in 0..self.dim {
            c[i] = wrap(self.c[i] + v.c[i]);
        }
        TorusPoint { dim: self.dim, c }
    }

    /// Displacement `self - other` as the nearest lift, component-wise in
    /// `[-1/2, 1/2)`.
    pub fn displacement_from(&self, other: &TorusPoint) -> TangentVector {
        debug_assert_eq!(self.dim, other.dim);
        let mut c = [0.0; MAX_DIM];
        for i in 0..self.dim {
            c[i] = wrap_half(self.c[i] - other.c[i]);
        }
        TangentVector { dim: self.dim, c }
    }
}

/// A tangent vector; the flat metric identifies all tangent spaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    dim: usize,
    c: [f64; MAX_DIM],
}

impl TangentVector {
    pub fn new(components: &[f64]) -> Self {
        assert!((1..=MAX_DIM).contains(&components.len()), "unsupported dimension");
        let mut c = [0.0; MAX_DIM];
        c[..components.len()].copy_from_slice(components);
        TangentVector { dim: components.len(), c }
    }

    pub fn zero(dim: usize) -> Self {
        TangentVector::new(&[0.0; MAX_DIM][..dim])
    }

    /// Standard basis vector `e_i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = TangentVector::zero(dim);
        v.c[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.c[..self.dim]
    }

    #[inline]
    pub fn comp(&self, i: usize) -> f64 {
        self.c[i]
    }

    #[inline]
    pub fn set_comp(&mut self, i: usize, x: f64) {
        self.c[i] = x;
    }

    pub fn dot(&self, other: &TangentVector) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for i in 0..self.dim {
            s += self.c[i] * other.c[i];
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn add(&self, other: &TangentVector) -> TangentVector {
        debug_assert_eq!(self.dim, other.dim);
        let mut c = [0.0; MAX_DIM];
        for i in 0..self.dim {
            c[i] = self.c[i] + other.c[i];
        }
        TangentVector { dim: self.dim, c }
    }

    pub fn sub(&self, other: &TangentVector) -> TangentVector {
        debug_assert_eq!(self.dim, other.dim);
        let mut c = [0.0; MAX_DIM];
        for i in 0..self.dim {
            c[i] = self.c[i] - other.c[i];
        }
        TangentVector { dim: self.dim, c }
    }

    pub fn scaled(&self, s: f64) -> TangentVector {
        let mut v = *self;
        v.scale_mut(s);
        v
    }

    pub fn scale_mut(&mut self, s: f64) {
        for x in self.c.iter_mut().take(self.dim) {
            *x *= s;
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &TangentVector) -> TangentVector {
        debug_assert_eq!(self.dim, other.dim);
        let mut c = [0.0; MAX_DIM];
        for i in 0..self.dim {
            c[i] = self.c[i] + s * other.c[i];
        }
        TangentVector { dim: self.dim, c }
    }
}

/// Geodesic distance on the flat torus: the minimum over integer translates
/// of the Euclidean distance between lifts. Computed per coordinate via the
/// minimum image convention.
pub fn torus_distance(p: &TorusPoint, q: &TorusPoint) -> Result<f64> {
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch { expected: p.dim, got: q.dim });
    }
    let mut s = 0.0;
    for i in 0..p.dim {
        let d = (p.c[i] - q.c[i]).abs();
        let d = d.min(1.0 - d);
        s += d * d;
    }
    Ok(s.sqrt())
}

/// Distance variant for hot loops where dimensions are known equal.
#[inline]
pub fn torus_distance_unchecked(p: &TorusPoint, q: &TorusPoint) -> f64 {
    let mut s = 0.0;
    for i in 0..p.dim {
        let d = (p.c[i] - q.c[i]).abs();
        let d = d.min(1.0 - d);
        s += d * d;
    }
    s.sqrt()
}
