//! Seeded, splittable randomness.
//!
//! All Monte Carlo routines draw from ChaCha8, a counter-based stream
//! cipher generator: one master seed plus an explicit stream id fully
//! determine every draw. Workers get disjoint streams by id, so results are
//! independent of scheduling and thread count.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::torus::{TangentVector, TorusPoint};

/// Factory for per-worker random streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Streams { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The generator for stream `id`. Streams with distinct ids never
    /// overlap regardless of how many values are drawn from each.
    pub fn stream(&self, id: u64) -> Rng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(id);
        Rng { inner }
    }
}

/// A single random stream with the uniform helpers the labs need.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        Streams::new(seed).stream(0)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        // Multiply-shift; bias is ~n/2^64, irrelevant at our sample counts.
        ((self.inner.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Uniform point on the torus of the given dimension.
    pub fn torus_point(&mut self, dim: usize) -> TorusPoint {
        let mut c = [0.0; crate::torus::MAX_DIM];
        for x in c.iter_mut().take(dim) {
            *x = self.uniform();
        }
        TorusPoint::new(&c[..dim])
    }

    /// Uniform vector in the Euclidean ball of radius `r` in `dim` ambient
    /// coordinates, by rejection from the cube.
    pub fn in_ball(&mut self, dim: usize, r: f64) -> TangentVector {
        loop {
            let mut c = [0.0; crate::torus::MAX_DIM];
            let mut n2 = 0.0;
            for x in c.iter_mut().take(dim) {
                *x = self.uniform_in(-1.0, 1.0);
                n2 += *x * *x;
            }
            if n2 <= 1.0 {
                let mut v = TangentVector::new(&c[..dim]);
                v.scale_mut(r);
                return v;
            }
        }
    }

    /// Uniform unit vector in `dim` ambient coordinates.
    pub fn unit_vector(&mut self, dim: usize) -> TangentVector {
        loop {
            let v = self.in_ball(dim, 1.0);
            let n = v.norm();
            if n > 1e-3 {
                let mut u = v;
                u.scale_mut(1.0 / n);
                return u;
            }
        }
    }
}
