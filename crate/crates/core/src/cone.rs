//! Cone fields over a fixed splitting, the graph metric between cone
//! subspaces, restricted inverse norms, and determinant distortion along
//! orbits.
//!
//! A cone of width `a` over the splitting `E^s (+) F` consists of the vectors
//! `v = v_s + v_c` with `||v_s|| <= a ||v_c||`. The splitting is a global
//! object on the flat torus (tangent spaces are canonically identified), so
//! one [`ConeSpec`] describes the whole cone field.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{op_norm_rect, SmallMatrix};
use crate::model::Model;
use crate::rng::{Rng, Streams};
use crate::stats::nelder_mead;
use crate::subspace::{wedge_determinant, Subspace};
use crate::torus::{TangentVector, TorusPoint, MAX_DIM};

/// A constant-splitting cone field: stable part `E^s`, center part `F`,
/// width `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    stable: Subspace,
    center: Subspace,
    width: f64,
    /// Inverse of the column matrix [stable basis | center basis]; maps a
    /// vector to its oblique coordinates in the splitting.
    coords: SmallMatrix,
}

impl ConeSpec {
    pub fn new(stable: Subspace, center: Subspace, width: f64) -> Result<Self> {
        let amb = stable.ambient_dim();
        if center.ambient_dim() != amb {
            return Err(Error::DimensionMismatch { expected: amb, got: center.ambient_dim() });
        }
        if stable.dim() + center.dim() != amb {
            return Err(Error::InvalidInput("splitting must span the tangent space"));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidInput("cone width must be positive and finite"));
        }
        let mut cols = SmallMatrix::zeros(amb);
        for (j, s) in stable.basis().iter().enumerate() {
            for i in 0..amb {
                cols.set(i, j, s.comp(i));
            }
        }
        for (j, c) in center.basis().iter().enumerate() {
            for i in 0..amb {
                cols.set(i, stable.dim() + j, c.comp(i));
            }
        }
        let coords = cols.inverse().map_err(|_| Error::InvalidInput("splitting is degenerate"))?;
        Ok(ConeSpec { stable, center, width, coords })
    }

    pub fn ambient_dim(&self) -> usize {
        self.stable.ambient_dim()
    }

    pub fn stable(&self) -> &Subspace {
        &self.stable
    }

    pub fn center(&self) -> &Subspace {
        &self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// A copy of this cone with a different width.
    pub fn with_width(&self, width: f64) -> Result<ConeSpec> {
        ConeSpec::new(self.stable, self.center, width)
    }

    /// Split `v` into its stable and center components (oblique projection
    /// along the splitting).
    pub fn decompose(&self, v: &TangentVector) -> (TangentVector, TangentVector) {
        let coords = self.coords.apply(v);
        let k = self.stable.dim();
        let mut vs = TangentVector::zero(v.dim());
        for (j, b) in self.stable.basis().iter().enumerate() {
            vs = vs.axpy(coords.comp(j), b);
        }
        let mut vc = TangentVector::zero(v.dim());
        for (j, b) in self.center.basis().iter().enumerate() {
            vc = vc.axpy(coords.comp(k + j), b);
        }
        (vs, vc)
    }

    /// `a ||v_c|| - ||v_s||`; nonnegative iff `v` lies in the cone.
    pub fn membership_margin(&self, v: &TangentVector) -> f64 {
        let (vs, vc) = self.decompose(v);
        self.width * vc.norm() - vs.norm()
    }

    pub fn contains(&self, v: &TangentVector) -> bool {
        self.membership_margin(v) >= 0.0
    }

    /// Random vector in the cone: unit center direction plus a stable offset
    /// of norm `width * radial` (so `radial = 1` samples the boundary).
    pub fn random_vector(&self, rng: &mut Rng, radial: f64) -> TangentVector {
        let d = self.center.dim();
        let k = self.stable.dim();
        let uc = if d == 1 {
            let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
            self.center.basis()[0].scaled(sign)
        } else {
            let coeffs = rng.unit_vector(d);
            self.center.combination(coeffs.components())
        };
        let off = if k == 1 {
            let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
            self.stable.basis()[0].scaled(sign * self.width * radial)
        } else {
            let coeffs = rng.unit_vector(k);
            self.stable.combination(coeffs.components()).scaled(self.width * radial)
        };
        uc.add(&off)
    }

    /// Random `d`-dimensional subspace inside the cone, built as the graph of
    /// a random map `F -> E^s` of operator norm `width * norm_fraction`.
    pub fn random_subspace(&self, rng: &mut Rng, norm_fraction: f64) -> Subspace {
        let d = self.center.dim();
        let k = self.stable.dim();
        let mut l = [[0.0; MAX_DIM]; MAX_DIM];
        for row in l.iter_mut().take(k) {
            for x in row.iter_mut().take(d) {
                *x = rng.uniform_in(-1.0, 1.0);
            }
        }
        let norm = op_norm_rect(&l, k, d);
        let scale = if norm > 1e-300 { self.width * norm_fraction / norm } else { 0.0 };
        let mut basis: Vec<TangentVector> = Vec::with_capacity(d);
        for (j, c) in self.center.basis().iter().enumerate() {
            let mut v = *c;
            for (r, s) in self.stable.basis().iter().enumerate() {
                v = v.axpy(scale * l[r][j], s);
            }
            basis.push(v);
        }
        Subspace::orthonormalized(&basis).expect("graph basis cannot be degenerate")
    }
}

/// The linear map `L: reference -> E^s` whose graph is a given subspace,
/// stored in the bases of the reference and stable frames.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphRepresentation {
    reference: Subspace,
    stable: Subspace,
    /// `stable_dim x ref_dim` block.
    map: [[f64; MAX_DIM]; MAX_DIM],
}

impl GraphRepresentation {
    /// Represent `target` as a graph over `reference` with offsets in the
    /// stable part of `splitting`. Fails with a degeneracy error when
    /// `target` meets the stable subspace.
    pub fn graph_of(
        target: &Subspace,
        reference: &Subspace,
        splitting: &ConeSpec,
    ) -> Result<GraphRepresentation> {
        let amb = splitting.ambient_dim();
        let d = reference.dim();
        let k = splitting.stable.dim();
        if target.dim() != d || target.ambient_dim() != amb || reference.ambient_dim() != amb {
            return Err(Error::DimensionMismatch { expected: d, got: target.dim() });
        }
        // Coordinates of each target basis vector in [reference | stable].
        let mut cols = SmallMatrix::zeros(amb);
        for (j, b) in reference.basis().iter().enumerate() {
            for i in 0..amb {
                cols.set(i, j, b.comp(i));
            }
        }
        for (j, s) in splitting.stable.basis().iter().enumerate() {
            for i in 0..amb {
                cols.set(i, d + j, s.comp(i));
            }
        }
        let inv = cols.inverse().map_err(|_| Error::DegenerateSubspace)?;
        let mut alpha = SmallMatrix::zeros(d);
        let mut beta = [[0.0; MAX_DIM]; MAX_DIM];
        for (j, t) in target.basis().iter().enumerate() {
            let coords = inv.apply(t);
            for i in 0..d {
                alpha.set(i, j, coords.comp(i));
            }
            for r in 0..k {
                beta[r][j] = coords.comp(d + r);
            }
        }
        if alpha.det().abs() < 1e-12 {
            return Err(Error::DegenerateSubspace);
        }
        let alpha_inv = alpha.inverse().map_err(|_| Error::DegenerateSubspace)?;
        // L = beta * alpha^{-1}
        let mut map = [[0.0; MAX_DIM]; MAX_DIM];
        for (r, beta_row) in beta.iter().enumerate().take(k) {
            for j in 0..d {
                let mut s = 0.0;
                for (m, &b) in beta_row.iter().enumerate().take(d) {
                    s += b * alpha_inv.get(m, j);
                }
                map[r][j] = s;
            }
        }
        Ok(GraphRepresentation { reference: *reference, stable: splitting.stable, map })
    }

    /// Operator norm of the graph map (largest singular value).
    pub fn norm(&self) -> f64 {
        op_norm_rect(&self.map, self.stable.dim(), self.reference.dim())
    }

    /// Reassemble the represented subspace from the graph.
    pub fn to_subspace(&self) -> Result<Subspace> {
        let d = self.reference.dim();
        let k = self.stable.dim();
        let mut basis: Vec<TangentVector> = Vec::with_capacity(d);
        for j in 0..d {
            let mut v = *self.reference.basis_vector(j);
            for r in 0..k {
                v = v.axpy(self.map[r][j], self.stable.basis_vector(r));
            }
            basis.push(v);
        }
        Subspace::orthonormalized(&basis)
    }
}

/// Graph distance between two cone subspaces:
/// `theta(F1, F2) = max(||L_{F1}||, ||L_{F2}||)` where each subspace is the
/// graph of a map from the other into `E^s`. Zero iff the subspaces coincide.
pub fn theta_distance(f1: &Subspace, f2: &Subspace, splitting: &ConeSpec) -> Result<f64> {
    let l2 = GraphRepresentation::graph_of(f2, f1, splitting)?;
    let l1 = GraphRepresentation::graph_of(f1, f2, splitting)?;
    Ok(l1.norm().max(l2.norm()))
}

/// Graph norm of a subspace over the cone's center; `Ok(norm)` with
/// `norm <= width + tol` means the subspace lies inside the cone.
pub fn graph_norm_over_center(f: &Subspace, cone: &ConeSpec) -> Result<f64> {
    Ok(GraphRepresentation::graph_of(f, cone.center(), cone)?.norm())
}

/// Check `F` lies in the cone (every vector satisfies the width inequality).
pub fn subspace_in_cone(f: &Subspace, cone: &ConeSpec) -> bool {
    match graph_norm_over_center(f, cone) {
        Ok(n) => n <= cone.width() * (1.0 + 1e-9) + 1e-12,
        Err(_) => false,
    }
}

/// `||(Df(x)|_{C(x)})^{-1}||`: the supremum over nonzero `v` in the cone of
/// `||v|| / ||Df(x) v||`.
pub fn restricted_inverse_norm(model: &Model, x: &TorusPoint, cone: &ConeSpec) -> Result<f64> {
    let df = model.derivative(x);
    restricted_inverse_norm_of(&df, cone)
}

/// Same computation for an explicit derivative matrix.
///
/// For a one-dimensional stable part and center dimension at most two the
/// stable offset is maximized in closed form for each center direction and
/// only the center angle is scanned (512 points, then golden-section
/// refinement); otherwise a coarse grid over the cone sphere plus
/// Nelder-Mead refinement is used.
pub fn restricted_inverse_norm_of(df: &SmallMatrix, cone: &ConeSpec) -> Result<f64> {
    if df.det().abs() < 1e-12 {
        return Err(Error::SingularMatrix { det: df.det() });
    }
    let d = cone.center().dim();
    let k = cone.stable().dim();
    let value = if k == 1 && d <= 2 {
        semi_exact_inverse_norm(df, cone)
    } else {
        grid_nm_inverse_norm(df, cone)
    };
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::NumericalFailure { what: "cone inverse norm optimization", value });
    }
    Ok(value)
}

/// Ratio maximized over the cone: `||v||^2 / ||Df v||^2` for
/// `v = u_c(angles) + offset`.
fn ratio_sq(df: &SmallMatrix, v: &TangentVector) -> f64 {
    let img = df.apply(v);
    v.dot(v) / img.dot(&img)
}

/// Closed-form stable offset: for fixed unit center direction `b` and unit
/// stable direction `s`, the critical offsets of the ratio solve
/// `beta eta^2 + (alpha - gamma) eta - beta = 0` where `alpha = ||Ab||^2`,
/// `beta = <Ab, As>`, `gamma = ||As||^2`.
fn best_ratio_for_center_dir(df: &SmallMatrix, cone: &ConeSpec, b: &TangentVector) -> f64 {
    let s = cone.stable().basis_vector(0);
    let a = cone.width();
    let ab = df.apply(b);
    let as_ = df.apply(s);
    let alpha = ab.dot(&ab);
    let beta = ab.dot(&as_);
    let gamma = as_.dot(&as_);
    let mut best = 0.0f64;
    let mut consider = |eta: f64| {
        let denom = alpha + 2.0 * beta * eta + gamma * eta * eta;
        if denom > 0.0 {
            let r = (1.0 + eta * eta) / denom;
            if r > best {
                best = r;
            }
        }
    };
    consider(-a);
    consider(a);
    if beta.abs() > 1e-300 {
        let disc = (alpha - gamma) * (alpha - gamma) + 4.0 * beta * beta;
        let sq = disc.sqrt();
        for root in [(-(alpha - gamma) + sq) / (2.0 * beta), (-(alpha - gamma) - sq) / (2.0 * beta)]
        {
            if root.abs() <= a {
                consider(root);
            }
        }
    } else {
        consider(0.0);
    }
    best
}

fn semi_exact_inverse_norm(df: &SmallMatrix, cone: &ConeSpec) -> f64 {
    let d = cone.center().dim();
    if d == 1 {
        let b = cone.center().basis()[0];
        return best_ratio_for_center_dir(df, cone, &b).sqrt();
    }
    // d == 2: scan the center circle, refine the best angle by golden section.
    let center_dir = |t: f64| -> TangentVector {
        cone.center().basis()[0].scaled(t.cos()).axpy(t.sin(), &cone.center().basis()[1])
    };
    let objective = |t: f64| best_ratio_for_center_dir(df, cone, &center_dir(t));
    let n_scan = 512;
    let mut best_t = 0.0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..n_scan {
        let t = core::f64::consts::PI * i as f64 / n_scan as f64;
        let v = objective(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let h = core::f64::consts::PI / n_scan as f64;
    let (mut lo, mut hi) = (best_t - h, best_t + h);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = objective(x1);
        }
    }
    best.max(f1).max(f2).sqrt()
}

fn grid_nm_inverse_norm(df: &SmallMatrix, cone: &ConeSpec) -> f64 {
    let d = cone.center().dim();
    let k = cone.stable().dim();
    let a = cone.width();
    // Parameters: d-1 center angles, then stable offset coordinates mapped
    // through sin to keep the offset inside the width ball smoothly.
    let n_params = (d - 1) + k;
    let vector_at = |p: &[f64]| -> TangentVector {
        let uc = match d {
            1 => cone.center().basis()[0],
            2 => cone.center().basis()[0].scaled(p[0].cos()).axpy(p[0].sin(), &cone.center().basis()[1]),
            _ => {
                // d == 3: spherical angles.
                let (t, ph) = (p[0], p[1]);
                cone.center().basis()[0]
                    .scaled(t.cos())
                    .axpy(t.sin() * ph.cos(), &cone.center().basis()[1])
                    .axpy(t.sin() * ph.sin(), &cone.center().basis()[2])
            }
        };
        let mut v = uc;
        let off_params = &p[d - 1..];
        // Scale a raw offset cube point into the width ball.
        let mut raw = [0.0; MAX_DIM];
        let mut norm2 = 0.0;
        for (i, &q) in off_params.iter().enumerate() {
            raw[i] = q.sin();
            norm2 += raw[i] * raw[i];
        }
        let norm = norm2.sqrt();
        let scale = if norm > 1.0 { a / norm } else { a };
        for (i, s) in cone.stable().basis().iter().enumerate() {
            v = v.axpy(scale * raw[i], s);
        }
        v
    };
    let grid_per_dim: usize = match n_params {
        1 => 512,
        2 => 64,
        _ => 24,
    };
    let mut best_p = vec![0.0; n_params];
    let mut best = f64::NEG_INFINITY;
    let total = grid_per_dim.pow(n_params as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut p = vec![0.0; n_params];
        for (j, slot) in p.iter_mut().enumerate() {
            let t = (rem % grid_per_dim) as f64 / grid_per_dim as f64;
            rem /= grid_per_dim;
            // Angles range over pi (antipodal symmetry), offsets over a full sine period.
            *slot = if j < d - 1 { core::f64::consts::PI * t } else { core::f64::consts::TAU * t };
        }
        let r = ratio_sq(df, &vector_at(&p));
        if r > best {
            best = r;
            best_p = p;
        }
    }
    let (_, neg) = nelder_mead(
        |p| -ratio_sq(df, &vector_at(p)),
        &best_p,
        0.5 / grid_per_dim as f64,
        200,
    );
    (-neg).max(best).sqrt()
}

/// Brute-force check of the restricted inverse norm by dense sampling of
/// cone directions. Intended as a test oracle, not for production use.
pub fn dense_inverse_norm_oracle(
    df: &SmallMatrix,
    cone: &ConeSpec,
    samples: usize,
    rng: &mut Rng,
) -> f64 {
    let mut best = 0.0f64;
    let d = cone.center().dim();
    let k = cone.stable().dim();
    if d == 1 && k == 1 {
        // Dense 1-D sweep of the stable offset.
        let b = cone.center().basis()[0];
        let s = cone.stable().basis_vector(0);
        for i in 0..samples {
            let eta = cone.width() * (2.0 * i as f64 / (samples - 1) as f64 - 1.0);
            best = best.max(ratio_sq(df, &b.axpy(eta, s)));
        }
    } else if d == 2 && k == 1 {
        // Dense sweep of the center circle with the exact stable offset.
        for i in 0..samples {
            let t = core::f64::consts::PI * i as f64 / samples as f64;
            let b = cone.center().basis()[0].scaled(t.cos()).axpy(t.sin(), &cone.center().basis()[1]);
            best = best.max(best_ratio_for_center_dir(df, cone, &b));
        }
    } else {
        for _ in 0..samples {
            let radial = rng.uniform();
            let v = cone.random_vector(rng, radial);
            best = best.max(ratio_sq(df, &v));
        }
    }
    best.sqrt()
}

/// Report from sampling the forward invariance `Df(x) C(x) <= C(f(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub samples: usize,
    pub min_margin: f64,
    pub worst_point: TorusPoint,
    pub pass: bool,
}

/// Sample cone-boundary (and some interior) vectors at random points and
/// report the minimum invariance margin `a ||(Df v)_c|| - ||(Df v)_s||`.
pub fn cone_invariance_check(
    model: &Model,
    cone: &ConeSpec,
    samples: usize,
    seed: u64,
) -> InvarianceReport {
    let streams = Streams::new(seed);
    let mut rng = streams.stream(0);
    let dim = model.dim();
    let mut min_margin = f64::INFINITY;
    let mut worst = TorusPoint::origin(dim);
    for i in 0..samples {
        let x = rng.torus_point(dim);
        let df = model.derivative(&x);
        // Boundary vectors are the binding case; mix in interior ones anyway.
        let radial = if i % 4 == 0 { rng.uniform() } else { 1.0 };
        let v = cone.random_vector(&mut rng, radial);
        let margin = cone.membership_margin(&df.apply(&v));
        if margin < min_margin {
            min_margin = margin;
            worst = x;
        }
    }
    InvarianceReport { samples, min_margin, worst_point: worst, pass: min_margin > 0.0 }
}

/// Cumulative restricted determinants and pushed frames of a subspace along
/// an orbit.
#[derive(Debug, Clone)]
pub struct SubspaceCocycle {
    /// `log |det Df^i(x)|_F|` for `i = 1..=n`.
    pub log_dets: Vec<f64>,
    /// Frames `Df^i(x) F` (orthonormalized), `i = 0..=n`.
    pub frames: Vec<Subspace>,
}

/// Push `f` along the orbit of `x`, accumulating `log |det Df^i|_F|` in the
/// log domain step by step (the wedge cocycle identity makes this exact).
pub fn subspace_cocycle(model: &Model, x: &TorusPoint, f: &Subspace, n: usize) -> Result<SubspaceCocycle> {
    let mut frames = Vec::with_capacity(n + 1);
    let mut log_dets = Vec::with_capacity(n);
    let mut frame = *f;
    let mut point = *x;
    let mut acc = 0.0;
    frames.push(frame);
    for _ in 0..n {
        let df = model.derivative(&point);
        let step = wedge_determinant(&df, &frame)?;
        if step <= 0.0 {
            return Err(Error::NumericalFailure { what: "degenerate wedge along orbit", value: step });
        }
        acc += step.ln();
        log_dets.push(acc);
        frame = frame.pushforward(&df)?;
        frames.push(frame);
        point = model.eval(&point);
    }
    Ok(SubspaceCocycle { log_dets, frames })
}

/// `|det(Df^n(x)|_{F2})| / |det(Df^n(x)|_{F1})|`, accumulated in the log
/// domain. Both subspaces must lie in the cone at `x`.
pub fn det_distortion_ratio(
    model: &Model,
    x: &TorusPoint,
    f1: &Subspace,
    f2: &Subspace,
    cone: &ConeSpec,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("distortion ratio needs n >= 1"));
    }
    if !subspace_in_cone(f1, cone) || !subspace_in_cone(f2, cone) {
        return Err(Error::InvalidInput("subspaces must lie inside the cone"));
    }
    let c1 = subspace_cocycle(model, x, f1, n)?;
    let c2 = subspace_cocycle(model, x, f2, n)?;
    Ok((c2.log_dets[n - 1] - c1.log_dets[n - 1]).exp())
}

/// The sequence `theta_{f^i(x)}(Df^i F1, Df^i F2)` for `i = 0..=n`.
pub fn theta_contraction_factor(
    model: &Model,
    x: &TorusPoint,
    f1: &Subspace,
    f2: &Subspace,
    cone: &ConeSpec,
    n: usize,
) -> Result<Vec<f64>> {
    let c1 = subspace_cocycle(model, x, f1, n)?;
    let c2 = subspace_cocycle(model, x, f2, n)?;
    let mut thetas = Vec::with_capacity(n + 1);
    for i in 0..=n {
        thetas.push(theta_distance(&c1.frames[i], &c2.frames[i], cone)?);
    }
    Ok(thetas)
}

/// Empirical domination constant: the sampled supremum of
/// `||Df(x) v|| * ||v'|| / ||Df(x) v'||` over unit stable `v` and cone
/// vectors `v'`. For a linear model with one stable direction this equals
/// `|lambda_s| * ||(A|_C)^{-1}||`.
pub fn domination_constant(model: &Model, cone: &ConeSpec, samples: usize, seed: u64) -> Result<f64> {
    let streams = Streams::new(seed);
    let mut rng = streams.stream(1);
    let dim = model.dim();
    let mut lambda = 0.0f64;
    for _ in 0..samples {
        let x = rng.torus_point(dim);
        let df = model.derivative(&x);
        let stable_exp = cone
            .stable()
            .basis()
            .iter()
            .map(|s| df.apply(s).norm())
            .fold(0.0, f64::max);
        let inv = restricted_inverse_norm_of(&df, cone)?;
        lambda = lambda.max(stable_exp * inv);
    }
    Ok(lambda)
}
