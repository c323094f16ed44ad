//! Built-in non-singular endomorphisms of the torus.
//!
//! Two families are provided:
//!
//! - [`LinearAnosov`]: `x -> A x mod 1` for an integer hyperbolic matrix `A`
//!   with `|det A| >= 1`. The map is a `|det A|`-to-one covering; its
//!   stable/unstable splitting is computed at construction.
//! - [`DerivedAnosov`]: a local isotopy of a 3-dimensional linear model with
//!   a two-dimensional expanding block. Inside a ball `B(p, delta)` around a
//!   fixed point, the weakest expanding eigendirection is rescaled from its
//!   eigenvalue toward a target `rho` with `|rho| < 1`, so the fixed point
//!   loses one expanding direction while the cone field around the expanding
//!   plane stays forward invariant and area expanding.
//!
//! The isotopy uses the bump `s(r) = (1 - (r/delta)^2)^2` on `r < delta`,
//! zero outside, applied along the weak eigendirection in the (global)
//! eigenbasis of the linear part. The bump prescribes only the endpoint
//! derivative data; intermediate `t` interpolates linearly, which is one
//! admissible realization of the isotopy.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::cone::{cone_invariance_check, restricted_inverse_norm_of, ConeSpec};
use crate::error::{Error, Result};
use crate::linalg::{Complex, SmallMatrix};
use crate::rng::Rng;
use crate::subspace::Subspace;
use crate::torus::{torus_distance_unchecked, TangentVector, TorusPoint, MAX_DIM};

/// Default cone width used for construction-time validation and for the
/// cached `c_max` of linear models.
pub const DEFAULT_CONE_WIDTH: f64 = 0.1;

/// Eigenvalue moduli closer to 1 than this reject the matrix as
/// non-hyperbolic.
pub const HYPERBOLICITY_TOL: f64 = 1e-9;

/// A hyperbolic toral endomorphism `x -> A x mod 1`.
#[derive(Debug, Clone)]
pub struct LinearAnosov {
    dim: usize,
    matrix: SmallMatrix,
    inverse: SmallMatrix,
    eigenvalues: Vec<Complex>,
    stable: Option<Subspace>,
    unstable: Option<Subspace>,
    degree: usize,
    /// Largest `c` such that every time is a `c`-cone-hyperbolic time for
    /// the default cone (width [`DEFAULT_CONE_WIDTH`] around the unstable
    /// space); `None` when the model has no stable direction.
    c_max: Option<f64>,
}

impl LinearAnosov {
    pub fn new(rows: &[&[i64]]) -> Result<Self> {
        let dim = rows.len();
        if !(1..=MAX_DIM).contains(&dim) || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput("matrix must be square with dimension 1..=4"));
        }
        let mut matrix = SmallMatrix::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                matrix.set(i, j, x as f64);
            }
        }
        let det = matrix.det();
        if det.abs().round() < 1.0 {
            return Err(Error::InvalidInput("|det A| must be at least 1"));
        }
        let eigenvalues = matrix.eigenvalues();
        for ev in &eigenvalues {
            if (ev.modulus() - 1.0).abs() < HYPERBOLICITY_TOL {
                return Err(Error::NotHyperbolic { modulus: ev.modulus() });
            }
        }
        let inverse = matrix.inverse()?;
        let unstable_dim = eigenvalues.iter().filter(|e| e.modulus() > 1.0).count();
        let stable_dim = dim - unstable_dim;
        let unstable = if unstable_dim > 0 {
            Some(invariant_subspace(&matrix, unstable_dim)?)
        } else {
            None
        };
        let stable = if stable_dim > 0 {
            Some(invariant_subspace(&inverse, stable_dim)?)
        } else {
            None
        };
        let degree = det.abs().round() as usize;
        let mut model = LinearAnosov {
            dim,
            matrix,
            inverse,
            eigenvalues,
            stable,
            unstable,
            degree,
            c_max: None,
        };
        if let (Some(_), Some(_)) = (&model.stable, &model.unstable) {
            let cone = model.cone(DEFAULT_CONE_WIDTH)?;
            let inv_norm = restricted_inverse_norm_of(&model.matrix, &cone)?;
            if inv_norm < 1.0 {
                model.c_max = Some(-inv_norm.ln());
            }
        }
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &SmallMatrix {
        &self.matrix
    }

    pub fn matrix_inverse(&self) -> &SmallMatrix {
        &self.inverse
    }

    /// Eigenvalues sorted by decreasing modulus.
    pub fn eigenvalues(&self) -> &[Complex] {
        &self.eigenvalues
    }

    pub fn unstable(&self) -> Option<&Subspace> {
        self.unstable.as_ref()
    }

    pub fn stable(&self) -> Option<&Subspace> {
        self.stable.as_ref()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn c_max(&self) -> Option<f64> {
        self.c_max
    }

    /// Cone of the given width centered on the unstable space.
    pub fn cone(&self, width: f64) -> Result<ConeSpec> {
        match (&self.stable, &self.unstable) {
            (Some(s), Some(u)) => ConeSpec::new(*s, *u, width),
            _ => Err(Error::InvalidInput("model has no stable/unstable splitting")),
        }
    }

    pub fn eval(&self, x: &TorusPoint) -> TorusPoint {
        let v = TangentVector::new(x.coords());
        TorusPoint::new(self.matrix.apply(&v).components())
    }

    /// Moduli of the eigenvalues outside the unit circle, descending.
    pub fn unstable_moduli(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e.modulus()).filter(|m| *m > 1.0).collect()
    }

    /// Modulus of the weakest expanding eigenvalue.
    pub fn weakest_expansion(&self) -> Option<f64> {
        self.unstable_moduli().last().copied()
    }

    /// Largest stable eigenvalue modulus.
    pub fn strongest_stable(&self) -> Option<f64> {
        self.eigenvalues
            .iter()
            .map(|e| e.modulus())
            .filter(|m| *m < 1.0)
            .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.max(m))))
    }
}

/// Dominant invariant subspace of dimension `k` by orthogonal subspace
/// iteration from a deterministic pseudo-random frame.
fn invariant_subspace(a: &SmallMatrix, k: usize) -> Result<Subspace> {
    let dim = a.dim();
    let mut rng = Rng::from_seed(0x5EED_1A57);
    let vs: Vec<TangentVector> = (0..k).map(|_| rng.unit_vector(dim)).collect();
    let mut frame = Subspace::orthonormalized(&vs)?;
    for _ in 0..400 {
        frame = frame.pushforward(a)?;
    }
    let image = frame.pushforward(a)?;
    if frame.span_distance(&image) > 1e-9 {
        return Err(Error::Internal("subspace iteration did not converge"));
    }
    Ok(frame)
}

/// Bump profile `s(u) = (1 - u^2)^2` on `u < 1`, with derivative
/// `s'(u) = -4u(1 - u^2)`; both vanish at `u = 1`, so the glued map is
/// `C^1` with Lipschitz derivative.
#[inline]
fn bump(u: f64) -> f64 {
    let w = 1.0 - u * u;
    w * w
}

#[inline]
fn bump_deriv(u: f64) -> f64 {
    -4.0 * u * (1.0 - u * u)
}

/// A locally perturbed linear model on `T^3`; see the module docs.
#[derive(Debug, Clone)]
pub struct DerivedAnosov {
    base: LinearAnosov,
    center: TorusPoint,
    delta: f64,
    isotopy: f64,
    rho: f64,
    stable_value: f64,
    strong_value: f64,
    weak_value: f64,
    weak_dir: TangentVector,
    weak_dual: TangentVector,
    amplitude: f64,
    holder_const: f64,
}

impl DerivedAnosov {
    pub fn base(&self) -> &LinearAnosov {
        &self.base
    }

    pub fn center(&self) -> &TorusPoint {
        &self.center
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn isotopy(&self) -> f64 {
        self.isotopy
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn eigenvalues_at_center(&self) -> (f64, f64, f64) {
        (
            self.stable_value,
            self.strong_value,
            self.weak_value + self.isotopy * (self.rho - self.weak_value),
        )
    }

    fn displacement(&self, x: &TorusPoint) -> TangentVector {
        x.displacement_from(&self.center)
    }

    pub fn eval(&self, x: &TorusPoint) -> TorusPoint {
        let w = self.displacement(x);
        let r2 = w.dot(&w);
        let lin = self.base.eval(x);
        if r2 >= self.delta * self.delta {
            return lin;
        }
        let r = r2.sqrt();
        let s = bump(r / self.delta);
        let xi = w.dot(&self.weak_dual);
        lin.offset(&self.weak_dir.scaled(self.amplitude * s * xi))
    }

    pub fn derivative(&self, x: &TorusPoint) -> SmallMatrix {
        let w = self.displacement(x);
        let r2 = w.dot(&w);
        if r2 >= self.delta * self.delta {
            return *self.base.matrix();
        }
        let r = r2.sqrt();
        let u = r / self.delta;
        let s = bump(u);
        let xi = w.dot(&self.weak_dual);
        // grad(s(r) xi) = s(r) phi + s'(r) (xi / r) w
        let mut grad = self.weak_dual.scaled(s);
        if r > 1e-300 {
            let sp = bump_deriv(u) / self.delta;
            grad = grad.axpy(sp * xi / r, &w);
        }
        let mut m = *self.base.matrix();
        for i in 0..3 {
            for j in 0..3 {
                m.set(i, j, m.get(i, j) + self.amplitude * self.weak_dir.comp(i) * grad.comp(j));
            }
        }
        m
    }
}

/// One of the built-in endomorphisms, behind the evaluation / derivative /
/// inverse-branch contract every experiment consumes.
#[derive(Debug, Clone)]
pub enum Model {
    Linear(LinearAnosov),
    Derived(DerivedAnosov),
}

impl Model {
    /// Linear model from an integer matrix. Rejects matrices with an
    /// eigenvalue of modulus within [`HYPERBOLICITY_TOL`] of 1.
    pub fn linear_anosov(rows: &[&[i64]]) -> Result<Model> {
        Ok(Model::Linear(LinearAnosov::new(rows)?))
    }

    /// The 2-dimensional model with matrix `[[2,1],[1,1]]`.
    pub fn cat2() -> Model {
        Model::linear_anosov(&[&[2, 1], &[1, 1]]).expect("cat map is hyperbolic")
    }

    /// The 3-dimensional block model `[[n,1,0],[1,1,0],[0,0,2]]`: a planar
    /// hyperbolic block times a doubling factor, with a 2-dimensional
    /// expanding splitting.
    pub fn t3_block(n: i64) -> Result<Model> {
        Model::linear_anosov(&[&[n, 1, 0], &[1, 1, 0], &[0, 0, 2]])
    }

    /// Derived model with the default parameters
    /// (`t3_block(2)`, `delta = 0.05`, `t = 1`, `rho = 0.6`).
    pub fn derived_standard() -> Result<Model> {
        let Model::Linear(base) = Model::t3_block(2)? else { unreachable!() };
        Model::derived_anosov(base, 0.05, 1.0, 0.6)
    }

    /// Build the locally perturbed model. The perturbation center is the
    /// fixed point at the origin. Rejects `rho` violating either
    /// admissibility condition, and `delta` for which the forward cone
    /// invariance fails at sampled points.
    pub fn derived_anosov(base: LinearAnosov, delta: f64, t: f64, rho: f64) -> Result<Model> {
        if base.dim() != 3 {
            return Err(Error::InvalidInput("derived model needs a 3-dimensional base"));
        }
        if base.eigenvalues().iter().any(|e| e.im != 0.0) {
            return Err(Error::InvalidInput("derived model needs a real base spectrum"));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidInput("isotopy parameter must lie in [0, 1]"));
        }
        if !(delta > 0.0 && delta <= 0.25) {
            return Err(Error::InvalidInput("perturbation radius must lie in (0, 0.25]"));
        }
        let moduli: Vec<f64> = base.eigenvalues().iter().map(|e| e.re).collect();
        let expanding: Vec<f64> = moduli.iter().copied().filter(|m| m.abs() > 1.0).collect();
        let contracting: Vec<f64> = moduli.iter().copied().filter(|m| m.abs() < 1.0).collect();
        if expanding.len() != 2 || contracting.len() != 1 {
            return Err(Error::InvalidInput(
                "derived model needs a base with 2 expanding and 1 contracting direction",
            ));
        }
        let stable_value = contracting[0];
        // Strong/weak by modulus; eigenvalues() is sorted descending.
        let strong_value = expanding[0];
        let weak_value = expanding[1];
        if rho.abs() >= 1.0 {
            return Err(Error::InvalidPerturbation {
                condition: "target multiplier must contract: |rho| < 1",
                value: rho,
            });
        }
        if (strong_value * rho).abs() <= 1.0 {
            return Err(Error::InvalidPerturbation {
                condition: "center volume expansion: |lambda_u * rho| > 1",
                value: (strong_value * rho).abs(),
            });
        }
        if (stable_value / rho).abs() >= 1.0 {
            return Err(Error::InvalidPerturbation {
                condition: "stable domination: |lambda_s / rho| < 1",
                value: (stable_value / rho).abs(),
            });
        }
        let weak_dir = eigenvector(base.matrix(), weak_value)?;
        let mut weak_dual = eigenvector(&base.matrix().transpose(), weak_value)?;
        let pairing = weak_dual.dot(&weak_dir);
        if pairing.abs() < 1e-9 {
            return Err(Error::Internal("degenerate eigenvector pairing"));
        }
        weak_dual.scale_mut(1.0 / pairing);
        let mut model = DerivedAnosov {
            base,
            center: TorusPoint::origin(3),
            delta,
            isotopy: t,
            rho,
            stable_value,
            strong_value,
            weak_value,
            weak_dir,
            weak_dual,
            amplitude: t * (rho - weak_value),
            holder_const: 0.0,
        };
        model.holder_const = measure_holder_constant(&model);
        let wrapped = Model::Derived(model);
        // Construction-time requirement: the default cone stays forward
        // invariant, sampled inside the perturbed ball where it could fail.
        let cone = wrapped.default_cone(DEFAULT_CONE_WIDTH)?;
        let report = targeted_invariance_check(&wrapped, &cone, 4000, 0xD0_0D);
        if !report.pass {
            return Err(Error::ConeInvarianceViolated { step: 0, margin: report.min_margin });
        }
        Ok(wrapped)
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Linear(m) => m.dim(),
            Model::Derived(d) => d.base.dim(),
        }
    }

    pub fn eval(&self, x: &TorusPoint) -> TorusPoint {
        match self {
            Model::Linear(m) => m.eval(x),
            Model::Derived(d) => d.eval(x),
        }
    }

    pub fn derivative(&self, x: &TorusPoint) -> SmallMatrix {
        match self {
            Model::Linear(m) => *m.matrix(),
            Model::Derived(d) => d.derivative(x),
        }
    }

    /// Number of preimages of a generic point.
    pub fn degree(&self) -> usize {
        match self {
            Model::Linear(m) => m.degree(),
            Model::Derived(d) => d.base.degree(),
        }
    }

    /// Hoelder data `(L, alpha)` of the derivative: `||Df(x) - Df(y)|| <=
    /// L dist(x, y)^alpha`. Exact (0, 1) for linear models; for the derived
    /// model `L` is an empirical envelope sampled at construction.
    pub fn holder(&self) -> (f64, f64) {
        match self {
            Model::Linear(_) => (0.0, 1.0),
            Model::Derived(d) => (d.holder_const, 1.0),
        }
    }

    /// True when the derivative is constant in a neighborhood of `x`, so
    /// per-point cone quantities can be cached.
    pub fn derivative_is_locally_constant(&self, x: &TorusPoint) -> bool {
        match self {
            Model::Linear(_) => true,
            Model::Derived(d) => {
                let w = d.displacement(x);
                w.dot(&w) >= d.delta * d.delta
            }
        }
    }

    pub fn linear_part(&self) -> &LinearAnosov {
        match self {
            Model::Linear(m) => m,
            Model::Derived(d) => &d.base,
        }
    }

    pub fn as_derived(&self) -> Option<&DerivedAnosov> {
        match self {
            Model::Derived(d) => Some(d),
            _ => None,
        }
    }

    /// The cone of the given width around the base unstable space.
    pub fn default_cone(&self, width: f64) -> Result<ConeSpec> {
        self.linear_part().cone(width)
    }
}

fn eigenvector(a: &SmallMatrix, lambda: f64) -> Result<TangentVector> {
    // Inverse iteration with a slightly shifted eigenvalue.
    let dim = a.dim();
    let mut shifted = *a;
    for i in 0..dim {
        shifted.set(i, i, shifted.get(i, i) - lambda - 1e-10);
    }
    let mut v = TangentVector::new(&[0.57, -0.71, 0.41, 0.13][..dim]);
    for _ in 0..4 {
        v = shifted.solve(&v)?;
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Internal("inverse iteration collapsed"));
        }
        v.scale_mut(1.0 / n);
    }
    // Verify it is an eigenvector.
    let residual = a.apply(&v).sub(&v.scaled(lambda)).norm();
    if residual > 1e-6 {
        return Err(Error::Internal("inverse iteration did not converge to an eigenvector"));
    }
    Ok(v)
}

fn measure_holder_constant(model: &DerivedAnosov) -> f64 {
    let mut rng = Rng::from_seed(0x401D3);
    let mut worst: f64 = 0.0;
    for _ in 0..4000 {
        let off1 = rng.in_ball(3, model.delta * 1.2);
        let off2 = rng.in_ball(3, model.delta * 1.2);
        let x = model.center.offset(&off1);
        let y = model.center.offset(&off2);
        let dist = torus_distance_unchecked(&x, &y);
        if dist < 1e-9 {
            continue;
        }
        let dx = model.derivative(&x);
        let dy = model.derivative(&y);
        let mut frob2 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let d = dx.get(i, j) - dy.get(i, j);
                frob2 += d * d;
            }
        }
        worst = worst.max(frob2.sqrt() / dist);
    }
    worst * 1.25
}

/// Invariance check that oversamples the perturbed ball, where failures
/// would occur; elsewhere the derivative equals the linear part.
fn targeted_invariance_check(
    model: &Model,
    cone: &ConeSpec,
    samples: usize,
    seed: u64,
) -> crate::cone::InvarianceReport {
    let global = cone_invariance_check(model, cone, samples / 2, seed);
    let mut min_margin = global.min_margin;
    let mut worst = global.worst_point;
    if let Model::Derived(d) = model {
        let mut rng = Rng::from_seed(seed ^ 0xBA11);
        for i in 0..samples / 2 {
            let x = d.center.offset(&rng.in_ball(3, d.delta));
            let df = model.derivative(&x);
            let radial = if i % 4 == 0 { rng.uniform() } else { 1.0 };
            let v = cone.random_vector(&mut rng, radial);
            let margin = cone.membership_margin(&df.apply(&v));
            if margin < min_margin {
                min_margin = margin;
                worst = x;
            }
        }
    }
    crate::cone::InvarianceReport { samples, min_margin, worst_point: worst, pass: min_margin > 0.0 }
}

/// Local inverse branch: the preimage of `target` nearest to `hint`, found
/// by Newton iteration seeded at `hint` (exact lattice inversion for linear
/// models).
pub fn inverse_branch(
    model: &Model,
    target: &TorusPoint,
    hint: &TorusPoint,
    tol: f64,
) -> Result<TorusPoint> {
    match model {
        Model::Linear(m) => {
            // y = A^{-1}(target + k) with the integer translate selected by
            // the hint: k = round(A hint - target).
            let hv = TangentVector::new(hint.coords());
            let image = m.matrix().apply(&hv);
            let mut lift = TangentVector::zero(m.dim());
            for i in 0..m.dim() {
                let k = (image.comp(i) - target.coord(i)).round();
                lift.set_comp(i, target.coord(i) + k);
            }
            let y = m.matrix_inverse().apply(&lift);
            Ok(TorusPoint::new(y.components()))
        }
        Model::Derived(_) => {
            let mut y = *hint;
            let mut residual = f64::INFINITY;
            for _ in 0..50 {
                let fy = model.eval(&y);
                let disp = fy.displacement_from(target);
                residual = disp.norm();
                if residual <= tol {
                    return Ok(y);
                }
                let df = model.derivative(&y);
                if df.det().abs() < 1e-12 {
                    return Err(Error::SingularMatrix { det: df.det() });
                }
                let step = df.solve(&disp)?;
                y = y.offset(&step.scaled(-1.0));
            }
            Err(Error::NewtonDiverged { steps: 50, residual })
        }
    }
}

/// All preimages of `target`, exactly `degree` distinct points. For the
/// derived model each linear preimage seeds a Newton branch.
pub fn enumerate_preimages(model: &Model, target: &TorusPoint) -> Result<Vec<TorusPoint>> {
    let linear = model.linear_part();
    let dim = linear.dim();
    // Integer translate box covering A [0,1)^dim - target.
    let mut lo = [0i64; MAX_DIM];
    let mut hi = [0i64; MAX_DIM];
    for i in 0..dim {
        let mut row_lo = 0.0;
        let mut row_hi = 0.0;
        for j in 0..dim {
            let a = linear.matrix().get(i, j);
            if a > 0.0 {
                row_hi += a;
            } else {
                row_lo += a;
            }
        }
        lo[i] = (row_lo - target.coord(i)).floor() as i64 - 1;
        hi[i] = (row_hi - target.coord(i)).ceil() as i64 + 1;
    }
    let mut linear_preimages: Vec<TorusPoint> = Vec::new();
    let mut idx = [0i64; MAX_DIM];
    idx[..dim].copy_from_slice(&lo[..dim]);
    'outer: loop {
        let mut lift = TangentVector::zero(dim);
        for i in 0..dim {
            lift.set_comp(i, target.coord(i) + idx[i] as f64);
        }
        let y = TorusPoint::new(linear.matrix_inverse().apply(&lift).components());
        let back = linear.eval(&y);
        if torus_distance_unchecked(&back, target) < 1e-10
            && linear_preimages
                .iter()
                .all(|p| torus_distance_unchecked(p, &y) > 1e-8)
        {
            linear_preimages.push(y);
        }
        // Advance the counter over the box.
        for i in 0..dim {
            idx[i] += 1;
            if idx[i] <= hi[i] {
                continue 'outer;
            }
            idx[i] = lo[i];
        }
        break;
    }
    if linear_preimages.len() != linear.degree() {
        return Err(Error::Internal("preimage enumeration found the wrong count"));
    }
    match model {
        Model::Linear(_) => Ok(linear_preimages),
        Model::Derived(_) => {
            let mut out: Vec<TorusPoint> = Vec::with_capacity(linear_preimages.len());
            for hint in &linear_preimages {
                let y = inverse_branch(model, target, hint, 1e-12)?;
                if torus_distance_unchecked(&model.eval(&y), target) > 1e-10 {
                    return Err(Error::Internal("preimage failed the round trip"));
                }
                if out.iter().any(|p| torus_distance_unchecked(p, &y) < 1e-8) {
                    return Err(Error::Internal("duplicate preimages: degree miscount"));
                }
                out.push(y);
            }
            Ok(out)
        }
    }
}

/// Summary of the model sanity checks run by `validate-model`.
#[derive(Debug, Clone)]
pub struct ModelValidation {
    pub samples: usize,
    pub min_abs_det: f64,
    pub invariance: crate::cone::InvarianceReport,
    pub holder_ok: bool,
    pub locality_ok: bool,
    pub fixed_point_ok: bool,
    pub conditions_ok: bool,
    pub pass: bool,
}

/// Sample-based validation of the model invariants: non-singular derivative,
/// forward cone invariance, the Hoelder envelope of the derivative, exact
/// locality of the perturbation, persistence of the fixed point, and the
/// admissibility conditions of the perturbation parameters.
pub fn validate_model(model: &Model, cone: &ConeSpec, samples: usize, seed: u64) -> ModelValidation {
    let mut rng = Rng::from_seed(seed);
    let dim = model.dim();
    let mut min_abs_det = f64::INFINITY;
    for _ in 0..samples {
        let x = rng.torus_point(dim);
        min_abs_det = min_abs_det.min(model.derivative(&x).det().abs());
    }
    let invariance = targeted_invariance_check(model, cone, samples, seed ^ 0xC0DE);
    let (holder_l, holder_alpha) = model.holder();
    let mut holder_ok = true;
    let mut locality_ok = true;
    let mut fixed_point_ok = true;
    let conditions_ok = true; // violations cannot be constructed
    if let Model::Derived(d) = model {
        min_abs_det = min_abs_det.min({
            // Also sample inside the ball, which uniform sampling misses.
            let mut m = f64::INFINITY;
            for _ in 0..samples / 2 {
                let x = d.center().offset(&rng.in_ball(3, d.delta()));
                m = m.min(model.derivative(&x).det().abs());
            }
            m
        });
        for _ in 0..samples.min(20_000) {
            let x = d.center().offset(&rng.in_ball(3, d.delta() * 1.5));
            let y = d.center().offset(&rng.in_ball(3, d.delta() * 1.5));
            let dist = torus_distance_unchecked(&x, &y);
            if dist < 1e-9 {
                continue;
            }
            let dx = model.derivative(&x);
            let dy = model.derivative(&y);
            let mut frob2 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let diff = dx.get(i, j) - dy.get(i, j);
                    frob2 += diff * diff;
                }
            }
            if frob2.sqrt() > holder_l * dist.powf(holder_alpha) * (1.0 + 1e-9) {
                holder_ok = false;
            }
        }
        // Locality: identical to the base at any sampled point with
        // torus_distance(x, p) >= delta.
        let base_model = Model::Linear(d.base().clone());
        for _ in 0..samples.min(20_000) {
            let x = rng.torus_point(3);
            if torus_distance_unchecked(&x, d.center()) >= d.delta() {
                if model.eval(&x) != base_model.eval(&x) {
                    locality_ok = false;
                }
            }
        }
        // Fixed point persistence over the whole isotopy.
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            if let Ok(Model::Derived(dt)) =
                Model::derived_anosov(d.base().clone(), d.delta(), t, d.rho())
            {
                let image = dt.eval(dt.center());
                if torus_distance_unchecked(&image, dt.center()) > 1e-12 {
                    fixed_point_ok = false;
                }
            }
        }
    }
    let pass = min_abs_det > 1e-12
        && invariance.pass
        && holder_ok
        && locality_ok
        && fixed_point_ok
        && conditions_ok;
    ModelValidation {
        samples,
        min_abs_det,
        invariance,
        holder_ok,
        locality_ok,
        fixed_point_ok,
        conditions_ok,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cat_map_eigen_data() {
        let m = Model::cat2();
        let lin = m.linear_part();
        let golden = (3.0 + 5.0f64.sqrt()) / 2.0;
        assert!((lin.eigenvalues()[0].modulus() - golden).abs() < 1e-9);
        assert!((lin.eigenvalues()[1].modulus() - (3.0 - 5.0f64.sqrt()) / 2.0).abs() < 1e-9);
        assert_eq!(lin.degree(), 1);
        assert_eq!(lin.unstable().unwrap().dim(), 1);
        // Unstable direction is the golden-ratio eigenvector.
        let u = lin.unstable().unwrap().basis()[0];
        let au = lin.matrix().apply(&u);
        assert!(au.sub(&u.scaled(golden)).norm() < 1e-9);
    }

    #[test]
    fn t3_block_eigen_data() {
        let m = Model::t3_block(2).unwrap();
        let lin = m.linear_part();
        let ev: Vec<f64> = lin.eigenvalues().iter().map(|e| e.modulus()).collect();
        assert!((ev[0] - 2.6180339887).abs() < 1e-8);
        assert!((ev[1] - 2.0).abs() < 1e-9);
        assert!((ev[2] - 0.3819660113).abs() < 1e-8);
        assert_eq!(lin.unstable().unwrap().dim(), 2);
        assert_eq!(lin.stable().unwrap().dim(), 1);
        assert_eq!(lin.degree(), 2);
        assert!(lin.c_max().unwrap() > 0.0);
    }

    #[test]
    fn fibonacci_matrix_is_accepted() {
        // [[1,1],[1,0]]: eigenvalue moduli 1.618 and 0.618, det -1.
        let m = Model::linear_anosov(&[&[1, 1], &[1, 0]]).unwrap();
        let ev: Vec<f64> = m.linear_part().eigenvalues().iter().map(|e| e.modulus()).collect();
        assert!((ev[0] - 1.6180339887).abs() < 1e-8);
        assert!((ev[1] - 0.6180339887).abs() < 1e-8);
    }

    #[test]
    fn non_hyperbolic_matrices_are_rejected() {
        // Parabolic: both eigenvalues 1.
        assert!(matches!(
            Model::linear_anosov(&[&[1, 1], &[0, 1]]),
            Err(Error::NotHyperbolic { .. })
        ));
        // Rotation: eigenvalues on the unit circle.
        assert!(matches!(
            Model::linear_anosov(&[&[0, -1], &[1, 0]]),
            Err(Error::NotHyperbolic { .. })
        ));
    }

    #[test]
    fn derived_parameter_gate() {
        let Model::Linear(base) = Model::t3_block(2).unwrap() else { unreachable!() };
        // rho = 0.6: |0.382/0.6| < 1 and |2.618 * 0.6| = 1.571 > 1.
        assert!(Model::derived_anosov(base.clone(), 0.05, 1.0, 0.6).is_ok());
        // rho = 0.3: |2.618 * 0.3| = 0.785 < 1 violates volume expansion.
        let err = Model::derived_anosov(base.clone(), 0.05, 1.0, 0.3).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidPerturbation { condition, .. }
                if condition.contains("volume expansion")
        ));
        // rho = 0.999 with lambda_s/rho fine but |rho| < 1 required: ok here;
        // rho = 1.2 violates the contraction requirement.
        let err = Model::derived_anosov(base, 0.05, 1.0, 1.2).unwrap_err();
        assert!(matches!(err, Error::InvalidPerturbation { .. }));
    }

    #[test]
    fn isotopy_endpoint_matches_base() {
        let Model::Linear(base) = Model::t3_block(2).unwrap() else { unreachable!() };
        let derived = Model::derived_anosov(base.clone(), 0.05, 0.0, 0.6).unwrap();
        let base_model = Model::Linear(base);
        let mut rng = Rng::from_seed(77);
        for _ in 0..100_000 {
            let x = rng.torus_point(3);
            let a = derived.eval(&x);
            let b = base_model.eval(&x);
            assert!(torus_distance_unchecked(&a, &b) < 1e-12);
        }
    }

    #[test]
    fn derived_center_derivative_has_prescribed_eigenvalues() {
        let model = Model::derived_standard().unwrap();
        let d = model.as_derived().unwrap();
        let df = model.derivative(d.center());
        let mut ev: Vec<f64> = df.eigenvalues().iter().map(|e| e.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] - 0.3819660113).abs() < 1e-8, "{ev:?}");
        assert!((ev[1] - 0.6).abs() < 1e-8, "{ev:?}");
        assert!((ev[2] - 2.6180339887).abs() < 1e-8, "{ev:?}");
    }

    #[test]
    fn perturbation_is_local_and_fixes_center() {
        let model = Model::derived_standard().unwrap();
        let d = model.as_derived().unwrap();
        let base_model = Model::Linear(d.base().clone());
        let mut rng = Rng::from_seed(78);
        for _ in 0..20_000 {
            let x = rng.torus_point(3);
            if torus_distance_unchecked(&x, d.center()) >= d.delta() {
                assert_eq!(model.eval(&x), base_model.eval(&x));
            }
        }
        assert!(torus_distance_unchecked(&model.eval(d.center()), d.center()) < 1e-15);
    }

    #[test]
    fn inverse_branch_is_exact_for_linear_models() {
        let model = Model::cat2();
        let mut rng = Rng::from_seed(79);
        for _ in 0..10_000 {
            let y = rng.torus_point(2);
            let target = model.eval(&y);
            let back = inverse_branch(&model, &target, &y, 1e-12).unwrap();
            assert!(torus_distance_unchecked(&back, &y) < 1e-14);
        }
    }

    #[test]
    fn inverse_branch_round_trips_on_derived_model() {
        let model = Model::derived_standard().unwrap();
        let mut rng = Rng::from_seed(80);
        for _ in 0..20_000 {
            let y = rng.torus_point(3);
            let target = model.eval(&y);
            let back = inverse_branch(&model, &target, &y, 1e-12).unwrap();
            assert!(torus_distance_unchecked(&model.eval(&back), &target) < 1e-10);
        }
    }

    #[test]
    fn preimage_counts_match_degree() {
        let cat = Model::cat2();
        let pre = enumerate_preimages(&cat, &TorusPoint::new(&[0.3, 0.7])).unwrap();
        assert_eq!(pre.len(), 1);
        let t3 = Model::t3_block(2).unwrap();
        let pre = enumerate_preimages(&t3, &TorusPoint::origin(3)).unwrap();
        assert_eq!(pre.len(), 2);
        // Includes the origin and (0, 0, 0.5).
        let expected = TorusPoint::new(&[0.0, 0.0, 0.5]);
        assert!(pre.iter().any(|p| torus_distance_unchecked(p, &TorusPoint::origin(3)) < 1e-12));
        assert!(pre.iter().any(|p| torus_distance_unchecked(p, &expected) < 1e-12));
        let derived = Model::derived_standard().unwrap();
        let mut rng = Rng::from_seed(81);
        for _ in 0..200 {
            let target = rng.torus_point(3);
            let pre = enumerate_preimages(&derived, &target).unwrap();
            assert_eq!(pre.len(), 2);
            for p in &pre {
                assert!(torus_distance_unchecked(&derived.eval(p), &target) < 1e-10);
            }
        }
    }

    #[test]
    fn validation_passes_for_builtin_models() {
        for model in [Model::cat2(), Model::t3_block(2).unwrap(), Model::derived_standard().unwrap()]
        {
            let cone = model.default_cone(DEFAULT_CONE_WIDTH).unwrap();
            let report = validate_model(&model, &cone, 5000, 1234);
            assert!(report.pass, "validation failed: {report:?}");
            assert!(report.min_abs_det > 1e-12);
        }
    }

    #[test]
    fn holder_envelope_holds_on_fresh_samples() {
        let model = Model::derived_standard().unwrap();
        let d = model.as_derived().unwrap();
        let (l, alpha) = model.holder();
        assert!(l > 0.0);
        let mut rng = Rng::from_seed(90210);
        for _ in 0..20_000 {
            let x = d.center().offset(&rng.in_ball(3, d.delta() * 1.3));
            let y = d.center().offset(&rng.in_ball(3, d.delta() * 1.3));
            let dist = torus_distance_unchecked(&x, &y);
            if dist < 1e-9 {
                continue;
            }
            let dx = model.derivative(&x);
            let dy = model.derivative(&y);
            let mut frob2 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let diff = dx.get(i, j) - dy.get(i, j);
                    frob2 += diff * diff;
                }
            }
            assert!(frob2.sqrt() <= l * dist.powf(alpha) * (1.0 + 1e-6));
        }
    }
}
