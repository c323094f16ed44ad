//! Empirical invariant measures, Birkhoff averages, Lyapunov spectra, and
//! maximal volume growth along the cone field.
//!
//! The empirical measure is the Cesaro average of the push-forwards of the
//! uniform measure on a disk tangent to the cone, accumulated as a histogram
//! on a regular grid. Sample generation is chunked with one random stream
//! per fixed-size chunk, so parallel and sequential builds produce identical
//! counts.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::cone::{subspace_cocycle, subspace_in_cone, ConeSpec};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::rng::{Rng, Streams};
use crate::subspace::Subspace;
use crate::torus::{TorusPoint, MAX_DIM};

/// Samples per random stream; fixed so that threading cannot change counts.
pub const SRB_CHUNK: usize = 4096;

/// Steps between re-orthonormalizations in the Lyapunov cocycle iteration;
/// the built-in models spread singular values by far less than `e^5` over
/// this window.
pub const REORTH_EVERY: usize = 10;

/// A disk tangent to the cone field: center, radius, and orientation.
#[derive(Debug, Clone)]
pub struct DiskSpec {
    pub center: TorusPoint,
    pub radius: f64,
    pub subspace: Subspace,
}

impl DiskSpec {
    /// Uniform sample on the disk.
    pub fn sample(&self, rng: &mut Rng) -> TorusPoint {
        let coeffs = rng.in_ball(self.subspace.dim(), self.radius);
        self.center.offset(&self.subspace.combination(coeffs.components()))
    }
}

/// Parameters of an empirical-measure build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrbParams {
    /// Cesaro average length (iterates `burn_in .. burn_in + cesaro_len`).
    pub cesaro_len: usize,
    /// Number of initial points drawn on the disk.
    pub samples: usize,
    /// Iterates discarded before accumulation starts.
    pub burn_in: usize,
    /// Bins per axis.
    pub grid: usize,
    pub seed: u64,
}

/// Histogram approximation of the physical measure.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    dim: usize,
    grid: usize,
    masses: Vec<f64>,
    cumulative: Vec<f64>,
    /// Raw counts, kept for stratified error estimates.
    counts: Vec<u64>,
    /// Counts contributed by even-numbered chunks.
    half_counts: Vec<u64>,
    pub samples: usize,
    pub burn_in: usize,
    pub cesaro_len: usize,
    pub seed: u64,
}

impl EmpiricalMeasure {
    pub fn from_counts(
        dim: usize,
        grid: usize,
        counts: Vec<u64>,
        half_counts: Vec<u64>,
        params: &SrbParams,
    ) -> Result<EmpiricalMeasure> {
        let bins = grid.pow(dim as u32);
        if counts.len() != bins || half_counts.len() != bins {
            return Err(Error::InvalidInput("count vector does not match the grid"));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidInput("empty histogram"));
        }
        let masses: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        let mut cumulative = Vec::with_capacity(bins);
        let mut acc = 0.0;
        for &m in &masses {
            acc += m;
            cumulative.push(acc);
        }
        Ok(EmpiricalMeasure {
            dim,
            grid,
            masses,
            cumulative,
            counts,
            half_counts,
            samples: params.samples,
            burn_in: params.burn_in,
            cesaro_len: params.cesaro_len,
            seed: params.seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn bin_index(&self, x: &TorusPoint) -> usize {
        let g = self.grid;
        let mut idx = 0;
        for i in (0..self.dim).rev() {
            let mut k = (x.coord(i) * g as f64) as usize;
            if k >= g {
                k = g - 1;
            }
            idx = idx * g + k;
        }
        idx
    }

    pub fn bin_center(&self, mut idx: usize) -> TorusPoint {
        let g = self.grid;
        let mut c = [0.0; MAX_DIM];
        for slot in c.iter_mut().take(self.dim) {
            let k = idx % g;
            idx /= g;
            *slot = (k as f64 + 0.5) / g as f64;
        }
        TorusPoint::new(&c[..self.dim])
    }

    /// Density with respect to Lebesgue, piecewise constant on bins.
    pub fn density_at(&self, x: &TorusPoint) -> f64 {
        self.masses[self.bin_index(x)] * self.bins() as f64
    }

    /// Extremes of the bin densities (empirical check that the measure is
    /// bounded away from zero and infinity).
    pub fn density_range(&self) -> (f64, f64) {
        let b = self.bins() as f64;
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for &m in &self.masses {
            lo = lo.min(m * b);
            hi = hi.max(m * b);
        }
        (lo, hi)
    }

    /// Total-variation distance to the uniform measure on the grid.
    pub fn tv_to_uniform(&self) -> f64 {
        let u = 1.0 / self.bins() as f64;
        0.5 * self.masses.iter().map(|m| (m - u).abs()).sum::<f64>()
    }

    /// Total-variation distance to another histogram on the same grid.
    pub fn tv_distance(&self, other: &EmpiricalMeasure) -> Result<f64> {
        if self.bins() != other.bins() || self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.bins(), got: other.bins() });
        }
        Ok(0.5
            * self
                .masses
                .iter()
                .zip(&other.masses)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    /// The two half-sample measures (even chunks vs odd chunks), used for
    /// internal noise estimates.
    pub fn halves(&self, params: &SrbParams) -> Result<(EmpiricalMeasure, EmpiricalMeasure)> {
        let odd: Vec<u64> =
            self.counts.iter().zip(&self.half_counts).map(|(&c, &h)| c - h).collect();
        let zero = vec![0u64; self.bins()];
        let a = EmpiricalMeasure::from_counts(
            self.dim,
            self.grid,
            self.half_counts.clone(),
            zero.clone(),
            params,
        )?;
        let b = EmpiricalMeasure::from_counts(self.dim, self.grid, odd, zero, params)?;
        Ok((a, b))
    }

    /// Draw a point distributed as the histogram: bin choice by inverse CDF,
    /// uniform jitter within the bin.
    pub fn sample_point(&self, rng: &mut Rng) -> TorusPoint {
        let u = rng.uniform();
        let idx = match self
            .cumulative
            .binary_search_by(|probe| probe.partial_cmp(&u).unwrap())
        {
            Ok(i) | Err(i) => i.min(self.bins() - 1),
        };
        let center = self.bin_center(idx);
        let g = self.grid as f64;
        let mut c = [0.0; MAX_DIM];
        for i in 0..self.dim {
            c[i] = center.coord(i) + (rng.uniform() - 0.5) / g;
        }
        TorusPoint::new(&c[..self.dim])
    }

    /// Integral of an observable against the histogram (bin centers).
    pub fn integrate<F: Fn(&TorusPoint) -> f64>(&self, phi: F) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .map(|(i, &m)| m * phi(&self.bin_center(i)))
            .sum()
    }
}

/// Histogram counts contributed by one chunk of initial samples.
pub fn srb_counts_chunk(
    model: &Model,
    disk: &DiskSpec,
    params: &SrbParams,
    chunk_id: u64,
    chunk_samples: usize,
) -> Vec<u64> {
    let grid = params.grid;
    let dim = model.dim();
    let bins = grid.pow(dim as u32);
    let mut counts = vec![0u64; bins];
    let streams = Streams::new(params.seed);
    let mut rng = streams.stream(chunk_id);
    for _ in 0..chunk_samples {
        let mut x = disk.sample(&mut rng);
        for _ in 0..params.burn_in {
            x = model.eval(&x);
        }
        for _ in 0..params.cesaro_len {
            // Inline bin computation for the hot loop.
            let mut idx = 0usize;
            for i in (0..dim).rev() {
                let mut k = (x.coord(i) * grid as f64) as usize;
                if k >= grid {
                    k = grid - 1;
                }
                idx = idx * grid + k;
            }
            counts[idx] += 1;
            x = model.eval(&x);
        }
    }
    counts
}

/// Number of fixed-size chunks for a sample budget.
pub fn srb_chunk_count(samples: usize) -> usize {
    samples.div_ceil(SRB_CHUNK)
}

/// Samples processed by chunk `id`.
pub fn srb_chunk_samples(samples: usize, id: usize) -> usize {
    let chunks = srb_chunk_count(samples);
    if id + 1 < chunks {
        SRB_CHUNK
    } else {
        samples - SRB_CHUNK * (chunks - 1)
    }
}

/// Cesaro push-forward measure of the uniform distribution on a disk
/// tangent to the cone. `cone` gates the disk orientation.
pub fn empirical_srb(
    model: &Model,
    disk: &DiskSpec,
    cone: &ConeSpec,
    params: &SrbParams,
) -> Result<EmpiricalMeasure> {
    if disk.subspace.dim() != cone.center().dim() || !subspace_in_cone(&disk.subspace, cone) {
        return Err(Error::InvalidInput("disk is not tangent to the cone field"));
    }
    if params.cesaro_len == 0 || params.samples == 0 {
        return Err(Error::InvalidInput("empty sampling budget"));
    }
    let bins = params.grid.pow(model.dim() as u32);
    let mut counts = vec![0u64; bins];
    let mut half = vec![0u64; bins];
    for id in 0..srb_chunk_count(params.samples) {
        let chunk =
            srb_counts_chunk(model, disk, params, id as u64, srb_chunk_samples(params.samples, id));
        for (i, c) in chunk.iter().enumerate() {
            counts[i] += c;
            if id % 2 == 0 {
                half[i] += c;
            }
        }
    }
    EmpiricalMeasure::from_counts(model.dim(), params.grid, counts, half, params)
}

/// Arithmetic mean of `phi` along the length-`n` orbit of `x`.
pub fn birkhoff_average<F: Fn(&TorusPoint) -> f64>(
    model: &Model,
    x: &TorusPoint,
    phi: F,
    n: usize,
) -> f64 {
    let mut acc = 0.0;
    let mut point = *x;
    for _ in 0..n {
        acc += phi(&point);
        point = model.eval(&point);
    }
    acc / n as f64
}

/// Full Lyapunov spectrum by orthonormalized cocycle iteration, sorted
/// descending. Requires `n >= 1000`.
pub fn lyapunov_spectrum(model: &Model, x: &TorusPoint, n: usize) -> Result<Vec<f64>> {
    if n < 1000 {
        return Err(Error::InvalidInput("Lyapunov estimation needs n >= 1000"));
    }
    let dim = model.dim();
    let mut frame: Vec<crate::torus::TangentVector> =
        (0..dim).map(|i| crate::torus::TangentVector::basis(dim, i)).collect();
    let mut sums = [0.0f64; MAX_DIM];
    let mut point = *x;
    let mut steps_since_orth = 0;
    for _ in 0..n {
        let df = model.derivative(&point);
        for v in frame.iter_mut() {
            *v = df.apply(v);
        }
        steps_since_orth += 1;
        if steps_since_orth == REORTH_EVERY {
            orthonormalize_accumulating(&mut frame, &mut sums)?;
            steps_since_orth = 0;
        }
        point = model.eval(&point);
    }
    if steps_since_orth > 0 {
        orthonormalize_accumulating(&mut frame, &mut sums)?;
    }
    let mut exps: Vec<f64> = sums[..dim].iter().map(|s| s / n as f64).collect();
    exps.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(exps)
}

/// Gram-Schmidt pass that adds the log column norms into `sums` and checks
/// the resulting frame for loss of orthogonality.
fn orthonormalize_accumulating(
    frame: &mut [crate::torus::TangentVector],
    sums: &mut [f64; MAX_DIM],
) -> Result<()> {
    for i in 0..frame.len() {
        let mut v = frame[i];
        for _pass in 0..2 {
            for j in 0..i {
                let proj = v.dot(&frame[j]);
                v = v.axpy(-proj, &frame[j]);
            }
        }
        let norm = v.norm();
        if norm < 1e-300 {
            return Err(Error::Internal("cocycle frame collapsed"));
        }
        v.scale_mut(1.0 / norm);
        frame[i] = v;
        sums[i] += norm.ln();
    }
    // Orthogonality guard between re-orthonormalizations.
    for i in 0..frame.len() {
        for j in 0..i {
            if frame[i].dot(&frame[j]).abs() > 1e-6 {
                return Err(Error::Internal("loss of orthogonality in cocycle iteration"));
            }
        }
    }
    Ok(())
}

/// Per-`n` maximal volume growth over sampled cone subspaces, against the
/// growth of a reference subspace.
#[derive(Debug, Clone)]
pub struct GammaEstimate {
    /// `(1/n) log Gamma_n(x)` for `n = 1..=n_max` (max over candidates).
    pub gamma_rate: Vec<f64>,
    /// `(1/n) log |det Df^n(x)|_{F1}|`.
    pub reference_rate: Vec<f64>,
    /// Final-`n` estimate of the limit.
    pub limit: f64,
    pub subspace_samples: usize,
    /// Empirical envelope `max_n Gamma_n / |det Df^n|_{F1}|`.
    pub k0_envelope: f64,
    /// Cumulative log-determinant curves of every candidate subspace.
    candidate_curves: Vec<Vec<f64>>,
}

impl GammaEstimate {
    /// Sub-multiplicativity over the sampled family: for each split
    /// `(n', m)`, `log G(n'+m) <= log G(n') + log G_shift(m)` where the
    /// shifted maximum runs over the pushforward candidates at `f^{n'}(x)`.
    pub fn check_submultiplicative(&self, splits: &[(usize, usize)]) -> bool {
        let max_at = |n: usize| -> f64 {
            self.candidate_curves.iter().map(|c| c[n - 1]).fold(f64::NEG_INFINITY, f64::max)
        };
        for &(n1, m) in splits {
            let total = n1 + m;
            if total > self.candidate_curves[0].len() {
                continue;
            }
            let lhs = max_at(total);
            let shifted = self
                .candidate_curves
                .iter()
                .map(|c| c[total - 1] - c[n1 - 1])
                .fold(f64::NEG_INFINITY, f64::max);
            if lhs > max_at(n1) + shifted + 1e-9 {
                return false;
            }
        }
        true
    }
}

/// Estimate `Gamma_n(x) = max_F |det Df^n(x)|_F|` over cone subspaces by
/// sampling, with `f1` as the reference; the reported envelope realizes the
/// sandwich `|det Df^n|_{F1}| <= Gamma_n <= K0 |det Df^n|_{F1}|`.
pub fn gamma_sequence(
    model: &Model,
    x: &TorusPoint,
    f1: &Subspace,
    cone: &ConeSpec,
    n_max: usize,
    subspace_samples: usize,
    seed: u64,
) -> Result<GammaEstimate> {
    if !subspace_in_cone(f1, cone) {
        return Err(Error::InvalidInput("reference subspace must lie inside the cone"));
    }
    if n_max == 0 {
        return Err(Error::InvalidInput("need n_max >= 1"));
    }
    let reference = subspace_cocycle(model, x, f1, n_max)?;
    let mut curves: Vec<Vec<f64>> = Vec::with_capacity(subspace_samples + 2);
    curves.push(reference.log_dets.clone());
    curves.push(subspace_cocycle(model, x, cone.center(), n_max)?.log_dets);
    let mut rng = Streams::new(seed).stream(7);
    for _ in 0..subspace_samples {
        let fraction = rng.uniform();
        let f = cone.random_subspace(&mut rng, fraction);
        curves.push(subspace_cocycle(model, x, &f, n_max)?.log_dets);
    }
    let mut gamma_rate = Vec::with_capacity(n_max);
    let mut reference_rate = Vec::with_capacity(n_max);
    let mut k0: f64 = 1.0;
    for n in 1..=n_max {
        let g = curves.iter().map(|c| c[n - 1]).fold(f64::NEG_INFINITY, f64::max);
        gamma_rate.push(g / n as f64);
        reference_rate.push(reference.log_dets[n - 1] / n as f64);
        k0 = k0.max((g - reference.log_dets[n - 1]).exp());
    }
    Ok(GammaEstimate {
        limit: gamma_rate[n_max - 1],
        gamma_rate,
        reference_rate,
        subspace_samples,
        k0_envelope: k0,
        candidate_curves: curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;

    fn unstable_disk(model: &Model, radius: f64) -> DiskSpec {
        let lin = model.linear_part();
        DiskSpec {
            center: TorusPoint::new(&[0.31, 0.57, 0.13][..model.dim()]),
            radius,
            subspace: *lin.unstable().unwrap(),
        }
    }

    #[test]
    fn histogram_mass_is_conserved() {
        let model = Model::cat2();
        let cone = model.default_cone(0.1).unwrap();
        let params = SrbParams { cesaro_len: 50, samples: 2000, burn_in: 10, grid: 16, seed: 7 };
        let mu = empirical_srb(&model, &unstable_disk(&model, 0.4), &cone, &params).unwrap();
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cat_map_histogram_approaches_uniform() {
        let model = Model::cat2();
        let cone = model.default_cone(0.1).unwrap();
        let params =
            SrbParams { cesaro_len: 100, samples: 20_000, burn_in: 30, grid: 32, seed: 11 };
        let mu = empirical_srb(&model, &unstable_disk(&model, 0.45), &cone, &params).unwrap();
        let tv = mu.tv_to_uniform();
        assert!(tv < 0.05, "tv = {tv}");
    }

    #[test]
    fn point_disk_at_short_time_stays_near_the_orbit() {
        // With one sample point and a near-zero radius, all mass sits in the
        // bins traversed by the orbit segment.
        let model = Model::cat2();
        let cone = model.default_cone(0.1).unwrap();
        let params = SrbParams { cesaro_len: 5, samples: 1, burn_in: 0, grid: 32, seed: 3 };
        let disk = DiskSpec {
            center: TorusPoint::new(&[0.2, 0.7]),
            radius: 1e-9,
            subspace: *model.linear_part().unstable().unwrap(),
        };
        let mu = empirical_srb(&model, &disk, &cone, &params).unwrap();
        let occupied = mu.masses().iter().filter(|&&m| m > 0.0).count();
        assert!(occupied <= 5);
        let mut x = disk.center;
        let mut orbit_mass = 0.0;
        for _ in 0..5 {
            orbit_mass += mu.masses()[mu.bin_index(&x)];
            x = model.eval(&x);
        }
        assert!(orbit_mass > 0.999);
    }

    #[test]
    fn seed_stability_within_twice_the_half_split_noise() {
        let model = Model::cat2();
        let cone = model.default_cone(0.1).unwrap();
        let mk = |seed| {
            let params =
                SrbParams { cesaro_len: 60, samples: 30_000, burn_in: 20, grid: 16, seed };
            (empirical_srb(&model, &unstable_disk(&model, 0.45), &cone, &params).unwrap(), params)
        };
        let (a, pa) = mk(101);
        let (b, _) = mk(202);
        let tv_ab = a.tv_distance(&b).unwrap();
        let (h1, h2) = a.halves(&pa).unwrap();
        let tv_half = h1.tv_distance(&h2).unwrap();
        // Halves carry sqrt(2) more noise each, so tv_half ~ sqrt(2) tv_ab.
        assert!(tv_ab < 2.0 * tv_half, "tv_ab {tv_ab} tv_half {tv_half}");
    }

    #[test]
    fn parallel_chunking_is_order_independent() {
        let model = Model::cat2();
        let params = SrbParams { cesaro_len: 20, samples: 9000, burn_in: 5, grid: 8, seed: 55 };
        let disk = unstable_disk(&model, 0.3);
        // Rebuild from chunks in reverse order; counts must match exactly.
        let chunks = srb_chunk_count(params.samples);
        let mut counts = vec![0u64; 64];
        for id in (0..chunks).rev() {
            let c = srb_counts_chunk(
                &model,
                &disk,
                &params,
                id as u64,
                srb_chunk_samples(params.samples, id),
            );
            for (i, v) in c.iter().enumerate() {
                counts[i] += v;
            }
        }
        let cone = model.default_cone(0.1).unwrap();
        let reference = empirical_srb(&model, &disk, &cone, &params).unwrap();
        let total: u64 = counts.iter().sum();
        let masses: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        assert_eq!(masses, reference.masses());
    }

    #[test]
    fn disk_not_tangent_to_cone_is_rejected() {
        let model = Model::cat2();
        let cone = model.default_cone(0.1).unwrap();
        let params = SrbParams { cesaro_len: 10, samples: 10, burn_in: 0, grid: 8, seed: 1 };
        let disk = DiskSpec {
            center: TorusPoint::origin(2),
            radius: 0.1,
            subspace: *cone.stable(),
        };
        assert!(empirical_srb(&model, &disk, &cone, &params).is_err());
    }

    #[test]
    fn birkhoff_constant_observable_is_exact() {
        let model = Model::cat2();
        let x = TorusPoint::new(&[0.123, 0.456]);
        for n in [1, 10, 1000] {
            let avg = birkhoff_average(&model, &x, |_| 1.0, n);
            assert_eq!(avg, 1.0);
        }
    }

    #[test]
    fn birkhoff_at_fixed_point_returns_the_value() {
        let model = Model::cat2();
        let p = TorusPoint::origin(2);
        let phi = |x: &TorusPoint| (core::f64::consts::TAU * x.coord(0)).cos();
        for n in [1, 7, 100] {
            assert_eq!(birkhoff_average(&model, &p, phi, n), phi(&p));
        }
    }

    #[test]
    fn birkhoff_average_of_character_vanishes_for_cat_map() {
        let model = Model::cat2();
        let x = TorusPoint::new(&[0.2137, 0.5926]);
        let phi = |x: &TorusPoint| (core::f64::consts::TAU * x.coord(0)).cos();
        let avg = birkhoff_average(&model, &x, phi, 1_000_000);
        assert!(avg.abs() < 3e-3, "avg = {avg}");
    }

    #[test]
    fn lyapunov_spectrum_of_cat_map() {
        let model = Model::cat2();
        let x = TorusPoint::new(&[0.37, 0.81]);
        let exps = lyapunov_spectrum(&model, &x, 10_000).unwrap();
        let golden = ((3.0 + 5.0f64.sqrt()) / 2.0).ln();
        assert!((exps[0] - golden).abs() < 1e-3, "{exps:?}");
        assert!((exps[1] + golden).abs() < 1e-3, "{exps:?}");
    }

    #[test]
    fn lyapunov_spectrum_of_t3_block() {
        let model = Model::t3_block(2).unwrap();
        let x = TorusPoint::new(&[0.37, 0.81, 0.29]);
        let exps = lyapunov_spectrum(&model, &x, 10_000).unwrap();
        let golden = ((3.0 + 5.0f64.sqrt()) / 2.0).ln();
        assert!((exps[0] - golden).abs() < 1e-3, "{exps:?}");
        assert!((exps[1] - 2.0f64.ln()).abs() < 1e-3, "{exps:?}");
        assert!((exps[2] + golden).abs() < 1e-3, "{exps:?}");
    }

    #[test]
    fn lyapunov_sum_matches_determinant_average() {
        let model = Model::derived_standard().unwrap();
        let x = TorusPoint::new(&[0.37, 0.81, 0.29]);
        let n = 5000;
        let exps = lyapunov_spectrum(&model, &x, n).unwrap();
        let sum: f64 = exps.iter().sum();
        let det_avg = birkhoff_average(&model, &x, |p| model.derivative(p).det().abs().ln(), n);
        assert!((sum - det_avg).abs() < 1e-8, "sum {sum} det avg {det_avg}");
    }

    #[test]
    fn gamma_of_linear_t3_is_the_unstable_log_volume() {
        let model = Model::t3_block(2).unwrap();
        let cone = model.default_cone(0.1).unwrap();
        let x = TorusPoint::new(&[0.4, 0.2, 0.9]);
        let eu = *model.linear_part().unstable().unwrap();
        let est = gamma_sequence(&model, &x, &eu, &cone, 50, 16, 5).unwrap();
        let expect = ((3.0 + 5.0f64.sqrt()) / 2.0).ln() + 2.0f64.ln();
        for (n, &r) in est.reference_rate.iter().enumerate() {
            assert!((r - expect).abs() < 1e-12, "n={} r={}", n + 1, r);
        }
        // The unstable plane maximizes volume growth among cone subspaces.
        assert!((est.limit - expect).abs() < 1e-6);
        assert!(est.k0_envelope < 1.0 + 1e-9);
    }

    #[test]
    fn gamma_limit_matches_positive_lyapunov_sum() {
        let model = Model::derived_standard().unwrap();
        let cone = model.default_cone(0.1).unwrap();
        let x = TorusPoint::new(&[0.15, 0.65, 0.35]);
        let est = gamma_sequence(&model, &x, cone.center(), &cone, 1000, 12, 9).unwrap();
        let exps = lyapunov_spectrum(&model, &x, 1000).unwrap();
        let positive: f64 = exps.iter().filter(|&&e| e > 0.0).sum();
        assert!((est.limit - positive).abs() < 1e-2, "gamma {} lyap {}", est.limit, positive);
    }

    #[test]
    fn gamma_rates_are_independent_of_the_reference_subspace() {
        let model = Model::t3_block(2).unwrap();
        let cone = model.default_cone(0.1).unwrap();
        let x = TorusPoint::new(&[0.52, 0.18, 0.77]);
        let mut rng = Rng::from_seed(61);
        let q1 = rng.uniform();
        let f1 = cone.random_subspace(&mut rng, q1);
        let q2 = rng.uniform();
        let f2 = cone.random_subspace(&mut rng, q2);
        let e1 = gamma_sequence(&model, &x, &f1, &cone, 60, 8, 3).unwrap();
        let e2 = gamma_sequence(&model, &x, &f2, &cone, 60, 8, 3).unwrap();
        // Reference curves differ by at most (log K0)/n, so the rates agree
        // increasingly well; at n = 60 they are already close.
        let k0 = e1.k0_envelope.max(e2.k0_envelope);
        for n in [10usize, 30, 60] {
            let d = (e1.reference_rate[n - 1] - e2.reference_rate[n - 1]).abs();
            assert!(d <= 2.0 * k0.ln() / n as f64 + 1e-9, "n={n} d={d}");
        }
    }

    #[test]
    fn gamma_is_submultiplicative_on_sampled_splits() {
        let model = Model::derived_standard().unwrap();
        let cone = model.default_cone(0.1).unwrap();
        let x = TorusPoint::new(&[0.05, 0.03, 0.02]);
        let est = gamma_sequence(&model, &x, cone.center(), &cone, 80, 10, 21).unwrap();
        let splits = [(10, 20), (25, 25), (40, 40), (7, 60)];
        assert!(est.check_submultiplicative(&splits));
    }

    #[test]
    fn sample_point_reproduces_the_histogram() {
        let model = Model::cat2();
        let cone = model.default_cone(0.1).unwrap();
        let params = SrbParams { cesaro_len: 40, samples: 5000, burn_in: 10, grid: 8, seed: 77 };
        let mu = empirical_srb(&model, &unstable_disk(&model, 0.4), &cone, &params).unwrap();
        let mut rng = Rng::from_seed(123);
        let mut counts = vec![0usize; mu.bins()];
        let draws = 200_000;
        for _ in 0..draws {
            let p = mu.sample_point(&mut rng);
            counts[mu.bin_index(&p)] += 1;
        }
        let mut tv = 0.0;
        for (i, &c) in counts.iter().enumerate() {
            tv += (c as f64 / draws as f64 - mu.masses()[i]).abs();
        }
        assert!(0.5 * tv < 0.01, "tv = {}", 0.5 * tv);
    }
}
