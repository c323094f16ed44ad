//! Detection and statistics of cone-hyperbolic times.
//!
//! A time `n` is a `c`-cone-hyperbolic time for `x` when every backward
//! window of the orbit shows cumulative cone expansion at rate `c`:
//! `sum_{j=n-k}^{n-1} a_j <= -c k` for all `1 <= k <= n`, where
//! `a_j = log ||(Df(f^j x)|_C)^{-1}||`, provided the cone is forward
//! invariant along the orbit. The detector runs in `O(N)` using the running
//! minimum of the tilted prefix sums `S_m + c m`; the `O(N^2)` definition is
//! kept as a test oracle.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::cone::{restricted_inverse_norm_of, ConeSpec};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::rng::Rng;
use crate::stats::{fit_line, LineFit};
use crate::torus::{TangentVector, TorusPoint};

/// Default tolerance for the non-lacunarity verdict.
pub const LACUNARITY_TOL: f64 = 0.05;

/// Per-step data of one orbit: the log restricted inverse norms and the
/// forward cone-invariance flags.
#[derive(Debug, Clone)]
pub struct OrbitLog {
    pub origin: TorusPoint,
    /// `a_j` for `j = 0..N-1`.
    pub values: Vec<f64>,
    /// Whether `Df(f^j x) C <= C` held (sampled margins) at step `j`.
    pub invariance_ok: Vec<bool>,
}

impl OrbitLog {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Shared per-model state for producing orbit logs cheaply: the restricted
/// inverse norm and the invariance margin are constant wherever the
/// derivative is locally constant, which for the built-in models is
/// everywhere outside the perturbed ball.
pub struct OrbitEvaluator<'a> {
    model: &'a Model,
    cone: &'a ConeSpec,
    constant_log_inv: f64,
    constant_margin: f64,
    /// Fixed cone-boundary probe vectors for invariance spot checks.
    probes: Vec<TangentVector>,
}

impl<'a> OrbitEvaluator<'a> {
    pub fn new(model: &'a Model, cone: &'a ConeSpec) -> Result<Self> {
        let linear = model.linear_part();
        let constant_log_inv = restricted_inverse_norm_of(linear.matrix(), cone)?.ln();
        let mut rng = Rng::from_seed(0x9B0B);
        let probes: Vec<TangentVector> =
            (0..16).map(|_| cone.random_vector(&mut rng, 1.0)).collect();
        let constant_margin = probes
            .iter()
            .map(|v| cone.membership_margin(&linear.matrix().apply(v)))
            .fold(f64::INFINITY, f64::min);
        Ok(OrbitEvaluator { model, cone, constant_log_inv, constant_margin, probes })
    }

    /// `a(x) = log ||(Df(x)|_C)^{-1}||`.
    pub fn log_inv_norm(&self, x: &TorusPoint) -> Result<f64> {
        if self.model.derivative_is_locally_constant(x) {
            Ok(self.constant_log_inv)
        } else {
            Ok(restricted_inverse_norm_of(&self.model.derivative(x), self.cone)?.ln())
        }
    }

    fn invariance_margin(&self, x: &TorusPoint) -> f64 {
        if self.model.derivative_is_locally_constant(x) {
            self.constant_margin
        } else {
            let df = self.model.derivative(x);
            self.probes
                .iter()
                .map(|v| self.cone.membership_margin(&df.apply(v)))
                .fold(f64::INFINITY, f64::min)
        }
    }

    /// Iterate `n` steps from `x0`, recording values and invariance flags.
    pub fn orbit_log(&self, x0: &TorusPoint, n: usize) -> Result<OrbitLog> {
        let mut values = Vec::with_capacity(n);
        let mut flags = Vec::with_capacity(n);
        let mut x = *x0;
        for _ in 0..n {
            values.push(self.log_inv_norm(&x)?);
            flags.push(self.invariance_margin(&x) > 0.0);
            x = self.model.eval(&x);
        }
        Ok(OrbitLog { origin: *x0, values, invariance_ok: flags })
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    pub fn cone(&self) -> &ConeSpec {
        self.cone
    }

    /// Data-driven default rate: `0.45` times the negated mean of `a_j`
    /// over a pilot orbit, which keeps the `-2c` average hypothesis
    /// satisfied with margin. Fails when the pilot average is not negative.
    pub fn default_rate(&self, x0: &TorusPoint, pilot_len: usize) -> Result<f64> {
        let log = self.orbit_log(x0, pilot_len)?;
        let mean = crate::stats::mean(&log.values);
        if !(mean < 0.0) {
            return Err(Error::NumericalFailure {
                what: "pilot orbit shows no average cone expansion",
                value: mean,
            });
        }
        Ok(0.45 * (-mean))
    }
}

/// The detected `c`-cone-hyperbolic times of one orbit.
#[derive(Debug, Clone)]
pub struct HyperbolicTimeRecord {
    pub c: f64,
    pub orbit_len: usize,
    /// Sorted times `n_1 < n_2 < ...` (1-based, `n <= N`).
    pub times: Vec<usize>,
    /// Consecutive gaps `n_{i+1} - n_i`.
    pub gaps: Vec<usize>,
    /// `l / N`.
    pub density: f64,
}

impl HyperbolicTimeRecord {
    pub fn first_time(&self) -> Option<usize> {
        self.times.first().copied()
    }

    pub fn max_gap(&self) -> usize {
        self.gaps.iter().copied().max().unwrap_or(0)
    }

    /// Largest hyperbolic time `<= n`, if any.
    pub fn last_time_at_or_before(&self, n: usize) -> Option<usize> {
        match self.times.binary_search(&n) {
            Ok(_) => Some(n),
            Err(0) => None,
            Err(i) => Some(self.times[i - 1]),
        }
    }
}

/// `O(N)` detector: `n` qualifies iff `S_n + c n` does not exceed the
/// running minimum of `S_m + c m` over `m < n`.
pub fn detect_hyperbolic_times(orbit: &OrbitLog, c: f64) -> Result<HyperbolicTimeRecord> {
    if !(c > 0.0) {
        return Err(Error::InvalidInput("the rate c must be positive"));
    }
    if let Some(step) = orbit.invariance_ok.iter().position(|ok| !ok) {
        return Err(Error::ConeInvarianceViolated { step, margin: 0.0 });
    }
    let times = detect_from_values(&orbit.values, c);
    Ok(record_from_times(times, orbit.len(), c))
}

/// Assemble a record from an explicit (sorted) time list.
pub fn record_from_times(times: Vec<usize>, orbit_len: usize, c: f64) -> HyperbolicTimeRecord {
    let gaps = times.windows(2).map(|w| w[1] - w[0]).collect();
    let density = if orbit_len > 0 { times.len() as f64 / orbit_len as f64 } else { 0.0 };
    HyperbolicTimeRecord { c, orbit_len, times, gaps, density }
}

/// Core running-minimum scan over a raw value sequence.
pub fn detect_from_values(values: &[f64], c: f64) -> Vec<usize> {
    let mut times = Vec::new();
    let mut running_min = 0.0; // S_0 + c*0
    let mut s = 0.0;
    for (idx, &a) in values.iter().enumerate() {
        let n = idx + 1;
        s += a;
        let tilted = s + c * n as f64;
        if tilted <= running_min {
            times.push(n);
        }
        if tilted < running_min {
            running_min = tilted;
        }
    }
    times
}

/// Quadratic reference detector following the definition verbatim: test
/// every backward window of every time. Test oracle for
/// [`detect_from_values`].
pub fn detect_brute_force(values: &[f64], c: f64) -> Vec<usize> {
    let n_total = values.len();
    let mut times = Vec::new();
    for n in 1..=n_total {
        let mut ok = true;
        let mut acc = 0.0;
        for k in 1..=n {
            acc += values[n - k];
            if !(acc <= -c * k as f64) {
                ok = false;
                break;
            }
        }
        if ok {
            times.push(n);
        }
    }
    times
}

/// Outcome of the Pliss density selection.
#[derive(Debug, Clone)]
pub struct PlissSelection {
    pub indices: Vec<usize>,
    /// Guaranteed density floor `c / (bound - c)`, present only when the
    /// `-2c` average hypothesis holds.
    pub floor: Option<f64>,
    pub achieved_density: f64,
    pub hypothesis_ok: bool,
}

/// Select the `c`-hyperbolic indices of a bounded sequence and report the
/// guaranteed Pliss density floor. `bound` must dominate `|a_j|`; with the
/// average hypothesis `mean <= -2c` the floor is
/// `theta = (2c - c) / (bound - c)` from the standard Pliss counting.
pub fn pliss_select(values: &[f64], c: f64, bound: f64) -> Result<PlissSelection> {
    if !(c > 0.0) {
        return Err(Error::InvalidInput("the rate c must be positive"));
    }
    if values.is_empty() {
        return Err(Error::InvalidInput("empty sequence"));
    }
    if values.iter().any(|a| a.abs() > bound) {
        return Err(Error::InvalidInput("sequence exceeds the declared bound"));
    }
    let mean = crate::stats::mean(values);
    // Tiny slack so sequences exactly at the -2c boundary are not lost to
    // accumulation rounding.
    let hypothesis_ok = mean <= -2.0 * c + 1e-12;
    let indices = detect_from_values(values, c);
    let achieved = indices.len() as f64 / values.len() as f64;
    let floor = if hypothesis_ok { Some(c / (bound - c)) } else { None };
    if let Some(theta) = floor {
        if achieved + 1e-12 < theta {
            return Err(Error::Internal("Pliss floor violated by the detector"));
        }
    }
    Ok(PlissSelection { indices, floor, achieved_density: achieved, hypothesis_ok })
}

/// Ratio diagnostics for the gap structure of a hyperbolic-time sequence.
#[derive(Debug, Clone)]
pub struct NonlacunarityReport {
    /// `n_{i+1} / n_i` for consecutive times.
    pub ratios: Vec<f64>,
    /// Maximum ratio over the last half of the sequence.
    pub tail_max: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Check that consecutive-time ratios tend to 1: pass iff the max ratio
/// over the last half stays below `1 + tolerance`.
pub fn nonlacunarity_check(
    record: &HyperbolicTimeRecord,
    tolerance: f64,
) -> Result<NonlacunarityReport> {
    if record.times.len() < 10 {
        return Err(Error::InvalidInput("need at least 10 hyperbolic times"));
    }
    let ratios: Vec<f64> =
        record.times.windows(2).map(|w| w[1] as f64 / w[0] as f64).collect();
    let tail = &ratios[ratios.len() / 2..];
    let tail_max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(NonlacunarityReport { ratios, tail_max, tolerance, pass: tail_max < 1.0 + tolerance })
}

/// Empirical tail of the first hyperbolic time map.
#[derive(Debug, Clone)]
pub struct TailCurve {
    pub c: f64,
    pub samples: usize,
    /// `P(n_1 > n)` for `n = 1..=n_max`.
    pub fractions: Vec<f64>,
    /// Samples still without a hyperbolic time at `n_max` (censored).
    pub censored: usize,
    /// Least-squares fit of `log P(n_1 > n)` over its uncensored range;
    /// `None` when fewer than 3 points are informative.
    pub fit: Option<LineFit>,
    /// All sampled points had `n_1 <= 1`.
    pub degenerate: bool,
}

/// Sample the first-hyperbolic-time tail for starts drawn from
/// `sample_start` (Lebesgue or an empirical measure).
pub fn first_time_tail<S: FnMut(&mut Rng) -> TorusPoint>(
    evaluator: &OrbitEvaluator<'_>,
    c: f64,
    n_max: usize,
    samples: usize,
    mut rng: Rng,
    mut sample_start: S,
) -> Result<TailCurve> {
    if samples < 1000 {
        return Err(Error::InvalidInput("tail estimation needs at least 1000 samples"));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidInput("the rate c must be positive"));
    }
    let mut exceed = alloc::vec![0usize; n_max + 1];
    let mut censored = 0usize;
    for _ in 0..samples {
        let x0 = sample_start(&mut rng);
        let n1 = first_time(evaluator, &x0, c, n_max)?;
        match n1 {
            Some(n1) => {
                // n_1 > n for all n < n1.
                for slot in exceed.iter_mut().take(n1).skip(1) {
                    *slot += 1;
                }
            }
            None => {
                censored += 1;
                for slot in exceed.iter_mut().skip(1) {
                    *slot += 1;
                }
            }
        }
    }
    let fractions: Vec<f64> =
        (1..=n_max).map(|n| exceed[n] as f64 / samples as f64).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &p) in fractions.iter().enumerate() {
        if p > 0.0 && p < 1.0 {
            xs.push((i + 1) as f64);
            ys.push(p.ln());
        }
    }
    let fit = fit_line(&xs, &ys);
    let degenerate = fractions.first().map_or(true, |&p| p == 0.0);
    Ok(TailCurve { c, samples, fractions, censored, fit, degenerate })
}

/// First `c`-cone-hyperbolic time of `x0`, capped at `n_max`
/// (`None` = censored).
pub fn first_time(
    evaluator: &OrbitEvaluator<'_>,
    x0: &TorusPoint,
    c: f64,
    n_max: usize,
) -> Result<Option<usize>> {
    let mut running_min = 0.0;
    let mut s = 0.0;
    let mut x = *x0;
    for n in 1..=n_max {
        if evaluator.invariance_margin(&x) <= 0.0 {
            return Err(Error::ConeInvarianceViolated { step: n - 1, margin: 0.0 });
        }
        s += evaluator.log_inv_norm(&x)?;
        let tilted = s + c * n as f64;
        if tilted <= running_min {
            return Ok(Some(n));
        }
        if tilted < running_min {
            running_min = tilted;
        }
        x = evaluator.model().eval(&x);
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;
    use crate::rng::{Rng, Streams};
    use proptest::prelude::*;

    #[test]
    fn worked_example_from_the_definition() {
        // a = (-1, +1, -1, -1), c = 0.5: only n = 1 qualifies.
        let values = [-1.0, 1.0, -1.0, -1.0];
        assert_eq!(detect_from_values(&values, 0.5), alloc::vec![1]);
        assert_eq!(detect_brute_force(&values, 0.5), alloc::vec![1]);
    }

    #[test]
    fn constant_expansion_makes_every_time_hyperbolic() {
        let model = Model::cat2();
        let cone = model.default_cone(0.1).unwrap();
        let ev = OrbitEvaluator::new(&model, &cone).unwrap();
        let x = TorusPoint::new(&[0.21, 0.34]);
        let log = ev.orbit_log(&x, 200).unwrap();
        // a_j is constant and negative; any c below -a works.
        let c = -log.values[0] * 0.9;
        let record = detect_hyperbolic_times(&log, c).unwrap();
        assert_eq!(record.times.len(), 200);
        assert!((record.density - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fast_detector_matches_brute_force_on_random_sequences() {
        let streams = Streams::new(0xFA57);
        for trial in 0..100 {
            let mut rng = streams.stream(trial);
            let len = 200;
            let values: Vec<f64> =
                (0..len).map(|_| rng.uniform_in(-1.5, 0.75)).collect();
            let c = rng.uniform_in(0.05, 0.8);
            assert_eq!(detect_from_values(&values, c), detect_brute_force(&values, c));
        }
    }

    #[test]
    fn concatenation_of_hyperbolic_times() {
        // If n < m are both hyperbolic for x, then m - n is hyperbolic for
        // f^n(x), i.e. for the shifted value sequence.
        let streams = Streams::new(0xCAFE);
        for trial in 0..50 {
            let mut rng = streams.stream(trial);
            let values: Vec<f64> = (0..300).map(|_| rng.uniform_in(-1.2, 0.6)).collect();
            let c = 0.25;
            let times = detect_from_values(&values, c);
            for (i, &n) in times.iter().enumerate() {
                for &m in &times[i + 1..] {
                    let shifted = &values[n..];
                    let sub_times = detect_from_values(shifted, c);
                    assert!(
                        sub_times.contains(&(m - n)),
                        "m-n = {} not hyperbolic for the shift",
                        m - n
                    );
                }
            }
        }
    }

    #[test]
    fn invariance_violation_invalidates_the_orbit() {
        let mut log = OrbitLog {
            origin: TorusPoint::origin(2),
            values: alloc::vec![-1.0; 10],
            invariance_ok: alloc::vec![true; 10],
        };
        log.invariance_ok[4] = false;
        assert!(matches!(
            detect_hyperbolic_times(&log, 0.3),
            Err(Error::ConeInvarianceViolated { step: 4, .. })
        ));
    }

    #[test]
    fn pliss_constant_sequence_saturates_the_floor() {
        let c = 0.4;
        let values = alloc::vec![-2.0 * c; 50];
        let sel = pliss_select(&values, c, 2.0 * c).unwrap();
        assert_eq!(sel.indices.len(), 50);
        assert!((sel.achieved_density - 1.0).abs() < 1e-15);
        assert!((sel.floor.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pliss_hypothesis_gate() {
        // Alternating sequence with zero mean violates the -2c hypothesis:
        // indices still reported, no guarantee.
        let values: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        let sel = pliss_select(&values, 0.3, 1.0).unwrap();
        assert!(!sel.hypothesis_ok);
        assert!(sel.floor.is_none());
        let with_times = pliss_select(&alloc::vec![-0.9; 20], 0.3, 1.0).unwrap();
        assert!(with_times.hypothesis_ok);
        assert!(with_times.achieved_density >= with_times.floor.unwrap());
    }

    #[test]
    fn pliss_bound_is_validated() {
        assert!(matches!(
            pliss_select(&[-3.0, -1.0], 0.3, 2.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn nonlacunarity_passes_for_full_density_and_fails_for_geometric() {
        let full = record_from_times((1..=100).collect(), 100, 0.3);
        let report = nonlacunarity_check(&full, LACUNARITY_TOL).unwrap();
        assert!(report.pass);
        assert!(report.tail_max < 1.03);
        let geometric = record_from_times((0..12).map(|i| 1usize << i).collect(), 2048, 0.3);
        let report = nonlacunarity_check(&geometric, LACUNARITY_TOL).unwrap();
        assert!(!report.pass);
        assert!((report.tail_max - 2.0).abs() < 1e-12);
    }

    #[test]
    fn uniformly_expanding_model_has_degenerate_tail() {
        let model = Model::cat2();
        let cone = model.default_cone(0.1).unwrap();
        let ev = OrbitEvaluator::new(&model, &cone).unwrap();
        let x = TorusPoint::new(&[0.4, 0.9]);
        let c = ev.default_rate(&x, 1000).unwrap();
        let rng = Rng::from_seed(5150);
        let tail =
            first_time_tail(&ev, c, 20, 2000, rng, |r| r.torus_point(2)).unwrap();
        assert!(tail.degenerate);
        assert!(tail.fractions[0] == 0.0);
        assert!(tail.fit.is_none());
    }

    #[test]
    fn derived_model_tail_decreases_with_negative_slope() {
        let model = Model::derived_standard().unwrap();
        let cone = model.default_cone(0.1).unwrap();
        let ev = OrbitEvaluator::new(&model, &cone).unwrap();
        let x = TorusPoint::new(&[0.123, 0.456, 0.789]);
        let c = ev.default_rate(&x, 2000).unwrap();
        // Oversample starts near the perturbed ball so the tail is resolved
        // with a modest sample count.
        let d = model.as_derived().unwrap();
        let center = *d.center();
        let delta = d.delta();
        let rng = Rng::from_seed(31337);
        let tail = first_time_tail(&ev, c, 12, 20_000, rng, move |r| {
            center.offset(&r.in_ball(3, 2.0 * delta))
        })
        .unwrap();
        assert!(!tail.degenerate);
        let fit = tail.fit.expect("tail should be fittable");
        assert!(fit.slope < 0.0, "slope = {}", fit.slope);
        // Monotone non-increasing tail.
        for w in tail.fractions.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn first_time_matches_full_detection() {
        let model = Model::derived_standard().unwrap();
        let cone = model.default_cone(0.1).unwrap();
        let ev = OrbitEvaluator::new(&model, &cone).unwrap();
        let mut rng = Rng::from_seed(404);
        for _ in 0..50 {
            let x = rng.torus_point(3);
            let log = ev.orbit_log(&x, 50).unwrap();
            let record = detect_hyperbolic_times(&log, 0.3).unwrap();
            let n1 = first_time(&ev, &x, 0.3, 50).unwrap();
            assert_eq!(record.first_time(), n1);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn detector_equivalence_property(
            values in proptest::collection::vec(-2.0f64..1.0, 1..150),
            c in 0.01f64..1.0,
        ) {
            prop_assert_eq!(detect_from_values(&values, c), detect_brute_force(&values, c));
        }
    }
}
