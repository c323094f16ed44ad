//! Fitting and resampling helpers shared by the experiment modules.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::rng::Rng;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n-1 denominator).
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard error of the mean.
pub fn stderr_of_mean(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Ordinary least squares line fit with slope standard error and R^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub r2: f64,
    pub n: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 3 || n != ys.len() {
        return None;
    }
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    for i in 0..n {
        let r = ys[i] - (intercept + slope * xs[i]);
        ss_res += r * r;
    }
    let slope_se = (ss_res / (n as f64 - 2.0) / sxx).max(0.0).sqrt();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Some(LineFit { slope, intercept, slope_se, r2, n })
}

/// Bootstrap standard error of the fitted slope (resampling points with
/// replacement).
pub fn bootstrap_slope_se(xs: &[f64], ys: &[f64], rounds: usize, rng: &mut Rng) -> f64 {
    let n = xs.len();
    if n < 3 {
        return f64::NAN;
    }
    let mut slopes = Vec::with_capacity(rounds);
    let mut bx = Vec::with_capacity(n);
    let mut by = Vec::with_capacity(n);
    for _ in 0..rounds {
        bx.clear();
        by.clear();
        for _ in 0..n {
            let k = rng.below(n);
            bx.push(xs[k]);
            by.push(ys[k]);
        }
        if let Some(f) = fit_line(&bx, &by) {
            slopes.push(f.slope);
        }
    }
    variance(&slopes).sqrt()
}

/// One-sided Clopper-Pearson upper confidence bound for a binomial
/// proportion with zero observed successes.
pub fn clopper_pearson_upper_zero(n: usize, alpha: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    1.0 - alpha.powf(1.0 / n as f64)
}

/// Nelder-Mead minimization in up to 3 parameters. Returns the best point
/// and value found. `f` must be finite on the search region; non-finite
/// values are treated as +inf so the simplex retreats from them.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let dim = x0.len();
    assert!((1..=3).contains(&dim));
    let eval = |f: &mut F, x: &[f64]| -> f64 {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = eval(&mut f, x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&mut f, &x);
        simplex.push((x, v));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let spread: f64 = (0..dim)
            .map(|i| (simplex[dim].0[i] - simplex[0].0[i]).abs())
            .fold(0.0, f64::max);
        if spread < 1e-13 && (simplex[dim].1 - simplex[0].1).abs() < 1e-15 {
            break;
        }
        // Centroid of all but the worst.
        let mut centroid = alloc::vec![0.0; dim];
        for (x, _) in simplex.iter().take(dim) {
            for i in 0..dim {
                centroid[i] += x[i] / dim as f64;
            }
        }
        let worst = simplex[dim].clone();
        let reflect: Vec<f64> =
            (0..dim).map(|i| centroid[i] + alpha * (centroid[i] - worst.0[i])).collect();
        let fr = eval(&mut f, &reflect);
        if fr < simplex[0].1 {
            let expand: Vec<f64> =
                (0..dim).map(|i| centroid[i] + gamma * (reflect[i] - centroid[i])).collect();
            let fe = eval(&mut f, &expand);
            simplex[dim] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflect, fr);
        } else {
            let contract: Vec<f64> =
                (0..dim).map(|i| centroid[i] + rho * (worst.0[i] - centroid[i])).collect();
            let fc = eval(&mut f, &contract);
            if fc < worst.1 {
                simplex[dim] = (contract, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    for i in 0..dim {
                        entry.0[i] = best[i] + sigma * (entry.0[i] - best[i]);
                    }
                    entry.1 = eval(&mut f, &entry.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    simplex.swap_remove(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.25 * x).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope + 0.25).abs() < 1e-12);
        assert!((f.intercept - 3.0).abs() < 1e-12);
        assert!(f.slope_se < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let (x, v) = nelder_mead(
            |p| (p[0] - 1.5) * (p[0] - 1.5) + 2.0 * (p[1] + 0.5) * (p[1] + 0.5),
            &[0.0, 0.0],
            0.5,
            300,
        );
        assert!((x[0] - 1.5).abs() < 1e-6, "x = {x:?}");
        assert!((x[1] + 0.5).abs() < 1e-6);
        assert!(v < 1e-10);
    }

    #[test]
    fn clopper_pearson_zero_bound_shrinks_with_n() {
        let a = clopper_pearson_upper_zero(10, 0.025);
        let b = clopper_pearson_upper_zero(1000, 0.025);
        assert!(a > b);
        assert!((0.0..=1.0).contains(&b));
        // n=1000: upper bound approx 3.68/1000
        assert!((b - 0.003682).abs() < 1e-4);
    }

    #[test]
    fn bootstrap_se_tracks_noise_scale() {
        let mut rng = Rng::from_seed(3);
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x + rng.uniform_in(-1.0, 1.0)).collect();
        let f = fit_line(&xs, &ys).unwrap();
        let se = bootstrap_slope_se(&xs, &ys, 200, &mut rng);
        assert!(se > 0.0);
        assert!((se - f.slope_se).abs() < 3.0 * f.slope_se);
    }
}
