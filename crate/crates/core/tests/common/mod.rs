//! Independent oracles shared by the property and acceptance suites. Nothing
//! here calls into the library's estimators; geometry is recomputed from
//! `atan2` and derivatives come from finite differences.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use aoa_core::numerics::{max_gen_eigenvalue, SmallMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn wrap(a: f64) -> f64 {
    let w = a - TAU * (a / TAU).round();
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

pub fn bearing(s: [f64; 2], p: [f64; 2]) -> f64 {
    (s[1] - p[1]).atan2(s[0] - p[0])
}

pub fn elevation(s: [f64; 3], p: [f64; 3]) -> f64 {
    ((s[2] - p[2]) / (s[0] - p[0]).hypot(s[1] - p[1])).atan()
}

/// Largest residual of the geometric identities linking a true azimuth to
/// the sensor offset: `dx sin a - dy cos a = 0`, `dx cos a + dy sin a = r`.
pub fn planar_identity_residual(s: [f64; 2], p: [f64; 2]) -> f64 {
    let a = bearing(s, p);
    let (dx, dy) = (s[0] - p[0], s[1] - p[1]);
    let r = dx.hypot(dy);
    (dx * a.sin() - dy * a.cos()).abs().max((dx * a.cos() + dy * a.sin() - r).abs())
}

/// Elevation counterpart: `r sin e - dz cos e = 0`, `r cos e + dz sin e = d`.
pub fn spatial_identity_residual(s: [f64; 3], p: [f64; 3]) -> f64 {
    let e = elevation(s, p);
    let r = (s[0] - p[0]).hypot(s[1] - p[1]);
    let dz = s[2] - p[2];
    let d = r.hypot(dz);
    (r * e.sin() - dz * e.cos()).abs().max((r * e.cos() + dz * e.sin() - d).abs())
}

/// Central-difference gradient of the azimuth with respect to the source.
pub fn fd_bearing_gradient(s: [f64; 2], p: [f64; 2], h: f64) -> [f64; 2] {
    let d = |k: usize| {
        let (mut lo, mut hi) = (p, p);
        lo[k] -= h;
        hi[k] += h;
        wrap(bearing(s, hi) - bearing(s, lo)) / (2.0 * h)
    };
    [d(0), d(1)]
}

/// Central-difference gradient of the elevation with respect to the source.
pub fn fd_elevation_gradient(s: [f64; 3], p: [f64; 3], h: f64) -> [f64; 3] {
    let d = |k: usize| {
        let (mut lo, mut hi) = (p, p);
        lo[k] -= h;
        hi[k] += h;
        (elevation(s, hi) - elevation(s, lo)) / (2.0 * h)
    };
    [d(0), d(1), d(2)]
}

/// Sample mean and its standard error.
pub fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let m = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Monte Carlo check of the sine/cosine moments of `N(0, sigma^2)` noise.
/// Returns `(label, z-score)` pairs where `z = |mc - exact| / se`.
pub fn trig_moment_z_scores(sigma: f64, draws: usize, seed: u64) -> Vec<(&'static str, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..draws).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); sigma * z }).collect();
    let ec = (-sigma * sigma / 2.0).exp();
    let exact = [
        ("E cos", ec),
        ("E sin", 0.0),
        ("E sin cos", 0.0),
        ("V cos", 0.5 * ((-2.0 * sigma * sigma).exp() + 1.0 - 2.0 * (-sigma * sigma).exp())),
        ("V sin", 0.5 * (1.0 - (-2.0 * sigma * sigma).exp())),
    ];
    let f: [fn(f64, f64) -> f64; 5] = [
        |x, _| x.cos(),
        |x, _| x.sin(),
        |x, _| x.sin() * x.cos(),
        |x, ec| (x.cos() - ec).powi(2),
        |x, _| x.sin().powi(2),
    ];
    exact
        .iter()
        .zip(f)
        .map(|(&(label, value), g)| {
            let vals: Vec<f64> = xs.iter().map(|&x| g(x, ec)).collect();
            let (m, se) = mean_se(&vals);
            (label, if se > 0.0 { (m - value).abs() / se } else { (m - value).abs() })
        })
        .collect()
}

/// For `C` singular PSD and `S` positive definite, `1 / lambda_max((C + vS)^{-1} S)`
/// must return `v`. Returns the absolute error on one random instance.
pub fn pencil_error(rng: &mut ChaCha8Rng, dim: usize) -> f64 {
    let rand_vec = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect() };
    // C = sum of dim-1 rank-one terms, so it is PSD and singular.
    let mut c = SmallMatrix::zeros(dim, dim);
    for _ in 0..dim - 1 {
        let u = rand_vec(rng);
        c.add_outer(&u, rng.random_range(0.1..2.0));
    }
    let mut s = SmallMatrix::identity(dim).scale(0.5);
    for _ in 0..dim {
        let u = rand_vec(rng);
        s.add_outer(&u, 1.0);
    }
    let v = rng.random_range(0.01..0.49);
    let q = c.add(&s.scale(v));
    let lam = max_gen_eigenvalue(&q, &s).expect("pencil");
    (1.0 / lam - v).abs()
}

/// Monte Carlo estimate of the score covariance `E[grad l grad l^T]` for
/// Gaussian angle noise. Each sensor contributes rows (gradient, sigma); the
/// score of one draw is `sum_k eps_k grad_k / sigma_k`.
pub fn score_covariance(rows: &[(Vec<f64>, f64)], draws: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = rows[0].0.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = vec![vec![0.0; dim]; dim];
    let mut score = vec![0.0; dim];
    for _ in 0..draws {
        score.iter_mut().for_each(|s| *s = 0.0);
        for (g, sigma) in rows {
            let eps: f64 = StandardNormal.sample(&mut rng);
            for k in 0..dim {
                score[k] += eps * g[k] / sigma;
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                acc[i][j] += score[i] * score[j];
            }
        }
    }
    acc.iter().map(|r| r.iter().map(|x| x / draws as f64).collect()).collect()
}

/// Largest entry-wise deviation between two matrices, each entry scaled by
/// `sqrt(F_ii F_jj)` of the reference so off-diagonal zeros stay meaningful.
pub fn scaled_max_deviation(reference: &SmallMatrix, estimate: &[Vec<f64>]) -> f64 {
    let n = reference.rows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let scale = (reference[(i, i)] * reference[(j, j)]).sqrt();
            worst = worst.max((estimate[i][j] - reference[(i, j)]).abs() / scale);
        }
    }
    worst
}

/// Mean squared wrapped azimuth residual.
pub fn ml_cost(sensors: &[[f64; 2]], az: &[f64], p: [f64; 2]) -> f64 {
    sensors.iter().zip(az).map(|(s, a)| wrap(a - bearing(*s, p)).powi(2)).sum::<f64>() / az.len() as f64
}

/// Maximum-likelihood estimate by exhaustive grid search: a coarse grid over
/// the square `center +- half_width`, then repeated zooming around the best
/// cell until the spacing drops below `tol`.
pub fn ml_grid_oracle_2d(sensors: &[[f64; 2]], az: &[f64], center: [f64; 2], half_width: f64, tol: f64) -> [f64; 2] {
    let search = |c: [f64; 2], hw: f64, m: usize| -> [f64; 2] {
        let step = 2.0 * hw / (m - 1) as f64;
        let mut best = (f64::INFINITY, c);
        for i in 0..m {
            for j in 0..m {
                let p = [c[0] - hw + i as f64 * step, c[1] - hw + j as f64 * step];
                if sensors.iter().any(|s| (s[0] - p[0]).hypot(s[1] - p[1]) < 1e-9) {
                    continue;
                }
                let v = ml_cost(sensors, az, p);
                if v < best.0 {
                    best = (v, p);
                }
            }
        }
        best.1
    };
    let coarse = 81;
    let mut best = search(center, half_width, coarse);
    let mut hw = 2.0 * half_width / (coarse - 1) as f64;
    while hw > tol {
        best = search(best, hw, 9);
        hw /= 4.0;
    }
    best
}

/// Adds independent N(0, sigma^2) errors to each angle.
pub fn noisy(angles: &[f64], sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    angles
        .iter()
        .map(|&a| {
            let z: f64 = StandardNormal.sample(rng);
            a + sigma * z
        })
        .collect()
}

/// Least squares with the noise-free regressor `e^{-s^2/2} [sin a0, -cos a0]`
/// and the observed response `x sin a - y cos a`. Needs the true source, so it
/// only exists in simulation.
pub fn oracle_unbiased_ls_2d(sensors: &[[f64; 2]], truth: [f64; 2], az: &[f64], sigma: f64) -> [f64; 2] {
    let k = (-sigma * sigma / 2.0).exp();
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (s, &a) in sensors.iter().zip(az) {
        let a0 = bearing(*s, truth);
        let (h1, h2) = (k * a0.sin(), -k * a0.cos());
        let y = s[0] * a.sin() - s[1] * a.cos();
        a11 += h1 * h1;
        a12 += h1 * h2;
        a22 += h2 * h2;
        b1 += h1 * y;
        b2 += h2 * y;
    }
    let det = a11 * a22 - a12 * a12;
    [(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det]
}

/// Height from the noise-free regressor `-e^{-s^2/2} cos e0` and the response
/// `r0 sin e - z_i cos e` built with the true horizontal ranges.
pub fn oracle_unbiased_z(sensors: &[[f64; 3]], truth: [f64; 3], el: &[f64], sigma_e: f64) -> f64 {
    let k = (-sigma_e * sigma_e / 2.0).exp();
    let (mut num, mut den) = (0.0, 0.0);
    for (s, &e) in sensors.iter().zip(el) {
        let phi0 = -k * elevation(*s, truth).cos();
        let r0 = (s[0] - truth[0]).hypot(s[1] - truth[1]);
        num += phi0 * (r0 * e.sin() - s[2] * e.cos());
        den += phi0 * phi0;
    }
    num / den
}
