//! Spatial pipeline: the planar coordinates come from the 2-D estimators run
//! on projected sensors, planar ranges are plugged in from that estimate, and
//! a scalar bias-eliminated regression on the elevations recovers `z`.
//! A weighted Gauss-Newton step over all `2n` angle residuals finishes the
//! two-step estimator.

use crate::error::{AoaError, Result};
use crate::estimate::{Estimate3d, Method};
use crate::estimator2d::{self, clamp_v_sin, Regression2d, GN_STEP_TOL, V_SIN_MAX};
use crate::model::{
    bearing_gradient, elevation_gradient, sigma_from_var_sin, true_bearing_2d, true_elevation_3d,
    var_sin, wrap_angle, MeasurementSet, NoiseModel, SensorArray,
};
use crate::numerics::{condition_spd, max_gen_eigenvalue, solve_spd, SmallMatrix};

/// Below this, a noise level is treated as zero when weighting residuals.
const MIN_WEIGHT_SIGMA: f64 = 1e-12;

/// Scalar elevation regression `Gamma = Phi z + zeta` with plug-in ranges.
#[derive(Debug, Clone)]
pub struct ZRegression {
    phi: Vec<f64>,
    gamma_hat: Vec<f64>,
    r_hat: Vec<f64>,
    z_bar: f64,
    mean_z_sq_plus_r_sq: f64,
}

impl ZRegression {
    /// `Phi_i = -cos e_i`.
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// `Gamma_hat_i = sin(e_i) r_hat_i - cos(e_i) z_i`.
    pub fn gamma_hat(&self) -> &[f64] {
        &self.gamma_hat
    }

    pub fn r_hat(&self) -> &[f64] {
        &self.r_hat
    }

    pub fn z_bar(&self) -> f64 {
        self.z_bar
    }

    /// `(1/n) sum (z_i^2 + r_hat_i^2)`.
    pub fn mean_z_sq_plus_r_sq(&self) -> f64 {
        self.mean_z_sq_plus_r_sq
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    fn sums(&self) -> (f64, f64, f64) {
        let n = self.len() as f64;
        let (mut pp, mut pg, mut gg) = (0.0, 0.0, 0.0);
        for (p, g) in self.phi.iter().zip(&self.gamma_hat) {
            pp += p * p;
            pg += p * g;
            gg += g * g;
        }
        (pp / n, pg / n, gg / n)
    }
}

fn require_spatial(array: &SensorArray, meas: &MeasurementSet) -> Result<()> {
    if array.dim() != 3 {
        return Err(AoaError::Usage("expected a 3-D sensor array".into()));
    }
    meas.check_against(array)
}

/// Planar regression on the projected sensors `(x_i, y_i)` and the azimuths.
pub fn planar_regression_3d(array: &SensorArray, meas: &MeasurementSet) -> Result<Regression2d> {
    require_spatial(array, meas)?;
    Ok(Regression2d::from_parts(array.xy_iter(), &meas.azimuths))
}

/// Bias-eliminated estimate of `(x, y)` from the azimuths alone.
pub fn planar_bels_3d(array: &SensorArray, meas: &MeasurementSet, v_sin_a: f64) -> Result<[f64; 2]> {
    let reg = planar_regression_3d(array, meas)?;
    Ok(estimator2d::bels(&reg, v_sin_a)?.p_hat)
}

/// Planar sensor ranges measured from `planar_estimate`.
pub fn plug_in_ranges(array: &SensorArray, planar_estimate: [f64; 2]) -> Vec<f64> {
    array
        .xy_iter()
        .map(|p| (p[0] - planar_estimate[0]).hypot(p[1] - planar_estimate[1]))
        .collect()
}

/// Builds the elevation regression using ranges from `planar_estimate`.
pub fn build_z_regression(
    array: &SensorArray,
    meas: &MeasurementSet,
    planar_estimate: [f64; 2],
) -> Result<ZRegression> {
    require_spatial(array, meas)?;
    if !planar_estimate.iter().all(|c| c.is_finite()) {
        return Err(AoaError::Usage("planar estimate is not finite".into()));
    }
    let elev = meas.elevations_or_err()?;
    let r_hat = plug_in_ranges(array, planar_estimate);
    let n = array.len();
    let mut phi = Vec::with_capacity(n);
    let mut gamma_hat = Vec::with_capacity(n);
    let (mut sz, mut sq) = (0.0, 0.0);
    for ((p, e), r) in array.positions().iter().zip(elev).zip(&r_hat) {
        let (s, c) = e.sin_cos();
        phi.push(-c);
        gamma_hat.push(s * r - c * p[2]);
        sz += p[2];
        sq += p[2] * p[2] + r * r;
    }
    let inv = 1.0 / n as f64;
    Ok(ZRegression { phi, gamma_hat, r_hat, z_bar: sz * inv, mean_z_sq_plus_r_sq: sq * inv })
}

/// Bias-eliminated estimate of `z` for a given elevation sine variance.
pub fn bels_z(zreg: &ZRegression, v_sin_e: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&v_sin_e) {
        return Err(AoaError::OutOfRange(format!("sine variance {v_sin_e} must lie in [0, 1/2)")));
    }
    let (pp, pg, _) = zreg.sums();
    let den = pp - v_sin_e;
    if !(den > 1e-12) {
        return Err(AoaError::IllConditioned { cond: f64::INFINITY });
    }
    Ok((pg - v_sin_e * zreg.z_bar) / den)
}

/// Estimates the elevation sine variance as `1 / lambda_max(R_n^{-1} U_n)`.
pub fn estimate_var_sin_e(zreg: &ZRegression) -> Result<f64> {
    if zreg.len() < 3 {
        return Err(AoaError::Usage(format!("sine-variance estimation needs n >= 3, got {}", zreg.len())));
    }
    let (pp, pg, gg) = zreg.sums();
    let r = SmallMatrix::from_rows(&[[pp, pg], [pg, gg]]);
    let u = SmallMatrix::from_rows(&[[1.0, zreg.z_bar], [zreg.z_bar, zreg.mean_z_sq_plus_r_sq]]);
    let lam = max_gen_eigenvalue(&r, &u).map_err(|e| match e {
        AoaError::InvalidScatter => AoaError::DegenerateGeometry("elevation scatter matrix is singular".into()),
        other => other,
    })?;
    Ok(clamp_v_sin(1.0 / lam))
}

/// Residual weights `1/sigma_a`, `1/sigma_e`; unit weights if either level is zero.
fn gn_weights(sigma_a: f64, sigma_e: f64) -> (f64, f64) {
    if sigma_a < MIN_WEIGHT_SIGMA || sigma_e < MIN_WEIGHT_SIGMA {
        (1.0, 1.0)
    } else {
        (1.0 / sigma_a, 1.0 / sigma_e)
    }
}

/// Weighted Gauss-Newton on the stacked azimuth/elevation residuals.
///
/// `noise` must carry both levels (true or estimated); they set the row
/// weights. Azimuth residuals are wrapped, elevation residuals are not.
pub fn gn_refine_3d(
    array: &SensorArray,
    meas: &MeasurementSet,
    noise: &NoiseModel,
    p_init: [f64; 3],
    max_iters: usize,
) -> Result<Estimate3d> {
    require_spatial(array, meas)?;
    noise.validate()?;
    let (Some(sa), Some(se)) = (noise.sigma_a, noise.sigma_e) else {
        return Err(AoaError::Usage("3-D Gauss-Newton needs both noise levels".into()));
    };
    if max_iters == 0 {
        return Err(AoaError::Usage("max_iters must be at least 1".into()));
    }
    if !p_init.iter().all(|c| c.is_finite()) {
        return Err(AoaError::Usage("initial estimate is not finite".into()));
    }
    let elev = meas.elevations_or_err()?;
    let (wa, we) = gn_weights(sa, se);

    let mut p = p_init;
    let mut est = Estimate3d::new(p, Method::GaussNewton);
    for _ in 0..max_iters {
        let mut jtj = SmallMatrix::zeros(3, 3);
        let mut jtr = [0.0; 3];
        let mut rss = 0.0;
        for ((s, a), e) in array.positions().iter().zip(&meas.azimuths).zip(elev) {
            let ga = bearing_gradient([s[0], s[1]], [p[0], p[1]])?;
            let ge = elevation_gradient(*s, p)?;
            let ra = wa * wrap_angle(a - true_bearing_2d([s[0], s[1]], [p[0], p[1]])?);
            let re = we * (e - true_elevation_3d(*s, p)?);
            let ja = [wa * ga[0], wa * ga[1], 0.0];
            let je = [we * ge[0], we * ge[1], we * ge[2]];
            jtj.add_outer(&ja, 1.0);
            jtj.add_outer(&je, 1.0);
            for k in 0..3 {
                jtr[k] += ja[k] * ra + je[k] * re;
            }
            rss += ra * ra + re * re;
        }
        let step = solve_spd(&jtj, &jtr)?;
        for k in 0..3 {
            p[k] += step[k];
        }
        let d = &mut est.diagnostics;
        d.gn_iterations += 1;
        d.gn_condition = Some(condition_spd(&jtj));
        d.gn_residual_norm = Some(rss.sqrt());
        let step_norm = step.iter().map(|s| s * s).sum::<f64>().sqrt();
        d.gn_step_norm = Some(step_norm);
        if step_norm < GN_STEP_TOL {
            break;
        }
    }
    est.p_hat = p;
    Ok(est)
}

/// Sine variances used by the bias-eliminated 3-D estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineVariances {
    pub azimuth: f64,
    pub elevation: f64,
}

/// Bias-eliminated 3-D estimate without refinement.
///
/// Each sine variance is computed from the matching noise level when known
/// and estimated from the data otherwise. The planar ranges come from the
/// planar bias-eliminated estimate.
pub fn bels_3d(array: &SensorArray, meas: &MeasurementSet, noise: &NoiseModel) -> Result<Estimate3d> {
    noise.validate()?;
    let reg = planar_regression_3d(array, meas)?;
    if reg.len() < 4 {
        return Err(AoaError::Usage(format!("3-D estimation needs n >= 4, got {}", reg.len())));
    }
    let (v_a, clamped_a) = match noise.sigma_a {
        Some(s) => (var_sin(s), false),
        None => {
            let v = estimator2d::estimate_var_sin_2d(&reg)?;
            (v, v >= V_SIN_MAX)
        }
    };
    let planar = estimator2d::bels(&reg, v_a)?;
    let zreg = build_z_regression(array, meas, planar.p_hat)?;
    let (v_e, clamped_e) = match noise.sigma_e {
        Some(s) => (var_sin(s), false),
        None => {
            let v = estimate_var_sin_e(&zreg)?;
            (v, v >= V_SIN_MAX)
        }
    };
    let z = bels_z(&zreg, v_e)?;
    let (pp, _, _) = zreg.sums();

    let [x, y] = planar.p_hat;
    let mut est = Estimate3d::new([x, y, z], Method::Bels);
    est.v_sin_a = Some(v_a);
    est.v_sin_e = Some(v_e);
    est.diagnostics.gram_condition = planar.diagnostics.gram_condition;
    est.diagnostics.z_denominator = Some(pp - v_e);
    est.diagnostics.v_sin_a_clamped = clamped_a;
    est.diagnostics.v_sin_e_clamped = clamped_e;
    Ok(est)
}

/// Plain LS counterpart: planar PLS, ranges plugged in from it, and the
/// uncorrected scalar LS for `z`.
pub fn pls_3d(array: &SensorArray, meas: &MeasurementSet) -> Result<Estimate3d> {
    let reg = planar_regression_3d(array, meas)?;
    let planar = estimator2d::pls(&reg)?;
    let zreg = build_z_regression(array, meas, planar.p_hat)?;
    let z = bels_z(&zreg, 0.0)?;
    let [x, y] = planar.p_hat;
    let mut est = Estimate3d::new([x, y, z], Method::Pls);
    est.diagnostics.gram_condition = planar.diagnostics.gram_condition;
    Ok(est)
}

/// Noise levels used to weight the Gauss-Newton step: the known level, or the
/// one implied by the estimated sine variance.
pub fn gn_noise_for(noise: &NoiseModel, v: SineVariances) -> Result<NoiseModel> {
    let sa = match noise.sigma_a {
        Some(s) => s,
        None => sigma_from_var_sin(v.azimuth)?,
    };
    let se = match noise.sigma_e {
        Some(s) => s,
        None => sigma_from_var_sin(v.elevation)?,
    };
    Ok(NoiseModel::spatial(sa, se))
}

/// Two-step 3-D estimator: bias-eliminated `(x, y, z)` followed by exactly one
/// weighted Gauss-Newton step.
pub fn two_step_3d(array: &SensorArray, meas: &MeasurementSet, noise: &NoiseModel) -> Result<Estimate3d> {
    two_step_3d_iters(array, meas, noise, 1)
}

/// [`two_step_3d`] with a configurable number of Gauss-Newton iterations.
pub fn two_step_3d_iters(
    array: &SensorArray,
    meas: &MeasurementSet,
    noise: &NoiseModel,
    gn_iters: usize,
) -> Result<Estimate3d> {
    let init = bels_3d(array, meas, noise)?;
    refine_bels_3d(array, meas, noise, &init, gn_iters)
}

/// Runs the Gauss-Newton stage on an existing bias-eliminated estimate.
pub fn refine_bels_3d(
    array: &SensorArray,
    meas: &MeasurementSet,
    noise: &NoiseModel,
    init: &Estimate3d,
    gn_iters: usize,
) -> Result<Estimate3d> {
    let v = SineVariances {
        azimuth: init.v_sin_a.unwrap_or(0.0),
        elevation: init.v_sin_e.unwrap_or(0.0),
    };
    let weights = gn_noise_for(noise, v)?;
    let mut est = gn_refine_3d(array, meas, &weights, init.p_hat, gn_iters)?;
    est.method = Method::BelsGn;
    est.v_sin_a = init.v_sin_a;
    est.v_sin_e = init.v_sin_e;
    let d = &mut est.diagnostics;
    d.gram_condition = init.diagnostics.gram_condition;
    d.z_denominator = init.diagnostics.z_denominator;
    d.v_sin_a_clamped = init.diagnostics.v_sin_a_clamped;
    d.v_sin_e_clamped = init.diagnostics.v_sin_e_clamped;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{synthesize_measurements, SourceLocation};

    fn noncoplanar() -> SensorArray {
        SensorArray::spatial([
            [50.0, 50.0, 50.0],
            [50.0, 0.0, 50.0],
            [50.0, 50.0, -50.0],
            [50.0, 100.0, 0.0],
            [50.0, -50.0, 50.0],
            [-50.0, 0.0, -50.0],
            [-50.0, -50.0, 50.0],
            [-50.0, -50.0, -50.0],
            [-50.0, -100.0, 0.0],
            [-50.0, 50.0, -50.0],
        ])
        .unwrap()
    }

    #[test]
    fn plug_in_ranges_examples() {
        let a = SensorArray::spatial([[3.0, 4.0, 7.0], [0.0, 1.0, 0.0], [-6.0, 8.0, 1.0]]).unwrap();
        let r = plug_in_ranges(&a, [0.0, 0.0]);
        assert_eq!(r, vec![5.0, 1.0, 10.0]);
    }

    #[test]
    fn zero_noise_pipeline_is_exact() {
        let array = noncoplanar();
        let src = SourceLocation::spatial(60.0, 10.0, 10.0);
        let noise = NoiseModel::spatial(0.0, 0.0);
        let meas = synthesize_measurements(&array, &src, &noise, 1).unwrap();
        let xy = planar_bels_3d(&array, &meas, 0.0).unwrap();
        assert!((xy[0] - 60.0).abs() < 1e-9 && (xy[1] - 10.0).abs() < 1e-9);
        let zreg = build_z_regression(&array, &meas, xy).unwrap();
        assert!((bels_z(&zreg, 0.0).unwrap() - 10.0).abs() < 1e-9);
        assert_eq!(estimate_var_sin_e(&zreg).unwrap(), 0.0);
        for est in [
            two_step_3d(&array, &meas, &noise).unwrap(),
            two_step_3d(&array, &meas, &NoiseModel::unknown()).unwrap(),
            pls_3d(&array, &meas).unwrap(),
        ] {
            for (e, t) in est.p_hat.iter().zip(src.xyz()) {
                assert!((e - t).abs() < 1e-8, "{:?}", est);
            }
        }
    }

    #[test]
    fn gn_3d_requires_both_levels() {
        let array = noncoplanar();
        let src = SourceLocation::spatial(60.0, 10.0, 10.0);
        let meas = synthesize_measurements(&array, &src, &NoiseModel::spatial(0.0, 0.0), 1).unwrap();
        let err = gn_refine_3d(&array, &meas, &NoiseModel::planar(0.1), src.xyz(), 1).unwrap_err();
        assert_eq!(err.kind(), "usage");
    }

    #[test]
    fn gn_3d_vertical_alignment_is_degenerate() {
        let array = noncoplanar();
        let src = SourceLocation::spatial(60.0, 10.0, 10.0);
        let meas = synthesize_measurements(&array, &src, &NoiseModel::spatial(0.0, 0.0), 1).unwrap();
        let err = gn_refine_3d(&array, &meas, &NoiseModel::spatial(0.1, 0.1), [50.0, 0.0, 0.0], 1)
            .unwrap_err();
        assert_eq!(err.kind(), "degenerate-geometry");
    }

    #[test]
    fn bels_z_rejects_nonpositive_denominator() {
        // Source high above a small ring: every elevation is steep, so the
        // mean of cos^2 e is far below the subtracted variance.
        let array = SensorArray::spatial([
            [10.0, 0.0, 0.0],
            [0.0, 10.0, 0.0],
            [-10.0, 0.0, 0.0],
            [0.0, -10.0, 0.0],
        ])
        .unwrap();
        let src = SourceLocation::spatial(0.0, 0.0, 100.0);
        let meas = synthesize_measurements(&array, &src, &NoiseModel::spatial(0.0, 0.0), 1).unwrap();
        let zreg = build_z_regression(&array, &meas, [0.0, 0.0]).unwrap();
        let pp: f64 = zreg.phi().iter().map(|p| p * p).sum::<f64>() / zreg.len() as f64;
        assert!(pp < 0.499);
        assert_eq!(bels_z(&zreg, 0.499).unwrap_err().kind(), "ill-conditioned");
    }

    #[test]
    fn z_regression_zero_variance_equals_plain_ls() {
        let array = noncoplanar().replicate(5);
        let src = SourceLocation::spatial(60.0, 10.0, 10.0);
        let meas = synthesize_measurements(&array, &src, &NoiseModel::spatial(0.2, 0.2), 8).unwrap();
        let zreg = build_z_regression(&array, &meas, [60.0, 10.0]).unwrap();
        let num: f64 = zreg.phi().iter().zip(zreg.gamma_hat()).map(|(p, g)| p * g).sum();
        let den: f64 = zreg.phi().iter().map(|p| p * p).sum();
        assert!((bels_z(&zreg, 0.0).unwrap() - num / den).abs() < 1e-10);
    }
}
