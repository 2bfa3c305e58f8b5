//! Planar estimators: plain and bias-eliminated least squares on the
//! linearized bearing regression, the data-driven sine-variance estimator,
//! the ML objective and Gauss-Newton refinement.
//!
//! Every sensor contributes one row to the regression `Y = X p + V` with
//! `h_i = [sin a_i, -cos a_i]` and `Y_i = h_i^T p_i`. The noise term
//! `V_i = r_i sin(eps_i)` is correlated with `X`, so plain LS is biased;
//! subtracting `Var[sin eps] * I` from `X^T X / n` and `Var[sin eps] * mean(p_i)`
//! from `X^T Y / n` removes the bias.

use crate::error::{AoaError, Result};
use crate::estimate::{Estimate2d, Method};
use crate::model::{
    bearing_gradient, true_bearing_2d, var_sin, wrap_angle, MeasurementSet, NoiseModel, SensorArray,
};
use crate::numerics::{condition_spd, max_gen_eigenvalue, solve_spd, SmallMatrix};

/// Upper clamp applied to data-driven sine-variance estimates.
pub const V_SIN_MAX: f64 = 0.5 - 1e-9;

/// Gauss-Newton stops early once a step is shorter than this.
pub const GN_STEP_TOL: f64 = 1e-10;

/// Linearized planar regression built once per measurement set.
#[derive(Debug, Clone)]
pub struct Regression2d {
    x: Vec<[f64; 2]>,
    y: Vec<f64>,
    p_bar: [f64; 2],
    mean_sq_norm: f64,
    // (1/n) X^T X as [xx, xy, yy], (1/n) X^T Y and (1/n) Y^T Y
    gram: [f64; 3],
    moment: [f64; 2],
    yy: f64,
}

impl Regression2d {
    /// Builds the regression from planar sensor positions and azimuths.
    pub(crate) fn from_parts(
        positions: impl ExactSizeIterator<Item = [f64; 2]>,
        azimuths: &[f64],
    ) -> Self {
        let n = azimuths.len();
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        let (mut sx, mut sy, mut sq) = (0.0, 0.0, 0.0);
        let mut gram = [0.0; 3];
        let mut moment = [0.0; 2];
        let mut yy = 0.0;
        for (p, a) in positions.zip(azimuths) {
            let (s, c) = a.sin_cos();
            let h = [s, -c];
            let yi = h[0] * p[0] + h[1] * p[1];
            gram[0] += h[0] * h[0];
            gram[1] += h[0] * h[1];
            gram[2] += h[1] * h[1];
            moment[0] += h[0] * yi;
            moment[1] += h[1] * yi;
            yy += yi * yi;
            sx += p[0];
            sy += p[1];
            sq += p[0] * p[0] + p[1] * p[1];
            x.push(h);
            y.push(yi);
        }
        let inv = 1.0 / n as f64;
        gram.iter_mut().for_each(|g| *g *= inv);
        moment.iter_mut().for_each(|m| *m *= inv);
        Self { x, y, p_bar: [sx * inv, sy * inv], mean_sq_norm: sq * inv, gram, moment, yy: yy * inv }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Regressor rows `h_i^T`.
    pub fn rows(&self) -> &[[f64; 2]] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Mean sensor position.
    pub fn p_bar(&self) -> [f64; 2] {
        self.p_bar
    }

    /// `(1/n) sum ||p_i||^2`.
    pub fn mean_sq_norm(&self) -> f64 {
        self.mean_sq_norm
    }

    /// `X^T X / n`.
    pub fn gram(&self) -> SmallMatrix {
        let [a, b, c] = self.gram;
        SmallMatrix::from_rows(&[[a, b], [b, c]])
    }

    /// `X^T Y / n`.
    pub fn moment(&self) -> [f64; 2] {
        self.moment
    }

    /// `Q_n = (1/n) [X Y]^T [X Y]`.
    pub fn q_matrix(&self) -> SmallMatrix {
        let [a, b, c] = self.gram;
        let [m0, m1] = self.moment;
        SmallMatrix::from_rows(&[[a, b, m0], [b, c, m1], [m0, m1, self.yy]])
    }

    /// `S_n = [[I, p_bar], [p_bar^T, mean ||p_i||^2]]`.
    pub fn s_matrix(&self) -> SmallMatrix {
        let [px, py] = self.p_bar;
        SmallMatrix::from_rows(&[[1.0, 0.0, px], [0.0, 1.0, py], [px, py, self.mean_sq_norm]])
    }
}

fn require_planar(array: &SensorArray, meas: &MeasurementSet) -> Result<()> {
    if array.dim() != 2 {
        return Err(AoaError::Usage("expected a 2-D sensor array".into()));
    }
    meas.check_against(array)
}

/// Builds the planar regression for a 2-D array.
pub fn build_regression(array: &SensorArray, meas: &MeasurementSet) -> Result<Regression2d> {
    require_planar(array, meas)?;
    Ok(Regression2d::from_parts(array.xy_iter(), &meas.azimuths))
}

/// Plain least squares `(X^T X)^{-1} X^T Y`.
pub fn pls(reg: &Regression2d) -> Result<Estimate2d> {
    let mut est = corrected_ls(reg, 0.0)?;
    est.method = Method::Pls;
    Ok(est)
}

/// Bias-eliminated least squares for a given sine variance `v_sin`.
///
/// With `v_sin = 0` this is exactly [`pls`].
pub fn bels(reg: &Regression2d, v_sin: f64) -> Result<Estimate2d> {
    if !(0.0..0.5).contains(&v_sin) {
        return Err(AoaError::OutOfRange(format!("sine variance {v_sin} must lie in [0, 1/2)")));
    }
    let mut est = corrected_ls(reg, v_sin)?;
    est.v_sin_a = Some(v_sin);
    Ok(est)
}

fn corrected_ls(reg: &Regression2d, v: f64) -> Result<Estimate2d> {
    let [a, b, c] = reg.gram;
    let m = SmallMatrix::from_rows(&[[a - v, b], [b, c - v]]);
    let rhs = [reg.moment[0] - v * reg.p_bar[0], reg.moment[1] - v * reg.p_bar[1]];
    let sol = solve_spd(&m, &rhs)?;
    let mut est = Estimate2d::new([sol[0], sol[1]], Method::Bels);
    est.diagnostics.gram_condition = Some(condition_spd(&m));
    Ok(est)
}

/// Estimates `Var[sin eps]` as `1 / lambda_max(Q_n^{-1} S_n)`, clamped to
/// `[0, V_SIN_MAX]`.
pub fn estimate_var_sin_2d(reg: &Regression2d) -> Result<f64> {
    if reg.len() < 4 {
        return Err(AoaError::Usage(format!("sine-variance estimation needs n >= 4, got {}", reg.len())));
    }
    let lam = max_gen_eigenvalue(&reg.q_matrix(), &reg.s_matrix()).map_err(|e| match e {
        AoaError::InvalidScatter => {
            AoaError::DegenerateGeometry("all sensors coincide; sensor scatter is singular".into())
        }
        other => other,
    })?;
    Ok(clamp_v_sin(1.0 / lam))
}

pub(crate) fn clamp_v_sin(v: f64) -> f64 {
    v.clamp(0.0, V_SIN_MAX)
}

/// Mean squared wrapped azimuth residual at candidate source `p`.
pub fn ml_objective_2d(array: &SensorArray, meas: &MeasurementSet, p: [f64; 2]) -> Result<f64> {
    meas.check_against(array)?;
    let mut acc = 0.0;
    for (s, a) in array.xy_iter().zip(&meas.azimuths) {
        let r = wrap_angle(a - true_bearing_2d(s, p)?);
        acc += r * r;
    }
    Ok(acc / array.len() as f64)
}

/// Gauss-Newton iterations on the planar ML objective starting from `p_init`.
///
/// Performs at most `max_iters` steps, stopping early once a step is shorter
/// than [`GN_STEP_TOL`]. Residuals are wrapped to `(-pi, pi]`.
pub fn gn_refine_2d(
    array: &SensorArray,
    meas: &MeasurementSet,
    p_init: [f64; 2],
    max_iters: usize,
) -> Result<Estimate2d> {
    meas.check_against(array)?;
    if max_iters == 0 {
        return Err(AoaError::Usage("max_iters must be at least 1".into()));
    }
    if !p_init.iter().all(|c| c.is_finite()) {
        return Err(AoaError::Usage("initial estimate is not finite".into()));
    }
    let mut p = p_init;
    let mut est = Estimate2d::new(p, Method::GaussNewton);
    for _ in 0..max_iters {
        let mut jtj = [0.0; 3];
        let mut jtr = [0.0; 2];
        let mut rss = 0.0;
        for (s, a) in array.xy_iter().zip(&meas.azimuths) {
            let g = bearing_gradient(s, p)?;
            let r = wrap_angle(a - true_bearing_2d(s, p)?);
            jtj[0] += g[0] * g[0];
            jtj[1] += g[0] * g[1];
            jtj[2] += g[1] * g[1];
            jtr[0] += g[0] * r;
            jtr[1] += g[1] * r;
            rss += r * r;
        }
        let m = SmallMatrix::from_rows(&[[jtj[0], jtj[1]], [jtj[1], jtj[2]]]);
        let step = solve_spd(&m, &jtr)?;
        p = [p[0] + step[0], p[1] + step[1]];
        let d = &mut est.diagnostics;
        d.gn_iterations += 1;
        d.gn_condition = Some(condition_spd(&m));
        d.gn_residual_norm = Some(rss.sqrt());
        let step_norm = step[0].hypot(step[1]);
        d.gn_step_norm = Some(step_norm);
        if step_norm < GN_STEP_TOL {
            break;
        }
    }
    est.p_hat = p;
    Ok(est)
}

/// Two-step estimator: bias-eliminated LS (with known or estimated sine
/// variance) followed by exactly one Gauss-Newton step.
pub fn two_step_2d(array: &SensorArray, meas: &MeasurementSet, noise: &NoiseModel) -> Result<Estimate2d> {
    two_step_2d_iters(array, meas, noise, 1)
}

/// [`two_step_2d`] with a configurable number of Gauss-Newton iterations.
pub fn two_step_2d_iters(
    array: &SensorArray,
    meas: &MeasurementSet,
    noise: &NoiseModel,
    gn_iters: usize,
) -> Result<Estimate2d> {
    noise.validate()?;
    let reg = build_regression(array, meas)?;
    if reg.len() < 4 {
        return Err(AoaError::Usage(format!("two-step estimation needs n >= 4, got {}", reg.len())));
    }
    let (v, clamped) = match noise.sigma_a {
        Some(s) => (var_sin(s), false),
        None => {
            let v = estimate_var_sin_2d(&reg)?;
            (v, v >= V_SIN_MAX)
        }
    };
    let init = bels(&reg, v)?;
    let mut est = gn_refine_2d(array, meas, init.p_hat, gn_iters)?;
    est.method = Method::BelsGn;
    est.v_sin_a = Some(v);
    est.diagnostics.gram_condition = init.diagnostics.gram_condition;
    est.diagnostics.v_sin_a_clamped = clamped;
    Ok(est)
}
