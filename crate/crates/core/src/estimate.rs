use std::fmt;

use serde::{Deserialize, Serialize};

/// Which procedure produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Plain least squares on the linearized regression.
    Pls,
    /// Bias-eliminated least squares.
    Bels,
    /// Bias-eliminated least squares followed by Gauss-Newton refinement.
    BelsGn,
    /// Gauss-Newton from a caller-supplied starting point.
    GaussNewton,
    /// Least squares with the noise-free regressors (simulation only).
    OracleUb,
    /// Grid search of the ML objective followed by Gauss-Newton to convergence.
    MlGrid,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Pls => "PLS",
            Method::Bels => "BELS",
            Method::BelsGn => "BELS+GN",
            Method::GaussNewton => "GN",
            Method::OracleUb => "ORACLE-UB",
            Method::MlGrid => "ML-GRID",
        })
    }
}

/// Intermediate quantities recorded while estimating.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Condition estimate of the (bias-corrected) planar Gram matrix.
    pub gram_condition: Option<f64>,
    /// Bias-corrected `Phi^T Phi / n - v` used by the z estimator.
    pub z_denominator: Option<f64>,
    /// Condition estimate of `J^T J` at the last Gauss-Newton iterate.
    pub gn_condition: Option<f64>,
    pub gn_iterations: usize,
    /// Norm of the last Gauss-Newton step.
    pub gn_step_norm: Option<f64>,
    /// Norm of the (weighted) residual vector at the last linearization point.
    pub gn_residual_norm: Option<f64>,
    /// The azimuth sine-variance estimate hit the upper clamp.
    pub v_sin_a_clamped: bool,
    /// The elevation sine-variance estimate hit the upper clamp.
    pub v_sin_e_clamped: bool,
}

/// A point estimate in `D` dimensions together with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate<const D: usize> {
    pub p_hat: [f64; D],
    pub method: Method,
    /// Sine variance of the azimuth noise used for bias elimination.
    pub v_sin_a: Option<f64>,
    /// Sine variance of the elevation noise used for bias elimination (3-D).
    pub v_sin_e: Option<f64>,
    pub diagnostics: Diagnostics,
}

pub type Estimate2d = Estimate<2>;
pub type Estimate3d = Estimate<3>;

impl<const D: usize> Estimate<D> {
    pub(crate) fn new(p_hat: [f64; D], method: Method) -> Self {
        Self { p_hat, method, v_sin_a: None, v_sin_e: None, diagnostics: Diagnostics::default() }
    }

    pub fn is_finite(&self) -> bool {
        self.p_hat.iter().all(|c| c.is_finite())
    }
}
