//! Finite-sample Fisher information and the root Cramér-Rao bound.
//!
//! Rows of the measurement Jacobian are weighted by the inverse noise level,
//! so `F = sum_i J_i^T J_i` in both dimensions. The bound reported is
//! `sqrt(tr F^{-1})`, the benchmark line for RMSE curves.

use crate::error::{AoaError, Result};
use crate::model::{bearing_gradient, elevation_gradient, SensorArray};
use crate::numerics::{symmetric_eigenvalues, SmallMatrix, MAX_CONDITION};

/// Fisher information of the source position at a given geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherInfo {
    pub matrix: SmallMatrix,
    pub n: usize,
    pub sigma_a: f64,
    pub sigma_e: Option<f64>,
}

impl FisherInfo {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

fn check_sigma(name: &str, sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(AoaError::UndefinedCrlb(format!("{name} = {sigma}; the bound needs a positive finite noise level")))
    }
}

/// Fisher information for azimuth-only measurements of a planar source.
///
/// For a 3-D array only the horizontal coordinates of each sensor are used.
pub fn fisher_2d(array: &SensorArray, source: [f64; 2], sigma_a: f64) -> Result<FisherInfo> {
    check_sigma("sigma_a", sigma_a)?;
    let w = 1.0 / (sigma_a * sigma_a);
    let mut f = SmallMatrix::zeros(2, 2);
    for s in array.xy_iter() {
        let g = bearing_gradient(s, source)?;
        f.add_outer(&g, w);
    }
    Ok(FisherInfo { matrix: f, n: array.len(), sigma_a, sigma_e: None })
}

/// Fisher information for joint azimuth/elevation measurements in space.
pub fn fisher_3d(array: &SensorArray, source: [f64; 3], sigma_a: f64, sigma_e: f64) -> Result<FisherInfo> {
    if array.dim() != 3 {
        return Err(AoaError::Usage("fisher_3d needs a 3-D sensor array".into()));
    }
    check_sigma("sigma_a", sigma_a)?;
    check_sigma("sigma_e", sigma_e)?;
    let (wa, we) = (1.0 / (sigma_a * sigma_a), 1.0 / (sigma_e * sigma_e));
    let mut f = SmallMatrix::zeros(3, 3);
    for s in array.positions() {
        let ga = bearing_gradient([s[0], s[1]], [source[0], source[1]])?;
        f.add_outer(&[ga[0], ga[1], 0.0], wa);
        f.add_outer(&elevation_gradient(*s, source)?, we);
    }
    Ok(FisherInfo { matrix: f, n: array.len(), sigma_a, sigma_e: Some(sigma_e) })
}

/// `sqrt(tr F^{-1})`, computed from the eigenvalues of `F`.
pub fn rcrlb(fisher: &FisherInfo) -> Result<f64> {
    let ev = symmetric_eigenvalues(&fisher.matrix);
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond <= MAX_CONDITION) {
        return Err(AoaError::Unidentifiable { cond });
    }
    Ok(ev.iter().map(|l| 1.0 / l).sum::<f64>().sqrt())
}
