//! Built-in scenarios reproducing the reference simulation studies.
//!
//! Fixed-site scenarios measure each of ten sites `T` times, so
//! `n = 10 T` with `T` in {10, 30, 100, 200, 300, 500}.

use crate::harness::{ArraySpec, EstimatorKind, Scenario};
use crate::model::{NoiseModel, SourceLocation};

use EstimatorKind::*;

pub const DEFAULT_RUNS: usize = 1000;
pub const DEFAULT_SEED: u64 = 20_240_607;

/// Sample sizes shared by the fixed-site and random-circle sweeps.
pub const N_SWEEP: [usize; 6] = [100, 300, 1000, 2000, 3000, 5000];

/// Noise levels of the varying-noise sweeps.
pub const SIGMA_SWEEP: [f64; 6] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3];

pub const SITES_2D: [[f64; 2]; 10] = [
    [0.0, 100.0],
    [0.0, 50.0],
    [50.0, 50.0],
    [50.0, 0.0],
    [50.0, -50.0],
    [0.0, -50.0],
    [0.0, -100.0],
    [-50.0, -50.0],
    [-50.0, 0.0],
    [-50.0, 50.0],
];

pub const SITES_3D: [[f64; 3]; 10] = [
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
];

const POSITION_ESTIMATORS: [EstimatorKind; 5] = [Pls, Bels, BelsGn, BelsVhat, BelsVhatGn];

/// A named group of scenarios.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub scenarios: Vec<Scenario>,
}

/// Rounds per site for the varying-noise sweeps: `base` up to sigma = 0.2,
/// then growing in proportion to sigma^2.
pub fn rounds_for_sigma(base: usize, sigma: f64) -> usize {
    if sigma <= 0.2 {
        base
    } else {
        (base as f64 * (sigma / 0.2).powi(2)).round() as usize
    }
}

fn sites_2d() -> Vec<Vec<f64>> {
    SITES_2D.iter().map(|p| p.to_vec()).collect()
}

fn sites_3d() -> Vec<Vec<f64>> {
    SITES_3D.iter().map(|p| p.to_vec()).collect()
}

fn coplanar_sites() -> Vec<Vec<f64>> {
    SITES_2D.iter().map(|p| vec![p[0], p[1], 0.0]).collect()
}

fn scenario(
    name: impl Into<String>,
    array: ArraySpec,
    source: SourceLocation,
    noise: NoiseModel,
    n_list: Vec<usize>,
    estimators: &[EstimatorKind],
) -> Scenario {
    Scenario {
        name: name.into(),
        array,
        source,
        noise,
        n_list,
        estimators: estimators.to_vec(),
        runs: DEFAULT_RUNS,
        base_seed: DEFAULT_SEED,
    }
}

fn fixed_2d(estimators: &[EstimatorKind], name: &str) -> Scenario {
    scenario(
        name,
        ArraySpec::Replicated { sites: sites_2d() },
        SourceLocation::planar(60.0, 10.0),
        NoiseModel::planar(0.2),
        N_SWEEP.to_vec(),
        estimators,
    )
}

fn spatial(name: &str, sites: Vec<Vec<f64>>, source: SourceLocation) -> Scenario {
    scenario(
        name,
        ArraySpec::Replicated { sites },
        source,
        NoiseModel::spatial(0.2, 0.2),
        N_SWEEP.to_vec(),
        &[Pls, Bels, BelsGn, BelsVhat, BelsVhatGn, VhatA, VhatE, ZBels],
    )
}

fn varying_noise(prefix: &str, base_rounds: usize, dim: usize) -> Vec<Scenario> {
    SIGMA_SWEEP
        .iter()
        .map(|&sigma| {
            let n = 10 * rounds_for_sigma(base_rounds, sigma);
            let name = format!("{prefix}[sigma={sigma}]");
            if dim == 2 {
                scenario(
                    name,
                    ArraySpec::Replicated { sites: sites_2d() },
                    SourceLocation::planar(60.0, 10.0),
                    NoiseModel::planar(sigma),
                    vec![n],
                    &POSITION_ESTIMATORS,
                )
            } else {
                scenario(
                    name,
                    ArraySpec::Replicated { sites: sites_3d() },
                    SourceLocation::spatial(60.0, 10.0, 10.0),
                    NoiseModel::spatial(sigma, sigma),
                    vec![n],
                    &POSITION_ESTIMATORS,
                )
            }
        })
        .collect()
}

/// Every built-in preset.
pub fn all_presets() -> Vec<Preset> {
    vec![
        Preset {
            name: "paper-2d-fixed",
            description: "2-D, ten fixed sites, source (60,10), sigma 0.2, n = 100..5000",
            scenarios: vec![fixed_2d(&POSITION_ESTIMATORS, "paper-2d-fixed")],
        },
        Preset {
            name: "paper-table1",
            description: "2-D fixed sites: RMSE of the estimated azimuth sine variance",
            scenarios: vec![fixed_2d(&[VhatA], "paper-table1")],
        },
        Preset {
            name: "paper-2d-varying-noise",
            description: "2-D fixed sites, sigma 0.05..0.3, T = 100 (scaled with sigma^2 above 0.2)",
            scenarios: varying_noise("paper-2d-varying-noise", 100, 2),
        },
        Preset {
            name: "paper-2d-random",
            description: "2-D, n fresh sensors per run on a radius-100 circle, source (150,0), sigma 0.2",
            scenarios: vec![scenario(
                "paper-2d-random",
                ArraySpec::RandomCircle { radius: 100.0, center: vec![0.0, 0.0] },
                SourceLocation::planar(150.0, 0.0),
                NoiseModel::planar(0.2),
                N_SWEEP.to_vec(),
                &[Pls, Bels, BelsGn, BelsVhatGn, VhatA],
            )],
        },
        Preset {
            name: "paper-3d-noncoplanar",
            description: "3-D, ten noncoplanar sites, source (60,10,10), sigma_a = sigma_e = 0.2",
            scenarios: vec![spatial("paper-3d-noncoplanar", sites_3d(), SourceLocation::spatial(60.0, 10.0, 10.0))],
        },
        Preset {
            name: "paper-3d-varying-noise",
            description: "3-D noncoplanar sites, sigma 0.05..0.3, T = 200 (scaled with sigma^2 above 0.2)",
            scenarios: varying_noise("paper-3d-varying-noise", 200, 3),
        },
        Preset {
            name: "paper-3d-coplanar-offplane",
            description: "3-D, sites on z = 0, source (60,10,10) off the sensor plane",
            scenarios: vec![spatial(
                "paper-3d-coplanar-offplane",
                coplanar_sites(),
                SourceLocation::spatial(60.0, 10.0, 10.0),
            )],
        },
        Preset {
            name: "paper-3d-coplanar",
            description: "3-D, sites on z = 0, source (60,10,0) in the sensor plane",
            scenarios: vec![spatial("paper-3d-coplanar", coplanar_sites(), SourceLocation::spatial(60.0, 10.0, 0.0))],
        },
    ]
}

/// Looks up a preset by name.
pub fn preset(name: &str) -> Option<Preset> {
    all_presets().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for p in all_presets() {
            assert!(!p.scenarios.is_empty(), "{}", p.name);
            for s in &p.scenarios {
                s.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            }
        }
    }

    #[test]
    fn varying_noise_rounds() {
        assert_eq!(rounds_for_sigma(100, 0.05), 100);
        assert_eq!(rounds_for_sigma(100, 0.2), 100);
        assert_eq!(rounds_for_sigma(100, 0.25), 156);
        assert_eq!(rounds_for_sigma(100, 0.3), 225);
        assert_eq!(rounds_for_sigma(200, 0.3), 450);
    }

    #[test]
    fn lookup_by_name() {
        assert!(preset("paper-table1").is_some());
        assert!(preset("nope").is_none());
    }
}
