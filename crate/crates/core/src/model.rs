//! Domain types, measurement synthesis and the closed-form Gaussian
//! trigonometric moments consumed by the estimators.
//!
//! Angles follow the full-circle convention: the azimuth observed by sensor
//! `i` is the two-argument angle of the vector `p_i - p0`, and the elevation
//! is `atan((z_i - z0) / r_i)` with `r_i` the planar sensor-source distance.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{AoaError, Result};

/// Two points closer than this (in scenario units) are considered coincident.
pub const COINCIDENCE_TOL: f64 = 1e-9;

/// Ordered list of known sensor coordinates.
///
/// Positions are stored as 3-vectors; for planar arrays the third component
/// is zero and never read.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorArray {
    dim: usize,
    positions: Vec<[f64; 3]>,
}

impl SensorArray {
    pub const MIN_SENSORS: usize = 3;

    pub fn planar(points: impl IntoIterator<Item = [f64; 2]>) -> Result<Self> {
        let positions = points.into_iter().map(|[x, y]| [x, y, 0.0]).collect();
        Self::checked(2, positions)
    }

    pub fn spatial(points: impl IntoIterator<Item = [f64; 3]>) -> Result<Self> {
        Self::checked(3, points.into_iter().collect())
    }

    /// Builds an array from coordinate rows, each of which must have length `dim`.
    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(AoaError::Usage(format!("dimension must be 2 or 3, got {dim}")));
        }
        let mut positions = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(AoaError::Usage(format!(
                    "sensor {i} has {} coordinates, expected {dim}",
                    row.len()
                )));
            }
            let mut p = [0.0; 3];
            p[..dim].copy_from_slice(row);
            positions.push(p);
        }
        Self::checked(dim, positions)
    }

    fn checked(dim: usize, positions: Vec<[f64; 3]>) -> Result<Self> {
        if positions.len() < Self::MIN_SENSORS {
            return Err(AoaError::Usage(format!(
                "at least {} sensors required, got {}",
                Self::MIN_SENSORS,
                positions.len()
            )));
        }
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(AoaError::Usage("sensor coordinates must be finite".into()));
        }
        Ok(Self { dim, positions })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Raw positions; the z component is zero for planar arrays.
    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn xy(&self, i: usize) -> [f64; 2] {
        let p = self.positions[i];
        [p[0], p[1]]
    }

    pub fn xy_iter(&self) -> impl ExactSizeIterator<Item = [f64; 2]> + '_ {
        self.positions.iter().map(|p| [p[0], p[1]])
    }

    /// Drops the z coordinate.
    pub fn project_xy(&self) -> SensorArray {
        SensorArray {
            dim: 2,
            positions: self.positions.iter().map(|p| [p[0], p[1], 0.0]).collect(),
        }
    }

    /// Concatenates `rounds` copies of the array: sensor `t * len + s` is site `s`.
    pub fn replicate(&self, rounds: usize) -> SensorArray {
        let mut positions = Vec::with_capacity(self.positions.len() * rounds);
        for _ in 0..rounds {
            positions.extend_from_slice(&self.positions);
        }
        SensorArray { dim: self.dim, positions }
    }

    /// Checks that a source is usable with this array: matching dimension, no
    /// coincident sensor and, in 3-D, no sensor on the source's vertical line.
    pub fn check_source(&self, source: &SourceLocation) -> Result<()> {
        if source.dim() != self.dim {
            return Err(AoaError::Usage(format!(
                "source has dimension {}, array has dimension {}",
                source.dim(),
                self.dim
            )));
        }
        let s = source.coords;
        for (i, p) in self.positions.iter().enumerate() {
            let planar = (p[0] - s[0]).hypot(p[1] - s[1]);
            if planar < COINCIDENCE_TOL {
                let what = if self.dim == 2 { "coincides with" } else { "is vertically aligned with" };
                return Err(AoaError::DegenerateGeometry(format!("sensor {i} {what} the source")));
            }
        }
        Ok(())
    }
}

/// Source coordinates (planar or spatial).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SourceLocation {
    dim: usize,
    coords: [f64; 3],
}

impl SourceLocation {
    pub fn planar(x: f64, y: f64) -> Self {
        Self { dim: 2, coords: [x, y, 0.0] }
    }

    pub fn spatial(x: f64, y: f64, z: f64) -> Self {
        Self { dim: 3, coords: [x, y, z] }
    }

    pub fn from_slice(c: &[f64]) -> Result<Self> {
        match *c {
            [x, y] => Ok(Self::planar(x, y)),
            [x, y, z] => Ok(Self::spatial(x, y, z)),
            _ => Err(AoaError::Usage(format!("source must have 2 or 3 coordinates, got {}", c.len()))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn xy(&self) -> [f64; 2] {
        [self.coords[0], self.coords[1]]
    }

    pub fn xyz(&self) -> [f64; 3] {
        self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim]
    }
}

impl TryFrom<Vec<f64>> for SourceLocation {
    type Error = AoaError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::from_slice(&v)
    }
}

impl From<SourceLocation> for Vec<f64> {
    fn from(s: SourceLocation) -> Self {
        s.as_slice().to_vec()
    }
}

/// Gaussian angle-noise standard deviations in radians. `None` means the
/// level is unknown and must be estimated from the data.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_e: Option<f64>,
}

impl NoiseModel {
    pub fn planar(sigma_a: f64) -> Self {
        Self { sigma_a: Some(sigma_a), sigma_e: None }
    }

    pub fn spatial(sigma_a: f64, sigma_e: f64) -> Self {
        Self { sigma_a: Some(sigma_a), sigma_e: Some(sigma_e) }
    }

    pub fn unknown() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("sigma_a", self.sigma_a), ("sigma_e", self.sigma_e)] {
            if let Some(s) = s {
                if !(0.0..PI).contains(&s) {
                    return Err(AoaError::OutOfRange(format!("{name} = {s} must lie in [0, pi)")));
                }
            }
        }
        Ok(())
    }

    /// True when every level needed for `dim` is given.
    pub fn is_known(&self, dim: usize) -> bool {
        self.sigma_a.is_some() && (dim == 2 || self.sigma_e.is_some())
    }
}

/// Noisy angle measurements, one entry per sensor.
///
/// Azimuths are stored as `true bearing + noise` without re-wrapping; every
/// consumer goes through `sin`/`cos` or wraps residuals explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub azimuths: Vec<f64>,
    pub elevations: Option<Vec<f64>>,
}

impl MeasurementSet {
    pub fn planar(azimuths: Vec<f64>) -> Self {
        Self { azimuths, elevations: None }
    }

    pub fn spatial(azimuths: Vec<f64>, elevations: Vec<f64>) -> Result<Self> {
        if azimuths.len() != elevations.len() {
            return Err(AoaError::Usage(format!(
                "{} azimuths but {} elevations",
                azimuths.len(),
                elevations.len()
            )));
        }
        Ok(Self { azimuths, elevations: Some(elevations) })
    }

    pub fn len(&self) -> usize {
        self.azimuths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.azimuths.is_empty()
    }

    /// Verifies that the set matches `array` in length and dimension.
    pub fn check_against(&self, array: &SensorArray) -> Result<()> {
        if self.len() != array.len() {
            return Err(AoaError::Usage(format!(
                "{} measurements for {} sensors",
                self.len(),
                array.len()
            )));
        }
        match (array.dim(), &self.elevations) {
            (2, _) => Ok(()),
            (3, Some(_)) => Ok(()),
            _ => Err(AoaError::Usage("3-D array requires elevation measurements".into())),
        }
    }

    pub(crate) fn elevations_or_err(&self) -> Result<&[f64]> {
        self.elevations
            .as_deref()
            .ok_or_else(|| AoaError::Usage("elevation measurements required".into()))
    }
}

/// Maps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Full-circle azimuth of `sensor - source`, in `(-pi, pi]`.
pub fn true_bearing_2d(sensor: [f64; 2], source: [f64; 2]) -> Result<f64> {
    let dx = sensor[0] - source[0];
    let dy = sensor[1] - source[1];
    if dx.hypot(dy) < COINCIDENCE_TOL {
        return Err(AoaError::DegenerateGeometry("sensor coincides with source".into()));
    }
    Ok(wrap_angle(dy.atan2(dx)))
}

/// Elevation of `sensor` as seen from `source`, in `(-pi/2, pi/2)`.
pub fn true_elevation_3d(sensor: [f64; 3], source: [f64; 3]) -> Result<f64> {
    let r = (sensor[0] - source[0]).hypot(sensor[1] - source[1]);
    if r < COINCIDENCE_TOL {
        return Err(AoaError::DegenerateGeometry(
            "sensor is vertically aligned with the source".into(),
        ));
    }
    Ok(((sensor[2] - source[2]) / r).atan())
}

/// Gradient of the azimuth `atan2(y_i - y, x_i - x)` with respect to the
/// source coordinates `p = (x, y)`.
pub fn bearing_gradient(sensor: [f64; 2], p: [f64; 2]) -> Result<[f64; 2]> {
    let dx = sensor[0] - p[0];
    let dy = sensor[1] - p[1];
    let r2 = dx * dx + dy * dy;
    if r2 < COINCIDENCE_TOL * COINCIDENCE_TOL {
        return Err(AoaError::DegenerateGeometry("iterate coincides with a sensor".into()));
    }
    Ok([dy / r2, -dx / r2])
}

/// Gradient of the elevation `atan((z_i - z) / r_i)` with respect to
/// `p = (x, y, z)`, where `r_i` is the planar distance.
pub fn elevation_gradient(sensor: [f64; 3], p: [f64; 3]) -> Result<[f64; 3]> {
    let dx = sensor[0] - p[0];
    let dy = sensor[1] - p[1];
    let dz = sensor[2] - p[2];
    let r = dx.hypot(dy);
    if r < COINCIDENCE_TOL {
        return Err(AoaError::DegenerateGeometry(
            "iterate is vertically aligned with a sensor".into(),
        ));
    }
    let d2 = r * r + dz * dz;
    Ok([dx * dz / (r * d2), dy * dz / (r * d2), -r / d2])
}

/// Draws one noisy measurement per sensor.
///
/// Sensor `i` draws its azimuth noise (then its elevation noise, in 3-D) from
/// ChaCha8 stream `i` of the generator seeded with `rng_seed`, so growing the
/// array never perturbs the draws of existing sensors.
pub fn synthesize_measurements(
    array: &SensorArray,
    source: &SourceLocation,
    noise: &NoiseModel,
    rng_seed: u64,
) -> Result<MeasurementSet> {
    noise.validate()?;
    if !noise.is_known(array.dim()) {
        return Err(AoaError::Usage("synthesis needs fully known noise levels".into()));
    }
    array.check_source(source)?;
    let sigma_a = noise.sigma_a.unwrap_or(0.0);
    let sigma_e = noise.sigma_e.unwrap_or(0.0);
    let spatial = array.dim() == 3;
    let base = ChaCha8Rng::seed_from_u64(rng_seed);

    let mut azimuths = Vec::with_capacity(array.len());
    let mut elevations = Vec::with_capacity(if spatial { array.len() } else { 0 });
    for (i, p) in array.positions().iter().enumerate() {
        let mut rng = base.clone();
        rng.set_stream(i as u64);
        let eps_a: f64 = StandardNormal.sample(&mut rng);
        azimuths.push(true_bearing_2d([p[0], p[1]], source.xy())? + sigma_a * eps_a);
        if spatial {
            let eps_e: f64 = StandardNormal.sample(&mut rng);
            elevations.push(true_elevation_3d(*p, source.xyz())? + sigma_e * eps_e);
        }
    }
    Ok(MeasurementSet { azimuths, elevations: spatial.then_some(elevations) })
}

/// `E[cos X]` for `X ~ N(0, sigma^2)`.
pub fn mean_cos(sigma: f64) -> f64 {
    (-0.5 * sigma * sigma).exp()
}

/// `Var[sin X] = (1 - exp(-2 sigma^2)) / 2` for `X ~ N(0, sigma^2)`.
pub fn var_sin(sigma: f64) -> f64 {
    -0.5 * (-2.0 * sigma * sigma).exp_m1()
}

/// `Var[cos X] = (exp(-2 sigma^2) + 1 - 2 exp(-sigma^2)) / 2 = (1 - exp(-sigma^2))^2 / 2`.
pub fn var_cos(sigma: f64) -> f64 {
    let d = (-sigma * sigma).exp_m1();
    0.5 * d * d
}

/// Inverse of [`var_sin`] on `[0, 1/2)`.
pub fn sigma_from_var_sin(v: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&v) {
        return Err(AoaError::OutOfRange(format!("variance of sine {v} must lie in [0, 1/2)")));
    }
    Ok((-0.5 * (-2.0 * v).ln_1p()).sqrt())
}
