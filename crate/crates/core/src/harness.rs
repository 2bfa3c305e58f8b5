//! Monte Carlo campaigns: scenario definitions, per-run seeding, estimator
//! dispatch and the bias/RMSE aggregation.
//!
//! Every run derives its own seed from `(base_seed, n, run)`, so a campaign
//! is bit-identical regardless of how many worker threads execute it.
//! Aggregation walks the runs in index order.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crlb::{fisher_2d, fisher_3d, rcrlb};
use crate::error::{AoaError, Result};
use crate::estimator2d::{bels, build_regression, estimate_var_sin_2d, gn_refine_2d, pls};
use crate::estimator3d::{bels_3d, planar_regression_3d, pls_3d, refine_bels_3d};
use crate::estimate::Estimate3d;
use crate::model::{synthesize_measurements, var_sin, MeasurementSet, NoiseModel, SensorArray, SourceLocation};

/// Fraction of failed runs above which a campaign cell is flagged invalid.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

/// Quantities a campaign can evaluate in each run.
///
/// The first five are source-position estimators. `VhatA`/`VhatE` score the
/// data-driven sine-variance estimates against `Var[sin eps]`, and `ZBels`
/// scores the bias-eliminated height alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "PLS")]
    Pls,
    #[serde(rename = "BELS")]
    Bels,
    #[serde(rename = "BELS+GN")]
    BelsGn,
    #[serde(rename = "BELS(vhat)")]
    BelsVhat,
    #[serde(rename = "BELS(vhat)+GN")]
    BelsVhatGn,
    #[serde(rename = "VHAT_A")]
    VhatA,
    #[serde(rename = "VHAT_E")]
    VhatE,
    #[serde(rename = "Z_BELS")]
    ZBels,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 8] = [
        EstimatorKind::Pls,
        EstimatorKind::Bels,
        EstimatorKind::BelsGn,
        EstimatorKind::BelsVhat,
        EstimatorKind::BelsVhatGn,
        EstimatorKind::VhatA,
        EstimatorKind::VhatE,
        EstimatorKind::ZBels,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Pls => "PLS",
            EstimatorKind::Bels => "BELS",
            EstimatorKind::BelsGn => "BELS+GN",
            EstimatorKind::BelsVhat => "BELS(vhat)",
            EstimatorKind::BelsVhatGn => "BELS(vhat)+GN",
            EstimatorKind::VhatA => "VHAT_A",
            EstimatorKind::VhatE => "VHAT_E",
            EstimatorKind::ZBels => "Z_BELS",
        }
    }

    /// Whether the output is a source position (and so has a CRLB line).
    pub fn is_position(self) -> bool {
        !matches!(self, EstimatorKind::VhatA | EstimatorKind::VhatE | EstimatorKind::ZBels)
    }

    fn spatial_only(self) -> bool {
        matches!(self, EstimatorKind::VhatE | EstimatorKind::ZBels)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = AoaError;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = EstimatorKind::ALL.iter().map(|k| k.name()).collect();
                AoaError::Usage(format!("unknown estimator `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// How the sensor array for a given sample size is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ArraySpec {
    /// Exactly these sensors; every `n` must equal their count.
    Fixed { positions: Vec<Vec<f64>> },
    /// Each site measured `n / sites.len()` times.
    Replicated { sites: Vec<Vec<f64>> },
    /// `n` fresh sensors per run, uniform on a horizontal circle.
    RandomCircle { radius: f64, center: Vec<f64> },
}

/// One Monte Carlo experiment: a geometry, a noise level and a sweep over `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub array: ArraySpec,
    pub source: SourceLocation,
    /// True noise levels used to synthesize measurements.
    pub noise: NoiseModel,
    #[serde(rename = "n")]
    pub n_list: Vec<usize>,
    pub estimators: Vec<EstimatorKind>,
    pub runs: usize,
    pub base_seed: u64,
}

fn usage(msg: impl Into<String>) -> AoaError {
    AoaError::Usage(msg.into())
}

impl Scenario {
    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    /// Checks the scenario before any run is started.
    pub fn validate(&self) -> Result<()> {
        let ctx = |msg: String| usage(format!("scenario `{}`: {msg}", self.name));
        if self.name.trim().is_empty() {
            return Err(usage("scenario name must not be empty"));
        }
        if self.runs == 0 {
            return Err(ctx("runs must be at least 1".into()));
        }
        if self.n_list.is_empty() {
            return Err(ctx("n list must not be empty".into()));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ctx("n list must be strictly ascending".into()));
        }
        if self.n_list[0] < 3 {
            return Err(ctx("every n must be at least 3".into()));
        }
        if self.estimators.is_empty() {
            return Err(ctx("no estimators requested".into()));
        }
        for (i, k) in self.estimators.iter().enumerate() {
            if self.estimators[..i].contains(k) {
                return Err(ctx(format!("estimator {k} listed twice")));
            }
            if k.spatial_only() && self.dim() != 3 {
                return Err(ctx(format!("estimator {k} needs a 3-D scenario")));
            }
        }
        self.noise.validate().map_err(|e| ctx(e.to_string()))?;
        if !self.noise.is_known(self.dim()) {
            return Err(ctx("simulation needs every noise level of the scenario's dimension".into()));
        }
        match &self.array {
            ArraySpec::Fixed { positions } => {
                let array = SensorArray::from_rows(self.dim(), positions).map_err(|e| ctx(e.to_string()))?;
                array.check_source(&self.source).map_err(|e| ctx(e.to_string()))?;
                if let Some(n) = self.n_list.iter().find(|&&n| n != positions.len()) {
                    return Err(ctx(format!("fixed array has {} sensors but n = {n} requested", positions.len())));
                }
            }
            ArraySpec::Replicated { sites } => {
                let array = SensorArray::from_rows(self.dim(), sites).map_err(|e| ctx(e.to_string()))?;
                array.check_source(&self.source).map_err(|e| ctx(e.to_string()))?;
                if let Some(n) = self.n_list.iter().find(|&&n| n % sites.len() != 0) {
                    return Err(ctx(format!("n = {n} is not a multiple of the {} sites", sites.len())));
                }
            }
            ArraySpec::RandomCircle { radius, center } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(ctx(format!("circle radius must be positive, got {radius}")));
                }
                if center.len() != self.dim() || !center.iter().all(|c| c.is_finite()) {
                    return Err(ctx(format!("circle center needs {} finite coordinates", self.dim())));
                }
            }
        }
        Ok(())
    }

    /// The array for sample size `n`, or `None` when it is drawn per run.
    fn shared_array(&self, n: usize) -> Result<Option<SensorArray>> {
        match &self.array {
            ArraySpec::Fixed { positions } => SensorArray::from_rows(self.dim(), positions).map(Some),
            ArraySpec::Replicated { sites } => {
                Ok(Some(SensorArray::from_rows(self.dim(), sites)?.replicate(n / sites.len())))
            }
            ArraySpec::RandomCircle { .. } => Ok(None),
        }
    }
}

/// `n` sensors at uniform angles on a horizontal circle. The angles come from
/// a stream of `seed` that measurement synthesis never uses.
pub fn random_circle_array(radius: f64, center: &[f64], n: usize, seed: u64) -> Result<SensorArray> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let beta = rng.random::<f64>() * std::f64::consts::TAU;
            let mut p = center.to_vec();
            p[0] += radius * beta.cos();
            p[1] += radius * beta.sin();
            p
        })
        .collect();
    SensorArray::from_rows(center.len(), &rows)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-run seed: `splitmix64(splitmix64(splitmix64(base) ^ n) ^ run)`, with
/// the standard SplitMix64 finalizer.
pub fn derive_seed(base_seed: u64, n: usize, run: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ n as u64) ^ run as u64)
}

/// Running sums for bias and RMSE; feed estimates in a fixed order for
/// bit-reproducible results.
#[derive(Debug, Clone)]
pub struct MetricAccumulator {
    truth: Vec<f64>,
    sum: Vec<f64>,
    sum_sq_err: f64,
    count: usize,
}

impl MetricAccumulator {
    pub fn new(truth: &[f64]) -> Self {
        MetricAccumulator { truth: truth.to_vec(), sum: vec![0.0; truth.len()], sum_sq_err: 0.0, count: 0 }
    }

    pub fn push(&mut self, estimate: &[f64]) -> Result<()> {
        if estimate.len() != self.truth.len() {
            return Err(usage(format!("estimate has {} coordinates, truth has {}", estimate.len(), self.truth.len())));
        }
        for ((s, e), t) in self.sum.iter_mut().zip(estimate).zip(&self.truth) {
            *s += e;
            self.sum_sq_err += (e - t) * (e - t);
        }
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `(bias, rmse)`; bias is the sum of absolute componentwise deviations
    /// of the mean estimate.
    pub fn finish(&self) -> Result<(f64, f64)> {
        if self.count == 0 {
            return Err(usage("metrics need at least one estimate"));
        }
        let n = self.count as f64;
        let bias = self.sum.iter().zip(&self.truth).map(|(s, t)| (s / n - t).abs()).sum();
        Ok((bias, (self.sum_sq_err / n).sqrt()))
    }
}

/// Bias and RMSE of a set of estimates against the truth.
pub fn metrics<E: AsRef<[f64]>>(estimates: &[E], truth: &[f64]) -> Result<(f64, f64)> {
    let mut acc = MetricAccumulator::new(truth);
    for e in estimates {
        acc.push(e.as_ref())?;
    }
    acc.finish()
}

/// Aggregated result for one (scenario, n, estimator) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McRow {
    pub scenario: String,
    pub n: usize,
    pub estimator: EstimatorKind,
    /// `NaN` when every run failed.
    pub bias: f64,
    pub rmse: f64,
    /// Root CRLB at the true noise level; `None` for scalar quantities or
    /// when the bound is undefined.
    pub rcrlb: Option<f64>,
    pub runs_completed: usize,
    pub runs_failed: usize,
    pub base_seed: u64,
}

impl McRow {
    /// A cell is valid when at most 1% of its runs failed.
    pub fn is_valid(&self) -> bool {
        let total = (self.runs_completed + self.runs_failed) as f64;
        self.runs_completed > 0 && self.runs_failed as f64 <= MAX_FAILURE_FRACTION * total
    }

    pub fn ratio_to_bound(&self) -> Option<f64> {
        self.rcrlb.map(|b| self.rmse / b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub scenario: String,
    pub base_seed: u64,
    pub rows: Vec<McRow>,
}

impl McSummary {
    pub fn row(&self, n: usize, estimator: EstimatorKind) -> Option<&McRow> {
        self.rows.iter().find(|r| r.n == n && r.estimator == estimator)
    }

    pub fn rows_for(&self, estimator: EstimatorKind) -> impl Iterator<Item = &McRow> {
        self.rows.iter().filter(move |r| r.estimator == estimator)
    }
}

/// Output of one estimator in one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub n: usize,
    pub run: usize,
    pub seed: u64,
    pub estimator: EstimatorKind,
    /// Estimated coordinates (or the single scalar), absent on failure.
    pub estimate: Option<Vec<f64>>,
    /// Error kind when the estimator failed.
    pub error: Option<&'static str>,
}

struct RunOutput {
    seed: u64,
    /// `tr F^{-1}` for arrays drawn in this run.
    trace_inv_fisher: Option<f64>,
    results: Vec<Result<Vec<f64>, &'static str>>,
}

fn truth_for(kind: EstimatorKind, scenario: &Scenario) -> Vec<f64> {
    let sigma = |s: Option<f64>| var_sin(s.unwrap_or(0.0));
    match kind {
        EstimatorKind::VhatA => vec![sigma(scenario.noise.sigma_a)],
        EstimatorKind::VhatE => vec![sigma(scenario.noise.sigma_e)],
        EstimatorKind::ZBels => vec![scenario.source.xyz()[2]],
        _ => scenario.source.as_slice().to_vec(),
    }
}

fn finite(v: Vec<f64>) -> Result<Vec<f64>> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(AoaError::IllConditioned { cond: f64::INFINITY })
    }
}

/// Evaluates every requested estimator on one measurement set, sharing the
/// intermediate results between them.
pub fn evaluate_estimators(
    kinds: &[EstimatorKind],
    array: &SensorArray,
    meas: &MeasurementSet,
    noise: &NoiseModel,
) -> Vec<Result<Vec<f64>>> {
    if array.dim() == 2 {
        evaluate_2d(kinds, array, meas, noise)
    } else {
        evaluate_3d(kinds, array, meas, noise)
    }
}

fn evaluate_2d(
    kinds: &[EstimatorKind],
    array: &SensorArray,
    meas: &MeasurementSet,
    noise: &NoiseModel,
) -> Vec<Result<Vec<f64>>> {
    let reg = match build_regression(array, meas) {
        Ok(r) => r,
        Err(e) => return kinds.iter().map(|_| Err(e.clone())).collect(),
    };
    let v_known = var_sin(noise.sigma_a.unwrap_or(0.0));
    let mut known: Option<Result<[f64; 2]>> = None;
    let mut vhat: Option<Result<f64>> = None;
    let mut with_vhat: Option<Result<[f64; 2]>> = None;
    let gn = |p: [f64; 2]| gn_refine_2d(array, meas, p, 1).map(|e| e.p_hat.to_vec());

    kinds
        .iter()
        .map(|kind| {
            let out = match kind {
                EstimatorKind::Pls => pls(&reg).map(|e| e.p_hat.to_vec()),
                EstimatorKind::Bels | EstimatorKind::BelsGn => {
                    let p = known.get_or_insert_with(|| bels(&reg, v_known).map(|e| e.p_hat)).clone();
                    match kind {
                        EstimatorKind::Bels => p.map(|p| p.to_vec()),
                        _ => p.and_then(gn),
                    }
                }
                EstimatorKind::VhatA => vhat.get_or_insert_with(|| estimate_var_sin_2d(&reg)).clone().map(|v| vec![v]),
                EstimatorKind::BelsVhat | EstimatorKind::BelsVhatGn => {
                    let v = vhat.get_or_insert_with(|| estimate_var_sin_2d(&reg)).clone();
                    let p = with_vhat.get_or_insert_with(|| v.and_then(|v| bels(&reg, v)).map(|e| e.p_hat)).clone();
                    match kind {
                        EstimatorKind::BelsVhat => p.map(|p| p.to_vec()),
                        _ => p.and_then(gn),
                    }
                }
                EstimatorKind::VhatE | EstimatorKind::ZBels => {
                    Err(usage(format!("estimator {kind} needs a 3-D scenario")))
                }
            };
            out.and_then(finite)
        })
        .collect()
}

fn evaluate_3d(
    kinds: &[EstimatorKind],
    array: &SensorArray,
    meas: &MeasurementSet,
    noise: &NoiseModel,
) -> Vec<Result<Vec<f64>>> {
    let unknown = NoiseModel::unknown();
    let mut known: Option<Result<Estimate3d>> = None;
    let mut estimated: Option<Result<Estimate3d>> = None;

    kinds
        .iter()
        .map(|kind| {
            let out = match kind {
                EstimatorKind::Pls => pls_3d(array, meas).map(|e| e.p_hat.to_vec()),
                EstimatorKind::Bels | EstimatorKind::BelsGn | EstimatorKind::ZBels => {
                    let init = known.get_or_insert_with(|| bels_3d(array, meas, noise)).clone();
                    match kind {
                        EstimatorKind::Bels => init.map(|e| e.p_hat.to_vec()),
                        EstimatorKind::ZBels => init.map(|e| vec![e.p_hat[2]]),
                        _ => init.and_then(|e| refine_bels_3d(array, meas, noise, &e, 1)).map(|e| e.p_hat.to_vec()),
                    }
                }
                EstimatorKind::VhatA => planar_regression_3d(array, meas)
                    .and_then(|reg| estimate_var_sin_2d(&reg))
                    .map(|v| vec![v]),
                EstimatorKind::BelsVhat | EstimatorKind::BelsVhatGn | EstimatorKind::VhatE => {
                    let init = estimated.get_or_insert_with(|| bels_3d(array, meas, &unknown)).clone();
                    match kind {
                        EstimatorKind::BelsVhat => init.map(|e| e.p_hat.to_vec()),
                        EstimatorKind::VhatE => init.map(|e| vec![e.v_sin_e.unwrap_or(f64::NAN)]),
                        _ => init
                            .and_then(|e| refine_bels_3d(array, meas, &unknown, &e, 1))
                            .map(|e| e.p_hat.to_vec()),
                    }
                }
            };
            out.and_then(finite)
        })
        .collect()
}

/// Square of the root CRLB at the scenario's true noise level.
fn trace_inv_fisher(scenario: &Scenario, array: &SensorArray) -> Option<f64> {
    let s = &scenario.source;
    let fisher = match s.dim() {
        2 => fisher_2d(array, s.xy(), scenario.noise.sigma_a?),
        _ => fisher_3d(array, s.xyz(), scenario.noise.sigma_a?, scenario.noise.sigma_e?),
    };
    fisher.and_then(|f| rcrlb(&f)).ok().map(|b| b * b)
}

fn one_run(scenario: &Scenario, shared: Option<&SensorArray>, n: usize, run: usize) -> RunOutput {
    let seed = derive_seed(scenario.base_seed, n, run);
    let fail_all = |e: AoaError| RunOutput {
        seed,
        trace_inv_fisher: None,
        results: scenario.estimators.iter().map(|_| Err(e.kind())).collect(),
    };
    let drawn;
    let array = match (shared, &scenario.array) {
        (Some(a), _) => a,
        (None, ArraySpec::RandomCircle { radius, center }) => match random_circle_array(*radius, center, n, seed) {
            Ok(a) => {
                drawn = a;
                &drawn
            }
            Err(e) => return fail_all(e),
        },
        (None, _) => unreachable!("only random arrays are drawn per run"),
    };
    let meas = match synthesize_measurements(array, &scenario.source, &scenario.noise, seed) {
        Ok(m) => m,
        Err(e) => return fail_all(e),
    };
    let results = evaluate_estimators(&scenario.estimators, array, &meas, &scenario.noise)
        .into_iter()
        .map(|r| r.map_err(|e| e.kind()))
        .collect();
    RunOutput { seed, trace_inv_fisher: shared.is_none().then(|| trace_inv_fisher(scenario, array)).flatten(), results }
}

/// Runs a campaign and also returns every per-run estimate.
pub fn run_campaign_detailed(scenario: &Scenario, parallelism: usize) -> Result<(McSummary, Vec<RunRecord>)> {
    scenario.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| usage(format!("cannot start worker pool: {e}")))?;

    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &n in &scenario.n_list {
        let shared = scenario.shared_array(n)?;
        let outputs: Vec<RunOutput> =
            pool.install(|| (0..scenario.runs).into_par_iter().map(|j| one_run(scenario, shared.as_ref(), n, j)).collect());

        let bound = match &shared {
            Some(a) => trace_inv_fisher(scenario, a).map(f64::sqrt),
            None => {
                let traces: Vec<f64> = outputs.iter().filter_map(|o| o.trace_inv_fisher).collect();
                (!traces.is_empty()).then(|| (traces.iter().sum::<f64>() / traces.len() as f64).sqrt())
            }
        };

        for (k, &kind) in scenario.estimators.iter().enumerate() {
            let mut acc = MetricAccumulator::new(&truth_for(kind, scenario));
            let mut failed = 0;
            for (run, out) in outputs.iter().enumerate() {
                let result = &out.results[k];
                match result {
                    Ok(v) => acc.push(v)?,
                    Err(_) => failed += 1,
                }
                records.push(RunRecord {
                    n,
                    run,
                    seed: out.seed,
                    estimator: kind,
                    estimate: result.as_ref().ok().cloned(),
                    error: result.as_ref().err().copied(),
                });
            }
            let (bias, rmse) = acc.finish().unwrap_or((f64::NAN, f64::NAN));
            rows.push(McRow {
                scenario: scenario.name.clone(),
                n,
                estimator: kind,
                bias,
                rmse,
                rcrlb: if kind.is_position() { bound } else { None },
                runs_completed: acc.count(),
                runs_failed: failed,
                base_seed: scenario.base_seed,
            });
        }
    }
    Ok((McSummary { scenario: scenario.name.clone(), base_seed: scenario.base_seed, rows }, records))
}

/// Runs every `(n, run)` of a scenario on up to `parallelism` threads and
/// aggregates bias, RMSE and the root CRLB per `(n, estimator)`.
pub fn run_campaign(scenario: &Scenario, parallelism: usize) -> Result<McSummary> {
    run_campaign_detailed(scenario, parallelism).map(|(s, _)| s)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(usage(format!("slope needs at least 3 positive points, got {}", pts.len())));
    }
    let m = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    if sxx == 0.0 {
        return Err(usage("slope needs at least two distinct n"));
    }
    Ok(sxy / sxx)
}

/// Slope of log RMSE against log n for one estimator.
pub fn slope_check(summary: &McSummary, estimator: EstimatorKind) -> Result<f64> {
    let pts: Vec<(f64, f64)> = summary.rows_for(estimator).map(|r| (r.n as f64, r.rmse)).collect();
    log_log_slope(&pts)
}

/// Median wall time of `reps` evaluations of one estimator on a fixed
/// measurement set (synthesis excluded).
pub fn median_runtime(
    kind: EstimatorKind,
    array: &SensorArray,
    source: &SourceLocation,
    noise: &NoiseModel,
    seed: u64,
    reps: usize,
) -> Result<Duration> {
    let meas = synthesize_measurements(array, source, noise, seed)?;
    let mut times: Vec<Duration> = (0..reps.max(1))
        .map(|_| {
            let t0 = Instant::now();
            let out = evaluate_estimators(&[kind], array, &meas, noise);
            std::hint::black_box(out);
            t0.elapsed()
        })
        .collect();
    times.sort();
    Ok(times[times.len() / 2])
}
