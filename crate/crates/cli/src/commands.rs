use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use aoa_core::crlb::{fisher_2d, fisher_3d, rcrlb};
use aoa_core::estimator2d::{self, build_regression, estimate_var_sin_2d};
use aoa_core::estimator3d;
use aoa_core::harness::{
    derive_seed, median_runtime, random_circle_array, run_campaign_detailed, slope_check, ArraySpec, EstimatorKind,
    McRow, Scenario,
};
use aoa_core::model::{synthesize_measurements, var_sin};
use aoa_core::{presets, Diagnostics, NoiseModel, SensorArray};

use crate::config::ConfigDocument;
use crate::error::{CliError, CliResult};
use crate::input::{format_measurements, parse_measurements};
use crate::report::{self, BenchRow};

/// Estimators offered by `aoa estimate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SingleEstimator {
    /// Plain pseudo-linear least squares.
    Pls,
    /// Bias-eliminated least squares.
    Bels,
    /// Bias-eliminated least squares followed by Gauss-Newton.
    TwoStep,
}

pub struct EstimateArgs {
    pub file: PathBuf,
    pub dim: Option<usize>,
    pub sigma_a: Option<f64>,
    pub sigma_e: Option<f64>,
    pub estimator: SingleEstimator,
    pub gn_iters: usize,
    pub degrees: bool,
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.9e}")).unwrap_or_else(|| "-".into())
}

fn diagnostics_lines(d: &Diagnostics) -> Vec<String> {
    let mut out = vec![format!("gram condition: {}", fmt_opt(d.gram_condition))];
    if let Some(z) = d.z_denominator {
        out.push(format!("z denominator: {z:.9e}"));
    }
    if d.gn_iterations > 0 {
        out.push(format!(
            "gauss-newton: {} iteration(s), last step {}, residual norm {}, condition {}",
            d.gn_iterations,
            fmt_opt(d.gn_step_norm),
            fmt_opt(d.gn_residual_norm),
            fmt_opt(d.gn_condition)
        ));
    }
    if d.v_sin_a_clamped || d.v_sin_e_clamped {
        out.push("warning: estimated sine variance hit the upper clamp".into());
    }
    out
}

/// Single-shot estimation on a measurement file; returns the report text.
pub fn estimate(args: &EstimateArgs) -> CliResult<String> {
    if let Some(d) = args.dim {
        if d != 2 && d != 3 {
            return Err(CliError::Input(format!("--dim must be 2 or 3, got {d}")));
        }
    }
    let text = read(&args.file)?;
    let parsed = parse_measurements(&text, args.dim, args.degrees).map_err(|e| {
        CliError::Input(format!("{}:{}:{}: {}", args.file.display(), e.line, e.column, e.message))
    })?;
    let (array, meas) = (&parsed.array, &parsed.measurements);
    let dim = array.dim();
    if dim == 2 && args.sigma_e.is_some() {
        return Err(CliError::Input("--sigma-e only applies to 3-D data".into()));
    }
    let noise = NoiseModel { sigma_a: args.sigma_a, sigma_e: args.sigma_e };
    noise.validate()?;
    if args.gn_iters == 0 {
        return Err(CliError::Input("--gn-iters must be at least 1".into()));
    }

    let (label, p_hat, v_a, v_e, diag): (&str, Vec<f64>, Option<f64>, Option<f64>, Diagnostics) = if dim == 2 {
        let reg = build_regression(array, meas)?;
        let est = match args.estimator {
            SingleEstimator::Pls => estimator2d::pls(&reg)?,
            SingleEstimator::Bels => {
                let v = match noise.sigma_a {
                    Some(s) => var_sin(s),
                    None => estimate_var_sin_2d(&reg)?,
                };
                estimator2d::bels(&reg, v)?
            }
            SingleEstimator::TwoStep => estimator2d::two_step_2d_iters(array, meas, &noise, args.gn_iters)?,
        };
        (est_label(args.estimator), est.p_hat.to_vec(), est.v_sin_a, None, est.diagnostics)
    } else {
        let est = match args.estimator {
            SingleEstimator::Pls => estimator3d::pls_3d(array, meas)?,
            SingleEstimator::Bels => estimator3d::bels_3d(array, meas, &noise)?,
            SingleEstimator::TwoStep => estimator3d::two_step_3d_iters(array, meas, &noise, args.gn_iters)?,
        };
        (est_label(args.estimator), est.p_hat.to_vec(), est.v_sin_a, est.v_sin_e, est.diagnostics)
    };

    let mut out = Vec::new();
    out.push(format!("dimension: {dim}"));
    out.push(format!("sensors: {}", array.len()));
    out.push(format!("estimator: {label}"));
    let names = ["x", "y", "z"];
    let coords: Vec<String> = p_hat.iter().zip(names).map(|(v, n)| format!("{n} = {v:.9}")).collect();
    out.push(format!("estimate: {}", coords.join(", ")));
    let source = |s: Option<f64>| if s.is_some() { "from supplied sigma" } else { "estimated from data" };
    if args.estimator != SingleEstimator::Pls {
        out.push(format!("v_sin_a: {} ({})", fmt_opt(v_a), source(noise.sigma_a)));
        if dim == 3 {
            out.push(format!("v_sin_e: {} ({})", fmt_opt(v_e), source(noise.sigma_e)));
        }
    }
    out.extend(diagnostics_lines(&diag));
    out.push(bound_line(array, &p_hat, &noise));
    Ok(out.join("\n") + "\n")
}

fn est_label(e: SingleEstimator) -> &'static str {
    match e {
        SingleEstimator::Pls => "PLS",
        SingleEstimator::Bels => "BELS",
        SingleEstimator::TwoStep => "BELS+GN",
    }
}

/// The bound is evaluated at the estimate with the supplied noise levels;
/// it is never computed from estimated noise.
fn bound_line(array: &SensorArray, p: &[f64], noise: &NoiseModel) -> String {
    let fisher = match (array.dim(), noise.sigma_a, noise.sigma_e) {
        (2, Some(sa), _) => fisher_2d(array, [p[0], p[1]], sa),
        (3, Some(sa), Some(se)) => fisher_3d(array, [p[0], p[1], p[2]], sa, se),
        _ => return "rcrlb: - (needs known noise levels)".into(),
    };
    match fisher.and_then(|f| rcrlb(&f)) {
        Ok(b) => format!("rcrlb (supplied sigma, at estimate): {b:.9e}"),
        Err(e) => format!("rcrlb: - ({})", e.kind()),
    }
}

pub struct CampaignArgs {
    pub config: Option<PathBuf>,
    pub presets: Vec<String>,
    pub jobs: Option<usize>,
    pub runs: Option<usize>,
    pub out: Option<PathBuf>,
    pub dump: Option<PathBuf>,
    pub check: bool,
}

pub fn list_presets() -> String {
    let all = presets::all_presets();
    let width = all.iter().map(|p| p.name.len()).max().unwrap_or(0);
    all.iter().map(|p| format!("{:<width$}  {}\n", p.name, p.description)).collect()
}

/// Scenarios from an optional config file plus named presets, with the
/// `AOA_SEED` and `--runs` overrides applied.
fn resolve_scenarios(
    config: Option<&Path>,
    preset_names: &[String],
    runs: Option<usize>,
    seed_override: Option<&str>,
) -> CliResult<(Vec<Scenario>, ConfigDocument)> {
    let doc = match config {
        Some(path) => ConfigDocument::parse(&read(path)?, &path.display().to_string())?,
        None => ConfigDocument::default(),
    };
    let mut scenarios = doc.all_scenarios();
    for name in preset_names {
        let p = presets::preset(name)
            .ok_or_else(|| CliError::Input(format!("unknown preset `{name}` (see --list-presets)")))?;
        scenarios.extend(p.scenarios);
    }
    if scenarios.is_empty() {
        return Err(CliError::Input("no scenarios to run (give a config file or --preset)".into()));
    }
    let seed = match seed_override {
        Some(s) => Some(
            s.trim().parse::<u64>().map_err(|_| CliError::Input(format!("AOA_SEED must be an unsigned integer, got `{s}`")))?,
        ),
        None => None,
    };
    for s in &mut scenarios {
        if let Some(seed) = seed {
            s.base_seed = seed;
        }
        if let Some(r) = runs {
            s.runs = r;
        }
        s.validate()?;
    }
    Ok((scenarios, doc))
}

/// The scenarios `campaign` would run, as a self-contained config document.
pub fn resolved_config(args: &CampaignArgs, seed_override: Option<&str>) -> CliResult<String> {
    let (scenarios, doc) = resolve_scenarios(args.config.as_deref(), &args.presets, args.runs, seed_override)?;
    ConfigDocument { presets: Vec::new(), output: doc.output, scenarios }.to_toml()
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Threshold checks for `--check`: every cell valid; for the two-step
/// estimators RMSE falls with n and the final RMSE/RCRLB lies in [0.9, 1.1].
pub fn check_rows(rows: &[McRow]) -> Vec<String> {
    let mut problems = Vec::new();
    for r in rows.iter().filter(|r| !r.is_valid()) {
        problems.push(format!("{} n={} {}: {} of {} runs failed", r.scenario, r.n, r.estimator, r.runs_failed, r.runs_failed + r.runs_completed));
    }
    let mut keys: Vec<(&str, EstimatorKind)> = Vec::new();
    for r in rows {
        if matches!(r.estimator, EstimatorKind::BelsGn | EstimatorKind::BelsVhatGn) && !keys.contains(&(&r.scenario, r.estimator)) {
            keys.push((&r.scenario, r.estimator));
        }
    }
    for (scenario, kind) in keys {
        let cells: Vec<&McRow> = rows.iter().filter(|r| r.scenario == scenario && r.estimator == kind).collect();
        if cells.windows(2).any(|w| w[1].rmse >= w[0].rmse) {
            problems.push(format!("{scenario} {kind}: rmse does not decrease with n"));
        }
        if let Some(ratio) = cells.last().and_then(|r| r.ratio_to_bound()) {
            if !(0.9..=1.1).contains(&ratio) {
                problems.push(format!("{scenario} {kind}: final rmse/rcrlb {ratio:.3} outside [0.9, 1.1]"));
            }
        }
    }
    problems
}

/// Runs the campaign: summary CSV to `--out` (table on stdout) or to stdout
/// (table on stderr).
pub fn campaign(args: &CampaignArgs, seed_override: Option<&str>) -> CliResult<()> {
    let (scenarios, doc) = resolve_scenarios(args.config.as_deref(), &args.presets, args.runs, seed_override)?;
    let opts = doc.output.clone().unwrap_or_default();
    let jobs = args
        .jobs
        .or(opts.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if jobs == 0 {
        return Err(CliError::Input("--jobs must be at least 1".into()));
    }
    let csv_path = args.out.clone().or(opts.csv);
    let dump_path = args.dump.clone().or(opts.dump);

    let mut dump = match &dump_path {
        Some(p) => Some(create(p)?),
        None => None,
    };
    let mut rows = Vec::new();
    for (i, s) in scenarios.iter().enumerate() {
        let (summary, records) = run_campaign_detailed(s, jobs)?;
        if let Some(w) = dump.as_mut() {
            report::write_dump_csv(w, &s.name, &records, i == 0)?;
        }
        rows.extend(summary.rows);
    }
    if let Some(mut w) = dump {
        w.flush()?;
    }

    let table = report::summary_table(&rows);
    match &csv_path {
        Some(p) => {
            let mut w = create(p)?;
            report::write_summary_csv(&mut w, &rows)?;
            w.flush()?;
            print!("{table}");
        }
        None => {
            report::write_summary_csv(io::stdout().lock(), &rows)?;
            eprint!("{table}");
        }
    }
    for s in &scenarios {
        if s.n_list.len() >= 3 {
            for &k in &s.estimators {
                let sub: Vec<McRow> = rows.iter().filter(|r| r.scenario == s.name).cloned().collect();
                let summary = aoa_core::harness::McSummary { scenario: s.name.clone(), base_seed: s.base_seed, rows: sub };
                if let Ok(slope) = slope_check(&summary, k) {
                    eprintln!("slope {} {k}: {slope:+.3}", s.name);
                }
            }
        }
    }
    if args.check {
        let problems = check_rows(&rows);
        if !problems.is_empty() {
            return Err(CliError::Check(problems.join("; ")));
        }
        eprintln!("check: ok");
    }
    Ok(())
}

pub struct BenchArgs {
    pub config: Option<PathBuf>,
    pub presets: Vec<String>,
    pub reps: usize,
    pub out: Option<PathBuf>,
}

/// Median wall time per (scenario, n, estimator) over `reps` repetitions.
pub fn bench(args: &BenchArgs, seed_override: Option<&str>) -> CliResult<Vec<BenchRow>> {
    let (scenarios, _) = resolve_scenarios(args.config.as_deref(), &args.presets, None, seed_override)?;
    if args.reps == 0 {
        return Err(CliError::Input("--reps must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for s in &scenarios {
        for &kind in &s.estimators {
            let mut first = None;
            for &n in &s.n_list {
                let seed = derive_seed(s.base_seed, n, 0);
                let array = scenario_array(s, n, seed)?;
                let t = median_runtime(kind, &array, &s.source, &s.noise, seed, args.reps)?.as_secs_f64();
                let base = *first.get_or_insert(t);
                rows.push(BenchRow {
                    scenario: s.name.clone(),
                    n,
                    estimator: kind.to_string(),
                    median_seconds: t,
                    ratio_to_first_n: if base > 0.0 { t / base } else { f64::NAN },
                });
            }
        }
    }
    match &args.out {
        Some(p) => {
            let mut w = create(p)?;
            report::write_bench_csv(&mut w, &rows)?;
            w.flush()?;
        }
        None => report::write_bench_csv(io::stdout().lock(), &rows)?,
    }
    Ok(rows)
}

fn scenario_array(s: &Scenario, n: usize, seed: u64) -> CliResult<SensorArray> {
    Ok(match &s.array {
        ArraySpec::Fixed { positions } => SensorArray::from_rows(s.dim(), positions)?,
        ArraySpec::Replicated { sites } => SensorArray::from_rows(s.dim(), sites)?.replicate(n / sites.len()),
        ArraySpec::RandomCircle { radius, center } => random_circle_array(*radius, center, n, seed)?,
    })
}

pub struct SynthArgs {
    pub preset: String,
    pub n: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// Writes a measurement file drawn from the first scenario of a preset.
pub fn synth(args: &SynthArgs) -> CliResult<()> {
    let p = presets::preset(&args.preset)
        .ok_or_else(|| CliError::Input(format!("unknown preset `{}` (see --list-presets)", args.preset)))?;
    let mut s = p.scenarios[0].clone();
    s.n_list = vec![args.n];
    s.validate()?;
    let array = scenario_array(&s, args.n, args.seed)?;
    let meas = synthesize_measurements(&array, &s.source, &s.noise, args.seed)?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_else(|| "unknown".into());
    let mut text = format!(
        "# {} n={} seed={} source={:?} sigma_a={} sigma_e={}\n",
        s.name,
        args.n,
        args.seed,
        s.source.as_slice(),
        opt(s.noise.sigma_a),
        opt(s.noise.sigma_e)
    );
    text.push_str(&format_measurements(&array, &meas));
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}
