use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use serde_json::json;
use spindle::caps::{cap_from_normal_height, lemma1_variance};
use spindle::experiment::{
    default_n_grid, estimate_moments, fit_exponent, jackknife_csv, moments_csv, records_csv, run_experiment,
    ExperimentConfig,
};
use spindle::hull::{hull_fast, summarize};
use spindle::theory::limit_constants;
use spindle::{ModelSpec, Point, StreamRng};

use crate::config::resolve;
use crate::{CapArgs, ConstantsArgs, Failure, FitArgs, HullArgs, Lemma1Args, SimulateArgs};

/// Smallest draw count accepted by `lemma1`.
const MIN_LEMMA1_SAMPLES: usize = 1000;

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Runtime)
}

/// Creates the output directory and records the resolved settings.
fn start_run(command: &str, out: &Path, settings: &impl Serialize) -> Result<(), Failure> {
    fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(Failure::Runtime)?;
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": settings,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write_file(out, "manifest.json", &text)
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("output serializes") + "\n"
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateSettings {
    model: ModelSpec,
    r: f64,
    n: Vec<u64>,
    reps: usize,
    seed: u64,
    workers: usize,
    out: PathBuf,
}

pub fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let defaults = json!({
        "n": default_n_grid(),
        "reps": 100,
        "seed": 0,
        "workers": default_workers(),
        "out": ".",
    });
    let s: SimulateSettings = resolve(
        "simulate",
        defaults,
        args.common.config.as_deref(),
        &args,
        Some(&args.model),
    )?;
    let config = ExperimentConfig {
        model: s.model.clone(),
        r: s.r,
        n_grid: s.n.clone(),
        reps: s.reps,
        seed: s.seed,
        workers: s.workers,
    };
    config.validate()?;
    start_run("simulate", &s.out, &s)?;
    log::info!(
        "simulating {} at r = {} over {} sizes, {} reps",
        s.model,
        s.r,
        s.n.len(),
        s.reps
    );
    let output = run_experiment(&config)?;
    write_file(&s.out, "records.csv", &records_csv(&output.records))?;
    let mut log_text = String::new();
    for i in &output.incidents {
        let _ = writeln!(log_text, "n={} rep={} {}", i.n, i.rep, i.reason);
    }
    write_file(&s.out, "incidents.log", &log_text)?;
    if s.reps >= 2 {
        let est = estimate_moments(&output.records)?;
        write_file(&s.out, "moments.csv", &moments_csv(&est))?;
        write_file(&s.out, "moments_jackknife.csv", &jackknife_csv(&est))?;
    } else {
        log::warn!("one replication per size; no moments written");
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HullSettings {
    #[serde(default)]
    model: Option<ModelSpec>,
    input: PathBuf,
    r: f64,
    out: PathBuf,
}

#[derive(Debug, Deserialize)]
struct Row {
    x: f64,
    y: f64,
}

fn read_points(path: &Path) -> Result<Vec<Point>, Failure> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
    let mut points = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Failure::invalid(format!("{} row {}: {e}", path.display(), i + 1)))?;
        points.push(Point::try_new(row.x, row.y)?);
    }
    Ok(points)
}

#[derive(Debug, Serialize)]
struct HullOutput {
    f0: usize,
    hull_area: f64,
    /// Present only when a model was given.
    missed_area: Option<f64>,
    edge_count: usize,
}

pub fn hull(args: HullArgs) -> Result<(), Failure> {
    let defaults = json!({ "out": "." });
    let s: HullSettings = resolve(
        "hull",
        defaults,
        args.common.config.as_deref(),
        &args,
        Some(&args.model),
    )?;
    if !(s.r.is_finite() && s.r > 0.0) {
        return Err(Failure::invalid(format!("r must be positive, got {}", s.r)));
    }
    let points = read_points(&s.input)?;
    let model = s.model.as_ref().map(ModelSpec::build).transpose()?;
    if let Some(m) = &model {
        if let Some(p) = points.iter().find(|&&p| !m.contains(p)) {
            return Err(Failure::invalid(format!(
                "point ({}, {}) lies outside the model",
                p.x, p.y
            )));
        }
        if s.r < m.r_m() {
            return Err(spindle::Error::RadiusNotAdmissible { r: s.r, r_m: m.r_m() }.into());
        }
    }
    let poly = hull_fast(&points, s.r)?;
    let output = match &model {
        Some(m) => {
            let sum = summarize(m, &poly)?;
            HullOutput {
                f0: sum.f0,
                hull_area: sum.hull_area,
                missed_area: Some(sum.missed_area),
                edge_count: sum.edge_count,
            }
        }
        None => HullOutput {
            f0: poly.f0(),
            hull_area: spindle::geom::arc_polygon_area(&poly)?,
            missed_area: None,
            edge_count: poly.edges().len(),
        },
    };
    start_run("hull", &s.out, &s)?;
    let mut csv = String::from("x,y\n");
    for v in poly.vertices() {
        let _ = writeln!(csv, "{},{}", v.x, v.y);
    }
    write_file(&s.out, "vertices.csv", &csv)?;
    let summary = to_json(&output);
    write_file(&s.out, "summary.json", &summary)?;
    print!("{summary}");
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CapSettings {
    model: ModelSpec,
    r: f64,
    theta: f64,
    t_grid: Vec<f64>,
    out: PathBuf,
}

pub fn cap(args: CapArgs) -> Result<(), Failure> {
    let defaults = json!({
        "theta": 0.0,
        "t_grid": [1e-1, 1e-2, 1e-3, 1e-4],
        "out": ".",
    });
    let s: CapSettings = resolve("cap", defaults, args.common.config.as_deref(), &args, Some(&args.model))?;
    let model = s.model.build()?;
    let mut csv = String::from("theta,t,area,arc_length\n");
    for &t in &s.t_grid {
        let cap = cap_from_normal_height(&model, s.theta, t, s.r)?;
        let _ = writeln!(csv, "{},{},{},{}", s.theta, t, cap.area, cap.arc_length);
    }
    start_run("cap", &s.out, &s)?;
    write_file(&s.out, "cap.csv", &csv)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Lemma1Settings {
    model: ModelSpec,
    r: f64,
    theta: f64,
    t_grid: Vec<f64>,
    samples: usize,
    seed: u64,
    out: PathBuf,
}

pub fn lemma1(args: Lemma1Args) -> Result<(), Failure> {
    let defaults = json!({
        "r": 1.0,
        "theta": 0.0,
        "t_grid": [0.02, 0.01, 0.005, 0.0025],
        "samples": 100_000,
        "seed": 0,
        "out": ".",
    });
    let s: Lemma1Settings = resolve(
        "lemma1",
        defaults,
        args.common.config.as_deref(),
        &args,
        Some(&args.model),
    )?;
    if s.samples < MIN_LEMMA1_SAMPLES {
        return Err(Failure::invalid(format!(
            "samples must be at least {MIN_LEMMA1_SAMPLES}, got {}",
            s.samples
        )));
    }
    let model = s.model.build()?;
    let mut csv = String::from("t,var_ahat,se\n");
    for (i, &t) in s.t_grid.iter().enumerate() {
        let mut rng = StreamRng::new(s.seed, i as u64);
        let v = lemma1_variance(&model, s.theta, t, s.samples, &mut rng, s.r)?;
        let _ = writeln!(csv, "{},{},{}", t, v.variance, v.se);
    }
    start_run("lemma1", &s.out, &s)?;
    write_file(&s.out, "lemma1.csv", &csv)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantsSettings {
    model: ModelSpec,
    r: f64,
    out: PathBuf,
}

pub fn constants(args: ConstantsArgs) -> Result<(), Failure> {
    let defaults = json!({ "out": "." });
    let s: ConstantsSettings = resolve(
        "constants",
        defaults,
        args.common.config.as_deref(),
        &args,
        Some(&args.model),
    )?;
    let model = s.model.build()?;
    let lc = limit_constants(&model, s.r)?;
    start_run("constants", &s.out, &s)?;
    let text = to_json(&lc);
    write_file(&s.out, "constants.json", &text)?;
    print!("{text}");
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitSettings {
    input: PathBuf,
    column: String,
    weighted: bool,
    out: PathBuf,
}

/// `(n, value)` pairs and, when weighted, one weight per pair.
type Series = (Vec<(f64, f64)>, Option<Vec<f64>>);

fn read_column_pairs(s: &FitSettings) -> Result<Series, Failure> {
    let path = &s.input;
    let bad = |msg: String| Failure::invalid(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let index = |name: &str| headers.iter().position(|h| h == name);
    let n_col = index("n").ok_or_else(|| bad("no `n` column".into()))?;
    let v_col = index(&s.column).ok_or_else(|| bad(format!("no `{}` column", s.column)))?;
    let se_name = format!("se_{}", s.column);
    let se_col = match (s.weighted, index(&se_name)) {
        (false, _) => None,
        (true, Some(c)) => Some(c),
        (true, None) => return Err(bad(format!("--weighted needs a `{se_name}` column"))),
    };
    let mut pairs = Vec::new();
    let mut weights = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |c: usize| -> Result<f64, Failure> {
            rec.get(c)
                .unwrap_or_default()
                .parse::<f64>()
                .map_err(|e| bad(format!("row {}: {e}", i + 1)))
        };
        let (n, v) = (num(n_col)?, num(v_col)?);
        pairs.push((n, v));
        if let Some(c) = se_col {
            // Inverse variance of log(value) by the delta method.
            weights.push((v / num(c)?).powi(2));
        }
    }
    Ok((pairs, se_col.map(|_| weights)))
}

pub fn fit(args: FitArgs) -> Result<(), Failure> {
    let defaults = json!({ "column": "var_f0", "weighted": false, "out": "." });
    let s: FitSettings = resolve("fit", defaults, args.common.config.as_deref(), &args, None)?;
    let (pairs, weights) = read_column_pairs(&s)?;
    let result = fit_exponent(&pairs, weights.as_deref())?;
    start_run("fit", &s.out, &s)?;
    let text = to_json(&result);
    write_file(&s.out, "fit.json", &text)?;
    print!("{text}");
    Ok(())
}
