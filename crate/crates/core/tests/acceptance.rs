//! Acceptance suite. Each test prints one `PASS`/`FAIL` line to stderr
//! (written past the test harness capture so it shows in plain
//! `cargo test` output) and then asserts.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;
use spindle::caps::{cap_from_normal_height, lemma1_variance};
use spindle::experiment::{
    default_n_grid, estimate_moments, fit_exponent, records_csv, run_experiment, ExperimentConfig, ExperimentOutput,
    MomentEstimate,
};
use spindle::geom::{arc_polygon_area, shoelace_area};
use spindle::hull::{convex_hull, hull_fast, hull_oracle};
use spindle::shapes::sample_uniform;
use spindle::theory::{c1, limit_constants, CIRCLE_AREA_LIMIT, CIRCLE_VERTEX_LIMIT};
use spindle::{ConvexDiscModel, ModelSpec, StreamRng};

const SEED: u64 = 20_240_601;

fn report(id: u32, name: &str, pass: bool, detail: &str, started: Instant) {
    let line = format!(
        "acceptance {id:>2} {:<4} {name}: {detail} [{:.1}s]\n",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn experiment(model: ModelSpec, r: f64, n_grid: Vec<u64>, reps: usize, workers: usize) -> ExperimentOutput {
    let config = ExperimentConfig {
        model,
        r,
        n_grid,
        reps,
        seed: SEED,
        workers,
    };
    run_experiment(&config).expect("experiment run")
}

fn circle_run_config() -> (ModelSpec, f64, Vec<u64>, usize) {
    (ModelSpec::Circle { rho: 1.0 }, 1.0, vec![1_000, 10_000, 100_000], 500)
}

/// The criterion-1 run, shared with the determinism check.
fn circle_run() -> &'static (ExperimentOutput, f64) {
    static RUN: OnceLock<(ExperimentOutput, f64)> = OnceLock::new();
    RUN.get_or_init(|| {
        let (m, r, grid, reps) = circle_run_config();
        let t = Instant::now();
        let out = experiment(m, r, grid, reps, 1);
        (out, t.elapsed().as_secs_f64())
    })
}

fn at(est: &[MomentEstimate], n: u64) -> MomentEstimate {
    *est.iter().find(|e| e.n == n).expect("n in grid")
}

#[test]
fn c01_circle_limit_constants() {
    let started = Instant::now();
    let (out, secs) = circle_run();
    let est = estimate_moments(&out.records).unwrap();
    let last = at(&est, 100_000);
    let f0_err = (last.mean_f0 - CIRCLE_VERTEX_LIMIT).abs() / CIRCLE_VERTEX_LIMIT;
    let scaled_missed = last.mean_missed * 1e5;
    let missed_err = (scaled_missed - CIRCLE_AREA_LIMIT).abs() / CIRCLE_AREA_LIMIT;
    // Distance to the limit may not grow by more than three combined
    // standard errors from one grid point to the next.
    let monotone = est.windows(2).all(|w| {
        let d0 = (w[0].mean_f0 - CIRCLE_VERTEX_LIMIT).abs();
        let d1 = (w[1].mean_f0 - CIRCLE_VERTEX_LIMIT).abs();
        d1 <= d0 + 3.0 * w[0].se_mean_f0.hypot(w[1].se_mean_f0)
    });
    let means: Vec<String> = est.iter().map(|e| format!("{:.4}", e.mean_f0)).collect();
    let pass = f0_err <= 0.05 && missed_err <= 0.05 && monotone && *secs <= 300.0;
    report(
        1,
        "circle constants",
        pass,
        &format!(
            "mean_f0 by n = [{}] (limit {CIRCLE_VERTEX_LIMIT:.4}, rel err {f0_err:.4}), \
             n*mean_missed = {scaled_missed:.4} (limit {CIRCLE_AREA_LIMIT:.4}, rel err {missed_err:.4}), \
             monotone = {monotone}, run {secs:.1}s",
            means.join(", ")
        ),
        started,
    );
    assert!(pass);
}

#[test]
fn c02_ellipse_limit_coefficients() {
    let started = Instant::now();
    let spec = ModelSpec::Ellipse { a: 1.0, b: 0.8 };
    let model = spec.build().unwrap();
    let lc = limit_constants(&model, 2.0).unwrap();
    let n = 100_000u64;
    let out = experiment(spec, 2.0, vec![n], 500, workers());
    let e = estimate_moments(&out.records).unwrap()[0];
    let nf = n as f64;
    let v = e.mean_f0 * nf.powf(-1.0 / 3.0);
    let a = e.mean_missed * nf.powf(2.0 / 3.0);
    let v_err = (v - lc.vertex_coeff).abs() / lc.vertex_coeff;
    let a_err = (a - lc.area_coeff).abs() / lc.area_coeff;
    let secs = started.elapsed().as_secs_f64();
    let pass = v_err <= 0.10 && a_err <= 0.10 && secs <= 600.0;
    report(
        2,
        "ellipse coefficients",
        pass,
        &format!(
            "mean_f0 n^-1/3 = {v:.4} vs {:.4} (rel err {v_err:.4}), \
             mean_missed n^2/3 = {a:.4} vs {:.4} (rel err {a_err:.4})",
            lc.vertex_coeff, lc.area_coeff
        ),
        started,
    );
    assert!(pass);
}

#[test]
fn c03_variance_orders() {
    let started = Instant::now();
    let out = experiment(
        ModelSpec::Ellipse { a: 1.0, b: 0.8 },
        2.0,
        default_n_grid(),
        2000,
        workers(),
    );
    let est = estimate_moments(&out.records).unwrap();
    let f0: Vec<(f64, f64)> = est.iter().map(|e| (e.n as f64, e.var_f0)).collect();
    let missed: Vec<(f64, f64)> = est.iter().map(|e| (e.n as f64, e.var_missed)).collect();
    let sf = fit_exponent(&f0, None).unwrap();
    let sm = fit_exponent(&missed, None).unwrap();
    let ok_f0 = (sf.slope - 1.0 / 3.0).abs() <= 0.10;
    let ok_missed = (sm.slope + 5.0 / 3.0).abs() <= 0.15;
    let pass = ok_f0 && ok_missed;
    report(
        3,
        "variance orders",
        pass,
        &format!(
            "var_f0 slope {:.4} ± {:.4} (target 1/3 ± 0.10), var_missed slope {:.4} ± {:.4} (target -5/3 ± 0.15)",
            sf.slope, sf.slope_stderr, sm.slope, sm.slope_stderr
        ),
        started,
    );
    assert!(pass);
}

#[test]
fn c04_circle_bounded_vertex_variance() {
    let started = Instant::now();
    let out = experiment(ModelSpec::Circle { rho: 1.0 }, 1.0, default_n_grid(), 2000, workers());
    let est = estimate_moments(&out.records).unwrap();
    let f0: Vec<(f64, f64)> = est.iter().map(|e| (e.n as f64, e.var_f0)).collect();
    let fit = fit_exponent(&f0, None).unwrap();
    let pass = fit.slope.abs() <= 0.1;
    let vars: Vec<String> = est.iter().map(|e| format!("{:.3}", e.var_f0)).collect();
    report(
        4,
        "circle vertex variance",
        pass,
        &format!(
            "var_f0 slope {:.4} ± {:.4} (target 0 ± 0.1), var_f0 by n = [{}]",
            fit.slope,
            fit.slope_stderr,
            vars.join(", ")
        ),
        started,
    );
    assert!(pass);
}

fn key_set(poly: &spindle::DiscPolygon) -> BTreeSet<(u64, u64)> {
    poly.vertices().iter().map(|p| p.key()).collect()
}

#[test]
fn c05_oracle_equivalence() {
    let started = Instant::now();
    let models = [
        ConvexDiscModel::circle(1.0).unwrap(),
        ConvexDiscModel::ellipse(1.0, 0.8).unwrap(),
    ];
    let radii = [1.2, 2.0, 5.0];
    let mut rng = StreamRng::new(SEED, 5);
    let instances = 10_000;
    let (mut same, mut certified) = (0usize, 0usize);
    for _ in 0..instances {
        let model = &models[rng.gen_range(0..models.len())];
        let r = radii[rng.gen_range(0..radii.len())];
        let n = rng.gen_range(1..=64);
        let pts = sample_uniform(model, &mut rng, n).unwrap();
        let fast = hull_fast(&pts, r).unwrap();
        let oracle = hull_oracle(&pts, r).unwrap();
        if key_set(&fast) == key_set(&oracle) {
            same += 1;
        }
        if fast.certifies(&pts) {
            certified += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let pass = same == instances && certified == instances && secs <= 120.0;
    report(
        5,
        "oracle equivalence",
        pass,
        &format!("identical vertex sets {same}/{instances}, certified {certified}/{instances}"),
        started,
    );
    assert!(pass);
}

#[test]
fn c06_hull_property_suite() {
    const TOL: f64 = 1e-9;
    let started = Instant::now();
    let models = [
        ConvexDiscModel::circle(1.0).unwrap(),
        ConvexDiscModel::ellipse(1.0, 0.8).unwrap(),
    ];
    let mut rng = StreamRng::new(SEED, 6);
    let instances = 1000;
    let mut violations = [0usize; 4];
    for _ in 0..instances {
        let model = &models[rng.gen_range(0..models.len())];
        let r1 = model.r_m() * rng.gen_range(1.05..3.0);
        let r2 = r1 * rng.gen_range(1.05..3.0);
        let n = rng.gen_range(3..=200);
        let pts = sample_uniform(model, &mut rng, n).unwrap();
        let poly = hull_fast(&pts, r1).unwrap();
        let area = arc_polygon_area(&poly).unwrap();
        let conv = convex_hull(&pts);

        // Containment chain.
        let lower = shoelace_area(&conv);
        if !(lower <= area + TOL && area <= model.area() + TOL) {
            violations[0] += 1;
        }
        // Vertex-count domination.
        if poly.f0() > conv.len().max(1) {
            violations[1] += 1;
        }
        // Adding a point.
        let extra = sample_uniform(model, &mut rng, 1).unwrap()[0];
        let mut more = pts.clone();
        more.push(extra);
        let bigger = hull_fast(&more, r1).unwrap();
        let bigger_area = arc_polygon_area(&bigger).unwrap();
        let keeps_old = poly.vertices().iter().all(|&v| bigger.certifies(&[v]));
        if bigger_area + TOL < area || !keeps_old {
            violations[2] += 1;
        }
        // Larger radius, smaller hull.
        let wide = hull_fast(&pts, r2).unwrap();
        if arc_polygon_area(&wide).unwrap() > area + TOL {
            violations[3] += 1;
        }
    }
    let pass = violations.iter().all(|&v| v == 0);
    report(
        6,
        "hull properties",
        pass,
        &format!(
            "{instances} instances; violations: containment {}, f0 domination {}, add-a-point {}, r-monotonicity {}",
            violations[0], violations[1], violations[2], violations[3]
        ),
        started,
    );
    assert!(pass);
}

#[test]
fn c07_disc_cap_scalings() {
    let started = Instant::now();
    let model = ConvexDiscModel::ellipse(1.0, 0.8).unwrap();
    let r = 2.0;
    // Dyadic grid 2^-4 .. 2^-14 (< 1e-4).
    let ts: Vec<f64> = (4..=14).map(|k| 2f64.powi(-k)).collect();
    let mut worst: f64 = 0.0;
    for k in 0..8 {
        let theta = model.theta_for_normal_angle(TAU * k as f64 / 8.0);
        let mut lr = Vec::new();
        let mut ar = Vec::new();
        for &t in &ts {
            let cap = cap_from_normal_height(&model, theta, t, r).unwrap();
            lr.push(cap.arc_length / t.sqrt());
            ar.push(cap.area / t.powf(1.5));
        }
        let m = ts.len();
        for series in [&lr, &ar] {
            for j in [m - 2, m - 1] {
                let dev = (series[j] / series[j - 1] - 1.0).abs();
                worst = worst.max(dev);
            }
        }
    }
    let pass = worst < 0.02;
    report(
        7,
        "disc-cap scalings",
        pass,
        &format!(
            "8 directions, t down to {:.2e}: worst successive-ratio deviation {worst:.2e}",
            ts[ts.len() - 1]
        ),
        started,
    );
    assert!(pass);
}

#[test]
fn c08_lemma1_variance_slope() {
    let started = Instant::now();
    let model = ConvexDiscModel::ellipse(0.9, 0.7).unwrap();
    let ts = [0.02, 0.01, 0.005, 0.0025];
    let mut pairs = Vec::new();
    for (i, &t) in ts.iter().enumerate() {
        let mut rng = StreamRng::new(SEED, 800 + i as u64);
        let v = lemma1_variance(&model, 0.0, t, 100_000, &mut rng, 1.0).unwrap();
        pairs.push((t, v.variance));
    }
    let fit = fit_exponent(&pairs, None).unwrap();
    let pass = (2.7..=3.3).contains(&fit.slope);
    report(
        8,
        "lemma 1 variance",
        pass,
        &format!(
            "log Var(A_hat) vs log t slope {:.4} ± {:.4} (target [2.7, 3.3])",
            fit.slope, fit.slope_stderr
        ),
        started,
    );
    assert!(pass);
}

#[test]
fn c09_c1_closed_form() {
    let started = Instant::now();
    let mut worst_c1: f64 = 0.0;
    let mut worst_id: f64 = 0.0;
    for rho in [0.5, 1.0, 2.0] {
        let model = ConvexDiscModel::circle(rho).unwrap();
        let r = 2.0 * rho;
        let exact = TAU * rho * (1.0 / rho - 1.0 / r).cbrt();
        worst_c1 = worst_c1.max((c1(&model, r).unwrap() - exact).abs() / exact);
        let lc = limit_constants(&model, r).unwrap();
        let area = PI * rho * rho;
        worst_id = worst_id.max((lc.area_coeff / lc.vertex_coeff - area).abs() / area);
    }
    let pass = worst_c1 <= 1e-8 && worst_id <= 1e-12;
    report(
        9,
        "c1 closed form",
        pass,
        &format!("worst c1 rel err {worst_c1:.2e} (≤ 1e-8), worst area identity rel err {worst_id:.2e} (≤ 1e-12)"),
        started,
    );
    assert!(pass);
}

#[test]
fn c10_determinism_across_workers() {
    let started = Instant::now();
    let (single, _) = circle_run();
    let (m, r, grid, reps) = circle_run_config();
    let multi = experiment(m, r, grid, reps, 8);
    let a = records_csv(&single.records);
    let b = records_csv(&multi.records);
    let ma = spindle::experiment::moments_csv(&estimate_moments(&single.records).unwrap());
    let mb = spindle::experiment::moments_csv(&estimate_moments(&multi.records).unwrap());
    let pass = a == b && ma == mb && single.incidents == multi.incidents;
    report(
        10,
        "determinism",
        pass,
        &format!(
            "records CSV {} bytes, workers 1 vs 8 identical = {}",
            a.len(),
            a == b && ma == mb
        ),
        started,
    );
    assert!(pass);
}
