//! Browser bindings for the wQISA demo page.
//!
//! Every export returns a JSON string; the plain `*_report` functions behind
//! them are ordinary Rust so they can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use wqisa::mba;
use wqisa::metrics;
use wqisa::pipeline::{self, FitConfig, IterationRecord, SplitScheme, StopReason};
use wqisa::synthetic::{hemisphere_cloud, perturb};
use wqisa::{KnotVector, PointCloud, WeightSpec, WqisaError};

/// Upper bound on generated clouds, keeps the page responsive.
pub const MAX_POINTS: usize = 20_000;

#[derive(Debug, Serialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub x: (f64, f64),
    pub y: (f64, f64),
    /// Heights with y varying fastest.
    pub z: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct FitView {
    pub cloud: Vec<[f64; 3]>,
    pub grid: Grid,
    pub knots_x: Vec<f64>,
    pub knots_y: Vec<f64>,
    pub iterations: Vec<IterationRecord>,
    pub best_iteration: usize,
    pub stop_reason: StopReason,
    pub test_mse: f64,
}

#[derive(Debug, Serialize)]
pub struct BasisView {
    pub t: Vec<f64>,
    /// `values[i][s]` is basis function `i` at `t[s]`.
    pub values: Vec<Vec<f64>>,
    pub knots: Vec<f64>,
    pub averages: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct MethodView {
    pub method: &'static str,
    pub mesh: (usize, usize),
    pub coefficients: usize,
    pub validation_gmse: f64,
    pub test_mse: f64,
    pub test_max_abs: f64,
}

#[derive(Debug, Serialize)]
pub struct CompareView {
    pub points: usize,
    pub methods: Vec<MethodView>,
}

fn noisy_hemisphere(n: usize, noise: f64, outliers: f64, seed: u64) -> Result<PointCloud, WqisaError> {
    if !(4..=MAX_POINTS).contains(&n) {
        return Err(WqisaError::Config(format!("point count must be in 4..={MAX_POINTS}")));
    }
    perturb(&hemisphere_cloud(n, seed), noise, outliers, 1.0, seed.wrapping_add(1))
}

fn demo_config(degree: usize, seed: u64) -> FitConfig {
    FitConfig {
        degree: (degree, degree),
        weight_grid: (1..=10).map(WeightSpec::knn).collect(),
        seed,
        ..FitConfig::default()
    }
}

/// Fits a perturbed hemisphere and samples the surface on a square grid.
pub fn fit_report(
    n: usize,
    noise: f64,
    outliers: f64,
    degree: usize,
    seed: u64,
    resolution: usize,
) -> Result<FitView, WqisaError> {
    let cloud = noisy_hemisphere(n, noise, outliers, seed)?;
    let outcome = pipeline::fit(&cloud, &demo_config(degree, seed))?;
    let surface = &outcome.surface;
    let rect = surface.domain();
    let res = resolution.clamp(2, 200);
    let z = metrics::sample_surface(surface, res, res)?
        .into_iter()
        .map(|p| p[2])
        .collect();
    Ok(FitView {
        cloud: cloud.iter().map(|p| [p.x, p.y, p.z]).collect(),
        grid: Grid {
            nx: res,
            ny: res,
            x: (rect.x_min, rect.x_max),
            y: (rect.y_min, rect.y_max),
            z,
        },
        knots_x: surface.space().knots_x.knots().to_vec(),
        knots_y: surface.space().knots_y.knots().to_vec(),
        iterations: outcome.report.iterations.clone(),
        best_iteration: outcome.report.best_iteration,
        stop_reason: outcome.report.stop_reason,
        test_mse: outcome.report.test_mse,
    })
}

/// Basis functions of an open knot vector on `[0, 1]` with the given
/// interior knots.
pub fn basis_report(degree: usize, interior: &[f64], samples: usize) -> Result<BasisView, WqisaError> {
    let mut knots = vec![0.0; degree + 1];
    let mut inner = interior.to_vec();
    inner.sort_by(f64::total_cmp);
    knots.extend(inner);
    knots.extend(std::iter::repeat_n(1.0, degree + 1));
    let kv = KnotVector::new(degree, knots)?;
    let samples = samples.clamp(2, 2000);
    let t: Vec<f64> = (0..samples).map(|s| s as f64 / (samples - 1) as f64).collect();
    let values = (0..kv.len())
        .map(|i| t.iter().map(|&s| kv.basis_value(i, s)).collect())
        .collect::<Result<_, _>>()?;
    Ok(BasisView {
        t,
        values,
        knots: kv.knots().to_vec(),
        averages: kv.knot_averages(),
    })
}

/// wQISA against MBA on one split of a perturbed hemisphere.
pub fn compare_report(n: usize, noise: f64, outliers: f64, seed: u64) -> Result<CompareView, WqisaError> {
    let cloud = noisy_hemisphere(n, noise, outliers, seed)?;
    let domain = cloud.bounding_box()?.non_degenerate();
    let split = pipeline::split(&cloud, SplitScheme::default(), seed)?.swap_remove(0);
    let w = pipeline::fit_split(&split, domain, &demo_config(2, seed))?;
    let m = mba::fit_mba_on(&split.training, 10, &split.validation, domain)?;
    let wt = metrics::punctual_errors(&w.surface, &split.test)?;
    let mt = metrics::punctual_errors(&m.surface, &split.test)?;
    Ok(CompareView {
        points: cloud.len(),
        methods: vec![
            MethodView {
                method: "wQISA",
                mesh: w.surface.space().element_counts(),
                coefficients: w.surface.coefficients().len(),
                validation_gmse: w.report.best().gmse,
                test_mse: wt.mse,
                test_max_abs: wt.max_abs,
            },
            MethodView {
                method: "MBA",
                mesh: m.surface.finest_space().element_counts(),
                coefficients: m.surface.levels().iter().map(|l| l.coefficients().len()).sum(),
                validation_gmse: m.gmse[m.best_level],
                test_mse: mt.mse,
                test_max_abs: mt.max_abs,
            },
        ],
    })
}

fn to_js<T: Serialize>(r: Result<T, WqisaError>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn fit_hemisphere(
    n: usize,
    noise: f64,
    outliers: f64,
    degree: usize,
    seed: u32,
    resolution: usize,
) -> Result<String, JsError> {
    to_js(fit_report(n, noise, outliers, degree, u64::from(seed), resolution))
}

#[wasm_bindgen]
pub fn basis_functions(degree: usize, interior: Vec<f64>, samples: usize) -> Result<String, JsError> {
    to_js(basis_report(degree, &interior, samples))
}

#[wasm_bindgen]
pub fn compare_methods(n: usize, noise: f64, outliers: f64, seed: u32) -> Result<String, JsError> {
    to_js(compare_report(n, noise, outliers, u64::from(seed)))
}
