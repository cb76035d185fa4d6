//! Command-line front end.
//!
//! Exit status is 0 on success, 1 for usage errors and 2 for data errors.
//! JSON reports carry the tool version, the seed and the configuration so a
//! run can be repeated; they contain no timestamps.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::cloud::PointCloud;
use crate::config::RunConfig;
use crate::error::{Result, WqisaError};
use crate::io::{self, CloudFile, CloudFormat};
use crate::mba;
use crate::metrics::{self, ErrorStats, Surface};
use crate::pipeline;
use crate::spline::TensorSplineSpace;
use crate::synthetic;

pub const TOOL: &str = "wqisa";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "wqisa",
    version,
    about = "Weighted quasi-interpolant spline approximation of point clouds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::read(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split a cloud into training, validation and test files.
    Split {
        #[arg(long)]
        cloud: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Directory receiving the subsets.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Fit a surface with the data-driven refinement loop.
    Fit {
        #[arg(long)]
        cloud: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Surface JSON output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fit report JSON output (stdout when omitted).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Error statistics and Hausdorff distance of a surface against a cloud.
    Eval {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        cloud: PathBuf,
        /// Surface samples per finest element along each axis.
        #[arg(long, default_value_t = 4)]
        density: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit both wQISA and MBA on the same split and report side by side.
    Compare {
        #[arg(long)]
        cloud: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a surface on a uniform grid as CSV `x,y,z`.
    Sample {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long, default_value_t = 100)]
        nx: usize,
        #[arg(long, default_value_t = 100)]
        ny: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic cloud.
    Synth {
        #[arg(long, value_enum, default_value_t = Generator::Hemisphere)]
        kind: Generator,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Standard deviation of additive height noise.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Fraction of heights replaced by outliers.
        #[arg(long, default_value_t = 0.0)]
        outlier_fraction: f64,
        /// Width of the outlier range relative to the height range.
        #[arg(long, default_value_t = 1.0)]
        outlier_scale: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Generator {
    Hemisphere,
}

/// Parses `argv` (program name first) and runs the command.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(Failure { usage, error }) => {
            eprintln!("error: {error}");
            if usage || matches!(error, WqisaError::Config(_)) {
                1
            } else {
                2
            }
        }
    }
}

/// A failed command; `usage` marks problems with the invocation or its
/// configuration rather than with the data.
struct Failure {
    usage: bool,
    error: WqisaError,
}

impl From<WqisaError> for Failure {
    fn from(error: WqisaError) -> Self {
        Failure { usage: false, error }
    }
}

fn usage(error: WqisaError) -> Failure {
    Failure { usage: true, error }
}

fn read_cloud(path: &Path) -> Result<PointCloud> {
    io::read_cloud(&CloudFile::new(path))
}

fn emit(value: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serialises") + "\n";
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| WqisaError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn header(cfg: &RunConfig) -> serde_json::Value {
    json!({ "tool": TOOL, "version": VERSION, "seed": cfg.seed, "config": cfg })
}

#[derive(Serialize)]
struct MethodSummary {
    method: &'static str,
    mesh: (usize, usize),
    coefficients: usize,
    validation_gmse: f64,
    test: ErrorStats,
    hausdorff: f64,
}

fn summarise<S: Surface>(
    method: &'static str,
    surface: &S,
    finest: &TensorSplineSpace,
    coefficients: usize,
    validation_gmse: f64,
    test: &PointCloud,
    density: usize,
) -> Result<MethodSummary> {
    let grid = metrics::default_sampling(finest, density);
    Ok(MethodSummary {
        method,
        mesh: finest.element_counts(),
        coefficients,
        validation_gmse,
        test: metrics::punctual_errors(surface, test)?,
        hausdorff: metrics::hausdorff_to_surface(test, surface, finest.domain(), grid)?,
    })
}

fn run(command: Command) -> std::result::Result<(), Failure> {
    match command {
        Command::Split { cloud, config, out_dir } => {
            let cfg = config.load().map_err(usage)?;
            let points = read_cloud(&cloud)?;
            std::fs::create_dir_all(&out_dir).map_err(|source| WqisaError::Io {
                path: out_dir.clone(),
                source,
            })?;
            let format = CloudFormat::from_path(&cloud);
            let ext = if matches!(format, CloudFormat::Csv { .. }) {
                "csv"
            } else {
                "xyz"
            };
            for s in pipeline::split(&points, cfg.split, cfg.seed)? {
                let prefix = s.fold.map_or_else(String::new, |f| format!("fold{f}_"));
                let sets: Vec<(&str, &PointCloud)> = if s.fold.is_some() {
                    vec![("training", &s.training), ("holdout", &s.test)]
                } else {
                    vec![
                        ("training", &s.training),
                        ("validation", &s.validation),
                        ("test", &s.test),
                    ]
                };
                for (name, set) in sets {
                    io::write_cloud(set, &out_dir.join(format!("{prefix}{name}.{ext}")), &format)?;
                }
            }
            Ok(())
        }
        Command::Fit {
            cloud,
            config,
            out,
            report,
        } => {
            let cfg = config.load().map_err(usage)?;
            let points = read_cloud(&cloud)?;
            let outcome = pipeline::fit(&points, &cfg.fit_config())?;
            if let Some(path) = out.as_ref().or(cfg.surface_out.as_ref()) {
                io::write_surface(&outcome.surface, path)?;
            }
            eprintln!(
                "{} iterations, stop: {:?}, test MSE {:.6e}, {:.3}s",
                outcome.report.iterations.len(),
                outcome.report.stop_reason,
                outcome.report.test_mse,
                outcome.report.wall_time.as_secs_f64()
            );
            let mut value = header(&cfg);
            value["report"] = serde_json::to_value(&outcome.report).expect("report serialises");
            Ok(emit(&value, report.as_deref().or(cfg.report_out.as_deref()))?)
        }
        Command::Eval {
            surface,
            cloud,
            density,
            out,
        } => {
            let s = io::read_surface(&surface)?;
            let points = read_cloud(&cloud)?;
            let stats = metrics::punctual_errors(&s, &points)?;
            let grid = metrics::default_sampling(s.space(), density);
            let h = metrics::hausdorff_to_surface(&points, &s, s.domain(), grid)?;
            let value = json!({
                "tool": TOOL,
                "version": VERSION,
                "stats": stats,
                "hausdorff": h,
                "sampling": [grid.0, grid.1],
            });
            Ok(emit(&value, out.as_deref())?)
        }
        Command::Compare { cloud, config, out } => {
            let cfg = config.load().map_err(usage)?;
            let points = read_cloud(&cloud)?;
            let fit_cfg = cfg.fit_config();
            fit_cfg.validate().map_err(usage)?;
            let domain = points.bounding_box()?.non_degenerate();
            let split = pipeline::split(&points, cfg.split, cfg.seed)?.swap_remove(0);

            let w = pipeline::fit_split(&split, domain, &fit_cfg)?;
            let wq = summarise(
                "wqisa",
                &w.surface,
                w.surface.space(),
                w.surface.coefficients().len(),
                w.report.best().gmse,
                &split.test,
                cfg.hausdorff_density,
            )?;
            let m = mba::fit_mba_on(&split.training, cfg.mba_max_levels.max(1), &split.validation, domain)?;
            let mb = summarise(
                "mba",
                &m.surface,
                m.surface.finest_space(),
                m.surface.levels().iter().map(|l| l.coefficients().len()).sum(),
                m.gmse[m.best_level],
                &split.test,
                cfg.hausdorff_density,
            )?;
            eprintln!(
                "{:<8} {:>10} {:>14} {:>14} {:>14} {:>14}",
                "method", "mesh", "GMSE", "mean |e|", "std |e|", "Hausdorff"
            );
            for s in [&wq, &mb] {
                eprintln!(
                    "{:<8} {:>10} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
                    s.method,
                    format!("{}x{}", s.mesh.0, s.mesh.1),
                    s.validation_gmse,
                    s.test.mean,
                    s.test.std,
                    s.hausdorff
                );
            }
            let mut value = header(&cfg);
            value["wqisa"] = serde_json::to_value(&wq).expect("serialises");
            value["wqisa_report"] = serde_json::to_value(&w.report).expect("serialises");
            value["mba"] = serde_json::to_value(&mb).expect("serialises");
            value["mba_levels"] = json!({ "gmse": m.gmse, "best_level": m.best_level });
            Ok(emit(&value, out.as_deref())?)
        }
        Command::Sample { surface, nx, ny, out } => {
            let s = io::read_surface(&surface)?;
            Ok(io::write_surface_grid(&s, (nx, ny), &out)?)
        }
        Command::Synth {
            kind: Generator::Hemisphere,
            n,
            seed,
            noise,
            outlier_fraction,
            outlier_scale,
            out,
        } => {
            let base = synthetic::hemisphere_cloud(n, seed);
            let cloud = synthetic::perturb(&base, noise, outlier_fraction, outlier_scale, seed.wrapping_add(1))?;
            Ok(io::write_cloud(&cloud, &out, &CloudFormat::from_path(&out))?)
        }
    }
}
