//! Run configuration in a line-oriented `key = value` format.
//!
//! ```text
//! # bi-quadratic, k-NN weight tuned over k = 1..10
//! degree = 2 2
//! weight = knn
//! parameters = 1..10
//! outlier_fence = none
//! coincidence_tolerance = auto
//! epsilon = auto
//! max_iterations = 15
//! split = random 0.5 0.25 0.25
//! seed = 42
//! ```
//!
//! Unknown keys are rejected. Omitted keys keep their defaults.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Result, WqisaError};
use crate::pipeline::{FitConfig, SplitScheme, DEFAULT_MAX_ITERATIONS};
use crate::weights::{WeightKind, WeightSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightName {
    Indicator,
    Gaussian,
    GaussianSquared,
    Knn,
    Idw,
    TruncatedIdw,
}

impl WeightName {
    const ALL: [(WeightName, &'static str); 6] = [
        (WeightName::Indicator, "indicator"),
        (WeightName::Gaussian, "gaussian"),
        (WeightName::GaussianSquared, "gaussian_squared"),
        (WeightName::Knn, "knn"),
        (WeightName::Idw, "idw"),
        (WeightName::TruncatedIdw, "truncated_idw"),
    ];

    pub fn as_str(self) -> &'static str {
        Self::ALL
            .iter()
            .find(|(w, _)| *w == self)
            .map(|(_, s)| *s)
            .unwrap_or("knn")
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().find(|(_, n)| *n == s).map(|(w, _)| *w)
    }

    fn takes_parameter(self) -> bool {
        self != WeightName::Idw
    }

    fn spec(self, parameter: f64) -> WeightSpec {
        let count = parameter.round().max(0.0) as usize;
        WeightSpec::new(match self {
            WeightName::Indicator => WeightKind::Indicator { radius: parameter },
            WeightName::Gaussian => WeightKind::Gaussian {
                sigma: parameter,
                squared_norm: false,
            },
            WeightName::GaussianSquared => WeightKind::Gaussian {
                sigma: parameter,
                squared_norm: true,
            },
            WeightName::Knn => WeightKind::Knn { k: count },
            WeightName::Idw => WeightKind::Idw,
            WeightName::TruncatedIdw => WeightKind::TruncatedIdw { k: count },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub degree: (usize, usize),
    pub weight: WeightName,
    /// Search grid over the weight's free parameter (ignored for `idw`).
    pub parameters: Vec<f64>,
    pub outlier_fence: Option<f64>,
    pub coincidence_tolerance: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_iterations: usize,
    pub split: SplitScheme,
    pub seed: u64,
    /// Surface sampling density for Hausdorff distances, per finest element.
    pub hausdorff_density: usize,
    pub mba_max_levels: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface_out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            degree: (2, 2),
            weight: WeightName::Knn,
            parameters: (1..=10).map(f64::from).collect(),
            outlier_fence: None,
            coincidence_tolerance: None,
            epsilon: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            split: SplitScheme::default(),
            seed: 0,
            hausdorff_density: 4,
            mba_max_levels: 10,
            surface_out: None,
            report_out: None,
        }
    }
}

impl RunConfig {
    pub fn weight_grid(&self) -> Vec<WeightSpec> {
        let decorate = |mut s: WeightSpec| {
            s.outlier_fence = self.outlier_fence;
            s.coincidence_tolerance = self.coincidence_tolerance;
            s
        };
        if self.weight.takes_parameter() {
            self.parameters.iter().map(|&p| decorate(self.weight.spec(p))).collect()
        } else {
            vec![decorate(self.weight.spec(0.0))]
        }
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            degree: self.degree,
            weight_grid: self.weight_grid(),
            epsilon: self.epsilon,
            max_iterations: self.max_iterations,
            scheme: self.split,
            seed: self.seed,
        }
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| WqisaError::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("{key}: cannot parse {s:?} as a number")))
            };
            let int = |s: &str| -> Result<usize> {
                s.parse()
                    .map_err(|_| err(format!("{key}: cannot parse {s:?} as an integer")))
            };
            let auto = |s: &str, word: &str| -> Result<Option<f64>> {
                if s == word {
                    Ok(None)
                } else {
                    num(s).map(Some)
                }
            };
            match key {
                "degree" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    cfg.degree = match parts.as_slice() {
                        [p] => (int(p)?, int(p)?),
                        [px, py] => (int(px)?, int(py)?),
                        _ => return Err(err("degree takes one or two integers".into())),
                    };
                }
                "weight" => {
                    cfg.weight = WeightName::parse(value).ok_or_else(|| err(format!("unknown weight {value:?}")))?;
                }
                "parameters" => {
                    cfg.parameters = if let Some((lo, hi)) = value.split_once("..") {
                        let (lo, hi) = (int(lo.trim())?, int(hi.trim())?);
                        (lo..=hi).map(|v| v as f64).collect()
                    } else {
                        value
                            .split(|c: char| c == ',' || c.is_whitespace())
                            .filter(|s| !s.is_empty())
                            .map(num)
                            .collect::<Result<_>>()?
                    };
                }
                "outlier_fence" => cfg.outlier_fence = auto(value, "none")?,
                "coincidence_tolerance" => cfg.coincidence_tolerance = auto(value, "auto")?,
                "epsilon" => cfg.epsilon = auto(value, "auto")?,
                "max_iterations" => cfg.max_iterations = int(value)?,
                "split" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    cfg.split = match parts.as_slice() {
                        ["random"] => SplitScheme::default(),
                        ["random", t, v, u] => SplitScheme::Random {
                            training: num(t)?,
                            validation: num(v)?,
                            test: num(u)?,
                        },
                        ["kfold", k] => SplitScheme::KFold { folds: int(k)? },
                        ["loo"] => SplitScheme::LeaveOneOut,
                        _ => return Err(err(format!("unknown split {value:?}"))),
                    };
                }
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| err(format!("seed: cannot parse {value:?}")))?
                }
                "hausdorff_density" => cfg.hausdorff_density = int(value)?,
                "mba_max_levels" => cfg.mba_max_levels = int(value)?,
                "surface_out" => cfg.surface_out = Some(PathBuf::from(value)),
                "report_out" => cfg.report_out = Some(PathBuf::from(value)),
                _ => return Err(err(format!("unknown key {key:?}"))),
            }
        }
        cfg.fit_config().validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| WqisaError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn serialize(&self) -> String {
        let opt = |v: Option<f64>, word: &str| v.map_or_else(|| word.to_string(), |v| v.to_string());
        let mut out = String::new();
        let _ = writeln!(out, "degree = {} {}", self.degree.0, self.degree.1);
        let _ = writeln!(out, "weight = {}", self.weight.as_str());
        let params: Vec<String> = self.parameters.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "parameters = {}", params.join(" "));
        let _ = writeln!(out, "outlier_fence = {}", opt(self.outlier_fence, "none"));
        let _ = writeln!(
            out,
            "coincidence_tolerance = {}",
            opt(self.coincidence_tolerance, "auto")
        );
        let _ = writeln!(out, "epsilon = {}", opt(self.epsilon, "auto"));
        let _ = writeln!(out, "max_iterations = {}", self.max_iterations);
        let split = match self.split {
            SplitScheme::Random {
                training,
                validation,
                test,
            } => format!("random {training} {validation} {test}"),
            SplitScheme::KFold { folds } => format!("kfold {folds}"),
            SplitScheme::LeaveOneOut => "loo".into(),
        };
        let _ = writeln!(out, "split = {split}");
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "hausdorff_density = {}", self.hausdorff_density);
        let _ = writeln!(out, "mba_max_levels = {}", self.mba_max_levels);
        if let Some(p) = &self.surface_out {
            let _ = writeln!(out, "surface_out = {}", p.display());
        }
        if let Some(p) = &self.report_out {
            let _ = writeln!(out, "report_out = {}", p.display());
        }
        out
    }
}
