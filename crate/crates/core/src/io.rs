//! Point cloud files, surface files and sampled surface grids.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cloud::{Point, PointCloud};
use crate::error::{Result, WqisaError};
use crate::metrics::lerp;
use crate::spline::{KnotVector, TensorSplineSpace, WqisaSurface};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CloudFormat {
    /// Whitespace-separated `x y z`, one point per line; `#` starts a comment.
    Xyz,
    /// Comma-separated with a header row; the named columns supply x, y, z.
    Csv { columns: [String; 3] },
}

impl CloudFormat {
    pub fn csv() -> Self {
        CloudFormat::Csv {
            columns: ["x".into(), "y".into(), "z".into()],
        }
    }

    /// CSV for `.csv` paths, XYZ otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Self::csv(),
            _ => CloudFormat::Xyz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CloudFile {
    pub path: PathBuf,
    pub format: CloudFormat,
}

impl CloudFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let format = CloudFormat::from_path(&path);
        Self { path, format }
    }
}

pub fn read_cloud(file: &CloudFile) -> Result<PointCloud> {
    let text = fs::read_to_string(&file.path).map_err(|source| WqisaError::Io {
        path: file.path.clone(),
        source,
    })?;
    parse_cloud(&text, &file.format, &file.path)
}

/// Parses cloud text; `origin` only labels errors.
pub fn parse_cloud(text: &str, format: &CloudFormat, origin: &Path) -> Result<PointCloud> {
    let err = |line: usize, message: String| WqisaError::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let number = |line: usize, field: &str| -> Result<f64> {
        let v: f64 = field
            .trim()
            .parse()
            .map_err(|_| err(line, format!("cannot parse {:?} as a number", field.trim())))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(err(line, format!("non-finite value {v}")))
        }
    };
    let mut points = Vec::new();
    match format {
        CloudFormat::Xyz => {
            for (i, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() < 3 {
                    return Err(err(i + 1, format!("expected 3 values, found {}", fields.len())));
                }
                points.push(Point::new(
                    number(i + 1, fields[0])?,
                    number(i + 1, fields[1])?,
                    number(i + 1, fields[2])?,
                ));
            }
        }
        CloudFormat::Csv { columns } => {
            let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
            let (_, header) = lines.next().ok_or_else(|| err(1, "missing header row".into()))?;
            let names: Vec<&str> = header.split(',').map(str::trim).collect();
            let mut index = [0usize; 3];
            for (slot, name) in index.iter_mut().zip(columns) {
                *slot = names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| err(1, format!("header has no column {name:?}")))?;
            }
            for (i, raw) in lines {
                let fields: Vec<&str> = raw.split(',').collect();
                let get = |c: usize| {
                    fields
                        .get(c)
                        .copied()
                        .ok_or_else(|| err(i + 1, format!("missing column {}", c + 1)))
                };
                points.push(Point::new(
                    number(i + 1, get(index[0])?)?,
                    number(i + 1, get(index[1])?)?,
                    number(i + 1, get(index[2])?)?,
                ));
            }
        }
    }
    if points.is_empty() {
        return Err(err(text.lines().count(), "file contains no points".into()));
    }
    Ok(PointCloud::new(points))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|source| WqisaError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> WqisaError + '_ {
    move |source| WqisaError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes a cloud as XYZ or CSV (header `x,y,z`) with round-trip precision.
pub fn write_cloud(cloud: &PointCloud, path: &Path, format: &CloudFormat) -> Result<()> {
    let mut w = create(path)?;
    let e = io_err(path);
    match format {
        CloudFormat::Xyz => {
            for p in cloud {
                writeln!(w, "{} {} {}", p.x, p.y, p.z).map_err(&e)?;
            }
        }
        CloudFormat::Csv { columns } => {
            writeln!(w, "{},{},{}", columns[0], columns[1], columns[2]).map_err(&e)?;
            for p in cloud {
                writeln!(w, "{},{},{}", p.x, p.y, p.z).map_err(&e)?;
            }
        }
    }
    w.flush().map_err(&e)
}

/// JSON layout of a persisted surface.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceFile {
    pub degree: (usize, usize),
    pub knots_x: Vec<f64>,
    pub knots_y: Vec<f64>,
    /// `coefficients[i][j]` multiplies `B_i(x) B_j(y)`.
    pub coefficients: Vec<Vec<f64>>,
}

impl From<&WqisaSurface> for SurfaceFile {
    fn from(s: &WqisaSurface) -> Self {
        let space = s.space();
        let (nx, ny) = space.shape();
        SurfaceFile {
            degree: space.degree(),
            knots_x: space.knots_x.knots().to_vec(),
            knots_y: space.knots_y.knots().to_vec(),
            coefficients: (0..nx)
                .map(|i| (0..ny).map(|j| s.coefficient(i, j)).collect())
                .collect(),
        }
    }
}

impl TryFrom<SurfaceFile> for WqisaSurface {
    type Error = WqisaError;

    fn try_from(f: SurfaceFile) -> Result<Self> {
        let space = TensorSplineSpace::new(
            KnotVector::new(f.degree.0, f.knots_x)?,
            KnotVector::new(f.degree.1, f.knots_y)?,
        );
        let (nx, ny) = space.shape();
        if f.coefficients.len() != nx || f.coefficients.iter().any(|row| row.len() != ny) {
            return Err(WqisaError::ShapeMismatch {
                left: (nx, ny),
                right: (f.coefficients.len(), f.coefficients.first().map_or(0, Vec::len)),
            });
        }
        WqisaSurface::new(space, f.coefficients.into_iter().flatten().collect())
    }
}

pub fn surface_to_json(surface: &WqisaSurface) -> String {
    serde_json::to_string_pretty(&SurfaceFile::from(surface)).expect("surface serialises")
}

pub fn surface_from_json(text: &str, origin: &Path) -> Result<WqisaSurface> {
    let file: SurfaceFile = serde_json::from_str(text).map_err(|source| WqisaError::Json {
        path: origin.to_path_buf(),
        source,
    })?;
    WqisaSurface::try_from(file)
}

pub fn write_surface(surface: &WqisaSurface, path: &Path) -> Result<()> {
    fs::write(path, surface_to_json(surface) + "\n").map_err(io_err(path))
}

pub fn read_surface(path: &Path) -> Result<WqisaSurface> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    surface_from_json(&text, path)
}

/// CSV `x,y,z` of the surface on a uniform `nx` by `ny` grid covering the
/// domain, one row per grid point with y varying fastest, 17 significant
/// digits per value.
pub fn write_surface_grid_to<W: Write>(surface: &WqisaSurface, resolution: (usize, usize), mut w: W) -> Result<W> {
    let (nx, ny) = resolution;
    if nx < 2 || ny < 2 {
        return Err(WqisaError::Config(format!(
            "grid resolution {nx}x{ny} must be at least 2x2"
        )));
    }
    let rect = surface.domain();
    let e = |source| WqisaError::Io {
        path: PathBuf::from("<grid>"),
        source,
    };
    writeln!(w, "x,y,z").map_err(e)?;
    for i in 0..nx {
        let x = lerp(rect.x_min, rect.x_max, i, nx);
        for j in 0..ny {
            let y = lerp(rect.y_min, rect.y_max, j, ny);
            let z = surface.evaluate(x, y)?;
            writeln!(w, "{x:.16e},{y:.16e},{z:.16e}").map_err(e)?;
        }
    }
    Ok(w)
}

pub fn write_surface_grid(surface: &WqisaSurface, resolution: (usize, usize), path: &Path) -> Result<()> {
    let w = write_surface_grid_to(surface, resolution, create(path)?)?;
    w.into_inner()
        .map_err(|e| e.into_error())
        .and_then(|mut f| f.flush())
        .map_err(io_err(path))
}
