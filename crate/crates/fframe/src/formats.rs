//! File formats: measure and IFS JSON, report JSON, plot-ready CSV.
//!
//! Measures:
//!
//! ```json
//! {"type": "atomic", "atoms": [[0.0, 1.0], [2.5, 0.25]]}
//! {"type": "density", "start": 0.0, "bin_width": 0.5, "masses": [0.5, 0.5]}
//! {"type": "sum", "parts": [ ... ]}
//! ```
//!
//! Systems are `{"R": 4, "B": [0, 2]}`, given inline, as a file path, or as a
//! catalog name.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use fframe_core::beurling::{DensityScan, DimensionEstimate};
use fframe_core::frame::FrameReport;
use fframe_core::ifs::AffineIfs;
use fframe_core::measure::{make_atomic, AtomicMeasure, DensityMeasure, Measure};
use fframe_core::reconstruct::ReconstructionReport;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::catalog;
use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MeasureJson {
    Atomic {
        atoms: Vec<(f64, f64)>,
    },
    Density {
        start: f64,
        bin_width: f64,
        masses: Vec<f64>,
    },
    Sum {
        parts: Vec<MeasureJson>,
    },
}

impl MeasureJson {
    pub fn to_measure(&self) -> Result<Measure> {
        Ok(match self {
            MeasureJson::Atomic { atoms } => {
                let (p, w): (Vec<f64>, Vec<f64>) = atoms.iter().copied().unzip();
                make_atomic(&p, &w)?.into()
            }
            MeasureJson::Density {
                start,
                bin_width,
                masses,
            } => DensityMeasure::new(*start, *bin_width, masses.clone())?.into(),
            MeasureJson::Sum { parts } => Measure::sum(
                parts
                    .iter()
                    .map(MeasureJson::to_measure)
                    .collect::<Result<_>>()?,
            ),
        })
    }

    pub fn from_measure(m: &Measure) -> Self {
        match m {
            Measure::Atomic(a) => MeasureJson::from_atomic(a),
            Measure::Density(d) => MeasureJson::Density {
                start: d.start(),
                bin_width: d.bin_width(),
                masses: d.masses().to_vec(),
            },
            Measure::Sum(parts) => MeasureJson::Sum {
                parts: parts.iter().map(MeasureJson::from_measure).collect(),
            },
        }
    }

    pub fn from_atomic(a: &AtomicMeasure) -> Self {
        MeasureJson::Atomic {
            atoms: a.atoms().collect(),
        }
    }
}

pub fn parse_measure(text: &str) -> Result<Measure> {
    serde_json::from_str::<MeasureJson>(text)?.to_measure()
}

pub fn read_measure(path: &Path) -> Result<Measure> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_measure(&text)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IfsJson {
    #[serde(rename = "R")]
    pub scale: i64,
    #[serde(rename = "B")]
    pub digits: Vec<i64>,
}

impl IfsJson {
    pub fn of(ifs: &AffineIfs) -> Self {
        IfsJson {
            scale: ifs.scale(),
            digits: ifs.digits().to_vec(),
        }
    }
}

/// Inline JSON, a catalog name, or a path to a JSON file, tried in that order.
pub fn parse_ifs(spec: &str) -> Result<AffineIfs> {
    let trimmed = spec.trim();
    let text = if trimmed.starts_with('{') {
        trimmed.to_string()
    } else if let Some(entry) = catalog::lookup(trimmed) {
        return Ok(entry.ifs());
    } else {
        std::fs::read_to_string(trimmed).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                CliError::Parse(format!(
                    "`{trimmed}` is neither inline JSON, a catalog name, nor a readable file"
                ))
            } else {
                CliError::io(trimmed, e)
            }
        })?
    };
    let j: IfsJson = serde_json::from_str(&text)?;
    Ok(AffineIfs::new(j.scale, &j.digits)?)
}

pub fn frame_report_json(r: &FrameReport, measure_ref: &str) -> Value {
    json!({
        "level": r.level,
        "lambda_truncation": r.lambda_truncation,
        "A": r.lower,
        "B": r.upper,
        "residuals": {
            "psd": r.psd_residual,
            "hermitian": r.hermitian_residual,
            "eigen": r.eigen_residual,
        },
        "measure_ref": measure_ref,
    })
}

pub fn dimension_json(d: &DimensionEstimate, radii: &[f64]) -> Value {
    json!({
        "slope": d.slope,
        "alpha_lo": d.alpha_lo,
        "alpha_hi": d.alpha_hi,
        "fit_range": [d.fit_range.0, d.fit_range.1],
        "residual": d.residual,
        "degenerate": d.degenerate,
        "radii": radii,
    })
}

pub fn density_scan_json(s: &DensityScan) -> Value {
    json!({
        "alpha": s.alpha,
        "estimate": s.estimate,
        "radii": s.radii,
        "sup_masses": s.sup_masses,
        "ratios": s.ratios,
    })
}

pub fn reconstruction_json(r: &ReconstructionReport) -> Value {
    json!({
        "t": r.t,
        "value_re": r.value.re,
        "value_im": r.value.im,
        "cutoff": r.cutoff,
        "step": r.step,
        "richardson_residual": r.richardson_residual,
        "boundary_distance": r.boundary_distance,
        "near_boundary": r.near_boundary,
    })
}

/// A CSV cell: integers verbatim, reals with 17 significant digits.
#[derive(Clone, Copy, Debug)]
pub enum Cell {
    Int(i64),
    Real(f64),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

/// `# config=<json>` then a header row then data rows.
pub fn csv_text(config_json: &str, header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut s = String::new();
    writeln!(s, "# config={config_json}").unwrap();
    writeln!(s, "{}", header.join(",")).unwrap();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Int(i) => i.to_string(),
                Cell::Real(x) => format!("{x:.16e}"),
            })
            .collect();
        writeln!(s, "{}", cells.join(",")).unwrap();
    }
    s
}

/// Write through a temporary file in the target directory and rename it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents)
        .and_then(|_| tmp.flush())
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}
