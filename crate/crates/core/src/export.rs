//! File emitters: indicator grids as CSV and 16-bit PGM, and the JSON run report.

use crate::error::{Error, Result};
use crate::inversion::{
    Calibration, Classification, ClassifyMode, ImpedanceEstimate, IndicatorGrid, LambdaLabel, SignVerdict,
};
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// CSV with a `#` header line carrying bounds and spacing, then one line per
/// grid row (constant y, increasing x), rows in increasing y.
pub fn write_grid_csv<W: Write>(grid: &IndicatorGrid, mut out: W) -> Result<()> {
    let s = &grid.spec;
    writeln!(
        out,
        "# x_min={} x_max={} y_min={} y_max={} h={} nx={} ny={}",
        s.x_min, s.x_max, s.y_min, s.y_max, s.h, grid.nx, grid.ny
    )?;
    let mut line = String::new();
    for row in grid.values.chunks(grid.nx) {
        line.clear();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:.10e}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Linear min-max scaling recorded next to a PGM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgmScale {
    pub min: f64,
    pub max: f64,
    pub maxval: u16,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub h: f64,
    /// First image row is the top of the grid (largest y).
    pub top_row_y: f64,
}

/// Binary 16-bit PGM (big-endian samples). Image rows run from the largest
/// y down so the picture has the usual orientation.
pub fn write_pgm<W: Write>(grid: &IndicatorGrid, mut out: W) -> Result<PgmScale> {
    let (min, max) = grid.min_max();
    if !min.is_finite() || !max.is_finite() {
        return Err(Error::DegenerateData("grid holds non-finite values".into()));
    }
    let maxval = u16::MAX;
    write!(out, "P5\n{} {}\n{}\n", grid.nx, grid.ny, maxval)?;
    let span = max - min;
    let mut buf = Vec::with_capacity(2 * grid.nx * grid.ny);
    for j in (0..grid.ny).rev() {
        for i in 0..grid.nx {
            let v = if span > 0.0 { (grid.get(i, j) - min) / span } else { 0.0 };
            let q = (v * maxval as f64).round().clamp(0.0, maxval as f64) as u16;
            buf.extend_from_slice(&q.to_be_bytes());
        }
    }
    out.write_all(&buf)?;
    let s = &grid.spec;
    Ok(PgmScale {
        min,
        max,
        maxval,
        x_min: s.x_min,
        x_max: s.x_max,
        y_min: s.y_min,
        y_max: s.y_max,
        h: s.h,
        top_row_y: s.y_max,
    })
}

/// Writes `<stem>.csv`, `<stem>.pgm` and `<stem>.pgm.json`.
pub fn save_grid(grid: &IndicatorGrid, stem: &Path) -> Result<Vec<std::path::PathBuf>> {
    let csv = stem.with_extension("csv");
    let pgm = stem.with_extension("pgm");
    let side = stem.with_extension("pgm.json");
    let mut w = BufWriter::new(File::create(&csv)?);
    write_grid_csv(grid, &mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(&pgm)?);
    let scale = write_pgm(grid, &mut w)?;
    w.flush()?;
    std::fs::write(&side, serde_json::to_string_pretty(&scale)? + "\n")?;
    Ok(vec![csv, pgm, side])
}

/// One direction of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionEntry {
    pub l1: f64,
    pub l2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates1: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates2: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub gamma: f64,
}

/// Entries keyed by the base-direction angle β, in direction order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ByBeta(pub Vec<(f64, DirectionEntry)>);

impl Serialize for ByBeta {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (beta, entry) in &self.0 {
            map.serialize_entry(&format!("{beta:.6}"), entry)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SignTestEntry {
    pub verdict: SignVerdict,
    pub outer_mean: f64,
    pub inner_mean: f64,
}

/// Final boundary-condition verdict combining classification and sign test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Dirichlet,
    Neumann,
    DirichletOrNeumann,
    Impedance,
}

/// Classification block of the report.
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationEntry {
    pub classification: Classification,
    pub mode: ClassifyMode,
    pub require_both: bool,
    pub alphas: [u32; 2],
    /// Dataset the ℒ table came from, when it is not the imaged one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationEntry>,
    pub indicator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_test: Option<SignTestEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_estimate: Option<String>,
    pub imag_ratio: f64,
    pub skipped_directions: Vec<f64>,
    pub calibration: Calibration,
    pub directions: ByBeta,
}

/// Report rows from an impedance estimate, keyed by β.
pub fn directions_from(est: &ImpedanceEstimate) -> ByBeta {
    let gamma = est.gamma();
    ByBeta(
        est.rows
            .iter()
            .zip(gamma)
            .map(|(r, g)| {
                (
                    r.beta,
                    DirectionEntry {
                        l1: r.l1,
                        l2: r.l2,
                        candidates1: r.cand1,
                        candidates2: r.cand2,
                        lambda: r.lambda,
                        gamma: g,
                    },
                )
            })
            .collect(),
    )
}

/// Known-boundary impedance, keyed by observation angle.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryLambdaEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<LambdaLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}
