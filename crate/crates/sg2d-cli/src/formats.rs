//! On-disk artifact formats: seed CSVs, the diagnostics series, and the
//! run manifest.
//!
//! Floats are written as `{:.16e}` — 17 significant decimal digits — the
//! shortest fixed width that round-trips every `f64` exactly, so
//! re-ingesting `seeds_0000.csv` as explicit initial data reproduces the
//! original run bit for bit. Column orders are part of the contract:
//!
//! - `seeds_####.csv`: `index,x,y,mass,weight`
//! - `diagnostics.csv`: `t,transport_cost,energy,min_separation,max_area_error`
//!
//! `run_manifest.json` echoes the full [`RunConfig`] (RNG seed included)
//! plus tool version, step counts, and the snapshot index→step map, so a
//! run can be replayed or re-rendered from its artifact directory alone.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sg2d::dynamics::Diagnostics;
use sg2d::quantize::GridDensity;
use sg2d::{DiscreteMeasure, Point2, WeightVector};

use crate::config::RunConfig;

/// Artifact IO errors, tagged with the offending path.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}:{row}: {message}")]
    Malformed {
        path: PathBuf,
        /// 1-based data-row number (header excluded).
        row: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("seed data invalid: {0}")]
    BadMeasure(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// `f64` → decimal with 17 significant digits (exact round trip).
fn full_precision(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write one snapshot's seeds: columns `index,x,y,mass,weight`.
pub fn write_seeds_csv(
    path: &Path,
    measure: &DiscreteMeasure,
    weights: &WeightVector,
) -> Result<(), FormatError> {
    assert_eq!(weights.len(), measure.n(), "weight/seed count mismatch");
    let mut writer = csv::Writer::from_path(path).map_err(|source| FormatError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source| FormatError::Csv {
        path: path.to_path_buf(),
        source,
    };
    writer
        .write_record(["index", "x", "y", "mass", "weight"])
        .map_err(csv_err)?;
    for i in 0..measure.n() {
        let z = measure.seeds()[i];
        writer
            .write_record([
                i.to_string(),
                full_precision(z.x),
                full_precision(z.y),
                full_precision(measure.masses()[i]),
                full_precision(weights[i]),
            ])
            .map_err(csv_err)?;
    }
    writer.flush().map_err(io_err(path))?;
    Ok(())
}

/// Read a seeds CSV back into a measure and its stored weights. Rows may
/// appear in any order; they are sorted by the `index` column.
pub fn read_seeds_csv(path: &Path) -> Result<(DiscreteMeasure, WeightVector), FormatError> {
    let mut reader = csv::Reader::from_path(path).map_err(|source| FormatError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows: Vec<(usize, Point2, f64, f64)> = Vec::new();
    for (row_number, record) in reader.records().enumerate() {
        let record = record.map_err(|source| FormatError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let field = |k: usize, name: &str| -> Result<f64, FormatError> {
            record
                .get(k)
                .ok_or_else(|| FormatError::Malformed {
                    path: path.to_path_buf(),
                    row: row_number + 1,
                    message: format!("missing column {name}"),
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| FormatError::Malformed {
                    path: path.to_path_buf(),
                    row: row_number + 1,
                    message: format!("column {name}: {e}"),
                })
        };
        let index = field(0, "index")? as usize;
        rows.push((
            index,
            Point2::new(field(1, "x")?, field(2, "y")?),
            field(3, "mass")?,
            field(4, "weight")?,
        ));
    }
    rows.sort_by_key(|r| r.0);
    for (k, row) in rows.iter().enumerate() {
        if row.0 != k {
            return Err(FormatError::Malformed {
                path: path.to_path_buf(),
                row: k + 1,
                message: format!("index column must be 0..n−1; found {}", row.0),
            });
        }
    }
    let seeds: Vec<Point2> = rows.iter().map(|r| r.1).collect();
    let masses: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let weights: Vec<f64> = rows.iter().map(|r| r.3).collect();
    let measure =
        DiscreteMeasure::new(seeds, masses).map_err(|e| FormatError::BadMeasure(e.to_string()))?;
    Ok((measure, WeightVector::from(weights)))
}

/// Write the per-step diagnostics series:
/// `t,transport_cost,energy,min_separation,max_area_error`.
pub fn write_diagnostics_csv(
    path: &Path,
    series: &[(f64, Diagnostics)],
) -> Result<(), FormatError> {
    let mut writer = csv::Writer::from_path(path).map_err(|source| FormatError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source| FormatError::Csv {
        path: path.to_path_buf(),
        source,
    };
    writer
        .write_record(["t", "transport_cost", "energy", "min_separation", "max_area_error"])
        .map_err(csv_err)?;
    for (t, d) in series {
        writer
            .write_record([
                full_precision(*t),
                full_precision(d.transport_cost),
                full_precision(d.energy),
                full_precision(d.min_separation),
                full_precision(d.max_area_error),
            ])
            .map_err(csv_err)?;
    }
    writer.flush().map_err(io_err(path))?;
    Ok(())
}

/// Everything needed to replay or re-render a run from its artifacts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    /// Manifest schema version (this is version 1).
    pub format_version: u32,
    /// `sg2d-cli` version that produced the run.
    pub tool_version: String,
    /// Full configuration echo, RNG seed included.
    pub config: RunConfig,
    /// Total RK4 steps the protocol requested.
    pub steps: usize,
    /// Snapshot ordinal `k` (of `seeds_{k:04}.csv`) → step index.
    pub snapshot_steps: Vec<usize>,
    /// Whether the run reached `T` (false = aborted; see `failure`).
    pub completed: bool,
    /// Human-readable abort reason, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), FormatError> {
    let json = serde_json::to_string_pretty(manifest).map_err(|source| FormatError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    std::fs::write(path, json.as_bytes()).map_err(io_err(path))
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, FormatError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| FormatError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// `seeds_0007.csv`-style artifact names.
pub fn seeds_filename(ordinal: usize) -> String {
    format!("seeds_{ordinal:04}.csv")
}

/// `snapshot_0007.svg`-style artifact names.
pub fn snapshot_filename(ordinal: usize) -> String {
    format!("snapshot_{ordinal:04}.svg")
}

/// Relative slack allowed when checking that grid-CSV coordinates form a
/// uniformly spaced lattice. Coordinates written with ≥ 10 significant
/// digits land within a few ulps of the lattice; 1e-9 · spacing admits
/// that and still rejects genuinely ragged point sets.
const GRID_SPACING_REL: f64 = 1e-9;

/// Read a gridded density from a CSV of `x,y,value` rows.
///
/// The rows (any order, optional header) must cover a full rectangular
/// lattice: every distinct x paired with every distinct y, uniformly
/// spaced within `GRID_SPACING_REL` relative slack, each node exactly
/// once. Distinct coordinates must repeat *textually* between rows (write
/// the lattice from one source); values must be finite and ≥ 0 —
/// [`GridDensity`] re-validates them on construction. Whole-lattice
/// defects are reported as `Malformed` with `row = 0`.
pub fn read_grid_csv(path: &Path) -> Result<GridDensity, FormatError> {
    let malformed = |row: usize, message: String| FormatError::Malformed {
        path: path.to_path_buf(),
        row,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_path(path)
        .map_err(|source| FormatError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|source| FormatError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let parse = |idx: usize, name: &str| -> Result<f64, FormatError> {
            record
                .get(idx)
                .ok_or_else(|| malformed(k + 1, format!("missing column {name}")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| malformed(k + 1, format!("column {name}: {e}")))
        };
        // A non-numeric first row is a header; anywhere else it's an error.
        if k == 0 && record.get(0).is_some_and(|s| s.trim().parse::<f64>().is_err()) {
            continue;
        }
        rows.push((parse(0, "x")?, parse(1, "y")?, parse(2, "value")?));
    }

    let axis = |pick: fn(&(f64, f64, f64)) -> f64, name: &str| -> Result<Vec<f64>, FormatError> {
        let mut vals: Vec<f64> = rows.iter().map(pick).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        if vals.len() < 2 {
            return Err(malformed(0, format!("need ≥ 2 distinct {name} coordinates")));
        }
        let spacing = (vals[vals.len() - 1] - vals[0]) / (vals.len() - 1) as f64;
        for (i, &v) in vals.iter().enumerate() {
            if (v - (vals[0] + i as f64 * spacing)).abs() > GRID_SPACING_REL * spacing {
                return Err(malformed(
                    0,
                    format!("{name} coordinates are not uniformly spaced near {v}"),
                ));
            }
        }
        Ok(vals)
    };
    let xs = axis(|r| r.0, "x")?;
    let ys = axis(|r| r.1, "y")?;
    let (nx, ny) = (xs.len(), ys.len());
    if rows.len() != nx * ny {
        return Err(malformed(
            0,
            format!("{} rows do not fill a {nx}×{ny} lattice", rows.len()),
        ));
    }

    let mut values = vec![f64::NAN; nx * ny];
    for (k, &(x, y, v)) in rows.iter().enumerate() {
        // Dedup above was exact, so every coordinate is findable exactly.
        let ix = xs.binary_search_by(|p| p.total_cmp(&x)).expect("x in lattice");
        let iy = ys.binary_search_by(|p| p.total_cmp(&y)).expect("y in lattice");
        let slot = &mut values[iy * nx + ix];
        if !slot.is_nan() {
            return Err(malformed(k + 1, format!("duplicate lattice node ({x}, {y})")));
        }
        *slot = v;
    }
    // rows.len() == nx·ny and no duplicates ⇒ every slot was filled.
    debug_assert!(values.iter().all(|v| !v.is_nan()));

    let (dx, dy) = (
        (xs[nx - 1] - xs[0]) / (nx - 1) as f64,
        (ys[ny - 1] - ys[0]) / (ny - 1) as f64,
    );
    GridDensity::new(Point2::new(xs[0], ys[0]), dx, dy, nx, ny, values)
        .map_err(|e| malformed(0, format!("grid rejected: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_csv_round_trips_bitwise() {
        // Awkward values on purpose: subnormal-ish weights, long decimal
        // tails, negative coordinates.
        let measure = DiscreteMeasure::new(
            vec![
                Point2::new(0.1 + 0.2, -1.0 / 3.0),
                Point2::new(core::f64::consts::PI, 1e-17),
            ],
            vec![0.12345678901234568, 2.0 - 0.12345678901234568],
        )
        .expect("valid");
        let weights = WeightVector::from(vec![-3.5e-13, 0.0]);
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("seeds_0000.csv");
        write_seeds_csv(&path, &measure, &weights).expect("writes");
        let (back_measure, back_weights) = read_seeds_csv(&path).expect("reads");
        assert_eq!(back_measure, measure, "measure must round-trip exactly");
        assert_eq!(&*back_weights, &*weights, "weights must round-trip exactly");
    }

    #[test]
    fn seeds_csv_has_contractual_header_order() {
        let measure =
            DiscreteMeasure::new(vec![Point2::new(0.5, 0.5)], vec![1.0]).expect("valid");
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("seeds.csv");
        write_seeds_csv(&path, &measure, &WeightVector::zeros(1)).expect("writes");
        let text = std::fs::read_to_string(&path).expect("reads");
        assert!(
            text.starts_with("index,x,y,mass,weight"),
            "header was: {}",
            text.lines().next().unwrap_or("")
        );
    }

    #[test]
    fn malformed_row_is_reported_with_row_number() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("seeds.csv");
        std::fs::write(&path, "index,x,y,mass,weight\n0,0.5,0.5,not_a_number,0\n")
            .expect("writes");
        let err = read_seeds_csv(&path).expect_err("must fail");
        let message = err.to_string();
        assert!(message.contains("mass"), "no column name in: {message}");
        assert!(message.contains(":1:"), "no row number in: {message}");
    }

    #[test]
    fn diagnostics_csv_header_order() {
        let series = vec![(
            0.0,
            Diagnostics {
                transport_cost: 0.1,
                energy: 0.05,
                min_separation: 0.5,
                max_area_error: 1e-12,
            },
        )];
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("diagnostics.csv");
        write_diagnostics_csv(&path, &series).expect("writes");
        let text = std::fs::read_to_string(&path).expect("reads");
        assert!(text.starts_with("t,transport_cost,energy,min_separation,max_area_error"));
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn grid_csv_reconstructs_the_lattice() {
        // 3×2 lattice, rows shuffled, with a header. Node (x, y) carries
        // value x + 10y, so bilinear evaluation at the nodes is exact.
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("grid.csv");
        std::fs::write(
            &path,
            "x,y,value\n0.5,1.0,10.5\n0.0,0.0,0.0\n0.5,0.0,0.5\n1.0,1.0,11.0\n0.0,1.0,10.0\n1.0,0.0,1.0\n",
        )
        .expect("writes");
        let grid = read_grid_csv(&path).expect("parses");
        let density =
            sg2d::DensitySpec::from_grid(sg2d::ConvexPolygon::square(0.0, 1.0), grid);
        for &(x, y) in &[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0), (0.25, 0.5)] {
            assert!(
                (density.eval(Point2::new(x, y)) - (x + 10.0 * y)).abs() < 1e-12,
                "bilinear value wrong at ({x}, {y})"
            );
        }
    }

    #[test]
    fn grid_csv_rejects_ragged_lattices() {
        // 5 rows cannot fill the 2×2 ∪ extra-x lattice the coordinates span.
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("grid.csv");
        std::fs::write(
            &path,
            "0,0,1\n1,0,1\n0,1,1\n1,1,1\n0.5,0.5,1\n",
        )
        .expect("writes");
        let err = read_grid_csv(&path).expect_err("must fail");
        assert!(
            matches!(err, FormatError::Malformed { .. }),
            "wrong error: {err}"
        );
    }

    #[test]
    fn grid_csv_rejects_negative_samples() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("grid.csv");
        std::fs::write(&path, "0,0,1\n1,0,1\n0,1,-0.5\n1,1,1\n").expect("writes");
        let err = read_grid_csv(&path).expect_err("must fail");
        assert!(err.to_string().contains("grid rejected"), "wrong error: {err}");
    }
}
