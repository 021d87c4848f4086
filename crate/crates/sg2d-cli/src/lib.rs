//! IO companion to the [`sg2d`] engine: run-configuration ingestion,
//! simulation orchestration, trajectory/diagnostics persistence, and SVG
//! snapshot rendering of Laguerre tessellations.
//!
//! The split is deliberate: `sg2d` is `no_std`-compatible numerics with
//! no knowledge of files or formats; everything that touches the
//! filesystem, serialization, or pixels lives here. The `sg2d` binary in
//! this crate exposes three subcommands:
//!
//! - `run <config>` — quantize (or ingest) initial data, integrate, and
//!   write `seeds_####.csv`, `snapshot_####.svg`, `diagnostics.csv`, and
//!   `run_manifest.json` into the output directory;
//! - `verify` — the explicit-solution oracle suite (single mass,
//!   two masses in a disk, centroidal equilibrium, finite-difference
//!   gradient/Hessian checks) with measured errors and a nonzero exit on
//!   any failure;
//! - `render <seeds.csv> <out.svg>` — re-render a persisted snapshot,
//!   reading the domain from the `run_manifest.json` next to the CSV (or
//!   an explicit `--config`).
//!
//! File formats are bit-stable: CSV floats carry 17 significant digits so
//! a round trip through `seeds_####.csv` reproduces the exact `f64`s, and
//! the manifest echoes the full configuration (RNG seed included), making
//! every run replayable from its artifacts alone.

pub mod config;
pub mod formats;
pub mod run;
pub mod svg;
pub mod verify;
