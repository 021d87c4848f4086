//! Run configuration: a single TOML file fixing the domain, the initial
//! measure, the integration protocol, and the output location.
//!
//! Parsing and validation are split so that `run` can refuse a bad config
//! before creating any files: [`RunConfig::from_toml_str`] surfaces the
//! TOML parser's line/column/key diagnostics verbatim, and
//! [`RunConfig::validate`] checks every semantic constraint (positive
//! step sizes, snapshot times landing on steps, exactly one initial-data
//! mode, …) with the offending field named in the message.
//!
//! ```toml
//! T = 5.0
//! h = 0.01
//! tol = 1e-3
//! snapshot_every = 50            # or: snapshot_times = [0.0, 0.5, 5.0]
//! output_dir = "out/example"
//!
//! [domain]
//! shape = "square"               # square(a,b) | disk(area) | polygon
//! a = -1.0
//! b = 1.0
//!
//! [initial]                      # density quantization…
//! density = "gaussian"           # uniform | gaussian | grid
//! center = [0.0, 0.0]
//! sigma = 0.7071067811865476
//! n = 2000
//! lloyd_iterations = 1000
//! rng_seed = 7
//! # …or explicit lists: seeds = [[x, y], …], masses = [m, …]
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Errors produced while reading or validating a configuration. The
/// `Parse` variant carries toml's diagnostics (line/column and key path);
/// `Invalid` names the field that failed semantic validation.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {field}: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

/// Complete description of one simulation run. Serialized verbatim into
/// `run_manifest.json`, so re-running a manifest reproduces the run.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Final time `T` (the run takes `round(T/h)` RK4 steps).
    #[serde(rename = "T")]
    pub t_final: f64,
    /// Fixed RK4 step size.
    pub h: f64,
    /// Transport-solver tolerance: area error is driven below
    /// `tol · min_i m_i` (dimensionless fraction — the literature's
    /// "0.1%" is `tol = 1e-3`).
    pub tol: f64,
    /// Record every k-th step. Exactly one of `snapshot_every` /
    /// `snapshot_times` must be present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    /// Explicit snapshot times; each must equal `k·h` for an integer
    /// `k ≤ round(T/h)` within 1e-6·h. Exactly the listed times are
    /// persisted (t = 0 need not be listed but is always recorded).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_times: Option<Vec<f64>>,
    /// Absolute pairwise seed-separation floor; omitted = the engine
    /// default (1e-8 · diameter(Ω)).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sep_floor: Option<f64>,
    /// Artifact directory (created if missing). Overridable by
    /// `--output-dir` and the `SG2D_OUTPUT_DIR` environment variable.
    pub output_dir: PathBuf,
    pub domain: DomainConfig,
    pub initial: InitialConfig,
}

/// The convex physical domain Ω.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    /// Axis-aligned square `[a, b]²`.
    Square { a: f64, b: f64 },
    /// Regular-polygon stand-in for the disk of the given area,
    /// centered at the origin.
    Disk {
        area: f64,
        /// Number of polygon sides (default 256: area-accurate to
        /// ~2.5e-4 relative, centroid geometry to ~1.5e-5).
        #[serde(default = "default_disk_segments")]
        segments: usize,
    },
    /// Explicit convex vertex loop.
    Polygon { vertices: Vec<[f64; 2]> },
}

fn default_disk_segments() -> usize {
    256
}

/// Initial measure: either a density to quantize (`density`, `n`,
/// `lloyd_iterations`, `rng_seed`) or explicit lists (`seeds`,
/// `masses`). The two modes are mutually exclusive.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// `"uniform"`, `"gaussian"`, or `"grid"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    /// Gaussian center (default origin).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    /// Gaussian width: ρ(x) = exp(−|x−center|²/(2σ²)).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// CSV of `x,y,value` rows on a rectangular lattice (grid density).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_csv: Option<PathBuf>,
    /// Number of seeds to quantize into.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Lloyd iterations for the quantizer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lloyd_iterations: Option<usize>,
    /// Seed for the quantizer's RNG (determinism anchor).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    /// Explicit seed positions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<[f64; 2]>>,
    /// Explicit masses (must sum to area(Ω) within 1e-6 relative;
    /// sub-tolerance defects above the f64 rounding floor are rescaled
    /// away).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
}

impl RunConfig {
    /// Read and fully validate a TOML config file.
    pub fn from_toml_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Parse and fully validate TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Every semantic constraint, with the failing field named.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(invalid("T", format!("must be positive, got {}", self.t_final)));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(invalid("h", format!("must be positive, got {}", self.h)));
        }
        if self.h > self.t_final {
            return Err(invalid(
                "h",
                format!("step {} exceeds the horizon T = {}", self.h, self.t_final),
            ));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        if let Some(floor) = self.sep_floor {
            if !(floor > 0.0) || !floor.is_finite() {
                return Err(invalid("sep_floor", format!("must be positive, got {floor}")));
            }
        }
        match (&self.snapshot_every, &self.snapshot_times) {
            (None, None) => {
                return Err(invalid(
                    "snapshot_every",
                    "one of snapshot_every / snapshot_times is required",
                ));
            }
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "snapshot_every",
                    "snapshot_every and snapshot_times are mutually exclusive",
                ));
            }
            (Some(0), None) => {
                return Err(invalid("snapshot_every", "must be ≥ 1"));
            }
            _ => {}
        }
        self.snapshot_plan()?; // validates snapshot_times against T, h
        self.domain.validate()?;
        self.initial.validate()?;
        Ok(())
    }

    /// Number of RK4 steps the run will take.
    pub fn steps(&self) -> usize {
        (self.t_final / self.h).round().max(1.0) as usize
    }

    /// Resolve the snapshot request into a recording cadence plus the set
    /// of step indices to persist.
    ///
    /// With `snapshot_every = k` the persisted set is `{0, k, 2k, …,
    /// steps}`. With `snapshot_times` each time must land on a step
    /// (within 1e-6·h); the recording cadence becomes the gcd of the
    /// requested step indices so the core records a superset, and exactly
    /// the requested indices (plus 0 and nothing else) are persisted.
    pub fn snapshot_plan(&self) -> Result<SnapshotPlan, ConfigError> {
        let steps = self.steps();
        if let Some(every) = self.snapshot_every {
            let mut persist: BTreeSet<usize> = (0..=steps).step_by(every.max(1)).collect();
            persist.insert(steps);
            return Ok(SnapshotPlan { every, persist });
        }
        let times = self
            .snapshot_times
            .as_ref()
            .expect("validate() guarantees one mode is present");
        if times.is_empty() {
            return Err(invalid("snapshot_times", "must list at least one time"));
        }
        let mut persist = BTreeSet::new();
        persist.insert(0); // the initial state is always an artifact
        let mut gcd_acc: usize = 0;
        for &t in times {
            if !(0.0..=self.t_final + 1e-6 * self.h).contains(&t) {
                return Err(invalid(
                    "snapshot_times",
                    format!("time {t} outside [0, T = {}]", self.t_final),
                ));
            }
            let k = (t / self.h).round();
            if (t - k * self.h).abs() > 1e-6 * self.h {
                return Err(invalid(
                    "snapshot_times",
                    format!("time {t} is not a multiple of h = {} (nearest step {k})", self.h),
                ));
            }
            let k = k as usize;
            persist.insert(k);
            gcd_acc = gcd(gcd_acc, k);
        }
        let every = if gcd_acc == 0 { steps } else { gcd_acc };
        Ok(SnapshotPlan { every, persist })
    }
}

/// Resolved snapshot request: the cadence handed to the integrator and
/// the exact step indices whose states become files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnapshotPlan {
    /// Recording cadence for `sg2d::dynamics::simulate`.
    pub every: usize,
    /// Step indices to persist (always contains 0).
    pub persist: BTreeSet<usize>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl DomainConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        match self {
            Self::Square { a, b } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return Err(invalid("domain.a", format!("square needs a < b, got [{a}, {b}]")));
                }
            }
            Self::Disk { area, segments } => {
                if !(*area > 0.0) || !area.is_finite() {
                    return Err(invalid("domain.area", format!("must be positive, got {area}")));
                }
                if *segments < 3 {
                    return Err(invalid("domain.segments", "a polygon needs ≥ 3 sides"));
                }
            }
            Self::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(invalid("domain.vertices", "a polygon needs ≥ 3 vertices"));
                }
                if vertices.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(invalid("domain.vertices", "coordinates must be finite"));
                }
            }
        }
        Ok(())
    }
}

impl InitialConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        let density_mode = self.density.is_some();
        let explicit_mode = self.seeds.is_some() || self.masses.is_some();
        if density_mode && explicit_mode {
            return Err(invalid(
                "initial",
                "density quantization and explicit seeds/masses are mutually exclusive",
            ));
        }
        if !density_mode && !explicit_mode {
            return Err(invalid(
                "initial",
                "provide either density/n/lloyd_iterations/rng_seed or seeds/masses",
            ));
        }
        if density_mode {
            match self.density.as_deref() {
                Some("uniform") | Some("gaussian") | Some("grid") => {}
                Some(other) => {
                    return Err(invalid(
                        "initial.density",
                        format!("unknown density {other:?} (uniform | gaussian | grid)"),
                    ));
                }
                None => unreachable!("density_mode implies density present"),
            }
            if self.density.as_deref() == Some("gaussian") {
                match self.sigma {
                    Some(s) if s > 0.0 && s.is_finite() => {}
                    Some(s) => {
                        return Err(invalid("initial.sigma", format!("must be positive, got {s}")));
                    }
                    None => return Err(invalid("initial.sigma", "required for gaussian density")),
                }
            }
            if self.density.as_deref() == Some("grid") && self.grid_csv.is_none() {
                return Err(invalid("initial.grid_csv", "required for grid density"));
            }
            match self.n {
                Some(n) if n >= 1 => {}
                Some(_) => return Err(invalid("initial.n", "must be ≥ 1")),
                None => return Err(invalid("initial.n", "required for density quantization")),
            }
            if self.lloyd_iterations.is_none() {
                return Err(invalid(
                    "initial.lloyd_iterations",
                    "required for density quantization",
                ));
            }
            if self.rng_seed.is_none() {
                return Err(invalid("initial.rng_seed", "required for density quantization"));
            }
        } else {
            let seeds = self
                .seeds
                .as_ref()
                .ok_or_else(|| invalid("initial.seeds", "required with explicit masses"))?;
            let masses = self
                .masses
                .as_ref()
                .ok_or_else(|| invalid("initial.masses", "required with explicit seeds"))?;
            if seeds.len() != masses.len() {
                return Err(invalid(
                    "initial.masses",
                    format!("{} masses for {} seeds", masses.len(), seeds.len()),
                ));
            }
            if seeds.is_empty() {
                return Err(invalid("initial.seeds", "must list at least one seed"));
            }
            if seeds.iter().flatten().any(|v| !v.is_finite()) {
                return Err(invalid("initial.seeds", "coordinates must be finite"));
            }
            if masses.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
                return Err(invalid("initial.masses", "every mass must be positive and finite"));
            }
        }
        Ok(())
    }
}
