//! Run orchestration: configuration → initial measure → trajectory →
//! artifact directory.
//!
//! The pipeline is split into [`prepare`] (pure: validates the config,
//! builds Ω and the initial measure, resolves the snapshot plan — touches
//! no files beyond reading an optional grid CSV) and [`execute`] (creates
//! the output directory and writes artifacts). A config that fails any
//! check is rejected in `prepare`, so a bad config produces **zero**
//! partial outputs.
//!
//! `execute` always flushes what it has: if the integrator aborts mid-run
//! (separation loss, solver failure), the snapshots and diagnostics up to
//! the abort are still written and `run_manifest.json` records
//! `completed = false` with the reason. Callers decide the exit code from
//! [`RunArtifacts::completed`].

use std::path::{Path, PathBuf};

use sg2d::dynamics::{simulate, SimConfig, Trajectory};
use sg2d::laguerre::build_diagram;
use sg2d::quantize::lloyd_quantize;
use sg2d::{ConvexPolygon, DensitySpec, DiscreteMeasure, Point2};

use crate::config::{ConfigError, DomainConfig, InitialConfig, RunConfig, SnapshotPlan};
use crate::formats::{
    self, read_grid_csv, write_diagnostics_csv, write_manifest, write_seeds_csv, FormatError,
    RunManifest,
};
use crate::svg::{render_svg, RenderStyle};

/// Environment variable overriding the config's `output_dir` (itself
/// overridden by an explicit `--output-dir` flag).
pub const OUTPUT_DIR_ENV: &str = "SG2D_OUTPUT_DIR";

/// Relative slack on `Σ mᵢ − area(Ω)` for explicit mass lists. Inside the
/// budget the defect is treated as decimal-serialization noise and
/// rescaled away (unless it is already at the f64 rounding floor, where
/// rescaling would only churn low bits); beyond it the masses are
/// presumed wrong and the config is rejected (silently rescaling a 1%
/// defect would simulate a different measure than the one the user wrote
/// down).
pub const MASS_BUDGET_REL: f64 = 1e-6;

/// Everything that can stop a run.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("initial measure: {0}")]
    Measure(#[from] sg2d::laguerre::MeasureError),
    #[error("domain: {0}")]
    Geometry(#[from] sg2d::geom2d::GeomError),
    #[error("density construction: {0}")]
    Density(#[from] sg2d::quantize::DensityError),
    #[error("quantization: {0}")]
    Quantize(#[from] sg2d::quantize::QuantizeError),
    #[error("initialization: {0}")]
    Dynamics(#[from] sg2d::dynamics::DynamicsError),
}

/// A validated run: domain and initial measure built, snapshot plan
/// resolved, nothing written yet.
#[derive(Clone, Debug)]
pub struct PreparedRun {
    pub config: RunConfig,
    pub domain: ConvexPolygon,
    pub initial: DiscreteMeasure,
    pub plan: SnapshotPlan,
}

/// What `execute` wrote, and whether the run reached `T`.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub output_dir: PathBuf,
    /// `seeds_{k:04}.csv` paths, ordinal order.
    pub seeds_files: Vec<PathBuf>,
    /// `snapshot_{k:04}.svg` paths, ordinal order.
    pub snapshot_files: Vec<PathBuf>,
    pub diagnostics_file: PathBuf,
    pub manifest_file: PathBuf,
    /// Step index of each persisted ordinal.
    pub snapshot_steps: Vec<usize>,
    pub completed: bool,
    /// Abort reason when `completed` is false.
    pub failure: Option<String>,
}

/// Build Ω from its config description.
pub fn build_domain(spec: &DomainConfig) -> Result<ConvexPolygon, RunError> {
    match spec {
        DomainConfig::Square { a, b } => Ok(ConvexPolygon::square(*a, *b)),
        DomainConfig::Disk { area, segments } => {
            Ok(ConvexPolygon::regular_polygon(Point2::ZERO, *segments, *area))
        }
        DomainConfig::Polygon { vertices } => {
            let points = vertices.iter().map(|&[x, y]| Point2::new(x, y)).collect();
            Ok(ConvexPolygon::new(points)?)
        }
    }
}

/// Build the initial measure: quantize a density or take explicit lists.
///
/// Explicit masses must total `area(Ω)` within [`MASS_BUDGET_REL`]
/// relative; sub-budget defects are rescaled away, larger ones are
/// configuration errors.
pub fn build_initial(
    domain: &ConvexPolygon,
    spec: &InitialConfig,
) -> Result<DiscreteMeasure, RunError> {
    if let Some(density_name) = spec.density.as_deref() {
        let density = match density_name {
            "uniform" => DensitySpec::uniform(domain.clone()),
            "gaussian" => {
                let c = spec.center.unwrap_or([0.0, 0.0]);
                let sigma = spec.sigma.expect("validate() requires sigma for gaussian");
                DensitySpec::gaussian(domain.clone(), Point2::new(c[0], c[1]), sigma)?
            }
            "grid" => {
                let path = spec.grid_csv.as_ref().expect("validate() requires grid_csv");
                DensitySpec::from_grid(domain.clone(), read_grid_csv(path)?)
            }
            other => unreachable!("validate() rejects density {other:?}"),
        };
        let n = spec.n.expect("validate() requires n");
        let iterations = spec.lloyd_iterations.expect("validate() requires lloyd_iterations");
        let rng_seed = spec.rng_seed.expect("validate() requires rng_seed");
        return Ok(lloyd_quantize(&density, n, iterations, rng_seed)?);
    }

    let seeds: Vec<Point2> = spec
        .seeds
        .as_ref()
        .expect("validate() requires seeds in explicit mode")
        .iter()
        .map(|&[x, y]| Point2::new(x, y))
        .collect();
    let masses = spec
        .masses
        .as_ref()
        .expect("validate() requires masses in explicit mode")
        .clone();
    let mut measure = DiscreteMeasure::new(seeds, masses)?;
    let target = domain.area();
    let defect = (measure.total_mass() - target).abs();
    if defect > MASS_BUDGET_REL * target {
        return Err(ConfigError::Invalid {
            field: "initial.masses",
            message: format!(
                "Σ masses = {} but area(Ω) = {} (relative defect {:.3e} exceeds {MASS_BUDGET_REL:.0e})",
                measure.total_mass(),
                target,
                defect / target
            ),
        }
        .into());
    }
    // Rescale decimal-serialization noise away, but leave a defect at the
    // f64 rounding floor untouched: multiplying by a ratio within an ulp
    // of 1 would flip low mass bits and break the bit-exact round trip of
    // re-ingested seed CSVs, while the solver cannot feel a 1e-12 defect
    // (it perturbs cell areas by under 1e-12·area(Ω)/N).
    if defect > 1e-12 * target {
        measure.rescale_to(target);
    }
    Ok(measure)
}

/// Validate a config end to end and build everything the integrator
/// needs. Reads no files except an `initial.grid_csv`, writes none.
pub fn prepare(config: RunConfig) -> Result<PreparedRun, RunError> {
    config.validate()?;
    let plan = config.snapshot_plan()?;
    let domain = build_domain(&config.domain)?;
    let initial = build_initial(&domain, &config.initial)?;
    Ok(PreparedRun {
        config,
        domain,
        initial,
        plan,
    })
}

/// Resolve the artifact directory: `--output-dir` flag, then the
/// [`OUTPUT_DIR_ENV`] environment variable, then the config.
pub fn resolve_output_dir(flag: Option<&Path>, config: &RunConfig) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    config.output_dir.clone()
}

/// Integrate and write the artifact directory.
///
/// Artifacts: `seeds_{k:04}.csv` + `snapshot_{k:04}.svg` for each
/// persisted step (ordinal k counts persisted snapshots from 0),
/// `diagnostics.csv`, and `run_manifest.json` echoing the config with
/// `output_dir` rewritten to the resolved location. On an integrator
/// abort everything reached so far is still written and the manifest
/// records the failure; IO errors abort immediately.
pub fn execute(prepared: &PreparedRun, output_dir: &Path) -> Result<RunArtifacts, RunError> {
    std::fs::create_dir_all(output_dir).map_err(|source| FormatError::Io {
        path: output_dir.to_path_buf(),
        source,
    })?;

    let sim_config = SimConfig {
        t_final: prepared.config.t_final,
        h: prepared.config.h,
        tol: prepared.config.tol,
        snapshot_every: prepared.plan.every.max(1),
        sep_floor: prepared.config.sep_floor,
    };
    let trajectory = simulate(&prepared.domain, &prepared.initial, &sim_config);

    write_trajectory_artifacts(prepared, &trajectory, output_dir)
}

/// Artifact-writing backend of [`execute`], separated so tests can feed a
/// prebuilt trajectory.
fn write_trajectory_artifacts(
    prepared: &PreparedRun,
    trajectory: &Trajectory,
    output_dir: &Path,
) -> Result<RunArtifacts, RunError> {
    let h = prepared.config.h;
    let style = RenderStyle::default();

    let mut seeds_files = Vec::new();
    let mut snapshot_files = Vec::new();
    let mut snapshot_steps = Vec::new();
    for state in &trajectory.states {
        // Recorded times are exact step multiples (t = i·h by construction),
        // so rounding recovers the step index unambiguously.
        let step = (state.t / h).round() as usize;
        if !prepared.plan.persist.contains(&step) {
            continue;
        }
        let ordinal = snapshot_steps.len();

        let seeds_path = output_dir.join(formats::seeds_filename(ordinal));
        write_seeds_csv(&seeds_path, &state.measure, &state.warm_weights)?;
        seeds_files.push(seeds_path);

        // warm_weights are the converged weights for this state, so the
        // rebuild is a single diagram construction, not a solve.
        let diagram = build_diagram(&prepared.domain, &state.measure, &state.warm_weights)
            .map_err(sg2d::sdot::SdotError::from)
            .map_err(sg2d::dynamics::DynamicsError::from)?;
        let svg = render_svg(&prepared.domain, &diagram, &state.measure, &style);
        let svg_path = output_dir.join(formats::snapshot_filename(ordinal));
        std::fs::write(&svg_path, svg.as_bytes()).map_err(|source| FormatError::Io {
            path: svg_path.clone(),
            source,
        })?;
        snapshot_files.push(svg_path);

        snapshot_steps.push(step);
    }

    let diagnostics_file = output_dir.join("diagnostics.csv");
    write_diagnostics_csv(&diagnostics_file, &trajectory.diagnostics_series)?;

    let mut config_echo = prepared.config.clone();
    config_echo.output_dir = output_dir.to_path_buf();
    let failure = trajectory.failure.as_ref().map(|e| e.to_string());
    let manifest = RunManifest {
        format_version: 1,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config_echo,
        steps: prepared.config.steps(),
        snapshot_steps: snapshot_steps.clone(),
        completed: trajectory.is_complete(),
        failure: failure.clone(),
    };
    let manifest_file = output_dir.join("run_manifest.json");
    write_manifest(&manifest_file, &manifest)?;

    Ok(RunArtifacts {
        output_dir: output_dir.to_path_buf(),
        seeds_files,
        snapshot_files,
        diagnostics_file,
        manifest_file,
        snapshot_steps,
        completed: trajectory.is_complete(),
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_seed_config(dir: &Path) -> RunConfig {
        RunConfig {
            t_final: 0.2,
            h: 0.1,
            tol: 1e-3,
            snapshot_every: Some(1),
            snapshot_times: None,
            sep_floor: None,
            output_dir: dir.to_path_buf(),
            domain: DomainConfig::Square { a: 0.0, b: 1.0 },
            initial: InitialConfig {
                seeds: Some(vec![[0.3, 0.4], [0.7, 0.6]]),
                masses: Some(vec![0.5, 0.5]),
                ..InitialConfig::default()
            },
        }
    }

    #[test]
    fn prepare_builds_domain_and_measure() {
        let dir = tempfile::tempdir().expect("tempdir");
        let prepared = prepare(two_seed_config(dir.path())).expect("valid");
        assert_eq!(prepared.initial.n(), 2);
        assert!((prepared.domain.area() - 1.0).abs() < 1e-15);
        assert_eq!(
            prepared.plan.persist.iter().copied().collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn explicit_masses_with_large_defect_are_rejected() {
        let dir = tempfile::tempdir().expect("tempdir");
        let mut config = two_seed_config(dir.path());
        config.initial.masses = Some(vec![0.5, 0.6]); // Σ = 1.1 ≠ area 1
        let err = prepare(config).expect_err("must fail");
        assert!(
            err.to_string().contains("initial.masses"),
            "wrong error: {err}"
        );
    }

    #[test]
    fn explicit_masses_with_serialization_noise_are_rescaled_exactly() {
        let dir = tempfile::tempdir().expect("tempdir");
        let mut config = two_seed_config(dir.path());
        config.initial.masses = Some(vec![0.5 + 1e-8, 0.5]);
        let prepared = prepare(config).expect("inside the 1e-6 budget");
        let total: f64 = prepared.initial.masses().iter().sum();
        assert_eq!(total, 1.0, "rescale must hit area(Ω) exactly");
    }

    #[test]
    fn execute_writes_every_artifact() {
        let dir = tempfile::tempdir().expect("tempdir");
        let out = dir.path().join("artifacts");
        let prepared = prepare(two_seed_config(dir.path())).expect("valid");
        let artifacts = execute(&prepared, &out).expect("runs");
        assert!(artifacts.completed, "failure: {:?}", artifacts.failure);
        // Steps 0, 1, 2 persisted (cadence 1).
        assert_eq!(artifacts.snapshot_steps, vec![0, 1, 2]);
        for path in artifacts
            .seeds_files
            .iter()
            .chain(&artifacts.snapshot_files)
            .chain([&artifacts.diagnostics_file, &artifacts.manifest_file])
        {
            assert!(path.is_file(), "missing artifact {}", path.display());
        }
        let manifest =
            formats::read_manifest(&artifacts.manifest_file).expect("manifest parses");
        assert_eq!(manifest.steps, 2);
        assert_eq!(manifest.snapshot_steps, vec![0, 1, 2]);
        assert!(manifest.completed);
        assert_eq!(manifest.config.output_dir, out);
        // Diagnostics: t = 0 plus one row per accepted step.
        let text = std::fs::read_to_string(&artifacts.diagnostics_file).expect("reads");
        assert_eq!(text.lines().count(), 1 + 3, "header + 3 rows");
    }

    #[test]
    fn disk_domain_uses_a_regular_polygon_of_requested_area() {
        let domain = build_domain(&DomainConfig::Disk {
            area: 2.5,
            segments: 64,
        })
        .expect("builds");
        assert_eq!(domain.vertices().len(), 64);
        assert!((domain.area() - 2.5).abs() < 1e-12 * 2.5);
    }

    #[test]
    fn snapshot_times_persist_exactly_the_requested_steps() {
        let dir = tempfile::tempdir().expect("tempdir");
        let out = dir.path().join("times");
        let mut config = two_seed_config(dir.path());
        config.t_final = 0.5;
        config.h = 0.05;
        config.snapshot_every = None;
        config.snapshot_times = Some(vec![0.2, 0.5]);
        let prepared = prepare(config).expect("valid");
        // gcd(4, 10) = 2 is the recording cadence; persisted = {0, 4, 10}.
        assert_eq!(prepared.plan.every, 2);
        let artifacts = execute(&prepared, &out).expect("runs");
        assert_eq!(artifacts.snapshot_steps, vec![0, 4, 10]);
        assert_eq!(artifacts.seeds_files.len(), 3);
        assert_eq!(artifacts.snapshot_files.len(), 3);
    }
}
