//! `sg2d` — semi-geostrophic flow simulator on the command line.
//!
//! Three subcommands:
//!
//! - `sg2d run <config.toml>` — integrate a configured flow and write
//!   the artifact directory (seed CSVs, SVG snapshots, diagnostics
//!   series, run manifest). Passing a `run_manifest.json` instead of a
//!   TOML file replays that run. Exit code 1 when the config is invalid
//!   (nothing is written) or the run aborts early (partial artifacts and
//!   the manifest record the abort).
//! - `sg2d verify` — fast self-checks against the built-in exact
//!   solutions; nonzero exit if any check fails.
//! - `sg2d render <seeds.csv> <out.svg>` — re-render one snapshot; the
//!   domain comes from `--config` or the `run_manifest.json` beside the
//!   CSV.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use sg2d_cli::config::RunConfig;
use sg2d_cli::formats::{read_manifest, read_seeds_csv};
use sg2d_cli::run::{build_domain, execute, prepare, resolve_output_dir};
use sg2d_cli::svg::{render_svg, RenderStyle};
use sg2d_cli::verify::{run_all, VerifyOptions};

#[derive(Parser)]
#[command(
    name = "sg2d",
    version,
    about = "Semi-geostrophic flow in geostrophic coordinates (semi-discrete optimal transport)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation from a TOML config (or replay a run_manifest.json)
    Run {
        /// Path to the run configuration (.toml) or a manifest (.json)
        config: PathBuf,
        /// Artifact directory override (beats $SG2D_OUTPUT_DIR and the config)
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Self-check the engine against built-in exact solutions
    Verify {
        /// RK4 step for the single-mass rotation check
        #[arg(long, default_value_t = VerifyOptions::default().single_mass_h)]
        single_mass_h: f64,
    },
    /// Render one seeds CSV as an SVG tessellation snapshot
    Render {
        /// Snapshot to draw (seeds_####.csv)
        seeds: PathBuf,
        /// Output SVG path
        out: PathBuf,
        /// Config supplying the domain (default: run_manifest.json beside the CSV)
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { config, output_dir } => run_command(&config, output_dir.as_deref()),
        Command::Verify { single_mass_h } => Ok(verify_command(single_mass_h)),
        Command::Render { seeds, out, config } => {
            render_command(&seeds, &out, config.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// TOML config, or the config echoed in a run manifest (replay).
fn load_config(path: &Path) -> anyhow::Result<RunConfig> {
    let is_manifest = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let config = if is_manifest {
        read_manifest(path)
            .with_context(|| format!("reading manifest {}", path.display()))?
            .config
    } else {
        RunConfig::from_toml_path(path)?
    };
    Ok(config)
}

fn run_command(config_path: &Path, output_dir_flag: Option<&Path>) -> anyhow::Result<ExitCode> {
    let config = load_config(config_path)?;
    let output_dir = resolve_output_dir(output_dir_flag, &config);
    // All validation happens before any file is created: a rejected
    // config exits here with the output directory untouched.
    let prepared = prepare(config)?;
    let artifacts = execute(&prepared, &output_dir)?;
    println!(
        "{} snapshots, {} steps -> {}",
        artifacts.seeds_files.len(),
        prepared.config.steps(),
        artifacts.output_dir.display()
    );
    if artifacts.completed {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "run aborted: {} (partial artifacts and manifest retained)",
            artifacts.failure.as_deref().unwrap_or("unknown failure")
        );
        Ok(ExitCode::FAILURE)
    }
}

fn verify_command(single_mass_h: f64) -> ExitCode {
    let results = run_all(&VerifyOptions { single_mass_h });
    let mut all_passed = true;
    for check in &results {
        println!(
            "{}  {:<52} measured {:>12.3e}   threshold {:>8.1e}",
            if check.passed() { "PASS" } else { "FAIL" },
            check.name,
            check.measured,
            check.threshold
        );
        all_passed &= check.passed();
    }
    if all_passed {
        println!("all {} checks passed", results.len());
        ExitCode::SUCCESS
    } else {
        eprintln!("verification FAILED");
        ExitCode::FAILURE
    }
}

/// Draw the tessellation stored in a seeds CSV (positions, masses, and
/// solved weights are taken verbatim — no re-solve).
fn render_command(seeds: &Path, out: &Path, config: Option<&Path>) -> anyhow::Result<()> {
    let (measure, weights) =
        read_seeds_csv(seeds).with_context(|| format!("reading {}", seeds.display()))?;
    let domain_config = match config {
        Some(path) => load_config(path)?.domain,
        None => {
            let manifest = seeds
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .unwrap_or(Path::new("."))
                .join("run_manifest.json");
            read_manifest(&manifest)
                .with_context(|| {
                    format!(
                        "no --config given and no manifest at {}",
                        manifest.display()
                    )
                })?
                .config
                .domain
        }
    };
    let domain = build_domain(&domain_config)?;
    let diagram = sg2d::laguerre::build_diagram(&domain, &measure, &weights)
        .context("building the stored tessellation")?;
    let svg = render_svg(&domain, &diagram, &measure, &RenderStyle::default());
    std::fs::write(out, svg.as_bytes()).with_context(|| format!("writing {}", out.display()))?;
    println!("rendered {} -> {}", seeds.display(), out.display());
    Ok(())
}
