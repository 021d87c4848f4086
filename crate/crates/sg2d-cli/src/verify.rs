//! Built-in self-checks: fast versions of the oracle comparisons the test
//! suite runs at full size, packaged so an installed binary can vouch for
//! itself (`sg2d verify`).
//!
//! Five checks, ~2 s total:
//!
//! 1. **single-mass rotation** — one seed in a square rotates rigidly
//!    about the centroid; RK4 at the default `h = 0.01` must track the
//!    exact solution to 1e-8 over one time unit. Rerunning with
//!    `--single-mass-h 0.5` exceeds the threshold and must fail: the
//!    check is sharp enough to notice a wrong step size.
//! 2. **two-mass rotation** — the known two-seed solution in the
//!    (256-gon) unit disk, one eighth of a rotation period.
//! 3. **CVT equilibrium** — a converged Lloyd configuration is a fixed
//!    point: the vector field must vanish there.
//! 4. **gradient FD** — the analytic gradient `m − area(w)` against
//!    central differences of the functional value.
//! 5. **Hessian FD** — the analytic graph Laplacian against central
//!    differences of the gradient.
//!
//! FD step `δ = 1e-5`: central-difference truncation `~δ²` and roundoff
//! `~ε/δ` balance near 1e-10, four decades under the loosest threshold
//! used here.

use sg2d::dynamics::{simulate, single_mass_oracle, two_mass_oracle, OracleParams, SimConfig};
use sg2d::quantize::lloyd_quantize;
use sg2d::sdot::{kantorovich_eval, optimal_centroids};
use sg2d::{ConvexPolygon, DensitySpec, DiscreteMeasure, Point2, WeightVector};

/// Central-difference step for both FD checks (see module docs).
const FD_STEP: f64 = 1e-5;

/// Knobs exposed on the command line.
#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// RK4 step for the single-mass check (default 0.01).
    pub single_mass_h: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { single_mass_h: 0.01 }
    }
}

/// One check's outcome: the measured defect against its threshold.
#[derive(Clone, Copy, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.measured < self.threshold
    }
}

/// Run all five checks and collect their results (never panics on a
/// failed check — callers render the table and pick the exit code).
pub fn run_all(options: &VerifyOptions) -> Vec<CheckResult> {
    vec![
        single_mass_check(options.single_mass_h),
        two_mass_check(),
        cvt_equilibrium_check(),
        gradient_fd_check(),
        hessian_fd_check(),
    ]
}

/// Sup-norm error of RK4 against the rigid rotation of one seed about
/// the domain centroid, T = 1.
fn single_mass_check(h: f64) -> CheckResult {
    let domain = ConvexPolygon::square(0.0, 1.0);
    let z0 = Point2::new(0.3, 0.4);
    let measure = DiscreteMeasure::new(vec![z0], vec![1.0]).expect("valid measure");
    let config = SimConfig {
        t_final: 1.0,
        h,
        tol: 1e-3,
        snapshot_every: 1,
        sep_floor: None,
    };
    let trajectory = simulate(&domain, &measure, &config);
    let measured = if trajectory.is_complete() {
        trajectory
            .states
            .iter()
            .map(|s| (s.measure.seeds()[0] - single_mass_oracle(&domain, z0, s.t)).norm())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    CheckResult {
        name: "single-mass rotation vs exact solution",
        measured,
        threshold: 1e-8,
    }
}

/// Max seed error against the two-mass solution over one eighth of its
/// rotation period (unit-area 256-gon disk, equal masses, ℓ = 0.6).
fn two_mass_check() -> CheckResult {
    let domain = ConvexPolygon::regular_polygon(Point2::ZERO, 256, 1.0);
    let z1 = Point2::new(0.3, 0.0);
    let z2 = Point2::new(-0.3, 0.0);
    let m = 0.5;
    let measure = DiscreteMeasure::new(vec![z1, z2], vec![m, 1.0 - m]).expect("valid measure");
    let params = OracleParams::new(m, (z1 - z2).norm()).expect("m = 1/2 is admissible");
    let period = 2.0 * core::f64::consts::PI / params.omega;
    let config = SimConfig {
        t_final: period / 8.0,
        h: 0.02,
        tol: 1e-4,
        snapshot_every: 20,
        sep_floor: None,
    };
    let trajectory = simulate(&domain, &measure, &config);
    let measured = if trajectory.is_complete() {
        trajectory
            .states
            .iter()
            .map(|s| {
                let (o1, o2) = two_mass_oracle(z1, z2, m, s.t).expect("admissible mass");
                (s.measure.seeds()[0] - o1)
                    .norm()
                    .max((s.measure.seeds()[1] - o2).norm())
            })
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    CheckResult {
        name: "two-mass rotation vs exact solution",
        measured,
        threshold: 1e-3,
    }
}

/// The vector field at a converged Lloyd configuration: every seed sits
/// on its centroid, so `max_i |z_i − x_i(z)|` must be tiny.
fn cvt_equilibrium_check() -> CheckResult {
    let domain = ConvexPolygon::square(0.0, 1.0);
    let density = DensitySpec::uniform(domain.clone());
    let measured = match lloyd_quantize(&density, 16, 4000, 11) {
        Ok(measure) => {
            let warm = WeightVector::zeros(measure.n());
            match optimal_centroids(&domain, &measure, &warm, 1e-6) {
                Ok((centroids, _)) => measure
                    .seeds()
                    .iter()
                    .zip(&centroids)
                    .map(|(&z, &x)| (z - x).norm())
                    .fold(0.0, f64::max),
                Err(_) => f64::INFINITY,
            }
        }
        Err(_) => f64::INFINITY,
    };
    CheckResult {
        name: "vector field vanishes at a centroidal configuration",
        measured,
        threshold: 1e-9,
    }
}

/// Fixed irregular eight-seed configuration shared by both FD checks.
/// Masses sum to the unit square's area; the weight vector is small
/// enough that every cell stays nonempty across all FD perturbations.
fn fd_fixture() -> (ConvexPolygon, DiscreteMeasure, WeightVector) {
    let domain = ConvexPolygon::square(0.0, 1.0);
    let seeds = vec![
        Point2::new(0.12, 0.21),
        Point2::new(0.47, 0.13),
        Point2::new(0.83, 0.27),
        Point2::new(0.31, 0.52),
        Point2::new(0.68, 0.58),
        Point2::new(0.15, 0.82),
        Point2::new(0.52, 0.89),
        Point2::new(0.88, 0.74),
    ];
    let masses = vec![0.05, 0.10, 0.20, 0.15, 0.08, 0.12, 0.18, 0.12];
    let measure = DiscreteMeasure::new(seeds, masses).expect("valid measure");
    let w = WeightVector::from(vec![0.01, -0.02, 0.015, 0.0, 0.005, -0.01, 0.02, 0.0]);
    (domain, measure, w)
}

/// `∂g/∂w_i` against `(g(w + δeᵢ) − g(w − δeᵢ)) / 2δ`, relative to the
/// gradient's sup norm.
fn gradient_fd_check() -> CheckResult {
    let (domain, measure, w) = fd_fixture();
    let state = kantorovich_eval(&domain, &measure, &w).expect("evaluates");
    let scale = state.gradient.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    let mut worst = 0.0f64;
    for i in 0..measure.n() {
        let mut wp = w.clone();
        let mut wm = w.clone();
        wp[i] += FD_STEP;
        wm[i] -= FD_STEP;
        let gp = kantorovich_eval(&domain, &measure, &wp).expect("evaluates");
        let gm = kantorovich_eval(&domain, &measure, &wm).expect("evaluates");
        let fd = (gp.g_value - gm.g_value) / (2.0 * FD_STEP);
        worst = worst.max((fd - state.gradient[i]).abs());
    }
    CheckResult {
        name: "gradient matches finite differences",
        measured: worst / scale,
        threshold: 1e-6,
    }
}

/// Hessian rows against central differences of the gradient. The
/// analytic Hessian is `−L` (L the assembled graph Laplacian), so the
/// defect is `FD + L`, relative to L's largest entry.
fn hessian_fd_check() -> CheckResult {
    let (domain, measure, w) = fd_fixture();
    let n = measure.n();
    let state = kantorovich_eval(&domain, &measure, &w).expect("evaluates");
    let dense_l = state.hessian.to_dense();
    let scale = dense_l.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut wp = w.clone();
        let mut wm = w.clone();
        wp[i] += FD_STEP;
        wm[i] -= FD_STEP;
        let gp = kantorovich_eval(&domain, &measure, &wp).expect("evaluates");
        let gm = kantorovich_eval(&domain, &measure, &wm).expect("evaluates");
        for j in 0..n {
            let fd = (gp.gradient[j] - gm.gradient[j]) / (2.0 * FD_STEP);
            worst = worst.max((fd + dense_l[i * n + j]).abs());
        }
    }
    CheckResult {
        name: "Hessian matches finite differences",
        measured: worst / scale,
        threshold: 1e-4,
    }
}
