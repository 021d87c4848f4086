//! The semi-geostrophic point dynamics in geostrophic coordinates: the
//! vector field `W(z)_i = J(z_i − x_i(z))`, classical RK4 integration
//! with warm-started transport solves, conservation diagnostics, and the
//! closed-form one- and two-mass solutions used as oracles.
//!
//! Here `x_i(z)` is the centroid of seed i's cell in the area-constrained
//! Laguerre tessellation (see [`crate::sdot::optimal_centroids`]) and `J`
//! is the 2-D rotation `(x, y) ↦ (−y, x)`. Because `J` is skew-symmetric,
//! `Σ_i m_i (z_i − x_i)·W_i = 0` pointwise, which is exactly the
//! mechanism that conserves the transport cost (and hence the energy)
//! along exact trajectories; the integrator's measured drift is the sum
//! of the RK4 truncation error, `O(h⁴)` per unit time, and the solver's
//! area tolerance.
//!
//! Weights chain through everything: each RK4 stage warm-starts the
//! transport solve from the previous stage's solution, and the accepted
//! state stores its solved weights for the next step. After the first
//! step a well-resolved flow typically converges in zero or one Newton
//! iteration per stage.
//!
//! The dynamics is undefined at seed collisions (the field is
//! discontinuous there), so every field evaluation enforces a pairwise
//! separation floor and aborts with [`DynamicsError::SeparationLoss`]
//! rather than regularizing. Seeds are free to leave Ω; no clamping is
//! applied.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::geom2d::{ConvexPolygon, Point2};
use crate::laguerre::{build_diagram, min_seed_separation, DiscreteMeasure, WeightVector};
use crate::sdot::{optimal_centroids, solve_weights, transport_cost, SdotError};
use crate::tolerances::DEFAULT_SEP_FLOOR_REL;

/// The 2-D rotation matrix `J = ((0, −1), (1, 0))`: skew-symmetric,
/// `J² = −I`, and `|Jv| = |v|`. Applying it to `z_i − x_i` turns the
/// centroid displacement into the geostrophic velocity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RotationJ;

impl RotationJ {
    /// `J v = (−v_y, v_x)`.
    #[inline]
    pub fn apply(v: Point2) -> Point2 {
        Point2::new(-v.y, v.x)
    }

    /// `e^{θJ} v` — counterclockwise rotation of `v` by angle `θ`.
    #[inline]
    pub fn exp_apply(theta: f64, v: Point2) -> Point2 {
        let (s, c) = theta.sin_cos();
        Point2::new(c * v.x - s * v.y, s * v.x + c * v.y)
    }
}

/// Conserved-quantity snapshot of one configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    /// Squared 2-Wasserstein distance between Lebesgue on Ω and the
    /// discrete measure (`Σ_i ∫_{C_i} |x − z_i|²`); conserved by the flow.
    pub transport_cost: f64,
    /// The discrete geostrophic energy, `½ · transport_cost` in 2-D.
    pub energy: f64,
    /// Smallest pairwise seed distance (`+∞` for a single seed).
    pub min_separation: f64,
    /// ℓ∞ mass defect `max_i |area(C_i) − m_i|` of the converged diagram.
    pub max_area_error: f64,
}

/// One time slice of a simulation: the measure at time `t`, the solved
/// weights (gauge-fixed, `w[N−1] = 0`) ready to warm-start the next
/// field evaluation, and the diagnostics of this configuration.
#[derive(Clone, Debug)]
pub struct SimulationState {
    pub t: f64,
    pub measure: DiscreteMeasure,
    pub warm_weights: WeightVector,
    pub diagnostics: Diagnostics,
}

impl SimulationState {
    /// The state at `t = 0`: solves the transport problem cold (weights
    /// all zero) and records diagnostics.
    ///
    /// # Errors
    /// [`DynamicsError::SeparationLoss`] if the seeds already violate the
    /// separation floor; otherwise propagated solver errors.
    pub fn initialize(
        domain: &ConvexPolygon,
        measure: DiscreteMeasure,
        params: &FieldParams,
    ) -> Result<Self, DynamicsError> {
        check_separation(domain, measure.seeds(), params)?;
        let cold = WeightVector::zeros(measure.n());
        let (diagnostics, warm_weights) =
            conserved_diagnostics(domain, &measure, &cold, params.tol)?;
        Ok(Self {
            t: 0.0,
            measure,
            warm_weights,
            diagnostics,
        })
    }
}

/// Knobs shared by every vector-field evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldParams {
    /// Relative mass tolerance handed to the transport solver
    /// (`solve_weights` stops at ℓ∞ area error < tol · min mass).
    pub tol: f64,
    /// Hard floor on pairwise seed separation; `None` selects the default
    /// [`DEFAULT_SEP_FLOOR_REL`] · diameter(Ω).
    pub sep_floor: Option<f64>,
}

impl FieldParams {
    /// Parameters with the default separation floor.
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            sep_floor: None,
        }
    }

    fn floor(&self, domain: &ConvexPolygon) -> f64 {
        self.sep_floor
            .unwrap_or(DEFAULT_SEP_FLOOR_REL * domain.diameter())
    }
}

/// Full run protocol: time horizon, step size, solver tolerance,
/// snapshot cadence, and the optional separation-floor override. Echoed
/// verbatim into the [`Trajectory`] it produces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    /// Final time `T`; the run takes `round(T/h)` steps of size `h`.
    pub t_final: f64,
    /// Fixed RK4 step size.
    pub h: f64,
    /// Transport-solver tolerance (relative to the smallest mass).
    pub tol: f64,
    /// Record every k-th state (the initial and final states are always
    /// recorded). Must be ≥ 1.
    pub snapshot_every: usize,
    /// Separation floor override; `None` = default (see [`FieldParams`]).
    pub sep_floor: Option<f64>,
}

impl SimConfig {
    fn field_params(&self) -> FieldParams {
        FieldParams {
            tol: self.tol,
            sep_floor: self.sep_floor,
        }
    }
}

/// A completed (or aborted) run: snapshot states, the per-step
/// diagnostics series, the config that produced it, and the error that
/// stopped it early, if any.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Recorded states: `t = 0`, every `snapshot_every`-th step, the
    /// final step, and — on abort — the last state reached. Times are
    /// strictly increasing and masses are identical across states (the
    /// flow transports seeds, never mass).
    pub states: Vec<SimulationState>,
    /// `(t, diagnostics)` at `t = 0` and after every accepted step.
    pub diagnostics_series: Vec<(f64, Diagnostics)>,
    /// The exact configuration that produced this trajectory.
    pub config: SimConfig,
    /// `None` when the run reached `t_final`; otherwise the error that
    /// aborted it (the trajectory up to that point remains valid).
    pub failure: Option<DynamicsError>,
}

impl Trajectory {
    /// Did the run reach `t_final`?
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// Errors of the dynamics layer.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    /// Two seeds came closer than the separation floor. The field is
    /// discontinuous at collisions, so the engine refuses to evaluate it
    /// there instead of fabricating a value.
    #[error("seed separation {min_separation:.3e} fell below the floor {floor:.3e}")]
    SeparationLoss { min_separation: f64, floor: f64 },
    /// The two-mass oracle needs `m ∈ (0, ½]` (the smaller mass first).
    #[error("two-mass oracle mass m = {m} outside (0, 0.5]")]
    DegenerateMass { m: f64 },
    /// The transport solve (or the diagram build inside it) failed.
    #[error(transparent)]
    Solver(#[from] SdotError),
}

fn check_separation(
    domain: &ConvexPolygon,
    seeds: &[Point2],
    params: &FieldParams,
) -> Result<(), DynamicsError> {
    let floor = params.floor(domain);
    let min_separation = min_seed_separation(seeds);
    if min_separation < floor {
        return Err(DynamicsError::SeparationLoss {
            min_separation,
            floor,
        });
    }
    Ok(())
}

/// The SG vector field: `W(z)_i = J(z_i − x_i(z))` with `x(z)` the
/// optimal-cell centroids. Returns the velocities together with the
/// solved weights so the caller can warm-start the next evaluation.
///
/// A centroidal configuration (`x_i = z_i`) is an equilibrium: all
/// velocities vanish.
///
/// # Errors
/// [`DynamicsError::SeparationLoss`] below the separation floor;
/// otherwise propagated solver errors.
pub fn vector_field(
    domain: &ConvexPolygon,
    measure: &DiscreteMeasure,
    warm: &WeightVector,
    params: &FieldParams,
) -> Result<(Vec<Point2>, WeightVector), DynamicsError> {
    check_separation(domain, measure.seeds(), params)?;
    let (centroids, weights) = optimal_centroids(domain, measure, warm, params.tol)?;
    let velocities = measure
        .seeds()
        .iter()
        .zip(&centroids)
        .map(|(&z, &x)| RotationJ::apply(z - x))
        .collect();
    Ok((velocities, weights))
}

/// Solve the transport problem (warm-started) and report the conserved
/// quantities of the converged configuration: transport cost, energy,
/// minimum seed separation, and the realized ℓ∞ area defect. The solved
/// weights come along for warm-start chaining.
///
/// # Errors
/// Propagated solver errors (no separation floor is applied here — the
/// record is computable for any solvable configuration).
pub fn conserved_diagnostics(
    domain: &ConvexPolygon,
    measure: &DiscreteMeasure,
    warm: &WeightVector,
    tol: f64,
) -> Result<(Diagnostics, WeightVector), DynamicsError> {
    let (weights, _) = solve_weights(domain, measure, warm, tol)?;
    let diagram = build_diagram(domain, measure, &weights).map_err(SdotError::from)?;
    let cost = transport_cost(&diagram, measure);
    let max_area_error = diagram
        .areas()
        .iter()
        .zip(measure.masses())
        .map(|(a, m)| (a - m).abs())
        .fold(0.0_f64, f64::max);
    let diagnostics = Diagnostics {
        transport_cost: cost,
        energy: 0.5 * cost,
        min_separation: min_seed_separation(measure.seeds()),
        max_area_error,
    };
    Ok((diagnostics, weights))
}

/// One classical four-stage RK4 step of `ż = W(z)`.
///
/// Masses are untouched; each stage warm-starts its transport solve from
/// the previous stage's weights, and the accepted state's diagnostics are
/// recomputed by a final warm-started solve whose weights the new state
/// carries. The step is atomic: on error the input state is left exactly
/// as it was (nothing is mutated) and the error is returned instead.
///
/// The accepted configuration is held to the same separation floor as
/// the stage evaluations, so a step that lands inside the floor fails
/// here rather than poisoning the next step.
///
/// # Panics
/// If `h ≤ 0`.
pub fn rk4_step(
    domain: &ConvexPolygon,
    state: &SimulationState,
    h: f64,
    params: &FieldParams,
) -> Result<SimulationState, DynamicsError> {
    assert!(h > 0.0, "rk4_step needs h > 0, got {h}");
    let z0 = state.measure.seeds();
    let displaced = |dt: f64, v: &[Point2]| -> DiscreteMeasure {
        let seeds: Vec<Point2> = z0.iter().zip(v).map(|(&z, &vi)| z + vi * dt).collect();
        DiscreteMeasure::new(seeds, state.measure.masses().to_vec())
            .expect("RK4 stage seeds stay finite for finite velocities")
    };

    let (k1, w1) = vector_field(domain, &state.measure, &state.warm_weights, params)?;
    let (k2, w2) = vector_field(domain, &displaced(0.5 * h, &k1), &w1, params)?;
    let (k3, w3) = vector_field(domain, &displaced(0.5 * h, &k2), &w2, params)?;
    let (k4, w4) = vector_field(domain, &displaced(h, &k3), &w3, params)?;

    let seeds: Vec<Point2> = (0..z0.len())
        .map(|i| z0[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
        .collect();
    let measure = DiscreteMeasure::new(seeds, state.measure.masses().to_vec())
        .expect("accepted RK4 seeds stay finite");
    check_separation(domain, measure.seeds(), params)?;
    let (diagnostics, warm_weights) = conserved_diagnostics(domain, &measure, &w4, params.tol)?;
    Ok(SimulationState {
        t: state.t + h,
        measure,
        warm_weights,
        diagnostics,
    })
}

/// Fixed-step RK4 integration of `ż = W(z)` from `t = 0` to `t_final`.
///
/// The run takes `round(t_final / h)` (at least 1) steps; times are
/// reckoned as `t = i · h` from the step index so they are bitwise
/// reproducible. The initial state, every `snapshot_every`-th state, and
/// the final state land in [`Trajectory::states`]; diagnostics are
/// recorded at every step. On a solver failure or separation loss the
/// run aborts, flushing the last reached state into the trajectory and
/// tagging it with the error.
///
/// # Panics
/// If `t_final ≤ 0`, `h` is not in `(0, t_final]`, or
/// `snapshot_every == 0`.
pub fn simulate(
    domain: &ConvexPolygon,
    initial: &DiscreteMeasure,
    config: &SimConfig,
) -> Trajectory {
    assert!(
        config.t_final > 0.0,
        "simulate needs t_final > 0, got {}",
        config.t_final
    );
    assert!(
        config.h > 0.0 && config.h <= config.t_final,
        "simulate needs 0 < h ≤ t_final, got h = {}, t_final = {}",
        config.h,
        config.t_final
    );
    assert!(config.snapshot_every >= 1, "snapshot_every must be ≥ 1");

    let params = config.field_params();
    let steps = (config.t_final / config.h).round().max(1.0) as usize;
    let mut trajectory = Trajectory {
        states: Vec::new(),
        diagnostics_series: Vec::new(),
        config: *config,
        failure: None,
    };

    let mut current = match SimulationState::initialize(domain, initial.clone(), &params) {
        Ok(state) => state,
        Err(error) => {
            trajectory.failure = Some(error);
            return trajectory;
        }
    };
    trajectory
        .diagnostics_series
        .push((0.0, current.diagnostics));
    trajectory.states.push(current.clone());
    let mut last_recorded_step = 0usize;

    for i in 1..=steps {
        match rk4_step(domain, &current, config.h, &params) {
            Ok(mut next) => {
                next.t = i as f64 * config.h;
                trajectory.diagnostics_series.push((next.t, next.diagnostics));
                if i % config.snapshot_every == 0 || i == steps {
                    trajectory.states.push(next.clone());
                    last_recorded_step = i;
                }
                current = next;
            }
            Err(error) => {
                if last_recorded_step != i - 1 {
                    trajectory.states.push(current);
                }
                trajectory.failure = Some(error);
                return trajectory;
            }
        }
    }
    trajectory
}

/// Closed-form single-mass solution: one seed orbits the domain centroid
/// at unit angular speed, `z(t) = e^{tJ}(z̄ − x_Ω) + x_Ω`.
pub fn single_mass_oracle(domain: &ConvexPolygon, z0: Point2, t: f64) -> Point2 {
    let center = domain.centroid();
    RotationJ::exp_apply(t, z0 - center) + center
}

/// Radius of the area-1 disk, `R = 1/√π`.
fn disk_radius() -> f64 {
    core::f64::consts::PI.sqrt().recip()
}

/// Distance from the disk center to the centroid of the circular segment
/// of area `m` (unit-area disk). The chord offset `d` solves
/// `R² arccos(d/R) − d√(R² − d²) = m` (bisection, interval width 1e-14 ≪
/// the 1e-12 the oracle needs); the centroid then has the closed form
/// `r = (2/3)(R² − d²)^{3/2} / m`.
fn segment_centroid_distance(m: f64) -> f64 {
    let radius = disk_radius();
    let r_sq = radius * radius;
    let segment_area = |d: f64| {
        let rem = (r_sq - d * d).max(0.0);
        r_sq * (d / radius).acos() - d * rem.sqrt()
    };
    // Area decreases strictly from ½ at d = 0 to 0 at d = R.
    let (mut lo, mut hi) = (0.0_f64, radius);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if segment_area(mid) > m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let d = 0.5 * (lo + hi);
    let rem = (r_sq - d * d).max(0.0);
    (2.0 / 3.0) * rem * rem.sqrt() / m
}

/// Parameters of the two-mass closed-form solution on the unit-area disk
/// centered at the origin.
///
/// With masses `m ≤ ½` at `z₁` and `1 − m` at `z₂`, the optimal cells
/// are the circular segment of area `m` (toward `z₁`) and its
/// complement, so the centroids sit at `x₁ = r·u` and
/// `x₂ = −(m/(1−m))·r·u` along `u = (z₁ − z₂)/|z₁ − z₂|`. The
/// separation `Z = z₁ − z₂` then obeys `Ż = ωJZ` exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleParams {
    /// Distance from the disk center to the area-`m` segment centroid.
    pub r_of_m: f64,
    /// `q = r/(1 − m)`, the conserved seed-frame centroid separation.
    pub q_of_m: f64,
    /// Angular frequency of the separation vector, `ω = 1 − q/|Z̄|`.
    pub omega: f64,
}

impl OracleParams {
    /// Parameters for smaller mass `m` and initial seed separation
    /// `|Z̄| = |z̄₁ − z̄₂|`.
    ///
    /// # Errors
    /// [`DynamicsError::DegenerateMass`] unless `m ∈ (0, ½]`.
    ///
    /// # Panics
    /// If `initial_separation ≤ 0`.
    pub fn new(m: f64, initial_separation: f64) -> Result<Self, DynamicsError> {
        if !(m > 0.0 && m <= 0.5) {
            return Err(DynamicsError::DegenerateMass { m });
        }
        assert!(
            initial_separation > 0.0,
            "oracle needs distinct initial seeds"
        );
        let r_of_m = segment_centroid_distance(m);
        let q_of_m = r_of_m / (1.0 - m);
        Ok(Self {
            r_of_m,
            q_of_m,
            omega: 1.0 - q_of_m / initial_separation,
        })
    }
}

/// Closed-form two-mass trajectories on the unit-area disk centered at
/// the origin: mass `m` starts at `z1_bar`, mass `1 − m` at `z2_bar`,
/// and
///
/// ```text
/// z₁(t) = e^{tJ} z̄₁ − (r/(ω−1)) (e^{ωtJ} − e^{tJ}) ū
/// z₂(t) = e^{tJ} z̄₂ + (m r/((1−m)(ω−1))) (e^{ωtJ} − e^{tJ}) ū
/// ```
///
/// with `ū = (z̄₁ − z̄₂)/|z̄₁ − z̄₂|` and `r, ω` from [`OracleParams`].
/// The separation rotates rigidly, `z₁(t) − z₂(t) = e^{ωtJ} Z̄`, so
/// `|Z(t)| = |Z̄|` for all `t`. Exact rotations, no integration.
///
/// # Errors
/// [`DynamicsError::DegenerateMass`] unless `m ∈ (0, ½]`.
///
/// # Panics
/// If `z1_bar == z2_bar`.
pub fn two_mass_oracle(
    z1_bar: Point2,
    z2_bar: Point2,
    m: f64,
    t: f64,
) -> Result<(Point2, Point2), DynamicsError> {
    let z_bar = z1_bar - z2_bar;
    let ell = z_bar.norm();
    let params = OracleParams::new(m, ell)?;
    let u = z_bar * (1.0 / ell);
    // (e^{ωtJ} − e^{tJ}) ū, shared by both trajectories.
    let swirl = RotationJ::exp_apply(params.omega * t, u) - RotationJ::exp_apply(t, u);
    let c1 = -params.r_of_m / (params.omega - 1.0);
    let c2 = m * params.r_of_m / ((1.0 - m) * (params.omega - 1.0));
    let z1 = RotationJ::exp_apply(t, z1_bar) + swirl * c1;
    let z2 = RotationJ::exp_apply(t, z2_bar) + swirl * c2;
    Ok((z1, z2))
}
