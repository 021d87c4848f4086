//! Two-dimensional semi-geostrophic flow in geostrophic coordinates.
//!
//! A discrete measure α = Σ mᵢ δ_{zᵢ} (seeds zᵢ ∈ R², positive masses mᵢ with
//! Σ mᵢ = area(Ω)) evolves under the particle ODE
//!
//! ```text
//! żᵢ = J (zᵢ − xᵢ(z)),        J = (0 −1; 1 0),
//! ```
//!
//! where xᵢ(z) is the centroid of the i-th cell of the *area-constrained*
//! Laguerre tessellation of a convex physical domain Ω: the weights w are
//! chosen so that every cell has area exactly mᵢ, which is a semi-discrete
//! optimal-transport problem solved here by a damped Newton method. The
//! squared Wasserstein distance W₂²(Leb⌞Ω, α) is a conserved quantity of the
//! exact flow and is tracked as the primary diagnostic.
//!
//! # Module map
//!
//! - [`geom2d`] — convex polygon substrate: half-plane clipping and exact
//!   polygon moments (no quadrature anywhere near the solver).
//! - [`laguerre`] — power-diagram construction clipped to Ω, with per-cell
//!   moments and the weighted dual graph (interface length / seed distance).
//! - [`sdot`] — the Kantorovich functional g(w), its gradient and Laplacian
//!   Hessian, and the damped Newton solver for the optimal weights.
//! - [`quantize`] — Lloyd quantization of a density into a discrete measure,
//!   plus the distinct-coordinate perturbation (`well_prepare`).
//! - [`dynamics`] — the vector field, RK4 time stepping with warm-started
//!   weights, conservation diagnostics, and explicit-solution oracles
//!   (single mass, two masses in a disk, centroidal equilibria).
//! - [`tolerances`] — every numeric threshold used by the crate, centralized
//!   and documented; no ad-hoc magic numbers in the algorithms.
//!
//! # no_std
//!
//! The crate is `no_std`-compatible (allocation required): disable default
//! features and enable `libm` for pure-Rust float math. File formats, the
//! CLI, and rendering live in the companion `sg2d-cli` crate.
//!
//! # Conventions
//!
//! - All arithmetic is `f64`. Lengths are nondimensional; Ω is typically
//!   O(1) in extent and tolerances scale with its diameter or area.
//! - Polygons are counter-clockwise vertex loops; the empty polygon is a
//!   legal value (empty Laguerre cells arise during Newton line searches).
//! - Determinism: fixed summation order everywhere; the optional `parallel`
//!   feature changes scheduling, never results.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!(
    "sg2d needs float math: enable the `std` feature (default) or the `libm` feature"
);

extern crate alloc;

pub mod dynamics;
pub mod geom2d;
pub mod laguerre;
pub mod quantize;
pub mod sdot;
pub mod tolerances;

pub use dynamics::{SimConfig, SimulationState, Trajectory};
pub use geom2d::{ConvexPolygon, HalfPlane, Point2};
pub use laguerre::{DiscreteMeasure, LaguerreDiagram, WeightVector};
pub use quantize::DensitySpec;
