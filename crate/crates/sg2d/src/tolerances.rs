//! Centralized numeric thresholds with their rationale.
//!
//! Every tolerance, floor, and iteration cap used by the engine is defined
//! here and documented with its origin. Geometric tolerances are *relative*:
//! they multiply a problem scale (diameter of Ω, area of Ω) so that a run on
//! a millimetre-sized domain behaves like a run on a unit domain.
//!
//! Three rough bands, in order of tightness:
//!
//! | band | magnitude | used for |
//! |------|-----------|----------|
//! | machine | 1e-14 … 1e-12 | dedup, slivers, exact-identity checks |
//! | assembly | 1e-10 … 1e-9 | sums of many exact pieces (areas, rows) |
//! | method | 1e-8 and up | iterative-solver and runtime guards |

/// Half-plane normals must be unit length within this absolute tolerance.
///
/// Normals come from normalizing seed differences or user input; one
/// division leaves at most a few ulps of error, so 1e-12 is generous while
/// still catching forgotten normalizations.
pub const UNIT_NORMAL_TOL: f64 = 1e-12;

/// Consecutive polygon vertices closer than this fraction of the polygon
/// diameter are merged into one.
///
/// Half-plane clipping produces coincident vertices whenever a cut passes
/// through (or grazes) an existing vertex; merging at 1e-12 · diameter keeps
/// the vertex loop clean without disturbing genuine short edges.
pub const VERTEX_DEDUP_REL: f64 = 1e-12;

/// Convexity slack: consecutive-edge cross products may be as negative as
/// −(this) · scale² and the loop still counts as convex counter-clockwise.
///
/// Cross products of nearly collinear O(scale) edges carry O(ε·scale²)
/// rounding noise; 1e-12 · scale² admits that noise and nothing more.
pub const CONVEXITY_CROSS_REL: f64 = 1e-12;

/// Cells with area below this fraction of area(Ω) are treated as empty.
///
/// A cell this small is floating-point noise from grazing cuts; keeping it
/// would inject meaningless interfaces into the dual graph and near-zero
/// rows into the Hessian.
pub const SLIVER_AREA_REL: f64 = 1e-14;

/// Dual-graph interfaces shorter than this fraction of diameter(Ω) are
/// dropped from the adjacency.
///
/// Grazing contacts contribute Hessian weights of the same magnitude as the
/// rounding error of their neighbours' weights — noise, not structure.
pub const INTERFACE_DROP_REL: f64 = 1e-12;

/// Two seeds closer than this fraction of diameter(Ω) are *coincident*:
/// tessellation refuses to build.
///
/// The vector field has no continuous extension to coincident seeds, and
/// the power bisector of a near-coincident pair is numerically arbitrary.
pub const COINCIDENT_SEEDS_REL: f64 = 1e-12;

/// |Σ mᵢ − area(Ω)| must be below this (absolute, for O(1) domains) for a
/// discrete measure to be well-formed.
///
/// The mass vector is produced either exactly (quantization rescales to the
/// domain area) or by the user; 1e-10 allows honest accumulation over a few
/// thousand summands while rejecting actually-inconsistent data.
pub const MASS_SUM_ABS: f64 = 1e-10;

/// Σ cell areas must equal area(Ω) within this relative tolerance for a
/// finished diagram (partition-of-Ω check).
///
/// Each cell area is exact edge integration; the sum accumulates one
/// rounding per cell, so 1e-9 · area(Ω) holds comfortably to N ~ 10⁴.
pub const PARTITION_AREA_REL: f64 = 1e-9;

/// Hessian rows must sum to zero within this absolute tolerance (weights
/// are O(1) for O(1) domains).
///
/// A Laplacian row is the difference of a sum and its parts; 1e-10 covers
/// the cancellation of a few hundred O(1) edge weights.
pub const HESSIAN_ROW_SUM_ABS: f64 = 1e-10;

/// Default minimum-seed-separation floor, as a fraction of diameter(Ω).
///
/// The dynamics aborts (rather than regularizes) when two seeds approach
/// within this distance: the vector field is discontinuous at collisions,
/// so values computed closer than this are not trustworthy.
pub const DEFAULT_SEP_FLOOR_REL: f64 = 1e-8;

/// Newton iteration cap for the optimal-weight solve.
///
/// Damped Newton on the Kantorovich functional converges globally and, in
/// practice, in under 15 iterations from a cold start at desk scale; 100
/// separates "slow" from "wrong" with a wide margin.
pub const MAX_NEWTON_ITERATIONS: usize = 100;

/// Step-halving cap inside one Newton line search.
///
/// 50 halvings shrink the step by 2⁻⁵⁰ ≈ 9e-16 — below that the step is
/// numerically zero and the line search has genuinely failed.
pub const MAX_BACKTRACKS: usize = 50;

/// Rounds of the weight-inflation ("bump") loop that repairs empty cells
/// in an infeasible Newton start.
///
/// Each round gives every currently-empty cell a neighborhood of one probe
/// point; rounds only interact when cells contend for the same sliver of
/// Ω. Double-digit rounds already mean the configuration is adversarial;
/// 40 is far past anything the dynamics produces.
pub const MAX_FEASIBILITY_ROUNDS: usize = 40;

/// Margin added to a bumped weight, relative to the squared length scale
/// of the configuration.
///
/// The bump equation cancels two O(scale²) power distances; 1e-12 of that
/// scale² dominates the cancellation noise while perturbing the final
/// (solver-determined) weights by a vanishing amount.
pub const BUMP_MARGIN_REL: f64 = 1e-12;

/// Cholesky pivots below this fraction of the largest diagonal entry are
/// treated as zero (matrix numerically semidefinite).
///
/// For a Laplacian with O(1) weights, a pivot at 1e-14 of the diagonal is
/// pure cancellation residue: the corresponding direction is in the kernel
/// to working precision.
pub const CHOLESKY_PIVOT_REL: f64 = 1e-14;

/// Reduced Newton systems up to this size are solved by dense Cholesky;
/// larger ones by Jacobi-preconditioned conjugate gradients.
///
/// At N = 500 the dense factorization is ~2·10⁷ flops — negligible — and
/// exact; beyond that the O(N²) densification starts to dominate the sparse
/// O(N) assembly, and CG on the (well-conditioned) Laplacian wins.
pub const DENSE_SOLVE_MAX: usize = 500;

/// Relative residual target for the conjugate-gradient linear solve.
///
/// The Newton direction only needs to be accurate to well below the damping
/// granularity; 1e-12 keeps the linear-solve error invisible next to the
/// floating-point noise of the area computations themselves.
pub const CG_REL_TOL: f64 = 1e-12;

/// CG iteration cap, as a multiple of the system size.
///
/// Exact termination is ≤ n iterations in exact arithmetic; 4n absorbs
/// rounding. Hitting the cap means the matrix is effectively singular.
pub const CG_MAX_ITER_FACTOR: usize = 4;

/// Axis gaps below this fraction of the axis coordinate scale count as
/// "coinciding" for `well_prepare`.
///
/// Matches the machine band used elsewhere: coordinates equal to twelve
/// digits are indistinguishable for the separation monitoring the
/// perturbation exists to support.
pub const WELL_PREPARE_GAP_REL: f64 = 1e-12;

/// Lloyd iterations stop early once the largest seed displacement falls
/// below this fraction of the support diameter.
///
/// At 1e-15 · diameter the update is below the resolution of the moment
/// computations; further iterations only shuffle last-bit noise.
pub const LLOYD_FIXPOINT_REL: f64 = 1e-15;

/// Rejection-sampling attempt cap per requested point, before the density
/// is declared effectively zero.
///
/// A density whose acceptance rate is below 1/10⁵ on its own support
/// bounding box is degenerate for quantization purposes.
pub const REJECTION_MAX_ATTEMPTS: usize = 100_000;
