//! Quantization: turn a compactly supported density into a discrete
//! measure by Lloyd's algorithm, plus the distinct-coordinate perturbation
//! used to well-prepare initial data.
//!
//! `lloyd_quantize` seeds N points by rejection sampling from the density,
//! then repeatedly moves every seed to the density-weighted centroid of
//! its Voronoi cell (the diagram machinery is [`crate::laguerre`] with
//! zero weights). The output masses are the density masses of the final
//! Voronoi cells, rescaled so they sum exactly to the support's area —
//! the normalization the transport solver requires.
//!
//! Density integrals over cells use a fan triangulation and a fixed
//! 12-point degree-6 symmetric triangle rule (Dunavant); the uniform
//! density bypasses quadrature entirely via the exact polygon moments.
//!
//! Everything is deterministic given the RNG seed: the generator is
//! ChaCha8 with one stream for initial sampling and a second for the
//! reseeding of empty cells, so a reseed never shifts the draws of later
//! operations.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom2d::{ConvexPolygon, Point2};
use crate::laguerre::{build_diagram, DiscreteMeasure, LaguerreError, WeightVector};
use crate::tolerances::{LLOYD_FIXPOINT_REL, REJECTION_MAX_ATTEMPTS, WELL_PREPARE_GAP_REL};

/// How many consecutive reseed-and-rebuild rounds may follow the last
/// Lloyd iteration before a persistently massless cell becomes an error.
const MAX_RESEED_ROUNDS: usize = 100;

/// A nonnegative density with compact convex support.
#[derive(Clone, Debug)]
pub struct DensitySpec {
    support: ConvexPolygon,
    kind: DensityKind,
}

#[derive(Clone, Debug)]
enum DensityKind {
    /// Constant 1 on the support.
    Uniform,
    /// `exp(−|x − center|² / (2σ²))` — σ = 1/√2 gives `exp(−|x|²)`.
    Gaussian { center: Point2, sigma: f64 },
    /// Bilinear interpolation of a rectangular sample grid.
    Grid(GridDensity),
}

/// Density samples on a rectangular lattice, interpolated bilinearly and
/// extended flat (clamped) outside the lattice box.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    origin: Point2,
    dx: f64,
    dy: f64,
    nx: usize,
    ny: usize,
    /// Row-major: `values[iy * nx + ix]` is the sample at
    /// `origin + (ix·dx, iy·dy)`.
    values: Vec<f64>,
}

/// Validation errors for density construction.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DensityError {
    #[error("sigma must be positive and finite")]
    BadSigma,
    #[error("grid needs at least 2×2 samples with positive spacing")]
    BadGrid,
    #[error("grid sample {index} is negative or not finite")]
    BadSample { index: usize },
}

impl GridDensity {
    /// Samples at `origin + (ix·dx, iy·dy)`, `ix < nx`, `iy < ny`,
    /// row-major with x fastest.
    pub fn new(
        origin: Point2,
        dx: f64,
        dy: f64,
        nx: usize,
        ny: usize,
        values: Vec<f64>,
    ) -> Result<Self, DensityError> {
        if nx < 2 || ny < 2 || !(dx > 0.0) || !(dy > 0.0) || values.len() != nx * ny {
            return Err(DensityError::BadGrid);
        }
        for (index, &v) in values.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(DensityError::BadSample { index });
            }
        }
        Ok(Self {
            origin,
            dx,
            dy,
            nx,
            ny,
            values,
        })
    }

    fn eval(&self, p: Point2) -> f64 {
        // Clamp into the lattice box, then bilinear.
        let fx = ((p.x - self.origin.x) / self.dx).clamp(0.0, (self.nx - 1) as f64);
        let fy = ((p.y - self.origin.y) / self.dy).clamp(0.0, (self.ny - 1) as f64);
        let ix = (fx as usize).min(self.nx - 2);
        let iy = (fy as usize).min(self.ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let v = |i: usize, j: usize| self.values[j * self.nx + i];
        (1.0 - ty) * ((1.0 - tx) * v(ix, iy) + tx * v(ix + 1, iy))
            + ty * ((1.0 - tx) * v(ix, iy + 1) + tx * v(ix + 1, iy + 1))
    }

    fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

impl DensitySpec {
    /// The uniform density (value 1) on `support`.
    pub fn uniform(support: ConvexPolygon) -> Self {
        Self {
            support,
            kind: DensityKind::Uniform,
        }
    }

    /// `exp(−|x − center|²/(2σ²))` restricted to `support`.
    pub fn gaussian(
        support: ConvexPolygon,
        center: Point2,
        sigma: f64,
    ) -> Result<Self, DensityError> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(DensityError::BadSigma);
        }
        Ok(Self {
            support,
            kind: DensityKind::Gaussian { center, sigma },
        })
    }

    /// A sampled density restricted to `support`.
    pub fn from_grid(support: ConvexPolygon, grid: GridDensity) -> Self {
        Self {
            support,
            kind: DensityKind::Grid(grid),
        }
    }

    #[inline]
    pub fn support(&self) -> &ConvexPolygon {
        &self.support
    }

    /// Pointwise density value, **without** the support indicator (the
    /// integration routines only ever evaluate inside cells ⊆ support).
    pub fn eval(&self, p: Point2) -> f64 {
        match &self.kind {
            DensityKind::Uniform => 1.0,
            DensityKind::Gaussian { center, sigma } => {
                let r2 = (p - *center).norm_sq();
                (-r2 / (2.0 * sigma * sigma)).exp()
            }
            DensityKind::Grid(g) => g.eval(p),
        }
    }

    fn is_uniform(&self) -> bool {
        matches!(self.kind, DensityKind::Uniform)
    }

    /// Upper bound for rejection sampling (need not be tight).
    fn max_value(&self) -> f64 {
        match &self.kind {
            DensityKind::Uniform | DensityKind::Gaussian { .. } => 1.0,
            DensityKind::Grid(g) => g.max_value(),
        }
    }
}

/// Errors from quantization.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum QuantizeError {
    /// Rejection sampling kept missing: the density is (numerically) zero
    /// on its support.
    #[error("rejection sampling failed after {attempts} attempts: density ≈ 0 on its support")]
    SamplingFailed { attempts: usize },
    /// A cell stayed massless through every reseeding round.
    #[error("cell {index} carries no density mass and reseeding could not fix it")]
    EmptyCell { index: usize },
    /// Voronoi construction failed (e.g. seeds collapsed together).
    #[error(transparent)]
    Laguerre(#[from] LaguerreError),
}

/// Dunavant's 12-point symmetric quadrature for triangles, exact through
/// polynomial degree 6. Stored as (weight, λ₁, λ₂, λ₃) with Σ weights = 1;
/// the integral is `area(T) · Σ w_q f(λ·vertices)`.
const TRI_QUAD_12: [(f64, f64, f64, f64); 12] = {
    const W1: f64 = 0.116786275726379;
    const A1: f64 = 0.501426509658179;
    const B1: f64 = 0.249286745170910;
    const W2: f64 = 0.050844906370207;
    const A2: f64 = 0.873821971016996;
    const B2: f64 = 0.063089014491502;
    const W3: f64 = 0.082851075618374;
    const A3: f64 = 0.053145049844816;
    const B3: f64 = 0.310352451033785;
    const C3: f64 = 0.636502499121399;
    [
        (W1, A1, B1, B1),
        (W1, B1, A1, B1),
        (W1, B1, B1, A1),
        (W2, A2, B2, B2),
        (W2, B2, A2, B2),
        (W2, B2, B2, A2),
        (W3, A3, B3, C3),
        (W3, A3, C3, B3),
        (W3, B3, A3, C3),
        (W3, B3, C3, A3),
        (W3, C3, A3, B3),
        (W3, C3, B3, A3),
    ]
};

/// `∫_T f` over the triangle (a, b, c) by the degree-6 rule.
fn triangle_integral(a: Point2, b: Point2, c: Point2, f: &mut impl FnMut(Point2) -> f64) -> f64 {
    let area = 0.5 * (b - a).cross(c - a);
    let mut acc = 0.0;
    for &(w, l1, l2, l3) in &TRI_QUAD_12 {
        acc += w * f(a * l1 + b * l2 + c * l3);
    }
    acc * area
}

/// `∫_cell f` by fan triangulation from the cell centroid (valid for any
/// convex cell). Returns 0 for empty cells.
fn cell_integral(cell: &ConvexPolygon, f: &mut impl FnMut(Point2) -> f64) -> f64 {
    let verts = cell.vertices();
    let n = verts.len();
    if n < 3 {
        return 0.0;
    }
    let c = cell.centroid();
    let mut acc = 0.0;
    for k in 0..n {
        acc += triangle_integral(c, verts[k], verts[(k + 1) % n], f);
    }
    acc
}

/// Density mass and density-weighted centroid of a convex cell.
///
/// `mass = ∫_cell ρ`, `centroid = (1/mass) ∫_cell x ρ(x) dx`. A massless
/// cell (empty polygon, or ρ ≈ 0 throughout) is signaled by `mass = 0`
/// with the unweighted polygon centroid as placeholder.
///
/// The uniform density takes the exact polygon-moment path; everything
/// else integrates with the degree-6 triangle rule.
pub fn density_cell_moments(density: &DensitySpec, cell: &ConvexPolygon) -> (f64, Point2) {
    if cell.is_empty() {
        return (0.0, Point2::ZERO);
    }
    if density.is_uniform() {
        return (cell.area(), cell.centroid());
    }
    let mass = cell_integral(cell, &mut |p| density.eval(p));
    if !(mass > 0.0) {
        return (0.0, cell.centroid());
    }
    let mx = cell_integral(cell, &mut |p| p.x * density.eval(p));
    let my = cell_integral(cell, &mut |p| p.y * density.eval(p));
    (mass, Point2::new(mx / mass, my / mass))
}

/// The quantization energy `Σ_i ∫_{V_i} ρ(x) |x − z_i|² dx` of a seed set
/// (V = Voronoi cells of the seeds on the density's support). This is the
/// quantity Lloyd's algorithm descends.
///
/// # Errors
/// Propagates [`LaguerreError`] from the Voronoi construction.
pub fn quantization_energy(density: &DensitySpec, seeds: &[Point2]) -> Result<f64, LaguerreError> {
    let measure = DiscreteMeasure::uniform(seeds.to_vec(), 1.0)
        .expect("uniform masses over given seeds are valid");
    let diagram = build_diagram(density.support(), &measure, &WeightVector::zeros(seeds.len()))?;
    let mut total = 0.0;
    for (cell, &z) in diagram.cells().iter().zip(seeds) {
        if density.is_uniform() {
            total += crate::geom2d::second_moment_about(cell.vertices(), z);
        } else {
            total += cell_integral(cell, &mut |p| density.eval(p) * (p - z).norm_sq());
        }
    }
    Ok(total)
}

/// Lloyd quantization: approximate `density` by `n` weighted points.
///
/// Seeds are initialized by rejection sampling (deterministic in
/// `rng_seed`), then moved to their cells' density centroids for
/// `iterations` rounds (stopping early once the largest displacement
/// falls below [`LLOYD_FIXPOINT_REL`] · diameter). A seed whose cell
/// carries no density mass is reseeded from the density and iteration
/// continues. Output masses are the final cells' density masses, rescaled
/// so `Σ m_i` equals the support area exactly.
///
/// # Errors
/// - [`QuantizeError::SamplingFailed`] when the density is numerically
///   zero on its support;
/// - [`QuantizeError::EmptyCell`] when a cell stays massless through
///   every reseeding attempt;
/// - propagated [`LaguerreError`] (e.g. seeds collapsing together, which
///   a genuine density never causes).
///
/// # Panics
/// If `n == 0`.
pub fn lloyd_quantize(
    density: &DensitySpec,
    n: usize,
    iterations: usize,
    rng_seed: u64,
) -> Result<DiscreteMeasure, QuantizeError> {
    assert!(n >= 1, "lloyd_quantize needs at least one seed");
    let support = density.support();
    let diam = support.diameter();
    let move_floor = LLOYD_FIXPOINT_REL * diam;

    // Stream 0: initial placement. Stream 1: reseeding. Separate streams
    // keep "how many cells went empty" from shifting unrelated draws.
    let mut init_rng = ChaCha8Rng::seed_from_u64(rng_seed);
    init_rng.set_stream(0);
    let mut reseed_rng = ChaCha8Rng::seed_from_u64(rng_seed);
    reseed_rng.set_stream(1);

    let mut seeds: Vec<Point2> = Vec::with_capacity(n);
    for _ in 0..n {
        seeds.push(sample_density(density, &mut init_rng)?);
    }

    // Placeholder masses: Lloyd only needs seed geometry; true masses are
    // measured after the final iteration.
    let unit_masses = |seeds: &[Point2]| {
        DiscreteMeasure::uniform(seeds.to_vec(), 1.0).expect("positive uniform masses")
    };

    for _ in 0..iterations {
        let measure = unit_masses(&seeds);
        let diagram = build_diagram(support, &measure, &WeightVector::zeros(n))?;
        let mut max_move = 0.0_f64;
        for (i, cell) in diagram.cells().iter().enumerate() {
            let (mass, centroid) = density_cell_moments(density, cell);
            if mass > 0.0 {
                max_move = max_move.max(seeds[i].distance(centroid));
                seeds[i] = centroid;
            } else {
                seeds[i] = sample_density(density, &mut reseed_rng)?;
                max_move = f64::INFINITY; // a reseed is never a fixpoint
            }
        }
        if max_move <= move_floor {
            break;
        }
    }

    // Measure the final cells; keep reseeding while any is massless.
    for _ in 0..=MAX_RESEED_ROUNDS {
        let measure = unit_masses(&seeds);
        let diagram = build_diagram(support, &measure, &WeightVector::zeros(n))?;
        let mut masses = Vec::with_capacity(n);
        let mut empty: Option<usize> = None;
        for i in 0..n {
            let (mass, _) = density_cell_moments(density, &diagram.cells()[i]);
            if mass > 0.0 {
                masses.push(mass);
            } else {
                empty = Some(i);
                break;
            }
        }
        match empty {
            None => {
                let mut out = DiscreteMeasure::new(seeds, masses)
                    .expect("positive masses by construction");
                out.rescale_to(support.area());
                return Ok(out);
            }
            Some(i) => {
                seeds[i] = sample_density(density, &mut reseed_rng)?;
            }
        }
    }
    Err(QuantizeError::EmptyCell { index: 0 })
}

/// One rejection-sampled point from the density.
fn sample_density(density: &DensitySpec, rng: &mut ChaCha8Rng) -> Result<Point2, QuantizeError> {
    let (min, max) = density.support().bounding_box();
    let bound = density.max_value();
    if !(bound > 0.0) {
        return Err(QuantizeError::SamplingFailed { attempts: 0 });
    }
    for _ in 0..REJECTION_MAX_ATTEMPTS {
        let p = Point2::new(
            rng.random_range(min.x..=max.x),
            rng.random_range(min.y..=max.y),
        );
        if !density.support().contains(p) {
            continue;
        }
        let u: f64 = rng.random_range(0.0..1.0);
        if u * bound < density.eval(p) {
            return Ok(p);
        }
    }
    Err(QuantizeError::SamplingFailed {
        attempts: REJECTION_MAX_ATTEMPTS,
    })
}

/// Perturb seeds so their `axis`-coordinates are pairwise distinct,
/// moving no seed further than `min(scale, 1/N)` and preserving masses
/// exactly. Seeds whose coordinates already differ pairwise by at least
/// [`WELL_PREPARE_GAP_REL`] × the coordinate magnitude are returned
/// unchanged.
///
/// The perturbation sorts seeds along the axis and walks once, lifting
/// each coordinate to at least `γ = min(scale, 1/N)/N` above its
/// predecessor; displacements accumulate to at most `(N−1)·γ < min(scale,
/// 1/N)` even when every seed starts in the same plane.
///
/// # Panics
/// If `scale ≤ 0` or `axis > 1`.
pub fn well_prepare(measure: &DiscreteMeasure, axis: usize, scale: f64) -> DiscreteMeasure {
    assert!(axis < 2, "axis must be 0 (x) or 1 (y)");
    assert!(scale > 0.0, "well_prepare needs scale > 0");
    let n = measure.n();
    let coord = |p: &Point2| if axis == 0 { p.x } else { p.y };

    // Identity fast path: all pairwise gaps already machine-meaningful.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        coord(&measure.seeds()[a])
            .partial_cmp(&coord(&measure.seeds()[b]))
            .expect("finite coordinates")
            .then(a.cmp(&b))
    });
    let coord_scale = measure
        .seeds()
        .iter()
        .map(|p| coord(p).abs())
        .fold(1.0_f64, f64::max);
    let gap_min = WELL_PREPARE_GAP_REL * coord_scale;
    let distinct = order.windows(2).all(|w| {
        coord(&measure.seeds()[w[1]]) - coord(&measure.seeds()[w[0]]) >= gap_min
    });
    if distinct {
        return measure.clone();
    }

    let bound = scale.min(1.0 / n as f64);
    let gamma = bound / n as f64;
    let mut seeds = measure.seeds().to_vec();
    let mut prev = f64::NEG_INFINITY;
    for &idx in &order {
        let c = coord(&seeds[idx]).max(if prev == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            prev + gamma
        });
        if axis == 0 {
            seeds[idx].x = c;
        } else {
            seeds[idx].y = c;
        }
        prev = c;
    }
    DiscreteMeasure::new(seeds, measure.masses().to_vec())
        .expect("well_prepare preserves validity")
}
