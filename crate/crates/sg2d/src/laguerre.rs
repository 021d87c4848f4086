//! Laguerre (power) diagrams of a weighted point cloud, clipped to a
//! convex domain.
//!
//! Cell `i` of the diagram generated by seeds `z` and weights `w` is
//!
//! ```text
//! C_i = { x ∈ Ω : |x − z_i|² − w_i ≤ |x − z_j|² − w_j  for all j }
//! ```
//!
//! Each pairwise constraint is a half-plane (the *power bisector* of seeds
//! i and j), so every cell is a convex polygon and is computed by
//! Sutherland–Hodgman clipping of Ω against the bisectors. The module also
//! extracts the **weighted dual graph**: for every pair of cells sharing a
//! boundary segment of positive length, the segment length and the seed
//! distance — exactly the data the optimal-transport Newton solver needs
//! to assemble its Hessian (a graph Laplacian).
//!
//! Algorithm notes:
//! - Per-cell clipping against all other seeds is O(N²). A uniform-grid
//!   neighbor filter (enabled automatically for N ≥ 64) skips seeds that
//!   provably cannot cut the current cell: seed j is irrelevant to cell i
//!   when `|z_j − z_i| ≥ ρ_i + sqrt(max(0, ρ_i² − w_i + max_k w_k))`,
//!   where ρ_i is the circumradius of the *current* partial cell about
//!   z_i. (Any point x the two cells could contest satisfies
//!   `|x − z_i| ≤ ρ_i` and `|x − z_j|² − w_j ≤ |x − z_i|² − w_i`; the
//!   triangle inequality turns that into the stated distance bound.)
//! - Seeds may lie **outside** Ω (during dynamics they roam freely); cells
//!   always stay inside Ω.
//! - Construction is deterministic: cells are assembled in seed order and
//!   the candidate ordering is a pure function of the input, so results
//!   are bit-identical regardless of thread count (the `parallel` feature
//!   only distributes independent per-cell work).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

#[allow(unused_imports)]
use num_traits::Float;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::geom2d::{clip_loop_labeled, second_moment_about, ConvexPolygon, HalfPlane, Point2};
use crate::tolerances::{
    COINCIDENT_SEEDS_REL, INTERFACE_DROP_REL, SLIVER_AREA_REL, VERTEX_DEDUP_REL,
};

/// Seed count at and above which `build_diagram` switches from plain
/// all-pairs clipping to the grid-filtered search. Below this the filter's
/// bookkeeping costs more than it saves.
const GRID_MIN_SEEDS: usize = 64;

/// A discrete measure: N seed positions with positive masses.
///
/// Invariants enforced at construction: at least one seed, every seed
/// finite, every mass positive and finite. The solver additionally
/// requires the total mass to match the domain area (see
/// [`crate::sdot::solve_weights`]); use [`DiscreteMeasure::rescale_to`] to
/// establish that exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    seeds: Vec<Point2>,
    masses: Vec<f64>,
}

/// Validation errors for [`DiscreteMeasure`].
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MeasureError {
    #[error("seed and mass lists differ in length ({seeds} vs {masses})")]
    LengthMismatch { seeds: usize, masses: usize },
    #[error("a measure needs at least one seed")]
    NoSeeds,
    #[error("seed {index} is not finite")]
    NonFiniteSeed { index: usize },
    #[error("mass {index} must be positive and finite")]
    BadMass { index: usize },
}

impl DiscreteMeasure {
    /// Build a measure from matching seed and mass lists.
    pub fn new(seeds: Vec<Point2>, masses: Vec<f64>) -> Result<Self, MeasureError> {
        if seeds.len() != masses.len() {
            return Err(MeasureError::LengthMismatch {
                seeds: seeds.len(),
                masses: masses.len(),
            });
        }
        if seeds.is_empty() {
            return Err(MeasureError::NoSeeds);
        }
        for (index, s) in seeds.iter().enumerate() {
            if !s.is_finite() {
                return Err(MeasureError::NonFiniteSeed { index });
            }
        }
        for (index, &m) in masses.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return Err(MeasureError::BadMass { index });
            }
        }
        Ok(Self { seeds, masses })
    }

    /// Equal masses summing to `total_mass`.
    pub fn uniform(seeds: Vec<Point2>, total_mass: f64) -> Result<Self, MeasureError> {
        let n = seeds.len();
        if n == 0 {
            return Err(MeasureError::NoSeeds);
        }
        let m = total_mass / n as f64;
        let mut out = Self::new(seeds, alloc::vec![m; n])?;
        out.rescale_to(total_mass);
        Ok(out)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.seeds.len()
    }

    #[inline]
    pub fn seeds(&self) -> &[Point2] {
        &self.seeds
    }

    /// Mutable seed access for time stepping. Masses are fixed by
    /// construction; seeds carry no invariant beyond finiteness, which the
    /// diagram builder re-checks where it matters (coincidence).
    #[inline]
    pub fn seeds_mut(&mut self) -> &mut [Point2] {
        &mut self.seeds
    }

    #[inline]
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn min_mass(&self) -> f64 {
        self.masses.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Rescale all masses so the total matches `target` to the last ulp
    /// (bitwise equal in almost every case).
    ///
    /// Plain multiplication by `target / total` leaves the sum a few ulp
    /// off; transport solves want `Σ m_i − area(Ω)` to vanish so the
    /// gradient has (numerically) zero mean. After scaling, the **last**
    /// mass absorbs the rounding residue: `total_mass` folds left to
    /// right, so its prefix through N−2 is unchanged by the correction and
    /// the iteration `m_last += target − total` has `fold == target` as
    /// its fixed point. The correction is a few ulp of the total, so
    /// positivity is never threatened for any sane mass ratio.
    ///
    /// # Panics
    /// If `target` is not positive and finite, or if the correction would
    /// drive the last mass non-positive (mass ratios near 1/ε).
    pub fn rescale_to(&mut self, target: f64) {
        assert!(
            target > 0.0 && target.is_finite(),
            "rescale target must be positive and finite, got {target}"
        );
        let total = self.total_mass();
        let s = target / total;
        for m in &mut self.masses {
            *m *= s;
        }
        let last = self.masses.len() - 1;
        // A couple of rounds settle it; round-to-even ties can in theory
        // oscillate by one ulp, hence the cap and the relaxed final check.
        for _ in 0..8 {
            let sum = self.total_mass();
            if sum == target {
                return;
            }
            self.masses[last] += target - sum;
            assert!(
                self.masses[last] > 0.0,
                "mass rescale fix-up drove mass {last} non-positive"
            );
        }
        let residue = (self.total_mass() - target).abs();
        assert!(
            residue <= 4.0 * f64::EPSILON * target,
            "rescale fix-up left residue {residue:e}"
        );
    }
}

/// Weight vector for a Laguerre diagram, one entry per seed.
///
/// Derefs to `[f64]`. Weights produced by the transport solver are
/// normalized so the last entry is exactly 0 (weights are only defined up
/// to an additive constant — see the shift-invariance property).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn zeros(n: usize) -> Self {
        Self(alloc::vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for WeightVector {
    fn from(w: Vec<f64>) -> Self {
        Self(w)
    }
}

impl Deref for WeightVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for WeightVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// One edge of the diagram's dual graph: cells `i` and `j` share a
/// boundary segment of length `interface_length`, and their seeds are
/// `seed_distance` apart. Stored once per unordered pair with `i < j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdjacencyEdge {
    pub i: usize,
    pub j: usize,
    pub interface_length: f64,
    pub seed_distance: f64,
}

/// Errors from diagram construction and queries.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LaguerreError {
    /// Two seeds closer than [`COINCIDENT_SEEDS_REL`] · diameter(Ω): their
    /// power bisector is numerically meaningless and the centroid field
    /// has no continuous extension there.
    #[error("seeds {i} and {j} coincide (distance {distance:.3e})")]
    CoincidentSeeds { i: usize, j: usize, distance: f64 },
    /// Cell index out of range, or a self-pair query like `(i, i)`.
    #[error("cell index {index} out of range for diagram of {len} cells")]
    IndexOutOfRange { index: usize, len: usize },
}

/// A Laguerre tessellation of Ω with per-cell moments and the weighted
/// dual graph. Immutable after construction; cheap to share.
///
/// Empty cells are legal (a seed can price itself out of Ω entirely): they
/// carry an empty polygon, zero area, zero second moment, and — as a
/// placeholder only — their own seed as "centroid". Consumers must gate on
/// `area > 0` before using a centroid.
#[derive(Clone, Debug)]
pub struct LaguerreDiagram {
    cells: Vec<ConvexPolygon>,
    areas: Vec<f64>,
    centroids: Vec<Point2>,
    second_moments: Vec<f64>,
    adjacency: Vec<AdjacencyEdge>,
}

impl LaguerreDiagram {
    #[inline]
    pub fn n(&self) -> usize {
        self.cells.len()
    }

    #[inline]
    pub fn cells(&self) -> &[ConvexPolygon] {
        &self.cells
    }

    #[inline]
    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Cell centroids; entry i is the seed itself when cell i is empty.
    #[inline]
    pub fn centroids(&self) -> &[Point2] {
        &self.centroids
    }

    /// Per-cell `∫_{C_i} |x − z_i|² dx` (about the cell's own seed).
    #[inline]
    pub fn second_moments(&self) -> &[f64] {
        &self.second_moments
    }

    #[inline]
    pub fn adjacency(&self) -> &[AdjacencyEdge] {
        &self.adjacency
    }

    /// Length of the boundary segment shared by cells `i` and `j`, or
    /// `None` if they are not adjacent. Order of `i`, `j` is irrelevant.
    ///
    /// # Errors
    /// [`LaguerreError::IndexOutOfRange`] if either index is out of range
    /// or `i == j` (a cell has no interface with itself).
    pub fn cell_boundary_with(&self, i: usize, j: usize) -> Result<Option<f64>, LaguerreError> {
        let len = self.n();
        for index in [i, j] {
            if index >= len {
                return Err(LaguerreError::IndexOutOfRange { index, len });
            }
        }
        if i == j {
            return Err(LaguerreError::IndexOutOfRange { index: i, len });
        }
        let key = (i.min(j), i.max(j));
        Ok(self
            .adjacency
            .iter()
            .find(|e| (e.i, e.j) == key)
            .map(|e| e.interface_length))
    }
}

/// Build the Laguerre diagram of `measure`'s seeds with weights `w`,
/// clipped to `domain`.
///
/// # Errors
/// [`LaguerreError::CoincidentSeeds`] when two seeds are closer than
/// [`COINCIDENT_SEEDS_REL`] · diameter(Ω).
///
/// # Panics
/// If `w.len() != measure.n()` — a caller bug, not a data condition.
pub fn build_diagram(
    domain: &ConvexPolygon,
    measure: &DiscreteMeasure,
    w: &WeightVector,
) -> Result<LaguerreDiagram, LaguerreError> {
    build_diagram_impl(domain, measure, w, measure.n() >= GRID_MIN_SEEDS)
}

pub(crate) fn build_diagram_impl(
    domain: &ConvexPolygon,
    measure: &DiscreteMeasure,
    w: &WeightVector,
    use_grid: bool,
) -> Result<LaguerreDiagram, LaguerreError> {
    let n = measure.n();
    assert_eq!(w.len(), n, "weight vector length {} != seed count {n}", w.len());
    assert!(!domain.is_empty(), "domain polygon must be nonempty");

    let seeds = measure.seeds();
    let diam = domain.diameter();
    let coincident_tol = COINCIDENT_SEEDS_REL * diam;
    let grid = SeedGrid::build(seeds);
    if let Some((i, j, distance)) = grid.closest_pair_within(seeds, coincident_tol) {
        return Err(LaguerreError::CoincidentSeeds { i, j, distance });
    }

    let w_max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let clip_eps = VERTEX_DEDUP_REL * diam;
    let ctx = BuildCtx {
        domain,
        seeds,
        w,
        w_max,
        clip_eps,
        grid: if use_grid { Some(&grid) } else { None },
    };

    #[cfg(feature = "parallel")]
    let per_cell: Vec<CellOut> = (0..n).into_par_iter().map(|i| clip_cell(&ctx, i)).collect();
    #[cfg(not(feature = "parallel"))]
    let per_cell: Vec<CellOut> = (0..n).map(|i| clip_cell(&ctx, i)).collect();

    Ok(assemble(domain, seeds, per_cell, diam))
}

struct BuildCtx<'a> {
    domain: &'a ConvexPolygon,
    seeds: &'a [Point2],
    w: &'a [f64],
    w_max: f64,
    clip_eps: f64,
    grid: Option<&'a SeedGrid>,
}

struct CellOut {
    poly: ConvexPolygon,
    /// (neighbor index, interface length) as seen from this cell.
    interfaces: Vec<(usize, f64)>,
}

/// Directed-edge label during clipping: which neighbor's bisector this
/// piece of the boundary lies on (`None` = the domain boundary).
type EdgeLabel = Option<usize>;

/// Compute cell `i` by clipping Ω against the power bisectors of every
/// relevant seed pair, carrying edge labels so interfaces fall out of the
/// final loop for free.
fn clip_cell(ctx: &BuildCtx<'_>, i: usize) -> CellOut {
    let z_i = ctx.seeds[i];
    let w_i = ctx.w[i];

    let mut verts: Vec<Point2> = ctx.domain.vertices().to_vec();
    let mut labels: Vec<EdgeLabel> = alloc::vec![None; verts.len()];
    let mut next_v: Vec<Point2> = Vec::with_capacity(verts.len() + 4);
    let mut next_l: Vec<EdgeLabel> = Vec::with_capacity(verts.len() + 4);

    // Circumradius of the current partial cell about z_i; shrinks as we
    // clip, tightening the skip bound.
    let mut rho = max_dist(&verts, z_i);

    let clip_by = |j: usize,
                   verts: &mut Vec<Point2>,
                   labels: &mut Vec<EdgeLabel>,
                   next_v: &mut Vec<Point2>,
                   next_l: &mut Vec<EdgeLabel>,
                   rho: &mut f64|
     -> bool {
        let z_j = ctx.seeds[j];
        let d = z_i.distance(z_j);
        // Power bisector of (i, j), kept side = cell i:
        //   u·(x − mid) ≤ (w_i − w_j) / (2d),  u = (z_j − z_i)/d.
        // The midpoint form keeps the offset well-conditioned even when
        // the seeds sit far from the origin.
        let u = (z_j - z_i) * (1.0 / d);
        let mid = (z_i + z_j) * 0.5;
        let offset = u.dot(mid) + (w_i - ctx.w[j]) / (2.0 * d);
        let h = HalfPlane::new(u, offset);
        clip_loop_labeled(verts, labels, &h, Some(j), ctx.clip_eps, next_v, next_l);
        core::mem::swap(verts, next_v);
        core::mem::swap(labels, next_l);
        if verts.is_empty() {
            return false;
        }
        *rho = max_dist(verts, z_i);
        true
    };

    // Skip bound: seed j cannot cut the current cell when
    // |z_j − z_i| ≥ ρ + sqrt(max(0, ρ² − w_i + w_max)).
    let bound = |rho: f64| rho + (rho * rho - w_i + ctx.w_max).max(0.0).sqrt();

    match ctx.grid {
        Some(grid) => {
            let center = grid.bin_of(z_i);
            let mut scratch: Vec<(f64, usize)> = Vec::new();
            'rings: for r in 0..=grid.k {
                if grid.min_ring_distance(center, r) >= bound(rho) {
                    break;
                }
                // Process a ring's seeds nearest-first so ρ shrinks as
                // early as possible.
                scratch.clear();
                grid.for_ring(center, r, |j| {
                    if j != i {
                        scratch.push((z_i.distance(ctx.seeds[j]), j));
                    }
                });
                scratch.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
                for &(d, j) in scratch.iter() {
                    if d >= bound(rho) {
                        break;
                    }
                    if !clip_by(j, &mut verts, &mut labels, &mut next_v, &mut next_l, &mut rho) {
                        break 'rings;
                    }
                }
            }
        }
        None => {
            for j in 0..ctx.seeds.len() {
                if j == i {
                    continue;
                }
                if z_i.distance(ctx.seeds[j]) >= bound(rho) {
                    continue;
                }
                if !clip_by(j, &mut verts, &mut labels, &mut next_v, &mut next_l, &mut rho) {
                    break;
                }
            }
        }
    }

    // Harvest interfaces from the surviving labeled loop.
    let mut interfaces: Vec<(usize, f64)> = Vec::new();
    let m = verts.len();
    for k in 0..m {
        if let Some(j) = labels[k] {
            let len = verts[k].distance(verts[(k + 1) % m]);
            // A neighbor may own several consecutive collinear edges after
            // later cuts split its segment; sum them.
            match interfaces.iter_mut().find(|(jj, _)| *jj == j) {
                Some((_, acc)) => *acc += len,
                None => interfaces.push((j, len)),
            }
        }
    }

    CellOut {
        poly: ConvexPolygon::from_loop_unchecked(verts),
        interfaces,
    }
}

fn max_dist(verts: &[Point2], p: Point2) -> f64 {
    verts
        .iter()
        .map(|v| v.distance(p))
        .fold(0.0, f64::max)
}

/// Merge per-cell outputs into the final diagram: moments, sliver policy,
/// and the symmetric adjacency list.
fn assemble(
    domain: &ConvexPolygon,
    seeds: &[Point2],
    per_cell: Vec<CellOut>,
    diam: f64,
) -> LaguerreDiagram {
    let n = per_cell.len();
    let sliver_area = SLIVER_AREA_REL * domain.area();
    let min_interface = INTERFACE_DROP_REL * diam;

    let mut cells = Vec::with_capacity(n);
    let mut areas = Vec::with_capacity(n);
    let mut centroids = Vec::with_capacity(n);
    let mut second_moments = Vec::with_capacity(n);
    let mut sliver = alloc::vec![false; n];

    // Interface lengths are measured independently by both incident cells;
    // average the two reports (they differ by rounding only), keep a
    // single report when the partner's copy was lost to vertex merging.
    let mut edges: BTreeMap<(usize, usize), (f64, u32)> = BTreeMap::new();

    for (i, out) in per_cell.into_iter().enumerate() {
        let area = out.poly.area();
        if area < sliver_area {
            // Sliver policy: a cell this far below any meaningful mass
            // scale is numerical debris — treat it as empty and keep its
            // (possibly long, zero-width) interfaces out of the dual
            // graph, where they would poison the Laplacian.
            sliver[i] = true;
            cells.push(ConvexPolygon::empty());
            areas.push(0.0);
            centroids.push(seeds[i]);
            second_moments.push(0.0);
            continue;
        }
        areas.push(area);
        centroids.push(out.poly.centroid());
        second_moments.push(second_moment_about(out.poly.vertices(), seeds[i]));
        cells.push(out.poly);
        for (j, len) in out.interfaces {
            let key = (i.min(j), i.max(j));
            let e = edges.entry(key).or_insert((0.0, 0));
            e.0 += len;
            e.1 += 1;
        }
    }

    let adjacency = edges
        .into_iter()
        .filter(|((i, j), _)| !sliver[*i] && !sliver[*j])
        .filter_map(|((i, j), (sum, count))| {
            let interface_length = sum / f64::from(count);
            (interface_length >= min_interface).then(|| AdjacencyEdge {
                i,
                j,
                interface_length,
                seed_distance: seeds[i].distance(seeds[j]),
            })
        })
        .collect();

    LaguerreDiagram {
        cells,
        areas,
        centroids,
        second_moments,
        adjacency,
    }
}

/// Smallest pairwise seed distance (∞ for a single seed).
///
/// Grid-accelerated (expected O(N)); the brute-force fallback below
/// `GRID_MIN_SEEDS` seeds is exact and cheap.
pub fn min_seed_separation(seeds: &[Point2]) -> f64 {
    if seeds.len() < 2 {
        return f64::INFINITY;
    }
    if seeds.len() < GRID_MIN_SEEDS {
        let mut best = f64::INFINITY;
        for i in 0..seeds.len() {
            for j in i + 1..seeds.len() {
                best = best.min(seeds[i].distance(seeds[j]));
            }
        }
        return best;
    }
    let grid = SeedGrid::build(seeds);
    let mut best = f64::INFINITY;
    for (i, &z) in seeds.iter().enumerate() {
        let center = grid.bin_of(z);
        for r in 0..=grid.k {
            if grid.min_ring_distance(center, r) >= best {
                break;
            }
            grid.for_ring(center, r, |j| {
                if j != i {
                    best = best.min(z.distance(seeds[j]));
                }
            });
        }
    }
    best
}

/// Uniform bucket grid over the seed bounding box, used to enumerate
/// seeds in rings of increasing distance.
struct SeedGrid {
    origin: Point2,
    /// Bucket side length (> 0 even for degenerate point clouds).
    side: f64,
    /// Buckets per axis.
    k: usize,
    bins: Vec<Vec<u32>>,
}

impl SeedGrid {
    fn build(seeds: &[Point2]) -> Self {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for s in seeds {
            min.x = min.x.min(s.x);
            min.y = min.y.min(s.y);
            max.x = max.x.max(s.x);
            max.y = max.y.max(s.y);
        }
        // ~2 seeds per bucket on average.
        let k = (((seeds.len() as f64) / 2.0).sqrt().ceil() as usize).max(1);
        let extent = (max.x - min.x).max(max.y - min.y);
        let side = if extent > 0.0 {
            extent / k as f64
        } else {
            1.0 // all seeds coincide; one bucket receives everything
        };
        let mut grid = Self {
            origin: min,
            side,
            k,
            bins: alloc::vec![Vec::new(); k * k],
        };
        for (i, s) in seeds.iter().enumerate() {
            let (bx, by) = grid.bin_of(*s);
            grid.bins[by * k + bx].push(i as u32);
        }
        grid
    }

    fn bin_of(&self, p: Point2) -> (usize, usize) {
        let clampi = |v: f64| -> usize {
            if !(v > 0.0) {
                0
            } else {
                (v as usize).min(self.k - 1)
            }
        };
        (
            clampi((p.x - self.origin.x) / self.side),
            clampi((p.y - self.origin.y) / self.side),
        )
    }

    /// Lower bound on the distance from any point of bucket `center` to
    /// any point of a bucket in Chebyshev ring `r` (0 for adjacent rings).
    fn min_ring_distance(&self, _center: (usize, usize), r: usize) -> f64 {
        (r.saturating_sub(1)) as f64 * self.side
    }

    /// Visit every seed stored in the buckets of Chebyshev ring `r`
    /// around `center`, in deterministic (row-major) order.
    fn for_ring(&self, center: (usize, usize), r: usize, mut f: impl FnMut(usize)) {
        let (cx, cy) = (center.0 as isize, center.1 as isize);
        let k = self.k as isize;
        let r = r as isize;
        let visit = |x: isize, y: isize, f: &mut dyn FnMut(usize)| {
            if x >= 0 && x < k && y >= 0 && y < k {
                for &s in &self.bins[(y * k + x) as usize] {
                    f(s as usize);
                }
            }
        };
        if r == 0 {
            visit(cx, cy, &mut f);
            return;
        }
        for x in (cx - r)..=(cx + r) {
            visit(x, cy - r, &mut f);
            visit(x, cy + r, &mut f);
        }
        for y in (cy - r + 1)..=(cy + r - 1) {
            visit(cx - r, y, &mut f);
            visit(cx + r, y, &mut f);
        }
    }

    /// First pair of seeds closer than `tol`, if any.
    fn closest_pair_within(&self, seeds: &[Point2], tol: f64) -> Option<(usize, usize, f64)> {
        for (i, &z) in seeds.iter().enumerate() {
            let center = self.bin_of(z);
            for r in 0..=self.k {
                if self.min_ring_distance(center, r) >= tol {
                    break;
                }
                let mut hit = None;
                self.for_ring(center, r, |j| {
                    if j > i && hit.is_none() {
                        let d = z.distance(seeds[j]);
                        if d < tol {
                            hit = Some((i, j, d));
                        }
                    }
                });
                if hit.is_some() {
                    return hit;
                }
            }
        }
        None
    }
}
