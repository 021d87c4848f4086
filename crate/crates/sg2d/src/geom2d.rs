//! Convex polygon primitives: points, half-planes, clipping, exact moments.
//!
//! This is the geometric substrate for Laguerre cells. Everything here is
//! exact polynomial edge integration (Green's theorem) or linear
//! interpolation along edges — no quadrature, no iteration — so the Newton
//! solver upstream sees areas and centroids accurate to rounding error.
//!
//! Conventions:
//! - Polygons are counter-clockwise (CCW) vertex loops. The *empty* polygon
//!   (no vertices) is a legal value with area 0: Laguerre cells can vanish
//!   during Newton line searches.
//! - A half-plane is `{p : normal·p ≤ offset}` with a **unit** normal, so
//!   `normal·p − offset` is a signed distance.
//! - Degeneracy policy: clipping merges vertices closer than
//!   [`VERTEX_DEDUP_REL`] · diameter and returns the empty polygon when
//!   fewer than three distinct vertices survive. Callers that need the
//!   sliver rule (areas below [`SLIVER_AREA_REL`] · area(Ω) count as empty)
//!   apply it themselves — only they know area(Ω).
//!
//! [`VERTEX_DEDUP_REL`]: crate::tolerances::VERTEX_DEDUP_REL
//! [`SLIVER_AREA_REL`]: crate::tolerances::SLIVER_AREA_REL

use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

#[allow(unused_imports)]
use num_traits::Float;

use crate::tolerances::{CONVEXITY_CROSS_REL, UNIT_NORMAL_TOL, VERTEX_DEDUP_REL};

/// A point (or vector) in the plane. Plain value type; finite components
/// are the caller's responsibility.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product `self × other`.
    #[inline]
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise rotation by 90°: `(x, y) ↦ (−y, x)`.
    #[inline]
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    #[inline]
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    #[inline]
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    #[inline]
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    #[inline]
    fn mul(self, p: Point2) -> Point2 {
        p * self
    }
}

impl Neg for Point2 {
    type Output = Point2;
    #[inline]
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Closed half-plane `{p : normal·p ≤ offset}` with a unit normal.
///
/// Keeping the normal unit-length makes `excess` a signed distance, which
/// is what the clipping interpolation and every tolerance comparison want.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlane {
    normal: Point2,
    offset: f64,
}

impl HalfPlane {
    /// Construct from a unit normal and offset.
    ///
    /// # Panics
    /// If `|normal|` deviates from 1 by more than [`UNIT_NORMAL_TOL`] —
    /// that is a caller bug, not a data condition.
    pub fn new(normal: Point2, offset: f64) -> Self {
        assert!(
            (normal.norm() - 1.0).abs() <= UNIT_NORMAL_TOL,
            "half-plane normal must be unit length, got |n| = {}",
            normal.norm()
        );
        Self { normal, offset }
    }

    /// Construct from any nonzero normal, normalizing it (and the offset).
    /// Returns `None` for a zero or non-finite normal.
    pub fn from_unnormalized(normal: Point2, offset: f64) -> Option<Self> {
        let len = normal.norm();
        if !len.is_finite() || len <= 0.0 {
            return None;
        }
        Some(Self {
            normal: normal * (1.0 / len),
            offset: offset / len,
        })
    }

    #[inline]
    pub fn normal(&self) -> Point2 {
        self.normal
    }

    #[inline]
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed distance to the boundary line: ≤ 0 inside, > 0 outside.
    #[inline]
    pub fn excess(&self, p: Point2) -> f64 {
        self.normal.dot(p) - self.offset
    }

    #[inline]
    pub fn contains(&self, p: Point2) -> bool {
        self.excess(p) <= 0.0
    }
}

/// Errors from polygon construction and moment queries.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GeomError {
    /// Moments of an empty polygon are undefined; callers decide whether an
    /// empty cell is fatal (it is during diagnostics, it is not during a
    /// Newton line search).
    #[error("degenerate cell: moments of an empty polygon are undefined")]
    DegenerateCell,
    /// Fewer than three distinct vertices after deduplication.
    #[error("polygon needs at least 3 distinct vertices")]
    TooFewVertices,
    /// The vertex loop is not convex (or not correctly oriented) at the
    /// reported vertex.
    #[error("vertex loop is not convex at vertex {index}")]
    NotConvex { index: usize },
    /// A vertex coordinate is NaN or infinite.
    #[error("vertex {index} is not finite")]
    NotFinite { index: usize },
}

/// Convex polygon as a CCW vertex loop, with area and centroid cached at
/// construction (they are consumed on every solver iteration).
///
/// The empty polygon (`vertices = []`, `area = 0`) is a legal value.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
    area: f64,
    centroid: Point2,
}

impl ConvexPolygon {
    /// The empty polygon: no vertices, zero area.
    pub fn empty() -> Self {
        Self {
            vertices: Vec::new(),
            area: 0.0,
            centroid: Point2::ZERO,
        }
    }

    /// Validating constructor. Deduplicates consecutive coincident vertices
    /// (within [`VERTEX_DEDUP_REL`] · diameter), accepts either orientation
    /// (clockwise input is reversed), and verifies convexity with a
    /// [`CONVEXITY_CROSS_REL`] · scale² slack on every cross product.
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeomError> {
        for (index, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(GeomError::NotFinite { index });
            }
        }
        let diameter = loop_diameter(&vertices);
        let mut verts = dedup_loop(vertices, VERTEX_DEDUP_REL * diameter);
        if verts.len() < 3 {
            return Err(GeomError::TooFewVertices);
        }
        if signed_area(&verts) < 0.0 {
            verts.reverse();
        }
        // Convexity: every consecutive edge pair must turn left (or be
        // straight within the rounding slack).
        let slack = CONVEXITY_CROSS_REL * diameter * diameter;
        let n = verts.len();
        for i in 0..n {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            let c = verts[(i + 2) % n];
            if (b - a).cross(c - b) < -slack {
                return Err(GeomError::NotConvex { index: (i + 1) % n });
            }
        }
        let area = signed_area(&verts);
        if area <= 0.0 {
            return Err(GeomError::TooFewVertices);
        }
        Ok(Self::from_loop_unchecked(verts))
    }

    /// Axis-aligned square [a, b]² (the usual test and simulation domain).
    ///
    /// # Panics
    /// If `a >= b`.
    pub fn square(a: f64, b: f64) -> Self {
        assert!(a < b, "square(a, b) needs a < b, got [{a}, {b}]");
        Self::from_loop_unchecked(alloc::vec![
            Point2::new(a, a),
            Point2::new(b, a),
            Point2::new(b, b),
            Point2::new(a, b),
        ])
    }

    /// Axis-aligned rectangle from min/max corners.
    ///
    /// # Panics
    /// If the box is empty in either axis.
    pub fn rect(min: Point2, max: Point2) -> Self {
        assert!(
            min.x < max.x && min.y < max.y,
            "rect needs min < max componentwise"
        );
        Self::from_loop_unchecked(alloc::vec![
            Point2::new(min.x, min.y),
            Point2::new(max.x, min.y),
            Point2::new(max.x, max.y),
            Point2::new(min.x, max.y),
        ])
    }

    /// Regular n-gon centred at `center` with *exactly* the requested area
    /// (the circumradius is derived from the area, not the other way
    /// around): the standard polygonal stand-in for a disk domain.
    ///
    /// # Panics
    /// If `sides < 3` or `area <= 0`.
    pub fn regular_polygon(center: Point2, sides: usize, area: f64) -> Self {
        assert!(sides >= 3, "regular_polygon needs at least 3 sides");
        assert!(area > 0.0, "regular_polygon needs positive area");
        let n = sides as f64;
        let step = core::f64::consts::TAU / n;
        // area = n · ½ R² sin(2π/n)  ⇒  R = sqrt(2·area / (n sin(2π/n)))
        let radius = (2.0 * area / (n * step.sin())).sqrt();
        let verts = (0..sides)
            .map(|k| {
                let theta = step * k as f64;
                center + Point2::new(radius * theta.cos(), radius * theta.sin())
            })
            .collect();
        Self::from_loop_unchecked(verts)
    }

    /// Internal: trust the loop (CCW, deduplicated, convex) and cache
    /// moments. Collapses to the empty polygon if the loop is degenerate.
    pub(crate) fn from_loop_unchecked(vertices: Vec<Point2>) -> Self {
        if vertices.len() < 3 {
            return Self::empty();
        }
        let area = signed_area(&vertices);
        if !(area > 0.0) {
            return Self::empty();
        }
        let centroid = loop_centroid(&vertices, area);
        Self {
            vertices,
            area,
            centroid,
        }
    }

    #[inline]
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Cached area (0 for the empty polygon).
    #[inline]
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Cached centroid. Meaningless (origin) for the empty polygon.
    #[inline]
    pub fn centroid(&self) -> Point2 {
        self.centroid
    }

    /// Largest pairwise vertex distance: the scale that relative geometric
    /// tolerances multiply. O(V²), intended for domains, not per-cell use.
    pub fn diameter(&self) -> f64 {
        loop_diameter(&self.vertices)
    }

    /// Axis-aligned bounding box `(min, max)`. Zero box when empty.
    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            min.x = min.x.min(v.x);
            min.y = min.y.min(v.y);
            max.x = max.x.max(v.x);
            max.y = max.y.max(v.y);
        }
        if self.vertices.is_empty() {
            return (Point2::ZERO, Point2::ZERO);
        }
        (min, max)
    }

    /// Point-in-polygon test with a small convexity-band slack (points on
    /// the boundary count as inside).
    pub fn contains(&self, p: Point2) -> bool {
        if self.vertices.len() < 3 {
            return false;
        }
        let scale_sq = self.area; // O(scale²), cheap stand-in for diameter²
        let slack = CONVEXITY_CROSS_REL * scale_sq.max(f64::MIN_POSITIVE);
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            (b - a).cross(p - a) >= -slack
        })
    }

    /// Nearest point of the (closed) polygon to `p`: `p` itself when
    /// inside, otherwise the closest boundary point. Origin when empty.
    pub fn project(&self, p: Point2) -> Point2 {
        if self.contains(p) {
            return p;
        }
        let n = self.vertices.len();
        let mut best = Point2::ZERO;
        let mut best_d = f64::INFINITY;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let q = closest_on_segment(p, a, b);
            let d = p.distance(q);
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        best
    }

    /// Distance from `p` to the polygon (0 inside).
    pub fn distance_to(&self, p: Point2) -> f64 {
        if self.is_empty() {
            return f64::INFINITY;
        }
        p.distance(self.project(p))
    }
}

/// Clip a convex polygon by a half-plane.
///
/// Returns `poly ∩ h` (possibly empty). New vertices on the cut line come
/// from linear interpolation along the crossed edges; the operation is
/// idempotent: clipping twice by the same half-plane changes nothing.
pub fn clip_halfplane(poly: &ConvexPolygon, h: &HalfPlane) -> ConvexPolygon {
    let verts = poly.vertices();
    if verts.is_empty() {
        return ConvexPolygon::empty();
    }
    let labels = alloc::vec![(); verts.len()];
    let mut out_v = Vec::with_capacity(verts.len() + 1);
    let mut out_l = Vec::with_capacity(verts.len() + 1);
    let (min, max) = poly.bounding_box();
    let eps = VERTEX_DEDUP_REL * (max - min).norm();
    clip_loop_labeled(verts, &labels, h, (), eps, &mut out_v, &mut out_l);
    ConvexPolygon::from_loop_unchecked(out_v)
}

/// Exact polygon moments about a reference point.
///
/// Returns `(area, centroid, second_moment)` where the second moment is
/// `∫_poly |x − ref|² dx`, all by closed-form per-edge integration
/// (Green's theorem on the ref-relative coordinates, which keeps the
/// summands O(diameter⁴) instead of O(|position|⁴)).
///
/// # Errors
/// [`GeomError::DegenerateCell`] for the empty polygon.
pub fn polygon_moments(
    poly: &ConvexPolygon,
    reference: Point2,
) -> Result<(f64, Point2, f64), GeomError> {
    if poly.is_empty() {
        return Err(GeomError::DegenerateCell);
    }
    Ok((
        poly.area(),
        poly.centroid(),
        second_moment_about(poly.vertices(), reference),
    ))
}

/// `∫_poly |x − ref|² dx` for a CCW loop (0 for loops with < 3 vertices).
///
/// Per-edge formula in ref-relative coordinates p = v − ref:
/// `I = (1/12) Σ_k (p_k × p_{k+1}) · (|p_k|² + p_k·p_{k+1} + |p_{k+1}|²)`.
pub fn second_moment_about(verts: &[Point2], reference: Point2) -> f64 {
    let n = verts.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in 0..n {
        let p = verts[k] - reference;
        let q = verts[(k + 1) % n] - reference;
        acc += p.cross(q) * (p.norm_sq() + p.dot(q) + q.norm_sq());
    }
    acc / 12.0
}

/// Sutherland–Hodgman clip of a labeled CCW loop by one half-plane.
///
/// `labels[k]` tags the directed edge `verts[k] → verts[k+1]`; surviving
/// portions keep their tags and the new edge along the cut line is tagged
/// `cut`. This is how the tessellation learns which neighbour produced
/// which cell edge without re-deriving lines afterwards.
///
/// `eps` (length units) plays two roles:
/// - **Excess snapping**: vertices within `eps` of the cut line count as
///   exactly on it. Without this, a cut vertex from a previous clip whose
///   excess rounds to ±few·ulp makes the crossing parameter
///   `t = ea/(ea − eb)` an O(1) garbage value on a nearly-on-line edge,
///   inserting spurious vertices; snapping makes re-clipping the identity.
/// - **Vertex merging**: consecutive output vertices closer than `eps` are
///   merged. The survivor keeps the *later* vertex's outgoing label (the
///   zero-length edge being dropped is the earlier one's); in the
///   wrap-around case (last ≈ first) the first vertex keeps its own label
///   for the same reason.
///
/// Outputs with fewer than 3 distinct vertices are cleared to empty.
pub(crate) fn clip_loop_labeled<L: Copy>(
    verts: &[Point2],
    labels: &[L],
    h: &HalfPlane,
    cut: L,
    eps: f64,
    out_verts: &mut Vec<Point2>,
    out_labels: &mut Vec<L>,
) {
    debug_assert_eq!(verts.len(), labels.len());
    out_verts.clear();
    out_labels.clear();
    let n = verts.len();
    if n == 0 {
        return;
    }
    let snap = |e: f64| if e.abs() <= eps { 0.0 } else { e };
    let mut excess = Vec::with_capacity(n);
    for v in verts {
        excess.push(snap(h.excess(*v)));
    }
    // Emit, per input edge a→b: `a` if inside (excess ≤ 0), then the
    // crossing point if the edge strictly crosses the boundary. The label
    // of an emitted vertex tags the edge *leaving* it: surviving pieces of
    // edge k keep labels[k]; wherever the result boundary leaves the
    // polygon boundary to run along the cut line, the label switches to
    // `cut` — mid-edge that is the leaving crossing, and when the loop
    // leaves exactly at a vertex (ea = 0, eb > 0) it is that vertex.
    for k in 0..n {
        let (a, ea, la) = (verts[k], excess[k], labels[k]);
        let j = (k + 1) % n;
        let (b, eb) = (verts[j], excess[j]);
        if ea <= 0.0 {
            let leaving_at_vertex = ea == 0.0 && eb > 0.0;
            out_verts.push(a);
            out_labels.push(if leaving_at_vertex { cut } else { la });
        }
        if ea < 0.0 && eb > 0.0 {
            // Leaving mid-edge: from p the result boundary runs along the
            // cut line.
            let t = ea / (ea - eb);
            out_verts.push(a + (b - a) * t);
            out_labels.push(cut);
        } else if ea > 0.0 && eb < 0.0 {
            // Entering mid-edge: from p the boundary continues along the
            // surviving tail of edge k.
            let t = ea / (ea - eb);
            out_verts.push(a + (b - a) * t);
            out_labels.push(la);
        }
        // ea > 0, eb == 0: entering exactly at b; b is emitted by the next
        // iteration with its own label — nothing to add here.
    }
    merge_coincident(out_verts, out_labels, eps);
    if out_verts.len() < 3 {
        out_verts.clear();
        out_labels.clear();
    }
}

/// Merge consecutive coincident vertices in a closed loop.
///
/// When `p[i]` and `p[i+1]` coincide, the zero-length edge `p[i] → p[i+1]`
/// (carrying `labels[i]`) is dropped and the survivor keeps the *later*
/// vertex's outgoing label. In the wrap-around case the zero-length edge
/// is last → first, so the first vertex — the cyclically later endpoint —
/// keeps its own label.
fn merge_coincident<L: Copy>(verts: &mut Vec<Point2>, labels: &mut Vec<L>, eps: f64) {
    if verts.is_empty() {
        return;
    }
    let mut kept_v: Vec<Point2> = Vec::with_capacity(verts.len());
    let mut kept_l: Vec<L> = Vec::with_capacity(labels.len());
    for i in 0..verts.len() {
        if let Some(last) = kept_v.last() {
            if last.distance(verts[i]) <= eps {
                // Replace the outgoing label of the merged vertex.
                *kept_l.last_mut().expect("labels track verts") = labels[i];
                continue;
            }
        }
        kept_v.push(verts[i]);
        kept_l.push(labels[i]);
    }
    while kept_v.len() > 1 && kept_v.last().expect("nonempty").distance(kept_v[0]) <= eps {
        kept_v.pop();
        kept_l.pop();
    }
    *verts = kept_v;
    *labels = kept_l;
}

/// Shoelace signed area of a vertex loop (positive for CCW).
fn signed_area(verts: &[Point2]) -> f64 {
    let n = verts.len();
    if n < 3 {
        return 0.0;
    }
    // Anchor on the first vertex: keeps the cross products O(diameter²)
    // even when the polygon sits far from the origin.
    let o = verts[0];
    let mut acc = 0.0;
    for k in 1..n - 1 {
        acc += (verts[k] - o).cross(verts[k + 1] - o);
    }
    acc * 0.5
}

/// Centroid of a CCW loop with known positive area (same anchoring).
fn loop_centroid(verts: &[Point2], area: f64) -> Point2 {
    let n = verts.len();
    let o = verts[0];
    let mut acc = Point2::ZERO;
    for k in 1..n - 1 {
        let p = verts[k] - o;
        let q = verts[k + 1] - o;
        acc = acc + (p + q) * p.cross(q);
    }
    o + acc * (1.0 / (6.0 * area))
}

/// Largest pairwise vertex distance (0 for fewer than 2 vertices).
fn loop_diameter(verts: &[Point2]) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            best = best.max(verts[i].distance(verts[j]));
        }
    }
    best
}

/// Remove consecutive (and wrap-around) duplicates from an owned loop.
fn dedup_loop(verts: Vec<Point2>, eps: f64) -> Vec<Point2> {
    let mut out: Vec<Point2> = Vec::with_capacity(verts.len());
    for v in verts {
        if out.last().is_some_and(|last| last.distance(v) <= eps) {
            continue;
        }
        out.push(v);
    }
    while out.len() > 1 && out[out.len() - 1].distance(out[0]) <= eps {
        out.pop();
    }
    out
}

fn closest_on_segment(p: Point2, a: Point2, b: Point2) -> Point2 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq <= 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    a + ab * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SQRT1_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

    fn unit_square() -> ConvexPolygon {
        ConvexPolygon::square(0.0, 1.0)
    }

    #[test]
    fn square_moments_are_exact() {
        let sq = unit_square();
        assert_eq!(sq.area(), 1.0);
        assert_eq!(sq.centroid(), Point2::new(0.5, 0.5));
        let (area, centroid, second) =
            polygon_moments(&sq, Point2::new(0.5, 0.5)).expect("square is nonempty");
        assert_eq!(area, 1.0);
        assert_eq!(centroid, Point2::new(0.5, 0.5));
        // ∫∫ ((x−½)² + (y−½)²) over [0,1]² = 2·(1/12) = 1/6.
        assert!(
            (second - 1.0 / 6.0).abs() < 1e-15,
            "unit-square second moment about centroid: got {second}, want 1/6"
        );
    }

    #[test]
    fn rectangle_second_moment_matches_closed_form() {
        let r = ConvexPolygon::rect(Point2::ZERO, Point2::new(0.5, 1.0));
        let (area, _, second) =
            polygon_moments(&r, Point2::new(0.25, 0.5)).expect("rect is nonempty");
        assert_eq!(area, 0.5);
        // a×b rectangle about its centroid: ab(a²+b²)/12 = 0.5·1.25/12.
        let want = 0.5 * (0.25 + 1.0) / 12.0;
        assert!(
            (second - want).abs() < 1e-15,
            "rectangle second moment: got {second}, want {want}"
        );
    }

    #[test]
    fn axis_aligned_clip() {
        let cut = HalfPlane::new(Point2::new(1.0, 0.0), 0.5); // x ≤ 0.5
        let clipped = clip_halfplane(&unit_square(), &cut);
        assert!((clipped.area() - 0.5).abs() < 1e-15);
        assert_eq!(clipped.centroid(), Point2::new(0.25, 0.5));
    }

    #[test]
    fn containing_halfplane_is_identity() {
        let h = HalfPlane::new(Point2::new(1.0, 0.0), 10.0);
        let clipped = clip_halfplane(&unit_square(), &h);
        assert_eq!(clipped.vertices(), unit_square().vertices());
    }

    #[test]
    fn diagonal_clip_gives_corner_triangle() {
        // x + y ≤ 0.5 on the unit square → triangle (0,0),(0.5,0),(0,0.5).
        let h = HalfPlane::new(Point2::new(SQRT1_2, SQRT1_2), 0.5 * SQRT1_2);
        let tri = clip_halfplane(&unit_square(), &h);
        assert_eq!(tri.vertices().len(), 3);
        assert!(
            (tri.area() - 0.125).abs() < 1e-15,
            "corner triangle area: got {}, want 0.125",
            tri.area()
        );
    }

    #[test]
    fn clip_to_nothing_is_empty() {
        let h = HalfPlane::new(Point2::new(1.0, 0.0), -1.0); // x ≤ −1
        let clipped = clip_halfplane(&unit_square(), &h);
        assert!(clipped.is_empty());
        assert_eq!(clipped.area(), 0.0);
        assert!(polygon_moments(&clipped, Point2::ZERO).is_err());
    }

    #[test]
    fn clip_through_vertex_keeps_loop_clean() {
        // Cut passes exactly through (0,0) and (1,1).
        let h = HalfPlane::new(Point2::new(SQRT1_2, -SQRT1_2), 0.0); // x − y ≤ 0
        let half = clip_halfplane(&unit_square(), &h);
        assert_eq!(half.vertices().len(), 3, "diagonal cut yields a triangle");
        assert!((half.area() - 0.5).abs() < 1e-15);
        // No consecutive duplicates survived.
        let vs = half.vertices();
        for i in 0..vs.len() {
            let d = vs[i].distance(vs[(i + 1) % vs.len()]);
            assert!(d > 1e-9, "consecutive vertices {i} too close: {d}");
        }
    }

    #[test]
    fn validating_constructor_rejects_bad_loops() {
        assert_eq!(
            ConvexPolygon::new(vec![Point2::ZERO, Point2::new(1.0, 0.0)]),
            Err(GeomError::TooFewVertices)
        );
        // A reflex quad.
        let reflex = ConvexPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(0.9, 0.1), // pokes inward
            Point2::new(0.0, 2.0),
        ]);
        assert!(matches!(reflex, Err(GeomError::NotConvex { .. })));
        // Clockwise input is accepted and reversed.
        let cw = ConvexPolygon::new(vec![
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 0.0),
        ])
        .expect("clockwise square is fixed up");
        assert!(cw.area() > 0.0);
    }

    #[test]
    fn regular_polygon_has_exact_area_and_centroid() {
        let disk = ConvexPolygon::regular_polygon(Point2::ZERO, 256, 1.0);
        assert!(
            (disk.area() - 1.0).abs() < 1e-12,
            "256-gon area: got {}",
            disk.area()
        );
        assert!(disk.centroid().norm() < 1e-15);
    }

    #[test]
    fn projection_and_distance() {
        let sq = unit_square();
        assert_eq!(sq.project(Point2::new(0.5, 0.5)), Point2::new(0.5, 0.5));
        assert_eq!(sq.project(Point2::new(2.0, 0.5)), Point2::new(1.0, 0.5));
        assert_eq!(sq.project(Point2::new(2.0, 2.0)), Point2::new(1.0, 1.0));
        assert!((sq.distance_to(Point2::new(2.0, 0.5)) - 1.0).abs() < 1e-15);
        assert_eq!(sq.distance_to(Point2::new(0.1, 0.9)), 0.0);
    }

    /// Random convex polygon: convex hull of random points, via the
    /// validating constructor on angularly sorted hull points.
    fn random_convex(rng: &mut ChaCha8Rng, verts: usize) -> ConvexPolygon {
        // Points on a randomized ellipse are already in convex position.
        let cx = rng.random_range(-1.0..1.0);
        let cy = rng.random_range(-1.0..1.0);
        let rx = rng.random_range(0.3..1.5);
        let ry = rng.random_range(0.3..1.5);
        let mut angles: Vec<f64> = (0..verts)
            .map(|_| rng.random_range(0.0..core::f64::consts::TAU))
            .collect();
        angles.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let pts = angles
            .iter()
            .map(|t| Point2::new(cx + rx * t.cos(), cy + ry * t.sin()))
            .collect();
        ConvexPolygon::new(pts).unwrap_or_else(|_| ConvexPolygon::square(0.0, 1.0))
    }

    fn random_halfplane(rng: &mut ChaCha8Rng) -> HalfPlane {
        let theta = rng.random_range(0.0..core::f64::consts::TAU);
        HalfPlane::new(
            Point2::new(theta.cos(), theta.sin()),
            rng.random_range(-1.0..1.0),
        )
    }

    #[test]
    fn clip_is_idempotent_on_random_polygons() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for case in 0..200 {
            let poly = random_convex(&mut rng, 12);
            let h = random_halfplane(&mut rng);
            let once = clip_halfplane(&poly, &h);
            let twice = clip_halfplane(&once, &h);
            assert!(
                (once.area() - twice.area()).abs() <= 1e-12 * poly.area().max(1.0),
                "case {case}: clip not idempotent: {} vs {}",
                once.area(),
                twice.area()
            );
            assert_eq!(
                once.vertices().len(),
                twice.vertices().len(),
                "case {case}: second clip changed the vertex count"
            );
        }
    }

    #[test]
    fn clip_partitions_area_with_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(202);
        for case in 0..200 {
            let poly = random_convex(&mut rng, 10);
            let h = random_halfplane(&mut rng);
            let comp = HalfPlane::new(-h.normal(), -h.offset());
            let a = clip_halfplane(&poly, &h).area();
            let b = clip_halfplane(&poly, &comp).area();
            assert!(
                (a + b - poly.area()).abs() <= 1e-10 * poly.area(),
                "case {case}: {a} + {b} != {}",
                poly.area()
            );
        }
    }

    #[test]
    fn parallel_axis_identity_on_random_polygons() {
        let mut rng = ChaCha8Rng::seed_from_u64(303);
        for case in 0..50 {
            let poly = random_convex(&mut rng, 14);
            let r = Point2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let (area, c, i_ref) = polygon_moments(&poly, r).expect("nonempty");
            let (_, _, i_c) = polygon_moments(&poly, c).expect("nonempty");
            let want = i_c + area * (r - c).norm_sq();
            assert!(
                (i_ref - want).abs() <= 1e-10 * i_ref.abs().max(1e-300),
                "case {case}: parallel-axis identity broken: {i_ref} vs {want}"
            );
        }
    }

    #[test]
    fn moments_match_monte_carlo() {
        // 20 random convex polygons, 10⁶ samples each would be slow in CI;
        // 10⁵ with 3σ bounds exercises the same contract.
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        for case in 0..20 {
            let poly = random_convex(&mut rng, 9);
            let (min, max) = poly.bounding_box();
            let box_area = (max.x - min.x) * (max.y - min.y);
            let n = 100_000;
            let mut hits = 0u32;
            let mut sx = 0.0;
            let mut sy = 0.0;
            for _ in 0..n {
                let p = Point2::new(
                    rng.random_range(min.x..max.x),
                    rng.random_range(min.y..max.y),
                );
                if poly.contains(p) {
                    hits += 1;
                    sx += p.x;
                    sy += p.y;
                }
            }
            let frac = f64::from(hits) / n as f64;
            let mc_area = box_area * frac;
            // Binomial std error on the area estimate.
            let se_area = box_area * (frac * (1.0 - frac) / n as f64).sqrt();
            assert!(
                (mc_area - poly.area()).abs() <= 3.0 * se_area + 1e-12,
                "case {case}: MC area {mc_area} vs exact {} (3σ = {})",
                poly.area(),
                3.0 * se_area
            );
            let cx = sx / f64::from(hits);
            let cy = sy / f64::from(hits);
            // Conservative 3σ bound for the centroid of uniform samples.
            let spread = (max - min).norm();
            let se_c = spread / (f64::from(hits)).sqrt();
            assert!(
                (Point2::new(cx, cy) - poly.centroid()).norm() <= 3.0 * se_c,
                "case {case}: MC centroid ({cx}, {cy}) vs exact {:?}",
                poly.centroid()
            );
        }
    }

    #[test]
    fn second_moment_positivity_and_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(505);
        for _ in 0..50 {
            let poly = random_convex(&mut rng, 8);
            let r = poly.centroid();
            let (_, _, i_c) = polygon_moments(&poly, r).expect("nonempty");
            assert!(i_c > 0.0, "second moment about centroid must be positive");
        }
    }
}
