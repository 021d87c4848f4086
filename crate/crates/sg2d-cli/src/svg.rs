//! SVG rendering of Laguerre tessellation snapshots.
//!
//! Visual conventions follow the classic presentation of these flows:
//! cells are filled on a blue→yellow ramp ordered by cell area (small
//! cells blue `rgb(53,42,135)`, large cells yellow `rgb(249,251,14)`),
//! cell boundaries and the Ω outline are black, seeds are solid black
//! dots, and each nonempty cell's centroid is an open circle.
//!
//! Geometry is emitted in world units: the `viewBox` is Ω's bounding box
//! padded by 5% of its larger extent, and the y-axis is flipped by the
//! affine map `y ↦ (y_min + y_max) − y` (SVG's y grows downward) — which
//! maps the bounding box onto itself, so x-coordinates in the output are
//! exactly the model's x-coordinates and stable for visual diffing.
//! Coordinates carry six decimals; stroke widths and marker radii scale
//! with the domain extent.

use std::fmt::Write as _;

use sg2d::{ConvexPolygon, DiscreteMeasure, LaguerreDiagram, Point2};

/// Ramp endpoint for the smallest cell (dark blue).
const RAMP_LOW: (u8, u8, u8) = (53, 42, 135);
/// Ramp endpoint for the largest cell (yellow).
const RAMP_HIGH: (u8, u8, u8) = (249, 251, 14);

/// Tunable marker/stroke sizes, as fractions of the domain's larger
/// bounding-box extent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderStyle {
    /// Cell-boundary and outline stroke width (default 0.2% of extent).
    pub stroke_width_rel: f64,
    /// Seed dot radius (default 0.5% of extent).
    pub seed_radius_rel: f64,
    /// Centroid open-circle radius (default 0.8% of extent, so the
    /// circle stays visible around the seed dot when they coincide).
    pub centroid_radius_rel: f64,
    /// Draw seed dots.
    pub draw_seeds: bool,
    /// Draw centroid circles.
    pub draw_centroids: bool,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            stroke_width_rel: 0.002,
            seed_radius_rel: 0.005,
            centroid_radius_rel: 0.008,
            draw_seeds: true,
            draw_centroids: true,
        }
    }
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.6}")
}

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let channel = |lo: u8, hi: u8| -> u8 {
        (lo as f64 + t * (hi as f64 - lo as f64)).round() as u8
    };
    format!(
        "rgb({},{},{})",
        channel(RAMP_LOW.0, RAMP_HIGH.0),
        channel(RAMP_LOW.1, RAMP_HIGH.1),
        channel(RAMP_LOW.2, RAMP_HIGH.2)
    )
}

/// Render one tessellation snapshot to a standalone SVG document.
///
/// `measure` supplies the seed positions (the diagram itself stores only
/// cells); it must be the measure the diagram was built from.
///
/// # Panics
/// If the diagram and measure disagree on N.
pub fn render_svg(
    domain: &ConvexPolygon,
    diagram: &LaguerreDiagram,
    measure: &DiscreteMeasure,
    style: &RenderStyle,
) -> String {
    assert_eq!(diagram.n(), measure.n(), "diagram/measure size mismatch");
    let (lo, hi) = domain.bounding_box();
    let extent = (hi.x - lo.x).max(hi.y - lo.y);
    let margin = 0.05 * extent;
    // y ↦ (y_min + y_max) − y maps [y_min, y_max] onto itself.
    let flip_sum = lo.y + hi.y;
    let flip = move |p: Point2| Point2::new(p.x, flip_sum - p.y);

    let stroke = style.stroke_width_rel * extent;
    let seed_r = style.seed_radius_rel * extent;
    let centroid_r = style.centroid_radius_rel * extent;

    let path_of = |poly: &ConvexPolygon| -> String {
        let mut d = String::new();
        for (k, &v) in poly.vertices().iter().enumerate() {
            let p = flip(v);
            let _ = write!(
                d,
                "{}{},{}",
                if k == 0 { "M " } else { " L " },
                fmt_coord(p.x),
                fmt_coord(p.y)
            );
        }
        d.push_str(" Z");
        d
    };

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        fmt_coord(lo.x - margin),
        fmt_coord(lo.y - margin),
        fmt_coord(hi.x - lo.x + 2.0 * margin),
        fmt_coord(hi.y - lo.y + 2.0 * margin)
    );
    svg.push('\n');

    // Area ramp: linear in cell area between the smallest and largest
    // nonempty cells; a uniform tessellation renders mid-ramp.
    let (min_area, max_area) = diagram
        .areas()
        .iter()
        .filter(|a| **a > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| {
            (lo.min(a), hi.max(a))
        });
    let area_t = |a: f64| -> f64 {
        if !(max_area > min_area) {
            0.5
        } else {
            (a - min_area) / (max_area - min_area)
        }
    };

    for (cell, &area) in diagram.cells().iter().zip(diagram.areas()) {
        if cell.is_empty() {
            continue;
        }
        let _ = writeln!(
            svg,
            r#"  <path class="cell" d="{}" fill="{}" stroke="black" stroke-width="{}"/>"#,
            path_of(cell),
            ramp(area_t(area)),
            fmt_coord(stroke)
        );
    }

    let _ = writeln!(
        svg,
        r#"  <path class="domain" d="{}" fill="none" stroke="black" stroke-width="{}"/>"#,
        path_of(domain),
        fmt_coord(1.5 * stroke)
    );

    if style.draw_seeds {
        for &z in measure.seeds() {
            let p = flip(z);
            let _ = writeln!(
                svg,
                r#"  <circle class="seed" cx="{}" cy="{}" r="{}" fill="black"/>"#,
                fmt_coord(p.x),
                fmt_coord(p.y),
                fmt_coord(seed_r)
            );
        }
    }

    if style.draw_centroids {
        for (i, &c) in diagram.centroids().iter().enumerate() {
            if diagram.areas()[i] <= 0.0 {
                continue; // empty cell: the stored centroid is a placeholder
            }
            let p = flip(c);
            let _ = writeln!(
                svg,
                r#"  <circle class="centroid" cx="{}" cy="{}" r="{}" fill="none" stroke="black" stroke-width="{}"/>"#,
                fmt_coord(p.x),
                fmt_coord(p.y),
                fmt_coord(centroid_r),
                fmt_coord(stroke)
            );
        }
    }

    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use sg2d::laguerre::build_diagram;
    use sg2d::WeightVector;

    fn count(haystack: &str, needle: &str) -> usize {
        haystack.matches(needle).count()
    }

    #[test]
    fn single_seed_renders_one_polygon_one_dot_one_circle() {
        let domain = ConvexPolygon::square(0.0, 1.0);
        let measure =
            DiscreteMeasure::new(vec![Point2::new(0.4, 0.6)], vec![1.0]).expect("valid");
        let diagram =
            build_diagram(&domain, &measure, &WeightVector::zeros(1)).expect("builds");
        let svg = render_svg(&domain, &diagram, &measure, &RenderStyle::default());
        assert_eq!(count(&svg, r#"class="cell""#), 1);
        assert_eq!(count(&svg, r#"class="seed""#), 1);
        assert_eq!(count(&svg, r#"class="centroid""#), 1);
        assert_eq!(count(&svg, r#"class="domain""#), 1);
    }

    #[test]
    fn unbalanced_two_seed_cut_line_lands_at_quarter() {
        // Masses (0.25, 0.75) with symmetric seeds put the power bisector
        // at x = 0.25 (the weights below are the solved optimum for this
        // configuration); both cells must emit vertices with
        // x = "0.250000" in their path data.
        let domain = ConvexPolygon::square(0.0, 1.0);
        let measure = DiscreteMeasure::new(
            vec![Point2::new(0.25, 0.5), Point2::new(0.75, 0.5)],
            vec![0.25, 0.75],
        )
        .expect("valid");
        let weights = WeightVector::from(vec![-0.25, 0.0]);
        let diagram = build_diagram(&domain, &measure, &weights).expect("builds");
        assert!(
            (diagram.areas()[0] - 0.25).abs() < 1e-12,
            "weights are the optimum for these masses"
        );
        let svg = render_svg(&domain, &diagram, &measure, &RenderStyle::default());
        assert!(
            count(&svg, "0.250000,") >= 2,
            "cut line x = 0.25 missing from path data:\n{svg}"
        );
    }

    #[test]
    fn viewbox_padding_is_five_percent() {
        let domain = ConvexPolygon::square(-1.0, 1.0);
        let measure =
            DiscreteMeasure::new(vec![Point2::new(0.0, 0.0)], vec![4.0]).expect("valid");
        let diagram =
            build_diagram(&domain, &measure, &WeightVector::zeros(1)).expect("builds");
        let svg = render_svg(&domain, &diagram, &measure, &RenderStyle::default());
        // Extent 2, margin 0.1: viewBox = (−1.1, −1.1, 2.2, 2.2).
        assert!(
            svg.contains(r#"viewBox="-1.100000 -1.100000 2.200000 2.200000""#),
            "viewBox wrong:\n{svg}"
        );
    }

    #[test]
    fn area_ramp_orders_blue_to_yellow() {
        // Cut at x = 0.25: the small left cell must be bluer (low R,
        // high B) than the large right cell.
        let domain = ConvexPolygon::square(0.0, 1.0);
        let measure = DiscreteMeasure::new(
            vec![Point2::new(0.25, 0.5), Point2::new(0.75, 0.5)],
            vec![0.25, 0.75],
        )
        .expect("valid");
        let diagram =
            build_diagram(&domain, &measure, &WeightVector::from(vec![-0.25, 0.0]))
                .expect("builds");
        let svg = render_svg(&domain, &diagram, &measure, &RenderStyle::default());
        assert!(
            svg.contains("rgb(53,42,135)") && svg.contains("rgb(249,251,14)"),
            "ramp endpoints missing:\n{svg}"
        );
        let blue_at = svg.find("rgb(53,42,135)").expect("blue present");
        let first_cell = svg.find(r#"class="cell""#).expect("cells present");
        // The first-emitted cell is the smaller (left) one.
        assert!(
            blue_at > first_cell && blue_at < svg[first_cell..].find('\n').map(|k| first_cell + k).expect("newline"),
            "small cell is not the blue one"
        );
    }

    #[test]
    fn empty_cells_draw_no_polygon_or_centroid() {
        // A seed far outside Ω with a hostile weight gets an empty cell:
        // its dot still appears (the seed exists) but no path/centroid.
        let domain = ConvexPolygon::square(0.0, 1.0);
        let measure = DiscreteMeasure::new(
            vec![Point2::new(0.5, 0.5), Point2::new(40.0, 0.5)],
            vec![0.999, 0.001],
        )
        .expect("valid");
        let diagram =
            build_diagram(&domain, &measure, &WeightVector::zeros(2)).expect("builds");
        assert_eq!(diagram.areas()[1], 0.0, "far seed must have an empty cell");
        let svg = render_svg(&domain, &diagram, &measure, &RenderStyle::default());
        assert_eq!(count(&svg, r#"class="cell""#), 1);
        assert_eq!(count(&svg, r#"class="seed""#), 2);
        assert_eq!(count(&svg, r#"class="centroid""#), 1);
    }
}
